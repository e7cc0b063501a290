class PshlabException(Exception):
    pass
