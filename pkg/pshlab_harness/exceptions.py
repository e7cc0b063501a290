from pshlab.exceptions import PshlabException


class HarnessError(PshlabException):
    pass


class ConfigError(HarnessError):
    """Raised for malformed configs, unknown keys or names, and out-of-range knobs."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None) -> None:
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line
