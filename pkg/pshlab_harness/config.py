"""
Experiment configuration.

A config is a flat mapping of dotted keys to values, read from JSON or
YAML:

    {
      "operation": "translation_check",
      "domain.name": "cone",
      "domain.params.C": 3.0,
      "numeric.seed": 7
    }

Every knob has a default, so an empty document is a valid config and runs
the acceptance suite. `domain.params.*` and `field.params.*` are open
prefixes checked against the catalog entry they parameterise.
"""

import json
import logging
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Any

import yaml
from django.conf import settings

from pshlab_domains.catalog import CATALOG, CatalogName
from pshlab_harness.exceptions import ConfigError
from pshlab_psh.fields import FieldName
from pshlab_psh.modulus import MIN_PAIRS
from pshlab_special.gain import GainForm

logger = logging.getLogger(__name__)

DOMAIN_PARAMS = "domain.params."
FIELD_PARAMS = "field.params."
FIELD_PARAM_NAMES = ("value",)
ACCEPTANCE_CRITERIA = tuple(range(1, 10))

_JSON_KEY = re.compile(r'^\s*[{,]?\s*"((?:[^"\\]|\\.)*)"\s*:')


class Operation(StrEnum):
    ACCEPTANCE = "acceptance"
    VERIFY_ATLAS = "verify_atlas"
    SEGMENT_CHECK = "segment_check"
    TRANSLATION_CHECK = "translation_check"
    GAIN_TABLE = "gain_table"
    BUILD_APPROXIMANT = "build_approximant"
    CHECK_APPROXIMANT = "check_approximant"
    BUILD_EXHAUSTION = "build_exhaustion"
    EVALUATE_EXHAUSTION = "evaluate_exhaustion"
    CHECK_BOUNDS = "check_bounds"
    CHECK_LEVI_FLOOR = "check_levi_floor"
    TRACE = "trace"
    EMIT_FIGURE_DATA = "emit_figure_data"


class FigureName(StrEnum):
    CUSP_FIG1 = "cusp_fig1"
    EXHAUSTION_PROFILE = "exhaustion_profile"
    ERROR_VS_NU = "error_vs_nu"


class OutputFormat(StrEnum):
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class Knob:
    default: Any
    kind: type
    help: str
    choices: tuple[str, ...] = ()
    # Open interval (low, high); None leaves that side unbounded.
    low: float | None = None
    high: float | None = None
    minimum: int | None = None
    optional: bool = False


def knobs() -> dict[str, Knob]:
    """The key space with defaults; a few defaults come from settings."""
    return {
        "operation": Knob("acceptance", str, "Operation to run", tuple(Operation)),
        "domain.name": Knob("loglip_cusp", str, "Catalog domain", tuple(CatalogName)),
        "field.name": Knob("abs_sq", str, "Test field phi", tuple(FieldName)),
        "gain.form": Knob("loglip", str, "Gain form for gain tables", tuple(GainForm)),
        "gain.C": Knob(1.0, float, "Gain constant C", low=0.0),
        "gain.C_tilde": Knob(1.0, float, "Gain constant C_tilde", low=0.0),
        "gain.gamma": Knob(0.5, float, "Hoelder exponent", low=0.0, high=1.0),
        "gain.decades": Knob(10, int, "Table rows eps = 10^-k, k = 1..decades", minimum=1),
        "numeric.seed": Knob(settings.PSHLAB_DEFAULT_SEED, int, "Random seed", minimum=0),
        "numeric.boundary_samples": Knob(256, int, "Boundary samples", minimum=1),
        "numeric.samples": Knob(2000, int, "Interior samples for the exhaustion", minimum=1),
        "numeric.grid": Knob(10**4, int, "Closure points for the error check", minimum=1),
        "numeric.pair_samples": Knob(
            20000, int, "Pairs for the empirical modulus", minimum=MIN_PAIRS
        ),
        "numeric.nu": Knob(1e-3, float, "Translation size nu", low=0.0, high=1.0),
        "numeric.patch": Knob(0, int, "Atlas patch index", minimum=0),
        "numeric.points": Knob([], list, "Explicit evaluation points"),
        "numeric.depth": Knob(1e-6, float, "Boundary distance of ray points", low=0.0, high=1.0),
        "numeric.eps": Knob(None, float, "Fixed eps for w_eps", low=0.0, high=1.0, optional=True),
        "numeric.levi_step": Knob(1e-5, float, "Levi stencil step", low=0.0),
        "numeric.levi_samples": Knob(100, int, "Near-boundary Levi samples", minimum=1),
        "numeric.oracle_samples": Knob(
            10**6, int, "Brute-force oracle samples (0 skips the oracle)", minimum=0
        ),
        "exhaustion.lambda_constant": Knob(
            None, float, "Bump curvature constant", low=0.0, optional=True
        ),
        "exhaustion.gamma": Knob(None, float, "Patch weight gamma", low=1.0, optional=True),
        "exhaustion.rho": Knob(0.9, float, "eps grid ratio", low=0.0, high=1.0),
        "exhaustion.floor": Knob(1e-10, float, "Smallest eps of the grid", low=0.0, high=1.0),
        "figures.which": Knob("cusp_fig1", str, "Figure data to emit", tuple(FigureName)),
        "acceptance.only": Knob([], list, "Acceptance criteria to run (empty runs all)"),
        "acceptance.reduced": Knob(False, bool, "Use reduced sample counts"),
        "output.dir": Knob(str(settings.PSHLAB_OUTPUT_DIR), str, "Output directory"),
        "output.format": Knob("json", str, "Printed format", tuple(OutputFormat)),
    }


def _coerce(key: str, knob: Knob, value: Any, line: int | None) -> Any:
    if value is None:
        if knob.optional:
            return None
        raise ConfigError("value is required", key, line)
    if knob.kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", key, line)
        return value
    if knob.kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"expected a list, got {value!r}", key, line)
        return value
    if knob.kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key, line)
        if knob.minimum is not None and value < knob.minimum:
            raise ConfigError(f"must be >= {knob.minimum}, got {value}", key, line)
        return value
    if knob.kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key, line)
        number = float(value)
        if not math.isfinite(number):
            raise ConfigError(f"must be finite, got {value!r}", key, line)
        if knob.low is not None and number <= knob.low:
            raise ConfigError(f"must be > {knob.low:g}, got {number:g}", key, line)
        if knob.high is not None and number >= knob.high:
            raise ConfigError(f"must be < {knob.high:g}, got {number:g}", key, line)
        return number
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", key, line)
    if knob.choices and value not in knob.choices:
        raise ConfigError(
            f"unknown name {value!r}; expected one of {', '.join(knob.choices)}", key, line
        )
    return value


def _check_params(
    prefix: str, values: Mapping[str, Any], allowed: Mapping[str, Any], lines: Mapping[str, int]
) -> dict[str, float]:
    params: dict[str, float] = {}
    for key, value in values.items():
        if not key.startswith(prefix):
            continue
        name = key[len(prefix) :]
        line = lines.get(key)
        if name not in allowed:
            expected = ", ".join(sorted(allowed)) or "none"
            raise ConfigError(f"unknown parameter {name!r}; expected {expected}", key, line)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key, line)
        params[name] = float(value)
    return params


def parse_config(
    raw: Mapping[str, Any],
    lines: Mapping[str, int] | None = None,
    source: str = "<mapping>",
) -> "ExperimentConfig":
    """Validate a flat mapping against the key space and fill in the defaults."""
    lines = lines or {}
    table = knobs()
    values: dict[str, Any] = {}
    for key, value in raw.items():
        line = lines.get(key)
        if isinstance(value, dict):
            raise ConfigError("configs are flat; use dotted keys instead of nesting", key, line)
        if key.startswith((DOMAIN_PARAMS, FIELD_PARAMS)):
            continue
        if key not in table:
            raise ConfigError("unknown key", key, line)
        values[key] = _coerce(key, table[key], value, line)
    for key, knob in table.items():
        values.setdefault(key, knob.default)

    entry = CATALOG[CatalogName(values["domain.name"])]
    domain_params = {k: v for k, v in raw.items() if k.startswith(DOMAIN_PARAMS)}
    field_params = {k: v for k, v in raw.items() if k.startswith(FIELD_PARAMS)}
    for name, value in _check_params(DOMAIN_PARAMS, domain_params, entry.defaults, lines).items():
        values[DOMAIN_PARAMS + name] = value
    allowed = dict.fromkeys(FIELD_PARAM_NAMES)
    for name, value in _check_params(FIELD_PARAMS, field_params, allowed, lines).items():
        values[FIELD_PARAMS + name] = value

    only = values["acceptance.only"]
    for item in only:
        if isinstance(item, bool) or item not in ACCEPTANCE_CRITERIA:
            raise ConfigError(
                f"acceptance criteria are numbered 1..9, got {item!r}",
                "acceptance.only",
                lines.get("acceptance.only"),
            )
    values["acceptance.only"] = sorted(set(only))
    for i, point in enumerate(values["numeric.points"]):
        if not isinstance(point, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in point
        ):
            raise ConfigError(
                f"point {i} must be a list of numbers, got {point!r}",
                "numeric.points",
                lines.get("numeric.points"),
            )
    return ExperimentConfig(dict(sorted(values.items())), source)


def _json_lines(text: str) -> dict[str, int]:
    """1-based line of the first occurrence of each top-level key."""
    found: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = _JSON_KEY.match(line)
        if match:
            found.setdefault(json.loads(f'"{match.group(1)}"'), number)
    return found


def parse_json(text: str, source: str = "<json>") -> "ExperimentConfig":
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(raw, dict):
        raise ConfigError("a config must be a JSON object", line=1)
    return parse_config(raw, _json_lines(text), source)


def parse_yaml(text: str, source: str = "<yaml>") -> "ExperimentConfig":
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {exc}", line=line) from exc
    if raw is None:
        return parse_config({}, source=source)
    if not isinstance(raw, dict) or not isinstance(node, yaml.MappingNode):
        raise ConfigError("a config must be a YAML mapping", line=1)
    lines = {
        str(key.value): key.start_mark.line + 1
        for key, _ in node.value
        if isinstance(key, yaml.ScalarNode)
    }
    return parse_config({str(k): v for k, v in raw.items()}, lines, source)


def load_config(path: Path | str | None) -> "ExperimentConfig":
    """Read a config file; .yaml/.yml go through YAML, anything else through JSON."""
    if path is None:
        return parse_config({}, source="<defaults>")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix.lower() in (".yaml", ".yml"):
        config = parse_yaml(text, str(path))
    else:
        config = parse_json(text, str(path))
    logger.debug("Loaded config %s", path)
    return config


def parse_override(item: str) -> tuple[str, Any]:
    """KEY=VALUE from the command line; VALUE is read as JSON, else kept as a string."""
    key, sep, text = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"expected KEY=VALUE, got {item!r}")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


@dataclass(frozen=True)
class ExperimentConfig:
    values: Mapping[str, Any]
    source: str = "<defaults>"

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def operation(self) -> Operation:
        return Operation(self.values["operation"])

    @property
    def seed(self) -> int:
        return int(self.values["numeric.seed"])

    @property
    def domain_name(self) -> str:
        return str(self.values["domain.name"])

    @property
    def domain_params(self) -> dict[str, float]:
        return {
            key[len(DOMAIN_PARAMS) :]: value
            for key, value in self.values.items()
            if key.startswith(DOMAIN_PARAMS)
        }

    @property
    def field_params(self) -> dict[str, float]:
        return {
            key[len(FIELD_PARAMS) :]: value
            for key, value in self.values.items()
            if key.startswith(FIELD_PARAMS)
        }

    @property
    def reduced(self) -> bool:
        return bool(self.values["acceptance.reduced"])

    @property
    def output_dir(self) -> Path:
        return Path(self.values["output.dir"])

    @property
    def output_format(self) -> OutputFormat:
        return OutputFormat(self.values["output.format"])

    def with_overrides(self, overrides: Mapping[str, Any]) -> "ExperimentConfig":
        """A new config with `overrides` applied on top; None values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        base = dict(self.values)
        if "domain.name" in changes and changes["domain.name"] != base["domain.name"]:
            base = {k: v for k, v in base.items() if not k.startswith(DOMAIN_PARAMS)}
        return parse_config({**base, **changes}, source=self.source)

    def as_record(self) -> dict[str, Any]:
        return dict(self.values)
