"""Flat key-value run configuration: parsing, validation, serialization.

The configuration format is one ``key = value`` assignment per line, ``#``
comments allowed, no nesting.  Unknown keys are errors (never silently
ignored), every violated constraint is reported with its field name and
bound, and ``parse_config(serialize_config(cfg))`` round-trips exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sequences import SequenceSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "config_echo"]

_REQUIRED = ("regime", "a", "p", "s", "sigma", "rho", "seed")
_FIELDS = _REQUIRED + (
    "n_grid", "replications", "eta", "variant", "pen_const_known",
    "pen_const_unknown", "enforce_pair", "j_max", "out_dir",
)
_VARIANTS = ("known", "data_driven", "both")

# grid defaults keep desk-scale runtimes of minutes
_DEFAULT_GRID = {
    "PP": (250, 500, 1000, 2000, 4000),
    "EP": (250, 500, 1000, 2000, 4000),
    "PE": (500, 2000, 8000),
}
_DEFAULT_REPLICATIONS = 200


class ConfigError(ValueError):
    """Invalid configuration; ``messages`` lists every violation."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment configuration (all model-level knobs in one place)."""

    regime: str
    a: float
    p: float
    s: float
    sigma: float
    rho: float
    seed: int
    n_grid: tuple | None = None
    replications: int | None = None
    eta: float = 3.0
    variant: str = "data_driven"
    pen_const_known: float = 192.0
    pen_const_unknown: float = 1920.0
    enforce_pair: bool = True
    j_max: int | None = None
    out_dir: str = "."

    def __post_init__(self):
        if self.n_grid is None:
            object.__setattr__(self, "n_grid", _DEFAULT_GRID.get(self.regime, ()))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.replications is None:
            object.__setattr__(self, "replications", _DEFAULT_REPLICATIONS)
        errors = []
        if self.regime not in ("PP", "EP", "PE"):
            errors.append(f"regime: must be one of PP, EP, PE, got {self.regime!r}")
        else:
            if self.regime in ("PP", "EP") and not self.a > 0.5:
                errors.append(f"a: must satisfy a > 1/2 under regime {self.regime}, got {self.a}")
            if self.regime == "PE" and not self.a > 0.0:
                errors.append(f"a: must satisfy a > 0 under regime PE, got {self.a}")
            if self.regime in ("PP", "PE") and not self.p > max(0.0, self.s):
                errors.append(
                    f"p: must satisfy p > max(0, s) under regime {self.regime}, "
                    f"got p = {self.p} with s = {self.s}"
                )
            if self.regime == "EP" and not self.p > 0.0:
                errors.append(f"p: must satisfy p > 0 under regime EP, got {self.p}")
        if self.sigma < 0.0:
            errors.append(f"sigma: must satisfy sigma >= 0, got {self.sigma}")
        if not self.rho > 0.0:
            errors.append(f"rho: must satisfy rho > 0, got {self.rho}")
        if len(self.n_grid) < 1:
            errors.append("n_grid: must contain at least one sample size")
        if any(n < 2 for n in self.n_grid):
            errors.append(f"n_grid: every entry must satisfy n >= 2, got {self.n_grid}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            errors.append(f"n_grid: entries must be strictly increasing, got {self.n_grid}")
        if self.replications < 1:
            errors.append(f"replications: must satisfy replications >= 1, got {self.replications}")
        if not 0 <= self.seed < 2**64:
            errors.append(f"seed: must be a 64-bit unsigned integer, got {self.seed}")
        if not self.eta >= 1.0:
            errors.append(f"eta: must satisfy eta >= 1, got {self.eta}")
        if self.variant not in _VARIANTS:
            errors.append(f"variant: must be one of {', '.join(_VARIANTS)}, got {self.variant!r}")
        if not self.pen_const_known > 0.0:
            errors.append(f"pen_const_known: must be > 0, got {self.pen_const_known}")
        if not self.pen_const_unknown > 0.0:
            errors.append(f"pen_const_unknown: must be > 0, got {self.pen_const_unknown}")
        if self.j_max is not None and self.j_max < 1:
            errors.append(f"j_max: must satisfy j_max >= 1 when given, got {self.j_max}")
        if errors:
            raise ConfigError(errors)

    def sequence_spec(self) -> SequenceSpec:
        return SequenceSpec(
            regime=self.regime, a=self.a, p=self.p, s=self.s,
            enforce_pair=self.enforce_pair,
        )

    def variant_names(self) -> tuple:
        if self.variant == "both":
            return ("known_degree", "data_driven")
        return ("known_degree",) if self.variant == "known" else ("data_driven",)


def _parse_raw(text: str) -> dict:
    raw = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELDS:
            errors.append(f"line {lineno}: unknown key {key!r}")
        elif key in raw:
            errors.append(f"line {lineno}: duplicate key {key!r}")
        else:
            raw[key] = value
    if errors:
        raise ConfigError(errors)
    return raw


def _convert(key: str, value: str):
    if key in ("regime", "variant", "out_dir"):
        return value
    if key == "n_grid":
        return tuple(int(part.strip()) for part in value.split(",") if part.strip())
    if key in ("replications", "seed"):
        return int(value)
    if key == "j_max":
        return None if value.lower() == "none" else int(value)
    if key == "enforce_pair":
        if value.lower() not in ("true", "false"):
            raise ValueError(f"expected true or false, got {value!r}")
        return value.lower() == "true"
    return float(value)


def build_config(raw: dict) -> RunConfig:
    """Build and validate a RunConfig from a raw string map."""
    errors = [f"{key}: missing required key" for key in _REQUIRED if key not in raw]
    kwargs = {}
    for key, value in raw.items():
        if key not in _FIELDS:
            errors.append(f"unknown key {key!r}")
            continue
        try:
            kwargs[key] = _convert(key, value)
        except ValueError as exc:
            errors.append(f"{key}: cannot parse {value!r} ({exc})")
    if errors:
        raise ConfigError(errors)
    return RunConfig(**kwargs)


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document; raises ConfigError listing violations."""
    return build_config(_parse_raw(text))


def _format(key: str, value) -> str:
    if key == "n_grid":
        return ",".join(str(n) for n in value)
    if key == "enforce_pair":
        return "true" if value else "false"
    if key == "j_max":
        return "none" if value is None else str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical document form; parse_config(serialize_config(cfg)) == cfg."""
    lines = [f"{key} = {_format(key, getattr(cfg, key))}" for key in _FIELDS]
    return "\n".join(lines) + "\n"


def config_echo(cfg: RunConfig) -> str:
    """One-line config echo embedded in every output CSV."""
    return " ".join(f"{key}={_format(key, getattr(cfg, key))}" for key in _FIELDS)
