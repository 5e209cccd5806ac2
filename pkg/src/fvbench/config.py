"""Flat ``key=value`` run configuration with dotted sections."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .cases import HitParams, ShuOsherParams, VortexParams
from .integrator import SchemeConfig, WenoParams

CASES = ("vortex", "shu-osher", "hit")
OUTPUTS = ("series", "spectrum", "snapshot", "report")
CASE_PARAMS = {"vortex": VortexParams, "shu-osher": ShuOsherParams, "hit": HitParams}
DEFAULT_CFL = {"vortex": 0.7, "shu-osher": 0.5, "hit": 0.5}
DEFAULT_NX = {"vortex": 64, "shu-osher": 256, "hit": 32}
DEFAULT_RESOLUTIONS = {"vortex": (32, 64, 128, 256), "shu-osher": (256, 512, 1024, 2048), "hit": (32, 64)}


class ConfigError(ValueError):
    pass


def parse_text(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def _coerce(value: str, like: Any, key: str):
    try:
        if isinstance(like, bool):
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if isinstance(like, int):
            return int(value)
        if isinstance(like, float):
            return float(value)
        if isinstance(like, tuple):
            parts = [p.strip() for p in value.strip("()").split(",") if p.strip()]
            return tuple(_coerce(p, like[0], key) for p in parts) if like else tuple(parts)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {type(like).__name__}") from None
    return value


def parse_scheme(spec: str, base: SchemeConfig | None = None) -> SchemeConfig:
    """``weno-z5/gauss2`` style shorthand (quadrature optional)."""
    base = base or SchemeConfig()
    rec, _, quad = spec.strip().partition("/")
    try:
        return dataclasses.replace(base, reconstruction=rec, face_quadrature=quad or "midpoint")
    except ValueError as exc:
        raise ConfigError(f"scheme {spec!r}: {exc}") from None


@dataclass
class RunConfig:
    case: str = "vortex"
    nx: int = 0
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    cfl: float = 0.0
    t_end: float = -1.0
    t_over_tau: float = 4.0
    outputs: tuple[str, ...] = ("series", "snapshot")
    series_interval: float = 0.0
    seed: int = 0
    output_dir: str = "out"
    params: Any = None
    resolutions: tuple[int, ...] = ()
    reference_nx: int = 0
    reference_scheme: SchemeConfig = field(default_factory=lambda: SchemeConfig("weno-z5", "gauss2"))
    schemes: tuple[str, ...] = ("weno-z3/midpoint", "weno-z5/midpoint", "weno-z7/midpoint", "weno-z5/gauss2")
    reference_label: str = ""
    input: str = ""
    other: str = ""
    raw: dict = field(default_factory=dict)

    def resolved(self) -> dict[str, str]:
        """Every effective setting as strings, for artifact headers."""
        out = {
            "case": self.case,
            "nx": str(self.nx),
            "scheme.reconstruction": self.scheme.reconstruction,
            "scheme.face_quadrature": self.scheme.face_quadrature,
            "scheme.variables": self.scheme.variables,
            "scheme.riemann_solver": self.scheme.riemann_solver,
            "scheme.weno_epsilon": repr(self.scheme.weno_params.epsilon),
            "scheme.weno_a": str(self.scheme.weno_params.a),
            "scheme.ppm_limiter": str(self.scheme.ppm_limiter).lower(),
            "cfl": repr(self.cfl),
            "t_end": repr(self.t_end),
            "outputs": ",".join(self.outputs),
            "series.interval": repr(self.series_interval),
            "seed": str(self.seed),
        }
        if self.case == "hit":
            out["t_over_tau"] = repr(self.t_over_tau)
        for f in dataclasses.fields(self.params):
            out[f"{self.case}.{f.name}"] = repr(getattr(self.params, f.name))
        if self.resolutions:
            out["resolutions"] = ",".join(map(str, self.resolutions))
        if self.reference_nx:
            out["reference.nx"] = str(self.reference_nx)
            out["reference.scheme"] = self.reference_scheme.label
        return out

    def digest(self) -> str:
        items = sorted(self.resolved().items())
        return hashlib.sha256("\n".join(f"{k}={v}" for k, v in items).encode()).hexdigest()[:16]

    def with_scheme(self, scheme: SchemeConfig, nx: int | None = None) -> RunConfig:
        return dataclasses.replace(self, scheme=scheme, nx=self.nx if nx is None else nx)


_SCHEME_KEYS = {
    "scheme.reconstruction": "reconstruction",
    "scheme.face_quadrature": "face_quadrature",
    "scheme.variables": "reconstruction_variables",
    "scheme.riemann_solver": "riemann_solver",
    "scheme.ppm_limiter": "ppm_limiter",
}


def build(values: dict[str, str]) -> RunConfig:
    """Validate ``values`` into a RunConfig; unknown keys are rejected."""
    values = dict(values)
    case = values.pop("case", "vortex")
    if case not in CASES:
        raise ConfigError(f"case: must be one of {CASES}, got {case!r}")
    cfg = RunConfig(case=case, raw=dict(values, case=case))

    # case parameters
    pcls = CASE_PARAMS[case]
    defaults = pcls()
    overrides = {}
    for f in dataclasses.fields(pcls):
        key = f"{case}.{f.name}"
        if key in values:
            overrides[f.name] = _coerce(values.pop(key), getattr(defaults, f.name), key)
    if "seed" in values and case == "hit":
        overrides.setdefault("seed", int(values["seed"]))
    try:
        cfg.params = pcls(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{case} parameters: {exc}") from None

    # scheme
    skw: dict[str, Any] = {}
    for key, name in _SCHEME_KEYS.items():
        if key in values:
            v = values.pop(key)
            skw[name] = _coerce(v, True, key) if name == "ppm_limiter" else v.lower()
    wkw = {}
    if "scheme.weno_epsilon" in values:
        wkw["epsilon"] = _coerce(values.pop("scheme.weno_epsilon"), 1.0, "scheme.weno_epsilon")
    if "scheme.weno_a" in values:
        wkw["a"] = _coerce(values.pop("scheme.weno_a"), 1, "scheme.weno_a")
    try:
        cfg.scheme = SchemeConfig(weno_params=WenoParams(**wkw), **skw)
    except ValueError as exc:
        raise ConfigError(f"scheme: {exc}") from None

    def take(key, like, default=None):
        return _coerce(values.pop(key), like, key) if key in values else default

    cfg.nx = take("nx", 1, DEFAULT_NX[case])
    cfg.cfl = take("cfl", 1.0, DEFAULT_CFL[case])
    t_end = take("t_end", 1.0)
    cfg.t_over_tau = take("t_over_tau", 1.0) if "t_over_tau" in values else 4.0
    if case == "hit":
        cfg.t_end = cfg.t_over_tau * cfg.params.tau() if t_end is None else t_end
    else:
        cfg.t_end = cfg.params.t_end if t_end is None else t_end
    outputs = take("outputs", ("",))
    if outputs is not None:
        bad = [o for o in outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"outputs: unknown entries {bad}; allowed {OUTPUTS}")
        cfg.outputs = outputs
    interval = take("series.interval", 1.0)
    if interval is None:
        interval = 0.1 if case == "hit" else cfg.t_end / 10
    cfg.series_interval = interval
    cfg.seed = take("seed", 1, 0)
    cfg.output_dir = values.pop("output_dir", "out")
    res = take("resolutions", (1,))
    cfg.resolutions = res if res is not None else DEFAULT_RESOLUTIONS[case]
    if any(b <= a for a, b in zip(cfg.resolutions, cfg.resolutions[1:])):
        raise ConfigError("resolutions: must be strictly increasing")
    cfg.reference_nx = take("reference.nx", 1, 16384 if case == "shu-osher" else 0)
    if "reference.scheme" in values:
        cfg.reference_scheme = parse_scheme(values.pop("reference.scheme"))
    schemes = take("schemes", ("",))
    if schemes is not None:
        for s in schemes:
            parse_scheme(s)
        cfg.schemes = schemes
    cfg.reference_label = values.pop("reference.label", "")
    cfg.input = values.pop("input", "")
    cfg.other = values.pop("other", "")

    if cfg.nx < 1:
        raise ConfigError("nx: must be positive")
    if not 0 < cfg.cfl <= 1:
        raise ConfigError(f"cfl: must lie in (0, 1], got {cfg.cfl}")
    if cfg.t_end < 0:
        raise ConfigError("t_end: must be non-negative")
    if values:
        raise ConfigError(f"unknown keys: {sorted(values)}")
    return cfg


def load(path: str | Path | None, overrides: Iterable[str] = ()) -> RunConfig:
    values = parse_text(Path(path).read_text()) if path else {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    return build(values)
