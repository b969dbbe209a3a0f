"""Simulation configuration: TOML text to typed settings and back."""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib
import tomli_w

MAX_INLET_SPEED = 0.13
FACES = ("x-", "x+", "y-", "y+", "z-", "z+")
FACE_KINDS = ("wall", "inlet", "outflow", "periodic")
SOLID_KINDS = ("sphere", "box", "tube", "mesh")


class ConfigError(ValueError):
    pass


@dataclass
class DomainConfig:
    lo: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    hi: list[float] = field(default_factory=lambda: [16.0, 16.0, 16.0])
    doi_lo: Optional[list[float]] = None
    doi_hi: Optional[list[float]] = None
    faces: dict[str, str] = field(default_factory=dict)
    initial_velocity: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])


@dataclass
class InletConfig:
    face: Optional[str] = None
    speed: float = 0.1
    center: Optional[list[float]] = None
    radius: Optional[float] = None


@dataclass
class FluidConfig:
    nu0: float = 0.01


@dataclass
class WakeConfig:
    enabled: bool = False
    ray_count: int = 16
    max_level: Optional[int] = None
    center: Optional[list[float]] = None
    radius: Optional[float] = None
    normal: Optional[list[float]] = None


@dataclass
class DynamicConfig:
    gradient_thresholds: list[float] = field(default_factory=list)
    velocity_thresholds: list[float] = field(default_factory=list)
    spacings: list[float] = field(default_factory=list)
    rebuild_interval: int = 40
    pad: int = 4


@dataclass
class ScalesConfig:
    n_levels: int = 1
    dx_min: float = 1.0
    dx_max: float = 1.0
    level_spacings: Optional[list[float]] = None
    ffd_spacings: list[float] = field(default_factory=list)
    quantization: Optional[list[float]] = None
    domain_boundary: bool = False
    pad: int = 4
    wake: WakeConfig = field(default_factory=WakeConfig)
    dynamic: DynamicConfig = field(default_factory=DynamicConfig)


@dataclass
class RelaxationConfig:
    nu_prime: Optional[list[float]] = None  # 18 high-order entries (moments 9..26)
    a: float = -4.0
    b: float = 5.0
    g_max: float = 0.115
    adaptive: bool = True


@dataclass
class TracerConfig:
    enabled: bool = False
    inject_rate: int = 2000
    region: str = "disk"
    center: Optional[list[float]] = None
    radius: Optional[float] = None
    normal: Optional[list[float]] = None
    lo: Optional[list[float]] = None
    hi: Optional[list[float]] = None


@dataclass
class RunConfig:
    iterations: int = 10
    output_every: int = 0
    checkpoint_every: int = 0
    seed: int = 0
    tracers: TracerConfig = field(default_factory=TracerConfig)


@dataclass
class SimulationConfig:
    domain: DomainConfig = field(default_factory=DomainConfig)
    solids: list[dict[str, Any]] = field(default_factory=list)
    inlet: InletConfig = field(default_factory=InletConfig)
    fluid: FluidConfig = field(default_factory=FluidConfig)
    scales: ScalesConfig = field(default_factory=ScalesConfig)
    relaxation: RelaxationConfig = field(default_factory=RelaxationConfig)
    run: RunConfig = field(default_factory=RunConfig)
    base_dir: str = field(default=".", metadata={"serialize": False})

    def face_kinds(self) -> dict[str, str]:
        kinds = {f: "wall" for f in FACES}
        kinds.update(self.domain.faces)
        if self.inlet.face is not None and self.inlet.radius is None:
            kinds[self.inlet.face] = "inlet"
        return kinds

    def periodic(self) -> tuple[bool, bool, bool]:
        k = self.face_kinds()
        return tuple(k[f"{a}-"] == "periodic" for a in "xyz")


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a table")
    known = {f.name: f for f in fields(cls)}
    extra = set(data) - set(known)
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    kwargs = {}
    for name, value in data.items():
        sub = _SUBTABLES.get((cls, name))
        kwargs[name] = _build(sub, value, f"{path}.{name}") if sub else value
    return cls(**kwargs)


_SUBTABLES = {
    (SimulationConfig, "domain"): DomainConfig,
    (SimulationConfig, "inlet"): InletConfig,
    (SimulationConfig, "fluid"): FluidConfig,
    (SimulationConfig, "scales"): ScalesConfig,
    (SimulationConfig, "relaxation"): RelaxationConfig,
    (SimulationConfig, "run"): RunConfig,
    (ScalesConfig, "wake"): WakeConfig,
    (ScalesConfig, "dynamic"): DynamicConfig,
    (RunConfig, "tracers"): TracerConfig,
}


def _positive(values, what: str) -> None:
    for v in values:
        if not v > 0:
            raise ConfigError(f"{what} must be positive")


def validate(cfg: SimulationConfig) -> None:
    d = cfg.domain
    for vec, name in ((d.lo, "domain.lo"), (d.hi, "domain.hi"), (d.initial_velocity, "domain.initial_velocity")):
        if len(vec) != 3:
            raise ConfigError(f"{name} needs three entries")
    if any(h <= l for l, h in zip(d.lo, d.hi)):
        raise ConfigError("domain.hi must exceed domain.lo")
    for face, kind in d.faces.items():
        if face not in FACES or kind not in FACE_KINDS:
            raise ConfigError(f"bad face entry {face} = {kind}")
    kinds = cfg.face_kinds()
    for a in "xyz":
        if (kinds[f"{a}-"] == "periodic") != (kinds[f"{a}+"] == "periodic"):
            raise ConfigError(f"periodic axis {a} must be periodic on both faces")
    if cfg.inlet.face is not None:
        if cfg.inlet.face not in FACES:
            raise ConfigError(f"unknown inlet face {cfg.inlet.face}")
        if not 0 < cfg.inlet.speed <= MAX_INLET_SPEED:
            raise ConfigError(f"inlet speed must lie in (0, {MAX_INLET_SPEED}]")
        if kinds[cfg.inlet.face] == "periodic":
            raise ConfigError("inlet face cannot be periodic")
    if cfg.fluid.nu0 < 0:
        raise ConfigError("fluid.nu0 must be non-negative")
    s = cfg.scales
    _positive([s.dx_min, s.dx_max] + list(s.ffd_spacings) + list(s.level_spacings or [])
              + list(s.dynamic.spacings), "spacings")
    if s.ffd_spacings and any(cfg.periodic()):
        raise ConfigError("FFD shells cannot be combined with periodic faces")
    n = len(s.dynamic.spacings)
    if len(s.dynamic.gradient_thresholds) != n or len(s.dynamic.velocity_thresholds) != n:
        raise ConfigError("dynamic thresholds and spacings must pair up")
    _positive(list(s.dynamic.gradient_thresholds) + list(s.dynamic.velocity_thresholds), "dynamic thresholds")
    if s.dynamic.rebuild_interval < 1:
        raise ConfigError("rebuild_interval must be at least 1")
    if cfg.relaxation.nu_prime is not None and len(cfg.relaxation.nu_prime) != 18:
        raise ConfigError("relaxation.nu_prime needs 18 entries (moments 9 to 26)")
    for k, solid in enumerate(cfg.solids):
        kind = solid.get("type")
        if kind not in SOLID_KINDS:
            raise ConfigError(f"solids[{k}]: unknown type {kind!r}")
        if kind == "mesh":
            p = Path(solid.get("path", ""))
            if not p.is_absolute():
                p = Path(cfg.base_dir) / p
            if not p.is_file():
                raise ConfigError(f"solids[{k}]: mesh file {p} does not exist")
    r = cfg.run
    if r.iterations < 0 or r.output_every < 0 or r.checkpoint_every < 0:
        raise ConfigError("run cadences must be non-negative")
    if r.tracers.region not in ("disk", "box"):
        raise ConfigError("tracer region must be 'disk' or 'box'")
    if r.tracers.inject_rate < 0:
        raise ConfigError("inject_rate must be non-negative")


def parse(text: str, base_dir: str = ".") -> SimulationConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg = _build(SimulationConfig, data, "config")
    cfg.base_dir = str(base_dir)
    validate(cfg)
    return cfg


def load(path) -> SimulationConfig:
    path = Path(path)
    return parse(path.read_text(), base_dir=str(path.parent))


def _strip_none(obj):
    if isinstance(obj, dict):
        return {k: _strip_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, list):
        return [_strip_none(v) for v in obj]
    return obj


def to_dict(cfg: SimulationConfig) -> dict:
    data = asdict(cfg)
    data.pop("base_dir", None)
    return _strip_none(data)


def dumps(cfg: SimulationConfig) -> str:
    """TOML text with every default written out."""
    return tomli_w.dumps(to_dict(cfg))
