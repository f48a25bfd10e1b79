"""Run configuration: dataclasses, validation and TOML round-trip.

Units are not tracked; any consistent system works (SI assumed in the
examples). Physical meaning of each key is given in comments of the example
configs under tests/data.
"""

from dataclasses import asdict, dataclass, field, fields

import numpy as np
import tomli
import tomli_w

from . import surface
from .cosserat3d import MaterialParams
from .grid import EDGES, ShellGrid

_PATCH_KINDS = ("plate", "cylinder", "sphere-cap", "graph", "tabulated")


class ConfigError(ValueError):
    pass


@dataclass
class PatchConfig:
    kind: str = "plate"
    bounds: list = field(default_factory=lambda: [0.0, 1.0, 0.0, 1.0])
    radius: float = 1.0
    coeffs: list | None = None
    file: str | None = None

    def build(self):
        b = tuple(self.bounds)
        if self.kind == "plate":
            return surface.plate(b)
        if self.kind == "cylinder":
            return surface.cylinder(self.radius, b)
        if self.kind == "sphere-cap":
            return surface.sphere_cap(self.radius, b)
        if self.kind == "graph":
            return surface.graph(np.asarray(self.coeffs, dtype=float), b)
        return surface.tabulated_from_file(self.file)


@dataclass
class MaterialConfig:
    mu: float = 1.0
    lam: float = 1.0
    mu_c: float = 1.0
    L_c: float = 1.0
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0
    debug_b3: float | None = None

    def build(self):
        return MaterialParams(self.mu, self.lam, self.mu_c, self.L_c,
                              self.a1, self.a2, self.a3, self.debug_b3)


@dataclass
class GridConfig:
    n1: int = 17
    n2: int = 17
    n3: int = 5
    admissibility_samples: int = 33


@dataclass
class LoadConfig:
    """Each entry is None, a constant, or {value, x1, x2} for value p(x1) q(x2)."""

    N0: object = None
    M1: object = None
    C0: object = None
    C1: object = None
    gamma1: list = field(default_factory=list)
    include_h2: bool = False


@dataclass
class BoundaryConfig:
    dirichlet: list = field(default_factory=list)
    phi_d: str = "identity"


@dataclass
class InitialConfig:
    kind: str = "identity"
    amplitude: float = 0.0
    seed: int = 0


@dataclass
class SolverConfig:
    max_iter: int = 500
    tol: float = 1e-8
    step_rule: str = "lbfgs"
    memory: int = 10
    checkpoint_every: int = 0


@dataclass
class SweepConfig:
    h: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    n3: int = 9
    amplitude: float = 0.05


@dataclass
class OutputConfig:
    dir: str = "out"
    golden: str | None = None


@dataclass
class RunConfig:
    patch: PatchConfig = field(default_factory=PatchConfig)
    material: MaterialConfig = field(default_factory=MaterialConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    h: float = 0.1
    energy_prefactor: str = "h"
    loads: LoadConfig = field(default_factory=LoadConfig)
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def build_patch(self):
        try:
            return self.patch.build()
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot build patch: {exc}") from exc

    def build_material(self):
        return self.material.build()

    def build_grid(self):
        return ShellGrid(self.grid.n1, self.grid.n2, tuple(self.patch.bounds),
                         tuple(self.boundary.dirichlet))

    @property
    def prefactor(self):
        return self.h if self.energy_prefactor == "h" else 1.0


_SECTIONS = {"patch": PatchConfig, "material": MaterialConfig, "grid": GridConfig,
             "loads": LoadConfig, "boundary": BoundaryConfig, "initial": InitialConfig,
             "solver": SolverConfig, "sweep": SweepConfig, "output": OutputConfig}
# TOML spelling -> attribute name
_ALIASES = {"material": {"lambda": "lam"}}


def _section(cls, name, raw):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    alias = _ALIASES.get(name, {})
    known = {f.name for f in fields(cls)}
    kw = {}
    for k, v in raw.items():
        key = alias.get(k, k)
        if key not in known:
            raise ConfigError(f"unknown key {k!r} in [{name}]")
        kw[key] = v
    return cls(**kw)


def from_dict(raw):
    kw = {}
    for k, v in raw.items():
        if k in _SECTIONS:
            kw[k] = _section(_SECTIONS[k], k, v)
        elif k in ("h", "energy_prefactor"):
            kw[k] = v
        else:
            raise ConfigError(f"unknown top-level key {k!r}")
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def _check_load(name, spec, tail):
    if spec is None:
        return
    if isinstance(spec, dict):
        if set(spec) - {"value", "x1", "x2"} or "value" not in spec:
            raise ConfigError(f"load {name} polynomial needs keys value, x1, x2")
        val = spec["value"]
        for key in ("x1", "x2"):
            if key in spec and not all(isinstance(c, (int, float)) for c in spec[key]):
                raise ConfigError(f"load {name}.{key} must be a list of numbers")
    else:
        val = spec
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"load {name} is not numeric") from exc
    if arr.shape != tail or not np.all(np.isfinite(arr)):
        raise ConfigError(f"load {name} must be a finite array of shape {tail}")


def validate(cfg):
    p = cfg.patch
    if p.kind not in _PATCH_KINDS:
        raise ConfigError(f"patch kind must be one of {_PATCH_KINDS}")
    if len(p.bounds) != 4 or not (p.bounds[1] > p.bounds[0] and p.bounds[3] > p.bounds[2]):
        raise ConfigError("patch bounds must be [x1min, x1max, x2min, x2max], increasing")
    if p.kind in ("cylinder", "sphere-cap") and not p.radius > 0:
        raise ConfigError("radius must be positive")
    if p.kind == "graph" and p.coeffs is None:
        raise ConfigError("graph patch needs coeffs")
    if p.kind == "tabulated" and not p.file:
        raise ConfigError("tabulated patch needs file")
    try:
        cfg.material.build()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    g = cfg.grid
    if min(g.n1, g.n2) < 3 or g.n3 < 1 or g.admissibility_samples < 2:
        raise ConfigError("grid needs n1, n2 >= 3, n3 >= 1, admissibility_samples >= 2")
    if not cfg.h > 0:
        raise ConfigError("thickness h must be positive")
    if cfg.energy_prefactor not in ("h", "one"):
        raise ConfigError("energy_prefactor must be 'h' or 'one'")
    L = cfg.loads
    for name, tail in (("N0", (3,)), ("M1", (3,)), ("C0", (3, 3)), ("C1", (3, 3))):
        _check_load(name, getattr(L, name), tail)
    for e in list(L.gamma1) + list(cfg.boundary.dirichlet):
        if e not in EDGES:
            raise ConfigError(f"edge must be one of {EDGES}, got {e!r}")
    if cfg.boundary.phi_d != "identity":
        raise ConfigError("only phi_d = 'identity' is supported")
    if cfg.initial.kind not in ("identity", "smooth", "noise"):
        raise ConfigError("initial kind must be identity, smooth or noise")
    s = cfg.solver
    if s.step_rule not in ("lbfgs", "armijo") or s.max_iter < 0 or not s.tol > 0:
        raise ConfigError("solver needs step_rule lbfgs|armijo, max_iter >= 0, tol > 0")
    if not cfg.sweep.h or any(not v > 0 for v in cfg.sweep.h):
        raise ConfigError("sweep h list must be non-empty and positive")


def load(path):
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return from_dict(raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _strip_none(d):
    if isinstance(d, dict):
        return {k: _strip_none(v) for k, v in d.items() if v is not None}
    return d


def to_dict(cfg):
    d = asdict(cfg)
    mat = d["material"]
    d["material"] = {("lambda" if k == "lam" else k): v for k, v in mat.items()}
    return _strip_none(d)


def dumps(cfg):
    return tomli_w.dumps(to_dict(cfg))


def save(path, cfg):
    with open(path, "wb") as fh:
        tomli_w.dump(to_dict(cfg), fh)
