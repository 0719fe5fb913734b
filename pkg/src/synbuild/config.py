"""Pipeline configuration: a TOML file with per-module sections plus flag overrides."""

from dataclasses import dataclass, field, fields, replace
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .align import SearchConfig
from .assemble import AssemblyConfig
from .exterior import ExteriorConfig
from .floorplan import FloorplanConfig
from .roofcloud import DEFAULT_DENSITY
from .vectorize import VectorizeConfig

OUT_ENV = "SYNBUILD_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RoofConfig:
    density: float = DEFAULT_DENSITY
    noise_sigma: float = 0.0

    def validate(self):
        if self.density <= 0 or self.noise_sigma < 0:
            raise ConfigError("roof density must be positive and noise_sigma non-negative")
        return self


SECTIONS = {
    "exterior": ExteriorConfig,
    "floorplan": FloorplanConfig,
    "vectorize": VectorizeConfig,
    "align": SearchConfig,
    "assemble": AssemblyConfig,
    "roof": RoofConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    global_seed: int = 0
    exterior_count: int = 25
    candidates_per_floor: int = 3
    permutation_cap: int = 8
    worker_count: int = 1
    output_root: str = ""
    exterior: ExteriorConfig = field(default_factory=ExteriorConfig)
    floorplan: FloorplanConfig = field(default_factory=FloorplanConfig)
    vectorize: VectorizeConfig = field(default_factory=VectorizeConfig)
    align: SearchConfig = field(default_factory=SearchConfig)
    assemble: AssemblyConfig = field(default_factory=AssemblyConfig)
    roof: RoofConfig = field(default_factory=RoofConfig)

    def validate(self):
        for name in ("exterior_count", "candidates_per_floor", "permutation_cap", "worker_count"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if not isinstance(self.global_seed, int) or self.global_seed < 0:
            raise ConfigError("global_seed must be a non-negative integer")
        if not self.output_root:
            raise ConfigError(f"no output root: pass --out or set {OUT_ENV}")
        for name in SECTIONS:
            try:
                getattr(self, name).validate()
            except ValueError as e:
                raise ConfigError(f"[{name}] {e}") from None
        return self


def _coerce(cls, name, value):
    default = {f.name: f for f in fields(cls)}[name].default
    if isinstance(default, tuple) and isinstance(value, list):
        return tuple(tuple(v) if isinstance(v, list) else v for v in value)
    if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def _section(cls, table, where):
    known = {f.name for f in fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    obj = cls()
    kw = {k: _coerce(cls, k, v) for k, v in table.items()}
    if cls is FloorplanConfig and "room_weights" in kw:
        kw["room_weights"] = {int(k): float(v) for k, v in kw["room_weights"].items()}
    return replace(obj, **kw)


def from_mapping(data):
    top = {}
    sections = {}
    for k, v in data.items():
        if k in SECTIONS:
            if not isinstance(v, dict):
                raise ConfigError(f"[{k}] must be a table")
            sections[k] = _section(SECTIONS[k], v, f"[{k}]")
        else:
            top[k] = v
    known = {f.name for f in fields(PipelineConfig)} - set(SECTIONS)
    unknown = set(top) - known
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    return PipelineConfig(**top, **sections)


def load(path=None, overrides=None):
    """Config from an optional TOML file, then non-None overrides, then the env fallback."""
    data = {}
    if path:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"bad config {path}: {e}") from None
    cfg = from_mapping(data)
    kw = {k: v for k, v in (overrides or {}).items() if v is not None}
    if kw:
        cfg = replace(cfg, **kw)
    if not cfg.output_root and os.environ.get(OUT_ENV):
        cfg = replace(cfg, output_root=os.environ[OUT_ENV])
    return cfg.validate()
