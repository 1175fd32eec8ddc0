"""Experiment configuration: a sectioned TOML file checked against a schema.

Every key has a default, so an empty file is a valid single-point pull-BFR
run on the bundled topology.  :func:`load_config` reports every schema
violation at once, before any simulation starts.
"""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "STRATEGY_NAMES",
    "SWEEP_AXES",
    "ConfigError",
    "TopologyCfg",
    "CatalogCfg",
    "WorkloadCfg",
    "BloomCfg",
    "PullCfg",
    "PushCfg",
    "NdnCfg",
    "SimCfg",
    "SweepCfg",
    "OutputCfg",
    "Config",
    "parse_config",
    "load_config",
    "with_axis",
]

STRATEGY_NAMES = ("pull-bfr", "push-bfr", "far")
SWEEP_AXES = ("alpha", "delta", "f_r", "p", "capacity_scale", "universe_size")


class ConfigError(ValueError):
    """One or more schema violations; ``problems`` lists them all."""

    def __init__(self, problems: list[str], source: str = "<config>"):
        self.problems = list(problems)
        super().__init__(f"{source}: " + "; ".join(self.problems))


@dataclass(frozen=True)
class TopologyCfg:
    path: Optional[str] = None  # None -> bundled geant40.topo
    capacity_scale: float = 1.0


@dataclass(frozen=True)
class CatalogCfg:
    universe_size: int = 1000
    segments_per_file: int = 10
    path: Optional[str] = None
    url_list: Optional[str] = None


@dataclass(frozen=True)
class WorkloadCfg:
    alpha: float = 1.2
    zipf_shift: float = 0.0
    files_per_client: int = 8
    think_time_s: float = 2.0
    window: int = 1
    arrivals: str = "closed"


@dataclass(frozen=True)
class BloomCfg:
    n: int = 1000
    p: float = 0.0638
    m_bits: Optional[int] = None  # overrides the size derived from (n, p)
    oracle: bool = False
    seed: str = "NDN"


@dataclass(frozen=True)
class PullCfg:
    delta_ms: float = 0.4
    car_lifetime_s: float = 4.0
    ca_lifetime_s: float = 10.0
    retry_cap: int = 3


@dataclass(frozen=True)
class PushCfg:
    f_r: float = 0.017


@dataclass(frozen=True)
class NdnCfg:
    interest_lifetime_s: float = 4.0
    cs_capacity: int = 100


@dataclass(frozen=True)
class SimCfg:
    duration_s: float = 60.0
    warmup_fraction: float = 0.1
    loss_rate: float = 0.0


@dataclass(frozen=True)
class SweepCfg:
    axis: Optional[str] = None
    values: tuple = ()
    repetitions: int = 1
    strategies: tuple = ()  # empty -> the top-level strategy only
    max_points: int = 200
    jobs: int = 1


@dataclass(frozen=True)
class OutputCfg:
    dir: str = "out"


_SECTIONS = {
    "topology": TopologyCfg,
    "catalog": CatalogCfg,
    "workload": WorkloadCfg,
    "bloom": BloomCfg,
    "pull": PullCfg,
    "push": PushCfg,
    "ndn": NdnCfg,
    "sim": SimCfg,
    "sweep": SweepCfg,
    "output": OutputCfg,
}


@dataclass(frozen=True)
class Config:
    strategy: str = "pull-bfr"
    seed: int = 1
    topology: TopologyCfg = TopologyCfg()
    catalog: CatalogCfg = CatalogCfg()
    workload: WorkloadCfg = WorkloadCfg()
    bloom: BloomCfg = BloomCfg()
    pull: PullCfg = PullCfg()
    push: PushCfg = PushCfg()
    ndn: NdnCfg = NdnCfg()
    sim: SimCfg = SimCfg()
    sweep: SweepCfg = SweepCfg()
    output: OutputCfg = OutputCfg()
    base_dir: str = field(default=".", compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        for sec in ("sweep",):
            d[sec]["values"] = list(d[sec]["values"])
            d[sec]["strategies"] = list(d[sec]["strategies"])
        return d

    def resolve(self, path: Optional[str]) -> Optional[Path]:
        """A config-relative path, or None."""
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def validate(self) -> None:
        problems = _check(self)
        if problems:
            raise ConfigError(problems)


def _type_ok(value: Any, default: Any, name: str) -> bool:
    if isinstance(value, bool) != isinstance(default, bool) and default is not None:
        return False
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, tuple):
        return isinstance(value, list)
    if isinstance(default, str):
        return isinstance(value, str)
    # Optional fields
    if name == "m_bits":
        return isinstance(value, int) and not isinstance(value, bool)
    if name in ("axis", "path", "url_list"):
        return isinstance(value, str)
    return True


def _build_section(cls, raw: Any, sec: str, problems: list[str]):
    if not isinstance(raw, dict):
        problems.append(f"[{sec}] must be a table")
        return cls()
    known = {f.name: f for f in fields(cls)}
    defaults = cls()
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            problems.append(f"[{sec}] unknown key '{key}'")
            continue
        default = getattr(defaults, key)
        if not _type_ok(value, default, key):
            problems.append(f"[{sec}] {key} has wrong type ({type(value).__name__})")
            continue
        if isinstance(default, float) and isinstance(value, int):
            value = float(value)
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)


def _check(cfg: Config) -> list[str]:
    out: list[str] = []

    def need(cond: bool, msg: str) -> None:
        if not cond:
            out.append(msg)

    need(cfg.strategy in STRATEGY_NAMES, f"strategy must be one of {', '.join(STRATEGY_NAMES)}")
    need(cfg.seed >= 0, "seed must be >= 0")
    t = cfg.topology
    need(t.capacity_scale > 0, "[topology] capacity_scale must be > 0")
    if t.path is not None:
        need(cfg.resolve(t.path).is_file(), f"[topology] path not found: {t.path}")
    c = cfg.catalog
    need(c.universe_size >= 1, "[catalog] universe_size must be >= 1")
    need(c.segments_per_file >= 1, "[catalog] segments_per_file must be >= 1")
    need(c.path is None or c.url_list is None, "[catalog] give at most one of path and url_list")
    for key in ("path", "url_list"):
        val = getattr(c, key)
        if val is not None:
            need(cfg.resolve(val).is_file(), f"[catalog] {key} not found: {val}")
    w = cfg.workload
    need(w.alpha >= 0, "[workload] alpha must be >= 0")
    need(w.zipf_shift >= 0, "[workload] zipf_shift must be >= 0")
    need(w.files_per_client >= 0, "[workload] files_per_client must be >= 0")
    need(w.think_time_s >= 0, "[workload] think_time_s must be >= 0")
    need(w.window >= 1, "[workload] window must be >= 1")
    need(w.arrivals in ("closed", "open"), "[workload] arrivals must be 'closed' or 'open'")
    b = cfg.bloom
    need(b.n >= 1, "[bloom] n must be >= 1")
    need(0 < b.p < 1, "[bloom] p must be in (0, 1)")
    need(b.m_bits is None or b.m_bits >= 1, "[bloom] m_bits must be >= 1")
    need(len(b.seed) > 0, "[bloom] seed must be non-empty")
    pl = cfg.pull
    need(pl.delta_ms > 0, "[pull] delta_ms must be > 0")
    need(pl.car_lifetime_s > 0, "[pull] car_lifetime_s must be > 0")
    need(pl.ca_lifetime_s > 0, "[pull] ca_lifetime_s must be > 0")
    need(pl.retry_cap >= 0, "[pull] retry_cap must be >= 0")
    need(cfg.push.f_r > 0, "[push] f_r must be > 0")
    n = cfg.ndn
    need(n.interest_lifetime_s > 0, "[ndn] interest_lifetime_s must be > 0")
    need(n.cs_capacity >= 0, "[ndn] cs_capacity must be >= 0")
    s = cfg.sim
    need(s.duration_s > 0, "[sim] duration_s must be > 0")
    need(0 <= s.warmup_fraction < 1, "[sim] warmup_fraction must be in [0, 1)")
    need(0 <= s.loss_rate < 1, "[sim] loss_rate must be in [0, 1)")
    sw = cfg.sweep
    need(sw.repetitions >= 1, "[sweep] repetitions must be >= 1")
    need(sw.max_points >= 1, "[sweep] max_points must be >= 1")
    need(sw.jobs >= 1, "[sweep] jobs must be >= 1")
    for st in sw.strategies:
        need(st in STRATEGY_NAMES, f"[sweep] unknown strategy '{st}'")
    if sw.axis is not None:
        need(sw.axis in SWEEP_AXES, f"[sweep] axis must be one of {', '.join(SWEEP_AXES)}")
        need(len(sw.values) > 0, "[sweep] values must be non-empty when axis is set")
        if sw.axis in SWEEP_AXES:
            for v in sw.values:
                try:
                    with_axis(cfg, sw.axis, v)
                except (TypeError, ValueError) as exc:
                    out.append(f"[sweep] bad value {v!r} for {sw.axis}: {exc}")
                else:
                    sub = _check(replace(with_axis(cfg, sw.axis, v), sweep=SweepCfg()))
                    out.extend(f"[sweep] {sw.axis}={v!r}: {m}" for m in sub)
    elif sw.values:
        out.append("[sweep] values given without axis")
    points = max(1, len(sw.values)) * sw.repetitions * max(1, len(sw.strategies))
    need(points <= sw.max_points, f"[sweep] {points} points exceed max_points={sw.max_points}")
    return out


def with_axis(cfg: Config, axis: str, value: Union[int, float]) -> Config:
    """``cfg`` with one sweep axis set to ``value``."""
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise TypeError("sweep values must be finite numbers")
    if axis == "alpha":
        return replace(cfg, workload=replace(cfg.workload, alpha=float(value)))
    if axis == "delta":
        return replace(cfg, pull=replace(cfg.pull, delta_ms=float(value)))
    if axis == "f_r":
        return replace(cfg, push=replace(cfg.push, f_r=float(value)))
    if axis == "p":
        return replace(cfg, bloom=replace(cfg.bloom, p=float(value)))
    if axis == "capacity_scale":
        return replace(cfg, topology=replace(cfg.topology, capacity_scale=float(value)))
    if axis == "universe_size":
        if int(value) != value:
            raise ValueError("universe_size must be an integer")
        return replace(cfg, catalog=replace(cfg.catalog, universe_size=int(value)))
    raise ValueError(f"unknown axis {axis}")


def parse_config(data: dict, source: str = "<config>", base_dir: str = ".") -> Config:
    """Build and validate a :class:`Config` from a parsed TOML mapping."""
    problems: list[str] = []
    raw = copy.deepcopy(data)
    kwargs: dict[str, Any] = {"base_dir": base_dir}
    for key, value in raw.items():
        if key in _SECTIONS:
            kwargs[key] = _build_section(_SECTIONS[key], value, key, problems)
        elif key == "strategy":
            if isinstance(value, str):
                kwargs[key] = value
            else:
                problems.append("strategy must be a string")
        elif key == "seed":
            if isinstance(value, int) and not isinstance(value, bool):
                kwargs[key] = value
            else:
                problems.append("seed must be an integer")
        else:
            problems.append(f"unknown top-level key '{key}'")
    cfg = Config(**kwargs)
    problems.extend(_check(cfg))
    if problems:
        raise ConfigError(problems, source)
    return cfg


def load_config(path: Union[str, Path]) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc.strerror}"], str(path)) from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax error: {exc}"], str(path)) from None
    return parse_config(data, str(path), str(path.parent))
