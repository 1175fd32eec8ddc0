"""Pull-based Bloom-filter routing for NDN: simulator, filter algebra and experiment harness."""

from .bloom import BfParams, BloomFilter, Decision, ExactFilter, capacity_for, make_params, may_aggregate, size_for
from .config import Config, ConfigError, load_config, parse_config
from .harness import run_experiment, run_simulation, run_sweep
from .names import Name, parse
from .report import SimReport, avg_rtt, misrouting_fraction, storage_metric

__version__ = "0.1.0"

__all__ = [
    "BfParams",
    "BloomFilter",
    "Decision",
    "ExactFilter",
    "capacity_for",
    "make_params",
    "may_aggregate",
    "size_for",
    "Config",
    "ConfigError",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_simulation",
    "run_sweep",
    "Name",
    "parse",
    "SimReport",
    "avg_rtt",
    "misrouting_fraction",
    "storage_metric",
]
