from .base import Forwarder, RunStats, StrategyParams
from .far import FarForwarder
from .pull import PullForwarder
from .push import PushForwarder, partition_catalog

STRATEGIES = {
    "pull-bfr": PullForwarder,
    "push-bfr": PushForwarder,
    "far": FarForwarder,
}

__all__ = [
    "Forwarder",
    "RunStats",
    "StrategyParams",
    "FarForwarder",
    "PullForwarder",
    "PushForwarder",
    "partition_catalog",
    "STRATEGIES",
]
