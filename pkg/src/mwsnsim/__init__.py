"""Discrete-event simulator for clustering routing protocols in mobile sensor networks."""

from .config import ConfigError, ScenarioConfig
from .metrics import MetricsRecord, aggregate, finalize, packet_loss_pct, pdr
from .simulation import World, simulate

__version__ = "0.1.0"

__all__ = ["ConfigError", "MetricsRecord", "ScenarioConfig", "World", "aggregate", "finalize",
           "packet_loss_pct", "pdr", "simulate"]
