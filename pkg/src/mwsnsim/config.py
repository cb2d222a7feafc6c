"""Scenario configuration: every tunable of a run, with validated defaults."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .mobility import MODELS, FieldGeometry, MobilityParams
from .network import RadioParams
from .protocols.model import PROTOCOLS, ProtocolConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: str = "GRC-R"
    mobility: str = "random-waypoint"
    nodes: int = 100
    width: float = 1000.0
    height: float = 1000.0
    speed: float = 10.0
    seed: int = 1
    duration: float = 900.0
    # radio
    range: float = 150.0
    tx_delay: float = 0.005
    head_range_factor: float = 2.0
    # sink position; None = field centre
    sink_x: Optional[float] = None
    sink_y: Optional[float] = None
    # mobility
    sample_interval: float = 1.0
    pause: float = 0.0
    speed_sigma: float = 1.0
    turn_sigma: float = 0.3
    shared_heading: bool = True
    # protocols
    round_length: float = 100.0
    recovery_retries: int = 3
    recovery_timeout: float = 2.0
    deca_w_e: float = 0.5
    deca_w_c: float = 0.3
    deca_w_m: float = 0.2
    cell_size: float = 250.0
    mobility_window: float = 20.0
    initial_energy: float = 1.0
    tx_cost: float = 50e-6
    rx_cost: float = 25e-6
    # traffic
    traffic_interval: float = 10.0
    warmdown: float = 30.0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol: unknown value {self.protocol!r}; choose from {', '.join(PROTOCOLS)}")
        if self.mobility not in MODELS:
            raise ConfigError(f"mobility: unknown value {self.mobility!r}; choose from {', '.join(MODELS)}")
        checks = [
            ("nodes", self.nodes >= 1, "must be >= 1"),
            ("width", self.width > 0, "must be > 0"),
            ("height", self.height > 0, "must be > 0"),
            ("speed", self.speed >= 0, "must be >= 0"),
            ("duration", self.duration > 0, "must be > 0"),
            ("range", self.range > 0, "must be > 0"),
            ("tx_delay", self.tx_delay >= 0, "must be >= 0"),
            ("head_range_factor", self.head_range_factor >= 1, "must be >= 1"),
            ("sample_interval", self.sample_interval > 0, "must be > 0"),
            ("pause", self.pause >= 0, "must be >= 0"),
            ("speed_sigma", self.speed_sigma >= 0, "must be >= 0"),
            ("turn_sigma", self.turn_sigma >= 0, "must be >= 0"),
            ("round_length", self.round_length > 0, "must be > 0"),
            ("recovery_retries", self.recovery_retries >= 0, "must be >= 0"),
            ("recovery_timeout", self.recovery_timeout > 0, "must be > 0"),
            ("deca_w_e", self.deca_w_e >= 0, "must be >= 0"),
            ("deca_w_c", self.deca_w_c >= 0, "must be >= 0"),
            ("deca_w_m", self.deca_w_m >= 0, "must be >= 0"),
            ("cell_size", self.cell_size > 0, "must be > 0"),
            ("mobility_window", self.mobility_window > 0, "must be > 0"),
            ("initial_energy", self.initial_energy > 0, "must be > 0"),
            ("tx_cost", self.tx_cost >= 0, "must be >= 0"),
            ("rx_cost", self.rx_cost >= 0, "must be >= 0"),
            ("traffic_interval", self.traffic_interval > 0, "must be > 0"),
            ("warmdown", 0 <= self.warmdown < self.duration, "must lie in [0, duration)"),
        ]
        for key, ok, why in checks:
            if not ok:
                raise ConfigError(f"{key}: {why} (got {getattr(self, key)!r})")
        for key, val, size in (("sink_x", self.sink_x, self.width), ("sink_y", self.sink_y, self.height)):
            if val is not None and not 0 <= val <= size:
                raise ConfigError(f"{key}: must lie inside the field (got {val!r})")
        if abs(self.deca_w_e + self.deca_w_c + self.deca_w_m - 1.0) > 1e-9:
            raise ConfigError("deca_w_e + deca_w_c + deca_w_m must sum to 1")
        if self.sample_interval * self.speed >= min(self.width, self.height):
            raise ConfigError("speed: sample_interval * speed must be smaller than the field")

    def field(self) -> FieldGeometry:
        return FieldGeometry(self.width, self.height)

    def radio_params(self) -> RadioParams:
        return RadioParams(self.range, self.tx_delay, self.head_range_factor)

    def mobility_params(self) -> MobilityParams:
        # swept speed is a fixed speed: v_min = v_max
        return MobilityParams(self.mobility, self.speed, self.speed, self.pause, self.speed_sigma,
                              self.turn_sigma, self.sample_interval, self.shared_heading)

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            protocol=self.protocol, round_length=self.round_length,
            recovery_retries=self.recovery_retries, recovery_timeout=self.recovery_timeout,
            deca_weights=(self.deca_w_e, self.deca_w_c, self.deca_w_m), cell_size=self.cell_size,
            mobility_window=self.mobility_window, initial_energy=self.initial_energy,
            tx_cost=self.tx_cost, rx_cost=self.rx_cost)

    def echo(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    @classmethod
    def keys(cls) -> dict[str, type]:
        return {f.name: f.type for f in fields(cls)}
