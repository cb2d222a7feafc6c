"""Node/cluster records and protocol parameters shared by elections and routing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

PROTOCOLS = ("MAR", "GRC", "GRC-R", "DECA", "DEMC", "DEMC-R")
POSITION_BASED = frozenset({"MAR", "GRC", "GRC-R"})
WITH_RECOVERY = frozenset({"GRC-R", "DEMC-R"})

HEAD = "cluster-head"
MEMBER = "member"
UNAFFILIATED = "unaffiliated"


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str = "GRC-R"
    round_length: float = 100.0
    recovery_retries: int = 3
    recovery_timeout: float = 2.0
    deca_weights: tuple[float, float, float] = (0.5, 0.3, 0.2)
    grc_weights: tuple[float, float] = (0.5, 0.5)
    cell_size: float = 250.0
    announce_window: float = 0.5
    hello_phase: float = 0.05
    id_jitter: float = 1e-6
    mobility_window: float = 20.0
    initial_energy: float = 1.0
    tx_cost: float = 50e-6
    rx_cost: float = 25e-6
    max_hops: int = 64

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if not self.round_length > 0:
            raise ValueError("round_length must be > 0")
        if self.recovery_retries < 0:
            raise ValueError("recovery_retries must be >= 0")
        if not self.recovery_timeout > 0:
            raise ValueError("recovery_timeout must be > 0")
        if any(w < 0 for w in self.deca_weights) or not math.isclose(sum(self.deca_weights), 1.0):
            raise ValueError("DECA weights must be non-negative and sum to 1")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be > 0")

    @property
    def position_based(self) -> bool:
        return self.protocol in POSITION_BASED

    @property
    def recovery(self) -> bool:
        return self.protocol in WITH_RECOVERY

    @property
    def election_window(self) -> float:
        # every election timer fires inside this window
        return self.hello_phase + self.announce_window * 1.25 + 0.05


@dataclass
class NodeState:
    id: int
    residual_energy: float = 1.0
    role: str = UNAFFILIATED
    cluster_head: Optional[int] = None
    # next hop toward the head; differs from cluster_head for 2-hop DEMC members
    parent: Optional[int] = None
    mobility_estimate: float = 0.0
    weight: float = 0.0

    @property
    def alive(self) -> bool:
        return self.residual_energy > 0

    def reset(self) -> None:
        self.role = UNAFFILIATED
        self.cluster_head = None
        self.parent = None

    def make_head(self) -> None:
        self.role = HEAD
        self.cluster_head = self.id
        self.parent = None

    def join(self, head: int, via: Optional[int] = None) -> None:
        self.role = MEMBER
        self.cluster_head = head
        self.parent = head if via is None else via

    def charge(self, joules: float) -> None:
        self.residual_energy = max(0.0, self.residual_energy - joules)


@dataclass
class ClusterView:
    head: int
    members: set[int] = field(default_factory=set)
    formed_at: float = 0.0


class ZoneGrid:
    """Rectangular partition of the field into ``cell_size`` squares (edge cells clipped)."""

    def __init__(self, width: float, height: float, cell_size: float):
        if not cell_size > 0:
            raise ValueError("cell_size must be > 0")
        self.width, self.height, self.cell_size = width, height, cell_size
        self.nx = max(1, math.ceil(width / cell_size - 1e-12))
        self.ny = max(1, math.ceil(height / cell_size - 1e-12))

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        cx = min(max(int(x // self.cell_size), 0), self.nx - 1)
        cy = min(max(int(y // self.cell_size), 0), self.ny - 1)
        return cx, cy

    def bounds(self, cell: tuple[int, int]) -> tuple[float, float, float, float]:
        cx, cy = cell
        x0, y0 = cx * self.cell_size, cy * self.cell_size
        return x0, y0, min(x0 + self.cell_size, self.width), min(y0 + self.cell_size, self.height)

    def center(self, cell: tuple[int, int]) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bounds(cell)
        return (x0 + x1) / 2, (y0 + y1) / 2

    def half_diagonal(self, cell: tuple[int, int]) -> float:
        x0, y0, x1, y1 = self.bounds(cell)
        return math.hypot(x1 - x0, y1 - y0) / 2

    def cells(self):
        return [(i, j) for j in range(self.ny) for i in range(self.nx)]
