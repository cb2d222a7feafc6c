"""Unit-disk radio: connectivity over live positions, unicast and broadcast delivery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .kernel import Kernel

DELIVERED_SCHEDULED = "delivered-scheduled"
DROPPED_OUT_OF_RANGE = "dropped-out-of-range"


@dataclass(frozen=True)
class RadioParams:
    range: float = 150.0
    tx_delay: float = 0.005
    # cluster heads talk to each other and to the sink at range * head_range_factor
    head_range_factor: float = 2.0

    def __post_init__(self):
        if not self.range > 0:
            raise ValueError("radio range must be > 0")
        if self.tx_delay < 0:
            raise ValueError("tx_delay must be >= 0")
        if not self.head_range_factor >= 1:
            raise ValueError("head_range_factor must be >= 1")

    @property
    def head_range(self) -> float:
        return self.range * self.head_range_factor




@dataclass(eq=False)
class Packet:
    id: int
    source: int
    created_at: float
    hops: list[int] = field(default_factory=list)
    delivered_at: Optional[float] = None
    # per-hop annotations: (node, distance-to-sink or hop-count, recovery flag)
    marks: list[tuple[int, float, bool]] = field(default_factory=list)
    retries: int = 0
    # recovery bookkeeping
    failed: set = field(default_factory=set)
    nonstrict_at: set = field(default_factory=set)
    pending: Optional[tuple] = None
    retrying: bool = False

    def __post_init__(self):
        if not self.hops:
            self.hops.append(self.source)


def in_range(a, b, r: RadioParams | float) -> bool:
    limit = r.range if isinstance(r, RadioParams) else r
    return math.hypot(a[0] - b[0], a[1] - b[1]) <= limit


class Topology:
    """Live position table, indexed by integer node id."""

    def __init__(self, positions):
        self.pos = np.array(positions, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.pos)

    def __contains__(self, node) -> bool:
        return isinstance(node, (int, np.integer)) and 0 <= node < len(self.pos)

    def check(self, node) -> None:
        if node not in self:
            raise KeyError(f"unknown node id {node!r}")

    def distance(self, a: int, b: int) -> float:
        pa, pb = self.pos[a], self.pos[b]
        return math.hypot(pa[0] - pb[0], pa[1] - pb[1])

    def within(self, node: int, candidates, limit: float) -> np.ndarray:
        cand = np.asarray(candidates, dtype=int)
        if cand.size == 0:
            return cand
        d = np.hypot(*(self.pos[cand] - self.pos[node]).T)
        return cand[(d <= limit) & (cand != node)]


def neighbors(node: int, topo: Topology, r: RadioParams | float) -> set[int]:
    topo.check(node)
    limit = r.range if isinstance(r, RadioParams) else r
    d = np.hypot(*(topo.pos - topo.pos[node]).T)
    idx = np.flatnonzero(d <= limit)
    return {int(i) for i in idx if i != node}


class Radio:
    """Message delivery on a kernel.

    A hop succeeds only if sender and receiver are in range both when the
    frame is sent and when it arrives ``tx_delay`` later. ``on_tx``/``on_rx``
    hooks let the owner charge energy and keep transmission logs.
    """

    def __init__(self, kernel: Kernel, topo: Topology, params: RadioParams,
                 on_tx: Optional[Callable[[int, str], None]] = None,
                 on_rx: Optional[Callable[[int, str], None]] = None):
        self.kernel = kernel
        self.topo = topo
        self.params = params
        self.on_tx = on_tx
        self.on_rx = on_rx

    def _limit(self, limit: Optional[float]) -> float:
        return self.params.range if limit is None else limit

    def unicast(self, src: int, dst: int, payload: Any,
                on_receive: Callable[[int, Any, int], None],
                on_drop: Optional[Callable[[int, int, Any], None]] = None,
                limit: Optional[float] = None, msg: str = "data") -> str:
        self.topo.check(src)
        self.topo.check(dst)
        lim = self._limit(limit)
        if self.topo.distance(src, dst) > lim:
            return DROPPED_OUT_OF_RANGE
        if self.on_tx:
            self.on_tx(src, msg)
        self.kernel.schedule_in(self.params.tx_delay, "packet-delivery", self._arrive,
                                src, dst, payload, on_receive, on_drop, lim, msg, target=dst)
        return DELIVERED_SCHEDULED

    def _arrive(self, src, dst, payload, on_receive, on_drop, lim, msg):
        if self.topo.distance(src, dst) <= lim:
            if self.on_rx:
                self.on_rx(dst, msg)
            on_receive(dst, payload, src)
        elif on_drop is not None:
            on_drop(src, dst, payload)

    def broadcast(self, src: int, payload: Any, on_receive: Callable[[int, Any, int], None],
                  limit: Optional[float] = None, msg: str = "broadcast",
                  receivers=None) -> int:
        self.topo.check(src)
        lim = self._limit(limit)
        pool = range(len(self.topo)) if receivers is None else receivers
        hearers = self.topo.within(src, list(pool), lim)
        if self.on_tx:
            self.on_tx(src, msg)
        for dst in hearers:
            dst = int(dst)
            self.kernel.schedule_in(self.params.tx_delay, "packet-delivery", self._arrive,
                                    src, dst, payload, on_receive, None, lim, msg, target=dst)
        return len(hearers)
