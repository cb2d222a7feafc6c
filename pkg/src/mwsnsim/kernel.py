"""Discrete-event core: event queue, simulation clock and seeded random streams."""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

# Recorded in run metadata so a CSV row names the generator that produced it.
RNG_ALGORITHM = "numpy.PCG64/SeedSequence(sha256-label)"

EVENT_KINDS = (
    "mobility-step",
    "packet-delivery",
    "round-timer",
    "election-timer",
    "traffic-generation",
    "recovery-timeout",
)


class ClockViolation(ValueError):
    """Raised when an event is scheduled before the current clock."""


class SimulationFault(RuntimeError):
    """An event handler failed; the message names the offending event."""


@dataclass(eq=False)
class SimEvent:
    fire_at: float
    seq: int
    kind: str
    target: Any = None
    action: Optional[Callable[..., Any]] = field(default=None, repr=False)
    args: tuple = field(default=(), repr=False)
    cancelled: bool = False
    fired: bool = False

    def __lt__(self, other: "SimEvent") -> bool:
        return (self.fire_at, self.seq) < (other.fire_at, other.seq)


class Kernel:
    """Single-threaded event scheduler.

    Events are ordered by ``(fire_at, seq)``; ``seq`` is the insertion counter,
    so equal-time events dispatch FIFO. With ``record=True`` every dispatched
    event is appended to :attr:`log` as ``(time, seq, kind, target)``.
    """

    def __init__(self, record: bool = False):
        self.now = 0.0
        self._heap: list[SimEvent] = []
        self._seq = 0
        self.dispatched = 0
        self.record = record
        self.log: list[tuple[float, int, str, Any]] = []

    def __len__(self) -> int:
        return sum(1 for ev in self._heap if not ev.cancelled)

    def schedule(self, fire_at: float, kind: str, action: Optional[Callable[..., Any]] = None,
                 *args: Any, target: Any = None) -> SimEvent:
        if not fire_at >= self.now:
            raise ClockViolation(f"cannot schedule {kind!r} at t={fire_at} (clock is {self.now})")
        ev = SimEvent(float(fire_at), self._seq, kind, target, action, args)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def schedule_in(self, delay: float, kind: str, action=None, *args, target=None) -> SimEvent:
        return self.schedule(self.now + delay, kind, action, *args, target=target)

    @staticmethod
    def cancel(handle: SimEvent) -> bool:
        if handle.fired or handle.cancelled:
            return False
        handle.cancelled = True
        return True

    def run(self, until: float = math.inf) -> int:
        count = 0
        heap = self._heap
        while heap and heap[0].fire_at <= until:
            ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            self.now = ev.fire_at
            ev.fired = True
            if self.record:
                self.log.append((ev.fire_at, ev.seq, ev.kind, ev.target))
            if ev.action is not None:
                try:
                    ev.action(*ev.args)
                except SimulationFault:
                    raise
                except Exception as exc:
                    raise SimulationFault(
                        f"handler for event kind={ev.kind} target={ev.target} "
                        f"t={ev.fire_at:.6f} seq={ev.seq} failed: {exc!r}"
                    ) from exc
            count += 1
        if until != math.inf and until > self.now:
            self.now = float(until)
        self.dispatched += count
        return count

    def trace_lines(self) -> list[str]:
        return [f"{t:.6f}\t{seq}\t{kind}\t{'global' if tgt is None else tgt}"
                for t, seq, kind, tgt in self.log]


def derive_seed(seed: int, label: str) -> np.random.SeedSequence:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *words])


class RandomStream:
    """Independent PCG64 stream keyed by ``(seed, label)``."""

    def __init__(self, seed: int, label: str):
        self.seed = int(seed)
        self.label = label
        self._gen = np.random.Generator(np.random.PCG64(derive_seed(self.seed, label)))
        self._random = self._gen.random
        self._normal = self._gen.standard_normal

    def child(self, label: str) -> "RandomStream":
        return RandomStream(self.seed, f"{self.label}/{label}")

    def uniform(self, lo: float, hi: float) -> float:
        if not lo < hi:
            raise ValueError(f"uniform draw needs lo < hi, got [{lo}, {hi})")
        x = lo + (hi - lo) * self._random()
        # lo + (hi-lo)*u can round up to hi for tiny intervals
        return x if x < hi else math.nextafter(hi, lo)

    def gaussian(self, mean: float, sigma: float) -> float:
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        z = self._normal()
        return mean if sigma == 0 else mean + sigma * z

    def random(self) -> float:
        return self._random()


def draw_uniform(stream: RandomStream, lo: float, hi: float) -> float:
    return stream.uniform(lo, hi)


def draw_gaussian(stream: RandomStream, mean: float, sigma: float) -> float:
    return stream.gaussian(mean, sigma)
