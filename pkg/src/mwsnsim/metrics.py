"""Packet-loss percentage, packet delivery ratio and cross-seed aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np


class CounterLeak(RuntimeError):
    """Run counters do not partition the sent packets."""


def packet_loss_pct(n: int, m: int) -> float:
    """Percentage of the ``n`` sent packets that were not received (``m`` unique receptions)."""
    if n < 1:
        raise ValueError("packet loss is undefined with no packets sent")
    if m < 0 or m > n:
        raise ValueError(f"received count must lie in [0, n]; got m={m}, n={n}")
    return (n - m) / n * 100.0


def pdr(delivered_total: int, sent: int) -> float:
    """Delivered over sent. Duplicates stay in ``delivered_total``; a value above 1 means duplication."""
    if sent < 1:
        raise ValueError("delivery ratio is undefined with no packets sent")
    if delivered_total < 0:
        raise ValueError("delivered count must be >= 0")
    return delivered_total / sent


@dataclass(frozen=True)
class MetricsRecord:
    sent: int
    delivered_unique: int
    duplicates: int
    dropped: int
    in_flight_at_end: int
    loss_pct: Optional[float]
    pdr_as_defined: Optional[float]
    pdr_unique: Optional[float]

    @property
    def duplication(self) -> bool:
        return self.pdr_as_defined is not None and self.pdr_as_defined > 1.0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def finalize(sent: int, delivered_unique: int, duplicates: int, dropped: int,
             in_flight_at_end: int) -> MetricsRecord:
    counts = (sent, delivered_unique, duplicates, dropped, in_flight_at_end)
    if any(c < 0 for c in counts):
        raise CounterLeak(f"negative counter in {counts}")
    if sent != delivered_unique + dropped + in_flight_at_end:
        raise CounterLeak(
            f"sent={sent} != delivered_unique={delivered_unique} + dropped={dropped} "
            f"+ in_flight={in_flight_at_end}")
    if sent == 0:
        return MetricsRecord(0, 0, duplicates, 0, 0, None, None, None)
    return MetricsRecord(
        sent, delivered_unique, duplicates, dropped, in_flight_at_end,
        loss_pct=packet_loss_pct(sent, delivered_unique),
        pdr_as_defined=pdr(delivered_unique + duplicates, sent),
        pdr_unique=pdr(delivered_unique, sent),
    )


@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    std: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]


Z95 = 1.959963984540054


def summarize(values: Sequence[float]) -> Summary:
    vals = np.asarray([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        raise ValueError("nothing to aggregate")
    mean = float(math.fsum(vals) / vals.size)
    if vals.size == 1:
        return Summary(1, mean, None, None, None)
    std = float(np.std(vals, ddof=1))
    half = Z95 * std / math.sqrt(vals.size)
    return Summary(int(vals.size), mean, std, mean - half, mean + half)


AGGREGATED = ("sent", "delivered_unique", "duplicates", "dropped", "in_flight_at_end",
              "loss_pct", "pdr_as_defined", "pdr_unique")


def aggregate(records: Sequence[MetricsRecord]) -> dict[str, Summary]:
    """Mean, sample std-dev and normal-approximation 95% CI for each metric."""
    if not records:
        raise ValueError("aggregate needs at least one record")
    out = {}
    for name in AGGREGATED:
        vals = [getattr(r, name) for r in records if getattr(r, name) is not None]
        if vals:
            out[name] = summarize(vals)
    return out
