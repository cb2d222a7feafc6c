"""Random waypoint, mass and linear mobility as per-node state updates.

Each ``*_step`` is a pure function of the previous state and returns a new
:class:`MobilityState`. Randomness comes only from the stream argument, so a
node's trajectory is fixed by ``(seed, label, params)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .kernel import RandomStream

MODELS = ("random-waypoint", "mass", "linear")


class MobilityConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FieldGeometry:
    width: float = 1000.0
    height: float = 1000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise MobilityConfigError(f"field must have positive size, got {self.width} x {self.height}")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class MobilityParams:
    model: str = "random-waypoint"
    v_min: float = 0.0
    v_max: float = 0.0
    pause: float = 0.0
    speed_sigma: float = 1.0
    turn_sigma: float = 0.3
    sample_interval: float = 1.0
    # linear only: every node starts on one common heading
    shared_heading: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise MobilityConfigError(f"unknown mobility model {self.model!r}")
        if not 0 <= self.v_min <= self.v_max:
            raise MobilityConfigError(f"need 0 <= v_min <= v_max, got {self.v_min}, {self.v_max}")
        if not self.sample_interval > 0:
            raise MobilityConfigError("sample_interval must be > 0")
        if self.speed_sigma < 0 or self.turn_sigma < 0 or self.pause < 0:
            raise MobilityConfigError("sigmas and pause must be >= 0")

    def check_field(self, field: FieldGeometry) -> None:
        if self.sample_interval * self.v_max >= min(field.width, field.height):
            raise MobilityConfigError(
                "sample_interval * v_max must be smaller than the field; reflection would fold more than once")


@dataclass(frozen=True, slots=True)
class MobilityState:
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    target: Optional[tuple[float, float]] = None
    pause_remaining: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def init_positions(n: int, field: FieldGeometry, stream: RandomStream) -> list[tuple[float, float]]:
    if n < 1:
        raise ValueError("need at least one node")
    out = []
    for _ in range(n):
        x = stream.uniform(0.0, field.width)
        y = stream.uniform(0.0, field.height)
        out.append((x, y))
    return out


def _draw_speed(p: MobilityParams, stream: RandomStream) -> float:
    if p.v_min == p.v_max:
        return p.v_max
    return stream.uniform(p.v_min, p.v_max)


def _head_to(x: float, y: float, tx: float, ty: float, speed: float) -> tuple[float, float]:
    d = math.hypot(tx - x, ty - y)
    if d == 0.0:
        return 0.0, 0.0
    return speed * (tx - x) / d, speed * (ty - y) / d


def _new_leg(x: float, y: float, p: MobilityParams, field: FieldGeometry,
             stream: RandomStream) -> MobilityState:
    tx = stream.uniform(0.0, field.width)
    ty = stream.uniform(0.0, field.height)
    speed = _draw_speed(p, stream)
    vx, vy = _head_to(x, y, tx, ty, speed)
    return MobilityState(x, y, vx, vy, (tx, ty), 0.0)


def init_state(position: tuple[float, float], p: MobilityParams, field: FieldGeometry,
               stream: RandomStream, heading: Optional[float] = None) -> MobilityState:
    """Initial state for one node.

    ``heading`` overrides the per-node heading draw (linear model with a
    shared heading); random waypoint ignores it.
    """
    x, y = position
    if p.model == "random-waypoint":
        return _new_leg(x, y, p, field, stream)
    if heading is None:
        heading = stream.uniform(0.0, 2 * math.pi)
    speed = p.v_max if p.model == "linear" else _draw_speed(p, stream)
    return MobilityState(x, y, speed * math.cos(heading), speed * math.sin(heading))


def reflect(x: float, y: float, vx: float, vy: float,
            field: FieldGeometry) -> tuple[float, float, float, float]:
    """Fold an out-of-field point back by mirror reflection about the crossed wall(s)."""
    w, h = field.width, field.height
    if x > w:
        x, vx = 2 * w - x, -vx
    elif x < 0:
        x, vx = -x, -vx
    if y > h:
        y, vy = 2 * h - y, -vy
    elif y < 0:
        y, vy = -y, -vy
    if not (0 <= x <= w and 0 <= y <= h):
        raise MobilityConfigError(f"overshoot beyond one fold at ({x}, {y}); sampling interval too coarse")
    return x, y, vx, vy


def rwp_step(s: MobilityState, p: MobilityParams, dt: float, stream: RandomStream,
             field: FieldGeometry = FieldGeometry()) -> MobilityState:
    if s.pause_remaining > 0:
        left = s.pause_remaining - dt
        if left > 0:
            return replace(s, vx=0.0, vy=0.0, pause_remaining=left)
        return _new_leg(s.x, s.y, p, field, stream)
    if s.target is None:
        return _new_leg(s.x, s.y, p, field, stream)
    tx, ty = s.target
    speed = math.hypot(s.vx, s.vy)
    remaining = math.hypot(tx - s.x, ty - s.y)
    if remaining <= speed * dt:
        if p.pause > 0:
            return MobilityState(tx, ty, 0.0, 0.0, None, p.pause)
        return _new_leg(tx, ty, p, field, stream)
    return replace(s, x=s.x + s.vx * dt, y=s.y + s.vy * dt)


def mass_step(s: MobilityState, p: MobilityParams, dt: float, stream: RandomStream,
              field: FieldGeometry = FieldGeometry()) -> MobilityState:
    dv = stream.gaussian(0.0, p.speed_sigma)
    dh = stream.gaussian(0.0, p.turn_sigma)
    speed = math.hypot(s.vx, s.vy)
    new_speed = min(max(speed + dv, p.v_min), p.v_max)
    if dh == 0.0 and new_speed == speed:
        vx, vy = s.vx, s.vy
    else:
        heading = math.atan2(s.vy, s.vx) + dh
        vx, vy = new_speed * math.cos(heading), new_speed * math.sin(heading)
    x, y, vx, vy = reflect(s.x + vx * dt, s.y + vy * dt, vx, vy, field)
    return MobilityState(x, y, vx, vy)


def linear_step(s: MobilityState, p: MobilityParams, dt: float,
                field: FieldGeometry = FieldGeometry()) -> MobilityState:
    x, y, vx, vy = reflect(s.x + s.vx * dt, s.y + s.vy * dt, s.vx, s.vy, field)
    return MobilityState(x, y, vx, vy)


def step(s: MobilityState, p: MobilityParams, dt: float, stream: RandomStream,
         field: FieldGeometry) -> MobilityState:
    if p.model == "random-waypoint":
        return rwp_step(s, p, dt, stream, field)
    if p.model == "mass":
        return mass_step(s, p, dt, stream, field)
    return linear_step(s, p, dt, field)


def trace_lines(samples) -> list[str]:
    """Format ``(time, node, x, y)`` samples for the mobility trace export."""
    return [f"{t:.6f}\t{node}\t{x:.6f}\t{y:.6f}" for t, node, x, y in samples]
