"""Cluster-head election rules.

MAR and GRC elect from a global snapshot. DECA and DEMC are distributed:
their elections run as timer and broadcast events on the kernel (see
:class:`DecaElection` and :class:`DemcElection`).
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .model import ZoneGrid


def estimate_mobility(track: Sequence[tuple[float, float, float]], window: float, now: float) -> float:
    """Path length travelled inside the trailing ``window`` seconds, per second.

    ``track`` holds ``(time, x, y)`` samples in time order.
    """
    if not window > 0:
        raise ValueError("window must be > 0")
    start = now - window
    path = 0.0
    prev = None
    for t, x, y in track:
        if t < start - 1e-9 or t > now + 1e-9:
            continue
        if prev is not None:
            path += math.hypot(x - prev[0], y - prev[1])
        prev = (x, y)
    return path / window


def mar_elect(ids: Iterable[int], mobility: Mapping[int, float], pos: np.ndarray,
              radio_range: float) -> tuple[list[int], dict[int, int]]:
    """Greedy least-mobile dominating set.

    Returns ``(heads, assignment)`` where ``assignment`` maps every member to
    its head.
    """
    order = sorted(ids, key=lambda i: (mobility[i], i))
    unassigned = set(order)
    heads: list[int] = []
    assign: dict[int, int] = {}
    for h in order:
        if h not in unassigned:
            continue
        heads.append(h)
        unassigned.discard(h)
        for m in sorted(unassigned):
            if math.hypot(pos[m][0] - pos[h][0], pos[m][1] - pos[h][1]) <= radio_range:
                assign[m] = h
        unassigned.difference_update(assign)
    return heads, assign


def grc_score(dist_to_center: float, half_diagonal: float, energy_frac: float,
              weights: tuple[float, float] = (0.5, 0.5)) -> float:
    w_center, w_energy = weights
    return w_center * (1.0 - dist_to_center / half_diagonal) + w_energy * energy_frac


def grc_elect(ids: Iterable[int], pos: np.ndarray, energy: Mapping[int, float], initial_energy: float,
              grid: ZoneGrid, radio_range: float,
              weights: tuple[float, float] = (0.5, 0.5)) -> tuple[list[int], dict[int, int]]:
    """One head per occupied zone: the node closest to the zone centre with most energy left.

    Other nodes join the nearest head they can hear; nodes hearing no head
    stay out of the assignment.
    """
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for i in ids:
        x, y = pos[i][0], pos[i][1]
        cell = grid.cell_of(x, y)
        cx, cy = grid.center(cell)
        s = grc_score(math.hypot(x - cx, y - cy), grid.half_diagonal(cell),
                      energy[i] / initial_energy, weights)
        cur = best.get(cell)
        # higher score wins; equal score -> lower id
        if cur is None or (s, -i) > (cur[0], -cur[1]):
            best[cell] = (s, i)
    heads = sorted(i for _, i in best.values())
    head_set = set(heads)
    assign: dict[int, int] = {}
    for i in ids:
        if i in head_set:
            continue
        heard = [(h, math.hypot(pos[i][0] - pos[h][0], pos[i][1] - pos[h][1])) for h in heads]
        heard = [(h, d, 0.0) for h, d in heard if d <= radio_range]
        choice = affiliate(heard, position_based=True)
        if choice is not None:
            assign[i] = choice
    return heads, assign


def affiliate(heard: Sequence[tuple[int, float, float]], position_based: bool) -> Optional[int]:
    """Pick a head among ``(head, distance, weight)`` announcements.

    Position-based protocols take the nearest head, the others the heaviest.
    Ties go to the lower head id. ``None`` when nothing was heard.
    """
    if not heard:
        return None
    if position_based:
        return min(heard, key=lambda a: (a[1], a[0]))[0]
    return min(heard, key=lambda a: (-a[2], a[0]))[0]


def deca_weight(energy_frac: float, degree: int, max_degree: int, mobility: float, v_max: float,
                weights: tuple[float, float, float] = (0.5, 0.3, 0.2)) -> float:
    w_e, w_c, w_m = weights
    conn = degree / max_degree if max_degree > 0 else 0.0
    mob = min(mobility / v_max, 1.0) if v_max > 0 else 0.0
    return w_e * energy_frac + w_c * conn - w_m * mob


def announce_delay(weight: float, node_id: int, window: float, jitter: float) -> float:
    return window * (1.0 - min(max(weight, 0.0), 1.0)) + node_id * jitter


class DecaElection:
    """One clustering message per node: an announcement or a join, never both.

    Degree comes from a hello beacon exchanged at the start of the round,
    which is how a DECA node learns its neighbour list.
    """

    def __init__(self, world):
        self.world = world
        self.cfg = world.pcfg
        self.timers = {}
        self.heard: dict[int, list[tuple[int, float, float]]] = {}
        self.degree: dict[int, int] = {}
        self.sent: dict[int, int] = {}

    def start(self) -> None:
        w = self.world
        alive = w.alive_sensors()
        self.degree = {i: 0 for i in alive}
        for i in alive:
            w.radio.broadcast(i, None, self._hello, msg="hello", receivers=alive)
        w.kernel.schedule_in(self.cfg.hello_phase, "election-timer", self._arm, target=None)

    def _hello(self, dst, _payload, _src):
        if dst in self.degree:
            self.degree[dst] += 1

    def _arm(self):
        w = self.world
        max_deg = max(self.degree.values(), default=0)
        for i in self.degree:
            node = w.nodes[i]
            node.weight = deca_weight(node.residual_energy / self.cfg.initial_energy,
                                      self.degree[i], max_deg, node.mobility_estimate,
                                      w.v_max, self.cfg.deca_weights)
            delay = announce_delay(node.weight, i, self.cfg.announce_window, self.cfg.id_jitter)
            self.timers[i] = w.kernel.schedule_in(delay, "election-timer", self._fire, i, target=i)

    def _fire(self, i):
        w = self.world
        node = w.nodes[i]
        if not node.alive:
            return
        node.make_head()
        self._count(i)
        w.radio.broadcast(i, (i, node.weight), self._announce, msg="announce",
                          receivers=list(self.degree))

    def _announce(self, dst, payload, _src):
        head, weight = payload
        node = self.world.nodes[dst]
        if node.role != "unaffiliated" or self.sent.get(dst):
            return
        d = self.world.topo.distance(dst, head)
        self.heard.setdefault(dst, []).append((head, d, weight))
        if (weight, head) > (node.weight, dst):
            self.world.kernel.cancel(self.timers[dst])
            choice = affiliate(self.heard[dst], position_based=False)
            node.join(choice)
            self._count(dst)
            self.world.radio.unicast(dst, choice, dst, self._joined, msg="join")

    def _joined(self, head, member, _src):
        self.world.note_join(head, member)

    def _count(self, i):
        self.sent[i] = self.sent.get(i, 0) + 1


class DemcElection:
    """Only the winning head transmits; its 1-hop members relay the announcement once.

    No hello exchange and no neighbour list: hearers affiliate silently, and a
    node hearing a relay joins as a 2-hop member through the relaying node.
    """

    def __init__(self, world, stream):
        self.world = world
        self.cfg = world.pcfg
        self.stream = stream
        self.timers = {}
        self.pending: set[int] = set()

    def start(self) -> None:
        w = self.world
        alive = w.alive_sensors()
        self.pending = set(alive)
        self.alive = alive
        for i in alive:
            node = w.nodes[i]
            node.weight = 0.5 * node.residual_energy / self.cfg.initial_energy + 0.5 * self.stream.random()
        for i in alive:
            delay = announce_delay(w.nodes[i].weight, i, self.cfg.announce_window, self.cfg.id_jitter)
            self.timers[i] = w.kernel.schedule_in(delay, "election-timer", self._fire, i, target=i)

    def _fire(self, i):
        if i not in self.pending:
            return
        self.pending.discard(i)
        w = self.world
        w.nodes[i].make_head()
        w.radio.broadcast(i, (i, 1), self._hear, msg="announce", receivers=self.alive)

    def _hear(self, dst, payload, src):
        if dst not in self.pending:
            return
        head, hops = payload
        self.pending.discard(dst)
        self.world.kernel.cancel(self.timers[dst])
        node = self.world.nodes[dst]
        if hops == 1:
            node.join(head)
            self.world.note_join(head, dst)
            self.world.radio.broadcast(dst, (head, 2), self._hear, msg="relay", receivers=self.alive)
        else:
            node.join(head, via=src)
            self.world.note_join(head, dst)
