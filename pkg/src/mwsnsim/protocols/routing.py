"""Data forwarding: member to head, head to head toward the sink, and recovery.

Inter-cluster forwarding works from a per-head neighbour table learned when
the round's clusters form (announced positions for position-based protocols,
gradient hop counts for the others). The table ages as nodes move; a hop
to a head that has since moved away fails at delivery time.
"""

from __future__ import annotations

import math
from typing import Optional

from ..network import DROPPED_OUT_OF_RANGE, Packet
from .model import HEAD, MEMBER


def intra_route(world, member: int, pkt: Packet) -> str:
    """Send ``pkt`` one hop toward ``member``'s head (through the relay for 2-hop members)."""
    node = world.nodes[member]
    nxt = node.parent if node.parent is not None else node.cluster_head
    if node.role != MEMBER or nxt is None or not world.nodes[nxt].alive:
        world.drop(pkt, "no-route")
        return "lost"
    out = world.radio.unicast(member, nxt, pkt, world.receive, world.on_intra_fail, msg="data")
    if out == DROPPED_OUT_OF_RANGE:
        # recovery covers inter-cluster hops only
        world.drop(pkt, "intra-range")
        return "lost"
    return out


def _sink_distance(world, node: int) -> float:
    p, s = world.topo.pos[node], world.sink_pos
    return math.hypot(p[0] - s[0], p[1] - s[1])


def _own_mark(world, node: int) -> float:
    if node == world.sink:
        return 0.0
    if world.pcfg.position_based:
        return world.adv.get(node, _sink_distance(world, node))
    return world.hop_count(node)


def _candidates(world, holder: int, exclude) -> list[tuple[float, int]]:
    """``(mark, node)`` pairs the holder believes it can reach, best first.

    Position-based holders know their own position, so they drop table entries
    whose announced position is now beyond head range, and use the sink
    directly whenever it is in range.
    """
    table = world.table.get(holder, {})
    limit = world.radio.params.head_range
    out = []
    if world.pcfg.position_based:
        here = world.topo.pos[holder]
        if world.sink not in exclude and _sink_distance(world, holder) <= limit:
            out.append((0.0, world.sink))
        for g, (mark, (x, y)) in table.items():
            if g in exclude or g == world.sink:
                continue
            if math.hypot(here[0] - x, here[1] - y) <= limit:
                out.append((mark, g))
    else:
        out = [(mark, g) for g, mark in table.items() if g not in exclude]
    out.sort()
    return out


def next_hop(world, holder: int, exclude=frozenset()) -> Optional[int]:
    """Regular inter-cluster next hop: strict progress toward the sink, or ``None``."""
    own = _own_mark(world, holder)
    for mark, g in _candidates(world, holder, exclude):
        return g if mark < own else None
    return None


def inter_route(world, head: int, pkt: Packet) -> str:
    """Forward a packet held by ``head`` toward the sink."""
    nxt = next_hop(world, head)
    if nxt is None:
        if world.pcfg.recovery:
            return recover(world, head, pkt, None)
        world.drop(pkt, "no-next-hop")
        return "lost"
    return _send(world, head, nxt, pkt, recovery=False)


def _send(world, holder: int, nxt: int, pkt: Packet, recovery: bool) -> str:
    pkt.pending = (holder, nxt, recovery or pkt.retrying)
    out = world.radio.unicast(holder, nxt, pkt, world.receive, world.on_inter_fail,
                              limit=world.reach(holder), msg="data")
    if out == DROPPED_OUT_OF_RANGE:
        inter_failed(world, holder, nxt, pkt)
    return out


def inter_failed(world, src: int, dst: int, pkt: Packet) -> None:
    if world.pcfg.recovery:
        recover(world, src, pkt, dst)
    else:
        world.drop(pkt, "inter-range")


def recover(world, head: int, pkt: Packet, failed_next: Optional[int]) -> str:
    """Alternate next hop, else buffer and retry after a timeout, else drop.

    GRC-R may take one hop that makes no progress toward the sink; DEMC-R
    accepts any head whose hop count is not above its own. A retry after the
    timeout first refreshes the holder's neighbour table.
    """
    if failed_next is not None:
        pkt.failed.add(failed_next)
    exclude = pkt.failed | (set(pkt.hops) - {world.sink})
    cands = _candidates(world, head, exclude)
    own = _own_mark(world, head)
    choice = None
    if world.pcfg.position_based:
        strict = [c for c in cands if c[0] < own]
        if strict:
            choice = strict[0][1]
        elif cands and head not in pkt.nonstrict_at:
            pkt.nonstrict_at.add(head)
            choice = cands[0][1]
    else:
        ok = [c for c in cands if c[0] <= own and c[0] != math.inf]
        if ok:
            choice = ok[0][1]
    if choice is not None:
        world.stats["recovery_hops"] += 1
        return _send(world, head, choice, pkt, recovery=True)
    if pkt.retries >= world.pcfg.recovery_retries:
        world.drop(pkt, "recovery-exhausted")
        return "lost"
    pkt.retries += 1
    world.stats["recovery_buffered"] += 1
    world.buffer(pkt, head)
    world.kernel.schedule_in(world.pcfg.recovery_timeout, "recovery-timeout",
                             _retry, world, head, pkt, target=head)
    return "buffered"


def _retry(world, head, pkt):
    world.unbuffer(pkt)
    pkt.failed.clear()
    pkt.nonstrict_at.discard(head)
    if not world.nodes[head].alive:
        world.drop(pkt, "holder-dead")
        return
    world.refresh_table(head)
    pkt.retrying = True
    try:
        inter_route(world, head, pkt)
    finally:
        pkt.retrying = False


def on_arrival(world, node: int, pkt: Packet, prev: int) -> None:
    """Dispatch a packet that just reached ``node``."""
    recovered = bool(pkt.pending and pkt.pending[2])
    pkt.pending = None
    pkt.hops.append(node)
    if node == world.sink:
        pkt.marks.append((node, 0.0, recovered))
        world.deliver(pkt)
        return
    state = world.nodes[node]
    if state.role == HEAD:
        pkt.marks.append((node, _own_mark(world, node), recovered))
    pkt.failed.clear()
    if len(pkt.hops) > world.pcfg.max_hops:
        world.drop(pkt, "ttl")
    elif not state.alive:
        world.drop(pkt, "dead")
    elif state.role == HEAD:
        inter_route(world, node, pkt)
    elif state.role == MEMBER:
        intra_route(world, node, pkt)
    else:
        world.drop(pkt, "unaffiliated")
