"""One simulated network: kernel, nodes, mobility, radio, protocol and traffic."""

from __future__ import annotations

import math
from collections import Counter, deque
from typing import Optional

from . import mobility as mob
from .config import ScenarioConfig
from .kernel import Kernel, RandomStream
from .metrics import MetricsRecord, finalize
from .network import Packet, Radio, Topology
from .protocols import routing
from .protocols.election import DecaElection, DemcElection, estimate_mobility, grc_elect, mar_elect
from .protocols.model import HEAD, ClusterView, NodeState, ZoneGrid

CONTROL_MESSAGES = ("hello", "announce", "join", "relay", "gradient")
# traffic is paused this long before each re-clustering
ROUND_GUARD = 0.5
GRADIENT_SETTLE = 0.25


class World:
    def __init__(self, cfg: ScenarioConfig, positions=None, record: bool = False,
                 trace_mobility: bool = False):
        self.cfg = cfg
        self.pcfg = cfg.protocol_config()
        self.mparams = cfg.mobility_params()
        self.field = cfg.field()
        self.mparams.check_field(self.field)
        self.v_max = self.mparams.v_max
        self.kernel = Kernel(record=record)

        n = cfg.nodes
        if positions is None:
            positions = mob.init_positions(n, self.field, RandomStream(cfg.seed, "placement"))
        positions = [tuple(map(float, p)) for p in positions]
        if len(positions) != n:
            raise ValueError(f"expected {n} positions, got {len(positions)}")
        outside = [p for p in positions if not self.field.contains(*p)]
        if outside:
            raise ValueError(f"positions outside the field: {outside[:3]}")
        self.sink = n
        self.sink_pos = (cfg.width / 2 if cfg.sink_x is None else cfg.sink_x,
                         cfg.height / 2 if cfg.sink_y is None else cfg.sink_y)
        self.topo = Topology(positions + [self.sink_pos])
        self.radio = Radio(self.kernel, self.topo, cfg.radio_params(), self._on_tx, self._on_rx)
        self.nodes = [NodeState(i, self.pcfg.initial_energy) for i in range(n)]

        self.mstreams = [RandomStream(cfg.seed, f"mobility/{i}") for i in range(n)]
        heading = None
        if self.mparams.model == "linear" and self.mparams.shared_heading:
            heading = RandomStream(cfg.seed, "mobility/shared").uniform(0.0, 2 * math.pi)
        self.mstates = [mob.init_state(positions[i], self.mparams, self.field, self.mstreams[i], heading)
                        for i in range(n)]
        keep = int(math.ceil(self.pcfg.mobility_window / self.mparams.sample_interval)) + 2
        self.tracks = [deque([(0.0, x, y)], maxlen=keep) for x, y in positions]
        self.trace_mobility = trace_mobility
        self.mobility_trace: list[tuple[float, int, float, float]] = []

        self.protocol_stream = RandomStream(cfg.seed, "protocol")
        self.traffic_stream = RandomStream(cfg.seed, "traffic")
        self.grid = ZoneGrid(cfg.width, cfg.height, self.pcfg.cell_size)

        self.round = 0
        self.round_start = 0.0
        self._heads: list[int] = []
        self.hops: dict[int, int] = {}
        # per-head neighbour tables learned at cluster formation
        self.table: dict[int, dict] = {}
        self.adv: dict[int, float] = {}
        self.election = None
        self.snapshots: list[tuple[int, str, int, int]] = []
        self.clusters: list[ClusterView] = []
        self.tx_log: list[tuple[int, float, int, str]] = []

        self.sent = 0
        self.delivered = 0
        self.duplicates = 0
        self.dropped = 0
        self.live: dict[int, Packet] = {}
        self.buffered: dict[int, int] = {}
        self.drop_reasons: Counter = Counter()
        self.stats: Counter = Counter()
        self.delivered_packets: list[Packet] = []
        self.keep_packets = record
        self.traffic_end = cfg.duration - cfg.warmdown
        self._resume = self.pcfg.election_window + GRADIENT_SETTLE
        self.boosted: dict[int, float] = {}

    # -- queries ---------------------------------------------------------
    def alive_sensors(self) -> list[int]:
        return [s.id for s in self.nodes if s.alive]

    def heads(self) -> list[int]:
        return self._heads

    def hop_count(self, node: int) -> float:
        if node == self.sink:
            return 0
        return self.hops.get(node, math.inf)

    def reach(self, node: int) -> float:
        """Inter-cluster transmit range of ``node`` this round."""
        return self.boosted.get(node, self.radio.params.head_range)

    def traffic_allowed(self, t: float) -> bool:
        if t >= self.traffic_end:
            return False
        rl = self.pcfg.round_length
        k = math.floor(t / rl)
        since, until = t - k * rl, (k + 1) * rl - t
        return since >= self._resume and until > ROUND_GUARD

    # -- radio hooks ------------------------------------------------------
    def _on_tx(self, node: int, msg: str) -> None:
        if node == self.sink:
            return
        if msg != "data":
            self.tx_log.append((self.round, self.kernel.now, node, msg))
        self._charge(node, self.pcfg.tx_cost)

    def _on_rx(self, node: int, msg: str) -> None:
        if node != self.sink:
            self._charge(node, self.pcfg.rx_cost)

    def _charge(self, node: int, joules: float) -> None:
        state = self.nodes[node]
        was_alive = state.alive
        state.charge(joules)
        if was_alive and not state.alive:
            self._heads = [h for h in self._heads if h != node]

    # -- packet accounting ------------------------------------------------
    def new_packet(self, src: int) -> Packet:
        pkt = Packet(self.sent, src, self.kernel.now)
        self.sent += 1
        self.live[pkt.id] = pkt
        return pkt

    def receive(self, dst: int, pkt: Packet, src: int) -> None:
        routing.on_arrival(self, dst, pkt, src)

    def on_intra_fail(self, src: int, dst: int, pkt: Packet) -> None:
        self.drop(pkt, "intra-range")

    def on_inter_fail(self, src: int, dst: int, pkt: Packet) -> None:
        routing.inter_failed(self, src, dst, pkt)

    def deliver(self, pkt: Packet) -> None:
        if pkt.delivered_at is None:
            pkt.delivered_at = self.kernel.now
            self.delivered += 1
            self.live.pop(pkt.id, None)
            if self.keep_packets:
                self.delivered_packets.append(pkt)
        else:
            self.duplicates += 1

    def drop(self, pkt: Packet, reason: str) -> None:
        if self.live.pop(pkt.id, None) is None:
            raise RuntimeError(f"packet {pkt.id} dropped twice or after delivery ({reason})")
        self.dropped += 1
        self.drop_reasons[reason] += 1

    def buffer(self, pkt: Packet, holder: int) -> None:
        self.buffered[pkt.id] = holder

    def unbuffer(self, pkt: Packet) -> None:
        self.buffered.pop(pkt.id, None)

    def note_join(self, head: int, member: int) -> None:
        self.stats["joins"] += 1

    # -- events -----------------------------------------------------------
    def _mobility_step(self) -> None:
        now = self.kernel.now
        dt = self.mparams.sample_interval
        pos = self.topo.pos
        for i, s in enumerate(self.mstates):
            s = mob.step(s, self.mparams, dt, self.mstreams[i], self.field)
            self.mstates[i] = s
            pos[i, 0] = s.x
            pos[i, 1] = s.y
            self.tracks[i].append((now, s.x, s.y))
            if self.trace_mobility:
                self.mobility_trace.append((now, i, s.x, s.y))
        nxt = now + dt
        if nxt <= self.cfg.duration:
            self.kernel.schedule(nxt, "mobility-step", self._mobility_step)

    def start_round(self) -> None:
        now = self.kernel.now
        self.round += 1
        self.round_start = now
        for s in self.nodes:
            s.reset()
        self._heads = []
        self.hops = {}
        self.table = {}
        self.adv = {}
        self.boosted = {}
        for s in self.nodes:
            s.mobility_estimate = estimate_mobility(self.tracks[s.id], self.pcfg.mobility_window, now)
        alive = self.alive_sensors()
        proto = self.pcfg.protocol
        pos = self.topo.pos
        if proto == "MAR" or proto.startswith("GRC"):
            if proto == "MAR":
                heads, assign = mar_elect(alive, {i: self.nodes[i].mobility_estimate for i in alive},
                                          pos, self.radio.params.range)
            else:
                heads, assign = grc_elect(alive, pos, {i: self.nodes[i].residual_energy for i in alive},
                                          self.pcfg.initial_energy, self.grid, self.radio.params.range,
                                          self.pcfg.grc_weights)
            for h in heads:
                self.nodes[h].make_head()
            for m, h in assign.items():
                self.nodes[m].join(h)
            for h in heads:
                self.radio.broadcast(h, None, _ignore, msg="announce", receivers=alive)
            self._heads = sorted(heads)
        elif proto == "DECA":
            self.election = DecaElection(self)
            self.election.start()
        else:
            self.election = DemcElection(self, self.protocol_stream)
            self.election.start()
        self.kernel.schedule_in(self.pcfg.election_window, "election-timer", self.finish_election)
        nxt = now + self.pcfg.round_length
        if nxt < self.cfg.duration:
            self.kernel.schedule(nxt, "round-timer", self.start_round)

    def finish_election(self) -> None:
        self._heads = sorted(s.id for s in self.nodes if s.role == HEAD and s.alive)
        views = {h: ClusterView(h, set(), self.round_start) for h in self._heads}
        for s in self.nodes:
            if s.role == "member" and s.cluster_head in views:
                views[s.cluster_head].members.add(s.id)
        self.clusters = list(views.values())
        for v in self.clusters:
            self.snapshots.append((self.round, self.pcfg.protocol, v.head, len(v.members)))
        if self.pcfg.position_based:
            # heads hear each other's announcements, which carry position
            for h in self._heads:
                self.adv[h] = self._sink_distance(h)
            for h in self._heads:
                self.table[h] = self._position_entries(h)
        else:
            self.table = {h: {} for h in self._heads}
            self.radio.broadcast(self.sink, 0, self._gradient, limit=self.radio.params.head_range,
                                 msg="gradient", receivers=self._heads)
            self.kernel.schedule_in(GRADIENT_SETTLE / 2, "election-timer", self._boost_isolated)

    def _sink_distance(self, node: int) -> float:
        p = self.topo.pos[node]
        return math.hypot(p[0] - self.sink_pos[0], p[1] - self.sink_pos[1])

    def _position_entries(self, h: int) -> dict:
        near = self.topo.within(h, self._heads, self.radio.params.head_range)
        return {int(g): (self.adv.get(int(g), self._sink_distance(int(g))),
                         (float(self.topo.pos[g, 0]), float(self.topo.pos[g, 1]))) for g in near}

    def _gradient(self, dst: int, hops: int, src: int) -> None:
        if self.nodes[dst].role != HEAD:
            return
        self.table.setdefault(dst, {})[src] = hops
        if dst in self.hops:
            return
        self.hops[dst] = hops + 1
        self.radio.broadcast(dst, hops + 1, self._gradient, limit=self.radio.params.head_range,
                             msg="gradient", receivers=self._heads)

    def _boost_isolated(self) -> None:
        """Heads the gradient missed raise their power by one range unit and listen again.

        A boosted head rebroadcasts the gradient, so heads near it may then join
        at normal power; boosting is the last resort in each pass.
        """
        normal = self.radio.params.head_range
        boost = normal + self.radio.params.range
        while True:
            if self._learn(normal, boosting=False):
                continue
            if not self._learn(boost, boosting=True):
                return

    def _learn(self, reach: float, boosting: bool) -> bool:
        grew = False
        for h in self._heads:
            if h in self.hops or not self.nodes[h].alive:
                continue
            entries = {int(g): self.hops[int(g)] for g in self.topo.within(h, self._heads, reach)
                       if int(g) in self.hops}
            if self.topo.distance(h, self.sink) <= reach:
                entries[self.sink] = 0
            if not entries:
                continue
            if boosting:
                self.boosted[h] = reach
            self._on_tx(h, "gradient")
            self.table[h] = entries
            self.hops[h] = min(entries.values()) + 1
            grew = True
            if boosting:
                # one boost per pass, then let it propagate at normal power
                return True
        return grew

    def refresh_table(self, holder: int) -> None:
        """Re-learn the holder's neighbour heads from the current topology (recovery probe)."""
        self._on_tx(holder, "probe")
        if self.pcfg.position_based:
            # advertised sink distances stay fixed for the round; only positions are re-learned
            self.table[holder] = self._position_entries(holder)
            return
        entries = {}
        reach = self.reach(holder)
        for g in self.topo.within(holder, self._heads, reach):
            g = int(g)
            if g in self.hops:
                entries[g] = self.hops[g]
        if self.topo.distance(holder, self.sink) <= reach:
            entries[self.sink] = 0
        self.table[holder] = entries

    def _traffic(self, i: int) -> None:
        now = self.kernel.now
        node = self.nodes[i]
        if self.traffic_allowed(now) and node.alive and node.role != HEAD:
            routing.intra_route(self, i, self.new_packet(i))
        nxt = now + self.cfg.traffic_interval
        if nxt < self.traffic_end:
            self.kernel.schedule(nxt, "traffic-generation", self._traffic, i, target=i)

    # -- driver -----------------------------------------------------------
    def start_mobility(self) -> None:
        if self.v_max > 0:
            self.kernel.schedule(self.kernel.now + self.mparams.sample_interval, "mobility-step",
                                 self._mobility_step)

    def setup(self) -> None:
        self.kernel.schedule(0.0, "round-timer", self.start_round)
        self.start_mobility()
        for i in range(self.cfg.nodes):
            offset = self.traffic_stream.uniform(0.0, self.cfg.traffic_interval)
            self.kernel.schedule(offset, "traffic-generation", self._traffic, i, target=i)

    def run(self) -> MetricsRecord:
        self.setup()
        self.kernel.run(until=self.cfg.duration)
        return self.finalize()

    def finalize(self) -> MetricsRecord:
        return finalize(self.sent, self.delivered, self.duplicates, self.dropped, len(self.live))

    def control_messages(self) -> Counter:
        return Counter(msg for _, _, _, msg in self.tx_log)


def _ignore(*_args) -> None:
    pass


def simulate(cfg: ScenarioConfig, **kwargs) -> tuple[MetricsRecord, World]:
    world = World(cfg, **kwargs)
    record = world.run()
    return record, world
