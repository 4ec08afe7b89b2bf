"""World model: radios on a shared channel driven by the event engine.

Time is integer milliseconds and a transmission occupies exactly one tick.
Every frame sent at tick t arrives at tick t+1; all frames sent in the same
tick are mutually concurrent. Reception is adjudicated at arrival: a radio
that was itself transmitting at t hears nothing (half duplex), everything
else is decided by the channel model against the concurrent-transmitter set.

Arrivals are only scheduled to stations that could hear the frame on a quiet
channel (interference can only remove receptions, never add them), which
keeps event counts proportional to real traffic.
"""

from __future__ import annotations

from .baseline import AodvNode
from .br_node import BrNode
from .channel import LinkCache
from .engine import (
    BeaconTick,
    DecisionEpoch,
    Engine,
    Event,
    FrameArrival,
    TimerFire,
)
from .frame import DstBcast, Frame, MessageType
from .metrics import HopRecord, Outcome, RoutingRecord, RunMetrics
from .protocol import PacketMeta, RadioNode

_EMPTY: frozenset[int] = frozenset()

_NODE_CLASSES = {"br": BrNode, "aodv": AodvNode}


class Simulation:
    """One protocol, one scenario, one seed."""

    def __init__(self, scenario, protocol: str, seed: int, trace: bool = False) -> None:
        if protocol not in _NODE_CLASSES:
            raise ValueError(f"unknown protocol: {protocol!r}")
        self.scenario = scenario
        self.protocol = protocol
        self.topology = scenario.topology
        self.br_params = scenario.br
        self.csma_params = scenario.csma
        self.link = LinkCache(self.topology, scenario.channel)
        self.engine = Engine(seed, trace=[] if trace else None)
        self.metrics = RunMetrics(
            protocol, len(self.topology.nodes), seed, trace=self.engine.trace
        )
        cls = _NODE_CLASSES[protocol]
        self.nodes: dict[int, RadioNode] = {
            nid: cls(nid, self) for nid in sorted(self.topology.nodes)
        }
        self._tx: dict[int, set[int]] = {}
        self._uids = 0
        self._sources: dict[int, int] = {}
        self._delivered: dict[int, tuple[int, int]] = {}  # uid -> (hops, time)
        self._dropped: dict[int, tuple[str, int]] = {}  # uid -> (reason, time)
        self._setup()

    def _setup(self) -> None:
        dst = self.topology.destination
        self.nodes[dst].dst_rssi = self.link.rssi_of(dst, dst)
        self.engine.schedule(0, BeaconTick(dst))
        if self.protocol == "br":
            epoch = self.br_params.epoch_ms
            for nid in self.nodes:
                if nid == dst:
                    continue
                offset = self.engine.draw_uniform(nid, epoch)
                self.engine.schedule(offset, DecisionEpoch(nid))
        t = self.scenario.traffic
        for src in t.sources:
            for k in range(t.packets_per_source):
                at = t.start_ms + k * t.inter_arrival_ms
                self.engine.schedule(at, TimerFire(src, "traffic", k, 0))

    # ---- radio ------------------------------------------------------------

    def transmit(
        self, tx: int, frame: Frame, only_to: int | None = None, uid: int | None = None
    ) -> None:
        self.transmit_at(self.engine.now, tx, frame, only_to, uid)

    def transmit_at(
        self,
        at: int,
        tx: int,
        frame: Frame,
        only_to: int | None = None,
        uid: int | None = None,
    ) -> None:
        self._tx.setdefault(at, set()).add(tx)
        if frame.type is MessageType.ROUTING:
            assert uid is not None
            self.metrics.routing_log.append(
                RoutingRecord(at, tx, frame.recv_node_id, uid, frame.hop_count)
            )
        if only_to is not None:
            if self.link.can_hear(tx, only_to):
                self.engine.schedule(at + 1, FrameArrival(only_to, frame, tx, uid))
            return
        audible = (
            self.link.beacon_audible
            if frame.type is MessageType.DST_BCAST
            else self.link.can_hear
        )
        for rx in self.nodes:
            if rx != tx and audible(tx, rx):
                self.engine.schedule(at + 1, FrameArrival(rx, frame, tx, uid))

    def channel_busy(self, me: int) -> bool:
        """Clear-channel assessment: an audible station is transmitting now."""
        reg = self._tx.get(self.engine.now)
        if not reg:
            return False
        return any(o != me and self.link.can_hear(o, me) for o in reg)

    def _arrival_ok(self, ev: FrameArrival) -> bool:
        sent_at = self.engine.now - 1
        reg = self._tx.get(sent_at, _EMPTY)
        if ev.rx in reg:
            return False  # was transmitting itself, half duplex
        concurrent = reg - {ev.tx}
        if ev.frame.type is MessageType.DST_BCAST:
            return self.link.beacon(ev.tx, ev.rx, concurrent)
        return self.link.delivery(ev.tx, ev.rx, concurrent)

    # ---- event dispatch -----------------------------------------------------

    def _handle(self, ev: Event) -> None:
        if isinstance(ev, FrameArrival):
            if self._arrival_ok(ev):
                self.nodes[ev.rx].on_frame(
                    ev.frame, ev.tx, ev.uid, self.link.rssi_of(ev.tx, ev.rx)
                )
        elif isinstance(ev, TimerFire):
            if ev.tag == "traffic":
                self._generate_packet(ev.node)
            else:
                self.nodes[ev.node].on_timer(ev.tag, ev.ref, ev.token)
        elif isinstance(ev, DecisionEpoch):
            self.nodes[ev.node].on_epoch()
            self.engine.schedule(
                self.engine.now + self.br_params.epoch_ms, DecisionEpoch(ev.node)
            )
        elif isinstance(ev, BeaconTick):
            self.transmit(ev.node, DstBcast(ev.node))
            self.engine.schedule(
                self.engine.now + self.br_params.bcast_ms, BeaconTick(ev.node)
            )
        else:  # pragma: no cover - new event types must be wired here
            raise TypeError(f"unhandled event: {ev!r}")

    def _generate_packet(self, src: int) -> None:
        uid = self._uids
        self._uids += 1
        self._sources[uid] = src
        self.metrics.generated += 1
        self.nodes[src].enqueue(
            PacketMeta(uid, src, self.topology.destination, hop_count=0)
        )

    # ---- bookkeeping called by nodes ------------------------------------------

    def deliver(self, uid: int, hops: int) -> None:
        if uid not in self._delivered:
            self._delivered[uid] = (hops, self.engine.now)

    def drop(self, uid: int, reason: str) -> None:
        if uid not in self._dropped:
            self._dropped[uid] = (reason, self.engine.now)

    def record_hop(
        self, uid: int, sender: int, receiver: int, *, success: bool, attempts: int
    ) -> None:
        self.metrics.hops.append(
            HopRecord(
                uid,
                sender,
                receiver,
                self.engine.now,
                self.topology.distance(sender, receiver),
                success,
                attempts,
            )
        )

    # ---- lifecycle ---------------------------------------------------------

    def run(self) -> RunMetrics:
        self.engine.run_until(self.scenario.horizon_ms, self._handle)
        self._finalize()
        return self.metrics

    def _finalize(self) -> None:
        """Assign one outcome per packet; delivery beats any recorded drop."""
        for uid in range(self._uids):
            src = self._sources[uid]
            if uid in self._delivered:
                hops, t = self._delivered[uid]
                outcome = Outcome(uid, src, True, hops, None, t)
            elif uid in self._dropped:
                reason, t = self._dropped[uid]
                outcome = Outcome(uid, src, False, None, reason, t)
            else:
                outcome = Outcome(
                    uid, src, False, None, "horizon", self.scenario.horizon_ms
                )
            self.metrics.outcomes[uid] = outcome


def run_scenario(scenario, protocol: str, seed: int, trace: bool = False) -> RunMetrics:
    """Build and run one simulation; module-level so workers can import it."""
    return Simulation(scenario, protocol, seed, trace=trace).run()


def _run_job(job: tuple) -> RunMetrics:
    scenario, protocol, seed, trace = job
    return run_scenario(scenario, protocol, seed, trace=trace)


def run_many(jobs: list[tuple], max_workers: int = 1) -> list[RunMetrics]:
    """Run (scenario, protocol, seed, trace) jobs, optionally across processes.

    Results come back in job order and are identical regardless of worker
    count: every run is seeded independently and shares no mutable state.
    """
    if max_workers <= 1 or len(jobs) <= 1:
        return [_run_job(job) for job in jobs]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(jobs) // (max_workers * 4))
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=chunk))
