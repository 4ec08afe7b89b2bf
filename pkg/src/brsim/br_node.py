"""Basketball routing node.

Every station flips a coin at the start of each decision epoch: with
probability p it listens (and may relay for others), otherwise it transmits
any queued data of its own. Forwarding is greedy on the responders' stored
destination RSSI; when no responder beats the sender's own reading, or nobody
answered at all, the node shoots directly at the destination. Once a packet
has travelled more than loop_threshold hops, stations it already passed
through are excluded from the candidate set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frame import Response, SrcBcast
from .protocol import AWAIT_ACK, IDLE, PacketMeta, RadioNode, ResponseRecord


@dataclass(frozen=True)
class BrParams:
    """Protocol constants; times in milliseconds."""

    relay_probability: float = 0.73
    response_wait_ms: int = 5000
    ack_wait_ms: int = 2000
    bcast_ms: int = 10000
    loop_threshold: int = 10
    slot_ms: int = 20
    response_slot_bound: int = 8
    max_backoff_exponent: int = 5
    max_tx_attempts: int = 8
    epoch_ms: int = 5000
    hard_hop_cap: int = 40

    def __post_init__(self) -> None:
        if not 0.0 <= self.relay_probability <= 1.0:
            raise ValueError(f"relay_probability not a probability: {self.relay_probability}")
        for name in (
            "response_wait_ms",
            "ack_wait_ms",
            "bcast_ms",
            "slot_ms",
            "epoch_ms",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in (
            "loop_threshold",
            "response_slot_bound",
            "max_backoff_exponent",
            "max_tx_attempts",
            "hard_hop_cap",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


class BrNode(RadioNode):
    """One station running the coin-flip relay protocol."""

    def __init__(self, node_id: int, sim) -> None:
        super().__init__(node_id, sim)
        self.params: BrParams = sim.br_params
        # Mode until the first scheduled epoch: drawn from the same coin, so
        # the degenerate probabilities behave exactly from t = 0 onward.
        self.listening = not self.is_destination and sim.engine.bernoulli(
            self.id, self.params.relay_probability
        )

    # ---- epoch ------------------------------------------------------------

    def on_epoch(self) -> None:
        """Redraw the mode; in transmit mode, start on queued data if free.

        The coin is flipped every epoch regardless of queue state, so with
        p = 0 no station ever listens and with p = 1 none ever transmits its
        own data. The destination takes no epochs at all.
        """
        if self.is_destination:
            return
        self.listening = self.sim.engine.bernoulli(
            self.id, self.params.relay_probability
        )
        if not self.listening and self.queue and self.phase == IDLE:
            self._start_handshake()

    # ---- responder side -----------------------------------------------------

    def on_rts(self, tx: int) -> None:
        """Answer if this station may serve as a relay right now.

        The destination always answers. Other stations answer only in
        listening mode and only once a beacon has given them a destination
        reading to report.
        """
        if self.is_destination:
            self._schedule_response(tx)
            return
        if not self.listening or self.dst_rssi is None:
            return
        self._schedule_response(tx)

    def _send_response(self, frame: Response, owner: int) -> None:
        self.sim.transmit(self.id, frame, only_to=owner)

    # ---- sender side ---------------------------------------------------------

    def _start_handshake(self) -> None:
        self._begin_handshake_state()
        pending = self.queue[0]
        self.sim.transmit(self.id, SrcBcast(self.id))
        self._arm(
            "select",
            self.sim.engine.now + self.params.response_wait_ms,
            ref=pending.meta.uid,
        )

    def _on_select_timer(self) -> None:
        meta = self.queue[0].meta
        target = self.select_forwarder(meta, self.responses)
        self.sim.transmit(self.id, self._routing_frame(target), only_to=target, uid=meta.uid)
        self.current_target = target
        self.phase = AWAIT_ACK
        self._arm("ack", self.sim.engine.now + self.params.ack_wait_ms, ref=meta.uid)

    def loop_filter(self, meta: PacketMeta, candidates: set[int]) -> set[int]:
        """Drop already-visited forwarders once the packet is long-travelled."""
        if meta.hop_count <= self.params.loop_threshold:
            return set(candidates)
        return set(candidates) - self.prior_forwarders[meta.uid]

    def select_forwarder(
        self, meta: PacketMeta, responses: list[ResponseRecord]
    ) -> int:
        """Pick the next receiver for the queued packet.

        Highest reported destination RSSI wins, ties going to the lowest
        station id. If the sender's own reading is at least as good as the
        best offer, or no admissible responder exists, the packet is shot
        directly at the destination.
        """
        allowed = self.loop_filter(meta, {r.responder for r in responses})
        candidates = [r for r in responses if r.responder in allowed]
        if not candidates:
            return self.destination
        best = max(candidates, key=lambda r: (r.dst_rssi, -r.responder))
        if self.dst_rssi is not None and self.dst_rssi >= best.dst_rssi:
            return self.destination
        return best.responder
