"""Reactive shortest-path baseline over CSMA/CA.

Stations are always listening: any station that has heard a destination
beacon answers every RTS, so each handshake surveys the full audible
neighbourhood. The sender then forwards to the responder with the strongest
link among those strictly closer to the destination (by stored destination
RSSI), which reproduces the short, greedy hops of a reactive distance-vector
route on this radio model.

All outbound frames contend for the channel with slotted binary exponential
backoff and a clear-channel check before each transmission; a frame that
exhausts its clear-channel retries is abandoned, which for RTS and data
frames counts as a failed hop attempt.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .frame import Frame, Response, SrcBcast
from .protocol import AWAIT_ACK, IDLE, PacketMeta, RadioNode, ResponseRecord


@dataclass(frozen=True)
class CsmaParams:
    """Channel-access and forwarding constants; times in milliseconds."""

    min_backoff_exponent: int = 3
    max_backoff_exponent: int = 5
    max_csma_backoffs: int = 4
    cca_ms: int = 8
    slot_ms: int = 20
    next_hop_metric: str = "link"

    def __post_init__(self) -> None:
        if not 0 <= self.min_backoff_exponent <= self.max_backoff_exponent:
            raise ValueError("backoff exponents must satisfy 0 <= min <= max")
        if self.max_csma_backoffs < 0:
            raise ValueError("max_csma_backoffs must be non-negative")
        if self.cca_ms < 1 or self.slot_ms < 1:
            raise ValueError("cca_ms and slot_ms must be at least 1 ms")
        if self.next_hop_metric not in ("link", "dst"):
            raise ValueError(
                f"next_hop_metric must be 'link' or 'dst': {self.next_hop_metric!r}"
            )


@dataclass
class _CsmaItem:
    frame: Frame
    purpose: str  # "rts" | "response" | "routing"
    target: int | None = None
    uid: int | None = None


class AodvNode(RadioNode):
    """One station running the always-on greedy baseline."""

    def __init__(self, node_id: int, sim) -> None:
        super().__init__(node_id, sim)
        self.params = sim.br_params
        self.csma: CsmaParams = sim.csma_params
        self._csma_queue: deque[_CsmaItem] = deque()
        self._csma_item: _CsmaItem | None = None
        self._csma_nb = 0
        self._csma_be = self.csma.min_backoff_exponent

    # ---- channel access ---------------------------------------------------

    def csma_send(
        self,
        frame: Frame,
        purpose: str,
        target: int | None = None,
        uid: int | None = None,
    ) -> None:
        self._csma_queue.append(_CsmaItem(frame, purpose, target, uid))
        if self._csma_item is None:
            self._csma_next()

    def _csma_next(self) -> None:
        self._csma_item = self._csma_queue.popleft()
        self._csma_nb = 0
        self._csma_be = self.csma.min_backoff_exponent
        self._arm_cca()

    def _arm_cca(self) -> None:
        delay = self.sim.engine.draw_uniform(self.id, 1 << self._csma_be) * self.csma.slot_ms
        self._arm("cca", self.sim.engine.now + delay)

    def _on_extra_timer(self, tag: str, ref: int, token: int) -> None:
        if tag == "cca":
            if self._is_live(tag, token) and self._csma_item is not None:
                self._cca_sample()
        elif tag == "csma-idle":
            if self._is_live(tag, token):
                self._csma_item = None
                if self._csma_queue:
                    self._csma_next()

    def _cca_sample(self) -> None:
        item = self._csma_item
        assert item is not None
        if self.sim.channel_busy(self.id):
            self._csma_nb += 1
            self._csma_be = min(self._csma_be + 1, self.csma.max_backoff_exponent)
            if self._csma_nb > self.csma.max_csma_backoffs:
                self._csma_abandon(item)
                return
            self._arm_cca()
            return
        at = self.sim.engine.now + self.csma.cca_ms
        self.sim.transmit_at(at, self.id, item.frame, only_to=item.target, uid=item.uid)
        self._csma_committed(item, at)
        # hold the channel state until the transmission tick has passed
        self._arm("csma-idle", at + 1)

    def _csma_committed(self, item: _CsmaItem, at: int) -> None:
        if item.purpose == "rts":
            self._arm("select", at + self.params.response_wait_ms, ref=item.uid or 0)
        elif item.purpose == "routing":
            self.current_target = item.target
            self.phase = AWAIT_ACK
            self._arm("ack", at + self.params.ack_wait_ms, ref=item.uid or 0)

    def _csma_abandon(self, item: _CsmaItem) -> None:
        self._csma_item = None
        if item.purpose in ("rts", "routing"):
            if item.purpose == "routing":
                self.current_target = item.target
            self.beb_backoff()
        # an abandoned response is simply never sent
        if self._csma_item is None and self._csma_queue:
            self._csma_next()

    # ---- responder side -----------------------------------------------------

    def on_rts(self, tx: int) -> None:
        if self.is_destination or self.dst_rssi is not None:
            self._schedule_response(tx)

    def _send_response(self, frame: Response, owner: int) -> None:
        self.csma_send(frame, "response", target=owner)

    # ---- sender side ----------------------------------------------------------

    def _start_handshake(self) -> None:
        self._begin_handshake_state()
        self.csma_send(SrcBcast(self.id), "rts", uid=self.queue[0].meta.uid)

    def _on_select_timer(self) -> None:
        meta = self.queue[0].meta
        target = self.select_next_hop(meta, self.responses)
        self.csma_send(self._routing_frame(target), "routing", target=target, uid=meta.uid)

    def select_next_hop(
        self, meta: PacketMeta, responses: list[ResponseRecord]
    ) -> int:
        """Best responder strictly closer to the destination, else direct.

        Progress is measured by the responder's stored destination RSSI
        against the sender's own. Among progressing responders the strongest
        link wins ("link", the default); next_hop_metric = "dst" prefers the
        strongest destination RSSI instead. Without any progressing responder
        the packet goes straight at the destination.
        """
        own = self.dst_rssi if self.dst_rssi is not None else -(10**9)
        candidates = [r for r in responses if r.dst_rssi > own]
        if not candidates:
            return self.destination
        if self.csma.next_hop_metric == "dst":
            best = max(candidates, key=lambda r: (r.dst_rssi, -r.responder))
        else:
            best = max(candidates, key=lambda r: (r.link_rssi, -r.responder))
        return best.responder

    # ---- queue hooks ----------------------------------------------------------

    def _on_enqueued(self) -> None:
        if self.phase == IDLE:
            self._start_handshake()

    def _on_hop_done(self) -> None:
        if self.queue and self.phase == IDLE:
            self._start_handshake()
