"""Deterministic discrete-event core: millisecond clock, FIFO-stable heap, RNG.

Time is an unsigned integer count of simulated milliseconds. Events pop in
(time, seq) order, where seq is the global schedule order, so same-tick events
process in the order they were scheduled. Scheduling into the past raises
PastEventError.

Randomness comes from per-node xorshift64* streams so one node's draws never
perturb another's. The generator is fully specified by its update equations
(64-bit wrapping arithmetic):

    x ^= x >> 12
    x ^= (x << 25) mod 2**64
    x ^= x >> 27
    output = (x * 0x2545F4914F6CDD1D) mod 2**64

Stream seeds are derived from (run_seed, node_id) with two rounds of
splitmix64:

    z = (z + 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output = z ^ (z >> 31)

Both recurrences are implementation-language independent; any runtime with
64-bit integers reproduces the same draws.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

from .frame import Frame

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_stream_seed(run_seed: int, node_id: int) -> int:
    """Seed for one node's stream; never zero (xorshift fixed point)."""
    mixed = _splitmix64(run_seed & _MASK64)
    mixed = _splitmix64(mixed ^ ((node_id + 1) * 0x9E3779B97F4A7C15 & _MASK64))
    return mixed or 0x9E3779B97F4A7C15


class RngStream:
    """xorshift64* stream; see module docstring for the update equations."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        if seed == 0:
            raise ValueError("xorshift64* state must be nonzero")
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound), rejection-sampled (no modulo bias)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        limit = (2**64 // bound) * bound
        while True:
            v = self.next_u64()
            if v < limit:
                return v % bound

    def bernoulli(self, p: float) -> bool:
        """True with probability p on a 2**53 grid; exact at p=0 and p=1."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p}")
        return self.randbelow(1 << 53) < round(p * (1 << 53))


@dataclass(frozen=True)
class FrameArrival:
    """A frame reaching rx's antenna; adjudication happens at processing time.

    uid tags Routing frames with the simulation-level packet identity. It is
    never serialized.
    """

    rx: int
    frame: Frame
    tx: int
    uid: int | None = None


@dataclass(frozen=True)
class TimerFire:
    node: int
    tag: str
    ref: int = 0
    token: int = 0


@dataclass(frozen=True)
class DecisionEpoch:
    node: int


@dataclass(frozen=True)
class BeaconTick:
    node: int


Event = FrameArrival | TimerFire | DecisionEpoch | BeaconTick


def describe_event(event: Event) -> tuple[str, int, str]:
    """(kind, node, detail) triple used for trace lines."""
    if isinstance(event, FrameArrival):
        return "arrive", event.rx, f"{event.frame.type.name}<-{event.tx}"
    if isinstance(event, TimerFire):
        return "timer", event.node, f"{event.tag}:{event.ref}"
    if isinstance(event, DecisionEpoch):
        return "epoch", event.node, "-"
    return "beacon", event.node, "-"


class PastEventError(Exception):
    pass


class Engine:
    """Event loop plus the per-node RNG streams for one run."""

    def __init__(self, run_seed: int, trace: list[str] | None = None) -> None:
        self.run_seed = run_seed
        self.trace = trace
        self.now = 0
        self.scheduled = 0
        self.processed = 0
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = 0
        self._streams: dict[int, RngStream] = {}

    def schedule(self, time: int, event: Event) -> None:
        if time < self.now:
            raise PastEventError(f"cannot schedule at {time}, current time is {self.now}")
        heapq.heappush(self._heap, (time, self._seq, event))
        self._seq += 1
        self.scheduled += 1

    def pending(self) -> int:
        return len(self._heap)

    def run_until(self, horizon: int, handler: Callable[[Event], None] | None = None) -> int:
        """Process events with time <= horizon in (time, seq) order.

        Returns the number processed. On return, now == horizon.
        """
        count = 0
        while self._heap and self._heap[0][0] <= horizon:
            time, _, event = heapq.heappop(self._heap)
            assert time >= self.now, "event popped out of order"
            self.now = time
            self.processed += 1
            count += 1
            if self.trace is not None:
                kind, node, detail = describe_event(event)
                self.trace.append(f"{time}\t{kind}\t{node}\t{detail}")
            if handler is not None:
                handler(event)
        self.now = horizon
        return count

    def stream(self, node_id: int) -> RngStream:
        st = self._streams.get(node_id)
        if st is None:
            st = RngStream(derive_stream_seed(self.run_seed, node_id))
            self._streams[node_id] = st
        return st

    def draw_uniform(self, node_id: int, bound: int) -> int:
        return self.stream(node_id).randbelow(bound)

    def bernoulli(self, node_id: int, p: float) -> bool:
        return self.stream(node_id).bernoulli(p)
