"""Periodic frame sources and the burst injector used to congest the switch."""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .kernel import Engine, EventKind
from .model import Packet


class InvalidFlow(ValueError):
    pass


@dataclass(frozen=True)
class FlowSpec:
    """A strictly periodic source. All times are in ticks."""

    flow_id: str
    period: int
    cls: int
    ingress_port: int
    egress_port: int
    transmission_time: int
    phase: int = 0
    packets_per_release: int = 1
    jitter: int = 0  # max release jitter, drawn uniformly from [0, jitter]

    def check(self) -> list[str]:
        problems = []
        if self.period <= 0:
            problems.append("period must be > 0")
        if self.phase < 0:
            problems.append("phase must be >= 0")
        if self.transmission_time <= 0:
            problems.append("transmission_time must be > 0")
        if self.packets_per_release < 1:
            problems.append("packets_per_release must be >= 1")
        if self.jitter < 0:
            problems.append("jitter must be >= 0")
        elif self.period > 0 and self.jitter >= self.period:
            problems.append("jitter must be < period")
        return problems


@dataclass(frozen=True)
class BurstSpec:
    """``extra_per_period`` additional frames at each release of the target inside [start, end]."""

    target: Union[str, tuple[int, int]]  # flow_id, or (egress port, class)
    extra_per_period: int
    start: int
    end: int


def periodic_source(f: FlowSpec, horizon: int) -> list[int]:
    """Nominal release instants ``phase + k*period`` up to and including ``horizon``."""
    if f.period <= 0:
        raise InvalidFlow(f"flow {f.flow_id}: period must be > 0")
    if f.phase > horizon:
        return []
    return list(range(f.phase, horizon + 1, f.period))


def resolve_target(b: BurstSpec, flows: Sequence[FlowSpec]) -> Optional[int]:
    """Index of the flow a burst piggybacks on, or None if nothing matches."""
    for i, f in enumerate(flows):
        if isinstance(b.target, str):
            if f.flow_id == b.target:
                return i
        elif (f.egress_port, f.cls) == tuple(b.target):
            return i
    return None


def inject_burst(b: BurstSpec, target: FlowSpec, horizon: int) -> list[tuple[int, int]]:
    """(instant, extra frames) pairs. A window with start >= end injects nothing."""
    if b.start >= b.end:
        return []
    return [(t, b.extra_per_period) for t in periodic_source(target, min(horizon, b.end))
            if t >= b.start]


class TrafficGenerator:
    """Expands flows and bursts into kernel events and hands frames to ``sink``.

    Frame ids follow creation order; frames released at the same instant are
    numbered in flow declaration order, burst frames after all nominal ones.
    """

    def __init__(self, engine: Engine, flows: Sequence[FlowSpec], bursts: Sequence[BurstSpec],
                 horizon: int, sink: Callable[[Packet, int], object], seed: int = 0) -> None:
        self.engine = engine
        self.flows = list(flows)
        self.horizon = horizon
        self.sink = sink
        self.rng = random.Random(seed)
        self.generated = 0
        self.in_transit = 0  # created, not yet handed to the sink
        self.generated_by_flow = [0] * len(self.flows)
        self._next_id = 0
        # (flow index, nominal release) -> extra frames
        self._extra: dict[tuple[int, int], int] = {}
        for b in bursts:
            idx = resolve_target(b, self.flows)
            if idx is None:
                raise InvalidFlow(f"burst target {b.target!r} matches no flow")
            for t, n in inject_burst(b, self.flows[idx], horizon):
                self._extra[(idx, t)] = self._extra.get((idx, t), 0) + n
        self._heap: list[tuple[int, int, int]] = []  # (actual release, flow index, nominal)
        for i, f in enumerate(self.flows):
            if f.period <= 0:
                raise InvalidFlow(f"flow {f.flow_id}: period must be > 0")
            self._push(i, f.phase)
        engine.on(EventKind.SOURCE_RELEASE, lambda ev: self._release(ev.fire_at))
        engine.on(EventKind.BURST_INJECTION, lambda ev: self._burst(ev.payload, ev.fire_at))
        engine.on(EventKind.INGRESS_ARRIVAL, lambda ev: self._arrive(ev.payload, ev.fire_at))
        if self._heap:
            engine.at(self._heap[0][0], EventKind.SOURCE_RELEASE)

    def _push(self, i: int, nominal: int) -> None:
        if nominal > self.horizon:
            return
        f = self.flows[i]
        actual = nominal + (self.rng.randint(0, f.jitter) if f.jitter else 0)
        if actual <= self.horizon:
            heapq.heappush(self._heap, (actual, i, nominal))

    def _make(self, i: int, t: int, burst: bool = False) -> Packet:
        f = self.flows[i]
        p = Packet(self._next_id, f.flow_id, f.cls, f.ingress_port, f.egress_port, t,
                   f.transmission_time, burst=burst)
        self._next_id += 1
        self.generated += 1
        self.generated_by_flow[i] += 1
        return p

    def _release(self, t: int) -> None:
        heap = self._heap
        batch: list[Packet] = []
        extras: list[tuple[int, int]] = []
        while heap and heap[0][0] == t:
            _, i, nominal = heapq.heappop(heap)
            for _ in range(self.flows[i].packets_per_release):
                batch.append(self._make(i, t))
            n = self._extra.get((i, nominal))
            if n:
                extras.append((i, n))
            self._push(i, nominal + self.flows[i].period)
        self.in_transit += len(batch)
        self.engine.at(t, EventKind.INGRESS_ARRIVAL, batch)
        if extras:
            self.engine.at(t, EventKind.BURST_INJECTION, extras)
        if heap:
            self.engine.at(heap[0][0], EventKind.SOURCE_RELEASE)

    def _burst(self, extras: list[tuple[int, int]], t: int) -> None:
        for i, n in extras:
            for _ in range(n):
                self.sink(self._make(i, t, burst=True), t)

    def _arrive(self, batch: list[Packet], t: int) -> None:
        for p in batch:
            self.in_transit -= 1
            self.sink(p, t)
