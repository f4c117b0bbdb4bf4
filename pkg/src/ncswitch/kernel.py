"""Deterministic discrete-event kernel.

Time is an integer tick count. Events fire in ``(fire_at, seq)`` order, where
``seq`` is the insertion counter, so simultaneous events dispatch in the order
they were scheduled.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

DEFAULT_TICKS_PER_TU = 1000


class SchedulingInPast(ValueError):
    pass


class EventKind(enum.Enum):
    SOURCE_RELEASE = "SourceRelease"
    INGRESS_ARRIVAL = "IngressArrival"
    SWITCHING_DONE = "SwitchingDone"
    TRANSMISSION_START = "TransmissionStart"
    TRANSMISSION_END = "TransmissionEnd"
    BURST_INJECTION = "BurstInjection"
    COMPENSATION_REVIEW = "CompensationReview"


@dataclass(order=True)
class Event:
    fire_at: int
    seq: int = field(default=-1)
    kind: EventKind = field(default=EventKind.SOURCE_RELEASE, compare=False)
    payload: Any = field(default=None, compare=False)


@dataclass(frozen=True)
class RunSummary:
    dispatched: int
    clock: int


@dataclass(frozen=True)
class TimeBase:
    """Conversion between T.U and integer ticks."""

    ticks_per_tu: int = DEFAULT_TICKS_PER_TU

    def to_ticks(self, tu) -> int:
        ticks = Fraction(tu) * self.ticks_per_tu
        if ticks.denominator != 1:
            raise ValueError(f"{tu} T.U is not a whole number of ticks at scale {self.ticks_per_tu}")
        return int(ticks)

    def to_tu(self, ticks: int) -> Fraction:
        return Fraction(ticks, self.ticks_per_tu)

    def ceil_ticks(self, tu: Fraction) -> int:
        # -(-a // b) is ceiling division on Fractions
        return int(-(-Fraction(tu) * self.ticks_per_tu // 1))


Handler = Callable[[Event], None]


class Engine:
    """Single-threaded event loop with a virtual integer clock."""

    def __init__(self) -> None:
        self.clock = 0
        self._queue: list[Event] = []
        self._seq = 0
        self._handlers: dict[EventKind, Handler] = {}
        self._observers: list[Callable[[Event], None]] = []
        self.dispatched = 0

    def on(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def add_observer(self, fn: Callable[[Event], None]) -> None:
        """Call ``fn(event)`` after every dispatched event."""
        self._observers.append(fn)

    def schedule(self, event: Event) -> int:
        if event.fire_at < self.clock:
            raise SchedulingInPast(f"event at {event.fire_at} scheduled when clock is {self.clock}")
        event.seq = self._seq
        self._seq += 1
        heapq.heappush(self._queue, event)
        return event.seq

    def at(self, fire_at: int, kind: EventKind, payload: Any = None) -> int:
        return self.schedule(Event(fire_at, kind=kind, payload=payload))

    def pending(self) -> int:
        return len(self._queue)

    def peek_time(self) -> Optional[int]:
        return self._queue[0].fire_at if self._queue else None

    def run_until(self, t_end: int) -> RunSummary:
        count = 0
        queue = self._queue
        while queue and queue[0].fire_at <= t_end:
            event = heapq.heappop(queue)
            self.clock = event.fire_at
            handler = self._handlers.get(event.kind)
            if handler is not None:
                handler(event)
            count += 1
            self.dispatched += 1
            for fn in self._observers:
                fn(event)
        self.clock = max(self.clock, t_end)
        return RunSummary(count, self.clock)
