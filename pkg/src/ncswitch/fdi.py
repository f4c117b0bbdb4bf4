"""Online delay-fault detector.

Every delivered frame's end-to-end delay is compared with the worst-case
bound of its flow. A class turns Faulty on the first frame strictly above its
bound and returns to Normal after ``k`` consecutive compliant deliveries.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

from .model import DeliveryRecord, Packet
from .netcalc import DelayBound


class MissingBound(KeyError):
    pass


class UnknownClass(KeyError):
    pass


class Mode(enum.Enum):
    NORMAL = "Normal"
    FAULTY = "Faulty"


class FaultKind(enum.Enum):
    DELAY_VIOLATION = "DelayViolation"
    DROP = "Drop"


@dataclass
class ClassState:
    cls: int
    mode: Mode = Mode.NORMAL
    since: int = 0
    compliant_streak: int = 0


@dataclass(frozen=True)
class FaultEvent:
    at: int
    cls: int
    packet_id: int
    measured: int
    bound: int
    residual: int
    kind: FaultKind = FaultKind.DELAY_VIOLATION


ModeListener = Callable[[int, Mode, int], None]


class FaultDetector:
    """Per-class Normal/Faulty state machine fed by deliveries.

    ``bounds`` maps flow id to its :class:`DelayBound`; the threshold is the
    bound in ticks. Listeners get ``(cls, new_mode, t)`` on each mode change.
    """

    def __init__(self, classes: Iterable[int], bounds: Mapping[str, DelayBound], k: int = 1) -> None:
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.bounds = dict(bounds)
        self.states = {c: ClassState(c) for c in classes}
        self.listeners: list[ModeListener] = []
        self.faults: list[FaultEvent] = []

    def class_state(self, cls: int) -> ClassState:
        try:
            return self.states[cls]
        except KeyError:
            raise UnknownClass(cls) from None

    def observe(self, d: DeliveryRecord, bound: Optional[DelayBound] = None) -> Optional[FaultEvent]:
        if bound is None:
            bound = self.bounds.get(d.flow_id)
            if bound is None:
                raise MissingBound(f"no bound for flow {d.flow_id!r}")
        if bound.cls != d.cls:
            raise ValueError(f"bound for class {bound.cls} applied to class {d.cls}")
        st = self.class_state(d.cls)
        t = d.delivered_at
        if d.delay > bound.bound_ticks:
            ev = FaultEvent(t, d.cls, d.packet_id, d.delay, bound.bound_ticks, d.delay - bound.bound_ticks)
            self.faults.append(ev)
            st.compliant_streak = 0
            if st.mode is not Mode.FAULTY:
                self._set(st, Mode.FAULTY, t)
            return ev
        st.compliant_streak += 1
        if st.mode is Mode.FAULTY and st.compliant_streak >= self.k:
            self._set(st, Mode.NORMAL, t)
        return None

    def observe_drop(self, p: Packet, t: int) -> FaultEvent:
        ev = FaultEvent(t, p.cls, p.id, 0, 0, 0, FaultKind.DROP)
        self.faults.append(ev)
        return ev

    def _set(self, st: ClassState, mode: Mode, t: int) -> None:
        st.mode = mode
        st.since = t
        for fn in self.listeners:
            fn(st.cls, mode, t)
