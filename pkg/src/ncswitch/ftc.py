"""Fault-tolerant scheduling: reconfigure output ports when classes violate their bounds.

The decision table protects the highest violating class by parking lower
classes in a per-port holding FIFO:

==========  ==========  ==========  ==========================
high        mean        low         action
==========  ==========  ==========  ==========================
violating   any         any         TransmitHP_HoldMPBP
within      violating   any         HoldBP_TransmitHPThenMP
within      within      violating   TransmitBP_IfNoMP
within      within      within      NoCompensation
==========  ==========  ==========  ==========================
"""
from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .fdi import FaultDetector, Mode
from .kernel import EventKind
from .model import Packet, PriorityClass
from .switch import Switch

log = logging.getLogger(__name__)

HP, MP, BP = PriorityClass.HIGH, PriorityClass.MEAN, PriorityClass.LOW


class Status(enum.Enum):
    WITHIN = "WithinBound"
    VIOLATING = "Violating"


class Action(enum.Enum):
    TRANSMIT_HP_HOLD_MPBP = "TransmitHP_HoldMPBP"
    TRANSMIT_BP_IF_NO_MP = "TransmitBP_IfNoMP"
    HOLD_BP_TRANSMIT_HP_THEN_MP = "HoldBP_TransmitHPThenMP"
    NO_COMPENSATION = "NoCompensation"


# classes parked in the holding FIFO while each action is in force
HELD = {
    Action.TRANSMIT_HP_HOLD_MPBP: (MP, BP),
    Action.HOLD_BP_TRANSMIT_HP_THEN_MP: (BP,),
    Action.TRANSMIT_BP_IF_NO_MP: (),
    Action.NO_COMPENSATION: (),
}


@dataclass(frozen=True)
class ClassDelayStatus:
    hp: Status = Status.WITHIN
    mp: Status = Status.WITHIN
    bp: Status = Status.WITHIN

    @classmethod
    def from_detector(cls, det: FaultDetector) -> "ClassDelayStatus":
        def st(c):
            return Status.VIOLATING if det.class_state(c).mode is Mode.FAULTY else Status.WITHIN
        return cls(st(HP), st(MP), st(BP))


@dataclass(frozen=True)
class CompensationDecision:
    action: Action
    port: int = 0
    at: int = 0
    status: ClassDelayStatus = ClassDelayStatus()


def decide(s: ClassDelayStatus, port: int = 0, at: int = 0) -> CompensationDecision:
    V = Status.VIOLATING
    if s.hp is V:
        # every nested branch under a violating high class performs "hold MP/BP, send HP"
        action = Action.TRANSMIT_HP_HOLD_MPBP
    elif s.mp is V:
        action = Action.HOLD_BP_TRANSMIT_HP_THEN_MP
    elif s.bp is V:
        action = Action.TRANSMIT_BP_IF_NO_MP
    else:
        action = Action.NO_COMPENSATION
    return CompensationDecision(action, port, at, s)


class Compensator:
    """Drives output selection of a three-class :class:`Switch` from detector state.

    Decisions are re-evaluated at every selection instant and, through
    CompensationReview events, on every detector mode change. A decision row
    is emitted through ``on_decision`` whenever a port's action changes.
    """

    def __init__(self, switch: Switch, detector: FaultDetector,
                 on_decision: Optional[Callable[[CompensationDecision], None]] = None) -> None:
        if switch.config.priorities != 3:
            raise ValueError("compensation needs exactly three priority classes")
        self.switch = switch
        self.detector = detector
        self.on_decision = on_decision
        n = switch.config.num_ports
        self.holding: list[deque[Packet]] = [deque() for _ in range(n)]
        self.current = [CompensationDecision(Action.NO_COMPENSATION, p) for p in range(n)]
        self._held_counts = [{MP: 0, BP: 0, HP: 0} for _ in range(n)]
        self.held = 0
        self._review_pending = False
        switch.selector = self.select
        switch.enqueue_hook = self._on_enqueue
        detector.listeners.append(self._mode_changed)
        switch.engine.on(EventKind.COMPENSATION_REVIEW, lambda ev: self.review(ev.fire_at))

    def in_compensation(self, port: int) -> bool:
        return self.current[port].action is not Action.NO_COMPENSATION

    def _mode_changed(self, cls: int, mode: Mode, t: int) -> None:
        if not self._review_pending:
            self._review_pending = True
            self.switch.engine.at(t, EventKind.COMPENSATION_REVIEW)

    def review(self, t: int) -> None:
        self._review_pending = False
        status = ClassDelayStatus.from_detector(self.detector)
        for port in range(self.switch.config.num_ports):
            self._enforce(decide(status, port, t), t)
            self.switch.kick(port, t)

    def select(self, port: int, t: int) -> Optional[Packet]:
        d = decide(ClassDelayStatus.from_detector(self.detector), port, t)
        return self.apply(d, t)

    def apply(self, d: CompensationDecision, t: int) -> Optional[Packet]:
        """Enforce ``d`` on its port and return the frame to transmit next, if any."""
        self._enforce(d, t)
        qs = self.switch.queues[d.port]
        if d.action is Action.NO_COMPENSATION:
            return self.switch.select_next(d.port, t)
        if d.action is Action.TRANSMIT_HP_HOLD_MPBP:
            order = (HP,)
        elif d.action is Action.HOLD_BP_TRANSMIT_HP_THEN_MP:
            order = (HP, MP)
        else:
            # zero test: low only goes when the mean queue is empty
            order = (HP, MP, BP)
        for c in order:
            if qs[c]:
                self.switch.queued -= 1
                return qs[c].popleft()
        return None

    def revert(self, port: int, t: int = 0) -> None:
        """Return ``port`` to plain strict priority, draining the holding FIFO."""
        status = ClassDelayStatus.from_detector(self.detector)
        if Status.VIOLATING in (status.hp, status.mp, status.bp):
            log.info("revert of port %d ignored: a class is still violating", port)
            return
        self._enforce(CompensationDecision(Action.NO_COMPENSATION, port, t, status), t)

    def _enforce(self, d: CompensationDecision, t: int) -> None:
        port = d.port
        prev = self.current[port]
        if prev.action is not d.action:
            self.current[port] = d
            if self.on_decision:
                self.on_decision(d)
        held = HELD[d.action]
        hold = self.holding[port]
        qs = self.switch.queues[port]
        counts = self._held_counts[port]
        if any(n and c not in held for c, n in counts.items()):
            # release to the class-queue tails in hold order
            keep: deque[Packet] = deque()
            for p in hold:
                if p.cls in held:
                    keep.append(p)
                else:
                    qs[p.cls].append(p)
                    counts[p.cls] -= 1
                    self.switch.queued += 1
                    self.held -= 1
            self.holding[port] = hold = keep
        for c in held:
            q = qs[c]
            while q:
                self._hold(port, q.popleft())

    def _hold(self, port: int, p: Packet) -> None:
        self.holding[port].append(p)
        self._held_counts[port][p.cls] += 1
        self.switch.queued -= 1
        self.held += 1

    def _on_enqueue(self, p: Packet) -> None:
        # frames of a held class go straight to the holding FIFO, keeping per-class order
        port = p.egress_port
        if p.cls in HELD[self.current[port].action]:
            self.switch.queues[port][p.cls].pop()
            self._hold(port, p)
