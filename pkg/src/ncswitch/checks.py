"""Runtime invariant monitor for the switch model.

Attach with ``simulation.build(sc, check_invariants=True)``. Every violation
raises :class:`InvariantViolation` at the event where it happens.
"""
from __future__ import annotations

from collections import Counter

from .ftc import Action, BP, MP
from .kernel import Event, EventKind
from .model import DeliveryRecord, Packet


class InvariantViolation(AssertionError):
    pass


class InvariantMonitor:
    def __init__(self, sim) -> None:
        self.sim = sim
        self.switch = sim.switch
        self.comp = sim.compensator
        self.checked = Counter()
        self._last_key = (-1, -1)
        self._started: dict[int, tuple[Packet, int]] = {}
        self._last_id: dict[tuple[int, int], int] = {}
        sim.engine.add_observer(self.after_event)
        self.switch.select_hooks.append(self.on_select)

    def fail(self, msg: str) -> None:
        raise InvariantViolation(f"t={self.sim.engine.clock}: {msg}")

    def _compensating(self, port: int) -> bool:
        return self.comp is not None and self.comp.in_compensation(port)

    def on_select(self, port: int, p: Packet, t: int) -> None:
        qs = self.switch.queues[port]
        if not self._compensating(port):
            for level in range(p.cls + 1, self.switch.config.priorities + 1):
                if qs[level]:
                    self.fail(f"port {port}: class {p.cls} selected while class {level} is waiting")
            self.checked["strict_priority"] += 1
        else:
            action = self.comp.current[port].action
            if action is Action.TRANSMIT_HP_HOLD_MPBP and p.cls in (MP, BP):
                self.fail(f"port {port}: class {p.cls} transmitted while mean/low are held")
            if action is Action.TRANSMIT_BP_IF_NO_MP and p.cls == BP and qs[MP]:
                self.fail(f"port {port}: low transmitted with mean frames waiting (zero test)")
            self.checked["compensation_rule"] += 1

    def on_delivery(self, rec: DeliveryRecord, p: Packet) -> None:
        if not (p.created_at <= p.ingress_enqueued_at <= p.output_enqueued_at <= p.delivered_at):
            self.fail(f"packet {p.id}: timestamps out of order")
        if rec.delay < p.transmission:
            self.fail(f"packet {p.id}: delay {rec.delay} shorter than its transmission time")
        key = (p.egress_port, p.cls)
        last = self._last_id.get(key, -1)
        if p.id <= last:
            self.fail(f"port {key[0]} class {key[1]}: packet {p.id} delivered after {last}")
        self._last_id[key] = p.id
        self.checked["fifo"] += 1

    def after_event(self, ev: Event) -> None:
        key = (ev.fire_at, ev.seq)
        if key <= self._last_key:
            self.fail(f"dispatch order regressed: {key} after {self._last_key}")
        self._last_key = key

        if ev.kind is EventKind.TRANSMISSION_START:
            self._started[ev.payload] = (self.switch.links[ev.payload].packet, ev.fire_at)
        elif ev.kind is EventKind.TRANSMISSION_END:
            p, t0 = self._started.pop(ev.payload)
            if p.delivered_at != ev.fire_at or ev.fire_at - t0 != p.transmission:
                self.fail(f"packet {p.id}: transmission interrupted or stretched")
            self.checked["non_preemption"] += 1

        for port, link in enumerate(self.switch.links):
            if link.idle and not self._compensating(port) and any(self.switch.queues[port]):
                self.fail(f"port {port}: link idle with frames queued")
        self.checked["work_conservation"] += 1

        c = self.sim.counts()
        if c["generated"] != c["delivered"] + c["in_flight"] + c["queued"] + c["held"] + c["dropped"]:
            self.fail(f"packet conservation broken: {c}")
        self.checked["conservation"] += 1
