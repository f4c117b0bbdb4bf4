"""Wire kernel, traffic, switch, detector and compensator together for one scenario run."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .fdi import FaultDetector, FaultEvent, FaultKind
from .ftc import Compensator
from .kernel import Engine, RunSummary
from .model import DeliveryRecord, Packet
from .netcalc import DelayBound, FlowBound, switch_bounds
from .scenario import Scenario
from .switch import Switch
from .trace import Recorder, RunTrace
from .traffic import TrafficGenerator


class UnstableBounds(RuntimeError):
    def __init__(self, reports: list[FlowBound]):
        super().__init__(", ".join(f"{r.flow_id}: {r.unstable}" for r in reports))
        self.reports = reports


def effective_bounds(sc: Scenario) -> tuple[list[FlowBound], dict[str, DelayBound]]:
    """Computed per-flow bounds plus the thresholds the detector will use.

    A class override replaces the computed bound for every flow of that class.
    Flows whose computed bound is unstable and not overridden get no threshold.
    """
    tb = sc.timebase
    reports = switch_bounds(sc.switch, sc.flows, tb)
    thresholds: dict[str, DelayBound] = {}
    for r in reports:
        if r.cls in sc.bounds:
            value = sc.bounds[r.cls]
            thresholds[r.flow_id] = DelayBound(r.flow_id, r.cls, value, tb.ceil_ticks(value))
        elif r.bound is not None:
            thresholds[r.flow_id] = r.bound
    return reports, thresholds


@dataclass
class Simulation:
    scenario: Scenario
    engine: Engine
    switch: Switch
    traffic: TrafficGenerator
    recorder: Recorder
    detector: Optional[FaultDetector]
    compensator: Optional[Compensator]
    reports: list[FlowBound]
    thresholds: dict[str, DelayBound]
    monitor: Optional[object] = None
    summary: Optional[RunSummary] = None

    def counts(self) -> dict[str, int]:
        sw = self.switch
        return {
            "generated": self.traffic.generated,
            "delivered": sw.delivered,
            "in_flight": sw.in_flight() + self.traffic.in_transit,
            "queued": sw.queued + len(sw.ingress),
            "held": self.compensator.held if self.compensator else 0,
            "dropped": sw.dropped,
        }

    def run(self) -> RunTrace:
        self.summary = self.engine.run_until(self.scenario.horizon)
        return self.recorder.finish()


def build(sc: Scenario, check_invariants: bool = False) -> Simulation:
    reports, thresholds = effective_bounds(sc)
    if sc.fdi_enabled:
        missing = [r for r in reports if r.flow_id not in thresholds]
        if missing:
            raise UnstableBounds(missing)

    engine = Engine()
    trace = RunTrace(digest=sc.digest(), ticks_per_tu=sc.tick_scale, priorities=sc.switch.priorities,
                     horizon=sc.horizon)
    for b in thresholds.values():
        trace.thresholds[b.cls] = max(trace.thresholds.get(b.cls, 0), b.bound_ticks)
    recorder = Recorder(trace)
    detector = None
    if sc.fdi_enabled:
        detector = FaultDetector(range(1, sc.switch.priorities + 1), thresholds, sc.fdi_k)
    sim_ref: list[Simulation] = []

    def on_delivery(rec: DeliveryRecord, p: Packet) -> None:
        recorder.record(rec)
        if detector is not None:
            ev = detector.observe(rec)
            if ev is not None:
                recorder.record(ev)
        mon = sim_ref[0].monitor
        if mon is not None:
            mon.on_delivery(rec, p)

    def on_drop(p: Packet, t: int) -> None:
        ev = detector.observe_drop(p, t) if detector else FaultEvent(t, p.cls, p.id, 0, 0, 0, FaultKind.DROP)
        recorder.record(ev)

    switch = Switch(engine, sc.switch, on_delivery, on_drop)
    compensator = Compensator(switch, detector, recorder.record) if sc.ftc_enabled else None
    traffic = TrafficGenerator(engine, sc.flows, sc.bursts, sc.horizon, switch.ingest, sc.seed)
    sim = Simulation(sc, engine, switch, traffic, recorder, detector, compensator, reports, thresholds)
    sim_ref.append(sim)
    if check_invariants:
        from .checks import InvariantMonitor

        sim.monitor = InvariantMonitor(sim)
    return sim


def run(sc: Scenario, check_invariants: bool = False) -> tuple[RunTrace, Simulation]:
    sim = build(sc, check_invariants)
    return sim.run(), sim
