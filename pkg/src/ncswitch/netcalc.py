"""Min-plus network calculus for a single output-queued switch.

Work is measured in T.U of link time (the output link serves one unit of work
per T.U). Arrival curves are affine, ``sigma + rho*t``; service curves are
rate-latency, ``rate * max(0, t - latency)``. Everything is exact
``Fraction`` arithmetic; conversion to ticks happens only in
:func:`switch_bounds`, rounding up.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .kernel import TimeBase
from .switch import SwitchConfig
from .traffic import FlowSpec

Number = Union[Fraction, int]
Rate = Union[Fraction, int, float]  # float only for math.inf


class Unstable(ArithmeticError):
    """Long-term arrival rate exceeds the service rate: no finite bound."""


@dataclass(frozen=True)
class ArrivalCurve:
    sigma: Fraction = Fraction(0)
    rho: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "sigma", Fraction(self.sigma))
        object.__setattr__(self, "rho", Fraction(self.rho))
        if self.sigma < 0 or self.rho < 0:
            raise ValueError("arrival curve parameters must be non-negative")

    def __call__(self, t) -> Fraction:
        return Fraction(0) if t <= 0 else self.sigma + self.rho * t

    def __add__(self, other: "ArrivalCurve") -> "ArrivalCurve":
        return aggregate(self, other)


@dataclass(frozen=True)
class ServiceCurve:
    rate: Rate
    latency: Fraction = Fraction(0)

    def __post_init__(self):
        if not (isinstance(self.rate, float) and math.isinf(self.rate)):
            object.__setattr__(self, "rate", Fraction(self.rate))
        object.__setattr__(self, "latency", Fraction(self.latency))
        if self.rate <= 0 or self.latency < 0:
            raise ValueError("service curve needs rate > 0 and latency >= 0")

    def __call__(self, t) -> Fraction:
        return self.rate * max(Fraction(0), Fraction(t) - self.latency)


@dataclass(frozen=True)
class DelayBound:
    flow_id: str
    cls: int
    bound: Fraction  # T.U
    bound_ticks: int


def flow_arrival(f: FlowSpec, tb: TimeBase = TimeBase()) -> ArrivalCurve:
    """Leaky-bucket envelope of a periodic flow.

    Release jitter J widens the burst by the work that can shift into a window,
    ``sigma = work * (1 + J/period)``.
    """
    work = Fraction(f.packets_per_release * f.transmission_time, tb.ticks_per_tu)
    period = Fraction(f.period, tb.ticks_per_tu)
    sigma = work * (1 + Fraction(f.jitter, f.period))
    return ArrivalCurve(sigma, work / period)


def aggregate(a1: ArrivalCurve, a2: ArrivalCurve) -> ArrivalCurve:
    return ArrivalCurve(a1.sigma + a2.sigma, a1.rho + a2.rho)


def delay_bound(a: ArrivalCurve, s: ServiceCurve) -> Fraction:
    """Horizontal deviation between an affine arrival and a rate-latency service."""
    if a.rho > s.rate:
        raise Unstable(f"arrival rate {a.rho} exceeds service rate {s.rate}")
    return s.latency + a.sigma / s.rate


def leftover_service(s: ServiceCurve, higher: ArrivalCurve, max_lower_job: Number = 0) -> ServiceCurve:
    """Residual service seen by one class under non-preemptive static priority.

    ``higher`` aggregates all strictly higher classes on the port and
    ``max_lower_job`` is the longest frame of any strictly lower class, which
    may already hold the link when the class becomes backlogged.
    """
    if higher.rho >= s.rate:
        raise Unstable(f"higher-priority rate {higher.rho} saturates service rate {s.rate}")
    if higher.sigma == 0 and higher.rho == 0 and max_lower_job == 0:
        return s
    rate = s.rate - higher.rho
    latency = (s.rate * s.latency + higher.sigma + Fraction(max_lower_job)) / rate
    return ServiceCurve(rate, latency)


def concatenate(s1: ServiceCurve, s2: ServiceCurve) -> ServiceCurve:
    """Min-plus convolution of two rate-latency curves (servers in tandem)."""
    return ServiceCurve(min(s1.rate, s2.rate), s1.latency + s2.latency)


@dataclass(frozen=True)
class FlowBound:
    """Per-flow result of :func:`switch_bounds`.

    Exactly one of ``bound`` and ``unstable`` is set.
    """

    flow_id: str
    cls: int
    port: int
    arrival: ArrivalCurve  # aggregate of the flow's own class on its port
    service: Optional[ServiceCurve]  # leftover service for that class
    bound: Optional[DelayBound]
    unstable: Optional[str] = None


def switch_bounds(cfg: SwitchConfig, flows: Sequence[FlowSpec], tb: TimeBase = TimeBase()) -> list[FlowBound]:
    """Worst-case delay through the switch for every flow, in declaration order."""
    base = ServiceCurve(1, Fraction(cfg.ingress_service, tb.ticks_per_tu))
    by_port: dict[int, list[FlowSpec]] = defaultdict(list)
    for f in flows:
        by_port[f.egress_port].append(f)

    per_class: dict[tuple[int, int], tuple[ArrivalCurve, Optional[ServiceCurve], Optional[Fraction], Optional[str]]] = {}
    for port, fs in by_port.items():
        for c in sorted({f.cls for f in fs}):
            own = higher = ArrivalCurve()
            lower_job = Fraction(0)
            for f in fs:
                if f.cls > c:
                    higher = higher + flow_arrival(f, tb)
                elif f.cls == c:
                    own = own + flow_arrival(f, tb)
                else:
                    lower_job = max(lower_job, Fraction(f.transmission_time, tb.ticks_per_tu))
            try:
                svc = leftover_service(base, higher, lower_job)
            except Unstable as e:
                per_class[port, c] = (own, None, None, str(e))
                continue
            try:
                per_class[port, c] = (own, svc, delay_bound(own, svc), None)
            except Unstable as e:
                per_class[port, c] = (own, svc, None, str(e))

    out = []
    for f in flows:
        own, svc, bound, err = per_class[f.egress_port, f.cls]
        db = None if bound is None else DelayBound(f.flow_id, f.cls, bound, tb.ceil_ticks(bound))
        out.append(FlowBound(f.flow_id, f.cls, f.egress_port, own, svc, db, err))
    return out
