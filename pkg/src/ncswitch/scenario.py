"""Scenario files: one JSON document describing switch, flows, bursts and detection setup.

Times are given in T.U, either as integers or as exact decimal strings such as
``"2.5 tu"``; they are converted to ticks with ``tick_scale``. Keys starting
with ``_`` are comments and are ignored.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .kernel import DEFAULT_TICKS_PER_TU, TimeBase
from .model import class_label, parse_class
from .switch import Scheduler, SwitchConfig
from .traffic import BurstSpec, FlowSpec, resolve_target


class ScenarioError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Scenario:
    switch: SwitchConfig
    flows: list[FlowSpec]
    bursts: list[BurstSpec] = field(default_factory=list)
    horizon: int = 10_000 * DEFAULT_TICKS_PER_TU
    # class -> override bound in T.U; classes absent here use the computed bound
    bounds: dict[int, Fraction] = field(default_factory=dict)
    fdi_enabled: bool = False
    fdi_k: int = 1
    ftc_enabled: bool = False
    seed: int = 0
    tick_scale: int = DEFAULT_TICKS_PER_TU
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def timebase(self) -> TimeBase:
        return TimeBase(self.tick_scale)

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()

    def label(self, cls: int) -> str:
        return class_label(cls, self.switch.priorities)


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


_TOP = {"switch", "flows", "bursts", "horizon", "bounds", "fdi", "ftc", "seed", "tick_scale", "name"}
_SWITCH = {"num_ports", "priorities", "ingress_service", "output_service", "shared_capacity", "scheduler"}
_FLOW = {"flow_id", "period", "phase", "class", "ingress_port", "egress_port", "transmission_time",
         "packets_per_release", "jitter"}
_BURST = {"target", "extra_per_period", "window"}


def parse_tu(value) -> Fraction:
    """``80``, ``"2.5 tu"``, ``"20/3 tu"`` or ``"20/3"`` -> exact T.U."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"time {value!r} must be an integer or a string like '2.5 tu'")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text.endswith("tu"):
            text = text[:-2].strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            pass
    raise ValueError(f"bad time value {value!r}")


class _Parser:
    def __init__(self) -> None:
        self.diags: list[str] = []

    def err(self, where: str, msg: str) -> None:
        self.diags.append(f"{where}: {msg}")

    def keys(self, obj: Any, allowed: set, where: str) -> bool:
        if not isinstance(obj, dict):
            self.err(where, "expected an object")
            return False
        for k in obj:
            if not k.startswith("_") and k not in allowed:
                self.err(f"{where}.{k}" if where else k, "unknown field")
        return True

    def integer(self, obj: dict, key: str, where: str, default=None, minimum=None):
        name = f"{where}.{key}" if where else key
        v = obj.get(key, default)
        if v is None:
            if default is None and key in obj:
                return None
            if default is None:
                self.err(name, "required")
            return default
        if isinstance(v, bool) or not isinstance(v, int):
            self.err(name, f"expected an integer, got {v!r}")
            return default
        if minimum is not None and v < minimum:
            self.err(name, f"must be >= {minimum}")
        return v

    def ticks(self, obj: dict, key: str, where: str, tb: TimeBase, default=None) -> Optional[int]:
        if key not in obj:
            if default is None:
                self.err(f"{where}.{key}" if where else key, "required")
            return default
        try:
            return tb.to_ticks(parse_tu(obj[key]))
        except ValueError as e:
            self.err(f"{where}.{key}" if where else key, str(e))
            return default


def parse(doc: dict) -> tuple[Optional[Scenario], list[str]]:
    """Build a :class:`Scenario` from a decoded JSON document; returns (scenario, diagnostics)."""
    P = _Parser()
    if not P.keys(doc, _TOP, ""):
        return None, P.diags

    scale = P.integer(doc, "tick_scale", "", DEFAULT_TICKS_PER_TU, minimum=1)
    if not isinstance(scale, int) or scale < 1:
        scale = DEFAULT_TICKS_PER_TU
    tb = TimeBase(scale)
    horizon = P.ticks(doc, "horizon", "", tb)
    if horizon is not None and horizon <= 0:
        P.err("horizon", "must be > 0")
    seed = P.integer(doc, "seed", "", 0, minimum=0)

    fdi = doc.get("fdi", {})
    ftc = doc.get("ftc", {})
    fdi_enabled = ftc_enabled = False
    k = 1
    if P.keys(fdi, {"enabled", "k"}, "fdi"):
        fdi_enabled = bool(fdi.get("enabled", False))
        k = P.integer(fdi, "k", "fdi", 1, minimum=1)
    if P.keys(ftc, {"enabled"}, "ftc"):
        ftc_enabled = bool(ftc.get("enabled", False))

    sw = doc.get("switch")
    cfg = SwitchConfig()
    if sw is None:
        P.err("switch", "required")
    elif P.keys(sw, _SWITCH, "switch"):
        sched = sw.get("scheduler")
        expected = Scheduler.COMPENSATION if ftc_enabled else Scheduler.STRICT_PRIORITY
        if sched is not None:
            try:
                if Scheduler(sched) is not expected:
                    P.err("switch.scheduler", f"{sched} is inconsistent with ftc.enabled={ftc_enabled}")
            except ValueError:
                P.err("switch.scheduler", f"unknown scheduler {sched!r}")
        cap = sw.get("shared_capacity")
        if cap is not None and (isinstance(cap, bool) or not isinstance(cap, int)):
            P.err("switch.shared_capacity", "expected an integer or null")
            cap = None
        cfg = SwitchConfig(
            num_ports=P.integer(sw, "num_ports", "switch", 2),
            priorities=P.integer(sw, "priorities", "switch", 3),
            ingress_service=P.ticks(sw, "ingress_service", "switch", tb, default=0),
            output_service=P.ticks(sw, "output_service", "switch", tb, default=2 * scale),
            shared_capacity=cap,
            scheduler=expected,
        )
        for msg in cfg.check():
            P.err("switch", msg)

    flows: list[FlowSpec] = []
    raw_flows = doc.get("flows")
    if not isinstance(raw_flows, list):
        P.err("flows", "expected a list of flows")
        raw_flows = []
    seen: set[str] = set()
    for i, fd in enumerate(raw_flows):
        where = f"flows[{i}]"
        if not P.keys(fd, _FLOW, where):
            continue
        fid = fd.get("flow_id")
        if not isinstance(fid, str) or not fid:
            P.err(f"{where}.flow_id", "required non-empty string")
            fid = f"#{i}"
        elif fid in seen:
            P.err(f"{where}.flow_id", f"duplicate flow_id {fid!r}")
        seen.add(fid)
        try:
            cls = parse_class(fd.get("class"))
        except ValueError as e:
            P.err(f"{where}.class", str(e))
            cls = 1
        f = FlowSpec(
            flow_id=fid,
            period=P.ticks(fd, "period", where, tb, default=0),
            cls=cls,
            ingress_port=P.integer(fd, "ingress_port", where, 0),
            egress_port=P.integer(fd, "egress_port", where, 0),
            transmission_time=P.ticks(fd, "transmission_time", where, tb, default=cfg.output_service),
            phase=P.ticks(fd, "phase", where, tb, default=0),
            packets_per_release=P.integer(fd, "packets_per_release", where, 1),
            jitter=P.ticks(fd, "jitter", where, tb, default=0),
        )
        for msg in f.check():
            P.err(where, msg)
        for name, port in (("ingress_port", f.ingress_port), ("egress_port", f.egress_port)):
            if not 0 <= port < cfg.num_ports:
                P.err(f"{where}.{name}", f"port {port} does not exist (num_ports={cfg.num_ports})")
        if not 1 <= cls <= cfg.priorities:
            P.err(f"{where}.class", f"class level {cls} outside 1..{cfg.priorities}")
        flows.append(f)

    bursts: list[BurstSpec] = []
    raw_bursts = doc.get("bursts", [])
    if not isinstance(raw_bursts, list):
        P.err("bursts", "expected a list")
        raw_bursts = []
    for i, bd in enumerate(raw_bursts):
        where = f"bursts[{i}]"
        if not P.keys(bd, _BURST, where):
            continue
        target = bd.get("target")
        if isinstance(target, dict):
            try:
                target = (int(target["port"]), parse_class(target["class"]))
            except (KeyError, TypeError, ValueError):
                P.err(f"{where}.target", "expected a flow_id or {\"port\": n, \"class\": c}")
                continue
        elif not isinstance(target, str):
            P.err(f"{where}.target", "expected a flow_id or {\"port\": n, \"class\": c}")
            continue
        window = bd.get("window")
        if not (isinstance(window, list) and len(window) == 2):
            P.err(f"{where}.window", "expected [start, end]")
            continue
        try:
            start, end = (tb.to_ticks(parse_tu(w)) for w in window)
        except ValueError as e:
            P.err(f"{where}.window", str(e))
            continue
        extra = P.integer(bd, "extra_per_period", where, 1)
        if isinstance(extra, int) and extra < 1:
            P.err(f"{where}.extra_per_period", "must be >= 1")
        if start < 0:
            P.err(f"{where}.window", "start must be >= 0")
        if start >= end:
            P.err(f"{where}.window", "start must be < end")
        b = BurstSpec(target, extra, start, end)
        if resolve_target(b, flows) is None:
            P.err(f"{where}.target", f"{bd.get('target')!r} matches no flow")
        bursts.append(b)

    bounds: dict[int, Fraction] = {}
    rb = doc.get("bounds", "computed")
    if isinstance(rb, dict):
        for key, val in rb.items():
            if key.startswith("_"):
                continue
            try:
                c = parse_class(key)
            except ValueError as e:
                P.err(f"bounds.{key}", str(e))
                continue
            if val is None or val == "computed":
                continue
            try:
                v = parse_tu(val)
            except ValueError as e:
                P.err(f"bounds.{key}", str(e))
                continue
            if v < 0:
                P.err(f"bounds.{key}", "must be >= 0")
            if not 1 <= c <= cfg.priorities:
                P.err(f"bounds.{key}", f"class level {c} outside 1..{cfg.priorities}")
            bounds[c] = v
    elif rb != "computed":
        P.err("bounds", "expected \"computed\" or an object of per-class overrides")

    if (fdi_enabled or ftc_enabled) and cfg.priorities != 3:
        which = "FTC" if ftc_enabled else "FDI"
        P.err("switch.priorities", f"{which} requires exactly three priority classes, got {cfg.priorities}")
    if ftc_enabled and not fdi_enabled:
        P.err("ftc.enabled", "compensation needs fdi.enabled")

    sc = Scenario(cfg, flows, bursts, horizon if horizon and horizon > 0 else 0, bounds, fdi_enabled,
                  k if isinstance(k, int) else 1, ftc_enabled, seed if isinstance(seed, int) else 0, scale,
                  raw=copy.deepcopy(doc))
    return sc, P.diags


def loads(text: str) -> tuple[Optional[Scenario], list[str]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        return None, [f"line {e.lineno}, column {e.colno}: {e.msg}"]
    return parse(doc)


def load(path) -> Scenario:
    """Read and validate a scenario file; raises :class:`ScenarioError` with all diagnostics."""
    sc, diags = loads(Path(path).read_text())
    if diags:
        raise ScenarioError(diags)
    return sc


def validate(path) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        return [f"{path}: {e.strerror or e}"]
    return loads(text)[1]


def with_overrides(doc: dict, ftc: Optional[bool] = None, horizon=None) -> dict:
    """Copy of a scenario document with CLI flag overrides applied."""
    doc = copy.deepcopy(doc)
    if ftc is not None:
        doc.setdefault("ftc", {})["enabled"] = ftc
        sw = doc.get("switch")
        if isinstance(sw, dict) and "scheduler" in sw:
            sw["scheduler"] = (Scheduler.COMPENSATION if ftc else Scheduler.STRICT_PRIORITY).value
    if horizon is not None:
        doc["horizon"] = horizon
    return doc
