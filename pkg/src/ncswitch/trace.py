"""Run traces: delivery, fault and compensation records, summaries, CSV and SVG export."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from .fdi import FaultEvent, FaultKind
from .ftc import Action, ClassDelayStatus, CompensationDecision, Status
from .model import DeliveryRecord, class_label, parse_class

DELIVERY_COLUMNS = ["packet_id", "flow_id", "class", "port", "created_ticks", "delivered_ticks",
                    "delay_ticks", "delay_tu"]
FAULT_COLUMNS = ["at_ticks", "class", "packet_id", "kind", "measured_ticks", "bound_ticks", "residual_ticks"]
DECISION_COLUMNS = ["at_ticks", "port", "action", "hp_status", "mp_status", "bp_status"]

FILES = {"deliveries": "deliveries.csv", "faults": "faults.csv", "decisions": "decisions.csv"}


class EmptyClass(LookupError):
    pass


Record = Union[DeliveryRecord, FaultEvent, CompensationDecision]


@dataclass
class RunTrace:
    digest: str = ""
    ticks_per_tu: int = 1000
    priorities: int = 3
    horizon: int = 0
    deliveries: list[DeliveryRecord] = field(default_factory=list)
    faults: list[FaultEvent] = field(default_factory=list)
    decisions: list[CompensationDecision] = field(default_factory=list)
    # class -> detection threshold in ticks, when one was in force
    thresholds: dict[int, int] = field(default_factory=dict)

    def of_class(self, cls: int) -> list[DeliveryRecord]:
        return [d for d in self.deliveries if d.cls == cls]


class Recorder:
    """Collects records in occurrence order while a run is in progress."""

    def __init__(self, trace: Optional[RunTrace] = None) -> None:
        self.trace = trace or RunTrace()
        self.closed = False

    def record(self, r: Record) -> None:
        if self.closed:
            raise RuntimeError("trace is finished")
        if isinstance(r, DeliveryRecord):
            self.trace.deliveries.append(r)
        elif isinstance(r, FaultEvent):
            self.trace.faults.append(r)
        elif isinstance(r, CompensationDecision):
            self.trace.decisions.append(r)
        else:
            raise TypeError(f"cannot record {type(r).__name__}")

    def finish(self) -> RunTrace:
        """Freeze the trace, ordering records by (time, packet id) or (time, port)."""
        t = self.trace
        t.deliveries.sort(key=lambda d: (d.delivered_at, d.packet_id))
        t.faults.sort(key=lambda f: (f.at, f.packet_id))
        t.decisions.sort(key=lambda d: (d.at, d.port))
        self.closed = True
        return t


@dataclass(frozen=True)
class ClassSummary:
    cls: int
    count: int
    min_delay: int
    max_delay: int
    mean_delay: Fraction  # ticks
    violations: int

    def describe(self, ticks_per_tu: int, priorities: int = 3) -> str:
        tu = lambda x: format_tu(x, ticks_per_tu)  # noqa: E731
        return (f"{class_label(self.cls, priorities)}: n={self.count} min={tu(self.min_delay)} "
                f"max={tu(self.max_delay)} mean={tu(self.mean_delay)} T.U violations={self.violations}")


def summary(trace: RunTrace, cls: int) -> ClassSummary:
    delays = [d.delay for d in trace.deliveries if d.cls == cls]
    if not delays:
        raise EmptyClass(f"no deliveries for class {cls}")
    violations = sum(1 for f in trace.faults if f.cls == cls and f.kind is FaultKind.DELAY_VIOLATION)
    return ClassSummary(cls, len(delays), min(delays), max(delays), Fraction(sum(delays), len(delays)), violations)


def format_tu(ticks, ticks_per_tu: int, digits: Optional[int] = None) -> str:
    """Render a tick count in T.U; exact whenever the scale is a power of ten."""
    if digits is None:
        digits = len(str(ticks_per_tu)) - 1 if str(ticks_per_tu).strip("0") == "1" else 6
    value = Fraction(ticks) / ticks_per_tu
    scaled = round(value * 10 ** digits)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def export_csv(trace: RunTrace, path) -> dict[str, Path]:
    """Write deliveries.csv, faults.csv and decisions.csv into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    lab = lambda c: class_label(c, trace.priorities)  # noqa: E731
    paths = {k: out / v for k, v in FILES.items()}

    with open(paths["deliveries"], "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(DELIVERY_COLUMNS)
        for d in trace.deliveries:
            w.writerow([d.packet_id, d.flow_id, lab(d.cls), d.port, d.created_at, d.delivered_at, d.delay,
                        format_tu(d.delay, trace.ticks_per_tu)])
    with open(paths["faults"], "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(FAULT_COLUMNS)
        for f in trace.faults:
            w.writerow([f.at, lab(f.cls), f.packet_id, f.kind.value, f.measured, f.bound, f.residual])
    with open(paths["decisions"], "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(DECISION_COLUMNS)
        for c in trace.decisions:
            s = c.status
            w.writerow([c.at, c.port, c.action.value, s.hp.value, s.mp.value, s.bp.value])
    return paths


def read_trace(path, ticks_per_tu: Optional[int] = None) -> RunTrace:
    """Load a trace directory written by :func:`export_csv` (and the CLI)."""
    path = Path(path)
    trace = RunTrace()
    meta = path / "trace.json"
    if meta.exists():
        m = json.loads(meta.read_text())
        trace.digest = m.get("digest", "")
        trace.ticks_per_tu = m.get("ticks_per_tu", trace.ticks_per_tu)
        trace.priorities = m.get("priorities", trace.priorities)
        trace.horizon = m.get("horizon", 0)
        trace.thresholds = {parse_class(k): v for k, v in m.get("thresholds", {}).items()}
    if ticks_per_tu is not None:
        trace.ticks_per_tu = ticks_per_tu

    with open(path / FILES["deliveries"], newline="") as fh:
        for row in csv.DictReader(fh):
            trace.deliveries.append(DeliveryRecord(
                int(row["packet_id"]), row["flow_id"], parse_class(row["class"]), int(row["port"]),
                int(row["created_ticks"]), int(row["delivered_ticks"]), int(row["delay_ticks"])))
    with open(path / FILES["faults"], newline="") as fh:
        for row in csv.DictReader(fh):
            trace.faults.append(FaultEvent(
                int(row["at_ticks"]), parse_class(row["class"]), int(row["packet_id"]),
                int(row["measured_ticks"]), int(row["bound_ticks"]), int(row["residual_ticks"]),
                FaultKind(row["kind"])))
    with open(path / FILES["decisions"], newline="") as fh:
        for row in csv.DictReader(fh):
            status = ClassDelayStatus(Status(row["hp_status"]), Status(row["mp_status"]), Status(row["bp_status"]))
            trace.decisions.append(CompensationDecision(Action(row["action"]), int(row["port"]),
                                                        int(row["at_ticks"]), status))
    return trace


def write_meta(trace: RunTrace, path) -> Path:
    p = Path(path) / "trace.json"
    meta = {
        "digest": trace.digest,
        "ticks_per_tu": trace.ticks_per_tu,
        "priorities": trace.priorities,
        "horizon": trace.horizon,
        "thresholds": {class_label(c, trace.priorities): v for c, v in sorted(trace.thresholds.items())},
    }
    p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return p


def plot(trace: RunTrace, cls: int, path, bound: Optional[int] = None, cap: Optional[int] = None,
         title: Optional[str] = None) -> Path:
    """Delay of each delivered frame of ``cls`` against its delivery index, as SVG.

    ``bound`` (ticks) draws the detection threshold; frames whose delay exceeds
    ``cap`` (ticks) are left off the axes and counted in an annotation.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    recs = trace.of_class(cls)
    if not recs:
        raise EmptyClass(f"no deliveries for class {cls}")
    if bound is None:
        bound = trace.thresholds.get(cls)
    scale = trace.ticks_per_tu
    xs, ys, hidden = [], [], 0
    for i, d in enumerate(recs, start=1):
        if cap is not None and d.delay > cap:
            hidden += 1
            continue
        xs.append(i)
        ys.append(d.delay / scale)

    plt.rcParams["svg.hashsalt"] = "ncswitch"
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(xs, ys, ".", markersize=2, color="tab:blue", label="end-to-end delay")
    if bound is not None:
        ax.axhline(bound / scale, color="tab:red", linewidth=1, label=f"bound {format_tu(bound, scale)} T.U")
    if cap is not None:
        ax.set_ylim(0, cap / scale * 1.05)
    if hidden:
        ax.annotate(f"{hidden} frame(s) above {format_tu(cap, scale)} T.U not shown",
                    xy=(0.99, 0.97), xycoords="axes fraction", ha="right", va="top", fontsize=8)
    ax.set_xlabel(f"{class_label(cls, trace.priorities)} frame index")
    ax.set_ylabel("delay (T.U)")
    ax.set_xlim(0, max(1, len(recs)) * 1.01)
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def running_max(delays: Sequence[int]) -> list[int]:
    out, m = [], -math.inf
    for d in delays:
        m = max(m, d)
        out.append(m)
    return out
