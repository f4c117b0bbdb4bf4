"""Record types shared by the switch, detector, compensator and trace."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class PriorityClass(enum.IntEnum):
    LOW = 1
    MEAN = 2
    HIGH = 3


CLASS_NAMES = {PriorityClass.HIGH: "high", PriorityClass.MEAN: "mean", PriorityClass.LOW: "low"}
_BY_NAME = {v: k for k, v in CLASS_NAMES.items()}


def class_label(level: int, priorities: int = 3) -> str:
    if priorities == 3:
        return CLASS_NAMES[PriorityClass(level)]
    return f"p{level}"


def parse_class(value) -> int:
    """Accept ``"high"``/``"mean"``/``"low"``, ``"p5"`` or a bare level."""
    if isinstance(value, bool):
        raise ValueError(f"bad priority class {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        key = value.strip().lower()
        if key in _BY_NAME:
            return int(_BY_NAME[key])
        if key.startswith("p") and key[1:].isdigit():
            return int(key[1:])
        if key.isdigit():
            return int(key)
    raise ValueError(f"bad priority class {value!r}")


@dataclass(slots=True)
class Packet:
    id: int
    flow_id: str
    cls: int
    ingress_port: int
    egress_port: int
    created_at: int
    transmission: int
    ingress_enqueued_at: int = -1
    output_enqueued_at: int = -1
    delivered_at: Optional[int] = None
    burst: bool = False

    @property
    def delay(self) -> Optional[int]:
        if self.delivered_at is None:
            return None
        return self.delivered_at - self.created_at


@dataclass(frozen=True, slots=True)
class DeliveryRecord:
    packet_id: int
    flow_id: str
    cls: int
    port: int
    created_at: int
    delivered_at: int
    delay: int

    @classmethod
    def of(cls, p: Packet) -> "DeliveryRecord":
        assert p.delivered_at is not None
        return cls(p.id, p.flow_id, p.cls, p.egress_port, p.created_at, p.delivered_at,
                   p.delivered_at - p.created_at)
