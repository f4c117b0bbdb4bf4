"""Output-queued 802.1p switch model.

Frames pass through a shared-memory ingress FIFO, are demultiplexed to their
egress port, land in one FIFO per (port, priority class) and leave through a
non-preemptive static-priority multiplexer on each output link.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .kernel import Engine, EventKind
from .model import DeliveryRecord, Packet

MAX_PRIORITIES = 8


class InvalidPort(ValueError):
    pass


class Scheduler(enum.Enum):
    STRICT_PRIORITY = "StrictPriority"
    COMPENSATION = "Compensation"


@dataclass(frozen=True)
class SwitchConfig:
    num_ports: int = 2
    priorities: int = 3
    ingress_service: int = 0  # ticks
    output_service: int = 2000  # ticks, default per-packet link time
    shared_capacity: Optional[int] = None
    scheduler: Scheduler = Scheduler.STRICT_PRIORITY

    def check(self) -> list[str]:
        problems = []
        if self.num_ports < 1:
            problems.append("num_ports must be positive")
        if not 1 <= self.priorities <= MAX_PRIORITIES:
            problems.append(f"priorities must be in [1, {MAX_PRIORITIES}]")
        if self.output_service <= 0:
            problems.append("output_service must be > 0")
        if self.ingress_service < 0:
            problems.append("ingress_service must be >= 0")
        if self.shared_capacity is not None and self.shared_capacity < 1:
            problems.append("shared_capacity must be positive when set")
        return problems


class Link:
    __slots__ = ("packet", "started_at")

    def __init__(self) -> None:
        self.packet: Optional[Packet] = None
        self.started_at: Optional[int] = None

    @property
    def idle(self) -> bool:
        return self.packet is None


class Switch:
    """Event-driven switch bound to an :class:`Engine`.

    ``on_delivery(record, packet)`` is called for every frame that finishes
    transmission; ``on_drop(packet, t)`` for frames refused by a full shared
    buffer. ``selector`` replaces strict-priority selection when the switch
    runs in compensation mode.
    """

    def __init__(self, engine: Engine, config: SwitchConfig,
                 on_delivery: Optional[Callable[[DeliveryRecord, Packet], None]] = None,
                 on_drop: Optional[Callable[[Packet, int], None]] = None) -> None:
        self.engine = engine
        self.config = config
        self.on_delivery = on_delivery
        self.on_drop = on_drop
        self.selector: Optional[Callable[[int, int], Optional[Packet]]] = None
        self.enqueue_hook: Optional[Callable[[Packet], None]] = None
        # hooks used by the invariant monitor: fn(port, packet, t)
        self.select_hooks: list[Callable[[int, Packet, int], None]] = []
        self.ingress: deque[Packet] = deque()
        self._switching = False
        # queues[port][level] for level in 1..priorities (index 0 unused)
        self.queues = [[deque() for _ in range(config.priorities + 1)] for _ in range(config.num_ports)]
        self.links = [Link() for _ in range(config.num_ports)]
        self.delivered = 0
        self.dropped = 0
        self.queued = 0  # frames in output class queues

        engine.on(EventKind.SWITCHING_DONE, lambda ev: self._switching_done(ev.fire_at))
        engine.on(EventKind.TRANSMISSION_START, lambda ev: self._start(ev.payload, ev.fire_at))
        engine.on(EventKind.TRANSMISSION_END, lambda ev: self._end(ev.payload, ev.fire_at))

    # shared ingress stage

    def ingest(self, p: Packet, t: int) -> bool:
        """Append ``p`` to the shared FIFO. Returns False if it was tail-dropped."""
        if not 0 <= p.ingress_port < self.config.num_ports:
            raise InvalidPort(f"ingress port {p.ingress_port} out of range")
        cap = self.config.shared_capacity
        if cap is not None and len(self.ingress) >= cap:
            self.dropped += 1
            if self.on_drop:
                self.on_drop(p, t)
            return False
        p.ingress_enqueued_at = t
        self.ingress.append(p)
        if not self._switching:
            self._switching = True
            self.engine.at(t + self.config.ingress_service, EventKind.SWITCHING_DONE)
        return True

    def _switching_done(self, t: int) -> None:
        p = self.ingress.popleft()
        port, _ = self.route(p, t)
        if self.ingress:
            self.engine.at(t + self.config.ingress_service, EventKind.SWITCHING_DONE)
        else:
            self._switching = False
        self.kick(port, t)

    def route(self, p: Packet, t: Optional[int] = None) -> tuple[int, int]:
        """Demultiplex ``p`` into its (egress port, class) queue."""
        if not 0 <= p.egress_port < self.config.num_ports:
            raise InvalidPort(f"egress port {p.egress_port} out of range")
        p.output_enqueued_at = self.engine.clock if t is None else t
        self.queues[p.egress_port][p.cls].append(p)
        self.queued += 1
        if self.enqueue_hook:
            self.enqueue_hook(p)
        return p.egress_port, p.cls

    # output multiplexer

    def select_next(self, port: int, t: int) -> Optional[Packet]:
        """Pop the head of the highest non-empty class queue of ``port``."""
        qs = self.queues[port]
        for level in range(self.config.priorities, 0, -1):
            if qs[level]:
                self.queued -= 1
                return qs[level].popleft()
        return None

    def kick(self, port: int, t: int) -> None:
        """Start a transmission on ``port`` if its link is idle and work is available."""
        link = self.links[port]
        if not link.idle:
            return
        select = self.selector or self.select_next
        p = select(port, t)
        if p is None:
            return
        for hook in self.select_hooks:
            hook(port, p, t)
        link.packet = p
        self.engine.at(t, EventKind.TRANSMISSION_START, port)

    def _start(self, port: int, t: int) -> None:
        link = self.links[port]
        link.started_at = t
        self.engine.at(t + link.packet.transmission, EventKind.TRANSMISSION_END, port)

    def _end(self, port: int, t: int) -> None:
        self.complete_transmission(self.links[port].packet, t)

    def complete_transmission(self, p: Packet, t: int) -> DeliveryRecord:
        link = self.links[p.egress_port]
        assert link.packet is p
        assert t > p.created_at, "zero end-to-end delay is impossible with a positive link time"
        p.delivered_at = t
        rec = DeliveryRecord.of(p)
        link.packet = None
        link.started_at = None
        self.delivered += 1
        if self.on_delivery:
            self.on_delivery(rec, p)
        self.kick(p.egress_port, t)
        return rec

    # occupancy

    def in_flight(self) -> int:
        return sum(1 for link in self.links if not link.idle)

    def queue_lengths(self, port: int) -> list[int]:
        return [len(q) for q in self.queues[port]]
