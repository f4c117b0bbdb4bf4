import pytest
from hypothesis import given, strategies as st

from ncswitch.kernel import Engine, Event, EventKind, SchedulingInPast, TimeBase

TU = 1000


def recorder(engine, kind=EventKind.SOURCE_RELEASE):
    seen = []
    engine.on(kind, lambda ev: seen.append((ev.fire_at, ev.payload)))
    return seen


def test_schedule_at_now_is_accepted_and_first():
    e = Engine()
    seen = recorder(e)
    e.at(0, EventKind.SOURCE_RELEASE, "a")
    e.at(1, EventKind.SOURCE_RELEASE, "b")
    e.run_until(10)
    assert seen == [(0, "a"), (1, "b")]


def test_same_time_ties_follow_insertion():
    e = Engine()
    seen = recorder(e)
    e.at(7, EventKind.SOURCE_RELEASE, "A")
    e.at(7, EventKind.SOURCE_RELEASE, "B")
    e.run_until(7)
    assert [p for _, p in seen] == ["A", "B"]


def test_schedule_in_past_raises():
    e = Engine()
    e.run_until(5)
    with pytest.raises(SchedulingInPast):
        e.at(3, EventKind.SOURCE_RELEASE)
    with pytest.raises(SchedulingInPast):
        e.schedule(Event(4, 0, EventKind.SOURCE_RELEASE, None))


def test_run_until_empty_advances_clock():
    e = Engine()
    s = e.run_until(10000 * TU)
    assert s.dispatched == 0
    assert e.clock == 10000 * TU


def test_run_until_one_event():
    e = Engine()
    recorder(e)
    e.at(5 * TU, EventKind.SOURCE_RELEASE)
    assert e.run_until(10000 * TU).dispatched == 1


def test_run_until_inclusive_boundary():
    e = Engine()
    recorder(e)
    for t in (2, 4, 4, 9):
        e.at(t * TU, EventKind.SOURCE_RELEASE)
    s = e.run_until(4 * TU)
    assert s.dispatched == 3
    assert e.pending() == 1
    assert e.peek_time() == 9 * TU


def test_seq_strictly_increasing():
    e = Engine()
    ids = [e.at(t, EventKind.SOURCE_RELEASE) for t in (5, 1, 5, 3)]
    assert ids == sorted(ids) and len(set(ids)) == 4


def test_handlers_may_schedule_at_current_time():
    e = Engine()
    seen = []

    def h(ev):
        seen.append(ev.payload)
        if ev.payload < 3:
            e.at(ev.fire_at, EventKind.SOURCE_RELEASE, ev.payload + 1)

    e.on(EventKind.SOURCE_RELEASE, h)
    e.at(2, EventKind.SOURCE_RELEASE, 0)
    e.run_until(2)
    assert seen == [0, 1, 2, 3]


def test_timebase():
    tb = TimeBase(1000)
    assert tb.to_ticks(5) == 5000
    assert tb.to_ticks("2.5") == 2500
    with pytest.raises(ValueError):
        tb.to_ticks("0.0001")
    assert tb.ceil_ticks(__import__("fractions").Fraction(20, 3)) == 6667


@given(st.lists(st.integers(0, 50), max_size=60))
def test_dispatch_is_total_order(times):
    e = Engine()
    out = []
    e.add_observer(lambda ev: out.append((ev.fire_at, ev.seq)))
    e.on(EventKind.SOURCE_RELEASE, lambda ev: None)
    for t in times:
        e.at(t, EventKind.SOURCE_RELEASE)
    e.run_until(50)
    assert len(out) == len(times)
    assert all(a < b for a, b in zip(out, out[1:]))
    # fire times never decrease
    assert [t for t, _ in out] == sorted(times)


@given(st.lists(st.integers(0, 30), max_size=30))
def test_rerun_is_identical(times):
    def go():
        e = Engine()
        out = []
        e.on(EventKind.SOURCE_RELEASE, lambda ev: out.append((ev.fire_at, ev.payload)))
        for i, t in enumerate(times):
            e.at(t, EventKind.SOURCE_RELEASE, i)
        e.run_until(30)
        return out

    assert go() == go()
