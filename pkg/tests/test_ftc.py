import itertools

import pytest

from conftest import Rig, packet
from ncswitch.fdi import FaultDetector, Mode
from ncswitch.ftc import Action, ClassDelayStatus, Compensator, Status, decide

V, W = Status.VIOLATING, Status.WITHIN
HP, MP, BP = 3, 2, 1


def setup(**cfg):
    r = Rig(**cfg)
    d = FaultDetector((1, 2, 3), {})
    decisions = []
    c = Compensator(r.switch, d, decisions.append)
    return r, d, c, decisions


def fill(sw, *specs):
    out = []
    for pid, cls in specs:
        p = packet(pid, cls=cls)
        sw.route(p, 0)
        out.append(p)
    return out


def test_decide_examples():
    assert decide(ClassDelayStatus(V, V, V)).action is Action.TRANSMIT_HP_HOLD_MPBP
    assert decide(ClassDelayStatus(W, W, V)).action is Action.TRANSMIT_BP_IF_NO_MP
    assert decide(ClassDelayStatus(W, W, W)).action is Action.NO_COMPENSATION
    assert decide(ClassDelayStatus(W, V, W)).action is Action.HOLD_BP_TRANSMIT_HP_THEN_MP


@pytest.mark.parametrize("hp,mp,bp", list(itertools.product((W, V), repeat=3)))
def test_decide_is_deterministic(hp, mp, bp):
    s = ClassDelayStatus(hp, mp, bp)
    assert decide(s, 1, 9) == decide(s, 1, 9)
    assert decide(s, 1, 9).port == 1 and decide(s, 1, 9).at == 9


def test_hold_mp_bp_sends_hp():
    r, d, c, _ = setup()
    h1, m1, b1 = fill(r.switch, (1, HP), (2, MP), (3, BP))
    got = c.apply(decide(ClassDelayStatus(V, W, W)), 0)
    assert got is h1
    assert list(c.holding[0]) == [m1, b1]
    assert c.held == 2 and r.switch.queued == 0


def test_hold_mp_bp_idles_without_hp():
    r, d, c, _ = setup()
    fill(r.switch, (2, MP))
    assert c.apply(decide(ClassDelayStatus(V, W, W)), 0) is None


def test_zero_test_passes():
    r, d, c, _ = setup()
    (b1,) = fill(r.switch, (1, BP))
    assert c.apply(decide(ClassDelayStatus(W, W, V)), 0) is b1


def test_zero_test_fails():
    r, d, c, _ = setup()
    m1, b1 = fill(r.switch, (1, MP), (2, BP))
    assert c.apply(decide(ClassDelayStatus(W, W, V)), 0) is m1


def test_hold_bp_sends_hp_then_mp():
    r, d, c, _ = setup()
    m1, b1, h1 = fill(r.switch, (1, MP), (2, BP), (3, HP))
    s = decide(ClassDelayStatus(W, V, W))
    assert c.apply(s, 0) is h1
    assert c.apply(s, 0) is m1
    assert c.apply(s, 0) is None
    assert list(c.holding[0]) == [b1]


def test_held_class_arrivals_go_to_holding():
    r, d, c, _ = setup()
    c.apply(decide(ClassDelayStatus(V, W, W)), 0)
    (m2,) = fill(r.switch, (5, MP))
    assert list(c.holding[0]) == [m2] and not r.switch.queues[0][MP]


def test_no_compensation_releases_in_hold_order():
    r, d, c, decisions = setup()
    fill(r.switch, (1, MP), (2, BP))
    c.apply(decide(ClassDelayStatus(V, W, W)), 0)
    fill(r.switch, (3, BP), (4, MP))
    assert [p.id for p in c.holding[0]] == [1, 2, 3, 4]
    got = c.apply(decide(ClassDelayStatus()), 5)
    assert got.id == 1
    assert [p.id for p in r.switch.queues[0][MP]] == [4]
    assert [p.id for p in r.switch.queues[0][BP]] == [2, 3]
    assert c.held == 0
    assert [x.action for x in decisions] == [Action.TRANSMIT_HP_HOLD_MPBP, Action.NO_COMPENSATION]


def test_revert_drains_holding():
    r, d, c, _ = setup()
    m1, b1 = fill(r.switch, (1, MP), (2, BP))
    c.apply(decide(ClassDelayStatus(V, W, W)), 0)
    c.revert(0)
    assert r.switch.queues[0][MP][-1] is m1 and r.switch.queues[0][BP][-1] is b1
    assert not c.in_compensation(0) and not c.holding[0]


def test_revert_ignored_while_hp_faulty():
    r, d, c, _ = setup()
    fill(r.switch, (1, MP))
    c.apply(decide(ClassDelayStatus(V, W, W)), 0)
    d.class_state(HP).mode = Mode.FAULTY
    c.revert(0)
    assert c.in_compensation(0) and len(c.holding[0]) == 1


def test_revert_with_empty_holding():
    r, d, c, _ = setup()
    c.apply(decide(ClassDelayStatus(W, W, V)), 0)
    assert c.in_compensation(0)
    c.revert(0)
    assert not c.in_compensation(0)


def test_compensator_needs_three_classes():
    r = Rig(priorities=2)
    with pytest.raises(ValueError):
        Compensator(r.switch, FaultDetector((1, 2), {}))
