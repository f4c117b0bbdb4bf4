import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ncswitch.kernel import Engine  # noqa: E402
from ncswitch.model import Packet  # noqa: E402
from ncswitch.switch import Switch, SwitchConfig  # noqa: E402

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "ncswitch" / "scenarios"

# filled by test_acceptance: criterion number -> (passed, detail)
ACCEPTANCE: dict = {}


def packet(pid, cls=3, port=0, created=0, tx=2000, ingress=0):
    return Packet(pid, f"f{pid}", cls, ingress, port, created, tx)


class Rig:
    """A bare switch on its own engine, recording deliveries and drops."""

    def __init__(self, **cfg):
        self.engine = Engine()
        self.delivered = []
        self.drops = []
        self.switch = Switch(self.engine, SwitchConfig(**cfg),
                             lambda rec, p: self.delivered.append(rec),
                             lambda p, t: self.drops.append(p))


@pytest.fixture
def rig():
    return Rig


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
