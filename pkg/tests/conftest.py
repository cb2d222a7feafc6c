import sys
from pathlib import Path

import pytest

from mwsnsim import ScenarioConfig, World

sys.path.insert(0, str(Path(__file__).parent))


class ConstStream:
    """Stand-in for a RandomStream that always returns the same value."""

    def __init__(self, value=0.0):
        self.value = value

    def random(self):
        return self.value


def static_world(positions, protocol="DECA", **kw):
    kw.setdefault("speed", 0.0)
    cfg = ScenarioConfig(protocol=protocol, nodes=len(positions), **kw)
    return World(cfg, positions=positions, record=True)


def run_election(world):
    world.start_round()
    world.kernel.run(until=world.pcfg.election_window + 0.5)
    return world.heads()


@pytest.fixture
def const_stream():
    return ConstStream


# acceptance verdict lines, echoed at the end of the session even when output is captured
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
