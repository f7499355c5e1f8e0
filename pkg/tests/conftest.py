import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from circuitann.circuits import BranchElement, CircuitInstance, circuit_class  # noqa: E402


def random_circuit(cls_id, rng, sources="all"):
    """Random sanitized instance; ``sources`` is 'all', 'one' or a branch index."""
    cls = circuit_class(cls_id)
    branches = []
    for i in range(cls.branch_count):
        r = float(rng.uniform(0.1, 100))
        xl = xc = 0.0
        if cls.category == 2:
            xl, xc = (float(v) for v in rng.uniform(0, 50, 2))
        branches.append(BranchElement(r, xl, xc, 0.0))
    if sources == "all" and cls_id != "2b":
        emfs = rng.uniform(0.1, 20, cls.branch_count)
    else:
        k = 0 if sources in ("all", "one") else sources
        emfs = np.zeros(cls.branch_count)
        emfs[k] = rng.uniform(0.1, 20)
    branches = [BranchElement(b.r, b.xl, b.xc, float(e)) for b, e in zip(branches, emfs)]
    return CircuitInstance(cls, tuple(branches))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
