import numpy as np
import pytest

from poroslip import (BoundaryFlux, DistributedSource, LevelSet, ObjectiveConfig, TimeGrid,
                      TrackingTargets, paper_params)

PAPER_LEVELS = LevelSet((-7, -5, -3, -1, 0, 2))


def paper_objective(n, delta=0.0, inp="psi", lam=0.0, backend="sweep", mollifier=None, m=None):
    grid = TimeGrid(0.5, n)
    prm = paper_params(delta, m or n)
    kind = BoundaryFlux() if inp == "psi" else DistributedSource.constant(prm)
    kw = {} if mollifier is None else {"mollifier": mollifier}
    return ObjectiveConfig(grid, alpha=5e-5, lam=lam, targets=TrackingTargets.paper(grid, prm),
                           pde=prm, input=kind, backend=backend, **kw)


@pytest.fixture
def levels():
    return PAPER_LEVELS


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_criterion(number, title, ok, detail):
    line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
