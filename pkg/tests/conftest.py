import numpy as np
import pytest

from oamfso import SimulationGrid, TurbulenceParams
from oamfso.propagation import sample_ensemble

RX_MODES = tuple(range(-5, 6))
TX_MODES = (1, 3)


@pytest.fixture(scope="session")
def paper_grid():
    return SimulationGrid(512, 5e-3, 1550e-9)


@pytest.fixture(scope="session")
def small_grid():
    return SimulationGrid(256, 5e-3, 1550e-9)


@pytest.fixture(scope="session")
def fine_grid():
    # resolves radial structure of higher-order modes
    return SimulationGrid(256, 0.5e-3, 1550e-9)


@pytest.fixture(scope="session")
def small_ensembles(small_grid):
    """40 paired realizations per regime, for unit-level Monte Carlo checks."""
    return {regime: sample_ensemble(TX_MODES, RX_MODES, TurbulenceParams.preset(regime), 40, 2024,
                                    grid=small_grid)
            for regime in ("weak", "strong")}


def random_bits(rng, *shape):
    return rng.integers(0, 2, shape, dtype=np.uint8)


_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one acceptance line and assert it."""
    def record(name: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        _VERDICTS.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
