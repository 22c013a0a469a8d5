import numpy as np
import pytest

from galton_dnp.checkerboard import TunnelingTable
from galton_dnp.spin_model import PowerLawModel, SpinSystemConfig


def model_cfg(n, alpha=5.0, p_exp=1.1, a_perp=None, rabi=0.0, delta=0.0):
    """Power-law board with the electronic offset at zero unless given."""
    return SpinSystemConfig(
        n_nuclei=n,
        a_par=[0.0] * n,
        a_perp=[0.0] * n if a_perp is None else a_perp,
        delta=delta,
        rabi=rabi,
        model=PowerLawModel(alpha, p_exp),
    )


def two_level_table(board, eta_small, eta_large):
    """eta_large on the crossings that keep the nuclear label, eta_small elsewhere."""
    return TunnelingTable(np.where(board.same_state_mask(), eta_large, eta_small))


def random_table(size, rng):
    return TunnelingTable(rng.uniform(0.0, 1.0, (size, size)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
