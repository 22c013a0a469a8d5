import math

import numpy as np
import pytest

from conftest import model_cfg, random_table, two_level_table
from galton_dnp.checkerboard import TunnelingTable, build_checkerboard, uniform_table
from galton_dnp.oracle import brute_force_traversal, enumerate_paths, max_deviation
from galton_dnp.traversal import (
    HIGH_TO_LOW,
    LOW_TO_HIGH,
    SweepSpec,
    laser_reset,
    mixed_state,
    polarization,
    propagate,
    traversal_probability,
)


def test_enumerate_counts():
    table = uniform_table(4, 0.3, large_gap="none")
    assert len(enumerate_paths(table, (0, 0), (2, 1))) == 3
    single = enumerate_paths(table, (0, 0), (0, 0))
    assert len(single) == 1 and single.total == 1.0


def test_enumerate_sum_matches_traversal():
    table = TunnelingTable(np.random.default_rng(2).uniform(size=(4, 4)))
    assert enumerate_paths(table, (0, 0), (1, 1)).total == pytest.approx(traversal_probability(table, (0, 0), (1, 1)))
    assert enumerate_paths(table, (1, 0), (4, 2)).total == pytest.approx(traversal_probability(table, (1, 0), (4, 2)))


def test_enumerate_rejects_bad_targets():
    table = uniform_table(4, 0.3)
    with pytest.raises(ValueError):
        enumerate_paths(table, (2, 2), (1, 1))
    with pytest.raises(ValueError):
        enumerate_paths(table, (0, 0), (4, 4))


def test_identity_table():
    board = build_checkerboard(model_cfg(2))
    initial = mixed_state(board)
    out = brute_force_traversal(board, TunnelingTable(np.ones((4, 4))), initial)
    assert np.allclose(out.m0, initial.m0) and np.allclose(out.m1, 0)


def test_single_nucleus_closed_form():
    board = build_checkerboard(model_cfg(1))
    a, b = 0.35, 0.2
    out = laser_reset(brute_force_traversal(board, two_level_table(board, a, b), mixed_state(board, total=2.0)))
    assert polarization(out) == pytest.approx((1 - b) * (1 - (2 * a - 1) ** 2))


@pytest.mark.parametrize("direction", [LOW_TO_HIGH, HIGH_TO_LOW])
def test_random_tables_match_engine(direction, rng):
    board = build_checkerboard(model_cfg(3))
    initial = mixed_state(board)
    for _ in range(3):
        table = random_table(8, rng)
        sweep = SweepSpec(direction=direction)
        assert max_deviation(propagate(board, table, sweep, initial), brute_force_traversal(board, table, initial, sweep)) < 1e-10


@pytest.mark.parametrize("rule", ["frequency", "column"])
def test_windowed_sweeps_match_engine(rule, rng):
    board = build_checkerboard(model_cfg(2))
    initial = mixed_state(board)
    table = random_table(4, rng)
    for f0 in (-12.0, -3.0, 0.0, 7.5):
        sweep = SweepSpec(f0=f0, bandwidth=9.0, window_rule=rule)
        assert max_deviation(propagate(board, table, sweep, initial), brute_force_traversal(board, table, initial, sweep)) < 1e-10


def test_size_guard():
    board = build_checkerboard(model_cfg(5))
    with pytest.raises(ValueError, match="n_nuclei"):
        brute_force_traversal(board, uniform_table(board, 0.5), mixed_state(board))
