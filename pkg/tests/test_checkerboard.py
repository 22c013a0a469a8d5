import math

import numpy as np
import pytest

from conftest import model_cfg
from galton_dnp.checkerboard import (
    TunnelingTable,
    assemble_board,
    board_records,
    build_checkerboard,
    large_gap_mask,
    tunneling_table,
    uniform_table,
    verify_symmetries,
)
from galton_dnp.spin_model import SpinSystemConfig


def test_single_nucleus_coordinates():
    board = build_checkerboard(model_cfg(1))
    expected = {(0, 0): (-6, 1), (0, 1): (-4, -1), (1, 0): (4, 1), (1, 1): (6, -1)}
    for (k, l), point in expected.items():
        assert board.coords[k, l] == pytest.approx(point)


def test_first_node_joins_all_up_and_all_down():
    board = build_checkerboard(model_cfg(3))
    assert board.l_states[0] == 0  # m_s=0 all up
    assert board.k_states[0] == 7  # m_s=+1 all down


def test_grid_size_and_center():
    board = build_checkerboard(model_cfg(3, delta=2870.0))
    assert board.size == 8 and board.frequencies.size == 64
    assert board.center == (2870.0, 0.0)


def test_sequential_encounter_order():
    board = build_checkerboard(model_cfg(4, a_perp=[0.1] * 4))
    freq = board.frequencies
    assert np.all(np.diff(freq, axis=0) > 0)
    assert np.all(np.diff(freq, axis=1) > 0)


def test_symmetries_model_boards():
    for n in (1, 2, 3, 4):
        board = build_checkerboard(model_cfg(n, a_perp=[0.05 * (j + 1) for j in range(n)], rabi=0.3))
        report = verify_symmetries(board)
        assert report.ok and report.max_violation < 1e-12


def test_symmetry_gap_pair_single_nucleus():
    board = build_checkerboard(model_cfg(1, a_perp=[0.5], rabi=0.2))
    assert board.gaps[0, 0] == pytest.approx(board.gaps[1, 1])


def test_symmetries_random_positive_couplings():
    rng = np.random.default_rng(7)
    cfg = SpinSystemConfig(3, rng.uniform(0.5, 3, 3), rng.uniform(0.1, 1, 3), b0=200.0, gamma_n=1.0, rabi=0.2)
    assert verify_symmetries(build_checkerboard(cfg)).ok


def test_symmetry_violation_is_reported_not_raised():
    board = assemble_board(1, np.array([-5.0, 4.0]), np.array([1.0, -1.0]), None, center=(0.0, 0.0))
    report = verify_symmetries(board)
    assert not report.ok and report.coord_violation > 0


def test_negative_coupling_moves_rabi_gaps_to_diagonal():
    pos = build_checkerboard(model_cfg(2, alpha=5.0, a_perp=[0.2, 0.3], rabi=1.0))
    neg = build_checkerboard(model_cfg(2, alpha=-5.0, a_perp=[0.2, 0.3], rabi=1.0))
    assert np.array_equal(neg.k_states, pos.k_states[::-1])
    top = pos.gaps == pos.gaps.max()
    assert np.array_equal(top, np.fliplr(np.eye(4, dtype=bool)))
    assert np.array_equal(neg.gaps == neg.gaps.max(), np.eye(4, dtype=bool))


def test_build_is_deterministic():
    cfg = model_cfg(3, a_perp=[0.1, 0.2, 0.3], rabi=0.4)
    a, b = build_checkerboard(cfg), build_checkerboard(cfg)
    assert a.coords.tobytes() == b.coords.tobytes() and a.gaps.tobytes() == b.gaps.tobytes()


def test_tunneling_probabilities():
    board = assemble_board(1, np.array([-5.0, 5.0]), np.array([1.0, -1.0]), np.array([[0.0, 2.0], [2.0, 0.5]]), (0.0, 0.0))
    table = tunneling_table(board, sweep_rate=0.25)
    assert table.eta[0, 0] == 1.0
    assert table.eta[1, 1] == pytest.approx(math.exp(-1.0))
    assert table.eta[1, 1] == pytest.approx(0.36788, abs=1e-5)
    forced = tunneling_table(board, 0.25, conj_diag_adiabatic=True)
    assert forced.eta[0, 1] == 0.0 and forced.eta[1, 0] == 0.0
    with pytest.raises(ValueError, match="rate"):
        tunneling_table(board, 0.0)


def test_table_validation():
    with pytest.raises(ValueError, match="eta"):
        TunnelingTable(np.array([[0.5, 1.5], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="square"):
        TunnelingTable(np.zeros((2, 3)))


def test_uniform_table_placements():
    board = build_checkerboard(model_cfg(2))
    table = uniform_table(board, 0.3)
    assert np.array_equal(table.eta == 0.0, large_gap_mask(board, "conjugate"))
    assert np.all(uniform_table(4, 0.3, large_gap="none").eta == 0.3)
    same = uniform_table(board, 0.3, large_gap="same_state")
    assert np.array_equal(same.eta == 0.0, board.same_state_mask())


def test_board_records_rows():
    assert len(board_records(build_checkerboard(model_cfg(1)))) == 4
    records = board_records(build_checkerboard(model_cfg(3)))
    assert len(records) == 64
    assert set(records[0]) == {"k", "l", "frequency", "energy", "gap", "eta"}
