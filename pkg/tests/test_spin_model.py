import math

import numpy as np
import pytest

from conftest import model_cfg
from galton_dnp.spin_model import (
    DegenerateBranchError,
    SpinSystemConfig,
    appendix_gap_estimate,
    build_rotating_hamiltonian,
    effective_frequencies,
    eigenenergy_m0,
    eigenenergy_m1_at_zero,
    exact_gap_scan,
    m0_energies,
    m1_energies_at_zero,
    perturbative_gap,
    sign_table,
    state_label,
)


def physical_cfg(a_par, a_perp, larmor, **kw):
    n = len(a_par)
    # gamma_n * b0 * 1e-2 = larmor with gamma_n = 1
    return SpinSystemConfig(n, a_par, a_perp, b0=100.0 * larmor, gamma_n=1.0, **kw)


def test_model_frequencies_single_nucleus():
    freqs = effective_frequencies(model_cfg(1))
    assert freqs.omega0 == pytest.approx([1.0])
    assert freqs.omega1 == pytest.approx([5.0])


def test_physical_collinear_frequencies():
    freqs = effective_frequencies(physical_cfg([2.0], [0.0], 3.0))
    assert freqs.omega1 == pytest.approx([5.0])
    assert freqs.phi == pytest.approx([0.0])


def test_physical_transverse_frequencies():
    freqs = effective_frequencies(physical_cfg([0.0], [4.0], 3.0))
    assert freqs.omega1 == pytest.approx([5.0])
    assert freqs.phi == pytest.approx([math.atan(4 / 3)])


def test_rejects_zero_nuclei_and_bad_lengths():
    with pytest.raises(ValueError, match="n_nuclei"):
        SpinSystemConfig(0, [], [])
    with pytest.raises(ValueError, match="a_par"):
        SpinSystemConfig(2, [1.0], [0.0, 0.0])


def test_m0_energies_model():
    n1 = effective_frequencies(model_cfg(1))
    assert eigenenergy_m0(n1, 0) == pytest.approx(1.0)
    assert eigenenergy_m0(n1, 1) == pytest.approx(-1.0)
    n2 = effective_frequencies(model_cfg(2))
    assert eigenenergy_m0(n2, 0) == pytest.approx(1 + 2**1.1)
    assert eigenenergy_m0(n2, 0) == pytest.approx(3.1435, abs=1e-4)


def test_m1_energies_model():
    cfg = model_cfg(1)
    freqs = effective_frequencies(cfg)
    assert eigenenergy_m1_at_zero(cfg, freqs, 1) == pytest.approx(-5.0)
    assert eigenenergy_m1_at_zero(cfg, freqs, 0) == pytest.approx(5.0)
    cfg2 = model_cfg(2)
    value = eigenenergy_m1_at_zero(cfg2, effective_frequencies(cfg2), 3)
    assert value == pytest.approx(-(5 + 5 * 2**1.1))
    assert value == pytest.approx(-15.718, abs=1e-3)


def test_all_down_minimises_m1_energy():
    cfg = model_cfg(3)
    e1 = m1_energies_at_zero(cfg, effective_frequencies(cfg))
    assert int(np.argmin(e1)) == 7


def test_m0_energies_sum_to_zero():
    for n in (1, 2, 3, 4):
        assert abs(np.sum(m0_energies(effective_frequencies(model_cfg(n))))) < 1e-12


def test_vector_and_scalar_energies_agree():
    cfg = model_cfg(3, a_perp=[0.1, 0.2, 0.3])
    freqs = effective_frequencies(cfg)
    e0 = m0_energies(freqs)
    e1 = m1_energies_at_zero(cfg, freqs)
    for s in range(8):
        assert e0[s] == pytest.approx(eigenenergy_m0(freqs, s))
        assert e1[s] == pytest.approx(eigenenergy_m1_at_zero(cfg, freqs, s))


def test_state_labels_and_sign_table():
    assert state_label(0, 2) == "↑↑"
    assert state_label(2, 2) == "↓↑"
    assert sign_table(2).tolist() == [[1, 1], [1, -1], [-1, 1], [-1, -1]]


def test_omega1_bounds_larmor_plus_parallel():
    rng = np.random.default_rng(1)
    a_par = rng.uniform(-2, 2, 5)
    a_perp = np.array([0.0, 0.3, 1.0, 0.0, 2.0])
    cfg = physical_cfg(a_par, a_perp, 3.0)
    freqs = effective_frequencies(cfg)
    longitudinal = np.abs(3.0 + a_par)
    assert np.all(freqs.omega1 >= longitudinal - 1e-12)
    assert np.allclose(freqs.omega1 == longitudinal, a_perp == 0)


def test_gap_without_flips_is_rabi():
    cfg = model_cfg(2, a_perp=[0.0, 0.0], rabi=0.3)
    for s in range(4):
        assert perturbative_gap(cfg, s, s) == pytest.approx(0.3)
        assert appendix_gap_estimate(cfg, s, s) == pytest.approx(0.3)


def test_appendix_estimates():
    cfg = physical_cfg([0.0], [0.5], 5.0, rabi=0.1)
    assert appendix_gap_estimate(cfg, 0, 1) == pytest.approx(0.02, rel=1e-2)
    cfg2 = physical_cfg([0.0, 0.0], [0.5, 0.3], 5.0, rabi=0.1)
    theta = np.arctan2([0.5, 0.3], effective_frequencies(cfg2).omega1)
    assert appendix_gap_estimate(cfg2, 0, 3) == pytest.approx(4 * 0.1 * np.sin(theta[0]) * np.sin(theta[1]))


def test_gap_symmetric_in_labels():
    cfg = model_cfg(3, a_perp=[0.2, 0.4, 0.7], rabi=0.5)
    for a in range(8):
        for b in range(8):
            assert perturbative_gap(cfg, a, b) == pytest.approx(perturbative_gap(cfg, b, a))


def test_gap_hierarchy_decreases_with_flip_count():
    cfg = physical_cfg([1.0, 1.0, 1.0], [0.4, 0.4, 0.4], 3.0, rabi=0.2)
    gaps = [perturbative_gap(cfg, 0, s) for s in (0, 1, 3, 7)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_hamiltonian_diagonal_without_couplings():
    cfg = model_cfg(2)
    freqs = effective_frequencies(cfg)
    ham = build_rotating_hamiltonian(cfg, omega_mw=1.5)
    assert np.allclose(ham, np.diag(np.diag(ham)))
    expected = np.concatenate([m0_energies(freqs), m1_energies_at_zero(cfg, freqs) - 1.5])
    assert np.allclose(np.sort(np.linalg.eigvalsh(ham)), np.sort(expected), atol=1e-12)


def test_hamiltonian_structure_single_nucleus():
    cfg = physical_cfg([0.0], [0.5], 5.0, rabi=0.2)
    ham = build_rotating_hamiltonian(cfg, 0.0)
    assert np.allclose(ham, ham.T)
    # drive couples equal nuclear labels; the transverse term flips the nucleus within m_s=+1
    assert ham[0, 2] == pytest.approx(0.1) and ham[1, 3] == pytest.approx(0.1)
    assert ham[2, 3] == pytest.approx(0.5)
    assert ham[0, 1] == 0.0 and ham[0, 3] == 0.0


def test_hamiltonian_size_guard():
    with pytest.raises(ValueError, match="n_nuclei"):
        build_rotating_hamiltonian(model_cfg(9), 0.0)


def test_exact_gap_zero_without_couplings():
    cfg = physical_cfg([1.0], [0.0], 5.0, rabi=0.0)
    assert exact_gap_scan(cfg, 0, 1, 0.5) == pytest.approx(0.0, abs=1e-9)


def test_exact_gap_conjugate_crossing_equals_rabi():
    cfg = physical_cfg([1.0, 0.5], [0.0, 0.0], 5.0, rabi=0.2)
    for s in range(4):
        assert exact_gap_scan(cfg, s, s, 0.5) == pytest.approx(0.2, rel=1e-2)


def test_exact_gap_matches_perturbative_single_nucleus():
    cfg = physical_cfg([0.0], [0.5], 5.0, rabi=0.1)
    for s0 in range(2):
        for s1 in range(2):
            exact = exact_gap_scan(cfg, s0, s1, 0.2)
            assert exact == pytest.approx(perturbative_gap(cfg, s0, s1), rel=0.05)


def test_exact_gap_reports_overlapping_branches():
    # two nuclei with equal frequencies: crossings coincide and branches mix
    cfg = physical_cfg([1.0, 1.0], [0.5, 0.5], 3.0, rabi=0.5)
    with pytest.raises(DegenerateBranchError):
        exact_gap_scan(cfg, 1, 2, 0.5)
