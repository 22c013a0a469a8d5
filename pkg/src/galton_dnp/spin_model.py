"""Central-spin parameters, nuclear frequencies, level energies and gaps.

All frequencies and energies are in MHz with hbar = 1. Nuclear operators use
the Pauli normalisation, so a nucleus with frequency w contributes +/-w to a
level energy. Nuclear state labels are N-bit integers; bit h_j of nucleus j
(j = 0 is the most significant bit) is 0 for spin up and 1 for spin down.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

MAX_DENSE_NUCLEI = 8

# kHz/G * mT -> MHz
_GAMMA_N_TO_MHZ_PER_MT = 1e-2


class DegenerateBranchError(RuntimeError):
    """Raised when the two adiabatic branches of a crossing cannot be told apart."""


@dataclass(frozen=True)
class PowerLawModel:
    """Non-degenerate frequency model: w0_j = j**p_exp, w1_j = alpha * j**p_exp."""

    alpha: float
    p_exp: float


@dataclass(frozen=True)
class SpinSystemConfig:
    n_nuclei: int
    a_par: Sequence[float]
    a_perp: Sequence[float]
    b0: float = 0.0
    gamma_n: float = 1.07
    gamma_e_b0: float = 0.0
    delta: float = 2870.0
    rabi: float = 0.0
    model: Optional[PowerLawModel] = None

    def __post_init__(self):
        if int(self.n_nuclei) != self.n_nuclei or self.n_nuclei < 1:
            raise ValueError(f"n_nuclei: must be a positive integer, got {self.n_nuclei!r}")
        object.__setattr__(self, "n_nuclei", int(self.n_nuclei))
        for name in ("a_par", "a_perp"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != self.n_nuclei:
                raise ValueError(
                    f"{name}: expected {self.n_nuclei} values (n_nuclei), got {len(values)}"
                )
            object.__setattr__(self, name, values)
        if any(v < 0 for v in self.a_perp):
            raise ValueError("a_perp: transverse couplings must be non-negative")
        if self.rabi < 0:
            raise ValueError(f"rabi: must be non-negative, got {self.rabi}")
        if self.gamma_e_b0 and self.delta == 0:
            raise ValueError("delta: must be non-zero when gamma_e_b0 is set")
        if isinstance(self.model, dict):
            object.__setattr__(self, "model", PowerLawModel(**self.model))

    @property
    def larmor(self) -> float:
        """Bare nuclear Larmor frequency gamma_n * B0 in MHz."""
        return self.gamma_n * self.b0 * _GAMMA_N_TO_MHZ_PER_MT

    @property
    def offset(self) -> float:
        """Electronic offset Delta + gamma_e B0 (the board centre frequency)."""
        return self.delta + self.gamma_e_b0

    @property
    def dim(self) -> int:
        return 2**self.n_nuclei


@dataclass(frozen=True)
class ManifoldFrequencies:
    """Per-nucleus frequencies in the two electronic manifolds.

    ``omega1`` is the magnitude of the m_s=+1 frequency and ``phi`` the angle
    of the m_s=+1 quantisation axis from +z, in [0, pi].  For phi > pi/2 the
    level that is mostly spin-up lies below the spin-down one, which is what
    :attr:`omega1_signed` encodes.
    """

    omega0: np.ndarray
    omega1: np.ndarray
    phi: np.ndarray = field(default=None)

    @property
    def n_nuclei(self) -> int:
        return len(self.omega0)

    @property
    def omega1_signed(self) -> np.ndarray:
        return np.where(np.cos(self.phi) < 0, -self.omega1, self.omega1)

    @property
    def tilt(self) -> np.ndarray:
        """Angle between the m_s=+1 quantisation axis and the nearer of +/-z."""
        return np.minimum(self.phi, np.pi - self.phi)


def effective_frequencies(cfg: SpinSystemConfig) -> ManifoldFrequencies:
    """Nuclear frequencies w0, w1 and m_s=+1 axis angle phi for every nucleus.

    With ``cfg.model`` set, w0 and |w1| come from the power law and phi is
    fixed by the transverse coupling, sin(phi) = a_perp / |w1|, with the sign
    of alpha selecting phi < pi/2 or phi > pi/2.  Otherwise the m_s=0 frequency
    carries the second-order hyperfine shift gamma_e B0 A_perp / Delta.
    """
    n = cfg.n_nuclei
    a_perp = np.asarray(cfg.a_perp, dtype=float)
    if cfg.model is not None:
        j = np.arange(1, n + 1, dtype=float)
        omega0 = j**cfg.model.p_exp
        omega1 = abs(cfg.model.alpha) * j**cfg.model.p_exp
        if np.any(a_perp > omega1):
            raise ValueError("a_perp: exceeds |omega1| of the power-law model")
        phi = np.arcsin(a_perp / omega1)
        if cfg.model.alpha < 0:
            phi = np.pi - phi
    else:
        a_par = np.asarray(cfg.a_par, dtype=float)
        longitudinal = cfg.larmor + a_par
        shift = cfg.gamma_e_b0 * a_perp / cfg.delta if cfg.gamma_e_b0 else 0.0 * a_perp
        omega0 = cfg.larmor + shift
        omega1 = np.hypot(longitudinal, a_perp)
        # in [0, pi]; pi only for a collinear field pointing along -z
        phi = np.arctan2(a_perp, longitudinal)
    if np.any(omega1 < 0):
        raise ValueError("omega1: negative m_s=+1 frequency")
    return ManifoldFrequencies(np.asarray(omega0, float), np.asarray(omega1, float), np.asarray(phi, float))


def state_bits(state: int, n_nuclei: int) -> np.ndarray:
    if not 0 <= state < 2**n_nuclei:
        raise IndexError(f"state {state} out of range for {n_nuclei} nuclei")
    return np.array([(state >> (n_nuclei - 1 - j)) & 1 for j in range(n_nuclei)], dtype=np.int64)


def state_label(state: int, n_nuclei: int) -> str:
    return "".join("↓" if h else "↑" for h in state_bits(state, n_nuclei))


def sign_table(n_nuclei: int) -> np.ndarray:
    """(2**N, N) array of (-1)**h_j for every state."""
    states = np.arange(2**n_nuclei)[:, None]
    shifts = np.arange(n_nuclei - 1, -1, -1)[None, :]
    return 1 - 2 * ((states >> shifts) & 1)


def m0_energies(freqs: ManifoldFrequencies) -> np.ndarray:
    return sign_table(freqs.n_nuclei) @ freqs.omega0


def m1_energies_at_zero(cfg: SpinSystemConfig, freqs: ManifoldFrequencies) -> np.ndarray:
    return cfg.offset + sign_table(freqs.n_nuclei) @ freqs.omega1_signed


def eigenenergy_m0(freqs: ManifoldFrequencies, state: int) -> float:
    return float(np.dot(1 - 2 * state_bits(state, freqs.n_nuclei), freqs.omega0))


def eigenenergy_m1_at_zero(cfg: SpinSystemConfig, freqs: ManifoldFrequencies, state: int) -> float:
    """m_s=+1 level energy at zero drive frequency; subtract omega_mw for other drives."""
    signs = 1 - 2 * state_bits(state, freqs.n_nuclei)
    return float(cfg.offset + np.dot(signs, freqs.omega1_signed))


def flipped_nuclei(state_m0: int, state_m1: int, n_nuclei: int) -> np.ndarray:
    return np.flatnonzero(state_bits(state_m0, n_nuclei) != state_bits(state_m1, n_nuclei))


def perturbative_gap(
    cfg: SpinSystemConfig,
    state_m0: int,
    state_m1: int,
    freqs: Optional[ManifoldFrequencies] = None,
) -> float:
    """First-order (in the Rabi frequency) splitting of the |0,S0> / |+1,S1> crossing.

    The m_s=+1 nuclear eigenstates are product states tilted by ``freqs.tilt``
    away from z, so the drive couples the two levels through their overlap:

        eps = rabi * prod_{j flipped} sin(tilt_j / 2) * prod_{j kept} cos(tilt_j / 2)

    A pure electron flip (no nuclear flips, no tilt) gives eps = rabi.
    """
    if freqs is None:
        freqs = effective_frequencies(cfg)
    n = cfg.n_nuclei
    flips = np.zeros(n, dtype=bool)
    flips[flipped_nuclei(state_m0, state_m1, n)] = True
    half = 0.5 * freqs.tilt
    factors = np.where(flips, np.sin(half), np.cos(half))
    return float(cfg.rabi * np.prod(factors))


def appendix_gap_estimate(
    cfg: SpinSystemConfig,
    state_m0: int,
    state_m1: int,
    freqs: Optional[ManifoldFrequencies] = None,
) -> float:
    """Gap hierarchy rabi * prod_{j flipped} 2 sin(theta_j), tan(theta_j) = a_perp_j / w1_j.

    Reproduces the published one- and two-flip estimates (2 rabi A/w and
    4 rabi sin sin) and rabi for a bare electron flip.  These prefactors are not
    those of :func:`build_rotating_hamiltonian`; use :func:`perturbative_gap`
    when agreement with exact diagonalisation matters.
    """
    if freqs is None:
        freqs = effective_frequencies(cfg)
    theta = np.arctan2(np.asarray(cfg.a_perp, float), freqs.omega1)
    flips = flipped_nuclei(state_m0, state_m1, cfg.n_nuclei)
    return float(cfg.rabi * np.prod(2.0 * np.sin(theta[flips])))


def gap_table(cfg: SpinSystemConfig, freqs: ManifoldFrequencies, states_m1, states_m0) -> np.ndarray:
    """Vectorised :func:`perturbative_gap` over all (m_s=+1, m_s=0) label pairs."""
    n = cfg.n_nuclei
    signs = sign_table(n)
    s1 = signs[np.asarray(states_m1)]
    s0 = signs[np.asarray(states_m0)]
    flips = s1[:, None, :] != s0[None, :, :]
    half = 0.5 * freqs.tilt
    factors = np.where(flips, np.sin(half), np.cos(half))
    return cfg.rabi * np.prod(factors, axis=-1)


_SZ = np.diag([1.0, -1.0])
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def _nuclear_operator(single: np.ndarray, j: int, n: int) -> np.ndarray:
    out = np.ones((1, 1))
    for i in range(n):
        out = np.kron(out, single if i == j else np.eye(2))
    return out


def build_rotating_hamiltonian(cfg: SpinSystemConfig, omega_mw: float) -> np.ndarray:
    """Dense rotating-frame Hamiltonian on {m_s=0, +1} x nuclear space.

    Basis index is ``m * 2**N + state`` with m = 0 for m_s=0 and 1 for m_s=+1.
    The drive couples |0,S> and |+1,S> with matrix element rabi/2, so a bare
    electron flip opens a splitting equal to the Rabi frequency.  The m_s=+1
    block carries w1_j (cos(phi_j) sz_j + sin(phi_j) sx_j), i.e. the transverse
    hyperfine term sits off the diagonal.
    """
    n = cfg.n_nuclei
    if n > MAX_DENSE_NUCLEI:
        raise ValueError(f"n_nuclei: dense Hamiltonian limited to {MAX_DENSE_NUCLEI} nuclei, got {n}")
    freqs = effective_frequencies(cfg)
    d = 2**n
    h0 = np.diag(m0_energies(freqs))
    h1 = (cfg.offset - omega_mw) * np.eye(d)
    for j in range(n):
        w, phi = freqs.omega1[j], freqs.phi[j]
        single = w * (np.cos(phi) * _SZ + np.sin(phi) * _SX)
        h1 = h1 + _nuclear_operator(single, j, n)
    ham = np.zeros((2 * d, 2 * d))
    ham[:d, :d] = h0
    ham[d:, d:] = h1
    coupling = 0.5 * cfg.rabi * np.eye(d)
    ham[:d, d:] = coupling
    ham[d:, :d] = coupling
    return ham


def _m1_label_state(freqs: ManifoldFrequencies, state: int) -> np.ndarray:
    """m_s=+1 nuclear eigenvector continuously connected to the z-basis label."""
    n = freqs.n_nuclei
    vec = np.ones(1)
    for h, half, phi in zip(state_bits(state, n), 0.5 * freqs.tilt, freqs.phi):
        c, s = np.cos(half), np.sin(half)
        # axis near -z: the admixed component changes sign
        if phi > np.pi / 2:
            s = -s
        single = np.array([c, s]) if h == 0 else np.array([-s, c])
        vec = np.kron(vec, single)
    return vec


def crossing_frequency(cfg: SpinSystemConfig, state_m0: int, state_m1: int) -> float:
    freqs = effective_frequencies(cfg)
    return eigenenergy_m1_at_zero(cfg, freqs, state_m1) - eigenenergy_m0(freqs, state_m0)


def exact_gap_scan(
    cfg: SpinSystemConfig,
    state_m0: int,
    state_m1: int,
    scan_halfwidth: float,
    n_samples: int = 201,
) -> float:
    """Minimum splitting of the two adiabatic branches around a predicted crossing.

    The branches are identified at every drive frequency as the two eigenvectors
    with the largest weight on span{|0,S0>, |+1,S1~>}, where S1~ is the tilted
    m_s=+1 eigenstate carrying label S1.  The sampled minimum is refined with a
    bounded Brent search between its neighbouring samples.
    """
    if scan_halfwidth <= 0:
        raise ValueError("scan_halfwidth must be positive")
    freqs = effective_frequencies(cfg)
    n = cfg.n_nuclei
    d = 2**n
    ref_a = np.zeros(2 * d)
    ref_a[state_m0] = 1.0
    ref_b = np.zeros(2 * d)
    ref_b[d:] = _m1_label_state(freqs, state_m1)
    centre = crossing_frequency(cfg, state_m0, state_m1)

    def separation(omega: float) -> float:
        energies, vectors = np.linalg.eigh(build_rotating_hamiltonian(cfg, omega))
        weight = (ref_a @ vectors) ** 2 + (ref_b @ vectors) ** 2
        top = np.argsort(weight)[-2:]
        if weight[top[0]] < 0.5:
            raise DegenerateBranchError(
                f"branches of crossing ({state_m0}, {state_m1}) mix with other levels near "
                f"omega_mw={omega:.6g}; weight {weight[top[0]]:.3f}"
            )
        return float(abs(energies[top[1]] - energies[top[0]]))

    grid = np.linspace(centre - scan_halfwidth, centre + scan_halfwidth, n_samples)
    seps = np.array([separation(w) for w in grid])
    i = int(np.argmin(seps))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_samples - 1)]
    res = minimize_scalar(separation, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, abs(centre))})
    return float(min(seps[i], res.fun))
