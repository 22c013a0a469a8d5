"""The 2^N x 2^N board of level crossings and their tunnelling probabilities.

Column k runs over m_s=+1 levels in ascending energy, row l over m_s=0 levels
in descending energy, so frequencies increase both along a row and down a
column.  Indices are 0-based throughout; position (k, l) of the conjugate
diagonal is l = M - 1 - k with M = 2**N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .spin_model import (
    ManifoldFrequencies,
    SpinSystemConfig,
    effective_frequencies,
    gap_table,
    m0_energies,
    m1_energies_at_zero,
)

MAX_BOARD_NUCLEI = 10

LARGE_GAP_PLACEMENTS = ("conjugate", "diagonal", "same_state", "none")


@dataclass(frozen=True)
class Checkerboard:
    n_nuclei: int
    m1_levels: np.ndarray  # E_k^(1)(0) in column order
    m0_levels: np.ndarray  # E_l^(0) in row order
    gaps: np.ndarray  # (M, M), indexed [k, l]
    center: tuple
    k_states: np.ndarray
    l_states: np.ndarray
    degenerate: bool = False

    @property
    def size(self) -> int:
        return 2**self.n_nuclei

    @property
    def frequencies(self) -> np.ndarray:
        return self.m1_levels[:, None] - self.m0_levels[None, :]

    @property
    def energies(self) -> np.ndarray:
        return np.broadcast_to(self.m0_levels[None, :], (self.size, self.size))

    @property
    def coords(self) -> np.ndarray:
        """(M, M, 2) array of (frequency, energy) pairs."""
        return np.stack([self.frequencies, self.energies], axis=-1)

    def same_state_mask(self) -> np.ndarray:
        """Crossings that flip only the electron (gap = Rabi frequency)."""
        return self.k_states[:, None] == self.l_states[None, :]

    def frequency_range(self) -> tuple:
        f = self.frequencies
        return float(f.min()), float(f.max())


def _ordering(values: np.ndarray, descending: bool) -> np.ndarray:
    key = -values if descending else values
    return np.argsort(key, kind="stable")


def _has_ties(levels: np.ndarray, rtol: float = 1e-12) -> bool:
    if len(levels) < 2:
        return False
    diffs = np.diff(np.sort(levels))
    scale = max(np.max(np.abs(levels)), 1.0)
    return bool(np.any(diffs <= rtol * scale))


def assemble_board(
    n_nuclei: int,
    m1_levels_by_state: np.ndarray,
    m0_levels_by_state: np.ndarray,
    gaps_by_state: Optional[np.ndarray],
    center: tuple,
) -> Checkerboard:
    """Sort levels into board order and attach a (state x state) gap array.

    ``gaps_by_state[s1, s0]`` is the gap between m_s=+1 state s1 and m_s=0
    state s0; ``None`` leaves all gaps at zero.
    """
    k_states = _ordering(np.asarray(m1_levels_by_state, float), descending=False)
    l_states = _ordering(np.asarray(m0_levels_by_state, float), descending=True)
    m1 = np.asarray(m1_levels_by_state, float)[k_states]
    m0 = np.asarray(m0_levels_by_state, float)[l_states]
    size = 2**n_nuclei
    if gaps_by_state is None:
        gaps = np.zeros((size, size))
    else:
        gaps = np.asarray(gaps_by_state, float)[np.ix_(k_states, l_states)]
    return Checkerboard(
        n_nuclei=n_nuclei,
        m1_levels=m1,
        m0_levels=m0,
        gaps=gaps,
        center=center,
        k_states=k_states,
        l_states=l_states,
        degenerate=_has_ties(m1) or _has_ties(m0),
    )


def build_checkerboard(cfg: SpinSystemConfig, freqs: Optional[ManifoldFrequencies] = None) -> Checkerboard:
    if cfg.n_nuclei > MAX_BOARD_NUCLEI:
        raise ValueError(f"n_nuclei: board limited to {MAX_BOARD_NUCLEI} nuclei, got {cfg.n_nuclei}")
    if freqs is None:
        freqs = effective_frequencies(cfg)
    states = np.arange(cfg.dim)
    e1 = m1_energies_at_zero(cfg, freqs)
    e0 = m0_energies(freqs)
    gaps = gap_table(cfg, freqs, states, states)
    return assemble_board(cfg.n_nuclei, e1, e0, gaps, center=(cfg.offset, 0.0))


@dataclass(frozen=True)
class SymmetryReport:
    coord_violation: float
    gap_violation: float
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.coord_violation, self.gap_violation)

    @property
    def ok(self) -> bool:
        return self.max_violation <= self.tol


def verify_symmetries(board: Checkerboard, tol: float = 1e-12) -> SymmetryReport:
    """Point-mirror checks of crossing distances from the centre and of gaps.

    Compares (k, l) with (M-1-k, M-1-l).  Distances are Euclidean in the
    (frequency, energy) plane.  Violations are reported, not raised.
    """
    centre = np.asarray(board.center, float)
    dist = np.linalg.norm(board.coords - centre, axis=-1)
    mirrored = dist[::-1, ::-1]
    scale = max(float(np.max(dist)), 1.0)
    coord_violation = float(np.max(np.abs(dist - mirrored))) / scale
    gap_violation = float(np.max(np.abs(board.gaps - board.gaps[::-1, ::-1])))
    return SymmetryReport(coord_violation, gap_violation, tol)


@dataclass(frozen=True)
class TunnelingTable:
    eta: np.ndarray
    sweep_rate: Optional[float] = None
    conjugate_diagonal_override: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if eta.ndim != 2 or eta.shape[0] != eta.shape[1]:
            raise ValueError(f"eta: expected a square table, got shape {eta.shape}")
        if np.any(eta < 0) or np.any(eta > 1) or not np.all(np.isfinite(eta)):
            raise ValueError("eta: entries must lie in [0, 1]")
        object.__setattr__(self, "eta", eta)

    @property
    def size(self) -> int:
        return self.eta.shape[0]


def large_gap_mask(board: Checkerboard, placement: str) -> np.ndarray:
    size = board.size
    if placement == "conjugate":
        return np.fliplr(np.eye(size, dtype=bool))
    if placement == "diagonal":
        return np.eye(size, dtype=bool)
    if placement == "same_state":
        return board.same_state_mask()
    if placement == "none":
        return np.zeros((size, size), dtype=bool)
    raise ValueError(f"large_gap: expected one of {LARGE_GAP_PLACEMENTS}, got {placement!r}")


def tunneling_table(board: Checkerboard, sweep_rate: float, conj_diag_adiabatic: bool = False) -> TunnelingTable:
    """Landau-Zener diabatic probabilities exp(-gap**2 / sweep_rate)."""
    if not sweep_rate > 0:
        raise ValueError(f"rate: sweep rate must be positive, got {sweep_rate}")
    eta = np.exp(-board.gaps**2 / sweep_rate)
    override = None
    if conj_diag_adiabatic:
        override = 0.0
        eta[large_gap_mask(board, "conjugate")] = 0.0
    return TunnelingTable(eta, sweep_rate, override)


def uniform_table(board_or_size, eta: float, large_gap: str = "conjugate") -> TunnelingTable:
    """Same diabatic probability everywhere except fully adiabatic large-gap crossings."""
    if isinstance(board_or_size, Checkerboard):
        board = board_or_size
        size = board.size
    else:
        board = None
        size = int(board_or_size)
    table = np.full((size, size), float(eta))
    if large_gap != "none":
        if board is None and large_gap == "same_state":
            raise ValueError("large_gap: 'same_state' needs a board")
        if board is None:
            mask = np.fliplr(np.eye(size, dtype=bool)) if large_gap == "conjugate" else np.eye(size, dtype=bool)
        else:
            mask = large_gap_mask(board, large_gap)
        table[mask] = 0.0
    return TunnelingTable(table, meta={"uniform_eta": float(eta), "large_gap": large_gap})


def board_records(board: Checkerboard, table: Optional[TunnelingTable] = None) -> list:
    """One dict per crossing, k-major, for tabular export (1-based indices)."""
    freq = board.frequencies
    rows = []
    for k in range(board.size):
        for l in range(board.size):
            rows.append(
                {
                    "k": k + 1,
                    "l": l + 1,
                    "frequency": float(freq[k, l]),
                    "energy": float(board.m0_levels[l]),
                    "gap": float(board.gaps[k, l]),
                    "eta": float(table.eta[k, l]) if table is not None else float("nan"),
                }
            )
    return rows
