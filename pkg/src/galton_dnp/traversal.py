"""Population transport through a crossing board under a frequency sweep.

Every crossing acts on the pair (m_s=0 population arriving along its row,
m_s=+1 population arriving down its column) with the doubly stochastic matrix
[[eta, 1-eta], [1-eta, eta]].  No coherences are kept and nothing evolves
between crossings, so a sweep is a single pass over the board in any order
compatible with "left before right, top before bottom".
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .checkerboard import Checkerboard, TunnelingTable

LOW_TO_HIGH = "low_to_high"
HIGH_TO_LOW = "high_to_low"
DIRECTIONS = (LOW_TO_HIGH, HIGH_TO_LOW)
# "frequency": a crossing takes part iff its own frequency lies in the window.
# "column": iff its column's m_s=+1 level, measured on the untilted board
# (at the central m_s=0 energy), lies in the window.
WINDOW_RULES = ("frequency", "column")


class DegenerateBoardError(ValueError):
    pass


@dataclass(frozen=True)
class StatePopulations:
    """Exit populations per nuclear state, one array per electronic manifold.

    Entry n refers to nuclear state ``states[n]``; states are ordered by
    ascending m_s=0 energy, so the net nuclear-down states come first.
    """

    m0: np.ndarray
    m1: np.ndarray
    states: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.m0) + np.sum(self.m1))

    @property
    def per_state(self) -> np.ndarray:
        return self.m0 + self.m1


@dataclass(frozen=True)
class SweepSpec:
    direction: str = LOW_TO_HIGH
    f0: Optional[float] = None
    bandwidth: Optional[float] = None
    rate: Optional[float] = None
    n_sweeps: int = 1
    w_l: Optional[float] = None
    omega_r: Optional[float] = None
    t_total: Optional[float] = None
    window_rule: str = "frequency"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction: expected one of {DIRECTIONS}, got {self.direction!r}")
        if self.window_rule not in WINDOW_RULES:
            raise ValueError(f"window_rule: expected one of {WINDOW_RULES}, got {self.window_rule!r}")
        if (self.f0 is None) != (self.bandwidth is None):
            raise ValueError("bandwidth: f0 and bandwidth must be given together")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"bandwidth: must be positive, got {self.bandwidth}")
        if self.rate is not None and not self.rate > 0:
            raise ValueError(f"rate: must be positive, got {self.rate}")

    @property
    def windowed(self) -> bool:
        return self.bandwidth is not None

    def repolarization(self) -> float:
        """Electron polarisation regained between sweeps, 1 - exp(-w_L / omega_r)."""
        if self.w_l is None or self.omega_r is None:
            return 1.0
        return -math.expm1(-self.w_l / self.omega_r)


def transfer_matrix(eta: float) -> np.ndarray:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return np.array([[eta, 1.0 - eta], [1.0 - eta, eta]])


def mixed_state(board: Checkerboard, total: float = 1.0) -> StatePopulations:
    """Nuclear mixed state with the electron in m_s=0.

    ``total=2**N`` gives unit population per entry row, the normalisation under
    which single-sweep polarisations take their closed forms.
    """
    m = board.size
    return StatePopulations(np.full(m, total / m), np.zeros(m), board.l_states[::-1].copy())


def window_mask(board: Checkerboard, f0: float, bandwidth: float, rule: str = "frequency") -> np.ndarray:
    """Crossings that take part in a sweep over [f0 - B/2, f0 + B/2].

    Comparisons are made relative to the board centre so that mirrored
    windows select exactly mirrored crossings.
    """
    centre = board.center[0]
    lo = (f0 - centre) - 0.5 * bandwidth
    hi = (f0 - centre) + 0.5 * bandwidth
    if rule == "frequency":
        offset = board.frequencies - centre
    elif rule == "column":
        offset = np.broadcast_to((board.m1_levels - centre)[:, None], (board.size, board.size))
    else:
        raise ValueError(f"window_rule: expected one of {WINDOW_RULES}, got {rule!r}")
    return (offset >= lo) & (offset <= hi)


def effective_eta(board: Checkerboard, table: TunnelingTable, sweep: SweepSpec) -> np.ndarray:
    """Diabatic probabilities seen by the sweep; crossings outside the window pass straight."""
    if table.size != board.size:
        raise ValueError(f"eta: table size {table.size} does not match board size {board.size}")
    if not sweep.windowed:
        return table.eta
    return np.where(window_mask(board, sweep.f0, sweep.bandwidth, sweep.window_rule), table.eta, 1.0)


def propagate(
    board: Checkerboard,
    table: TunnelingTable,
    sweep: SweepSpec,
    initial: StatePopulations,
    allow_degenerate: bool = False,
) -> StatePopulations:
    """One sweep over the board; returns populations leaving each row and column.

    A high-to-low sweep is the low-to-high sweep of the board rotated by 180
    degrees: rows are then entered from the right and columns from the bottom.
    """
    if board.degenerate and not allow_degenerate:
        raise DegenerateBoardError(
            "board has coincident crossing frequencies; pass allow_degenerate=True to sweep it anyway"
        )
    if not np.array_equal(initial.states, board.l_states[::-1]):
        raise ValueError("initial populations are not ordered for this board")
    if abs(initial.total - 1.0) > 1e-12 and abs(initial.total - board.size) > 1e-12 * board.size:
        warnings.warn(f"initial populations sum to {initial.total!r}", stacklevel=2)
    m = board.size
    eta = effective_eta(board, table, sweep)
    state_to_n = np.empty(m, dtype=np.int64)
    state_to_n[initial.states] = np.arange(m)
    row_n = state_to_n[board.l_states]
    col_n = state_to_n[board.k_states]
    row_in = initial.m0[row_n]
    col_in = initial.m1[col_n]
    if sweep.direction == HIGH_TO_LOW:
        row_out, col_out = _kernels.sweep_board(eta[::-1, ::-1], row_in[::-1], col_in[::-1])
        row_out, col_out = row_out[::-1], col_out[::-1]
    else:
        row_out, col_out = _kernels.sweep_board(eta, row_in, col_in)
    m0 = np.empty(m)
    m1 = np.empty(m)
    m0[row_n] = row_out
    m1[col_n] = col_out
    return StatePopulations(m0, m1, initial.states)


def laser_reset(pops: StatePopulations) -> StatePopulations:
    """Return every m_s=+1 population to m_s=0 of the same nuclear state."""
    return StatePopulations(pops.m0 + pops.m1, np.zeros_like(pops.m1), pops.states)


def polarization(pops: StatePopulations, sign_convention: str = "a_par_positive") -> float:
    """Excess population of the first (net nuclear-down) half of states over the second."""
    per_state = pops.per_state
    half = len(per_state) // 2
    value = float(np.sum(per_state[:half]) - np.sum(per_state[half:]))
    if sign_convention == "a_par_negative":
        return -value
    if sign_convention != "a_par_positive":
        raise ValueError(f"sign_convention: unknown value {sign_convention!r}")
    return value


def single_sweep_polarization(
    board: Checkerboard,
    table: TunnelingTable,
    sweep: SweepSpec = SweepSpec(),
    sign_convention: str = "a_par_positive",
    allow_degenerate: bool = False,
) -> float:
    """Polarisation after one sweep and laser reset from unit population per nuclear state."""
    pops = propagate(board, table, sweep, mixed_state(board, total=board.size), allow_degenerate)
    return polarization(laser_reset(pops), sign_convention)


def accumulate(
    board: Checkerboard,
    table: TunnelingTable,
    sweep: SweepSpec,
    initial: StatePopulations,
    n_sweeps: Optional[int] = None,
    allow_degenerate: bool = False,
) -> StatePopulations:
    """Repeated sweep + laser reset; only a fraction ``sweep.repolarization()`` of
    electrons is polarised at each sweep, the rest leave the nuclei untouched."""
    if n_sweeps is None:
        if sweep.t_total is not None and sweep.omega_r is not None:
            n_sweeps = int(round(sweep.t_total * sweep.omega_r))
        else:
            n_sweeps = sweep.n_sweeps
    efficiency = sweep.repolarization()
    pops = laser_reset(initial)
    for _ in range(n_sweeps):
        swept = laser_reset(propagate(board, table, sweep, pops, allow_degenerate))
        pops = StatePopulations(
            efficiency * swept.m0 + (1.0 - efficiency) * pops.m0, np.zeros_like(pops.m1), pops.states
        )
    return pops


_STEP = {"right": (1, 0), "down": (0, 1)}


def _direction(a, b) -> str:
    dk, dl = b[0] - a[0], b[1] - a[1]
    if (dk, dl) == (1, 0):
        return "right"
    if (dk, dl) == (0, 1):
        return "down"
    raise ValueError(f"path step {a} -> {b} is not a single right/down move")


def path_factors(
    path: Sequence[tuple],
    entry: str = "right",
    exit: Optional[str] = None,
    size: Optional[int] = None,
) -> list:
    """Classify each node of ``path`` (0-based (k, l)) as "straight" or "bend".

    The last node is classified only when ``exit`` names the direction in
    which the path leaves it.
    """
    if entry not in _STEP or (exit is not None and exit not in _STEP):
        raise ValueError("entry/exit must be 'right' or 'down'")
    nodes = [tuple(v) for v in path]
    factors = []
    arriving = entry
    for here, nxt in zip(nodes, nodes[1:]):
        if size is not None and not (0 <= here[0] < size and 0 <= here[1] < size):
            raise ValueError(f"path continues past board exit at {here}")
        leaving = _direction(here, nxt)
        factors.append((here, "straight" if leaving == arriving else "bend"))
        arriving = leaving
    if exit is not None:
        factors.append((nodes[-1], "straight" if exit == arriving else "bend"))
    return factors


def path_probability(
    table: TunnelingTable,
    path: Sequence[tuple],
    entry: str = "right",
    exit: Optional[str] = None,
) -> float:
    """Probability of following ``path`` once at its first node.

    Straight-through nodes contribute eta, bends 1 - eta.  Without ``exit``
    the result is the probability of arriving at the last node.  Nodes off the
    board (k or l equal to M) count as exits.
    """
    eta = table.eta
    prob = 1.0
    for (k, l), kind in path_factors(path, entry, exit, size=table.size):
        prob *= eta[k, l] if kind == "straight" else 1.0 - eta[k, l]
    return float(prob)


def monotone_paths(start: tuple, end: tuple) -> Iterable[list]:
    """All right/down lattice paths from ``start`` to ``end`` inclusive."""
    n_right = end[0] - start[0]
    n_down = end[1] - start[1]
    if n_right < 0 or n_down < 0:
        raise ValueError(f"{end} is not reachable from {start} with right/down moves")
    steps = n_right + n_down
    for rights in itertools.combinations(range(steps), n_right):
        k, l = start
        path = [(k, l)]
        chosen = set(rights)
        for s in range(steps):
            if s in chosen:
                k += 1
            else:
                l += 1
            path.append((k, l))
        yield path


def traversal_probability(
    table: TunnelingTable, start: tuple, end: tuple, entry: str = "right"
) -> float:
    """Probability of reaching node ``end`` after entering node ``start``.

    Summed over all C(L, k_f - k_i) monotone paths.  ``end`` may be an exit
    position just off the board, (M, l) to the right or (k, M) below.
    """
    m = table.size
    if end[0] == m and end[1] == m:
        raise ValueError("(M, M) is not an exit position")
    if end[0] > m or end[1] > m:
        raise ValueError(f"{end} lies outside the board and its exits")
    total = 0.0
    for path in monotone_paths(start, end):
        # a path may only leave the board at its final step
        if any(k >= m or l >= m for k, l in path[:-1]):
            continue
        total += path_probability(table, path, entry=entry)
    return total


def count_paths(start: tuple, end: tuple) -> int:
    n_right = end[0] - start[0]
    n_down = end[1] - start[1]
    if n_right < 0 or n_down < 0:
        return 0
    return math.comb(n_right + n_down, n_right)


def population_records(pops: StatePopulations, n_nuclei: int) -> list:
    from .spin_model import state_label

    rows = []
    for n, state in enumerate(pops.states):
        for manifold, values in (("m0", pops.m0), ("m1", pops.m1)):
            rows.append(
                {
                    "n": n + 1,
                    "state": state_label(int(state), n_nuclei),
                    "manifold": manifold,
                    "population": float(values[n]),
                }
            )
    return rows
