"""Exhaustive path enumeration, deliberately naive.

Nothing here calls the dynamic program or the path helpers in
:mod:`galton_dnp.traversal`.  Every path is walked depth first with an explicit
stack and a running product, so the results are an independent reference for
small boards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .checkerboard import Checkerboard, TunnelingTable
from .traversal import HIGH_TO_LOW, StatePopulations, SweepSpec

MAX_ORACLE_NUCLEI = 4

_MOVES = {"right": (1, 0), "down": (0, 1), "left": (-1, 0), "up": (0, -1)}
_TURN = {"right": "down", "down": "right", "left": "up", "up": "left"}


@dataclass
class PathEnumeration:
    paths: list = field(default_factory=list)
    probabilities: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.paths)

    @property
    def total(self) -> float:
        return float(math.fsum(self.probabilities))


def enumerate_paths(table: TunnelingTable, start: tuple, end: tuple, entry: str = "right") -> PathEnumeration:
    """Every right/down path from ``start`` to ``end`` (0-based, inclusive) with its probability.

    The probability is that of arriving at ``end``: straight moves through a
    node weigh eta, turns 1 - eta, and the choice made at ``end`` itself is
    not counted.  ``end`` may sit just off the board to denote an exit.
    """
    m = table.size
    if end[0] < start[0] or end[1] < start[1]:
        raise ValueError(f"{end} is not reachable from {start} with right/down moves")
    if end[0] > m or end[1] > m or (end[0] == m and end[1] == m):
        raise ValueError(f"{end} is neither a board node nor an exit position")
    eta = table.eta
    out = PathEnumeration()
    stack = [([tuple(start)], entry, 1.0)]
    while stack:
        path, heading, prob = stack.pop()
        k, l = path[-1]
        if (k, l) == tuple(end):
            out.paths.append(path)
            out.probabilities.append(prob)
            continue
        if k >= m or l >= m:
            continue
        for move in ("right", "down"):
            dk, dl = _MOVES[move]
            nk, nl = k + dk, l + dl
            if nk > end[0] or nl > end[1]:
                continue
            weight = eta[k, l] if move == heading else 1.0 - eta[k, l]
            stack.append((path + [(nk, nl)], move, prob * weight))
    return out


def _walk_exits(eta: np.ndarray, k: int, l: int, heading: str, mass: float, rows: np.ndarray, cols: np.ndarray):
    """Push ``mass`` from node (k, l) along every path until it leaves the board."""
    m = eta.shape[0]
    stack = [(k, l, heading, mass)]
    while stack:
        k, l, heading, prob = stack.pop()
        if not (0 <= k < m and 0 <= l < m):
            # left the board: horizontal movers leave through their row
            if heading in ("right", "left"):
                rows[l] += prob
            else:
                cols[k] += prob
            continue
        e = eta[k, l]
        for move, weight in ((heading, e), (_TURN[heading], 1.0 - e)):
            if weight == 0.0:
                continue
            dk, dl = _MOVES[move]
            stack.append((k + dk, l + dl, move, prob * weight))


def brute_force_traversal(
    board: Checkerboard,
    table: TunnelingTable,
    initial: StatePopulations,
    sweep: SweepSpec = SweepSpec(),
) -> StatePopulations:
    """Exit populations by summing every path from every entry; same contract as propagate.

    A low-to-high sweep enters rows from the left and columns from the top;
    a high-to-low sweep enters rows from the right and columns from the bottom
    and walks left/up.
    """
    if board.n_nuclei > MAX_ORACLE_NUCLEI:
        raise ValueError(
            f"n_nuclei: brute-force enumeration limited to {MAX_ORACLE_NUCLEI} nuclei, got {board.n_nuclei}"
        )
    m = board.size
    eta = np.array(table.eta, dtype=float)
    if sweep.windowed:
        lo = (sweep.f0 - board.center[0]) - 0.5 * sweep.bandwidth
        hi = (sweep.f0 - board.center[0]) + 0.5 * sweep.bandwidth
        for k in range(m):
            for l in range(m):
                if sweep.window_rule == "column":
                    position = board.m1_levels[k] - board.center[0]
                else:
                    position = board.m1_levels[k] - board.m0_levels[l] - board.center[0]
                if not lo <= position <= hi:
                    eta[k, l] = 1.0
    n_of_state = {int(s): n for n, s in enumerate(initial.states)}
    reverse = sweep.direction == HIGH_TO_LOW
    row_heading, col_heading = ("left", "up") if reverse else ("right", "down")
    first = m - 1 if reverse else 0
    rows = np.zeros(m)
    cols = np.zeros(m)
    for l in range(m):
        mass = initial.m0[n_of_state[int(board.l_states[l])]]
        if mass:
            _walk_exits(eta, first, l, row_heading, mass, rows, cols)
    for k in range(m):
        mass = initial.m1[n_of_state[int(board.k_states[k])]]
        if mass:
            _walk_exits(eta, k, first, col_heading, mass, rows, cols)
    m0 = np.zeros(m)
    m1 = np.zeros(m)
    for l in range(m):
        m0[n_of_state[int(board.l_states[l])]] += rows[l]
    for k in range(m):
        m1[n_of_state[int(board.k_states[k])]] += cols[k]
    return StatePopulations(m0, m1, initial.states.copy())


def max_deviation(a: StatePopulations, b: StatePopulations) -> float:
    return float(max(np.max(np.abs(a.m0 - b.m0)), np.max(np.abs(a.m1 - b.m1))))
