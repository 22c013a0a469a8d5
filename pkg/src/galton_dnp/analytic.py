"""Closed forms: the single-nucleus ratchet and binomial full-sweep populations.

The binomial board is the direction-independent Galton board: at every
crossing off the conjugate diagonal the population goes down with probability
p and right with probability q = 1 - p, whatever direction it arrived from.
On the conjugate diagonal the large gap forces a turn.  For p = q = 1/2 this is
the uniform board with eta = 1/2 and an adiabatic conjugate diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class RatchetParams:
    eta_small: float
    eta_large: float
    w_l: float = math.inf
    omega_r: float = 1.0
    t_total: float = 1.0
    a_par_sign: int = 1

    def __post_init__(self):
        for name in ("eta_small", "eta_large"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}: must lie in [0, 1], got {value}")
        for name in ("w_l", "omega_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name}: must be positive, got {getattr(self, name)}")
        if self.t_total < 0:
            raise ValueError(f"t_total: must be non-negative, got {self.t_total}")
        if self.a_par_sign not in (1, -1):
            raise ValueError(f"a_par_sign: must be +1 or -1, got {self.a_par_sign}")


def ratchet_single_sweep(params: RatchetParams) -> float:
    """Polarisation from one low-to-high sweep over a single nucleus.

    Populations start at one per nuclear state.  A negative longitudinal
    coupling puts the large gaps first along every path and the two arms of
    the board cancel exactly.
    """
    if params.a_par_sign < 0:
        return 0.0
    return (1.0 - params.eta_large) * (1.0 - (2.0 * params.eta_small - 1.0) ** 2)


def ratchet_net(params: RatchetParams) -> float:
    """Polarisation accumulated over T * omega_r sweeps with partial electron repolarisation."""
    efficiency = -math.expm1(-params.w_l / params.omega_r)
    return efficiency * params.t_total * params.omega_r * ratchet_single_sweep(params)


def ratchet_step(params: RatchetParams, down: float, up: float) -> tuple:
    """One sweep + reset acting on arbitrary (down, up) nuclear populations.

    Exact affine update of the N=1 board (positive coupling) with
    eta_{1,1} = eta_{2,2} = eta_small and eta_{1,2} = eta_{2,1} = eta_large.
    With eta_large = 0 it reduces to (down + beta * up, (1 - beta) * up),
    beta = 2 a (1 - a) with a = eta_small.
    """
    if params.a_par_sign < 0:
        raise ValueError("a_par_sign: the affine ratchet map is only tabulated for positive coupling")
    a, b = params.eta_small, params.eta_large
    # the down row either turns at its same-state crossing or passes both of its crossings
    down_to_down = (1 - b) + b * a
    up_to_down = a * (1 - b) * (1 - a) + (1 - a) * b + (1 - a) * (1 - b) * a
    return (
        down_to_down * down + up_to_down * up,
        (1 - down_to_down) * down + (1 - up_to_down) * up,
    )


@dataclass(frozen=True)
class BinomialParams:
    n_nuclei: int
    p_down: float = 0.5
    q_right: float = 0.5

    def __post_init__(self):
        if int(self.n_nuclei) != self.n_nuclei or self.n_nuclei < 1:
            raise ValueError(f"n_nuclei: must be a positive integer, got {self.n_nuclei!r}")
        for name in ("p_down", "q_right"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}: must lie in [0, 1], got {value}")
        if abs(self.p_down + self.q_right - 1.0) > 1e-12:
            raise ValueError(f"q_right: p_down + q_right must equal 1, got {self.p_down + self.q_right}")

    @property
    def size(self) -> int:
        return 2 ** int(self.n_nuclei)


def log_binom(n: int, k: int) -> float:
    """log C(n, k); -inf when the step counts are negative or k > n."""
    if n < 0 or k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _walk_weight(n_steps: int, n_right: int, p: float, q: float) -> float:
    """C(n_steps, n_right) q**n_right p**(n_steps - n_right), zero outside range."""
    n_down = n_steps - n_right
    lb = log_binom(n_steps, n_right)
    if lb == -math.inf:
        return 0.0
    log_w = lb
    for count, prob in ((n_right, q), (n_down, p)):
        if count:
            if prob == 0.0:
                return 0.0
            log_w += count * math.log(prob)
    return math.exp(log_w)


def _exit_distribution(size: int, k: int, l: int, heading: str, p: float, q: float):
    """Free walk from node (k, l) (1-based) after leaving it along ``heading``.

    Returns (column_exits, row_exits) probability arrays, index 0 = column/row 1.
    """
    col = np.zeros(size)
    row = np.zeros(size)
    k0, l0 = (k + 1, l) if heading == "right" else (k, l + 1)
    if k0 > size:
        row[l0 - 1] += 1.0
        return col, row
    if l0 > size:
        col[k0 - 1] += 1.0
        return col, row
    for c in range(k0, size + 1):
        col[c - 1] += _walk_weight((c - k0) + (size - l0), c - k0, p, q) * p
    for d in range(l0, size + 1):
        row[d - 1] += _walk_weight((size - k0) + (d - l0), size - k0, p, q) * q
    return col, row


def _entry_distribution(size: int, ell: int, p: float, q: float):
    """Exit probabilities for unit population entering row ``ell`` (1-based) from the left."""
    col = np.zeros(size)
    row = np.zeros(size)
    n_free = size - ell  # fair decisions before the conjugate diagonal
    for r in range(0, n_free + 1):
        node = (1 + r, size - r)
        if n_free == 0:
            from_left, from_above = 1.0, 0.0
        else:
            # r rights and n_free - r downs, split by the direction of the last move
            from_left = _walk_weight(n_free - 1, r - 1, p, q) * q if r >= 1 else 0.0
            from_above = _walk_weight(n_free - 1, r, p, q) * p if r <= n_free - 1 else 0.0
        # the large gap turns every arrival
        if from_left:
            c, rw = _exit_distribution(size, *node, "down", p, q)
            col += from_left * c
            row += from_left * rw
        if from_above:
            c, rw = _exit_distribution(size, *node, "right", p, q)
            col += from_above * c
            row += from_above * rw
    return col, row


def binomial_forward_by_walks(params: BinomialParams) -> np.ndarray:
    """Per-state populations built node by node: free walk to the conjugate
    diagonal, forced turn, free walk to an exit.  O(M**3); a cross-check for
    :func:`binomial_forward` on small boards.

    Column c exits into state n = c and row d into state n = M + 1 - d.
    """
    size = params.size
    p, q = params.p_down, params.q_right
    pops = np.zeros(size)
    for ell in range(1, size + 1):
        col, row = _entry_distribution(size, ell, p, q)
        pops += col + row[::-1]
    return pops / size


def _log_binom_array(n: np.ndarray, k: np.ndarray) -> np.ndarray:
    valid = (n >= 0) & (k >= 0) & (k <= n)
    n_ = np.where(valid, n, 0)
    k_ = np.where(valid, k, 0)
    out = gammaln(n_ + 1) - gammaln(k_ + 1) - gammaln(n_ - k_ + 1)
    return np.where(valid, out, -np.inf)


def _log_power(base: float, exponent: np.ndarray) -> np.ndarray:
    """log(base**exponent) with 0**0 = 1."""
    exponent = np.asarray(exponent, dtype=float)
    if base == 0.0:
        return np.where(exponent == 0, 0.0, -np.inf)
    return exponent * math.log(base)


def binomial_forward(params: BinomialParams) -> np.ndarray:
    """Per-state populations P_n after a full low-to-high sweep from the mixed state.

    Closed sum over entry rows l < M of a C(n-2 + M-l-1, n-2) p**(M-l)
    q**(n-2) term (leaving down column n) and a C(M-n-l + M-2, M-n-l)
    p**(M-n-l) q**(M-1) term (leaving along row M+1-n); the top-right entry row
    turns straight into column 1.  Binomials with negative arguments vanish.
    Evaluated in the log domain so N=8 stays finite.  Entry n = 1 is the
    all-down state; each entry row carries 1/M.
    """
    size = params.size
    p, q = params.p_down, params.q_right
    n = np.arange(1, size + 1)[:, None]
    ell = np.arange(1, size)[None, :]
    right = n - 2
    down = size - ell - 1
    log_col = _log_binom_array(right + down, right) + _log_power(p, size - ell) + _log_power(q, np.maximum(right, 0))
    k = size - n - ell
    log_row = _log_binom_array(k + size - 2, k) + _log_power(p, np.maximum(k, 0)) + _log_power(q, size - 1)
    total = np.exp(log_col).sum(axis=1) + np.exp(log_row).sum(axis=1)
    total[0] += 1.0
    return total / size


def binomial_reverse(params: BinomialParams) -> np.ndarray:
    """High-to-low sweep: the forward sum evaluated at n = M - s for state label s = 0..M-1.

    Rotating the board by 180 degrees maps the sweep onto the forward one with
    the state order reversed.
    """
    return binomial_forward(params)[::-1].copy()


def binomial_polarization(pops: np.ndarray) -> float:
    half = len(pops) // 2
    return float(np.sum(pops[:half]) - np.sum(pops[half:]))
