"""Boards with a prescribed m_s=+1 density of states, and window scans across them.

The m_s=+1 levels are placed at the DOS quantiles (i + 1/2) / M and handed to
nuclear states in m_s=0 energy order, so the large-gap (same-state) crossings
stay on the conjugate diagonal.  m_s=0 levels come from the power-law model.

Windows select whole columns: a crossing takes part when its column's
m_s=+1 level lies inside [f0 - B/2, f0 + B/2].  The board is evaluated column
by column with its tilt ignored.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm, spearmanr

from .checkerboard import Checkerboard, TunnelingTable, assemble_board, uniform_table
from .spin_model import sign_table
from .traversal import (
    HIGH_TO_LOW,
    LOW_TO_HIGH,
    StatePopulations,
    SweepSpec,
    laser_reset,
    mixed_state,
    polarization,
    propagate,
)

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
DEFAULT_FWHM = 13.5
DOS_KINDS = ("gaussian", "explicit")
PLACEMENTS = ("quantile", "random")


@dataclass(frozen=True)
class DosSpec:
    """Target density of m_s=+1 levels.

    A Gaussian may be given by ``sigma`` or ``fwhm``; with neither, the FWHM
    defaults to 13.5 MHz.  ``placement="random"`` draws the levels from the
    distribution with ``seed`` instead of using quantiles.
    """

    kind: str = "gaussian"
    mean: float = 0.0
    sigma: Optional[float] = None
    fwhm: Optional[float] = None
    levels: Optional[Sequence[float]] = None
    placement: str = "quantile"
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in DOS_KINDS:
            raise ValueError(f"kind: expected one of {DOS_KINDS}, got {self.kind!r}")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement: expected one of {PLACEMENTS}, got {self.placement!r}")
        if self.kind == "gaussian":
            if self.sigma is not None and self.fwhm is not None:
                raise ValueError("sigma: give either sigma or fwhm, not both")
            width = self.sigma if self.sigma is not None else self.fwhm
            if width is not None and not width > 0:
                raise ValueError(f"sigma: Gaussian width must be positive, got {width}")
        else:
            if self.levels is None:
                raise ValueError("levels: required for an explicit DOS")
            levels = np.asarray(self.levels, dtype=float)
            if levels.ndim != 1 or len(levels) < 2:
                raise ValueError("levels: need at least two levels")
            if np.any(np.diff(levels) <= 0):
                raise ValueError("levels: must be strictly ascending")
            object.__setattr__(self, "levels", tuple(float(v) for v in levels))

    @property
    def width_sigma(self) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        return float(self.fwhm if self.fwhm is not None else DEFAULT_FWHM) / FWHM_PER_SIGMA

    def density(self, freq) -> np.ndarray:
        """Normalised DOS at ``freq``; explicit level sets use their local spacing."""
        freq = np.asarray(freq, dtype=float)
        if self.kind == "gaussian":
            return norm.pdf(freq, self.mean, self.width_sigma)
        levels = np.asarray(self.levels)
        dens = 1.0 / (len(levels) * np.gradient(levels))
        return np.interp(freq, levels, dens, left=0.0, right=0.0)


def dos_levels(n_levels: int, dos: DosSpec) -> np.ndarray:
    """Ascending level positions following ``dos``."""
    if n_levels < 2:
        raise ValueError(f"n_levels: need at least 2, got {n_levels}")
    if dos.kind == "explicit":
        levels = np.asarray(dos.levels, dtype=float)
        if len(levels) != n_levels:
            raise ValueError(f"levels: expected {n_levels} explicit levels, got {len(levels)}")
        return levels.copy()
    if dos.placement == "random":
        rng = np.random.default_rng(dos.seed)
        return np.sort(rng.normal(dos.mean, dos.width_sigma, n_levels))
    offsets = dos.width_sigma * norm.ppf((np.arange(n_levels) + 0.5) / n_levels)
    # remove the last-bit asymmetry of ppf so the board is an exact mirror image
    offsets = 0.5 * (offsets - offsets[::-1])
    return dos.mean + offsets


def place_levels_by_dos(n_nuclei: int, dos: DosSpec, p_exp: float = 1.1) -> Checkerboard:
    """Board whose columns follow ``dos`` and whose rows follow w0_j = j**p_exp.

    The board carries no gap information; pair it with :func:`uniform_table`.
    """
    size = 2**n_nuclei
    e0 = sign_table(n_nuclei) @ (np.arange(1, n_nuclei + 1, dtype=float) ** p_exp)
    order = np.argsort(e0, kind="stable")
    e1 = np.empty(size)
    e1[order] = dos_levels(size, dos)
    return assemble_board(n_nuclei, e1, e0, None, center=(float(dos.mean), 0.0))


def symmetric_centers(center: float, half_span: float, n_centers: int) -> np.ndarray:
    """Window centres mirrored exactly about ``center``."""
    if n_centers < 2:
        raise ValueError(f"n_centers: need at least 2, got {n_centers}")
    i = np.arange(n_centers)
    offsets = half_span * (2 * i - (n_centers - 1)) / (n_centers - 1)
    return center + offsets


@dataclass(frozen=True)
class SpectralProfile:
    centers: np.ndarray
    polarization_fwd: Optional[np.ndarray]
    polarization_rev: Optional[np.ndarray]
    bandwidth: float
    board_center: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if np.any(np.diff(centers) <= 0):
            raise ValueError("centers: must be strictly increasing")
        for name in ("polarization_fwd", "polarization_rev"):
            values = getattr(self, name)
            if values is not None and len(values) != len(centers):
                raise ValueError(f"{name}: length {len(values)} does not match centers ({len(centers)})")

    def values(self, direction: str = LOW_TO_HIGH) -> np.ndarray:
        values = self.polarization_fwd if direction == LOW_TO_HIGH else self.polarization_rev
        if values is None:
            raise ValueError(f"direction: profile has no {direction} data")
        return values


def window_populations(
    board: Checkerboard,
    table: TunnelingTable,
    f0: float,
    bandwidth: float,
    direction: str = LOW_TO_HIGH,
    window_rule: str = "column",
) -> StatePopulations:
    """Fresh mixed state, one windowed sweep, laser reset."""
    sweep = SweepSpec(direction=direction, f0=f0, bandwidth=bandwidth, window_rule=window_rule)
    return laser_reset(propagate(board, table, sweep, mixed_state(board)))


def scan_profile(
    board: Checkerboard,
    bandwidth: float,
    centers: Sequence[float],
    directions: Sequence[str] = (LOW_TO_HIGH, HIGH_TO_LOW),
    table: Optional[TunnelingTable] = None,
    eta: float = 0.5,
    threads: int = 1,
    window_rule: str = "column",
) -> SpectralProfile:
    """Polarisation after one windowed sweep from the mixed state, for every centre.

    Scan points are independent and may run on ``threads`` workers; results
    keep the order of ``centers`` regardless.
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth: must be positive, got {bandwidth}")
    if board.degenerate:
        raise ValueError("board: coincident levels, scan would depend on tie order")
    meta = {"window_rule": window_rule}
    if table is None:
        table = uniform_table(board, eta)
        meta["eta"] = float(eta)
    centers = np.asarray(centers, dtype=float)
    jobs = [(d, float(c)) for d in directions for c in centers]

    def run(job):
        direction, f0 = job
        return polarization(window_populations(board, table, f0, bandwidth, direction, window_rule))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    per_direction = {}
    for i, direction in enumerate(directions):
        per_direction[direction] = np.array(results[i * len(centers) : (i + 1) * len(centers)])
    return SpectralProfile(
        centers=centers,
        polarization_fwd=per_direction.get(LOW_TO_HIGH),
        polarization_rev=per_direction.get(HIGH_TO_LOW),
        bandwidth=float(bandwidth),
        board_center=float(board.center[0]),
        meta=meta,
    )


def correlation_with_dos(
    profile: SpectralProfile,
    dos: DosSpec,
    direction: str = LOW_TO_HIGH,
    anchor: str = "center",
) -> float:
    """Pearson r between |P(f0)| and the DOS.

    ``anchor="center"`` evaluates the DOS at the window centre f0;
    ``anchor="sweep_end"`` at the frequency where the sweep stops
    (f0 + B/2 going up, f0 - B/2 going down).
    """
    values = np.abs(profile.values(direction))
    if anchor == "center":
        where = profile.centers
    elif anchor == "sweep_end":
        sign = 1.0 if direction == LOW_TO_HIGH else -1.0
        where = profile.centers + sign * 0.5 * profile.bandwidth
    else:
        raise ValueError(f"anchor: expected 'center' or 'sweep_end', got {anchor!r}")
    density = dos.density(where)
    if np.ptp(values) == 0 or np.ptp(density) == 0:
        raise ValueError("profile: constant profile or DOS, correlation undefined")
    return float(np.corrcoef(values, density)[0, 1])


def profile_fwhm(centers: np.ndarray, values: np.ndarray) -> float:
    """Full width at half maximum of |values|, linearly interpolated at the outermost crossings."""
    x = np.asarray(centers, dtype=float)
    y = np.abs(np.asarray(values, dtype=float))
    peak = y.max()
    if peak == 0:
        return 0.0
    half = 0.5 * peak
    above = np.nonzero(y >= half)[0]
    i0, i1 = above[0], above[-1]
    left = x[i0] if i0 == 0 else x[i0 - 1] + (half - y[i0 - 1]) * (x[i0] - x[i0 - 1]) / (y[i0] - y[i0 - 1])
    right = x[i1] if i1 == len(x) - 1 else x[i1] + (y[i1] - half) * (x[i1 + 1] - x[i1]) / (y[i1] - y[i1 + 1])
    return float(right - left)


def mirror_deviation(profile: SpectralProfile) -> float:
    """max |P_rev(c + d) + P_fwd(c - d)| on a centre grid symmetric about the board centre c."""
    offsets = profile.centers - profile.board_center
    scale = max(float(np.max(np.abs(offsets))), 1.0)
    if np.max(np.abs(offsets + offsets[::-1])) > 1e-9 * scale:
        raise ValueError("centers: grid is not symmetric about the board centre")
    return float(np.max(np.abs(profile.values(HIGH_TO_LOW) + profile.values(LOW_TO_HIGH)[::-1])))


@dataclass(frozen=True)
class RegimeSections:
    """Index ranges [start, stop) of the rising, falling and null parts of a profile.

    Windows gain or lose single columns as they move, so the rising part is a
    staircase with one-step jitter; its monotone trend is scored by the rank
    correlation with position.
    """

    rising: tuple
    falling: tuple
    null: tuple
    rising_trend: float

    @property
    def found(self) -> bool:
        lengths = [stop - start for start, stop in (self.rising, self.falling, self.null)]
        return min(lengths[:2]) >= 3 and lengths[2] >= 2 and self.rising_trend >= 0.9


def regime_sections(values: np.ndarray, zero_tol: float = 1e-6) -> RegimeSections:
    """Split a forward profile around its maximum.

    rising: the contiguous positive run ending at the peak; falling: the
    strictly decreasing run after the peak; null: the first run of
    |P| < zero_tol beyond that.
    """
    values = np.asarray(values, dtype=float)
    # last index of the maximum: the staircase can touch its top twice
    peak = len(values) - 1 - int(np.argmax(values[::-1]))
    start = peak
    while start > 0 and values[start - 1] > zero_tol:
        start -= 1
    stop = peak
    while stop + 1 < len(values) and values[stop + 1] < values[stop]:
        stop += 1
    null_start = stop
    while null_start < len(values) and abs(values[null_start]) >= zero_tol:
        null_start += 1
    null_stop = null_start
    while null_stop < len(values) and abs(values[null_stop]) < zero_tol:
        null_stop += 1
    rising = values[start : peak + 1]
    if len(rising) >= 3 and np.ptp(rising) > 0:
        trend = float(spearmanr(np.arange(len(rising)), rising)[0])
    else:
        trend = 0.0
    return RegimeSections((start, peak + 1), (peak, stop + 1), (null_start, null_stop), trend)


def imbalance_halves(pops: StatePopulations, tol: float = 1e-12) -> tuple:
    """Which half of the state index carries the population gain and which the loss.

    Returns (gain_half, loss_half) with 0 for the net-down half, 1 for the
    net-up half, or None when there is no gain/loss above ``tol``.
    """
    per_state = pops.per_state
    excess = per_state - per_state.mean()
    half = len(excess) // 2

    def side(mask):
        weights = np.abs(np.where(mask, excess, 0.0))
        if weights.sum() <= tol:
            return None
        return int(weights[half:].sum() > weights[:half].sum())

    return side(excess > tol), side(excess < -tol)


def profile_records(profile: SpectralProfile) -> list:
    rows = []
    for direction in (LOW_TO_HIGH, HIGH_TO_LOW):
        values = profile.polarization_fwd if direction == LOW_TO_HIGH else profile.polarization_rev
        if values is None:
            continue
        for f0, value in zip(profile.centers, values):
            rows.append(
                {"f0": float(f0), "bandwidth": profile.bandwidth, "direction": direction, "polarization": float(value)}
            )
    return rows


def dos_records(board: Checkerboard, dos: DosSpec) -> list:
    return [{"energy": float(e), "density": float(d)} for e, d in zip(board.m1_levels, dos.density(board.m1_levels))]
