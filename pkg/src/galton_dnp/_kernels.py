"""Board-sweep kernels: numba column loop with a pure-numpy wavefront fallback.

Set ``GALTON_DNP_DISABLE_NUMBA=1`` to force the numpy path.  Both kernels
apply the identical per-node update

    row' = eta * row + (1 - eta) * col
    col' = (1 - eta) * row + eta * col

so results agree to the last bit on IEEE hardware without FMA contraction.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("GALTON_DNP_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled by GALTON_DNP_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def sweep_board_numpy(eta: np.ndarray, row_in: np.ndarray, col_in: np.ndarray):
    """Propagate row (m_s=0) and column (m_s=+1) populations through ``eta[k, l]``.

    Nodes on one anti-diagonal k + l = d touch distinct rows and columns, so each
    wavefront is a single vectorised update.
    """
    m = eta.shape[0]
    row = np.array(row_in, dtype=np.float64)
    col = np.array(col_in, dtype=np.float64)
    for d in range(2 * m - 1):
        k = np.arange(max(0, d - m + 1), min(d, m - 1) + 1)
        l = d - k
        e = eta[k, l]
        p1 = row[l]
        p2 = col[k]
        row[l] = e * p1 + (1.0 - e) * p2
        col[k] = (1.0 - e) * p1 + e * p2
    return row, col


def _sweep_board_loop(eta, row_in, col_in):
    m = eta.shape[0]
    row = row_in.copy()
    col = np.empty(m)
    for k in range(m):
        p2 = col_in[k]
        for l in range(m):
            e = eta[k, l]
            p1 = row[l]
            row[l] = e * p1 + (1.0 - e) * p2
            p2 = (1.0 - e) * p1 + e * p2
        col[k] = p2
    return row, col


if HAVE_NUMBA:
    sweep_board_numba = njit(cache=True, nogil=True)(_sweep_board_loop)

    def sweep_board(eta, row_in, col_in):
        return sweep_board_numba(
            np.ascontiguousarray(eta, dtype=np.float64),
            np.ascontiguousarray(row_in, dtype=np.float64),
            np.ascontiguousarray(col_in, dtype=np.float64),
        )

else:
    sweep_board_numba = None
    sweep_board = sweep_board_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
