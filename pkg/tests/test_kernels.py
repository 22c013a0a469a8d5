import os
import subprocess
import sys

import numpy as np
import pytest

from galton_dnp import _kernels


def random_inputs(size, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(size=(size, size)), rng.uniform(size=size), rng.uniform(size=size)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not active")
@pytest.mark.parametrize("size", [1, 2, 7, 64])
def test_numba_and_numpy_agree_bitwise(size):
    eta, rows, cols = random_inputs(size, size)
    fast = _kernels.sweep_board_numba(eta, rows, cols)
    slow = _kernels.sweep_board_numpy(eta, rows, cols)
    assert fast[0].tobytes() == slow[0].tobytes() and fast[1].tobytes() == slow[1].tobytes()


def test_numpy_kernel_small_case():
    eta = np.array([[0.25]])
    row, col = _kernels.sweep_board_numpy(eta, np.array([1.0]), np.array([0.0]))
    assert row == pytest.approx([0.25]) and col == pytest.approx([0.75])


def test_dispatch_conserves():
    eta, rows, cols = random_inputs(32, 1)
    out_rows, out_cols = _kernels.sweep_board(eta, rows, cols)
    assert out_rows.sum() + out_cols.sum() == pytest.approx(rows.sum() + cols.sum(), rel=1e-14)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, GALTON_DNP_DISABLE_NUMBA="1")
    code = "from galton_dnp import _kernels; print(_kernels.BACKEND)"
    result = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert result.stdout.strip() == "numpy"
