"""Pure numpy implementations of the hot loops.

Same signatures and results as the compiled ``_kernels`` module; used when
the extension is not built or ``SAFETYRISK_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np

_CUTOFF = 38.7
_CHUNK = 1 << 22


def gauss_kernel_sum(obs_sorted: np.ndarray, xs: np.ndarray, h: float) -> np.ndarray:
    """Unnormalised sum of Gaussian bumps at every point of ``xs``."""
    obs_sorted = np.asarray(obs_sorted, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty(xs.size, dtype=np.float64)
    n = max(obs_sorted.size, 1)
    step = max(1, _CHUNK // n)
    for start in range(0, xs.size, step):
        x = xs[start:start + step]
        z = (obs_sorted[None, :] - x[:, None]) / h
        z = np.where(np.abs(z) > _CUTOFF, np.inf, z)
        out[start:start + step] = np.exp(-0.5 * z * z).sum(axis=1)
    return out


def count_inversions(values: np.ndarray) -> int:
    """Number of index pairs i < j with values[i] > values[j].

    Bottom-up merge counting, vectorised one merge level at a time.
    """
    a = np.asarray(values, dtype=np.int64)
    n = a.size
    if n < 2:
        return 0
    # dense ranks keep ties intact and bound the per-block key range
    _, a = np.unique(a, return_inverse=True)
    a = a.astype(np.int64)
    span = int(a.max()) + 1
    idx = np.arange(n)
    inv = 0
    width = 1
    while width < n:
        pair = idx // (2 * width)
        right = (idx // width) % 2 == 1
        keyed = pair * span + a
        # within each pair block the left half is sorted; count left
        # elements strictly greater than each right element
        left_keys = keyed[~right]
        left_pair = pair[~right]
        rk = keyed[right]
        rp = pair[right]
        le = np.searchsorted(left_keys, rk, side="right")
        block_end = np.searchsorted(left_pair, rp, side="right")
        inv += int((block_end - le).sum())
        order = np.argsort(keyed, kind="stable")
        a = a[order]
        width *= 2
    return inv
