"""Numpy twins of the compiled kernels in ``_ckernels.pyx``.

Same inputs, same comparisons, same integer outputs; used when the
extension is not built or when ``SAFEPERF_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np


def iid_block(u: np.ndarray, p_miss: float, y_min: int) -> tuple[int, int]:
    m = np.count_nonzero(u < p_miss, axis=1)
    return int(np.count_nonzero(m >= y_min)), int(m.sum())


def markov_block(
    u: np.ndarray, p_miss: float, p_mm: float, p_hm: float, y_min: int
) -> tuple[int, int]:
    miss = u[:, 0] < p_miss
    m = miss.astype(np.int64)
    for j in range(1, u.shape[1]):
        miss = u[:, j] < np.where(miss, p_mm, p_hm)
        m += miss
    return int(np.count_nonzero(m >= y_min)), int(m.sum())
