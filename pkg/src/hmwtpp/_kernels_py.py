"""Numpy fallback for the simplex hot loops.

These functions are the reference semantics for hmwtpp._kernels_c; both
backends must produce bit-identical results (same IEEE operations, same
first-index tie breaking), so the compiled kernel is built with FP
contraction disabled.

Nonbasic status codes: 0 at lower bound, 1 at upper bound, 2 basic, 3 free.
"""

import numpy as np

AT_LOWER, AT_UPPER, BASIC, FREE = 0, 1, 2, 3


def primal_entering(d, status, dual_tol, bland):
    """Pricing step of the primal simplex (Dantzig; Bland takes the first
    attractive column)."""
    gain = np.zeros_like(d)
    low = status == AT_LOWER
    up = status == AT_UPPER
    fr = status == FREE
    gain[low] = -d[low]
    gain[up] = d[up]
    gain[fr] = np.abs(d[fr])
    if bland:
        idx = np.nonzero(gain > dual_tol)[0]
        return int(idx[0]) if idx.size else -1
    q = int(np.argmax(gain))
    return q if gain[q] > dual_tol else -1


def primal_ratio(col, xB, lbB, ubB, sign, pivot_tol, bland, basisB):
    """Primal ratio test.

    Returns (r, step): blocking row and entering-variable step; r == -1
    means unbounded.  Normal mode is two-pass Harris (largest pivot within a
    tolerance-relaxed minimal step); Bland mode takes the exact minimal step
    breaking ties by smallest basic variable index.
    """
    rate = -sign * col
    steps = np.full(col.shape[0], np.inf)
    up_mask = rate > pivot_tol
    lo_mask = rate < -pivot_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        steps[up_mask] = (ubB[up_mask] - xB[up_mask]) / rate[up_mask]
        steps[lo_mask] = (lbB[lo_mask] - xB[lo_mask]) / rate[lo_mask]
    steps[np.isnan(steps)] = np.inf
    if bland:
        best = steps.min()
        if not np.isfinite(best):
            return -1, np.inf
        tied = np.nonzero(steps == best)[0]
        r = int(tied[np.argmin(basisB[tied])])
        return r, max(best, 0.0)
    relaxed = np.full(col.shape[0], np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        relaxed[up_mask] = (ubB[up_mask] - xB[up_mask] + 1e-7) / rate[up_mask]
        relaxed[lo_mask] = (lbB[lo_mask] - xB[lo_mask] - 1e-7) / rate[lo_mask]
    relaxed[np.isnan(relaxed)] = np.inf
    theta_max = relaxed.min()
    if not np.isfinite(theta_max):
        return -1, np.inf
    cand = steps <= theta_max
    score = np.where(cand, np.abs(rate), -1.0)
    r = int(np.argmax(score))
    return r, max(steps[r], 0.0)


def apply_pivot(T, r, q):
    """Gaussian pivot of the dense tableau on (row r, column q), in place."""
    piv = T[r, q]
    T[r, :] /= piv
    col = T[:, q].copy()
    col[r] = 0.0
    T -= col[:, None] * T[r, :][None, :]
    T[:, q] = 0.0
    T[r, q] = 1.0
