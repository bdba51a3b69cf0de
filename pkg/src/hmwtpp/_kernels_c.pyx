# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex hot loops; semantics mirror hmwtpp._kernels_py exactly.

Compiled with -ffp-contract=off so arithmetic matches the numpy fallback
bit for bit (no fused multiply-add).
"""

from libc.math cimport INFINITY, fabs, isnan

AT_LOWER, AT_UPPER, BASIC, FREE = 0, 1, 2, 3

DEF C_LOWER = 0
DEF C_UPPER = 1
DEF C_BASIC = 2
DEF C_FREE = 3


def primal_entering(double[::1] d, signed char[::1] status,
                    double dual_tol, bint bland):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t j, q = -1
    cdef double g, best = dual_tol
    cdef signed char s
    for j in range(n):
        s = status[j]
        if s == C_LOWER:
            g = -d[j]
        elif s == C_UPPER:
            g = d[j]
        elif s == C_FREE:
            g = fabs(d[j])
        else:
            continue
        if bland:
            if g > dual_tol:
                return j
            continue
        if g > best:
            best = g
            q = j
    return q


def primal_ratio(double[::1] col, double[::1] xB, double[::1] lbB,
                 double[::1] ubB, double sign, double pivot_tol,
                 bint bland, long[::1] basisB):
    cdef Py_ssize_t m = col.shape[0]
    cdef Py_ssize_t i, r = -1
    cdef double rate, s, relaxed, theta_max = INFINITY, best_piv = -1.0
    cdef double step = INFINITY, best_step = INFINITY
    cdef long best_var = 0
    if bland:
        for i in range(m):
            rate = -sign * col[i]
            if rate > pivot_tol:
                s = (ubB[i] - xB[i]) / rate
            elif rate < -pivot_tol:
                s = (lbB[i] - xB[i]) / rate
            else:
                continue
            if isnan(s):
                continue
            if s < best_step or (s == best_step and r != -1 and basisB[i] < best_var):
                best_step = s
                r = i
                best_var = basisB[i]
        if r == -1:
            return -1, INFINITY
        return r, (best_step if best_step > 0.0 else 0.0)
    for i in range(m):
        rate = -sign * col[i]
        if rate > pivot_tol:
            relaxed = (ubB[i] - xB[i] + 1e-7) / rate
        elif rate < -pivot_tol:
            relaxed = (lbB[i] - xB[i] - 1e-7) / rate
        else:
            continue
        if isnan(relaxed):
            continue
        if relaxed < theta_max:
            theta_max = relaxed
    if theta_max == INFINITY:
        return -1, INFINITY
    for i in range(m):
        rate = -sign * col[i]
        if rate > pivot_tol:
            s = (ubB[i] - xB[i]) / rate
        elif rate < -pivot_tol:
            s = (lbB[i] - xB[i]) / rate
        else:
            continue
        if isnan(s):
            continue
        if s <= theta_max and fabs(rate) > best_piv:
            best_piv = fabs(rate)
            r = i
            step = s
    if r == -1:
        return -1, INFINITY
    return r, (step if step > 0.0 else 0.0)


def apply_pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t q):
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t n = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = T[r, q]
    cdef double ci
    for j in range(n):
        T[r, j] /= piv
    for i in range(m):
        if i == r:
            continue
        ci = T[i, q]
        if ci == 0.0:
            continue
        for j in range(n):
            T[i, j] -= ci * T[r, j]
    for i in range(m):
        T[i, q] = 0.0
    T[r, q] = 1.0
