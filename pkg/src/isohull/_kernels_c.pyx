# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; semantic twin of isohull._kernels_py.

Every function mirrors the pure-Python reference operation-for-operation
(same IEEE-754 double operations in the same order), so both backends
produce identical bits on the same inputs.
"""

from libc.math cimport sqrt, fabs, INFINITY

import numpy as np


cdef inline void _sv2(double m11, double m12, double m21, double m22,
                      double *lam1, double *lam2) nogil:
    # conformal/anticonformal split: cancellation-free form of the
    # (sqrt(n2 + 2|det|) -/+ sqrt(n2 - 2|det|)) / 2 closed form
    cdef double e = 0.5 * (m11 + m22)
    cdef double f = 0.5 * (m11 - m22)
    cdef double g = 0.5 * (m21 + m12)
    cdef double h = 0.5 * (m21 - m12)
    cdef double q1 = sqrt(e * e + h * h)
    cdef double q2 = sqrt(f * f + g * g)
    cdef double l1 = q1 - q2
    if l1 < 0.0:
        l1 = -l1
    lam1[0] = l1
    lam2[0] = q1 + q2


cdef inline double _min_margin(double lam1, double lam2,
                               double[::1] thetas, double[::1] vals,
                               Py_ssize_t *bi) nogil:
    cdef double p = lam1 * lam2
    cdef double d = lam2 - lam1
    cdef double best = INFINITY
    cdef double g
    cdef Py_ssize_t i, b = 0
    for i in range(thetas.shape[0]):
        g = vals[i] - (p + thetas[i] * d)
        if g < best:
            best = g
            b = i
    bi[0] = b
    return best


def sv2(double m11, double m12, double m21, double m22):
    """Ordered singular values (lam1, lam2) of a 2x2 matrix."""
    cdef double l1, l2
    _sv2(m11, m12, m21, m22, &l1, &l2)
    return l1, l2


def sv2_batch(entries):
    """Ordered singular values for an (n, 4) array of matrix entries."""
    cdef double[:, ::1] e = np.ascontiguousarray(entries, dtype=np.float64)
    cdef Py_ssize_t n = e.shape[0]
    out_arr = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef double l1, l2
    with nogil:
        for i in range(n):
            _sv2(e[i, 0], e[i, 1], e[i, 2], e[i, 3], &l1, &l2)
            out[i, 0] = l1
            out[i, 1] = l2
    return out_arr


def min_margin(double lam1, double lam2, thetas, vals):
    """(margin, idx) of a singular value pair against envelope arrays."""
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] va = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t bi = 0
    cdef double m = _min_margin(lam1, lam2, th, va, &bi)
    return m, bi


def margin_batch(l1s, l2s, thetas, vals):
    """Vectorized min_margin; returns (margins, idxs)."""
    cdef double[::1] a1 = np.ascontiguousarray(l1s, dtype=np.float64)
    cdef double[::1] a2 = np.ascontiguousarray(l2s, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] va = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t n = a1.shape[0]
    margins_arr = np.empty(n, dtype=np.float64)
    idxs_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] margins = margins_arr
    cdef long long[::1] idxs = idxs_arr
    cdef Py_ssize_t i, bi
    with nogil:
        for i in range(n):
            margins[i] = _min_margin(a1[i], a2[i], th, va, &bi)
            idxs[i] = bi
    return margins_arr, idxs_arr


def sigma_at(double x, thetas, vals):
    """min over breakpoints of (theta*x + m(theta)) / (x + theta)."""
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] va = np.ascontiguousarray(vals, dtype=np.float64)
    cdef double best = INFINITY
    cdef double den, g
    cdef Py_ssize_t i
    for i in range(th.shape[0]):
        den = x + th[i]
        if den <= 0.0:
            continue
        g = (th[i] * x + va[i]) / den
        if g < best:
            best = g
    return best


def sigma_batch(xs, thetas, vals):
    """Vectorized sigma_at."""
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] va = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double best, den, g, x
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            x = xv[i]
            best = INFINITY
            for j in range(th.shape[0]):
                den = x + th[j]
                if den <= 0.0:
                    continue
                g = (th[j] * x + va[j]) / den
                if g < best:
                    best = g
            out[i] = best
    return out_arr


def h_theta4(double m11, double m12, double m21, double m22, double theta):
    """max{lam1*lam2 + theta*(lam2 - lam1) - theta^2, 0} for one matrix."""
    cdef double l1, l2, v
    _sv2(m11, m12, m21, m22, &l1, &l2)
    v = l1 * l2 + theta * (l2 - l1) - theta * theta
    return v if v > 0.0 else 0.0


def h_theta_batch(entries, double theta):
    """Vectorized h_theta4."""
    cdef double[:, ::1] e = np.ascontiguousarray(entries, dtype=np.float64)
    cdef Py_ssize_t n = e.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double l1, l2, v
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _sv2(e[i, 0], e[i, 1], e[i, 2], e[i, 3], &l1, &l2)
            v = l1 * l2 + theta * (l2 - l1) - theta * theta
            out[i] = v if v > 0.0 else 0.0
    return out_arr


def bisect_margin_e11(double d1, double d2, double t_in, double t_out,
                      thetas, vals, double tol, int max_iter):
    """Bisect the hull margin of diag(d1 + t, d2) to its boundary root.

    Caller guarantees margin(t_in) >= 0 > margin(t_out) and d2 >= 0.
    Returns the in-hull endpoint of the final bracket.
    """
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] va = np.ascontiguousarray(vals, dtype=np.float64)
    cdef double mid, u, au, lam1, lam2, m
    cdef Py_ssize_t bi
    cdef int k
    for k in range(max_iter):
        if fabs(t_out - t_in) <= tol:
            break
        mid = 0.5 * (t_in + t_out)
        if mid == t_in or mid == t_out:
            break
        u = d1 + mid
        au = fabs(u)
        if au <= d2:
            lam1 = au
            lam2 = d2
        else:
            lam1 = d2
            lam2 = au
        m = _min_margin(lam1, lam2, th, va, &bi)
        if m >= 0.0:
            t_in = mid
        else:
            t_out = mid
    return t_in


cdef inline double _line_f(double b11, double b12, double b21, double b22,
                           double a11, double a12, double a21, double a22,
                           double t, int mode, double target) nogil:
    cdef double e11 = b11 + t * a11
    cdef double e12 = b12 + t * a12
    cdef double e21 = b21 + t * a21
    cdef double e22 = b22 + t * a22
    cdef double l1, l2
    if mode == 1:
        return fabs(e11 * e22 - e12 * e21) - target
    _sv2(e11, e12, e21, e22, &l1, &l2)
    return l2 - target


def bisect_line_root(base, dirn, double t_lo, double t_hi, int mode,
                     double target, double tol, int max_iter):
    """Root of lam2 - target (mode 0) or |det| - target (mode 1) along
    the matrix line base + t*dirn; endpoints must straddle the root."""
    cdef double[::1] b = np.ascontiguousarray(base, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(dirn, dtype=np.float64)
    cdef double b11 = b[0], b12 = b[1], b21 = b[2], b22 = b[3]
    cdef double a11 = a[0], a12 = a[1], a21 = a[2], a22 = a[3]
    cdef double f_lo, f_hi, f_mid, mid
    cdef int k
    f_lo = _line_f(b11, b12, b21, b22, a11, a12, a21, a22, t_lo, mode, target)
    if f_lo == 0.0:
        return t_lo
    f_hi = _line_f(b11, b12, b21, b22, a11, a12, a21, a22, t_hi, mode, target)
    if f_hi == 0.0:
        return t_hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError("bisect_line_root: endpoint values have the same sign")
    for k in range(max_iter):
        if fabs(t_hi - t_lo) <= tol:
            break
        mid = 0.5 * (t_lo + t_hi)
        if mid == t_lo or mid == t_hi:
            break
        f_mid = _line_f(b11, b12, b21, b22, a11, a12, a21, a22, mid, mode, target)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            t_lo = mid
            f_lo = f_mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)
