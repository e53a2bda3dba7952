"""Pure-Python numerical kernels.

Reference implementation of the hot numerical loops; ``isohull._kernels_c``
is a compiled twin with identical semantics (same operations in the same
order).  ``isohull._backend`` picks whichever is available at import time.

Conventions shared by both backends:

* a 2x2 matrix is the entry quadruple (m11, m12, m21, m22), row-major;
* singular values are returned ordered, lam1 <= lam2;
* a piecewise-linear constraint envelope is passed as two aligned arrays
  ``thetas`` (ascending breakpoints) and ``vals`` (envelope values there);
* the hull margin of a matrix with singular values (lam1, lam2) is
  ``min_i vals[i] - (lam1*lam2 + thetas[i]*(lam2 - lam1))``.
"""

from __future__ import annotations

import math

import numpy as np


def sv2(m11, m12, m21, m22):
    """Singular values of a 2x2 matrix, closed form.

    Splits the matrix into its conformal part (e, h) and anticonformal
    part (f, g) and takes q1 = |(e,h)|, q2 = |(f,g)|; then lam2 = q1 + q2
    and lam1 = |q1 - q2|.  Algebraically this equals the textbook
    lam{1,2} = (sqrt(n2 + 2|det|) -/+ sqrt(n2 - 2|det|)) / 2 form, because
    (m11 + m22)^2 + (m12 - m21)^2 = n2 + 2 det and
    (m11 - m22)^2 + (m12 + m21)^2 = n2 - 2 det; unlike that form it never
    subtracts nearly equal quantities, so lam2 - lam1 keeps full precision
    near conformal matrices and lam1 keeps full absolute precision near
    rank-one matrices.

    Returns
    -------
    (lam1, lam2) with 0 <= lam1 <= lam2.
    """
    e = 0.5 * (m11 + m22)
    f = 0.5 * (m11 - m22)
    g = 0.5 * (m21 + m12)
    h = 0.5 * (m21 - m12)
    q1 = math.sqrt(e * e + h * h)
    q2 = math.sqrt(f * f + g * g)
    lam2 = q1 + q2
    lam1 = q1 - q2
    if lam1 < 0.0:
        lam1 = -lam1
    return lam1, lam2


def sv2_batch(entries):
    """Vectorized :func:`sv2`.

    Parameters
    ----------
    entries : (n, 4) float64 array of row-major matrix entries.

    Returns
    -------
    (n, 2) float64 array of ordered singular value pairs.
    """
    entries = np.asarray(entries, dtype=np.float64)
    m11, m12, m21, m22 = entries[:, 0], entries[:, 1], entries[:, 2], entries[:, 3]
    e = 0.5 * (m11 + m22)
    f = 0.5 * (m11 - m22)
    g = 0.5 * (m21 + m12)
    h = 0.5 * (m21 - m12)
    q1 = np.sqrt(e * e + h * h)
    q2 = np.sqrt(f * f + g * g)
    out = np.empty((entries.shape[0], 2), dtype=np.float64)
    np.abs(q1 - q2, out=out[:, 0])
    np.add(q1, q2, out=out[:, 1])
    return out


def min_margin(lam1, lam2, thetas, vals):
    """Hull margin of a singular value pair against an envelope.

    Returns ``(margin, idx)`` where ``idx`` is the index of the first
    breakpoint attaining the minimum.
    """
    p = lam1 * lam2
    d = lam2 - lam1
    best = math.inf
    bi = 0
    for i in range(len(thetas)):
        g = vals[i] - (p + thetas[i] * d)
        if g < best:
            best = g
            bi = i
    return best, bi


def margin_batch(l1s, l2s, thetas, vals):
    """Vectorized :func:`min_margin` over many singular value pairs."""
    l1s = np.asarray(l1s, dtype=np.float64)
    l2s = np.asarray(l2s, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    vals = np.asarray(vals, dtype=np.float64)
    n = l1s.shape[0]
    m = thetas.shape[0]
    margins = np.empty(n, dtype=np.float64)
    idxs = np.empty(n, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(m, 1))
    for s0 in range(0, n, chunk):
        s1 = min(n, s0 + chunk)
        p = (l1s[s0:s1] * l2s[s0:s1])[:, None]
        d = (l2s[s0:s1] - l1s[s0:s1])[:, None]
        g = vals[None, :] - (p + thetas[None, :] * d)
        idx = np.argmin(g, axis=1)  # first occurrence, matching min_margin
        margins[s0:s1] = g[np.arange(s1 - s0), idx]
        idxs[s0:s1] = idx
    return margins, idxs


def sigma_at(x, thetas, vals):
    """min over breakpoints of (theta*x + m(theta)) / (x + theta).

    Breakpoints with ``x + theta == 0`` (only theta = 0 when x = 0) are
    skipped; the quotient tends to +inf there.
    """
    best = math.inf
    for i in range(len(thetas)):
        den = x + thetas[i]
        if den <= 0.0:
            continue
        g = (thetas[i] * x + vals[i]) / den
        if g < best:
            best = g
    return best


def sigma_batch(xs, thetas, vals):
    """Vectorized :func:`sigma_at`."""
    xs = np.asarray(xs, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    vals = np.asarray(vals, dtype=np.float64)
    den = xs[:, None] + thetas[None, :]
    num = thetas[None, :] * xs[:, None] + vals[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.inf)
    return np.min(g, axis=1)


def h_theta4(m11, m12, m21, m22, theta):
    """max{lam1*lam2 + theta*(lam2 - lam1) - theta^2, 0} for one matrix."""
    lam1, lam2 = sv2(m11, m12, m21, m22)
    v = lam1 * lam2 + theta * (lam2 - lam1) - theta * theta
    return v if v > 0.0 else 0.0


def h_theta_batch(entries, theta):
    """Vectorized :func:`h_theta4`."""
    sv = sv2_batch(entries)
    v = sv[:, 0] * sv[:, 1] + theta * (sv[:, 1] - sv[:, 0]) - theta * theta
    return np.maximum(v, 0.0)


def bisect_margin_e11(d1, d2, t_in, t_out, thetas, vals, tol, max_iter):
    """Bisect ``t`` in the margin of diag(d1 + t, d2) down to a root.

    Caller guarantees ``margin(t_in) >= 0 > margin(t_out)`` and ``d2 >= 0``.
    Returns the in-hull endpoint of the final bracket (margin >= 0 there),
    so the produced child matrix never leaves the hull.
    """
    for _ in range(max_iter):
        if abs(t_out - t_in) <= tol:
            break
        mid = 0.5 * (t_in + t_out)
        if mid == t_in or mid == t_out:
            break
        u = d1 + mid
        au = abs(u)
        if au <= d2:
            lam1, lam2 = au, d2
        else:
            lam1, lam2 = d2, au
        m, _ = min_margin(lam1, lam2, thetas, vals)
        if m >= 0.0:
            t_in = mid
        else:
            t_out = mid
    return t_in


def bisect_line_root(base, dirn, t_lo, t_hi, mode, target, tol, max_iter):
    """Root of a scalar function along the matrix line base + t*dirn.

    mode 0: f(t) = lam2(base + t*dirn) - target
    mode 1: f(t) = |det(base + t*dirn)| - target   (= lam1*lam2 - target)

    Endpoints must straddle the root (a zero endpoint is returned as-is);
    raises ValueError when both endpoint values share a sign.
    """
    b11, b12, b21, b22 = base[0], base[1], base[2], base[3]
    a11, a12, a21, a22 = dirn[0], dirn[1], dirn[2], dirn[3]

    def f(t):
        e11 = b11 + t * a11
        e12 = b12 + t * a12
        e21 = b21 + t * a21
        e22 = b22 + t * a22
        if mode == 1:
            return abs(e11 * e22 - e12 * e21) - target
        _, lam2 = sv2(e11, e12, e21, e22)
        return lam2 - target

    f_lo = f(t_lo)
    if f_lo == 0.0:
        return t_lo
    f_hi = f(t_hi)
    if f_hi == 0.0:
        return t_hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError("bisect_line_root: endpoint values have the same sign")
    for _ in range(max_iter):
        if abs(t_hi - t_lo) <= tol:
            break
        mid = 0.5 * (t_lo + t_hi)
        if mid == t_lo or mid == t_hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            t_lo = mid
            f_lo = f_mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)
