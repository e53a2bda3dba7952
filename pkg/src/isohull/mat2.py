"""2x2 matrix primitives for singular-value based hull computations.

This module contains:

* :class:`Mat2` -- an immutable 2x2 real matrix;
* :class:`SVPair` -- an ordered singular value pair (lam1 <= lam2);
* :func:`singular_values` -- closed-form singular values;
* :func:`isotropic_factorize` -- orthogonal factors left, right with
  left @ xi @ right = diag(lam1, lam2);
* :func:`rank_one_defect` -- scale-free distance of a matrix from the
  rank-one cone, |det| / max(frob^2, eps);
* :func:`det_preserving_direction` -- the rank-one direction tangent to
  the level set of the determinant at diag(lam1, lam2);
* :func:`third_constraint_direction` -- the rank-one direction that keeps
  lam1*lam2 + theta*(lam2 - lam1) constant for a fixed theta, with its
  admissible parameter range.

All directions are returned as concrete rank-one matrices; movements along
them preserve the constraint they are named after, which is what makes the
laminate construction exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _backend


class Mat2Error(ValueError):
    """Base class for matrix-level input errors."""


class NonFiniteMatrixError(Mat2Error):
    """A matrix entry is NaN or infinite."""


class DegenerateDirectionError(Mat2Error):
    """The requested direction is undefined for the given data."""


@dataclass(frozen=True)
class Mat2:
    """Immutable 2x2 real matrix with row-major entries m11, m12, m21, m22."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        for name in ("m11", "m12", "m21", "m22"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise NonFiniteMatrixError(f"matrix entry {name} is not finite: {v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def diag(cls, d1, d2):
        return cls(d1, 0.0, 0.0, d2)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_flat(cls, entries):
        e = list(entries)
        if len(e) != 4:
            raise Mat2Error(f"expected 4 entries, got {len(e)}")
        return cls(e[0], e[1], e[2], e[3])

    def as_flat(self):
        return (self.m11, self.m12, self.m21, self.m22)

    @property
    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def norm_sq(self):
        return self.m11 ** 2 + self.m12 ** 2 + self.m21 ** 2 + self.m22 ** 2

    @property
    def norm(self):
        return math.sqrt(self.norm_sq)

    @property
    def T(self):
        return Mat2(self.m11, self.m21, self.m12, self.m22)

    @property
    def is_diagonal(self):
        return self.m12 == 0.0 and self.m21 == 0.0

    def __add__(self, other):
        return Mat2(self.m11 + other.m11, self.m12 + other.m12,
                    self.m21 + other.m21, self.m22 + other.m22)

    def __sub__(self, other):
        return Mat2(self.m11 - other.m11, self.m12 - other.m12,
                    self.m21 - other.m21, self.m22 - other.m22)

    def __neg__(self):
        return Mat2(-self.m11, -self.m12, -self.m21, -self.m22)

    def __mul__(self, scalar):
        s = float(scalar)
        return Mat2(s * self.m11, s * self.m12, s * self.m21, s * self.m22)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return Mat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )


@dataclass(frozen=True)
class SVPair:
    """Ordered singular value pair, 0 <= lam1 <= lam2."""

    lam1: float
    lam2: float

    def __post_init__(self):
        object.__setattr__(self, "lam1", float(self.lam1))
        object.__setattr__(self, "lam2", float(self.lam2))
        if not (math.isfinite(self.lam1) and math.isfinite(self.lam2)):
            raise Mat2Error("singular values must be finite")
        if self.lam1 < 0.0 or self.lam1 > self.lam2:
            raise Mat2Error(f"need 0 <= lam1 <= lam2, got ({self.lam1}, {self.lam2})")

    def as_tuple(self):
        return (self.lam1, self.lam2)


@dataclass(frozen=True)
class IsoFactorization:
    """Orthogonal factors with left @ xi @ right = diag(sv.lam1, sv.lam2)."""

    left: Mat2
    right: Mat2
    sv: SVPair


def singular_values(xi: Mat2) -> SVPair:
    """Closed-form singular values of a 2x2 matrix.

    With n2 = |xi|_F^2 and d = |det xi|, the ordered values are

        lam2 = (sqrt(n2 + 2 d) + sqrt(n2 - 2 d)) / 2,
        lam1 = 2 d / (2 lam2),

    where the second radicand is clamped at 0 against rounding and lam1 is
    the rationalized form of (sqrt(n2 + 2d) - sqrt(n2 - 2d)) / 2, immune to
    the cancellation that hits the subtractive formula for near-conformal
    matrices.
    """
    lam1, lam2 = _backend.sv2(xi.m11, xi.m12, xi.m21, xi.m22)
    return SVPair(lam1, lam2)


def _rot(c, s):
    # counter-clockwise rotation [[c, -s], [s, c]]
    return Mat2(c, -s, s, c)


def isotropic_factorize(xi: Mat2) -> IsoFactorization:
    """Orthogonal left/right factors diagonalizing a 2x2 matrix.

    Returns factors with ``left @ xi @ right == diag(lam1, lam2)`` (smaller
    value first).  Factors are orthogonal but not necessarily rotations;
    the factorization is not unique and no branch is promised beyond the
    contract above.

    The construction is the closed-form rotation-angle method: writing
    E = (m11+m22)/2, F = (m11-m22)/2, G = (m21+m12)/2, H = (m21-m12)/2,
    the matrix equals R(beta) diag(w1, w2) R(gamma) with

        w1 = hypot(E, H) + hypot(F, G),   w2 = hypot(E, H) - hypot(F, G),
        beta  = (atan2(H, E) + atan2(G, F)) / 2,
        gamma = (atan2(H, E) - atan2(G, F)) / 2,

    and w1 = lam2 >= |w2| = lam1, sign(w2) = sign(det).  A swap and a sign
    flip then move the pair into the (lam1, lam2) diagonal position.
    """
    if xi.is_diagonal and 0.0 <= xi.m11 <= xi.m22:
        sv = SVPair(xi.m11, xi.m22)
        return IsoFactorization(Mat2.identity(), Mat2.identity(), sv)

    e = 0.5 * (xi.m11 + xi.m22)
    f = 0.5 * (xi.m11 - xi.m22)
    g = 0.5 * (xi.m21 + xi.m12)
    h = 0.5 * (xi.m21 - xi.m12)
    q1 = math.hypot(e, h)
    q2 = math.hypot(f, g)
    w2 = q1 - q2
    a1 = math.atan2(g, f)
    a2 = math.atan2(h, e)
    beta = 0.5 * (a2 + a1)
    gamma = 0.5 * (a2 - a1)

    # xi = R(beta) diag(w1, w2) R(gamma); move to diag(|w2|, w1):
    #   left  = diag(sgn, 1) P R(-beta),   right = R(-gamma) P,
    # with P the axis swap and sgn absorbing the sign of w2.
    sgn = -1.0 if w2 < 0.0 else 1.0
    cb, sb = math.cos(beta), math.sin(beta)
    cg, sg = math.cos(gamma), math.sin(gamma)
    left = Mat2(-sgn * sb, sgn * cb, cb, sb)
    right = Mat2(sg, cg, cg, -sg)
    sv = singular_values(xi)
    return IsoFactorization(left, right, sv)


def rank_one_defect(d: Mat2) -> float:
    """|det d| / max(|d|_F^2, tiny): zero iff d lies on the rank-one cone."""
    return abs(d.det) / max(d.norm_sq, 1e-300)


def det_preserving_direction(sv: SVPair) -> Mat2:
    """Rank-one direction along which |det| stays constant at diag(sv).

    For diag(lam1, lam2) with lam1 > 0 the direction is

        [[1, -lam2/lam1], [1, -lam2/lam1]],

    rank one by construction; det(diag + t * dir) = lam1*lam2 for every t.
    """
    if sv.lam1 <= 0.0:
        raise DegenerateDirectionError(
            "det-preserving direction undefined for lam1 = 0")
    r = sv.lam2 / sv.lam1
    return Mat2(1.0, -r, 1.0, -r)


def third_constraint_direction(x, y, theta_bar):
    """Rank-one direction keeping lam1*lam2 + theta_bar*(lam2-lam1) fixed.

    At diag(x, y) with 0 <= x <= y and 0 < theta_bar < y, the direction

        A = [[1, s], [-s, -s^2]],    s = sqrt((y - theta_bar)/(x + theta_bar)),

    is rank one, and along diag(x, y) + t A the combination
    lam1*lam2 + theta_bar*(lam2 - lam1) is constant on the admissible
    parameter range [t_minus, t_plus] with

        t_minus = -x*y*(x + theta_bar) / (theta_bar*(x + y)),
        t_plus  = (y - x)*(x + theta_bar) / (x + y).

    On [t_minus, t_plus] the determinant grows linearly while the gap
    lam2 - lam1 shrinks linearly, their theta_bar-combination cancelling
    exactly; at t_minus the determinant vanishes (lam1 = 0) and at t_plus
    the matrix is conformal (lam1 = lam2).

    Returns
    -------
    (A, t_minus, t_plus)
    """
    x = float(x)
    y = float(y)
    theta_bar = float(theta_bar)
    if not (0.0 <= x <= y):
        raise DegenerateDirectionError(f"need 0 <= x <= y, got ({x}, {y})")
    if not (0.0 < theta_bar <= y):
        raise DegenerateDirectionError(
            f"need 0 < theta_bar <= y, got theta_bar={theta_bar}, y={y}")
    s = math.sqrt((y - theta_bar) / (x + theta_bar))
    a = Mat2(1.0, s, -s, -s * s)
    t_minus = -x * y * (x + theta_bar) / (theta_bar * (x + y))
    t_plus = (y - x) * (x + theta_bar) / (x + y)
    return a, t_minus, t_plus
