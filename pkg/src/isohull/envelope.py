"""Singular-value sets and their piecewise-linear constraint envelopes.

A compact isotropic set of 2x2 matrices is described by a finite set
K = {(a_i, b_i)} of singular value pairs with 0 < a_i <= b_i.  Each point
contributes the affine function

    l_i(theta) = a_i*b_i + theta*(b_i - a_i)

and the envelope

    m(theta) = max_i l_i(theta),   theta in [0, b_max],

is the data from which everything else in the package is computed: the
hull membership margins, the upper boundary function

    sigma(x) = min over breakpoints theta of (theta*x + m(theta))/(x + theta),

and the laminate constructions.  m is convex and piecewise linear, its
value at b_max is exactly b_max^2 (the point with b = b_max contributes
a*b_max + b_max*(b_max - a)), and the minimum defining sigma is attained
at a breakpoint of m because the quotient is monotone in theta on each
linear piece.

This module contains:

* :class:`KSet` -- validated, canonically ordered singular value set;
* :class:`PLConvex` -- a convex piecewise-linear function with optional
  constant extension to the left and quadratic (theta^2) tail to the
  right, plus the K point generating each piece;
* :func:`m_envelope`, :func:`extend_envelope` -- envelope construction;
* :func:`subdifferential` -- subgradient interval of a PLConvex;
* :func:`sigma`, :func:`sigma_many` -- the boundary function;
* :func:`sigma_closed_form` -- explicit formulas for |K| <= 3.
"""

from __future__ import annotations

import bisect
import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend

# relative tolerance for the continuity of adjacent envelope pieces at a
# shared breakpoint (values come from the same pair of lines evaluated at
# their crossing, so the true defect is a few ulps)
_CONT_TOL = 1e-9


class KSetError(ValueError):
    """Base class for invalid singular-value-set inputs."""


class EmptyKError(KSetError):
    """K contains no points."""


class NonFiniteKError(KSetError):
    """K contains a NaN or infinite coordinate."""


class PointOutsideTError(KSetError):
    """A point of K violates 0 < a <= b."""


class NegativeXError(ValueError):
    """sigma evaluated at a negative abscissa."""


class DomainError(ValueError):
    """Piecewise-linear function evaluated outside its domain."""


class ClosedFormError(ValueError):
    """Base class for closed-form sigma failures."""


class UnsupportedCardinalityError(ClosedFormError):
    """No closed form is implemented for this |K|."""


class NotApplicableError(ClosedFormError):
    """The |K| = 3 closed form's structural hypotheses fail."""


@dataclass(frozen=True)
class KSet:
    """Finite set of singular value pairs (a, b), 0 < a <= b.

    Points are canonicalized to a sorted, duplicate-free tuple, so two
    KSets built from the same points in any order compare equal and hash
    alike.  The constraint envelope and its extension are built lazily and
    cached on the instance.
    """

    points: tuple

    def __post_init__(self):
        pts = []
        for p in self.points:
            pair = tuple(p)
            if len(pair) != 2:
                raise KSetError(f"K points must be pairs, got {pair!r}")
            a, b = float(pair[0]), float(pair[1])
            if not (math.isfinite(a) and math.isfinite(b)):
                raise NonFiniteKError(f"non-finite K point ({a!r}, {b!r})")
            if not (0.0 < a <= b):
                raise PointOutsideTError(
                    f"K point ({a}, {b}) violates 0 < a <= b")
            pts.append((a, b))
        if not pts:
            raise EmptyKError("K must contain at least one point")
        object.__setattr__(self, "points", tuple(sorted(set(pts))))

    @property
    def a_min(self):
        return min(p[0] for p in self.points)

    @property
    def b_max(self):
        return max(p[1] for p in self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def sv_array(self):
        """Points as an (n, 2) float64 array."""
        return np.array(self.points, dtype=np.float64)

    @cached_property
    def envelope(self):
        """m(theta) on [0, b_max] as a PLConvex."""
        return m_envelope(self)

    @cached_property
    def extended_envelope(self):
        """The envelope with constant-left / quadratic-right extensions."""
        return extend_envelope(self)


def validate_kset(points) -> KSet:
    """Validate and canonicalize an iterable of (a, b) pairs into a KSet."""
    return KSet(tuple(points))


@dataclass(frozen=True)
class Subdiff:
    """Closed subgradient interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty subdifferential interval ({self.lo}, {self.hi})")

    def __contains__(self, s):
        return self.lo <= s <= self.hi


@dataclass(frozen=True)
class PLConvex:
    """Convex piecewise-linear function with tracked generating points.

    Piece ``j`` is ``intercepts[j] + theta * slopes[j]`` on
    ``[breakpoints[j], breakpoints[j+1]]``; slopes are strictly increasing
    (convexity) and adjacent pieces agree at shared breakpoints.
    ``sources[j]`` is the K point whose line forms piece ``j`` (None when
    untracked).  With ``left_constant`` the function continues constantly
    to the left of the domain; with ``quad_tail`` it continues as theta^2
    to the right (the last breakpoint must then satisfy the tangency value
    m(b_max) = b_max^2, which holds for every valid K).

    Evaluation inside the domain takes the maximum of the piece at the
    located index and its neighbours, each computed as
    ``intercept + theta*slope``; since the function is the upper envelope
    of exactly these affine pieces, this reproduces the brute-force
    max-over-lines bit for bit.
    """

    breakpoints: tuple
    slopes: tuple
    intercepts: tuple
    sources: tuple
    left_constant: bool = False
    quad_tail: bool = False

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(t) for t in self.breakpoints))
        object.__setattr__(self, "slopes", tuple(float(s) for s in self.slopes))
        object.__setattr__(self, "intercepts", tuple(float(c) for c in self.intercepts))
        object.__setattr__(self, "sources", tuple(self.sources))
        n = len(self.slopes)
        if n == 0:
            raise ValueError("need at least one piece")
        if len(self.breakpoints) != n + 1 or len(self.intercepts) != n or len(self.sources) != n:
            raise ValueError("inconsistent piece array lengths")
        for j in range(n):
            if not self.breakpoints[j] < self.breakpoints[j + 1]:
                raise ValueError("breakpoints must be strictly increasing")
        for j in range(n - 1):
            if not self.slopes[j] < self.slopes[j + 1]:
                raise ValueError("slopes must be strictly increasing (convexity)")
            t = self.breakpoints[j + 1]
            vl = self.intercepts[j] + t * self.slopes[j]
            vr = self.intercepts[j + 1] + t * self.slopes[j + 1]
            if abs(vl - vr) > _CONT_TOL * max(1.0, abs(vl)):
                raise ValueError(f"pieces {j} and {j+1} disagree at theta={t}")
        if self.quad_tail:
            t = self.breakpoints[-1]
            v = self.intercepts[-1] + t * self.slopes[-1]
            if abs(v - t * t) > _CONT_TOL * max(1.0, t * t):
                raise ValueError("quadratic tail does not match the last piece value")

    @property
    def domain(self):
        return (self.breakpoints[0], self.breakpoints[-1])

    def value(self, theta):
        """Evaluate, honouring the configured extensions outside the domain."""
        theta = float(theta)
        bps = self.breakpoints
        n = len(self.slopes)
        if theta < bps[0]:
            if self.left_constant:
                return self.intercepts[0] + bps[0] * self.slopes[0]
            raise DomainError(f"theta={theta} below domain start {bps[0]}")
        if theta > bps[-1]:
            if self.quad_tail:
                return theta * theta
            raise DomainError(f"theta={theta} above domain end {bps[-1]}")
        j = bisect.bisect_right(bps, theta) - 1
        if j >= n:
            j = n - 1
        best = -math.inf
        for k in (j - 1, j, j + 1):
            if 0 <= k < n:
                v = self.intercepts[k] + theta * self.slopes[k]
                if v > best:
                    best = v
        return best

    def derivative_range(self, theta):
        """Subgradient interval (lo, hi) at theta; kinks are detected by
        exact float equality with a breakpoint."""
        theta = float(theta)
        bps = self.breakpoints
        n = len(self.slopes)
        if theta < bps[0]:
            if self.left_constant:
                return (0.0, 0.0)
            raise DomainError(f"theta={theta} below domain start {bps[0]}")
        if theta > bps[-1]:
            if self.quad_tail:
                return (2.0 * theta, 2.0 * theta)
            raise DomainError(f"theta={theta} above domain end {bps[-1]}")
        if theta == bps[0]:
            lo = 0.0 if self.left_constant else self.slopes[0]
            return (lo, self.slopes[0])
        if theta == bps[-1]:
            hi = 2.0 * theta if self.quad_tail else self.slopes[-1]
            return (self.slopes[-1], hi)
        j = bisect.bisect_right(bps, theta) - 1
        if j >= 1 and theta == bps[j]:
            return (self.slopes[j - 1], self.slopes[j])
        return (self.slopes[j], self.slopes[j])

    @cached_property
    def arrays(self):
        """(breakpoints, values) as aligned float64 arrays for the kernels."""
        th = np.array(self.breakpoints, dtype=np.float64)
        va = np.array([self.value(t) for t in self.breakpoints], dtype=np.float64)
        return th, va


def subdifferential(f: PLConvex, theta) -> Subdiff:
    """Subgradient interval of a convex piecewise-linear function."""
    lo, hi = f.derivative_range(theta)
    return Subdiff(lo, hi)


def _meet(l1, l2):
    # crossing abscissa of two lines (slope, intercept, source), slopes differ
    return (l1[1] - l2[1]) / (l2[0] - l1[0])


def m_envelope(k: KSet) -> PLConvex:
    """Upper envelope of the lines a*b + theta*(b - a) over [0, b_max].

    Standard increasing-slope scan: lines are sorted by slope (equal
    slopes keep the larger intercept), a kept line is removed when a new
    line meets the run-up line no later than the kept line does.  The
    scanned envelope is then clipped to [0, b_max] and each surviving
    piece remembers its generating K point.
    """
    lines = sorted(((b - a, a * b, (a, b)) for a, b in k.points),
                   key=lambda l: (l[0], l[1]))
    filtered = []
    for line in lines:
        if filtered and filtered[-1][0] == line[0]:
            if line[1] > filtered[-1][1]:
                filtered[-1] = line
        else:
            filtered.append(line)

    stack = []
    for line in filtered:
        while len(stack) >= 2 and _meet(stack[-2], line) <= _meet(stack[-2], stack[-1]):
            stack.pop()
        stack.append(line)

    bmax = k.b_max
    meets = [_meet(stack[i], stack[i + 1]) for i in range(len(stack) - 1)]
    bps = [0.0]
    slopes, intercepts, sources = [], [], []
    for i, (sl, ic, src) in enumerate(stack):
        start = meets[i - 1] if i > 0 else -math.inf
        end = meets[i] if i < len(meets) else math.inf
        lo = max(start, 0.0)
        hi = min(end, bmax)
        if hi <= lo:
            continue  # line never attains the max inside the domain
        if slopes and lo <= bps[-1]:
            continue  # zero-width sliver from meet rounding
        if slopes:
            bps.append(lo)
        slopes.append(sl)
        intercepts.append(ic)
        sources.append(src)
    bps.append(bmax)
    return PLConvex(tuple(bps), tuple(slopes), tuple(intercepts), tuple(sources))


def extend_envelope(k: KSet) -> PLConvex:
    """Envelope extended constantly left of 0 and as theta^2 right of b_max.

    The result is convex on all of R: the constant piece continues with
    slope 0 <= first slope, and at b_max the envelope value equals b_max^2
    with last slope <= 2*b_max, so the quadratic is a tangent continuation.
    """
    return dataclasses.replace(k.envelope, left_constant=True, quad_tail=True)


def sigma(env: PLConvex, x) -> float:
    """Largest admissible lam2 over matrices with lam1 = x.

    Evaluates min over the envelope breakpoints theta of
    (theta*x + m(theta))/(x + theta); at x = 0 the theta = 0 term is
    skipped (the quotient tends to +inf) and the minimum is b_max.
    """
    x = float(x)
    if x < 0.0:
        raise NegativeXError(f"sigma needs x >= 0, got {x}")
    th, va = env.arrays
    return _backend.sigma_at(x, th, va)


def sigma_many(env: PLConvex, xs):
    """Vectorized :func:`sigma` over an array of abscissae."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size and float(np.min(xs)) < 0.0:
        raise NegativeXError("sigma needs x >= 0")
    th, va = env.arrays
    return _backend.sigma_batch(np.ascontiguousarray(xs.ravel()), th, va)


def _cross_term(x, theta, product, slope):
    return (theta * x + product + theta * slope) / (x + theta)


def sigma_closed_form(k: KSet, x) -> float:
    """Explicit sigma for |K| <= 3.

    |K| = 1, K = {(a, b)}:      min{a*b/x, b}.

    |K| = 2, labelled a1 >= a2:
      b1 >= b2                  min{a1*b1/x, b1}           (first line wins)
      a1*b1 > a2*b2, b2 > b1    min{a1*b1/x, b2, crossing} (both lines active)
      otherwise                 min{a2*b2/x, b2}           (second line wins)

    where the crossing term evaluates (theta*x + m(theta))/(x + theta) at
    theta = (a1*b1 - a2*b2)/((b2 - a2) - (b1 - a1)).

    |K| = 3, labelled by strictly descending products a_i*b_i: requires
    b3 > max(b1, b2), b2 - a2 > b1 - a1, strictly increasing slopes and
    theta(1,2) < theta(1,3); then all three lines are active in that
    order and

        sigma = min{a1*b1/x, b3, crossing(1,2), crossing(2,3)}.

    Raises NotApplicableError when the |K| = 3 hypotheses fail and
    UnsupportedCardinalityError for |K| > 3.  Terms with x in the
    denominator are skipped at x = 0.
    """
    x = float(x)
    if x < 0.0:
        raise NegativeXError(f"sigma needs x >= 0, got {x}")
    pts = k.points
    n = len(pts)
    if n > 3:
        raise UnsupportedCardinalityError(f"no closed form for |K| = {n}")

    if n == 1:
        a, b = pts[0]
        cands = [b]
        if x > 0.0:
            cands.append(a * b / x)
        return min(cands)

    if n == 2:
        (a1, b1), (a2, b2) = sorted(pts, reverse=True)  # a1 >= a2
        if b1 >= b2:
            cands = [b1]
            if x > 0.0:
                cands.append(a1 * b1 / x)
            return min(cands)
        if a1 * b1 > a2 * b2:
            th = (a1 * b1 - a2 * b2) / ((b2 - a2) - (b1 - a1))
            cands = [b2, _cross_term(x, th, a1 * b1, b1 - a1)]
            if x > 0.0:
                cands.append(a1 * b1 / x)
            return min(cands)
        cands = [b2]
        if x > 0.0:
            cands.append(a2 * b2 / x)
        return min(cands)

    ordered = sorted(pts, key=lambda p: p[0] * p[1], reverse=True)
    (a1, b1), (a2, b2), (a3, b3) = ordered
    q1, q2, q3 = a1 * b1, a2 * b2, a3 * b3
    s1, s2, s3 = b1 - a1, b2 - a2, b3 - a3
    if not (q1 > q2 > q3):
        raise NotApplicableError("products are not strictly ordered")
    if not b3 > max(b1, b2):
        raise NotApplicableError("largest b does not sit on the smallest product")
    if not (s1 < s2 < s3):
        raise NotApplicableError("slopes b - a are not strictly increasing")
    th12 = (q1 - q2) / (s2 - s1)
    th13 = (q1 - q3) / (s3 - s1)
    th23 = (q2 - q3) / (s3 - s2)
    if not th12 < th13:
        raise NotApplicableError("middle line is never active")
    cands = [b3, _cross_term(x, th12, q1, s1), _cross_term(x, th23, q2, s2)]
    if x > 0.0:
        cands.append(q1 / x)
    return min(cands)
