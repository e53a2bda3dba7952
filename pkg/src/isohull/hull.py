"""Hull membership: margins, classification, and the rank-one convex gauges.

For a singular value set K the rank-one convex and polyconvex hulls of the
associated isotropic matrix set coincide and are cut out by the family of
constraints

    lam1*lam2 + theta*(lam2 - lam1) <= m(theta),   theta in [0, b_max],

where m is the envelope from :mod:`isohull.envelope`.  Because both sides
are affine in theta on each envelope piece, it suffices to test the
breakpoints of m; the *margin* of a matrix is the minimum slack over the
breakpoints, nonnegative exactly on the hull.

The functions H_theta(xi) = max{lam1*lam2 + theta*(lam2-lam1) - theta^2, 0}
are rank-one convex for every theta >= 0 and vanish on the hull of any K
with b_max <= theta; they are the separating gauges behind the outside
classification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .envelope import KSet
from .mat2 import Mat2, SVPair, singular_values

DEFAULT_TOL = 1e-9


class Region(enum.Enum):
    """Classification of a matrix relative to K and its hull."""

    IN_E = "InE"
    INTERIOR = "InteriorHull"
    BOUNDARY = "BoundaryHull"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class Classification:
    """Result of :func:`classify`.

    margin        minimum constraint slack over the envelope breakpoints
    argmin_theta  first breakpoint attaining the margin
    tie_thetas    all breakpoints attaining it within rounding
    sv            singular values of the classified matrix
    distance_to_k distance of sv to the nearest point of K
    """

    tag: Region
    margin: float
    argmin_theta: float
    tie_thetas: tuple
    sv: SVPair
    distance_to_k: float

    @property
    def tight_theta(self):
        """The active constraint parameter; meaningful on the boundary."""
        return self.argmin_theta if self.tag is Region.BOUNDARY else None


def _margin_idx(sv: SVPair, k: KSet):
    th, va = k.envelope.arrays
    m, idx = _backend.min_margin(sv.lam1, sv.lam2, th, va)
    return float(m), int(idx)


def hull_margin(xi: Mat2, k: KSet):
    """(margin, theta) of a matrix: minimum slack and where it is attained.

    The matrix lies in the hull iff margin >= 0; ties pick the smallest
    breakpoint.
    """
    sv = singular_values(xi)
    m, idx = _margin_idx(sv, k)
    return m, k.envelope.breakpoints[idx]


def sv_distance(xi: Mat2, k: KSet) -> float:
    """Euclidean distance of the singular value pair of xi to K.

    Zero exactly on the isotropic matrix set described by K.
    """
    sv = singular_values(xi)
    return min(math.hypot(sv.lam1 - a, sv.lam2 - b) for a, b in k.points)


def classify(xi: Mat2, k: KSet, tol: float = DEFAULT_TOL) -> Classification:
    """Classify a matrix against K and its rank-one convex hull.

    Order of precedence: distance to K within tol -> IN_E; margin > tol
    -> INTERIOR; |margin| <= tol -> BOUNDARY (with the active theta);
    otherwise OUTSIDE.
    """
    sv = singular_values(xi)
    dist = min(math.hypot(sv.lam1 - a, sv.lam2 - b) for a, b in k.points)
    th, va = k.envelope.arrays
    m, idx = _backend.min_margin(sv.lam1, sv.lam2, th, va)
    m = float(m)
    tie_tol = 1e-12 * max(1.0, float(np.max(np.abs(va))))
    p = sv.lam1 * sv.lam2
    d = sv.lam2 - sv.lam1
    ties = tuple(float(t) for t, v in zip(th, va) if v - (p + t * d) <= m + tie_tol)
    argmin_theta = float(th[idx])

    if dist <= tol:
        tag = Region.IN_E
    elif m > tol:
        tag = Region.INTERIOR
    elif m >= -tol:
        tag = Region.BOUNDARY
    else:
        tag = Region.OUTSIDE
    return Classification(tag, m, argmin_theta, ties, sv, dist)


def classify_sv_batch(l1s, l2s, k: KSet, tol: float = DEFAULT_TOL):
    """Classify many ordered singular value pairs at once.

    Parameters
    ----------
    l1s, l2s : arrays with 0 <= l1s <= l2s elementwise.

    Returns
    -------
    (codes, margins): codes is int8 with 0 = IN_E, 1 = INTERIOR,
    2 = BOUNDARY, 3 = OUTSIDE, following the same precedence as
    :func:`classify`.
    """
    l1s = np.ascontiguousarray(l1s, dtype=np.float64)
    l2s = np.ascontiguousarray(l2s, dtype=np.float64)
    th, va = k.envelope.arrays
    margins, _ = _backend.margin_batch(l1s, l2s, th, va)
    pts = k.sv_array()
    d2 = (l1s[:, None] - pts[None, :, 0]) ** 2 + (l2s[:, None] - pts[None, :, 1]) ** 2
    dist = np.sqrt(np.min(d2, axis=1))
    codes = np.full(l1s.shape[0], 3, dtype=np.int8)
    codes[np.abs(margins) <= tol] = 2
    codes[margins > tol] = 1
    codes[dist <= tol] = 0
    return codes, margins


def h_theta(xi: Mat2, theta: float) -> float:
    """The rank-one convex gauge max{lam1*lam2 + theta*(lam2-lam1) - theta^2, 0}.

    Nonnegative, vanishes on the hull of any K whose envelope lies below
    theta^2 at theta (in particular whenever theta >= b_max), and is
    positive on matrices outside every such hull.
    """
    theta = float(theta)
    if theta < 0.0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    return _backend.h_theta4(xi.m11, xi.m12, xi.m21, xi.m22, theta)
