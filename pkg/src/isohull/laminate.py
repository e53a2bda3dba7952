"""Laminate certificates: constructive hull membership with verification.

A matrix xi lies in the rank-one convex hull of the isotropic set described
by K iff it is the barycenter of a finite *laminate*: a binary tree whose
nodes split along rank-one directions and whose leaves have singular values
in K.  This module builds such trees constructively and verifies them
independently.

Construction outline (all internal work happens on nonnegative diagonal
matrices; general matrices are reduced to that case by exact sign flips /
axis swaps when diagonal, or by an orthogonal factorization otherwise, and
the resulting subtree is conjugated back):

* interior matrices split along e1 (x) e1, moving the first diagonal entry
  in both directions until the hull boundary is hit (margin bisection);
* boundary matrices are *reduced*: the breakpoint theta-bar attaining the
  zero margin selects one or two active points of K
  (:func:`reduce_boundary`), and the problem drops to the hull of those
  points alone;
* in a one-point hull {lam2 <= b, lam1*lam2 <= a*b}, matrices with the
  product constraint tight move along the determinant-preserving rank-one
  direction until lam2 = b, matrices with lam2 = b split the smaller
  diagonal entry to +-a (both endpoints land on K), and interior matrices
  split the first entry to +-min(b, a*b/other);
* in a two-point hull with an interior active breakpoint, the third
  rank-one direction (which freezes lam1*lam2 + theta-bar*(lam2 - lam1))
  is followed to lam2 = b1 on one side and to lam1*lam2 = a2*b2 on the
  other; the second endpoint has singular values exactly (a2, b2) because
  the frozen combination also pins lam2 - lam1 there.

Splits store the weight w of the ``minus`` child:
``matrix = w * minus.matrix + (1 - w) * plus.matrix`` with
``minus.matrix - plus.matrix`` of rank one; for a split along direction N
with parameters t1 < 0 < t2 the minus child is ``matrix + t2*N``,
the plus child is ``matrix + t1*N`` and w = -t1/(t2 - t1).

Certificates serialize to JSON as nested records
``{"matrix": [...], "weight": w, "minus": ..., "plus": ...}`` /
``{"leaf_matrix": [...], "matched_point": [a, b]}`` and round-trip
bit-exactly (floats are written in shortest round-trip form).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace

from . import _backend
from .envelope import KSet
from .mat2 import (
    Mat2,
    SVPair,
    det_preserving_direction,
    isotropic_factorize,
    singular_values,
    third_constraint_direction,
)

_E11 = Mat2(1.0, 0.0, 0.0, 0.0)
_E22 = Mat2(0.0, 0.0, 0.0, 1.0)
_SWAP = Mat2(0.0, 1.0, 1.0, 0.0)
_MAX_DOUBLINGS = 60


class LaminateError(Exception):
    """Base class for laminate construction/verification failures."""


class OutsideHullError(LaminateError):
    """The matrix to decompose is outside the hull."""


class DepthExceededError(LaminateError):
    """Construction exceeded the configured tree depth."""


class BracketFailureError(LaminateError):
    """A bisection bracket could not be established."""


class NoActivePointError(LaminateError):
    """No K point is active for the boundary matrix (should not happen
    for genuine boundary points; indicates corrupted input)."""


class HypothesesViolatedError(LaminateError):
    """A structural hypothesis of a reduction step failed numerically."""


@dataclass(frozen=True)
class DecomposeConfig:
    """Tolerances and limits for the laminate construction.

    margin_tol  hull-membership tolerance (same role as in classify)
    leaf_tol    singular-value distance below which a node becomes a leaf
    bisect_tol  bracket width at which bisections stop
    max_iter    iteration cap per bisection
    max_depth   tree depth cap

    Distance-like tolerances are applied relative to max(1, scale of K),
    so the defaults behave uniformly for small and large singular values.
    """

    margin_tol: float = 1e-9
    leaf_tol: float = 1e-7
    bisect_tol: float = 1e-12
    max_iter: int = 200
    max_depth: int = 16

    def tight_tol(self, scale):
        # slack under which a boundary constraint counts as exactly active;
        # kept a decade under leaf_tol so tight nodes resolve to leaves
        return 10.0 * self.margin_tol * max(1.0, scale)

    def leaf_dist(self, scale):
        return self.leaf_tol * max(1.0, scale)


@dataclass(frozen=True)
class Leaf:
    """Terminal node: matrix with singular values at ``matched_point``."""

    matrix: Mat2
    matched_point: tuple


@dataclass(frozen=True)
class Split:
    """Internal node: rank-one convex combination of two children."""

    matrix: Mat2
    weight: float
    minus: object
    plus: object


class ReductionKind(enum.Enum):
    """Which envelope breakpoint is active for a boundary matrix."""

    THETA_ZERO = "theta_zero"
    THETA_INTERIOR = "theta_interior"
    THETA_MAX = "theta_max"


@dataclass(frozen=True)
class ReductionCase:
    """Active breakpoint and active K point(s) of a boundary matrix.

    ``active`` holds one point for the endpoint cases and two points
    (larger-slope first) for an interior breakpoint.
    """

    kind: ReductionKind
    theta: float
    active: tuple


# ---------------------------------------------------------------------------
# tree utilities


def iter_leaves(tree):
    """Yield the leaves of a laminate tree, left (minus) first."""
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.append(node.plus)
            stack.append(node.minus)


def leaf_weights(tree):
    """List of (weight, leaf) pairs; weights are the products of split
    weights along the root-leaf paths and sum to 1."""
    out = []

    def rec(node, w):
        if isinstance(node, Leaf):
            out.append((w, node))
        else:
            rec(node.minus, w * node.weight)
            rec(node.plus, w * (1.0 - node.weight))

    rec(tree, 1.0)
    return out


def tree_depth(tree):
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.minus), tree_depth(tree.plus))


def _map_tree(node, f):
    if isinstance(node, Leaf):
        return Leaf(f(node.matrix), node.matched_point)
    return Split(f(node.matrix), node.weight,
                 _map_tree(node.minus, f), _map_tree(node.plus, f))


def _conjugate(tree, left, right, root_matrix):
    """Apply M -> left @ M @ right to every node and pin the root matrix.

    Left/right are invertible, so rank-one differences stay rank one and
    barycenters are preserved; the root is replaced by the exact original
    to absorb the factorization's rounding.
    """
    mapped = _map_tree(tree, lambda m: left @ m @ right)
    return replace(mapped, matrix=root_matrix)


# ---------------------------------------------------------------------------
# scalar helpers on diagonal matrices


def _sv_sorted(d1, d2):
    a1, a2 = abs(d1), abs(d2)
    return (a1, a2) if a1 <= a2 else (a2, a1)


def _margin_sv(x, y, th, va):
    m, idx = _backend.min_margin(x, y, th, va)
    return float(m), int(idx)


def _nearest_point(x, y, points):
    best = None
    bd = math.inf
    for p in points:
        d = math.hypot(x - p[0], y - p[1])
        if d < bd:
            bd = d
            best = p
    return best, bd


def _split_node(matrix, direction, t1, t2, build_minus, build_plus):
    """Assemble a split with t1 < 0 < t2 along ``direction``."""
    if not (t1 < 0.0 < t2):
        raise BracketFailureError(
            f"split parameters do not straddle 0: t1={t1}, t2={t2}")
    w = -t1 / (t2 - t1)
    minus = build_minus(matrix + t2 * direction)
    plus = build_plus(matrix + t1 * direction)
    return Split(matrix, w, minus, plus)


def _expand_e11_root(d1, d2, sign, th, va, cfg):
    """Parameter t of the hull boundary along diag(d1 + t, d2), t on the
    ``sign`` side; the start point (t = 0) lies strictly inside."""
    span = max(1.0, float(th[-1]))
    t_prev = 0.0
    t = sign * span
    for _ in range(_MAX_DOUBLINGS):
        u = d1 + t
        x, y = _sv_sorted(u, d2)
        m, _ = _backend.min_margin(x, y, th, va)
        if m < 0.0:
            return _backend.bisect_margin_e11(
                d1, d2, t_prev, t, th, va, cfg.bisect_tol, cfg.max_iter)
        if m == 0.0:
            return t  # exact boundary hit
        t_prev = t
        t *= 2.0
    raise BracketFailureError(
        f"no hull exit along e1xe1 from diag({d1}, {d2}) (sign {sign:+d})")


def _line_exit(base: Mat2, direction: Mat2, sign, mode, target, start_val, cfg,
               scale):
    """Root of lam2 - target (mode 0) or |det| - target (mode 1) along
    base + t*direction on the ``sign`` side; start value is below target."""
    b4 = base.as_flat()
    d4 = direction.as_flat()

    def f(t):
        e = [b4[i] + t * d4[i] for i in range(4)]
        if mode == 1:
            return abs(e[0] * e[3] - e[1] * e[2]) - target
        _, lam2 = _backend.sv2(*e)
        return lam2 - target

    if start_val >= 0.0:
        raise BracketFailureError("line exit search started past the target")
    span = max(1.0, scale)
    t_prev = 0.0
    t = sign * span
    for _ in range(_MAX_DOUBLINGS):
        ft = f(t)
        if ft == 0.0:
            return t
        if ft > 0.0:
            return _backend.bisect_line_root(
                b4, d4, t_prev, t, mode, target, cfg.bisect_tol, cfg.max_iter)
        t_prev = t
        t *= 2.0
    raise BracketFailureError("no exit found along the rank-one line")


# ---------------------------------------------------------------------------
# one-point hulls


def one_point_decompose(xi: Mat2, point, cfg: DecomposeConfig = None):
    """Laminate of xi within the hull of a single K point (a, b).

    The hull is {lam2 <= b, lam1*lam2 <= a*b}; raises OutsideHullError when
    xi violates it beyond tolerance.
    """
    cfg = cfg or DecomposeConfig()
    a, b = float(point[0]), float(point[1])
    sv = singular_values(xi)
    if sv.lam2 > b + cfg.tight_tol(b) or \
            sv.lam1 * sv.lam2 > a * b + cfg.tight_tol(a * b):
        raise OutsideHullError(
            f"singular values {sv.as_tuple()} violate the hull of ({a}, {b})")
    return _one_point_node(xi, (a, b), cfg, 0)


def _one_point_node(xi: Mat2, p, cfg, depth):
    if depth > cfg.max_depth:
        raise DepthExceededError(f"depth {depth} exceeds {cfg.max_depth}")
    a, b = p
    sv = singular_values(xi)
    if math.hypot(sv.lam1 - a, sv.lam2 - b) <= cfg.leaf_dist(b):
        return Leaf(xi, p)
    if not xi.is_diagonal:
        fact = isotropic_factorize(xi)
        d = Mat2.diag(fact.sv.lam1, fact.sv.lam2)
        sub = _one_point_node(d, p, cfg, depth)
        return _conjugate(sub, fact.left.T, fact.right.T, xi)
    if xi.m11 < 0.0 or xi.m22 < 0.0:
        s1 = -1.0 if xi.m11 < 0.0 else 1.0
        s2 = -1.0 if xi.m22 < 0.0 else 1.0
        s = Mat2.diag(s1, s2)
        sub = _one_point_diag(s @ xi, p, cfg, depth)
        return _conjugate(sub, s, Mat2.identity(), xi)
    return _one_point_diag(xi, p, cfg, depth)


def _one_point_diag(d: Mat2, p, cfg, depth):
    """Nonnegative diagonal matrix inside the hull of the single point p."""
    a, b = p
    d1, d2 = d.m11, d.m22
    x, y = _sv_sorted(d1, d2)
    c_top = b - y              # slack of lam2 <= b
    c_prod = a * b - d1 * d2   # slack of lam1*lam2 <= a*b

    if c_prod <= cfg.tight_tol(a * b):
        # product tight: slide along the det-preserving rank-one direction
        # until lam2 = b; there lam1 = det/b = a up to the product slack.
        if x <= 0.0:
            raise BracketFailureError(
                "product-tight matrix with vanishing singular value")
        if d1 > d2:
            swapped = Mat2.diag(d2, d1)
            sub = _one_point_diag(swapped, p, cfg, depth)
            return _conjugate(sub, _SWAP, _SWAP, d)
        z = det_preserving_direction(SVPair(d1, d2))
        f0 = y - b
        t2 = _line_exit(d, z, +1, 0, b, f0, cfg, b)
        t1 = _line_exit(d, z, -1, 0, b, f0, cfg, b)
        return _split_node(d, z, t1, t2,
                           lambda m: _one_point_node(m, p, cfg, depth + 1),
                           lambda m: _one_point_node(m, p, cfg, depth + 1))

    if c_top <= cfg.tight_tol(b):
        # lam2 = b tight: split the smaller diagonal entry to +-a; both
        # children have singular values (a, y) with y = b up to slack.
        if x > a + 4.0 * cfg.tight_tol(max(a, 1.0)):
            raise HypothesesViolatedError(
                f"lam1={x} exceeds a={a} on the lam2=b face")
        if d1 <= d2:
            axis, small = _E11, d1
        else:
            axis, small = _E22, d2
        t2 = a - small
        t1 = -a - small
        return _split_node(d, axis, t1, t2,
                           lambda m: _one_point_node(m, p, cfg, depth + 1),
                           lambda m: _one_point_node(m, p, cfg, depth + 1))

    # interior of the one-point hull: move the first diagonal entry to the
    # faces +-r where r = min(b, a*b/d2) is the largest admissible magnitude
    r = b if d2 == 0.0 else min(b, a * b / d2)
    t2 = r - d1
    t1 = -r - d1
    return _split_node(d, _E11, t1, t2,
                       lambda m: _one_point_node(m, p, cfg, depth + 1),
                       lambda m: _one_point_node(m, p, cfg, depth + 1))


# ---------------------------------------------------------------------------
# two-point hulls


def two_point_decompose(xi: Mat2, point1, point2, cfg: DecomposeConfig = None):
    """Laminate of xi within the hull of two K points.

    The points may be given in either order; raises OutsideHullError when
    xi is outside their joint hull.
    """
    cfg = cfg or DecomposeConfig()
    pa = (float(point1[0]), float(point1[1]))
    pb = (float(point2[0]), float(point2[1]))
    if pa == pb:
        return one_point_decompose(xi, pa, cfg)
    pair = KSet((pa, pb))
    th, va = pair.envelope.arrays
    sv = singular_values(xi)
    m, _ = _backend.min_margin(sv.lam1, sv.lam2, th, va)
    if m < -cfg.tight_tol(float(va.max())):
        raise OutsideHullError(
            f"singular values {sv.as_tuple()} are outside the hull of "
            f"{pa} and {pb} (margin {m:.3e})")
    return _two_point_node(xi, pa, pb, cfg, 0)


def _dominant_route(pa, pb):
    """Which single point's hull equals the pair hull, if any.

    Returns the dominant point or None.  With slopes s = b - a and
    products q = a*b, the line of one point dominates the envelope of the
    pair on [0, max(b)] iff the crossing falls outside (0, max(b)); the
    pair hull then degenerates to that point's hull.
    """
    sa, sb = pa[1] - pa[0], pb[1] - pb[0]
    qa, qb = pa[0] * pa[1], pb[0] * pb[1]
    if sa == sb:
        return pa if qa >= qb else pb
    p1, p2 = (pa, pb) if sa > sb else (pb, pa)  # p1 carries the larger slope
    q1, q2 = p1[0] * p1[1], p2[0] * p2[1]
    if q1 >= q2:
        return p1  # steeper line already starts above
    th12 = (q2 - q1) / ((p1[1] - p1[0]) - (p2[1] - p2[0]))
    if th12 >= max(p1[1], p2[1]):
        return p2  # flatter line still above at the domain end
    return None


def _two_point_node(xi: Mat2, pa, pb, cfg, depth):
    if depth > cfg.max_depth:
        raise DepthExceededError(f"depth {depth} exceeds {cfg.max_depth}")
    sv = singular_values(xi)
    near, dist = _nearest_point(sv.lam1, sv.lam2, (pa, pb))
    if dist <= cfg.leaf_dist(max(pa[1], pb[1])):
        return Leaf(xi, near)
    dom = _dominant_route(pa, pb)
    if dom is not None:
        return _one_point_node(xi, dom, cfg, depth)
    if not xi.is_diagonal:
        fact = isotropic_factorize(xi)
        d = Mat2.diag(fact.sv.lam1, fact.sv.lam2)
        sub = _two_point_node(d, pa, pb, cfg, depth)
        return _conjugate(sub, fact.left.T, fact.right.T, xi)
    if xi.m11 < 0.0 or xi.m22 < 0.0:
        s = Mat2.diag(-1.0 if xi.m11 < 0.0 else 1.0,
                      -1.0 if xi.m22 < 0.0 else 1.0)
        sub = _two_point_diag(s @ xi, pa, pb, cfg, depth)
        return _conjugate(sub, s, Mat2.identity(), xi)
    return _two_point_diag(xi, pa, pb, cfg, depth)


def _two_point_diag(d: Mat2, pa, pb, cfg, depth):
    """Nonnegative diagonal matrix in a genuinely two-point hull."""
    # label by slope: p1 steeper (larger b), p2 flatter (larger product);
    # both orderings are implied by the non-degeneracy of the pair
    p1, p2 = (pa, pb) if pa[1] - pa[0] > pb[1] - pb[0] else (pb, pa)
    a1, b1 = p1
    a2, b2 = p2
    pair = KSet((p1, p2))
    env = pair.envelope
    th, va = env.arrays
    if len(env.slopes) != 2:
        return _one_point_node(d, env.sources[0], cfg, depth)
    if not (a1 < a2 and a1 * b1 < a2 * b2 and b2 < b1):
        raise HypothesesViolatedError(
            f"pair {p1}, {p2} lacks the two-point structure")

    d1, d2 = d.m11, d.m22
    x, y = _sv_sorted(d1, d2)
    m, idx = _margin_sv(x, y, th, va)

    if m > cfg.margin_tol:
        # interior of the pair hull: same e1 (x) e1 split as the full
        # problem, but against the pair envelope
        t2 = _expand_e11_root(d1, d2, +1, th, va, cfg)
        t1 = _expand_e11_root(d1, d2, -1, th, va, cfg)
        return _split_node(d, _E11, t1, t2,
                           lambda mm: _two_point_node(mm, p1, p2, cfg, depth + 1),
                           lambda mm: _two_point_node(mm, p1, p2, cfg, depth + 1))

    if idx == 0:
        # product constraint a2*b2 active; the slide along the
        # det-preserving direction stays in the p2 hull throughout
        return _one_point_node(d, p2, cfg, depth)
    if idx == len(env.breakpoints) - 1:
        # lam2 = b1 active
        return _one_point_node(d, p1, cfg, depth)

    theta = env.breakpoints[idx]
    if b1 - y <= cfg.tight_tol(b1):
        # degenerate tie: already on the lam2 = b1 face
        return _one_point_node(d, p1, cfg, depth)
    if d1 > d2:
        sub = _two_point_diag(Mat2.diag(d2, d1), pa, pb, cfg, depth)
        return _conjugate(sub, _SWAP, _SWAP, d)
    if y - theta <= 0.0:
        raise HypothesesViolatedError(
            f"active theta {theta} reached lam2={y}; cannot form direction")

    # interior breakpoint: follow the direction freezing
    # lam1*lam2 + theta*(lam2 - lam1).  Toward t_minus, lam2 grows to b1;
    # toward t_plus, |det| grows to a2*b2 (reaching it exactly with
    # lam2 - lam1 = b2 - a2, i.e. singular values (a2, b2)).
    direction, t_minus, t_plus = third_constraint_direction(x, y, theta)
    b4 = d.as_flat()
    a4 = direction.as_flat()

    _, lam2_lo = _backend.sv2(b4[0] + t_minus * a4[0], b4[1] + t_minus * a4[1],
                              b4[2] + t_minus * a4[2], b4[3] + t_minus * a4[3])
    f_lo = lam2_lo - b1
    if f_lo <= 0.0:
        if f_lo > -cfg.tight_tol(b1):
            t1 = t_minus
        else:
            raise BracketFailureError(
                "lam2 never reaches b1 along the frozen-combination direction")
    else:
        t1 = _backend.bisect_line_root(b4, a4, t_minus, 0.0, 0, b1,
                                       cfg.bisect_tol, cfg.max_iter)

    e = [b4[i] + t_plus * a4[i] for i in range(4)]
    g_hi = abs(e[0] * e[3] - e[1] * e[2]) - a2 * b2
    if g_hi <= 0.0:
        if g_hi > -cfg.tight_tol(a2 * b2):
            t2 = t_plus
        else:
            raise BracketFailureError(
                "|det| never reaches a2*b2 along the frozen-combination direction")
    else:
        t2 = _backend.bisect_line_root(b4, a4, 0.0, t_plus, 1, a2 * b2,
                                       cfg.bisect_tol, cfg.max_iter)

    return _split_node(d, direction, t1, t2,
                       lambda mm: _one_point_node(mm, p2, cfg, depth + 1),
                       lambda mm: _one_point_node(mm, p1, cfg, depth + 1))


# ---------------------------------------------------------------------------
# boundary reduction and the general entry point


def _reduction_from_idx(x, y, k: KSet, idx, cfg) -> ReductionCase:
    env = k.envelope
    bps = env.breakpoints
    slack = cfg.tight_tol(max(y, 1.0))
    gap = y - x
    if idx == 0:
        src = env.sources[0]
        if src[1] - src[0] < gap - slack:
            raise NoActivePointError(
                f"no K point with product {env.intercepts[0]} and slope >= {gap}")
        return ReductionCase(ReductionKind.THETA_ZERO, bps[0], (src,))
    if idx == len(bps) - 1:
        src = env.sources[-1]
        if src[1] != k.b_max:
            raise NoActivePointError(
                "last envelope piece is not generated by a b_max point")
        if src[1] - src[0] > gap + slack:
            raise NoActivePointError(
                f"slope condition fails at theta = b_max for gap {gap}")
        return ReductionCase(ReductionKind.THETA_MAX, bps[-1], (src,))
    p_right = env.sources[idx]      # steeper piece, larger b
    p_left = env.sources[idx - 1]   # flatter piece, larger product
    s_left = env.slopes[idx - 1]
    s_right = env.slopes[idx]
    if not (s_left - slack <= gap <= s_right + slack):
        raise NoActivePointError(
            f"gap {gap} outside the subdifferential [{s_left}, {s_right}] "
            f"at theta = {bps[idx]}")
    return ReductionCase(ReductionKind.THETA_INTERIOR, bps[idx],
                         (p_right, p_left))


def reduce_boundary(xi: Mat2, k: KSet, cfg: DecomposeConfig = None) -> ReductionCase:
    """Active breakpoint and active K point(s) of a boundary matrix.

    The margin of xi must vanish within tolerance; the first breakpoint
    attaining it decides the case: theta = 0 activates the point behind
    the first envelope piece (maximal product), theta = b_max the point
    behind the last piece (which always carries b = b_max), and an
    interior breakpoint activates the two points whose lines cross there,
    returned steeper-first.
    """
    cfg = cfg or DecomposeConfig()
    sv = singular_values(xi)
    th, va = k.envelope.arrays
    m, idx = _margin_sv(sv.lam1, sv.lam2, th, va)
    scale = max(1.0, float(va.max()))
    if m < -cfg.tight_tol(scale):
        raise OutsideHullError(f"margin {m:.3e} < 0: not a hull member")
    if m > cfg.tight_tol(scale):
        raise LaminateError(
            f"margin {m:.3e} > 0: matrix is interior, not boundary")
    return _reduction_from_idx(sv.lam1, sv.lam2, k, idx, cfg)


def decompose(xi: Mat2, k: KSet, cfg: DecomposeConfig = None):
    """Laminate certificate for xi in the hull described by K.

    Raises OutsideHullError when the margin of xi is below -margin_tol.
    The returned tree has xi at the root (exactly), weights in (0, 1),
    rank-one differences at every split, and leaves matched to K points
    within leaf_tol.
    """
    cfg = cfg or DecomposeConfig()
    sv = singular_values(xi)
    th, va = k.envelope.arrays
    m, _ = _backend.min_margin(sv.lam1, sv.lam2, th, va)
    if m < -cfg.margin_tol * max(1.0, float(va.max())):
        raise OutsideHullError(
            f"singular values {sv.as_tuple()} have margin {m:.3e}")
    return _node(xi, k, cfg, 0)


def _node(xi: Mat2, k: KSet, cfg, depth):
    if depth > cfg.max_depth:
        raise DepthExceededError(f"depth {depth} exceeds {cfg.max_depth}")
    sv = singular_values(xi)
    near, dist = _nearest_point(sv.lam1, sv.lam2, k.points)
    if dist <= cfg.leaf_dist(k.b_max):
        return Leaf(xi, near)
    if not xi.is_diagonal:
        fact = isotropic_factorize(xi)
        d = Mat2.diag(fact.sv.lam1, fact.sv.lam2)
        sub = _node(d, k, cfg, depth)
        return _conjugate(sub, fact.left.T, fact.right.T, xi)
    if xi.m11 < 0.0 or xi.m22 < 0.0:
        s = Mat2.diag(-1.0 if xi.m11 < 0.0 else 1.0,
                      -1.0 if xi.m22 < 0.0 else 1.0)
        sub = _diag_node(s @ xi, k, cfg, depth)
        return _conjugate(sub, s, Mat2.identity(), xi)
    return _diag_node(xi, k, cfg, depth)


def _diag_node(d: Mat2, k: KSet, cfg, depth):
    """Nonnegative diagonal matrix inside the hull of K."""
    d1, d2 = d.m11, d.m22
    x, y = _sv_sorted(d1, d2)
    th, va = k.envelope.arrays
    m, idx = _margin_sv(x, y, th, va)

    if m > cfg.margin_tol:
        # interior: split the first diagonal entry out to the boundary
        t2 = _expand_e11_root(d1, d2, +1, th, va, cfg)
        t1 = _expand_e11_root(d1, d2, -1, th, va, cfg)
        return _split_node(d, _E11, t1, t2,
                           lambda mm: _node(mm, k, cfg, depth + 1),
                           lambda mm: _node(mm, k, cfg, depth + 1))

    red = _reduction_from_idx(x, y, k, idx, cfg)
    if red.kind is ReductionKind.THETA_INTERIOR:
        return _two_point_node(d, red.active[0], red.active[1], cfg, depth)
    return _one_point_node(d, red.active[0], cfg, depth)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of :func:`verify`; ``ok`` iff ``failures`` is empty.

    Residuals are reported relative to max(1, scale) of the quantity they
    check (barycenter and root residuals in Frobenius norm, leaf distance
    in singular-value space).
    """

    ok: bool
    n_leaves: int
    n_splits: int
    depth: int
    root_residual: float
    max_barycenter_residual: float
    max_rank_one_defect: float
    max_leaf_distance: float
    failures: tuple

    def to_dict(self):
        return {
            "ok": self.ok,
            "n_leaves": self.n_leaves,
            "n_splits": self.n_splits,
            "depth": self.depth,
            "root_residual": self.root_residual,
            "max_barycenter_residual": self.max_barycenter_residual,
            "max_rank_one_defect": self.max_rank_one_defect,
            "max_leaf_distance": self.max_leaf_distance,
            "failures": list(self.failures),
        }


def verify(tree, xi: Mat2, k: KSet, cfg: DecomposeConfig = None) -> VerifyReport:
    """Independently check a laminate certificate against xi and K.

    Walks the tree checking, per split: weight in (0, 1), barycenter
    consistency, rank-one difference of the children; per leaf: the
    matched point belongs to K and the leaf's singular values sit on it
    within leaf_tol; globally: root matrix equals xi and the depth stays
    within max_depth.  Uses only the singular value primitive -- none of
    the construction machinery.
    """
    cfg = cfg or DecomposeConfig()
    failures = []
    n_leaves = n_splits = 0
    max_bary = max_defect = max_leaf = 0.0
    depth_seen = 0

    root_resid = (tree.matrix - xi).norm / max(1.0, xi.norm)
    if root_resid > cfg.margin_tol:
        failures.append(f"root matrix differs from xi by {root_resid:.3e}")

    kpoints = set(k.points)
    stack = [(tree, 0)]
    while stack:
        node, dep = stack.pop()
        depth_seen = max(depth_seen, dep)
        if dep > cfg.max_depth:
            failures.append(f"depth {dep} exceeds max_depth {cfg.max_depth}")
        if isinstance(node, Leaf):
            n_leaves += 1
            p = tuple(node.matched_point)
            if p not in kpoints:
                failures.append(f"leaf matched to {p}, which is not in K")
                continue
            sv = singular_values(node.matrix)
            dist = math.hypot(sv.lam1 - p[0], sv.lam2 - p[1]) / max(1.0, p[1])
            max_leaf = max(max_leaf, dist)
            if dist > cfg.leaf_tol:
                failures.append(
                    f"leaf singular values {sv.as_tuple()} miss {p} by {dist:.3e}")
            continue
        n_splits += 1
        w = node.weight
        if not (0.0 < w < 1.0):
            failures.append(f"split weight {w} outside (0, 1)")
        bary = w * node.minus.matrix + (1.0 - w) * node.plus.matrix
        resid = (node.matrix - bary).norm / max(1.0, node.matrix.norm)
        max_bary = max(max_bary, resid)
        if resid > cfg.margin_tol:
            failures.append(f"barycenter residual {resid:.3e} at depth {dep}")
        diff = node.minus.matrix - node.plus.matrix
        if diff.norm == 0.0:
            failures.append(f"coincident children at depth {dep}")
        else:
            defect = abs(diff.det) / diff.norm_sq
            max_defect = max(max_defect, defect)
            if defect > cfg.margin_tol:
                failures.append(
                    f"children differ by a non-rank-one matrix "
                    f"(defect {defect:.3e}) at depth {dep}")
        stack.append((node.plus, dep + 1))
        stack.append((node.minus, dep + 1))

    return VerifyReport(
        ok=not failures,
        n_leaves=n_leaves,
        n_splits=n_splits,
        depth=depth_seen,
        root_residual=root_resid,
        max_barycenter_residual=max_bary,
        max_rank_one_defect=max_defect,
        max_leaf_distance=max_leaf,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# serialization


def tree_to_dict(tree):
    """Nested-record form of a laminate tree (JSON-ready)."""
    if isinstance(tree, Leaf):
        return {
            "leaf_matrix": list(tree.matrix.as_flat()),
            "matched_point": list(tree.matched_point),
        }
    return {
        "matrix": list(tree.matrix.as_flat()),
        "weight": tree.weight,
        "minus": tree_to_dict(tree.minus),
        "plus": tree_to_dict(tree.plus),
    }


def tree_from_dict(data):
    """Inverse of :func:`tree_to_dict`."""
    if "leaf_matrix" in data:
        return Leaf(Mat2.from_flat(data["leaf_matrix"]),
                    tuple(float(v) for v in data["matched_point"]))
    return Split(
        Mat2.from_flat(data["matrix"]),
        float(data["weight"]),
        tree_from_dict(data["minus"]),
        tree_from_dict(data["plus"]),
    )


def save_certificate(path, tree):
    """Write a certificate as JSON; floats use shortest round-trip form,
    so saving the same tree always produces identical bytes."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree_to_dict(tree), fh, indent=2)
        fh.write("\n")


def load_certificate(path):
    with open(path, encoding="utf-8") as fh:
        return tree_from_dict(json.load(fh))
