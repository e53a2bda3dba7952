"""Inner approximation families and the approximation property.

Shifting every point of K inward by delta,

    K_delta = {(a - delta, b - delta) : (a, b) in K},   0 < delta <= a_min/2,

produces matrix sets E_delta whose hulls exhaust the interior of the hull
of K as delta -> 0.  Three checkable conditions make this quantitative:

1. the hull of K_delta lies in the open interior of the hull of K;
2. every matrix with singular values in K_delta is exactly sqrt(2)*delta
   away from E in singular-value space (the shift is diagonal, so the
   nearest K point is the unshifted partner);
3. every matrix in the interior of the hull of K lies in the hull of
   K_delta for all sufficiently small delta.

:func:`check_condition1` and :func:`check_condition2` sample one family;
:func:`check_condition3` searches a delta grid for one interior matrix.
:func:`check_solvable` packages the classification into the verdict it
implies for gradient inclusions: differential inclusions with this
boundary gradient admit exact solutions iff the gradient sits in E or in
the open interior of the hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .envelope import KSet
from .hull import Region, classify
from .mat2 import Mat2

SQRT2 = math.sqrt(2.0)


class ApproxError(ValueError):
    """Base class for approximation-family input errors."""


class DeltaTooLargeError(ApproxError):
    """delta outside (0, a_min/2]."""


class NotInteriorError(ApproxError):
    """The matrix handed to the delta-star search is not interior."""


@dataclass(frozen=True)
class DeltaFamily:
    """A base K together with its inward shift by delta."""

    base: KSet
    delta: float
    shifted: KSet


def make_delta_family(k: KSet, delta) -> DeltaFamily:
    """Shift K inward by delta; requires 0 < delta <= a_min / 2."""
    delta = float(delta)
    if not (0.0 < delta <= k.a_min / 2.0):
        raise DeltaTooLargeError(
            f"delta must lie in (0, {k.a_min / 2.0}], got {delta}")
    shifted = KSet(tuple((a - delta, b - delta) for a, b in k.points))
    return DeltaFamily(k, delta, shifted)


@dataclass(frozen=True)
class ConditionReport:
    """Sampled evidence for one approximation condition."""

    condition: int
    passed: bool
    samples: int
    failures: tuple
    worst_margin: float = None
    bound: float = None
    max_distance: float = None
    tight: bool = None
    delta_star: float = None

    def to_dict(self):
        out = {"condition": self.condition, "passed": self.passed,
               "samples": self.samples, "failures": list(self.failures)}
        for key in ("worst_margin", "bound", "max_distance", "tight", "delta_star"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


def _sample_hull_svs(k: KSet, n, rng):
    """Rejection-sample singular value pairs uniformly from the hull of K."""
    th, va = k.envelope.arrays
    bmax = k.b_max
    out = np.empty((n, 2))
    have = 0
    while have < n:
        m = 4 * (n - have) + 16
        x = rng.uniform(0.0, bmax, m)
        y = rng.uniform(0.0, bmax, m)
        lo = np.minimum(x, y)
        hi = np.maximum(x, y)
        margins, _ = _backend.margin_batch(lo, hi, th, va)
        good = margins >= 0.0
        take = min(int(good.sum()), n - have)
        out[have:have + take, 0] = lo[good][:take]
        out[have:have + take, 1] = hi[good][:take]
        have += take
    return out


def _random_frames(n, rng):
    """Random rotation pairs (angles) for dressing singular values."""
    return rng.uniform(0.0, 2.0 * math.pi, (n, 2))


def matrix_from_sv(lam1, lam2, phi, psi):
    """R(phi) @ diag(lam1, lam2) @ R(psi): a matrix with the given
    singular values in a random orientation."""
    c1, s1 = math.cos(phi), math.sin(phi)
    c2, s2 = math.cos(psi), math.sin(psi)
    r1 = Mat2(c1, -s1, s1, c1)
    r2 = Mat2(c2, -s2, s2, c2)
    return r1 @ Mat2.diag(lam1, lam2) @ r2


def check_condition1(family: DeltaFamily, n_samples=1000, seed=0,
                     tol=1e-9) -> ConditionReport:
    """Sampled check that hull(K_delta) sits inside the open hull of K.

    Samples singular value pairs across the shifted hull (corners of
    K_delta included), dresses them in random orientations, and requires
    a strictly positive base margin for each.
    """
    rng = np.random.default_rng(seed)
    svs = _sample_hull_svs(family.shifted, n_samples, rng)
    svs = np.vstack([family.shifted.sv_array(), svs])
    th, va = family.base.envelope.arrays
    frames = _random_frames(svs.shape[0], rng)

    entries = np.empty((svs.shape[0], 4))
    for i in range(svs.shape[0]):
        m = matrix_from_sv(svs[i, 0], svs[i, 1], frames[i, 0], frames[i, 1])
        entries[i] = m.as_flat()
    dressed = _backend.sv2_batch(entries)
    margins, _ = _backend.margin_batch(
        np.ascontiguousarray(dressed[:, 0]),
        np.ascontiguousarray(dressed[:, 1]), th, va)

    bad = np.nonzero(margins <= tol)[0]
    failures = tuple(
        (float(svs[i, 0]), float(svs[i, 1]), float(margins[i]))
        for i in bad[:10])
    return ConditionReport(
        condition=1,
        passed=bad.size == 0,
        samples=int(svs.shape[0]),
        failures=failures,
        worst_margin=float(margins.min()),
    )


def check_condition2(family: DeltaFamily, n_samples=1000, seed=0,
                     tol=1e-9) -> ConditionReport:
    """Sampled check that E_delta keeps distance exactly sqrt(2)*delta from E.

    Every matrix with singular values exactly on K_delta must be
    sqrt(2)*delta from the nearest K point in singular value space; the
    report records the maximum observed distance and whether the bound is
    attained (it always is -- the shift is the same in both coordinates).
    """
    rng = np.random.default_rng(seed)
    pts = family.shifted.sv_array()
    base_pts = family.base.sv_array()
    idx = np.arange(n_samples) % pts.shape[0]
    frames = _random_frames(n_samples, rng)

    entries = np.empty((n_samples, 4))
    for i in range(n_samples):
        a, b = pts[idx[i]]
        m = matrix_from_sv(a, b, frames[i, 0], frames[i, 1])
        entries[i] = m.as_flat()
    sv = _backend.sv2_batch(entries)
    d2 = (sv[:, 0, None] - base_pts[None, :, 0]) ** 2 + \
         (sv[:, 1, None] - base_pts[None, :, 1]) ** 2
    dist = np.sqrt(np.min(d2, axis=1))

    bound = SQRT2 * family.delta
    bad = np.nonzero(np.abs(dist - bound) > tol)[0]
    failures = tuple(
        (float(pts[idx[i], 0]), float(pts[idx[i], 1]), float(dist[i]))
        for i in bad[:10])
    return ConditionReport(
        condition=2,
        passed=bad.size == 0,
        samples=n_samples,
        failures=failures,
        bound=float(bound),
        max_distance=float(dist.max()),
        tight=bool(dist.max() >= bound - 1e-6),
    )


def check_condition3(k: KSet, eta: Mat2, delta_grid, tol=1e-9) -> ConditionReport:
    """Largest grid delta whose shifted hull still contains eta.

    eta must be classified interior (margin > tol) -- raises
    NotInteriorError otherwise.  Grid entries above a_min/2 cannot form a
    family and are recorded as infeasible rather than raising.  Since the
    inward shift lowers each envelope intercept by at most
    delta*(a + b) <= 2*delta*b_max while leaving slopes unchanged, any
    interior eta is captured once delta <= margin / (2*b_max), so a grid
    reaching small enough values always yields delta_star > 0.
    """
    cls = classify(eta, k, tol)
    if cls.tag not in (Region.INTERIOR, Region.IN_E) or cls.margin <= tol:
        raise NotInteriorError(
            f"eta is {cls.tag.value} with margin {cls.margin:.3e}; "
            "the delta-star search needs an interior matrix")

    sv = cls.sv
    infeasible = []
    delta_star = None
    checked = 0
    for delta in sorted({float(dv) for dv in delta_grid}, reverse=True):
        if not (0.0 < delta <= k.a_min / 2.0):
            infeasible.append(delta)
            continue
        checked += 1
        fam = make_delta_family(k, delta)
        th, va = fam.shifted.envelope.arrays
        m, _ = _backend.min_margin(sv.lam1, sv.lam2, th, va)
        if m >= 0.0:
            delta_star = delta
            break
    return ConditionReport(
        condition=3,
        passed=delta_star is not None,
        samples=checked,
        failures=tuple(infeasible),
        delta_star=delta_star,
    )


@dataclass(frozen=True)
class SolvabilityVerdict:
    """Whether a gradient inclusion with this boundary gradient is exactly
    solvable, and why."""

    solvable: bool
    reason: str
    classification: object

    def to_dict(self):
        return {"solvable": self.solvable, "reason": self.reason,
                "tag": self.classification.tag.value,
                "margin": self.classification.margin}


def check_solvable(grad: Mat2, k: KSet, tol=1e-9) -> SolvabilityVerdict:
    """Solvability verdict for the gradient inclusion with boundary data
    x -> grad @ x: solvable iff grad is in E or strictly inside the hull.
    """
    cls = classify(grad, k, tol)
    if cls.tag is Region.IN_E:
        return SolvabilityVerdict(True, "gradient lies in E", cls)
    if cls.tag is Region.INTERIOR:
        return SolvabilityVerdict(True, "gradient lies in the open hull interior", cls)
    if cls.tag is Region.BOUNDARY:
        return SolvabilityVerdict(
            False, "gradient sits on the hull boundary outside E", cls)
    return SolvabilityVerdict(False, "gradient lies outside the hull", cls)
