"""Shared helpers for the test suite: random K sets, orthogonal frames,
and rejection sampling inside the hull."""

import math

import numpy as np
import pytest

from isohull import KSet, Mat2
from isohull import _backend
from isohull.approx import matrix_from_sv


def random_kset(rng, max_points=5, lo=0.05, hi=5.0):
    """A random valid K: n points with 0 < a <= b."""
    n = int(rng.integers(1, max_points + 1))
    pts = []
    for _ in range(n):
        a = rng.uniform(lo, hi)
        b = rng.uniform(a, hi)
        pts.append((a, b))
    return KSet(tuple(pts))


def random_orthogonal(rng, allow_reflection=True):
    """Random 2x2 orthogonal matrix as Mat2."""
    phi = rng.uniform(0.0, 2.0 * math.pi)
    c, s = math.cos(phi), math.sin(phi)
    if allow_reflection and rng.integers(0, 2):
        return Mat2(c, s, s, -c)
    return Mat2(c, -s, s, c)


def sample_hull_svs(rng, k, n, min_margin=1e-7):
    """n singular-value pairs strictly inside the hull of k (rejection)."""
    th, va = k.envelope.arrays
    out = np.empty((n, 2))
    got = 0
    while got < n:
        l2 = rng.uniform(0.0, k.b_max, 4 * n)
        l1 = rng.uniform(0.0, 1.0, 4 * n) * l2
        margins, _ = _backend.margin_batch(l1, l2, th, va)
        keep = np.nonzero(margins > min_margin)[0][: n - got]
        out[got: got + keep.size, 0] = l1[keep]
        out[got: got + keep.size, 1] = l2[keep]
        got += keep.size
    return out


def random_in_hull(rng, k, min_margin=1e-7):
    """One random matrix strictly inside the hull (random orbit frame)."""
    sv = sample_hull_svs(rng, k, 1, min_margin)[0]
    phi, psi = rng.uniform(0.0, 2.0 * math.pi, 2)
    return matrix_from_sv(sv[0], sv[1], phi, psi)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
