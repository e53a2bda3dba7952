"""Compiled vs pure-Python kernel agreement.

The compiled extension must be a drop-in replacement: every kernel has to
return bit-identical results, because classification margins and laminate
certificates are compared byte-for-byte across runs and machines.
"""

import numpy as np
import pytest

from isohull import KSet
from isohull._backend import HAVE_COMPILED, get_backend, use_backend
import isohull._backend as backend_mod

pytestmark = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled kernels not built")

pk = get_backend("python")
ck = get_backend("compiled") if HAVE_COMPILED else None

K_SETS = [
    KSet(((1.0, 2.0),)),
    KSet(((1.0, 4.0), (2.0, 3.0))),
    KSet(((0.5, 3.0), (1.0, 2.0), (2.5, 2.6))),
]


def _entries(rng, n, scale=3.0):
    return rng.uniform(-scale, scale, (n, 4))


def test_sv2_bitwise(rng):
    for row in _entries(rng, 2000):
        assert ck.sv2(*row) == pk.sv2(*row)


def test_sv2_extreme_inputs():
    cases = [
        (0.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 0.0, 1.0),
        (1e-300, 0.0, 0.0, 1e-300),
        (1e150, -1e150, 1e150, 1e150),
        (3.0, 4.0, -4.0, 3.0),
    ]
    for c in cases:
        assert ck.sv2(*c) == pk.sv2(*c)


def test_sv2_batch_bitwise(rng):
    e = _entries(rng, 5000)
    assert np.array_equal(ck.sv2_batch(e), pk.sv2_batch(e))


def test_min_margin_bitwise(rng):
    for k in K_SETS:
        th, va = k.envelope.arrays
        for _ in range(500):
            l2 = rng.uniform(0.0, 1.5 * k.b_max)
            l1 = rng.uniform(0.0, l2)
            assert ck.min_margin(l1, l2, th, va) == pk.min_margin(l1, l2, th, va)


def test_margin_batch_bitwise(rng):
    for k in K_SETS:
        th, va = k.envelope.arrays
        l2 = rng.uniform(0.0, 1.5 * k.b_max, 3000)
        l1 = rng.uniform(0.0, 1.0, 3000) * l2
        cm, ci = ck.margin_batch(l1, l2, th, va)
        pm, pi = pk.margin_batch(l1, l2, th, va)
        assert np.array_equal(cm, pm)
        assert np.array_equal(ci, pi)


def test_sigma_bitwise(rng):
    for k in K_SETS:
        th, va = k.envelope.arrays
        xs = np.concatenate([[0.0], rng.uniform(0.0, 2.0 * k.b_max, 800)])
        for x in xs[:50]:
            assert ck.sigma_at(float(x), th, va) == pk.sigma_at(float(x), th, va)
        assert np.array_equal(ck.sigma_batch(xs, th, va),
                              pk.sigma_batch(xs, th, va))


def test_h_theta_bitwise(rng):
    e = _entries(rng, 1500)
    for theta in (0.0, 0.5, 1.0, 2.0, 3.7):
        for row in e[:40]:
            assert ck.h_theta4(*row, theta) == pk.h_theta4(*row, theta)
        assert np.array_equal(ck.h_theta_batch(e, theta),
                              pk.h_theta_batch(e, theta))


def test_bisect_margin_e11_bitwise(rng):
    k = K_SETS[1]
    th, va = k.envelope.arrays
    for _ in range(200):
        d2 = rng.uniform(0.5, 4.0)
        d1 = rng.uniform(-0.2, 0.2)
        m0, _ = pk.min_margin(min(abs(d1), d2), max(abs(d1), d2), th, va)
        if m0 < 0.0:
            continue
        t_out = rng.uniform(4.0, 8.0)
        c = ck.bisect_margin_e11(d1, d2, 0.0, t_out, th, va, 1e-12, 200)
        p = pk.bisect_margin_e11(d1, d2, 0.0, t_out, th, va, 1e-12, 200)
        assert c == p


def test_bisect_line_root_bitwise(rng):
    for _ in range(200):
        base = rng.uniform(-1.0, 1.0, 4)
        dirn = rng.uniform(-1.0, 1.0, 4)
        # mode 0: lam2 grows without bound along any nonzero direction
        target = pk.sv2(*base)[1] + rng.uniform(0.5, 2.0)
        hi = 1.0
        while pk.sv2(*(base + hi * dirn))[1] < target and hi < 1e6:
            hi *= 2.0
        if pk.sv2(*(base + hi * dirn))[1] < target:
            continue
        c = ck.bisect_line_root(base, dirn, 0.0, hi, 0, target, 1e-12, 200)
        p = pk.bisect_line_root(base, dirn, 0.0, hi, 0, target, 1e-12, 200)
        assert c == p


def test_bisect_line_root_same_sign_raises():
    base = np.array([1.0, 0.0, 0.0, 1.0])
    dirn = np.array([1.0, 0.0, 0.0, 0.0])
    for kern in (pk, ck):
        with pytest.raises(ValueError):
            kern.bisect_line_root(base, dirn, 0.0, 1.0, 0, 100.0, 1e-12, 50)


def test_use_backend_swaps_attributes():
    assert backend_mod.BACKEND == "compiled"
    try:
        use_backend("python")
        assert backend_mod.BACKEND == "python"
        assert backend_mod.sv2 is pk.sv2
    finally:
        use_backend("compiled")
    assert backend_mod.sv2 is ck.sv2
    assert backend_mod.BACKEND == "compiled"


def test_get_backend_rejects_unknown():
    with pytest.raises(ValueError):
        get_backend("fortran")
