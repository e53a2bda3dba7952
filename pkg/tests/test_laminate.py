"""Laminate construction and certificate verification tests."""

import dataclasses
import math

import numpy as np
import pytest

from isohull import (
    DecomposeConfig,
    DepthExceededError,
    KSet,
    LaminateError,
    Leaf,
    Mat2,
    OutsideHullError,
    Region,
    ReductionKind,
    Split,
    classify,
    decompose,
    hull_margin,
    iter_leaves,
    leaf_weights,
    load_certificate,
    one_point_decompose,
    rank_one_defect,
    reduce_boundary,
    save_certificate,
    sigma,
    singular_values,
    sv_distance,
    tree_depth,
    tree_from_dict,
    tree_to_dict,
    two_point_decompose,
    verify,
)
from conftest import random_in_hull, random_kset, random_orthogonal, sample_hull_svs

K12 = KSet(((1.0, 2.0),))
K43 = KSet(((1.0, 4.0), (2.0, 3.0)))


def _kink_xy():
    # on the interior-breakpoint facet of K43: x*y = 5, y - x = 2
    return math.sqrt(6.0) - 1.0, math.sqrt(6.0) + 1.0


# ------------------------------------------------------------ worked example

def test_worked_example_exact():
    xi = Mat2.diag(1.5, 1.0)
    tree = decompose(xi, K12)
    assert isinstance(tree, Split)
    assert tree.weight == 0.875
    assert tree.minus == Leaf(Mat2.diag(2.0, 1.0), (1.0, 2.0))
    assert tree.plus == Leaf(Mat2.diag(-2.0, 1.0), (1.0, 2.0))
    diff = tree.minus.matrix - tree.plus.matrix
    assert rank_one_defect(diff) == 0.0
    recon = tree.weight * tree.minus.matrix + (1.0 - tree.weight) * tree.plus.matrix
    assert recon == xi
    assert tree_depth(tree) == 1
    assert [w for w, _ in leaf_weights(tree)] == [0.875, 0.125]

    rep = verify(tree, xi, K12)
    assert rep.ok
    assert rep.n_leaves == 2 and rep.n_splits == 1
    assert rep.root_residual == 0.0
    assert rep.max_barycenter_residual == 0.0
    assert rep.max_rank_one_defect == 0.0
    assert rep.max_leaf_distance == 0.0


def test_e_point_is_a_leaf():
    tree = decompose(Mat2.diag(1.0, 2.0), K12)
    assert tree == Leaf(Mat2.diag(1.0, 2.0), (1.0, 2.0))


# ---------------------------------------------------------- boundary cases

def test_reduce_boundary_one_point():
    case = reduce_boundary(Mat2.diag(1.0, 2.0), K12)
    assert case.kind is ReductionKind.THETA_ZERO
    assert case.active == ((1.0, 2.0),)


def test_reduce_boundary_interior_breakpoint():
    x, y = _kink_xy()
    case = reduce_boundary(Mat2.diag(x, y), K43)
    assert case.kind is ReductionKind.THETA_INTERIOR
    assert case.theta == 1.0
    assert case.active == ((1.0, 4.0), (2.0, 3.0))  # larger slope first


def test_reduce_boundary_theta_max():
    case = reduce_boundary(Mat2.diag(0.5, 4.0), K43)
    assert case.kind is ReductionKind.THETA_MAX
    assert case.theta == 4.0
    assert case.active == ((1.0, 4.0),)


def test_reduce_boundary_rejects_off_boundary():
    with pytest.raises(LaminateError):
        reduce_boundary(Mat2.diag(1.0, 1.5), K12)  # interior
    with pytest.raises(OutsideHullError):
        reduce_boundary(Mat2.diag(2.0, 2.0), K12)


# ------------------------------------------------------- one-point hulls

def test_one_point_leaf():
    tree = one_point_decompose(Mat2.diag(1.0, 2.0), (1.0, 2.0))
    assert tree == Leaf(Mat2.diag(1.0, 2.0), (1.0, 2.0))


def test_one_point_lam2_tight_split_exact():
    tree = one_point_decompose(Mat2.diag(0.5, 2.0), (1.0, 2.0))
    assert isinstance(tree, Split)
    assert tree.weight == 0.75
    assert tree.minus.matrix == Mat2.diag(1.0, 2.0)
    assert tree.plus.matrix == Mat2.diag(-1.0, 2.0)


def test_one_point_product_tight_conformal():
    # lam1*lam2 = ab with lam2 < b: slide along the det-preserving line
    s = math.sqrt(2.0)
    xi = Mat2.diag(s, s)
    tree = one_point_decompose(xi, (1.0, 2.0))
    rep = verify(tree, xi, K12)
    assert rep.ok
    for leaf in iter_leaves(tree):
        sv = singular_values(leaf.matrix)
        assert abs(sv.lam1 - 1.0) < 1e-9 and abs(sv.lam2 - 2.0) < 1e-9


def test_one_point_interior():
    xi = Mat2.diag(0.5, 1.2)
    tree = one_point_decompose(xi, (1.0, 2.0))
    rep = verify(tree, xi, K12)
    assert rep.ok and rep.n_leaves == 4


def test_one_point_outside_raises():
    with pytest.raises(OutsideHullError):
        one_point_decompose(Mat2.diag(1.5, 2.1), (1.0, 2.0))


def test_one_point_membership_matches_inequalities(rng):
    # hull of a single point is exactly {lam2 <= b, lam1*lam2 <= ab}
    a, b = 1.0, 2.0
    for x in np.linspace(0.0, 3.0, 13):
        for y in np.linspace(x, 3.0, 9):
            inside = y <= b + 1e-12 and x * y <= a * b + 1e-12
            clearly_out = y > b + 1e-9 or x * y > a * b + 1e-9
            try:
                tree = one_point_decompose(Mat2.diag(x, y), (a, b))
            except OutsideHullError:
                assert not inside
                continue
            assert not clearly_out
            rep = verify(tree, Mat2.diag(x, y), K12)
            assert rep.ok


# ------------------------------------------------------- two-point hulls

def test_two_point_step1_split_exact():
    # lam2 = b1 tight: direct split into diag(+-a1, b1)
    tree = two_point_decompose(Mat2.diag(0.5, 4.0), (1.0, 4.0), (2.0, 3.0))
    assert isinstance(tree, Split)
    assert tree.weight == 0.75
    assert tree.minus.matrix == Mat2.diag(1.0, 4.0)
    assert tree.plus.matrix == Mat2.diag(-1.0, 4.0)


def test_two_point_third_constraint_children():
    # on the interior-breakpoint facet the split runs along the mixed
    # direction; one endpoint saturates lam2 = b1, the other |det| = a2*b2.
    # Combined with staying on the facet this pins the children exactly at
    # the two constraint points (1,4) and (2,3).
    x, y = _kink_xy()
    xi = Mat2.diag(x, y)
    tree = two_point_decompose(xi, (1.0, 4.0), (2.0, 3.0))
    assert isinstance(tree, Split)
    child_svs = sorted(
        (singular_values(n.matrix) for n in (tree.minus, tree.plus)),
        key=lambda s: s.lam2,
    )
    assert abs(child_svs[0].lam1 - 2.0) < 1e-10
    assert abs(child_svs[0].lam2 - 3.0) < 1e-10
    assert abs(child_svs[1].lam1 - 1.0) < 1e-10
    assert abs(child_svs[1].lam2 - 4.0) < 1e-10
    rep = verify(tree, xi, K43)
    assert rep.ok


def test_two_point_dominated_pair_behaves_like_one_point():
    # parallel constraint lines: the second point's hull contains the first's
    xi = Mat2.diag(1.0, 2.5)
    tree = two_point_decompose(xi, (1.0, 2.0), (2.0, 3.0))
    rep = verify(tree, xi, KSet(((2.0, 3.0),)))
    assert rep.ok
    for leaf in iter_leaves(tree):
        assert leaf.matched_point == (2.0, 3.0)


def test_two_point_outside_raises():
    with pytest.raises(OutsideHullError):
        two_point_decompose(Mat2.diag(3.0, 5.0), (1.0, 4.0), (2.0, 3.0))


def test_two_point_random_members(rng):
    pts = ((1.0, 4.0), (2.0, 3.0))
    svs = sample_hull_svs(rng, K43, 200)
    for l1, l2 in svs:
        xi = Mat2.diag(l1, l2)
        tree = two_point_decompose(xi, *pts)
        rep = verify(tree, xi, K43)
        assert rep.ok


# --------------------------------------------------------------- decompose

def test_decompose_random_in_hull(rng):
    for _ in range(400):
        k = random_kset(rng, max_points=5)
        xi = random_in_hull(rng, k)
        tree = decompose(xi, k)
        rep = verify(tree, xi, k)
        assert rep.ok, rep.failures
        assert rep.max_barycenter_residual <= 1e-9 * max(1.0, k.b_max ** 2)
        assert rep.max_rank_one_defect <= 1e-9
        assert rep.max_leaf_distance <= 1e-7 * max(1.0, k.b_max)


def test_decompose_completeness(rng):
    # OutsideHullError exactly when classify says Outside
    for _ in range(300):
        k = random_kset(rng, max_points=4)
        l2 = rng.uniform(0.0, 1.5 * k.b_max)
        l1 = rng.uniform(0.0, l2)
        xi = Mat2.diag(l1, l2)
        c = classify(xi, k)
        if abs(c.margin) <= 1e-8:
            continue  # skip the knife edge
        if c.tag is Region.OUTSIDE:
            with pytest.raises(OutsideHullError):
                decompose(xi, k)
        else:
            rep = verify(decompose(xi, k), xi, k)
            assert rep.ok


def test_decompose_depth_small_k(rng):
    for _ in range(300):
        k = random_kset(rng, max_points=2)
        xi = random_in_hull(rng, k)
        tree = decompose(xi, k)
        assert tree_depth(tree) <= 4
        assert verify(tree, xi, k).ok


def test_decompose_zero_lam1():
    for y, expect_boundary in ((1.5, False), (2.0, True)):
        xi = Mat2.diag(0.0, y)
        tree = decompose(xi, K12)
        rep = verify(tree, xi, K12)
        assert rep.ok
    # the boundary case at lam1 = 0 splits straight into diag(+-1, 2)
    tree = decompose(Mat2.diag(0.0, 2.0), K12)
    assert isinstance(tree, Split)
    assert tree.weight == 0.5
    assert {tree.minus.matrix, tree.plus.matrix} == \
        {Mat2.diag(1.0, 2.0), Mat2.diag(-1.0, 2.0)}


def test_decompose_full_orbit(rng):
    # non-diagonal inputs, both determinant signs: root is reproduced exactly
    for _ in range(100):
        k = random_kset(rng, max_points=3)
        xi = random_in_hull(rng, k)
        if rng.integers(0, 2):
            xi = Mat2(-xi.m11, xi.m12, -xi.m21, xi.m22)
        tree = decompose(xi, k)
        assert tree.matrix == xi
        assert verify(tree, xi, k).ok


def test_decompose_isotropy(rng):
    # conjugating the input yields a tree over the same singular values
    for _ in range(50):
        k = random_kset(rng, max_points=2)
        sv = sample_hull_svs(rng, k, 1)[0]
        base = Mat2.diag(sv[0], sv[1])
        q1, q2 = random_orthogonal(rng), random_orthogonal(rng)
        conj = q1 @ base @ q2

        t_base = decompose(base, k)
        t_conj = decompose(conj, k)
        assert verify(t_base, base, k).ok
        assert verify(t_conj, conj, k).ok

        def svs(tree):
            out = []

            def walk(n):
                s = singular_values(n.matrix)
                out.append((round(s.lam1, 8), round(s.lam2, 8)))
                if isinstance(n, Split):
                    walk(n.minus)
                    walk(n.plus)

            walk(tree)
            return out

        assert svs(t_base) == svs(t_conj)


def test_decompose_depth_cap():
    with pytest.raises(DepthExceededError):
        decompose(Mat2.diag(1.5, 1.0), K12, DecomposeConfig(max_depth=0))


def test_decompose_boundary_matrix(rng):
    x, y = _kink_xy()
    xi = Mat2.diag(x, y)
    rep = verify(decompose(xi, K43), xi, K43)
    assert rep.ok


# ------------------------------------------------------------------ verify

def _example_tree():
    return decompose(Mat2.diag(1.5, 1.0), K12)


def test_verify_rejects_tampered_weight():
    xi = Mat2.diag(1.5, 1.0)
    bad = dataclasses.replace(_example_tree(), weight=0.9)
    rep = verify(bad, xi, K12)
    assert not rep.ok
    # 0.9*diag(2,1) + 0.1*diag(-2,1) == diag(1.6,1): off by 0.1 in Frobenius
    # norm, reported relative to the node scale
    assert abs(rep.max_barycenter_residual - 0.1 / xi.norm) < 1e-12
    assert rep.failures


def test_verify_rejects_weight_outside_unit_interval():
    bad = dataclasses.replace(_example_tree(), weight=1.2)
    rep = verify(bad, Mat2.diag(1.5, 1.0), K12)
    assert not rep.ok


def test_verify_rejects_tampered_leaf():
    tree = _example_tree()
    bad = dataclasses.replace(
        tree, minus=Leaf(Mat2.diag(3.0, 1.0), (1.0, 2.0)))
    rep = verify(bad, Mat2.diag(1.5, 1.0), K12)
    assert not rep.ok
    # sv (1,3) misses (1,2) by 1.0, reported relative to max(1, b) = 2
    assert abs(rep.max_leaf_distance - 0.5) < 1e-12


def test_verify_rejects_rank_two_split():
    tree = _example_tree()
    bad = dataclasses.replace(
        tree, plus=Leaf(Mat2.diag(-2.0, 1.2), (1.0, 2.0)))
    rep = verify(bad, Mat2.diag(1.5, 1.0), K12)
    assert not rep.ok
    assert rep.max_rank_one_defect > 1e-9


def test_verify_rejects_foreign_matched_point():
    tree = _example_tree()
    bad = dataclasses.replace(
        tree, minus=Leaf(Mat2.diag(2.0, 1.0), (7.0, 9.0)))
    rep = verify(bad, Mat2.diag(1.5, 1.0), K12)
    assert not rep.ok


def test_verify_rejects_wrong_root():
    rep = verify(_example_tree(), Mat2.diag(1.4, 1.0), K12)
    assert not rep.ok
    assert rep.root_residual > 0.0


def test_verify_rejects_excess_depth():
    rep = verify(_example_tree(), Mat2.diag(1.5, 1.0), K12,
                 DecomposeConfig(max_depth=0))
    assert not rep.ok


# ------------------------------------------------------------ serialization

def test_tree_dict_round_trip():
    tree = decompose(Mat2.diag(1.5, 1.0), K12)
    assert tree_from_dict(tree_to_dict(tree)) == tree


def test_certificate_file_round_trip(tmp_path):
    x, y = _kink_xy()
    xi = Mat2.diag(x, y)
    tree = decompose(xi, K43)
    p1 = tmp_path / "cert.json"
    p2 = tmp_path / "cert2.json"
    save_certificate(p1, tree)
    save_certificate(p2, tree)
    assert p1.read_bytes() == p2.read_bytes()
    loaded = load_certificate(p1)
    assert loaded == tree
    assert verify(loaded, xi, K43).ok


def test_certificate_preserves_every_bit(tmp_path):
    rng = np.random.default_rng(42)
    for i in range(20):
        k = random_kset(rng, max_points=3)
        xi = random_in_hull(rng, k)
        tree = decompose(xi, k)
        path = tmp_path / f"c{i}.json"
        save_certificate(path, tree)
        assert load_certificate(path) == tree
