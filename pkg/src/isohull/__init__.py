"""Rank-one convex hulls of compact isotropic sets of 2x2 matrices.

A finite set K of singular value pairs (a, b), 0 < a <= b, describes the
matrix set E = {xi : (lam1(xi), lam2(xi)) in K}.  This package computes
the (coinciding) rank-one convex and polyconvex hulls of E, classifies
matrices against them, produces verifiable laminate certificates for hull
membership, and checks the inner approximation property used for solving
gradient differential inclusions with such sets.

Numerical kernels run on a compiled extension when available, with a pure
Python fallback (see :data:`BACKEND`).
"""

from ._backend import BACKEND, HAVE_COMPILED
from .approx import (
    ApproxError,
    ConditionReport,
    DeltaFamily,
    DeltaTooLargeError,
    NotInteriorError,
    SolvabilityVerdict,
    check_condition1,
    check_condition2,
    check_condition3,
    check_solvable,
    make_delta_family,
)
from .envelope import (
    DomainError,
    EmptyKError,
    KSet,
    KSetError,
    NegativeXError,
    NonFiniteKError,
    NotApplicableError,
    PLConvex,
    PointOutsideTError,
    Subdiff,
    UnsupportedCardinalityError,
    extend_envelope,
    m_envelope,
    sigma,
    sigma_closed_form,
    sigma_many,
    subdifferential,
    validate_kset,
)
from .hull import (
    Classification,
    Region,
    classify,
    classify_sv_batch,
    h_theta,
    hull_margin,
    sv_distance,
)
from .laminate import (
    BracketFailureError,
    DecomposeConfig,
    DepthExceededError,
    HypothesesViolatedError,
    LaminateError,
    Leaf,
    NoActivePointError,
    OutsideHullError,
    ReductionCase,
    ReductionKind,
    Split,
    VerifyReport,
    decompose,
    iter_leaves,
    leaf_weights,
    load_certificate,
    one_point_decompose,
    reduce_boundary,
    save_certificate,
    tree_depth,
    tree_from_dict,
    tree_to_dict,
    two_point_decompose,
    verify,
)
from .mat2 import (
    DegenerateDirectionError,
    IsoFactorization,
    Mat2,
    Mat2Error,
    NonFiniteMatrixError,
    SVPair,
    det_preserving_direction,
    isotropic_factorize,
    rank_one_defect,
    singular_values,
    third_constraint_direction,
)

__version__ = "0.1.0"
