"""Tensor container, bracket validation, group action and derivations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nilmetric as nm
from nilmetric.algebra_core import ordered_pairs, svd_nullspace, sym_basis, skew_basis

TOL = 1e-12


def test_ordered_pairs_count():
    assert len(ordered_pairs(6)) == 15
    assert tuple(ordered_pairs(3)) == ((0, 1), (0, 2), (1, 2))


def test_from_entries_accumulates_repeats():
    t = nm.SkewTensor.from_entries(3, [(1, 2, 3, 1.0), (1, 2, 3, 0.5)])
    full = t.full()
    assert full[0, 1, 2] == pytest.approx(1.5)
    assert full[1, 0, 2] == pytest.approx(-1.5)


def test_from_entries_rejects_unordered_pair():
    with pytest.raises(nm.DimensionMismatch):
        nm.SkewTensor.from_entries(3, [(2, 1, 3, -0.5)])


def test_from_full_rejects_non_antisymmetric():
    bad = np.zeros((3, 3, 3))
    bad[0, 1, 2] = 1.0  # missing the (1,0,2) counterpart
    with pytest.raises(ValueError):
        nm.SkewTensor.from_full(bad)


def test_norm_counts_both_orderings():
    heis = nm.heisenberg().tensor
    assert heis.norm2() == pytest.approx(2.0, abs=TOL)
    m26 = nm.m26_point(1.0, 0.0).tensor
    assert m26.norm2() == pytest.approx(10.0, abs=TOL)


def test_inner_is_symmetric_bilinear():
    rng = np.random.default_rng(1)
    a = nm.SkewTensor.from_entries(4, [(1, 2, 3, rng.standard_normal())])
    b = nm.SkewTensor.from_entries(4, [(1, 3, 4, rng.standard_normal()),
                                       (1, 2, 3, 0.7)])
    assert nm.inner(a, b) == pytest.approx(nm.inner(b, a), abs=TOL)
    assert nm.inner(a.plus(b, 2.0), b) == pytest.approx(
        nm.inner(a, b) + 2.0 * nm.inner(b, b), abs=1e-10)


def test_jacobi_residual_zero_on_bracket():
    assert nm.jacobi_residual(nm.heisenberg().tensor) == pytest.approx(0.0, abs=TOL)
    assert nm.jacobi_residual(nm.m26_point(1.0, 0.0).tensor) < 1e-14


def test_jacobi_residual_positive_on_non_bracket():
    # six-entry table with an incompatible last coefficient
    t = nm.SkewTensor.from_entries(6, [(1, 2, 3, 1.0), (1, 3, 4, 1.0),
                                       (1, 4, 5, 1.0), (1, 5, 6, 1.0),
                                       (2, 3, 5, 1.0), (2, 4, 6, 0.0)])
    assert nm.jacobi_residual(t) == pytest.approx(1.0, abs=1e-12)


def test_lower_central_series_goldens():
    assert nm.lower_central_dims(nm.m26_point(1.0, 0.0).tensor) == [6, 4, 3, 1, 0]
    assert nm.lower_central_dims(nm.m26_point(0.0, 1.0).tensor) == [6, 3, 2, 1, 0]
    assert nm.lower_central_dims(nm.complex_curve(1.5).tensor) == [6, 2, 0]
    assert nm.lower_central_dims(nm.heisenberg().tensor) == [3, 1, 0]


def test_lcs_rank_threshold_is_absolute():
    # a well-scaled bracket whose second image is pure rounding noise must
    # terminate, even if that noise has a consistent direction
    t = nm.complex_curve(3.0).tensor
    dims = nm.lower_central_dims(t)
    assert dims[-1] == 0 and len(dims) == 3


def test_bracket_validation_errors():
    bad = nm.SkewTensor.from_entries(6, [(1, 2, 3, 1.0), (1, 3, 4, 1.0),
                                         (1, 4, 5, 1.0), (1, 5, 6, 1.0),
                                         (2, 3, 5, 1.0), (2, 4, 6, 0.0)])
    with pytest.raises(nm.InvalidBracket):
        nm.Bracket(bad)
    solvable = nm.SkewTensor.from_entries(2, [(1, 2, 2, 1.0)])
    with pytest.raises(nm.NotNilpotent):
        nm.Bracket(solvable)


def test_bracket_nilpotency_index():
    assert nm.Bracket(nm.heisenberg().tensor).nilpotency_index == 2
    assert nm.Bracket(nm.m26_point(1.0, 0.0).tensor).nilpotency_index == 4


def test_act_identity_and_composition():
    t = nm.m26_point(1.0, 0.0).tensor
    assert np.abs(nm.act(np.eye(6), t).full() - t.full()).max() < TOL
    rng = np.random.default_rng(7)
    g = np.eye(6) + 0.2 * rng.standard_normal((6, 6))
    h = np.eye(6) + 0.2 * rng.standard_normal((6, 6))
    lhs = nm.act(g, nm.act(h, t)).full()
    rhs = nm.act(g @ h, t).full()
    assert np.abs(lhs - rhs).max() < 1e-12


def test_act_rejects_singular_map():
    t = nm.heisenberg().tensor
    with pytest.raises(nm.SingularMap):
        nm.act(np.zeros((3, 3)), t)


def test_act_warns_on_ill_conditioned_map():
    t = nm.heisenberg().tensor
    g = np.diag([1.0, 1.0, 1e-14])
    with pytest.warns(RuntimeWarning):
        nm.act(g, t)


def test_act_preserves_jacobi():
    rng = np.random.default_rng(3)
    t = nm.m26_point(1.0, 0.0).tensor
    g = np.eye(6) + 0.3 * rng.standard_normal((6, 6))
    assert nm.jacobi_residual(nm.act(g, t)) < 1e-12


def test_coboundary_of_identity_is_minus_bracket():
    t = nm.m26_point(1.0, 0.0).tensor
    d = nm.coboundary(t, np.eye(6))
    assert np.abs(d.full() + t.full()).max() < TOL


def test_coboundary_matrix_matches_direct():
    rng = np.random.default_rng(11)
    t = nm.complex_curve(2.0).tensor
    A = rng.standard_normal((6, 6))
    M = nm.coboundary_matrix(t)
    vec = M @ A.ravel()
    direct = nm.coboundary(t, A)
    assert np.abs(vec.reshape(direct.coeffs.shape) - direct.coeffs).max() < 1e-12


def test_derivation_dimensions_heisenberg():
    b = nm.Bracket(nm.heisenberg().tensor)
    assert len(nm.derivation_basis(b)) == 6
    assert len(nm.symmetric_derivation_basis(b)) == 3


def test_derivations_annihilate_coboundary(bracket_corpus):
    for t in bracket_corpus[:12]:
        for D in nm.symmetric_derivation_basis(t)[:3]:
            assert nm.coboundary(t, D).norm() < 1e-8 * (1 + t.norm())


def test_m26_dilation_is_derivation():
    t = nm.m26_point(1.0, 0.0).tensor
    D = 0.5 * np.diag([1, 2, 3, 4, 5, 6.0])
    assert nm.coboundary(t, D).norm() < TOL


def test_metric_validation():
    with pytest.raises(nm.NotPositiveDefinite):
        nm.Metric(np.diag([1.0, -1.0]))
    with pytest.raises(nm.NotPositiveDefinite):
        nm.Metric(np.array([[1.0, 0.5], [0.1, 1.0]]))
    G = nm.Metric(np.diag([4.0, 9.0]))
    h = G.transport
    assert np.abs(h.T @ h - G.matrix).max() < TOL


def test_sym_skew_bases_orthonormal():
    for n in (3, 5):
        for basis in (sym_basis(n), skew_basis(n)):
            for i, A in enumerate(basis):
                for j, B in enumerate(basis):
                    want = 1.0 if i == j else 0.0
                    assert np.sum(A * B) == pytest.approx(want, abs=TOL)


def test_svd_nullspace_edges():
    assert svd_nullspace(np.zeros((3, 4))).shape == (4, 4)
    ns = svd_nullspace(np.array([[1.0, 1.0]]))
    assert ns.shape == (2, 1)
    assert abs(ns[0, 0] + ns[1, 0]) < TOL


def test_j_operator_center_invertibility():
    # nondegenerate 2-step data: the squared center operator is invertible
    # on the first block and vanishes on the center
    p = nm.complex_curve(1.0)
    b = nm.Bracket(p.tensor)
    G = nm.Metric.identity(6)
    z = np.zeros(6)
    z[4] = 1.0
    J = nm.j_operator(b, G, z)
    JJ = J @ J
    assert np.abs(JJ[4:, :]).max() < TOL
    assert abs(np.linalg.det(JJ[:4, :4])) > 1e-6


def test_htype_classification_goldens():
    I3 = nm.Metric.identity(3)
    I6 = nm.Metric.identity(6)
    assert nm.htype_classify(nm.Bracket(nm.heisenberg().tensor), I3) == "HType"
    assert nm.htype_classify(nm.Bracket(nm.complex_curve(1.0).tensor), I6) == "ModifiedHType"
    assert nm.htype_classify(nm.Bracket(nm.complex_curve(1.5).tensor), I6) == "Neither"


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       st.floats(0.1, 2.0))
def test_scaling_action_matches_tensor_scaling(coeffs, s):
    entries = [(1, 2, 3, coeffs[0]), (1, 2, 4, coeffs[1]), (1, 3, 4, coeffs[2])]
    t = nm.SkewTensor.from_entries(4, entries)
    scaled = nm.act(np.eye(4) / s, t)
    assert np.abs(scaled.full() - s * t.full()).max() < 1e-10 * max(1.0, s)
