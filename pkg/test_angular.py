"""Tests for angular operators, block diagonalization, the direct rotation and the bounds"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angular import (
    AngularPair,
    ReferenceProjections,
    accretivity_witnesses,
    angular_distance,
    angular_from_projections,
    block_diagonalize,
    coupling_inverse,
    coupling_matrix,
    direct_rotation,
    direct_rotation_report,
    distance_bound,
    distance_from_norm,
    graph_subspace_distance,
    max_principal_angle,
    norm_bound,
    norm_from_distance,
    omega_series,
    perturbed_reference,
    q_plus_from_angular,
    rotation_from_omega,
    verify_norm_bound,
    w_accretivity,
)
from errors import InputError, PreconditionError
from form_perturbation import form_perturbation, random_instance
from matrix_core import ProjectionPair, dagger, hermitian_part, operator_norm, schur_split


def _rotated_pair(theta: float) -> ProjectionPair:
    """Orthogonal projection onto span{(cos theta, sin theta)}"""
    u = np.array([[np.cos(theta)], [np.sin(theta)]], dtype=np.complex128)
    return ProjectionPair.from_plus(u @ dagger(u))


def _standard_pair(n: int, k: int) -> ProjectionPair:
    return ProjectionPair.from_plus(np.diag([1.0] * k + [0.0] * (n - k)))


def _spectral_pairs(base, pert, gamma=1.0):
    h = base.h0 + gamma * pert.v
    q = schur_split(h)
    if pert.symmetric and complex(gamma).imag == 0:
        q = ProjectionPair.from_plus(hermitian_part(q.q_plus), h)
    p = ProjectionPair(base.p_plus, base.p_minus)
    return h, q, p


def test_angular_operator_of_rotated_line():
    theta = 0.3
    x = angular_from_projections(_rotated_pair(theta), ReferenceProjections.from_pair(_standard_pair(2, 1)))
    assert x.norm_x_plus == pytest.approx(np.tan(theta))
    assert x.norm_x_minus == pytest.approx(np.tan(theta))
    assert x.graph_residual < 1e-12
    assert x.rank_plus == x.rank_minus == 1


def test_graph_position_lost_at_right_angle():
    with pytest.raises(PreconditionError) as info:
        angular_from_projections(_rotated_pair(np.pi / 2),
                                 ReferenceProjections.from_pair(_standard_pair(2, 1)))
    assert info.value.invariant == "graph-position"


def test_rank_mismatch_is_not_a_graph():
    q = _standard_pair(3, 2)
    ref = ReferenceProjections.from_pair(_standard_pair(3, 1))
    with pytest.raises(PreconditionError):
        angular_from_projections(q, ref)


def test_norm_distance_duality_examples():
    assert norm_from_distance(0.6) == pytest.approx(0.75)
    assert distance_from_norm(0.75) == pytest.approx(0.6)
    assert norm_from_distance(0.0) == 0.0
    with pytest.raises(PreconditionError):
        norm_from_distance(1.0)
    with pytest.raises(InputError):
        distance_from_norm(-1.0)


def test_norm_bound_examples():
    assert norm_bound(0.5, 0.0, True) == pytest.approx(1 / np.sqrt(3))
    assert norm_bound(0.0, 0.0, False) == 0.0
    assert norm_bound(0.2, 0.0, False) == pytest.approx(np.sqrt(0.2 / 1.4))
    with pytest.raises(PreconditionError):
        norm_bound(0.5, 0.0, False)
    with pytest.raises(PreconditionError):
        norm_bound(1.0, 0.0, True)
    with pytest.raises(PreconditionError):
        norm_bound(0.9, 0.9, True)


def test_distance_bound_matches_norm_bound_for_orthogonal_reference():
    for rho in (0.1, 0.5, 0.9):
        assert distance_bound(rho, 0.0) == pytest.approx(distance_from_norm(norm_bound(rho, 0.0, True)))


def test_omega_from_scalar_angular_operators():
    theta = np.arctan(0.5)
    x = angular_from_projections(_rotated_pair(theta), ReferenceProjections.from_pair(_standard_pair(2, 1)))
    omega_plus, omega_minus = omega_series(x)
    # X-X+ = -1/4 for a rotated line; (1 + 1/4)^{-1/2}
    assert abs(omega_plus[0, 0]) == pytest.approx(1 / np.sqrt(1.25))
    assert abs(omega_minus[0, 0]) == pytest.approx(1 / np.sqrt(1.25))


def test_omega_series_for_commuting_example():
    ref = ReferenceProjections.from_pair(_standard_pair(2, 1))
    base = angular_from_projections(_standard_pair(2, 1), ref)
    x = AngularPair(np.array([[0.5]]), np.array([[0.5]]), base.basis_plus, base.basis_minus)
    omega_plus, omega_minus = omega_series(x)
    assert omega_plus[0, 0] == pytest.approx(2 / np.sqrt(3), abs=1e-12)
    assert omega_minus[0, 0] == pytest.approx(2 / np.sqrt(3), abs=1e-12)


def test_omega_series_diverges_outside_unit_radius():
    ref = ReferenceProjections.from_pair(_standard_pair(2, 1))
    base = angular_from_projections(_standard_pair(2, 1), ref)
    x = AngularPair(np.array([[1.0]]), np.array([[1.0]]), base.basis_plus, base.basis_minus)
    with pytest.raises(PreconditionError):
        omega_series(x)


def test_direct_rotation_maps_p_onto_q():
    q, p = _rotated_pair(0.4), _standard_pair(2, 1)
    u = direct_rotation(q, p)
    assert operator_norm(dagger(u) @ u - np.eye(2)) < 1e-12
    assert operator_norm(u @ p.q_plus @ dagger(u) - q.q_plus) < 1e-12
    # the direct rotation of a line in the plane is the plane rotation
    expected = np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
    assert operator_norm(u - expected) < 1e-12


def test_direct_rotation_is_identity_for_equal_projections():
    p = _standard_pair(3, 2)
    assert np.allclose(direct_rotation(p, p), np.eye(3))


def test_direct_rotation_requires_orthogonal_projections():
    q = schur_split(np.array([[1.0, 5.0], [0.0, -1.0]]))
    with pytest.raises(PreconditionError):
        direct_rotation(q, _standard_pair(2, 1))


def test_direct_rotation_rejects_distance_one():
    with pytest.raises(PreconditionError):
        direct_rotation(ProjectionPair.from_plus(np.diag([0.0, 1.0])), _standard_pair(2, 1))


def test_block_diagonalization(four_level):
    base, pert = four_level
    h, q, p = _spectral_pairs(base, pert)
    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    blocks = block_diagonalize(h, x)
    assert blocks.offdiag_residual < 1e-10
    eigs = np.sort(np.concatenate([np.linalg.eigvals(blocks.z_plus), np.linalg.eigvals(blocks.z_minus)]).real)
    assert np.allclose(eigs, np.linalg.eigvalsh(h))
    assert np.all(np.linalg.eigvals(blocks.z_plus).real > 0)


def test_coupling_inverse_and_q_assembly(four_level):
    base, pert = four_level
    _, q, p = _spectral_pairs(base, pert, gamma=0.7 + 0.4j)
    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    w = coupling_matrix(x)
    assert operator_norm(w @ coupling_inverse(x) - np.eye(4)) < 1e-12
    assert operator_norm(q_plus_from_angular(x) - q.q_plus) < 1e-9
    assert graph_subspace_distance(x, q) < 1e-9
    assert operator_norm(x.reference_plus - p.q_plus) < 1e-10


def test_rotation_routes_agree(four_level):
    base, pert = four_level
    _, q, p = _spectral_pairs(base, pert)
    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    assert operator_norm(direct_rotation(q, p) - rotation_from_omega(x)) < 1e-9


def test_truncated_omega_series_approaches_rotation(four_level):
    base, pert = four_level
    _, q, p = _spectral_pairs(base, pert)
    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    u = direct_rotation(q, p)
    errors = [operator_norm(rotation_from_omega(x, order=n) - u) for n in (0, 1, 3, 6)]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < 1e-6
    with pytest.raises(InputError):
        rotation_from_omega(x, order=-1)


def test_oblique_reference_bound(four_level, rng):
    base, pert = four_level
    _, q, p = _spectral_pairs(base, pert)
    ref = perturbed_reference(base.p_plus, 0.01, rng)
    assert 0 < ref.nu < 0.05
    assert not ref.is_orthogonal
    x = angular_from_projections(q, ref)
    report = verify_norm_bound(pert.rho_half, ref.nu, True, x)
    assert report.passed
    assert report.distance is None


def test_verify_norm_bound_symmetric(four_level):
    base, pert = four_level
    _, q, p = _spectral_pairs(base, pert)
    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    report = verify_norm_bound(pert.rho_half, 0.0, True, x)
    assert report.passed
    assert report.distance <= report.distance_limit
    assert report.to_dict()['pass'] is True


def test_verify_norm_bound_needs_rho_full_below_one():
    x = angular_from_projections(_standard_pair(2, 1), ReferenceProjections.from_pair(_standard_pair(2, 1)))
    with pytest.raises(PreconditionError) as info:
        verify_norm_bound(0.3, 0.0, False, x, rho_full=1.2)
    assert info.value.invariant == "rho-full"


def test_verify_norm_bound_reports_violation():
    x = angular_from_projections(_rotated_pair(0.5), ReferenceProjections.from_pair(_standard_pair(2, 1)))
    report = verify_norm_bound(0.01, 0.0, True, x)
    assert not report.passed
    assert {f['invariant'] for f in report.failures} >= {"norm-bound-x-plus"}


def test_angular_metric_matches_principal_angle():
    q, p = _rotated_pair(0.35), _standard_pair(2, 1)
    assert angular_distance(q.q_plus, p.q_plus) == pytest.approx(0.35)
    assert max_principal_angle(q.q_plus, p.q_plus) == pytest.approx(0.35)
    assert max_principal_angle(_standard_pair(3, 1).q_plus, _standard_pair(3, 2).q_plus) == pytest.approx(np.pi / 2)


def test_accretivity_witness_weights():
    (n1, mp1, mm1), (n2, mp2, mm2) = accretivity_witnesses(0.5, True)
    assert (n1, n2) == ('W1', 'W2')
    assert mp1 == pytest.approx(1 / 3) and mm1 == 1.0
    assert mp2 == 1.0 and mm2 == pytest.approx(1 / 3)
    assert accretivity_witnesses(0.2, False)[0][1] == pytest.approx(0.2 / 1.4)
    with pytest.raises(PreconditionError):
        accretivity_witnesses(0.5, False)


def test_w_accretivity_rejects_nonpositive_weights(two_level):
    base, pert = two_level
    with pytest.raises(InputError):
        w_accretivity(base.h0, 0.0, 1.0, ProjectionPair(base.p_plus, base.p_minus))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=2, max_value=9),
       symmetric=st.booleans())
def test_witnesses_certify_random_instances(seed, n, symmetric):
    rng = np.random.default_rng(seed)
    target = float(rng.uniform(0.02, 0.45))
    base, v = random_instance(rng, n, symmetric=symmetric, rho_half=target)
    pert = form_perturbation(base, v)
    if not symmetric and pert.rho_full >= 0.95:
        return
    h, q, p = _spectral_pairs(base, pert)
    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    bound = verify_norm_bound(pert.rho_half, 0.0, symmetric, x, rho_full=pert.rho_full)
    assert bound.passed, bound.failures
    for name, mu_plus, mu_minus in accretivity_witnesses(pert.rho_half, symmetric):
        result = w_accretivity(h, mu_plus, mu_minus, p, x)
        assert result.passed, (name, result.to_dict())


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=2, max_value=8))
def test_angular_triangle_inequality(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n)) if n > 1 else 1
    projections = []
    for _ in range(3):
        u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        projections.append(u[:, :k] @ dagger(u[:, :k]))
    p_l, p_m, p_n = projections
    assert angular_distance(p_l, p_n) <= angular_distance(p_l, p_m) + angular_distance(p_m, p_n) + 1e-10


def test_direct_rotation_report_records_cross_check():
    small = direct_rotation_report(_rotated_pair(0.4), _standard_pair(2, 1))
    assert small.cross_checked
    assert small.cross_check < 1e-9
    assert small.norm_x_plus == pytest.approx(np.tan(0.4))
    assert small.to_dict()['omega_cross_checked'] is True


def test_direct_rotation_report_flags_skipped_cross_check():
    # past pi/4 the Omega series diverges; only the direct formula is used
    q, p = _rotated_pair(1.0), _standard_pair(2, 1)
    result = direct_rotation_report(q, p)
    assert not result.cross_checked
    assert result.cross_check is None
    assert result.norm_x_plus == pytest.approx(np.tan(1.0))
    assert result.to_dict()['omega_cross_checked'] is False
    assert operator_norm(result.u @ p.q_plus @ dagger(result.u) - q.q_plus) < 1e-12
    assert np.array_equal(direct_rotation(q, p), result.u)


def test_w_accretivity_margin_is_configurable():
    h = np.array([[1.0, 3.0], [0.0, -1.0]])
    p = _standard_pair(2, 1)
    strict = w_accretivity(h, 1.0, 1.0, p)
    assert strict.min_eigenvalue == pytest.approx(-0.5)
    assert not strict.accretive
    loose = w_accretivity(h, 1.0, 1.0, p, margin=0.2)
    wh = np.diag([1.0, -1.0]) @ h
    assert loose.margin == pytest.approx(0.2 * operator_norm(wh))
    assert loose.accretive
