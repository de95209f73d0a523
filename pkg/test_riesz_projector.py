"""Tests for the imaginary-axis splitting, the resolvent series and the decay bound"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ConvergenceError, InputError, PreconditionError
from form_perturbation import form_perturbation, random_instance
from matrix_core import operator_norm, random_complex, random_gapped_hermitian, schur_split
from riesz_projector import (
    QuadratureScheme,
    decay_bound,
    resolvent_difference_series,
    riesz_split,
    split_report,
    verify_decay,
)


def test_riesz_split_of_diagonal_matrix():
    h = np.diag([2.0, -1.0, 0.5, -3.0])
    pair = riesz_split(h)
    assert np.allclose(pair.q_plus, np.diag([1, 0, 1, 0]), atol=1e-9)
    assert pair.method == "riesz"
    assert pair.node_count >= 64


def test_riesz_split_oblique_example():
    pair = riesz_split(np.array([[1.0, 5.0], [0.0, -1.0]]))
    assert operator_norm(pair.q_plus - np.array([[1.0, 2.5], [0.0, 0.0]])) < 1e-7


def test_riesz_split_rejects_axis_eigenvalue():
    with pytest.raises(PreconditionError):
        riesz_split(np.array([[1e-9, 0.0], [0.0, -1.0]]))


def test_riesz_split_reports_nonconvergence():
    h = np.diag([1e-3, -1.0, 100.0])
    with pytest.raises(ConvergenceError):
        riesz_split(h, QuadratureScheme(radius=1.0, node_count=8), max_nodes=16)


def test_riesz_split_idempotency_tolerance_is_configurable():
    h = np.array([[1.3, 5.1], [0.7, -0.9]])
    scheme = QuadratureScheme(radius=1.0, node_count=16)
    pair = riesz_split(h, scheme, max_nodes=4096, projector_tol=1e-6)
    assert pair.idempotency_residual <= 1e-6 * (1 + operator_norm(pair.q_plus) ** 2)
    with pytest.raises(ConvergenceError) as info:
        riesz_split(h, scheme, max_nodes=4096, projector_tol=1e-300)
    assert info.value.invariant == "quadrature-convergence"


def test_quadrature_scheme_validation():
    with pytest.raises(InputError):
        QuadratureScheme(radius=0.0)
    with pytest.raises(InputError):
        QuadratureScheme(radius=1.0, node_count=7)
    scheme = QuadratureScheme(radius=2.0, node_count=16)
    eta, weights = scheme.nodes()
    assert eta.size == 8 and np.all(np.diff(eta) > 0)
    assert scheme.refined().node_count == 32


def test_quadrature_integrates_scalar_sign():
    # (2/pi) int_0^inf lam / (lam^2 + eta^2) d eta = sign(lam)
    eta, weights = QuadratureScheme(radius=3.0, node_count=256).nodes()
    for lam in (0.5, 3.0, -7.0):
        value = np.sum(weights * 2.0 * lam / (lam * lam + eta * eta))
        assert value == pytest.approx(np.sign(lam), abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=2, max_value=10),
       hermitian=st.booleans())
def test_riesz_matches_schur_oracle(seed, n, hermitian):
    rng = np.random.default_rng(seed)
    h = random_gapped_hermitian(rng, n)
    if not hermitian:
        h = h + 0.1 * random_complex(rng, n, n) / np.sqrt(n)
    pair = riesz_split(h)
    report = split_report(h, pair)
    assert report['oracle_distance'] <= 1e-6
    assert report['idempotency_residual'] <= 1e-7 * (1 + operator_norm(pair.q_plus) ** 2)
    assert set(report) == {'idempotency_residual', 'commutation_residual', 'oracle_distance', 'node_count'}


def test_split_report_accepts_given_oracle():
    h = np.diag([1.0, -2.0])
    pair = riesz_split(h)
    report = split_report(h, pair, oracle=schur_split(h))
    assert report['oracle_distance'] < 1e-9


def test_resolvent_series_within_tail_bound(four_level):
    base, pert = four_level
    gamma, eta = 0.8, 2.0
    h = base.h0 + gamma * pert.v
    exact = np.linalg.inv(h - 1j * eta * np.eye(4)) - base.resolvent(1j * eta)
    previous = None
    for order in (1, 2, 4, 8):
        series = resolvent_difference_series(base, pert, gamma, eta, order)
        error = operator_norm(series.value - exact)
        assert error <= series.tail_bound * (1 + 1e-9) + 1e-14
        assert series.contraction < 1
        if previous is not None:
            assert series.tail_bound < previous
        previous = series.tail_bound


def test_resolvent_series_zero_coupling(four_level):
    base, pert = four_level
    series = resolvent_difference_series(base, pert, 0.0, 1.0, 5)
    assert operator_norm(series.value) == 0.0
    assert series.tail_bound == 0.0


def test_resolvent_series_needs_contraction(two_level):
    base, pert = two_level
    with pytest.raises(PreconditionError):
        resolvent_difference_series(base, pert, 5.0, 1.0, 3)


def test_decay_bound_example():
    assert decay_bound(0.0, 0.3, 0.3, 10.0, 1.0) == pytest.approx(0.3 / 0.91)


def test_decay_bound_outside_contraction():
    assert decay_bound(1.0, 1.0, 1.0, 1.0, 1.0) is None


def test_verify_decay_passes(four_level):
    base, pert = four_level
    report = verify_decay(base, pert, 1.0, (0.5, 1.0, 10.0, 100.0))
    assert report.passed
    assert all(point.applicable for point in report.points)
    assert 0 < report.max_ratio <= 1
    assert report.to_dict()['passed']


def test_verify_decay_outside_strip(two_level):
    base, pert = two_level
    report = verify_decay(base, pert, 10.0, (1.0,))
    assert not report.passed
    assert report.points == []
    assert "not below" in report.diagnostic


def test_verify_decay_rejects_zero_eta(four_level):
    base, pert = four_level
    with pytest.raises(InputError):
        verify_decay(base, pert, 1.0, (0.0,))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=2, max_value=8))
def test_decay_bound_holds_for_random_instances(seed, n):
    rng = np.random.default_rng(seed)
    base, v = random_instance(rng, n, rho_full=float(rng.uniform(0.05, 0.85)))
    pert = form_perturbation(base, v)
    report = verify_decay(base, pert, 1.0, (1.0, 10.0, 100.0))
    assert report.passed
