"""Tests for the free Dirac symbol algebra and the Coulomb thresholds"""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac import (
    LOWER,
    UPPER,
    CoulombConstants,
    Momentum,
    angular_symbol,
    build_demo_operator,
    coulomb_condition,
    distance_norm_residual,
    free_symbol,
    fw_eigenbasis,
    fw_rotation_residual,
    fw_symbol,
    kinematics,
    kinematics_identity_residual,
    lambda_pm,
    load_momenta,
    magnetic_threshold,
    pauli_matrices,
    radial_grid,
    sigma_dot,
    threshold_inequality,
    upper_lower_distance,
    z_threshold,
)
from errors import InputError
from matrix_core import dagger, operator_norm

momenta = st.tuples(*(st.floats(min_value=-50, max_value=50, allow_nan=False) for _ in range(3)))


def test_pauli_algebra():
    sx, sy, sz = pauli_matrices()
    for s in (sx, sy, sz):
        assert np.allclose(s @ s, np.eye(2))
    assert np.allclose(sx @ sy, 1j * sz)


def test_sigma_dot_squares_to_p_squared():
    p = (0.3, -1.2, 2.0)
    s = sigma_dot(p)
    assert np.allclose(s @ s, np.dot(p, p) * np.eye(2))


def test_momentum_validation():
    with pytest.raises(InputError):
        Momentum.of((1.0, 2.0))
    with pytest.raises(InputError):
        Momentum.of((1.0, np.inf, 0.0))
    assert Momentum.of([3, 4, 0]).magnitude == pytest.approx(5.0)


@settings(max_examples=50, deadline=None)
@given(p=momenta)
def test_fw_symbol_diagonalizes_h0(p):
    e, _ = kinematics(p)
    u = fw_symbol(p).matrix
    h0 = free_symbol(p).matrix
    assert operator_norm(dagger(u) @ u - np.eye(4)) < 1e-12
    beta_e = e * np.diag([1.0, 1.0, -1.0, -1.0])
    assert operator_norm(u @ h0 @ dagger(u) - beta_e) < 1e-12 * e
    assert kinematics_identity_residual(p) < 1e-12


@settings(max_examples=50, deadline=None)
@given(p=momenta)
def test_lambda_projections(p):
    plus, minus = lambda_pm(p)
    e, _ = kinematics(p)
    h0 = free_symbol(p).matrix
    assert operator_norm(plus + minus - np.eye(4)) < 1e-12
    assert operator_norm(plus @ plus - plus) < 1e-12
    assert operator_norm(h0 @ plus - e * plus) < 1e-12 * e
    basis = fw_eigenbasis(p)
    assert operator_norm(plus @ basis - basis) < 1e-12
    assert operator_norm(dagger(basis) @ basis - np.eye(2)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(p=momenta)
def test_direct_rotation_is_fw_adjoint(p):
    assert fw_rotation_residual(p) < 1e-9
    assert distance_norm_residual(p) < 1e-12


def test_angular_symbol_norm():
    p = (0.0, 0.0, 3.0)
    e, _ = kinematics(p)
    assert operator_norm(angular_symbol(p)) == pytest.approx(3.0 / (1.0 + e))


def test_upper_lower_distance_approaches_but_never_reaches_limit():
    report = upper_lower_distance(radial_grid(1e3, 100))
    assert report.passed, report.failures
    assert report.distances[0] == 0.0
    assert report.supremum < report.limit
    assert report.limit - report.supremum < 1e-3
    assert report.to_dict()['points'] == 100


def test_upper_lower_distance_formula():
    report = upper_lower_distance([(0.0, 0.0, 2.0)])
    e = np.sqrt(5.0)
    assert report.distances[0] == pytest.approx(np.sqrt(0.5 - 0.5 / e))


def test_empty_grid_rejected():
    with pytest.raises(InputError):
        upper_lower_distance([])
    with pytest.raises(InputError):
        radial_grid(10.0, 0)


def test_radial_grid_shape():
    grid = radial_grid(100.0, 5, direction=(1.0, 1.0, 0.0))
    assert grid[0].magnitude == 0.0
    assert grid[-1].magnitude == pytest.approx(100.0)
    assert grid[1].magnitude == pytest.approx(1e-3)
    assert grid[2].p[0] == pytest.approx(grid[2].p[1])


def test_load_momenta(tmp_path):
    path = tmp_path / "grid.json"
    path.write_text(json.dumps([[0, 0, 1], [0.5, 0.5, 0]]))
    grid = load_momenta(path)
    assert [m.p for m in grid] == [(0.0, 0.0, 1.0), (0.5, 0.5, 0.0)]
    path.write_text(json.dumps({'p': [0, 0, 1]}))
    with pytest.raises(InputError):
        load_momenta(path)


def test_coulomb_constants():
    c = CoulombConstants()
    assert c.hardy == 2.0
    assert c.kato == pytest.approx(np.pi / 2)
    assert c.tix == pytest.approx((np.pi / 2 + 2 / np.pi) / 2)
    value, holds = coulomb_condition(0.2, 0.5, c)
    assert value == pytest.approx(0.2 + 0.5 * c.tix)
    assert holds


@pytest.mark.parametrize("mode, expected", [("exact", 124), ("dkh", 62)])
def test_z_threshold(mode, expected):
    assert z_threshold(mode) == expected


@pytest.mark.parametrize("delta_b, expected", [(1.0, 87), (0.5, 43)])
def test_magnetic_threshold(delta_b, expected):
    assert magnetic_threshold(delta_b) == expected


def test_threshold_edge_cases():
    assert z_threshold("exact", CoulombConstants(alpha=1.0)) == 0
    with pytest.raises(InputError):
        z_threshold("exact", CoulombConstants(alpha=0.0))
    with pytest.raises(InputError):
        z_threshold("relativistic")
    with pytest.raises(InputError):
        magnetic_threshold(0.0)
    with pytest.raises(InputError):
        magnetic_threshold(1.5)


def test_threshold_is_strict():
    # Z * step exactly on the limit is excluded
    c = CoulombConstants(alpha=0.5 / ((np.pi / 2 + 2 / np.pi) / 2) / 10)
    assert z_threshold("dkh", c) == 9


def test_threshold_inequality_text():
    assert threshold_inequality("exact").endswith("< 1")
    assert threshold_inequality("dkh").endswith("< 1/2")
    assert "/ 0.5" in threshold_inequality("magnetic", delta_b=0.5)


def test_demo_operator_blocks():
    grid = radial_grid(5.0, 3)
    base, pert = build_demo_operator(grid)
    assert base.dim == 12
    assert base.delta == pytest.approx(1.0)
    assert pert.rho_full == 0.0

    block = np.diag([0.1, 0.1, -0.1, -0.1])
    base, pert = build_demo_operator(grid, block)
    assert np.allclose(pert.v[4:8, 4:8], block)
    assert pert.symmetric

    with pytest.raises(InputError):
        build_demo_operator(grid, np.ones((5, 5)))
    with pytest.raises(InputError):
        build_demo_operator(grid, np.triu(np.ones((4, 4))))


def test_demo_operator_upper_lower_frame():
    base, _ = build_demo_operator([(0.0, 0.0, 0.0)])
    assert np.allclose(base.p_plus, UPPER)
    assert np.allclose(base.p_minus, LOWER)


def test_symbol_identities_on_random_momenta():
    rng = np.random.default_rng(1000)
    beta = np.diag([1.0, 1.0, -1.0, -1.0])
    for p in rng.uniform(-50.0, 50.0, size=(1000, 3)):
        e, _ = kinematics(p)
        u = fw_symbol(p).matrix
        h0 = free_symbol(p).matrix
        plus, minus = lambda_pm(p)
        assert operator_norm(dagger(u) @ u - np.eye(4)) < 1e-12
        assert operator_norm(u @ h0 @ dagger(u) - e * beta) < 1e-12 * e
        assert operator_norm(plus + minus - np.eye(4)) < 1e-12
        assert operator_norm(plus @ plus - plus) < 1e-12
        assert operator_norm(dagger(u) @ UPPER @ u - plus) < 1e-12
        assert kinematics_identity_residual(p) < 1e-12


def test_guard_band_is_configurable():
    assert z_threshold("exact", CoulombConstants(guard_band=0.0)) == 124
    # 123 * alpha * tix lies within 1% of 1
    assert z_threshold("exact", CoulombConstants(guard_band=0.01)) == 122
