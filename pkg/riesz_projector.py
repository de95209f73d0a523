"""
Spectral splitting along the imaginary axis.

Q+ and Q- are obtained from the principal-value integral of the resolvent
over iR, evaluated by Gauss-Legendre quadrature on a tangent-transformed grid
with paired nodes +eta/-eta. The module also provides the Neumann series of
the resolvent difference and the 1/|eta| decay bound, both certified against
direct inverses.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from numpy.polynomial.legendre import leggauss

from errors import ConvergenceError, InputError, PreconditionError
from form_perturbation import FormPerturbation, GappedOperator
from matrix_core import (
    ComplexMatrix,
    ProjectionPair,
    as_square,
    eigenvalue_axis_margin,
    operator_norm,
    schur_split,
)

logger = logging.getLogger(__name__)

MODULE = "riesz_projector"

__all__ = [
    'ProjectionPair', 'QuadratureScheme', 'ResolventSeries', 'DecayPoint', 'DecayReport',
    'riesz_split', 'split_report', 'resolvent_difference_series', 'verify_decay', 'decay_bound',
]

AXIS_MARGIN = 1e-6
PROJECTOR_TOL = 1e-7
CONVERGENCE_TOL = 1e-9
MAX_NODES = 2 ** 16
CHUNK = 512


@dataclass(frozen=True)
class QuadratureScheme:
    """Symmetric Gauss-Legendre rule on eta = R tan(theta), theta in (0, pi/2).

    ``node_count`` counts both members of every +eta/-eta pair.
    """
    radius: float
    node_count: int = 64
    rule: str = "gauss-legendre-tan"

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("quadrature radius must be positive", MODULE, "quadrature-radius")
        if self.node_count < 8 or self.node_count % 2:
            raise InputError("node count must be even and at least 8", MODULE, "quadrature-nodes")

    @classmethod
    def for_matrix(cls, h: ComplexMatrix, node_count: int = 64,
                   radius: Optional[float] = None) -> "QuadratureScheme":
        """Radius defaults to the geometric mean of the extreme singular values"""
        if radius is None:
            s = sla.svdvals(as_square(h, "H"))
            radius = float(np.sqrt(s[0] * s[-1])) if s[-1] > 0 else float(s[0])
        return cls(radius, node_count)

    def refined(self) -> "QuadratureScheme":
        return QuadratureScheme(self.radius, 2 * self.node_count, self.rule)

    def nodes(self):
        """Positive nodes eta_k in ascending order and weights of the paired integrand"""
        x, w = leggauss(self.node_count // 2)
        theta = 0.25 * np.pi * (x + 1.0)
        weights = 0.25 * np.pi * w * self.radius / np.cos(theta) ** 2 / np.pi
        return self.radius * np.tan(theta), weights


def _sign_integral(h: ComplexMatrix, scheme: QuadratureScheme) -> ComplexMatrix:
    """D = (1/pi) int_0^inf [(h - i eta)^{-1} + (h + i eta)^{-1}] d eta"""
    n = h.shape[0]
    eta, weights = scheme.nodes()
    eye = np.eye(n, dtype=np.complex128)
    total = np.zeros((n, n), dtype=np.complex128)
    for start in range(0, eta.size, CHUNK):
        block = eta[start:start + CHUNK, None, None]
        minus = np.linalg.inv(h[None] - 1j * block * eye)
        plus = np.linalg.inv(h[None] + 1j * block * eye)
        for k, w in enumerate(weights[start:start + CHUNK]):
            total += w * (minus[k] + plus[k])
    return total


def riesz_split(h: Any, scheme: Optional[QuadratureScheme] = None,
                max_nodes: int = MAX_NODES, tol: float = CONVERGENCE_TOL,
                axis_margin: float = AXIS_MARGIN,
                projector_tol: float = PROJECTOR_TOL) -> ProjectionPair:
    """Q+- = (I +- D)/2 with D the principal-value resolvent integral over iR.

    The node count is doubled until Q+ changes by at most tol (1 + ||Q+||)
    and is idempotent to projector_tol (1 + ||Q+||^2).
    """
    h = as_square(h, "H")
    norm_h = operator_norm(h)
    margin = eigenvalue_axis_margin(h)
    if margin < axis_margin * norm_h:
        raise PreconditionError(
            f"eigenvalue within {margin:.3e} of the imaginary axis", MODULE, "axis-margin"
        )
    scheme = scheme or QuadratureScheme.for_matrix(h)
    eye = np.eye(h.shape[0], dtype=np.complex128)

    previous = None
    while True:
        q_plus = 0.5 * (eye + _sign_integral(h, scheme))
        pair = ProjectionPair.from_plus(q_plus, h, method="riesz", node_count=scheme.node_count)
        q_norm = operator_norm(q_plus)
        idempotent = pair.idempotency_residual <= projector_tol * (1.0 + q_norm ** 2)
        if previous is not None:
            change = operator_norm(q_plus - previous)
            logger.debug("riesz_split: %d nodes, change %.3e, idempotency %.3e",
                         scheme.node_count, change, pair.idempotency_residual)
            if change <= tol * (1.0 + q_norm) and idempotent:
                return pair
        if 2 * scheme.node_count > max_nodes:
            raise ConvergenceError(
                f"quadrature not converged with {scheme.node_count} nodes "
                f"(idempotency residual {pair.idempotency_residual:.3e})",
                MODULE, "quadrature-convergence",
            )
        previous = q_plus
        scheme = scheme.refined()


def split_report(h: Any, pair: ProjectionPair,
                 oracle: Optional[ProjectionPair] = None) -> Dict[str, Any]:
    """{idempotency_residual, commutation_residual, oracle_distance, node_count}"""
    oracle = oracle or schur_split(h)
    return {
        'idempotency_residual': float(pair.idempotency_residual),
        'commutation_residual': float(pair.commutation_residual),
        'oracle_distance': operator_norm(pair.q_plus - oracle.q_plus),
        'node_count': int(pair.node_count),
    }


@dataclass
class ResolventSeries:
    """Partial sum of (H - i eta)^{-1} - (H0 - i eta)^{-1} with its tail bound"""
    value: ComplexMatrix
    order: int
    contraction: float
    tail_bound: float


def resolvent_difference_series(base: GappedOperator, pert: FormPerturbation, gamma: complex,
                                eta: float, order: int) -> ResolventSeries:
    """Neumann series through ``order`` terms in the form factorization of V.

    Term n is R0 H_ab^{1/2} (-gamma C R0 H_ab)^{n-1} (-gamma C) H_ab^{1/2} R0 with
    R0 = (H0 - i eta)^{-1}; the series converges when
    b~ = |gamma| ||C_ab|| ||R0 H_ab|| < 1.
    """
    if order < 0:
        raise InputError("order must be nonnegative", MODULE, "series-order")
    if eta == 0:
        raise InputError("eta must be nonzero", MODULE, "series-eta")
    n = base.dim
    gamma = complex(gamma)
    zero = np.zeros((n, n), dtype=np.complex128)
    if gamma == 0 or operator_norm(pert.c_ab) == 0.0:
        return ResolventSeries(zero, order, 0.0, 0.0)

    r0 = base.resolvent(1j * eta)
    half = base.h_ab_power(pert.a, pert.b, 0.5)
    left = r0 @ half
    r0_hab = r0 @ base.h_ab_power(pert.a, pert.b, 1.0)
    step = -gamma * pert.c_ab @ r0_hab
    contraction = abs(gamma) * operator_norm(pert.c_ab) * operator_norm(r0_hab)
    if contraction >= 1.0:
        raise PreconditionError(
            f"series contraction {contraction:.6g} is not below 1", MODULE, "series-contraction"
        )

    right = -gamma * pert.c_ab @ half @ r0
    total = zero.copy()
    power = np.eye(n, dtype=np.complex128)
    for _ in range(order):
        total += left @ power @ right
        power = power @ step

    tail = operator_norm(left) ** 2 * abs(gamma) * operator_norm(pert.c_ab) \
        * contraction ** order / (1.0 - contraction)
    return ResolventSeries(total, order, contraction, tail)


def decay_bound(a: float, b: float, c_norm: float, eta: float,
                h0_inv_norm: float) -> Optional[float]:
    """(1 - b~)^{-1} (a/2 ||H0^{-1}|| + b) with b~ = c_norm sqrt(a^2 + b^2 eta^2)/|eta|.

    ``c_norm`` is |gamma| ||C_ab||; values above 1 scale the bound linearly.
    Returns None when b~ >= 1.
    """
    contraction = c_norm * np.sqrt(a * a + b * b * eta * eta) / abs(eta)
    if contraction >= 1.0:
        return None
    return max(1.0, c_norm) * (0.5 * a * h0_inv_norm + b) / (1.0 - contraction)


@dataclass
class DecayPoint:
    eta: float
    scaled_difference: float
    bound: Optional[float]

    @property
    def applicable(self) -> bool:
        return self.bound is not None

    @property
    def ratio(self) -> Optional[float]:
        if self.bound is None:
            return None
        if self.bound == 0.0:
            return 0.0 if self.scaled_difference == 0.0 else np.inf
        return self.scaled_difference / self.bound


@dataclass
class DecayReport:
    """Result of checking |eta| ||(h - i eta)^{-1} - (h0 - i eta)^{-1}|| against the decay bound"""
    points: List[DecayPoint] = field(default_factory=list)
    diagnostic: str = ""

    @property
    def max_ratio(self) -> float:
        ratios = [p.ratio for p in self.points if p.ratio is not None]
        return max(ratios) if ratios else 0.0

    @property
    def passed(self) -> bool:
        return not self.diagnostic and self.max_ratio <= 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'passed': self.passed,
            'max_ratio': float(self.max_ratio),
            'diagnostic': self.diagnostic,
            'points': [
                {'eta': p.eta, 'scaled_difference': p.scaled_difference,
                 'bound': p.bound, 'ratio': p.ratio}
                for p in self.points
            ],
        }


def verify_decay(base: GappedOperator, pert: FormPerturbation, gamma: float,
                 eta_grid: Sequence[float]) -> DecayReport:
    """Check the 1/|eta| decay of the resolvent difference at each grid point"""
    report = DecayReport()
    width = abs(gamma) * (pert.a + pert.b * base.delta)
    if not width < base.delta:
        report.diagnostic = f"|gamma|(a + b delta) = {width:.6g} is not below delta = {base.delta:.6g}"
        logger.warning("verify_decay: %s", report.diagnostic)
        return report

    h = base.h0 + gamma * pert.v
    eye = np.eye(base.dim, dtype=np.complex128)
    c_norm = abs(gamma) * pert.norm_c_ab
    for eta in eta_grid:
        eta = float(eta)
        if eta == 0.0:
            raise InputError("eta grid must not contain 0", MODULE, "decay-grid")
        diff = np.linalg.inv(h - 1j * eta * eye) - base.resolvent(1j * eta)
        bound = decay_bound(pert.a, pert.b, c_norm, eta, base.inverse_norm)
        if bound is None:
            logger.debug("verify_decay: eta=%g outside the contraction range", eta)
        report.points.append(DecayPoint(eta, abs(eta) * operator_norm(diff), bound))
    return report
