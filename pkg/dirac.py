"""
Momentum-space algebra of the free Dirac operator.

Natural units (hbar = c = m = 1). Provides the Pauli matrices, the free
symbol h0(p), the Foldy-Wouthuysen unitary u(p), the spectral projections
Lambda+-(p), the angular symbol x+(p), the Coulomb constants and the
Z-threshold arithmetic, and a block-diagonal demo operator for the abstract
modules.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as sla

from angular import direct_rotation, norm_from_distance
from errors import InputError
from form_perturbation import FormPerturbation, GappedOperator, form_perturbation
from matrix_core import (
    ComplexMatrix,
    ProjectionPair,
    as_square,
    dagger,
    is_hermitian,
    operator_norm,
    read_json,
)

logger = logging.getLogger(__name__)

MODULE = "dirac"

ALPHA = 1.0 / 137.035999
GUARD_BAND = 1e-12

UPPER = np.diag([1.0, 1.0, 0.0, 0.0]).astype(np.complex128)
LOWER = np.diag([0.0, 0.0, 1.0, 1.0]).astype(np.complex128)


@dataclass(frozen=True)
class Momentum:
    """Real 3-momentum"""
    p: Tuple[float, float, float]

    def __post_init__(self):
        if len(self.p) != 3 or not all(np.isfinite(self.p)):
            raise InputError(f"momentum must be three finite reals, got {self.p}", MODULE, "momentum")

    @classmethod
    def of(cls, value: Union["Momentum", Sequence[float]]) -> "Momentum":
        if isinstance(value, Momentum):
            return value
        try:
            return cls(tuple(float(c) for c in value))
        except (TypeError, ValueError) as e:
            raise InputError(f"invalid momentum {value!r}: {e}", MODULE, "momentum") from e

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.p, dtype=float)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class DiracSymbol:
    matrix: ComplexMatrix
    p: Momentum


@dataclass(frozen=True)
class CoulombConstants:
    """Sharp constants of the Hardy, Kato and Tix inequalities"""
    hardy: float = 2.0
    kato: float = np.pi / 2
    tix: float = (np.pi / 2 + 2 / np.pi) / 2
    alpha: float = ALPHA
    guard_band: float = GUARD_BAND


def pauli_matrices() -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    return (
        np.array([[0, 1], [1, 0]], dtype=np.complex128),
        np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
        np.array([[1, 0], [0, -1]], dtype=np.complex128),
    )


def sigma_dot(p: Any) -> ComplexMatrix:
    """sigma . p"""
    p = Momentum.of(p).vector
    return sum(c * s for c, s in zip(p, pauli_matrices()))


def kinematics(p: Any) -> Tuple[float, float]:
    """E = sqrt(1 + p^2) and N = sqrt(2E(1 + E))"""
    k = Momentum.of(p).magnitude
    e = float(np.sqrt(1.0 + k * k))
    return e, float(np.sqrt(2.0 * e * (1.0 + e)))


def kinematics_identity_residual(p: Any) -> float:
    """|N^2 - (1 + E)^2 - p^2|, relative to N^2"""
    k = Momentum.of(p).magnitude
    e, n = kinematics(p)
    return abs(n * n - (1.0 + e) ** 2 - k * k) / (n * n)


def free_symbol(p: Any) -> DiracSymbol:
    """h0(p) = [[I, sigma.p], [sigma.p, -I]]"""
    p = Momentum.of(p)
    s = sigma_dot(p)
    eye = np.eye(2)
    return DiracSymbol(np.block([[eye, s], [s, -eye]]).astype(np.complex128), p)


def fw_symbol(p: Any) -> DiracSymbol:
    """Foldy-Wouthuysen unitary u(p) = (1/N)[[(1+E)I, sigma.p], [-sigma.p, (1+E)I]]"""
    p = Momentum.of(p)
    e, n = kinematics(p)
    s = sigma_dot(p)
    eye = (1.0 + e) * np.eye(2)
    return DiracSymbol((np.block([[eye, s], [-s, eye]]) / n).astype(np.complex128), p)


def fw_eigenbasis(p: Any) -> ComplexMatrix:
    """Columns (1/N)((1+E) e_i, sigma.p e_i), i = 1, 2, spanning range Lambda+(p)"""
    e, n = kinematics(p)
    return np.vstack([(1.0 + e) * np.eye(2), sigma_dot(p)]) / n


def lambda_pm(p: Any) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Lambda+-(p) = (I +- h0(p)/E)/2, rank-2 orthogonal projections"""
    e, _ = kinematics(p)
    s = sigma_dot(p)
    eye = np.eye(2)
    plus = np.block([[(1 + e) * eye, s], [s, (e - 1) * eye]]) / (2 * e)
    minus = np.block([[(e - 1) * eye, -s], [-s, (1 + e) * eye]]) / (2 * e)
    return plus.astype(np.complex128), minus.astype(np.complex128)


def angular_symbol(p: Any) -> ComplexMatrix:
    """x+(p) = sigma.p / (1 + E); range Lambda+(p) is the graph of x+ over the upper spinors"""
    e, _ = kinematics(p)
    return sigma_dot(p) / (1.0 + e)


def fw_rotation_residual(p: Any) -> float:
    """||direct rotation from upper spinors onto range Lambda+(p) - u(p)*||"""
    plus, minus = lambda_pm(p)
    q = ProjectionPair(plus, minus, method="dirac")
    reference = ProjectionPair(UPPER, LOWER, method="dirac")
    u = direct_rotation(q, reference)
    return operator_norm(u - dagger(fw_symbol(p).matrix))


@dataclass
class DistanceReport:
    """d(p) = ||P_upper - Lambda+(p)|| along a momentum grid sorted by |p|"""
    magnitudes: List[float]
    distances: List[float]
    identity_residual: float
    failures: List[Dict[str, str]] = field(default_factory=list)

    @property
    def supremum(self) -> float:
        return max(self.distances)

    @property
    def limit(self) -> float:
        return 1.0 / np.sqrt(2.0)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            'supremum': float(self.supremum),
            'limit': float(self.limit),
            'gap_to_limit': float(self.limit - self.supremum),
            'identity_residual': float(self.identity_residual),
            'points': len(self.distances),
            'pass': self.passed,
            'failures': self.failures,
        }


def upper_lower_distance(p_grid: Iterable[Any]) -> DistanceReport:
    """Distance between the upper-spinor subspace and range Lambda+(p) over a grid"""
    momenta = sorted((Momentum.of(p) for p in p_grid), key=lambda m: m.magnitude)
    if not momenta:
        raise InputError("momentum grid is empty", MODULE, "nonempty-grid")
    magnitudes, distances = [], []
    residual = 0.0
    for p in momenta:
        plus, _ = lambda_pm(p)
        d = operator_norm(UPPER - plus)
        k = operator_norm(angular_symbol(p))
        residual = max(residual, abs(d - k / np.sqrt(1.0 + k * k)))
        magnitudes.append(p.magnitude)
        distances.append(d)

    report = DistanceReport(magnitudes, distances, residual)
    if residual > 1e-12:
        report.failures.append({'module': MODULE, 'invariant': "distance-identity",
                                'message': f"d(p) identity residual {residual:.3e}"})
    for (m0, d0), (m1, d1) in zip(zip(magnitudes, distances), zip(magnitudes[1:], distances[1:])):
        if m1 > m0 * (1 + 1e-9) and not d1 > d0:
            report.failures.append({'module': MODULE, 'invariant': "distance-monotone",
                                    'message': f"d not increasing between |p| = {m0:g} and {m1:g}"})
            break
    if not report.supremum < report.limit:
        report.failures.append({'module': MODULE, 'invariant': "distance-limit",
                                'message': f"sup d = {report.supremum:.15g} reaches 1/sqrt(2)"})
    return report


def distance_norm_residual(p: Any) -> float:
    """|norm_from_distance(d(p)) - ||x+(p)|||"""
    plus, _ = lambda_pm(p)
    return abs(norm_from_distance(operator_norm(UPPER - plus)) - operator_norm(angular_symbol(p)))


def radial_grid(max_p: float, count: int, direction: Sequence[float] = (0.0, 0.0, 1.0)) -> List[Momentum]:
    """``count`` momenta from 0 to ``max_p`` along ``direction``, log-spaced after 0"""
    if count < 1 or not max_p >= 0:
        raise InputError("grid needs count >= 1 and max_p >= 0", MODULE, "nonempty-grid")
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    if count > 1 and max_p > 1e-3:
        mags = np.concatenate([[0.0], np.logspace(-3, np.log10(max_p), count - 1)])
    else:
        mags = np.linspace(0.0, max_p, count)
    return [Momentum(tuple(float(c) for c in m * unit)) for m in mags]


def load_momenta(path) -> List[Momentum]:
    """JSON array of 3-vectors"""
    data = read_json(path)
    if not isinstance(data, list):
        raise InputError(f"{path} must hold a JSON array of 3-vectors", MODULE, "momentum-grid")
    return [Momentum.of(p) for p in data]


# ---------------------------------------------------------------------------
# Coulomb thresholds
# ---------------------------------------------------------------------------

def _largest_below(step: float, limit: float, guard_band: float = GUARD_BAND) -> int:
    """Largest integer Z >= 0 with Z * step < limit, with a relative guard band"""
    z = int(np.floor(limit / step))
    while z > 0 and z * step >= limit * (1.0 - guard_band):
        z -= 1
    return max(z, 0)


def coulomb_condition(a: float, b: float, constants: Optional[CoulombConstants] = None) -> Tuple[float, bool]:
    """a + (b/2)(pi/2 + 2/pi) and whether it is below 1"""
    constants = constants or CoulombConstants()
    value = a + b * constants.tix
    return value, value < 1.0


def z_threshold(mode: str = "exact", constants: Optional[CoulombConstants] = None) -> int:
    """Largest Z with Z alpha tix < 1 (exact) or < 1/2 (dkh)"""
    constants = constants or CoulombConstants()
    if not constants.alpha > 0:
        raise InputError("alpha must be positive", MODULE, "alpha-positive")
    limits = {'exact': 1.0, 'dkh': 0.5}
    if mode not in limits:
        raise InputError(f"mode must be 'exact' or 'dkh', got {mode!r}", MODULE, "threshold-mode")
    return _largest_below(constants.alpha * constants.tix, limits[mode], constants.guard_band)


def magnetic_threshold(delta_b: float, constants: Optional[CoulombConstants] = None) -> int:
    """Largest Z with Z alpha (pi/2) / delta_b < 1"""
    constants = constants or CoulombConstants()
    if not constants.alpha > 0:
        raise InputError("alpha must be positive", MODULE, "alpha-positive")
    if not 0 < delta_b <= 1:
        raise InputError(f"delta_b = {delta_b!r} is not in (0, 1]", MODULE, "delta-b-range")
    return _largest_below(constants.alpha * constants.kato / delta_b, 1.0, constants.guard_band)


def threshold_inequality(mode: str, constants: Optional[CoulombConstants] = None,
                         delta_b: Optional[float] = None) -> str:
    """Governing inequality echoed next to a threshold"""
    constants = constants or CoulombConstants()
    if mode == "magnetic":
        return f"Z * {constants.alpha:.9g} * (pi/2) / {delta_b:g} < 1"
    limit = "1" if mode == "exact" else "1/2"
    return f"Z * {constants.alpha:.9g} * (pi/2 + 2/pi)/2 < {limit}"


# ---------------------------------------------------------------------------
# Demo operator
# ---------------------------------------------------------------------------

def build_demo_operator(grid: Sequence[Any], v_block: Any = None) -> Tuple[GappedOperator, FormPerturbation]:
    """H0 = direct sum of h0(p_k); V from one 4x4 block per point or a full coupling matrix.

    ``v_block`` may be a single 4x4 Hermitian block repeated at every point,
    a list of 4x4 blocks, or a 4K x 4K matrix coupling the points.
    """
    momenta = [Momentum.of(p) for p in grid]
    if not momenta:
        raise InputError("momentum grid is empty", MODULE, "nonempty-grid")
    h0 = sla.block_diag(*(free_symbol(p).matrix for p in momenta))
    size = h0.shape[0]

    if v_block is None:
        v = np.zeros_like(h0)
    elif isinstance(v_block, (list, tuple)) and len(v_block) == len(momenta) \
            and np.asarray(v_block[0]).shape == (4, 4):
        blocks = [as_square(b, "v_block") for b in v_block]
        v = sla.block_diag(*blocks)
    else:
        block = as_square(v_block, "v_block")
        if block.shape == (4, 4):
            v = sla.block_diag(*([block] * len(momenta)))
        elif block.shape == (size, size):
            v = block
        else:
            raise InputError(f"v_block shape {block.shape} fits neither 4x4 nor {size}x{size}",
                             MODULE, "demo-shape")
    v = np.asarray(v, dtype=np.complex128)
    if not is_hermitian(v):
        raise InputError("demo perturbation is not Hermitian", MODULE, "hermitian-v-block")

    base = GappedOperator.from_matrix(h0)
    logger.debug("demo operator: %d points, dimension %d, gap %.6g", len(momenta), size, base.delta)
    return base, form_perturbation(base, v)
