"""
Graph subspaces and angular operators.

A projection pair Q+- is represented over reference projections P~+- as the
graphs of X+ : P~+H -> P~-H and X- : P~-H -> P~+H. All block matrices in this
module are written in the frame F = [B+ B-] of orthonormal bases of P~+H and
P~-H, so operator norms of X+- are Hilbert-space norms even when P~+- is
oblique.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg as sla

from errors import ConvergenceError, InputError, InvariantViolation, PreconditionError
from matrix_core import (
    ComplexMatrix,
    ProjectionPair,
    as_square,
    dagger,
    inverse_sqrt,
    operator_norm,
    orthonormal_basis,
    random_complex,
    scaled,
)

logger = logging.getLogger(__name__)

MODULE = "angular"

RANK_CUTOFF = 1e-10
GRAPH_SINGULAR_VALUE = 1e-8
GRAPH_TOL = 1e-9
INVERSE_TOL = 1e-10
OFFDIAG_TOL = 1e-8
UNITARITY_TOL = 1e-10
ROTATION_TOL = 1e-9
ACCRETIVITY_MARGIN = 1e-9
MAX_SERIES_TERMS = 100_000


# ---------------------------------------------------------------------------
# Reference projections and angular pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceProjections:
    """Complementary reference projections P~+- and nu = ||P+- - P~+-||"""
    p_tilde_plus: ComplexMatrix
    p_tilde_minus: ComplexMatrix
    nu: float = 0.0

    @classmethod
    def from_plus(cls, p_tilde_plus: Any, p_plus: Optional[ComplexMatrix] = None) -> "ReferenceProjections":
        p_tilde_plus = as_square(p_tilde_plus, "P~+")
        nu = operator_norm(p_plus - p_tilde_plus) if p_plus is not None else 0.0
        if not nu < 1.0:
            raise PreconditionError(f"nu = {nu:.6g} is not below 1", MODULE, "reference-nu")
        eye = np.eye(p_tilde_plus.shape[0], dtype=np.complex128)
        return cls(p_tilde_plus, eye - p_tilde_plus, nu)

    @classmethod
    def from_pair(cls, p: ProjectionPair) -> "ReferenceProjections":
        return cls(p.q_plus, p.q_minus, 0.0)

    @property
    def is_orthogonal(self) -> bool:
        return operator_norm(self.p_tilde_plus - dagger(self.p_tilde_plus)) <= scaled(
            1e-10, operator_norm(self.p_tilde_plus))


def perturbed_reference(p_plus: ComplexMatrix, epsilon: float,
                        rng: np.random.Generator) -> ReferenceProjections:
    """Oblique reference P~+ = S P+ S^{-1} with S = I + epsilon E, ||E|| = 1"""
    p_plus = as_square(p_plus, "P+")
    n = p_plus.shape[0]
    e = random_complex(rng, n, n)
    s = np.eye(n) + epsilon * e / operator_norm(e)
    p_tilde = s @ p_plus @ np.linalg.inv(s)
    return ReferenceProjections.from_plus(p_tilde, p_plus)


@dataclass(frozen=True)
class AngularPair:
    """Angular operators X+- in the coordinates of orthonormal bases of P~+-H"""
    x_plus: ComplexMatrix
    x_minus: ComplexMatrix
    basis_plus: ComplexMatrix
    basis_minus: ComplexMatrix
    graph_residual: float = 0.0
    min_singular_value: float = 1.0

    @property
    def frame(self) -> ComplexMatrix:
        return np.hstack([self.basis_plus, self.basis_minus])

    @property
    def rank_plus(self) -> int:
        return self.basis_plus.shape[1]

    @property
    def rank_minus(self) -> int:
        return self.basis_minus.shape[1]

    @property
    def norm_x_plus(self) -> float:
        return operator_norm(self.x_plus)

    @property
    def norm_x_minus(self) -> float:
        return operator_norm(self.x_minus)

    @property
    def frame_orthogonal(self) -> bool:
        if self.rank_plus == 0 or self.rank_minus == 0:
            return True
        return operator_norm(dagger(self.basis_plus) @ self.basis_minus) <= 1e-10

    @property
    def reference_plus(self) -> ComplexMatrix:
        """P~+ reassembled from the frame"""
        f = self.frame
        coords = np.zeros((f.shape[1], f.shape[1]), dtype=np.complex128)
        coords[:self.rank_plus, :self.rank_plus] = np.eye(self.rank_plus)
        return f @ coords @ np.linalg.inv(f)

    def graph_basis(self) -> ComplexMatrix:
        """Columns B+ u + B- X+ u spanning the graph of X+"""
        return self.basis_plus + self.basis_minus @ self.x_plus


def _coordinates(frame: ComplexMatrix, vectors: ComplexMatrix) -> ComplexMatrix:
    return np.linalg.solve(frame, vectors)


def _orthogonal_projection(columns: ComplexMatrix) -> ComplexMatrix:
    basis = orthonormal_basis(columns, RANK_CUTOFF) if columns.size else columns
    return basis @ dagger(basis)


def projection_range(q: ComplexMatrix) -> ComplexMatrix:
    """Orthonormal basis of range(Q); the rank of a projection is its trace"""
    rank = int(round(np.trace(q).real))
    u, _, _ = sla.svd(q)
    return u[:, :rank]


def angular_from_projections(q: ProjectionPair, ref: ReferenceProjections) -> AngularPair:
    """X+ = P~-(P~+|_{Q+H})^{-1} and X- = P~+(P~-|_{Q-H})^{-1}.

    Raises PreconditionError when Q+-H is not in graph position over P~+-H.
    """
    if q.dim != ref.p_tilde_plus.shape[0]:
        raise InputError("projection dimensions differ", MODULE, "dimension-match")
    b_plus = projection_range(ref.p_tilde_plus)
    b_minus = projection_range(ref.p_tilde_minus)
    y_plus = projection_range(q.q_plus)
    y_minus = projection_range(q.q_minus)
    k = b_plus.shape[1]
    if k + b_minus.shape[1] != q.dim:
        raise PreconditionError("reference projections are not complementary", MODULE, "reference-rank")
    if y_plus.shape[1] != k or y_minus.shape[1] != b_minus.shape[1]:
        raise PreconditionError(
            f"rank Q+ = {y_plus.shape[1]} differs from rank P~+ = {k}", MODULE, "graph-position"
        )

    frame = np.hstack([b_plus, b_minus])
    c = _coordinates(frame, y_plus)
    d = _coordinates(frame, y_minus)
    c1, c2 = c[:k], c[k:]
    d1, d2 = d[:k], d[k:]

    sigma = min(
        sla.svdvals(c1)[-1] if c1.size else 1.0,
        sla.svdvals(d2)[-1] if d2.size else 1.0,
    )
    if sigma < GRAPH_SINGULAR_VALUE:
        raise PreconditionError(
            f"restricted reference projection nearly singular (sigma_min = {sigma:.3e})",
            MODULE, "graph-position",
        )
    x_plus = c2 @ np.linalg.inv(c1) if c1.size else c2[:, :0]
    x_minus = d1 @ np.linalg.inv(d2) if d2.size else d1[:, :0]

    pair = AngularPair(x_plus, x_minus, b_plus, b_minus, 0.0, float(sigma))
    residual = graph_subspace_distance(pair, q)
    if residual > GRAPH_TOL:
        raise InvariantViolation(
            f"graph reconstruction residual {residual:.3e}", MODULE, "graph-reconstruction"
        )
    return AngularPair(x_plus, x_minus, b_plus, b_minus, residual, float(sigma))


def graph_subspace_distance(x: AngularPair, q: ProjectionPair) -> float:
    """||P_graph - P_{Q+H}|| between orthogonal projections onto span{u + X+u} and Q+H"""
    q_hat = _orthogonal_projection(projection_range(q.q_plus))
    return operator_norm(_orthogonal_projection(x.graph_basis()) - q_hat)


# ---------------------------------------------------------------------------
# Coupling map W and block diagonalization
# ---------------------------------------------------------------------------

def coupling_matrix(x: AngularPair) -> ComplexMatrix:
    """W = [[I, X-], [X+, I]] in frame coordinates"""
    return np.block([
        [np.eye(x.rank_plus), x.x_minus],
        [x.x_plus, np.eye(x.rank_minus)],
    ]).astype(np.complex128)


def coupling_inverse(x: AngularPair) -> ComplexMatrix:
    """Schur-Frobenius inverse of W.

    W^{-1} = [[(I - X-X+)^{-1}, -X-(I - X+X-)^{-1}],
              [-X+(I - X-X+)^{-1}, (I - X+X-)^{-1}]]
    """
    kp, km = x.rank_plus, x.rank_minus
    s_plus = np.eye(kp) - x.x_minus @ x.x_plus
    s_minus = np.eye(km) - x.x_plus @ x.x_minus
    cond = max(np.linalg.cond(s) if s.size else 1.0 for s in (s_plus, s_minus))
    logger.debug("coupling_inverse: condition number %.3e", cond)
    if not np.isfinite(cond) or cond > 1e12:
        raise PreconditionError(
            f"I - X-X+ is singular (condition {cond:.3e})", MODULE, "complementary-subspaces"
        )
    inv_plus = np.linalg.inv(s_plus) if kp else s_plus
    inv_minus = np.linalg.inv(s_minus) if km else s_minus
    w_inv = np.block([
        [inv_plus, -x.x_minus @ inv_minus],
        [-x.x_plus @ inv_plus, inv_minus],
    ]).astype(np.complex128)

    w = coupling_matrix(x)
    residual = operator_norm(w @ w_inv - np.eye(kp + km))
    if residual > scaled(INVERSE_TOL, operator_norm(w) * operator_norm(w_inv)):
        raise InvariantViolation(f"W W^-1 - I residual {residual:.3e}", MODULE, "coupling-inverse")
    return w_inv


@dataclass
class BlockDiagonalization:
    z_plus: ComplexMatrix
    z_minus: ComplexMatrix
    offdiag_residual: float


def block_diagonalize(h: Any, x: AngularPair) -> BlockDiagonalization:
    """Z+- as diagonal blocks of W^{-1} F^{-1} h F W"""
    h = as_square(h, "H")
    f = x.frame
    w = coupling_matrix(x)
    w_inv = coupling_inverse(x)
    m = w_inv @ np.linalg.solve(f, h @ f) @ w
    k = x.rank_plus
    offdiag = max(operator_norm(m[:k, k:]) if m[:k, k:].size else 0.0,
                  operator_norm(m[k:, :k]) if m[k:, :k].size else 0.0)
    kappa = np.linalg.cond(f @ w)
    if offdiag > OFFDIAG_TOL * operator_norm(h) * max(1.0, kappa):
        raise InvariantViolation(
            f"off-diagonal residual {offdiag:.3e}", MODULE, "block-diagonalization"
        )
    return BlockDiagonalization(m[:k, :k], m[k:, k:], offdiag)


def q_plus_from_angular(x: AngularPair) -> ComplexMatrix:
    """Q+ = F W diag(I, 0) W^{-1} F^{-1}"""
    f = x.frame
    n = f.shape[1]
    e = np.zeros((n, n), dtype=np.complex128)
    e[:x.rank_plus, :x.rank_plus] = np.eye(x.rank_plus)
    return f @ coupling_matrix(x) @ e @ coupling_inverse(x) @ np.linalg.inv(f)


# ---------------------------------------------------------------------------
# Angles and norms
# ---------------------------------------------------------------------------

def norm_from_distance(d: float) -> float:
    """d / sqrt(1 - d^2): norm of the angular operator at projection distance d"""
    if d < 0:
        raise InputError("distance must be nonnegative", MODULE, "distance-range")
    if d >= 1:
        raise PreconditionError("distance 1 or more: not a graph subspace", MODULE, "distance-range")
    return d / np.sqrt(1.0 - d * d)


def distance_from_norm(k: float) -> float:
    """k / sqrt(1 + k^2)"""
    if k < 0:
        raise InputError("norm must be nonnegative", MODULE, "norm-range")
    return k / np.sqrt(1.0 + k * k)


def angular_distance(p_l: ComplexMatrix, p_m: ComplexMatrix) -> float:
    """Angular metric arcsin ||P_L - P_M|| between orthogonal projections"""
    return float(np.arcsin(min(1.0, operator_norm(np.asarray(p_l) - np.asarray(p_m)))))


def max_principal_angle(p_l: ComplexMatrix, p_m: ComplexMatrix) -> float:
    """Largest principal angle between range(P_L) and range(P_M)"""
    b_l = projection_range(np.asarray(p_l))
    b_m = projection_range(np.asarray(p_m))
    if b_l.shape[1] != b_m.shape[1]:
        return 0.5 * np.pi
    return float(np.max(sla.subspace_angles(b_l, b_m))) if b_l.shape[1] else 0.0


# ---------------------------------------------------------------------------
# Omega series and direct rotation
# ---------------------------------------------------------------------------

def _inverse_sqrt_series(m: ComplexMatrix, tol: float, order: Optional[int] = None) -> ComplexMatrix:
    """(I - M)^{-1/2} = sum_n a_n M^n with a_0 = 1, a_n = a_{n-1}(2n - 1)/(2n).

    With ``order`` the sum stops after M^order instead of at convergence.
    """
    if order is not None and order < 0:
        raise InputError("series order must be nonnegative", MODULE, "series-order")
    n = m.shape[0]
    if n == 0:
        return m.copy()
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    if radius >= 1.0:
        raise PreconditionError(
            f"spectral radius {radius:.6g} of X X is not below 1", MODULE, "omega-radius"
        )
    total = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    if order is not None:
        for k in range(1, order + 1):
            term = term @ m * ((2 * k - 1) / (2 * k))
            total += term
        return total
    stop = tol * (1.0 - min(radius, 0.999))
    for k in range(1, MAX_SERIES_TERMS + 1):
        term = term @ m * ((2 * k - 1) / (2 * k))
        total += term
        if np.linalg.norm(term) < stop:
            logger.debug("omega series converged after %d terms", k)
            break
    else:
        raise ConvergenceError(
            f"series not converged after {MAX_SERIES_TERMS} terms", MODULE, "omega-convergence"
        )

    residual = operator_norm(total @ total @ (np.eye(n) - m) - np.eye(n))
    if residual > max(10 * tol, 1e-11) * (1.0 + operator_norm(total) ** 2):
        raise InvariantViolation(f"Omega^2 (I - M) - I residual {residual:.3e}",
                                 MODULE, "omega-identity")
    return total


def omega_series(x: AngularPair, tol: float = 1e-12,
                 order: Optional[int] = None) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Omega+ = (I - X-X+)^{-1/2} and Omega- = (I - X+X-)^{-1/2} by the binomial series"""
    return (_inverse_sqrt_series(x.x_minus @ x.x_plus, tol, order),
            _inverse_sqrt_series(x.x_plus @ x.x_minus, tol, order))


def rotation_from_omega(x: AngularPair, tol: float = 1e-12, order: Optional[int] = None) -> ComplexMatrix:
    """F [[Omega+, X- Omega-], [X+ Omega+, Omega-]] F^{-1}"""
    omega_plus, omega_minus = omega_series(x, tol, order)
    u_c = np.block([
        [omega_plus, x.x_minus @ omega_minus],
        [x.x_plus @ omega_plus, omega_minus],
    ])
    f = x.frame
    return f @ u_c @ np.linalg.inv(f)


@dataclass
class DirectRotation:
    """Direct rotation with its residuals.

    ``cross_check`` is ||U - U_Omega||, or None when ||X+|| >= 1 puts the
    Omega series out of reach and only the direct formula was used.
    """
    u: ComplexMatrix
    unitarity_residual: float
    mapping_residual: float
    norm_x_plus: float
    cross_check: Optional[float] = None

    @property
    def cross_checked(self) -> bool:
        return self.cross_check is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'unitarity_residual': self.unitarity_residual,
            'mapping_residual': self.mapping_residual,
            'norm_x_plus': self.norm_x_plus,
            'omega_cross_checked': self.cross_checked,
            'omega_cross_check': self.cross_check,
        }


def direct_rotation_report(q: ProjectionPair, p: ProjectionPair, tol: float = 1e-12) -> DirectRotation:
    """Direct rotation U = [I - (Q+ - P+)^2]^{-1/2} (Q+P+ + Q-P-).

    U is unitary and maps P+-H onto Q+-H; while ||X+|| < 1 it is
    cross-checked against the assembly from the angular operators of Q
    over P (Omega series summed to ``tol``).
    """
    if not (q.is_orthogonal() and p.is_orthogonal()):
        raise PreconditionError("direct rotation needs orthogonal projections", MODULE, "orthogonal-input")
    diff = q.q_plus - p.q_plus
    distance = operator_norm(diff)
    if distance >= 1.0:
        raise PreconditionError(
            f"||Q+ - P+|| = {distance:.6g} is not below 1", MODULE, "rotation-distance"
        )
    n = q.dim
    eye = np.eye(n, dtype=np.complex128)
    u = inverse_sqrt(eye - diff @ diff) @ (q.q_plus @ p.q_plus + q.q_minus @ p.q_minus)

    unitarity = operator_norm(dagger(u) @ u - eye)
    if unitarity > UNITARITY_TOL:
        raise InvariantViolation(f"||U*U - I|| = {unitarity:.3e}", MODULE, "rotation-unitary")
    mapping = max(operator_norm(u @ p.q_plus @ dagger(u) - q.q_plus),
                  operator_norm(u @ p.q_minus @ dagger(u) - q.q_minus))
    if mapping > ROTATION_TOL:
        raise InvariantViolation(f"||U P U* - Q|| = {mapping:.3e}", MODULE, "rotation-mapping")

    x = angular_from_projections(q, ReferenceProjections.from_pair(p))
    result = DirectRotation(u, unitarity, mapping, x.norm_x_plus)
    if x.norm_x_plus >= 1.0:
        # binomial series for Omega diverges past distance 1/sqrt(2)
        logger.info("direct_rotation: ||X+|| = %.4g, Omega cross-check skipped", x.norm_x_plus)
        return result
    result.cross_check = operator_norm(u - rotation_from_omega(x, tol))
    if result.cross_check > ROTATION_TOL:
        raise InvariantViolation(f"rotation routes differ by {result.cross_check:.3e}",
                                 MODULE, "rotation-routes")
    return result


def direct_rotation(q: ProjectionPair, p: ProjectionPair) -> ComplexMatrix:
    """Unitary U of :func:`direct_rotation_report`"""
    return direct_rotation_report(q, p).u


# ---------------------------------------------------------------------------
# Norm bounds and W-accretivity
# ---------------------------------------------------------------------------

def norm_bound(rho: float, nu: float, symmetric: bool) -> float:
    """tan(arctan sqrt(rho/(2 - rho)) + arcsin nu), or with 2 - 3 rho when nonsymmetric"""
    if symmetric:
        if not 0 <= rho < 1:
            raise PreconditionError(f"rho = {rho:.6g} is not below 1", MODULE, "rho-half")
        base = np.arctan(np.sqrt(rho / (2.0 - rho)))
    else:
        if not 0 <= rho < 0.5:
            raise PreconditionError(f"rho = {rho:.6g} is not below 1/2", MODULE, "rho-half")
        base = np.arctan(np.sqrt(rho / (2.0 - 3.0 * rho)))
    if not 0 <= nu < 1:
        raise PreconditionError(f"nu = {nu:.6g} is not in [0, 1)", MODULE, "reference-nu")
    angle = base + np.arcsin(nu)
    if angle >= 0.5 * np.pi:
        raise PreconditionError(f"bound angle {angle:.6g} reaches pi/2", MODULE, "bound-angle")
    return float(np.tan(angle))


def distance_bound(rho: float, nu: float) -> float:
    """sin(arcsin sqrt(rho/2) + arcsin nu)"""
    return float(np.sin(np.arcsin(np.sqrt(rho / 2.0)) + np.arcsin(nu)))


def _within(value: float, bound: float) -> bool:
    return value <= bound * (1.0 + 1e-9) + 1e-12


@dataclass
class NormBoundReport:
    norm_x_plus: float
    norm_x_minus: float
    bound: float
    nu: float
    rho_half: float
    symmetric: bool
    distance: Optional[float] = None
    distance_limit: Optional[float] = None
    failures: List[Dict[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            'norm_x_plus': float(self.norm_x_plus),
            'norm_x_minus': float(self.norm_x_minus),
            'bound': float(self.bound),
            'pass': self.passed,
            'nu': float(self.nu),
            'rho_half': float(self.rho_half),
            'symmetric': bool(self.symmetric),
        }


def verify_norm_bound(rho_half: float, nu: float, symmetric: bool, x: AngularPair,
                      rho_full: Optional[float] = None) -> NormBoundReport:
    """Check ||X+-|| against the angle bound.

    In the nonsymmetric case rho_full < 1 is required in addition to
    rho_half < 1/2. For an orthogonal reference in the symmetric case the
    projection distance ||P~+ - Q^+|| is checked as well.
    """
    if not symmetric and rho_full is not None and not rho_full < 1.0:
        raise PreconditionError(f"rho_full = {rho_full:.6g} is not below 1", MODULE, "rho-full")
    bound = norm_bound(rho_half, nu, symmetric)
    report = NormBoundReport(x.norm_x_plus, x.norm_x_minus, bound, nu, rho_half, symmetric)
    for name, value in (('x-plus', report.norm_x_plus), ('x-minus', report.norm_x_minus)):
        if not _within(value, bound):
            report.failures.append({
                'module': MODULE, 'invariant': f"norm-bound-{name}",
                'message': f"||X|| = {value:.6g} exceeds {bound:.6g}",
            })

    if symmetric and x.frame_orthogonal:
        p_tilde = x.basis_plus @ dagger(x.basis_plus)
        report.distance = operator_norm(p_tilde - _orthogonal_projection(x.graph_basis()))
        report.distance_limit = distance_bound(rho_half, nu)
        if not _within(report.distance, report.distance_limit):
            report.failures.append({
                'module': MODULE, 'invariant': "distance-bound",
                'message': f"||P~ - Q^|| = {report.distance:.6g} exceeds {report.distance_limit:.6g}",
            })
    return report


@dataclass
class AccretivityReport:
    mu_plus: float
    mu_minus: float
    min_eigenvalue: float
    margin: float
    norm_x_plus: Optional[float] = None
    norm_x_minus: Optional[float] = None

    @property
    def accretive(self) -> bool:
        return self.min_eigenvalue >= -self.margin

    @property
    def bound_plus(self) -> float:
        return float(np.sqrt(self.mu_plus / self.mu_minus))

    @property
    def bound_minus(self) -> float:
        return float(np.sqrt(self.mu_minus / self.mu_plus))

    @property
    def bounds_hold(self) -> bool:
        if not self.accretive or self.norm_x_plus is None:
            return True
        return _within(self.norm_x_plus, self.bound_plus) and _within(self.norm_x_minus, self.bound_minus)

    @property
    def passed(self) -> bool:
        return self.accretive and self.bounds_hold

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mu_plus': float(self.mu_plus),
            'mu_minus': float(self.mu_minus),
            'min_eigenvalue': float(self.min_eigenvalue),
            'accretive': self.accretive,
            'bound_plus': self.bound_plus,
            'bound_minus': self.bound_minus,
            'norm_x_plus': self.norm_x_plus,
            'norm_x_minus': self.norm_x_minus,
            'pass': self.passed,
        }


def w_accretivity(h: Any, mu_plus: float, mu_minus: float, p: ProjectionPair,
                  x: Optional[AngularPair] = None,
                  margin: float = ACCRETIVITY_MARGIN) -> AccretivityReport:
    """W-accretivity of h for W = mu+ P+ - mu- P-, and the Krein bounds on X+-.

    ``x`` must be the angular pair of the spectral projections of h over P.
    """
    h = as_square(h, "H")
    if not (mu_plus > 0 and mu_minus > 0):
        raise InputError("weights must be positive", MODULE, "weights-positive")
    w = mu_plus * p.q_plus - mu_minus * p.q_minus
    wh = w @ h
    sym = 0.5 * (wh + dagger(wh))
    min_eig = float(sla.eigvalsh(sym)[0])
    report = AccretivityReport(mu_plus, mu_minus, min_eig, margin * operator_norm(wh))
    if x is not None:
        report.norm_x_plus = x.norm_x_plus
        report.norm_x_minus = x.norm_x_minus
    return report


def accretivity_witnesses(rho: float, symmetric: bool) -> List[Tuple[str, float, float]]:
    """Weights (name, mu+, mu-) of the two witnesses W1 = w P+ - P- and W2 = P+ - w P-"""
    if symmetric:
        if not 0 <= rho < 1:
            raise PreconditionError(f"rho = {rho:.6g} is not below 1", MODULE, "rho-half")
        weight = rho / (2.0 - rho)
    else:
        if not 0 <= rho < 0.5:
            raise PreconditionError(f"rho = {rho:.6g} is not below 1/2", MODULE, "rho-half")
        weight = rho / (2.0 - 3.0 * rho)
    # zero weight makes W singular
    weight = max(weight, 1e-300)
    return [('W1', weight, 1.0), ('W2', 1.0, weight)]
