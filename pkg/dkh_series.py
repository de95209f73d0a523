"""
Coupling-constant family H(gamma) = H0 + gamma V and its DKH truncations.

For each gamma the spectral projections Q+-(gamma) are split off by quadrature,
expressed through angular operators over the spectral projections P+- of H0,
and turned into the similarity W(gamma) and the rotation U(gamma). Taylor
coefficients in gamma are discrete Cauchy integrals on a circle, and the
truncated block-diagonal operators are compared with the exact ones in the
norm-resolvent sense.
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from angular import (
    AngularPair,
    ReferenceProjections,
    angular_from_projections,
    coupling_inverse,
    coupling_matrix,
    omega_series,
)
from config import DkhConfig, QuadratureConfig
from errors import ConvergenceError, GapdiagError, InputError, PreconditionError
from form_perturbation import FormPerturbation, GappedOperator
from matrix_core import (
    ComplexMatrix,
    ProjectionPair,
    dagger,
    eigenvalue_axis_margin,
    hermitian_part,
    matrix_function,
    operator_norm,
    schur_split,
)
from riesz_projector import QuadratureScheme, riesz_split

logger = logging.getLogger(__name__)

MODULE = "dkh_series"

CSV_HEADER = ['gamma', 'N', 'resolvent_error', 'ratio_estimate']

Evaluator = Callable[[complex], ComplexMatrix]


@dataclass
class FamilySample:
    """All constituents of the block diagonalization at one coupling gamma"""
    gamma: complex
    h: ComplexMatrix
    h_diag: ComplexMatrix
    h_hat_diag: ComplexMatrix
    w: ComplexMatrix
    u: ComplexMatrix
    omega_plus: ComplexMatrix
    omega_minus: ComplexMatrix
    angular: AngularPair
    provenance: Dict[str, Any] = field(default_factory=dict)


@dataclass
class TaylorModel:
    """Coefficients c_0..c_N of a matrix family from a discrete Cauchy integral"""
    coefficients: List[ComplexMatrix]
    sample_radius: float
    node_count: int
    tail_estimate: float
    aliasing_error: float = 0.0

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, gamma: complex, order: Optional[int] = None) -> ComplexMatrix:
        """sum_{n <= order} gamma^n c_n by Horner's rule"""
        order = self.order if order is None else min(order, self.order)
        total = np.array(self.coefficients[order], dtype=np.complex128)
        for n in range(order - 1, -1, -1):
            total = total * gamma + self.coefficients[n]
        return total


@dataclass
class DkhTruncation:
    """Truncated operator with its norm-resolvent error against the exact family"""
    gamma: complex
    order: int
    matrix: ComplexMatrix
    resolvent_error: Optional[float]
    inverse_error: Optional[float]
    # b_N = ||T - T^N|| ||H0|^{1/2} |H^_diag|^{-1/2}||^2, symmetric truncations only
    form_bound: Optional[float] = None
    eta: float = 1.0

    @property
    def singular(self) -> bool:
        return self.inverse_error is None

    @property
    def resolvent_bound(self) -> Optional[float]:
        """b_N / ((1 - b_N) eta), the guaranteed bound on the resolvent error"""
        if self.form_bound is None or not self.form_bound < 1.0:
            return None
        return self.form_bound / ((1.0 - self.form_bound) * self.eta)


def _resolvent_distance(a: ComplexMatrix, b: ComplexMatrix, z: complex) -> Optional[float]:
    """||(a - z)^{-1} - (b - z)^{-1}||, None when either is numerically singular"""
    eye = np.eye(a.shape[0])
    try:
        if np.linalg.cond(b - z * eye) > 1e14:
            return None
        return operator_norm(np.linalg.inv(a - z * eye) - np.linalg.inv(b - z * eye))
    except np.linalg.LinAlgError:
        return None


class CouplingFamily:
    """The family gamma -> H0 + gamma V with cached reference data"""

    def __init__(self, base: GappedOperator, pert: FormPerturbation,
                 dkh: Optional[DkhConfig] = None, quadrature: Optional[QuadratureConfig] = None):
        self.base = base
        self.pert = pert
        self.dkh = dkh or DkhConfig()
        self.quadrature = quadrature or QuadratureConfig()
        self.reference_pair = ProjectionPair(base.p_plus, base.p_minus, method="eigh")
        self.reference = ReferenceProjections.from_pair(self.reference_pair)

    def h(self, gamma: complex) -> ComplexMatrix:
        return self.base.h0 + complex(gamma) * self.pert.v

    def admissible(self, gamma: complex) -> bool:
        """iR stays in the resolvent set and Q+H stays a graph over P+H"""
        h = self.h(gamma)
        if eigenvalue_axis_margin(h) < self.quadrature.axis_margin * operator_norm(h):
            return False
        try:
            x = angular_from_projections(schur_split(h), self.reference)
        except GapdiagError:
            return False
        radius = np.max(np.abs(np.linalg.eigvals(x.x_minus @ x.x_plus))) if x.rank_plus else 0.0
        return radius < 1.0

    @cached_property
    def gamma_max(self) -> float:
        return estimate_gamma_max(self)

    def sample(self, gamma: complex) -> FamilySample:
        gamma = complex(gamma)
        h = self.h(gamma)
        scheme = QuadratureScheme.for_matrix(h, self.quadrature.initial_nodes, self.quadrature.radius)
        q = riesz_split(h, scheme, max_nodes=self.quadrature.max_nodes,
                        axis_margin=self.quadrature.axis_margin)
        x = angular_from_projections(q, self.reference)
        f = x.frame
        f_inv = np.linalg.inv(f)
        w = f @ coupling_matrix(x) @ f_inv
        w_inv = f @ coupling_inverse(x) @ f_inv
        omega_plus, omega_minus = omega_series(x)
        u_c = np.block([
            [omega_plus, x.x_minus @ omega_minus],
            [x.x_plus @ omega_plus, omega_minus],
        ])
        u = f @ u_c @ f_inv
        h_diag = w_inv @ h @ w
        h_hat_diag = np.linalg.solve(u, h @ u)
        return FamilySample(
            gamma, h, h_diag, h_hat_diag, w, u, omega_plus, omega_minus, x,
            {'method': q.method, 'node_count': q.node_count,
             'idempotency_residual': q.idempotency_residual},
        )

    def h_diag(self, gamma: complex) -> ComplexMatrix:
        return self.sample(gamma).h_diag

    def h_hat_diag(self, gamma: complex) -> ComplexMatrix:
        return self.sample(gamma).h_hat_diag

    def scaled_h_hat_diag(self, gamma: complex) -> ComplexMatrix:
        """T(gamma) = |H0|^{-1/2} H^_diag(gamma) |H0|^{-1/2}"""
        m = self.base.abs_inv_sqrt
        return m @ self.h_hat_diag(gamma) @ m

    def circle_nodes(self, order: int) -> int:
        return max(self.dkh.min_circle_nodes, self.dkh.nodes_per_order * (order + 1))

    def sample_radius(self) -> float:
        return self.dkh.radius_fraction * self.gamma_max


def estimate_gamma_max(family: CouplingFamily) -> float:
    """Largest |gamma| keeping every search direction admissible.

    Bisection on |gamma| along ``ray_directions`` rays, to
    ``gamma_max_resolution``, capped at ``gamma_max_cap``.
    """
    cfg = family.dkh
    cap = cfg.gamma_max_cap
    if not family.admissible(0.0):
        raise PreconditionError("H0 itself is not admissible", MODULE, "gamma-max")
    best = cap
    for j in range(cfg.ray_directions):
        direction = np.exp(2j * np.pi * j / cfg.ray_directions)
        if family.admissible(cap * direction):
            continue
        lo, hi = 0.0, cap
        while hi - lo > cfg.gamma_max_resolution:
            mid = 0.5 * (lo + hi)
            if family.admissible(mid * direction):
                lo = mid
            else:
                hi = mid
        best = min(best, lo)
    logger.debug("estimate_gamma_max: %.6g", best)
    return float(best)


def family_eval(base: GappedOperator, pert: FormPerturbation, gamma: complex,
                gamma_max: Optional[float] = None,
                family: Optional[CouplingFamily] = None) -> FamilySample:
    """Evaluate Q+-, X+-, Omega+-, W, U, H_diag and H^_diag at gamma"""
    family = family or CouplingFamily(base, pert)
    if gamma_max is not None and not abs(gamma) < gamma_max:
        raise PreconditionError(
            f"|gamma| = {abs(gamma):.6g} is not below gamma_max = {gamma_max:.6g}",
            MODULE, "gamma-range",
        )
    return family.sample(gamma)


def _cauchy_coefficients(values: np.ndarray, radius: float, order: int) -> List[ComplexMatrix]:
    """c_n = (1/M) sum_k f_k r^{-n} e^{-i n theta_k} for n = 0..order"""
    m = values.shape[0]
    spectrum = np.fft.fft(values, axis=0) / m
    return [spectrum[n] / radius ** n for n in range(order + 1)]


def _circle_values(evaluator: Evaluator, radius: float, count: int,
                   conjugate_pairs: bool) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(count) / count
    points = radius * np.exp(1j * theta)
    if not conjugate_pairs:
        return np.array([evaluator(z) for z in points], dtype=np.complex128)
    half = count // 2
    upper = [np.asarray(evaluator(points[k]), dtype=np.complex128) for k in range(half + 1)]
    lower = [dagger(upper[count - k]) for k in range(half + 1, count)]
    values = upper + lower
    # real-axis nodes of a self-adjoint family are Hermitian
    values[0] = hermitian_part(values[0])
    if count % 2 == 0:
        values[half] = hermitian_part(values[half])
    return np.array(values)


def taylor_coefficients(evaluator: Evaluator, r: float, n: int, m: Optional[int] = None,
                        conjugate_pairs: bool = False,
                        aliasing_tolerance: float = 1e-7) -> TaylorModel:
    """Taylor coefficients c_0..c_n of a holomorphic matrix family on |gamma| <= r.

    ``conjugate_pairs`` uses f(conj gamma) = f(gamma)^*, which makes the
    coefficients Hermitian. Aliasing is estimated by doubling the node count
    once; an estimate above ``aliasing_tolerance * max ||f||`` means r is too
    large or f is not holomorphic there.
    """
    if n < 0:
        raise InputError("order must be nonnegative", MODULE, "taylor-order")
    if not r > 0:
        raise InputError("sample radius must be positive", MODULE, "taylor-radius")
    m = m or max(64, 8 * (n + 1))
    if m < 4 * (n + 1):
        raise InputError(f"{m} circle nodes are too few for order {n}", MODULE, "taylor-nodes")

    values = _circle_values(evaluator, r, m, conjugate_pairs)
    coefficients = _cauchy_coefficients(values, r, n)

    # odd nodes of the doubled grid interleave the existing ones
    theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
    if conjugate_pairs:
        half = m // 2
        odd_upper = [np.asarray(evaluator(r * np.exp(1j * t)), dtype=np.complex128)
                     for t in theta[:half]]
        odd = np.array(odd_upper + [dagger(odd_upper[m - 1 - k]) for k in range(half, m)])
    else:
        odd = np.array([evaluator(r * np.exp(1j * t)) for t in theta], dtype=np.complex128)
    doubled = np.empty((2 * m,) + values.shape[1:], dtype=np.complex128)
    doubled[0::2] = values
    doubled[1::2] = odd
    refined = _cauchy_coefficients(doubled, r, n)

    scale = max(operator_norm(v) for v in values)
    aliasing = max(operator_norm(a - b) * r ** k
                   for k, (a, b) in enumerate(zip(coefficients, refined)))
    if aliasing > aliasing_tolerance * max(scale, 1e-300):
        raise ConvergenceError(
            f"aliasing estimate {aliasing:.3e} exceeds {aliasing_tolerance:.1e} * {scale:.3e}",
            MODULE, "taylor-aliasing",
        )

    points = r * np.exp(2j * np.pi * np.arange(m) / m)
    model = TaylorModel(coefficients, float(r), int(m), 0.0, float(aliasing))
    model.tail_estimate = max(operator_norm(values[k] - model.evaluate(points[k])) for k in range(m))
    return model


def family_taylor_model(family: CouplingFamily, n: int, kind: str = "h_diag",
                        m: Optional[int] = None) -> TaylorModel:
    """Taylor model of H_diag (``kind='h_diag'``) or of T (``kind='t'``)"""
    r = family.sample_radius()
    m = m or family.circle_nodes(n)
    if kind == "h_diag":
        return taylor_coefficients(family.h_diag, r, n, m,
                                   aliasing_tolerance=family.dkh.aliasing_tolerance)
    if kind == "t":
        return taylor_coefficients(family.scaled_h_hat_diag, r, n, m, conjugate_pairs=True,
                                   aliasing_tolerance=family.dkh.aliasing_tolerance)
    raise InputError(f"unknown family kind {kind!r}", MODULE, "family-kind")


def dkh_truncate(base: GappedOperator, pert: FormPerturbation, gamma: complex, n: int,
                 model: Optional[TaylorModel] = None,
                 family: Optional[CouplingFamily] = None) -> DkhTruncation:
    """H_diag^N(gamma) = sum_{k <= N} gamma^k c_k with its resolvent error at i and 0"""
    family = family or CouplingFamily(base, pert)
    model = model or family_taylor_model(family, n)
    h_n = model.evaluate(gamma, n)
    exact = family.h_diag(gamma)
    return DkhTruncation(
        complex(gamma), n, h_n,
        _resolvent_distance(exact, h_n, 1j * family.dkh.resolvent_eta),
        _resolvent_distance(exact, h_n, 0.0),
    )


def dkh_symmetric_truncate(base: GappedOperator, pert: FormPerturbation, gamma: float, n: int,
                           model: Optional[TaylorModel] = None,
                           family: Optional[CouplingFamily] = None) -> DkhTruncation:
    """H^_diag^N(gamma) = |H0|^{1/2} T^N(gamma) |H0|^{1/2} for symmetric V and real gamma.

    The result carries b_N; whenever b_N < 1 the resolvent error at i eta is
    at most b_N / ((1 - b_N) eta).
    """
    if not pert.symmetric:
        raise PreconditionError("perturbation is not symmetric", MODULE, "symmetric-v")
    if complex(gamma).imag != 0.0:
        raise InputError("coupling must be real", MODULE, "real-gamma")
    relative = operator_norm(pert.v @ np.linalg.inv(base.h0))
    if not relative < 1.0:
        raise PreconditionError(
            f"||V H0^-1|| = {relative:.6g} is not below 1", MODULE, "relative-bound"
        )
    family = family or CouplingFamily(base, pert)
    model = model or family_taylor_model(family, n, kind="t")
    gamma = float(complex(gamma).real)
    t_n = hermitian_part(model.evaluate(gamma, n))
    half = base.abs_sqrt
    h_n = hermitian_part(half @ t_n @ half)
    exact = hermitian_part(family.h_hat_diag(gamma))
    eta = family.dkh.resolvent_eta
    return DkhTruncation(
        complex(gamma), n, h_n,
        _resolvent_distance(exact, h_n, 1j * eta),
        _resolvent_distance(exact, h_n, 0.0),
        form_bound=form_bound(base, exact, base.abs_inv_sqrt @ exact @ base.abs_inv_sqrt - t_n),
        eta=eta,
    )


def form_bound(base: GappedOperator, h_hat_diag: ComplexMatrix, remainder: ComplexMatrix) -> float:
    """||T - T^N|| times ||H0|^{1/2} |H^_diag|^{-1/2}||^2"""
    root = matrix_function(h_hat_diag, lambda w: np.abs(w) ** -0.5)
    equivalence = operator_norm(base.abs_sqrt @ root) ** 2
    return operator_norm(remainder) * equivalence


NOISE_FLOOR = 1e-10
MIN_RATE_POINTS = 4


def leading_run(orders: Sequence[int], values: Sequence[Optional[float]],
                floor: float = NOISE_FLOOR) -> List[int]:
    """Orders up to the first value that is missing or at most ``floor``"""
    run = []
    for order, value in zip(orders, values):
        if value is None or not value > floor:
            break
        run.append(order)
    return run


def fitted_rate(orders: Sequence[int], values: Sequence[Optional[float]],
                floor: float = NOISE_FLOOR, min_points: int = 2) -> Optional[float]:
    """exp of the least-squares slope of log(value) against order.

    Fits the leading run of values above ``floor``; None with fewer than
    ``min_points`` of them.
    """
    run = leading_run(orders, values, floor)
    if len(run) < max(min_points, 2):
        return None
    logs = np.log(np.asarray(values[:len(run)], dtype=float))
    slope = np.polyfit(np.asarray(run, dtype=float), logs, 1)[0]
    return float(np.exp(slope))


def singularity_radius(model: TaylorModel, orders: Sequence[int],
                       min_points: int = 2) -> Optional[float]:
    """Root-test estimate r_* of the radius of convergence.

    ||c_n|| r^n decays like (r / r_*)^n; the decay is fitted over ``orders``
    and converted back with the sample radius r. Coefficients at the
    aliasing floor are left out.
    """
    r = model.sample_radius
    scaled = [operator_norm(c) * r ** n for n, c in enumerate(model.coefficients)]
    floor = 1e-12 * max(max(scaled), 1e-300)
    picked = [n for n in orders if 0 < n <= model.order]
    rate = fitted_rate(picked, [scaled[n] for n in picked], floor=floor, min_points=min_points)
    if rate is None or not rate > 0:
        return None
    return r / rate


@dataclass
class ConvergenceRow:
    gamma: complex
    order: int
    resolvent_error: Optional[float]
    ratio_estimate: Optional[float]


@dataclass
class RateCheck:
    """Fitted decay rate of e_N at one gamma against |gamma| / r_*"""
    gamma: complex
    orders: List[int]
    fitted_rate: Optional[float]
    singularity_radius: Optional[float]

    @property
    def predicted_rate(self) -> Optional[float]:
        if self.singularity_radius is None:
            return None
        return abs(self.gamma) / self.singularity_radius

    @property
    def relative_deviation(self) -> Optional[float]:
        if self.fitted_rate is None or not self.predicted_rate:
            return None
        return abs(self.fitted_rate / self.predicted_rate - 1.0)

    def passed(self, tolerance: float) -> bool:
        """Geometric decay at the predicted rate; unchecked without enough orders"""
        if self.relative_deviation is None:
            return True
        return self.fitted_rate < 1.0 and self.relative_deviation <= tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            'gamma': format_gamma(self.gamma),
            'orders': list(self.orders),
            'fitted_rate': self.fitted_rate,
            'singularity_radius': self.singularity_radius,
            'predicted_rate': self.predicted_rate,
            'relative_deviation': self.relative_deviation,
        }


@dataclass
class ConvergenceTable:
    rows: List[ConvergenceRow]
    gamma_max: float
    sample_radius: float
    min_order: int = 2
    rate_checks: List[RateCheck] = field(default_factory=list)
    rate_tolerance: float = 0.2
    singularity_radius: Optional[float] = None

    def errors(self, gamma: complex) -> List[Optional[float]]:
        return [row.resolvent_error for row in self.rows if row.gamma == gamma]

    @property
    def gammas(self) -> List[complex]:
        seen: List[complex] = []
        for row in self.rows:
            if row.gamma not in seen:
                seen.append(row.gamma)
        return seen

    @property
    def envelope_passed(self) -> bool:
        """Error envelope from min_order on ends no higher than it starts"""
        for gamma in self.gammas:
            tail = [e for e in self.errors(gamma)[self.min_order:] if e is not None]
            if len(tail) >= 2 and tail[-1] > max(tail[0], 1e-13):
                return False
        return True

    @property
    def failures(self) -> List[Dict[str, str]]:
        failures = []
        if not self.envelope_passed:
            failures.append({'module': MODULE, 'invariant': 'error-envelope',
                             'message': 'resolvent error does not decrease'})
        for check in self.rate_checks:
            if not check.passed(self.rate_tolerance):
                failures.append({
                    'module': MODULE, 'invariant': 'decay-rate',
                    'message': (f"gamma {format_gamma(check.gamma)}: fitted rate "
                                f"{check.fitted_rate:.4g}, |gamma|/r_* {check.predicted_rate:.4g}"),
                })
        return failures

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_csv(self, delimiter: str = ',') -> str:
        """CSV with header gamma,N,resolvent_error,ratio_estimate and '\\n' line endings"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, delimiter=delimiter, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([
                format_gamma(row.gamma),
                row.order,
                '' if row.resolvent_error is None else repr(float(row.resolvent_error)),
                '' if row.ratio_estimate is None else repr(float(row.ratio_estimate)),
            ])
        return buffer.getvalue()


def format_gamma(gamma: complex) -> str:
    gamma = complex(gamma)
    if gamma.imag == 0.0:
        return repr(float(gamma.real))
    return f"{gamma.real!r}{gamma.imag:+}j"


def convergence_report(base: GappedOperator, pert: FormPerturbation,
                       gamma_list: Sequence[complex], n_max: int, symmetric: bool = False,
                       family: Optional[CouplingFamily] = None,
                       min_order: int = 2) -> ConvergenceTable:
    """Resolvent error e_N at eta = 1 for N = 0..n_max at each gamma.

    One Taylor model of order n_max + 1 serves every row; lower orders are
    its prefixes. The ratio column is the least-squares decay rate of e_N
    over min_order..N (a plain step ratio below that). Each gamma with at
    least four usable orders gets a rate check: the fitted rate against
    |gamma| / r_*, with r_* from the coefficients c_{N+1} of the same orders.
    """
    family = family or CouplingFamily(base, pert)
    kind = "t" if symmetric else "h_diag"
    model = family_taylor_model(family, n_max + 1, kind=kind)
    rows: List[ConvergenceRow] = []
    checks: List[RateCheck] = []
    eta = 1j * family.dkh.resolvent_eta
    for gamma in gamma_list:
        if symmetric:
            exact = family.h_hat_diag(gamma)
            half = base.abs_sqrt
        else:
            exact = family.h_diag(gamma)
        errors: List[Optional[float]] = []
        for n in range(n_max + 1):
            approx = model.evaluate(gamma, n)
            if symmetric:
                approx = hermitian_part(half @ hermitian_part(approx) @ half)
            errors.append(_resolvent_distance(exact, approx, eta))
            start = min(min_order, n - 1)
            ratio = None
            if n > 0:
                ratio = fitted_rate(range(start, n + 1), errors[start:])
            rows.append(ConvergenceRow(complex(gamma), n, errors[-1], ratio))

        tail = list(range(min_order, n_max + 1))
        rate = fitted_rate(tail, errors[min_order:], min_points=MIN_RATE_POINTS)
        orders = leading_run(tail, errors[min_order:]) if rate is not None else []
        radius = None
        if orders:
            radius = singularity_radius(model, [n + 1 for n in orders], MIN_RATE_POINTS)
        checks.append(RateCheck(complex(gamma), orders, rate, radius))

    overall = singularity_radius(model, range(min_order + 1, model.order + 1))
    logger.debug("convergence_report: %d rows, gamma_max %.4g, r_* %s",
                 len(rows), family.gamma_max, overall)
    return ConvergenceTable(rows, family.gamma_max, family.sample_radius(), min_order,
                            checks, family.dkh.rate_tolerance, overall)
