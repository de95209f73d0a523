"""
Form perturbations of an operator with a spectral gap.

Builds H = H0 + gamma V from the matrix of the perturbation form, computes the
relative form-bound data (a, b, C_ab, rho) and checks the spectral-strip
inclusion around the imaginary axis.

In finite dimension every form is the form of its matrix, so domains, cores
and form closures are vacuous here.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg as sla

from errors import InputError, InvariantViolation, PreconditionError
from matrix_core import (
    ComplexMatrix,
    HermitianEigensystem,
    as_square,
    dagger,
    eigh,
    is_hermitian,
    operator_norm,
    random_complex,
    random_gapped_hermitian,
    random_hermitian,
)

logger = logging.getLogger(__name__)

MODULE = "form_perturbation"

FACTORIZATION_TOL = 1e-9
FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class GappedOperator:
    """Hermitian H0 with spectral gap (-delta, delta) and its spectral data"""
    h0: ComplexMatrix
    delta: float
    eigensystem: HermitianEigensystem
    p_plus: ComplexMatrix
    p_minus: ComplexMatrix

    @classmethod
    def from_matrix(cls, h0: Any, delta: Optional[float] = None) -> "GappedOperator":
        """Validate H0; delta is recomputed as min |lambda|"""
        h0 = as_square(h0, "H0")
        system = eigh(h0)
        measured = float(np.min(np.abs(system.eigenvalues)))
        if measured == 0.0:
            raise PreconditionError("0 is an eigenvalue of H0", MODULE, "gap")
        if delta is not None and not np.isclose(delta, measured, rtol=1e-9, atol=0.0):
            logger.debug("Given gap %.6g replaced by measured gap %.6g", delta, measured)
        v = system.eigenvectors
        positive = system.eigenvalues > 0
        p_plus = v[:, positive] @ dagger(v[:, positive])
        p_minus = v[:, ~positive] @ dagger(v[:, ~positive])
        return cls(0.5 * (h0 + dagger(h0)), measured, system, p_plus, p_minus)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def rank_plus(self) -> int:
        return int(np.count_nonzero(self.eigensystem.eigenvalues > 0))

    def function(self, f) -> ComplexMatrix:
        """f(H0) through the cached eigensystem"""
        v = self.eigensystem.eigenvectors
        values = np.asarray(f(self.eigensystem.eigenvalues), dtype=np.complex128)
        return (v * values) @ dagger(v)

    @property
    def abs_h0(self) -> ComplexMatrix:
        return self.function(np.abs)

    @property
    def abs_sqrt(self) -> ComplexMatrix:
        return self.function(lambda x: np.sqrt(np.abs(x)))

    @property
    def abs_inv_sqrt(self) -> ComplexMatrix:
        return self.function(lambda x: np.abs(x) ** -0.5)

    @property
    def inverse_norm(self) -> float:
        """||H0^{-1}|| = 1/delta"""
        return 1.0 / self.delta

    def resolvent(self, z: complex) -> ComplexMatrix:
        """(H0 - z)^{-1}"""
        return self.function(lambda x: 1.0 / (x - z))

    def h_ab_power(self, a: float, b: float, power: float) -> ComplexMatrix:
        """H_ab^power with H_ab = a + b |H0|"""
        if a < 0 or b < 0:
            raise InputError("form-bound constants must be nonnegative", MODULE, "ab-nonnegative")
        if a + b <= 0:
            raise PreconditionError("a = b = 0 makes H_ab singular", MODULE, "ab-positive")
        return self.function(lambda x: (a + b * np.abs(x)) ** power)


@dataclass(frozen=True)
class FormPerturbation:
    """Perturbation matrix V with its relative form-bound data"""
    v: ComplexMatrix
    symmetric: bool
    a: float
    b: float
    c_ab: ComplexMatrix
    rho_full: float
    rho_half: float

    @property
    def norm_c_ab(self) -> float:
        return operator_norm(self.c_ab)

    def to_summary(self) -> Dict[str, float]:
        """JSON summary {a, b, rho_full, rho_half, norm_c_ab}"""
        return {
            'a': float(self.a),
            'b': float(self.b),
            'rho_full': float(self.rho_full),
            'rho_half': float(self.rho_half),
            'norm_c_ab': float(self.norm_c_ab),
        }


@dataclass(frozen=True)
class PerturbedOperator:
    """H(gamma) = H0 + gamma V"""
    base: GappedOperator
    pert: FormPerturbation
    gamma: complex
    h: ComplexMatrix
    factorization_residual: float = 0.0

    @property
    def is_hermitian(self) -> bool:
        return self.pert.symmetric and complex(self.gamma).imag == 0.0


@dataclass
class StripResult:
    """Spectral strip (-delta + w, delta - w) + iR with w = |gamma|(a + b delta)"""
    interval: Optional[Tuple[float, float]]
    verified: bool
    diagnostic: str = ""


def _check_dims(base: GappedOperator, v: ComplexMatrix):
    if v.shape != base.h0.shape:
        raise InputError(
            f"perturbation shape {v.shape} does not match H0 shape {base.h0.shape}",
            MODULE, "dimension-match",
        )


def compute_c_ab(base: GappedOperator, v: Any, a: float, b: float) -> ComplexMatrix:
    """C_ab = H_ab^{-1/2} V H_ab^{-1/2}"""
    v = as_square(v, "V")
    _check_dims(base, v)
    m = base.h_ab_power(a, b, -0.5)
    return m @ v @ m


def compute_rho(base: GappedOperator, v: Any) -> Tuple[float, float]:
    """(rho_full, rho_half) of C0 = |H0|^{-1/2} V |H0|^{-1/2}.

    rho_half is the largest of the four block norms ||P_i C0 P_j||, which is
    the supremum over unit vectors drawn from P+H U P-H.
    """
    v = as_square(v, "V")
    _check_dims(base, v)
    m = base.abs_inv_sqrt
    c0 = m @ v @ m
    rho_full = operator_norm(c0)
    blocks = [operator_norm(pi @ c0 @ pj)
              for pi in (base.p_plus, base.p_minus)
              for pj in (base.p_plus, base.p_minus)]
    return rho_full, max(blocks)


def form_perturbation(base: GappedOperator, v: Any, a: Optional[float] = None,
                      b: Optional[float] = None) -> FormPerturbation:
    """Build the perturbation data; the default bound is a = 0, b = rho_full"""
    v = as_square(v, "V")
    _check_dims(base, v)
    rho_full, rho_half = compute_rho(base, v)
    if a is None and b is None:
        a, b = 0.0, rho_full
    a = 0.0 if a is None else float(a)
    b = 0.0 if b is None else float(b)

    if a + b > 0:
        c_ab = compute_c_ab(base, v, a, b)
    elif operator_norm(v) == 0.0:
        c_ab = np.zeros_like(v)
    else:
        raise PreconditionError("a = b = 0 for a nonzero perturbation", MODULE, "ab-positive")

    norm_c = operator_norm(c_ab)
    if norm_c > 1.0 + 1e-9:
        logger.warning("(a, b) = (%.4g, %.4g) is not a form bound: ||C_ab|| = %.6g", a, b, norm_c)
    return FormPerturbation(v, is_hermitian(v), a, b, c_ab, rho_full, rho_half)


def construct_h(base: GappedOperator, pert: FormPerturbation, gamma: complex,
                check: bool = True) -> PerturbedOperator:
    """H = H0 + gamma V with the factorization H - z = H_ab^{1/2} C^(z) H_ab^{1/2} checked at z = i"""
    _check_dims(base, pert.v)
    gamma = complex(gamma)
    h = base.h0 + gamma * pert.v
    residual = 0.0
    if check and pert.a + pert.b > 0:
        residual = factorization_residual(base, pert, gamma, 1j)
        if residual > FACTORIZATION_TOL * max(operator_norm(h), 1.0):
            raise InvariantViolation(
                f"factorization residual {residual:.3e}", MODULE, "form-factorization"
            )
    return PerturbedOperator(base, pert, gamma, h, residual)


def factorization_residual(base: GappedOperator, pert: FormPerturbation,
                           gamma: complex, z: complex) -> float:
    """||(H - z) - H_ab^{1/2} ((H0 - z) H_ab^{-1} + gamma C_ab) H_ab^{1/2}||"""
    a, b = pert.a, pert.b
    half = base.h_ab_power(a, b, 0.5)
    inv = base.h_ab_power(a, b, -1.0)
    eye = np.eye(base.dim)
    c_hat = (base.h0 - z * eye) @ inv + gamma * pert.c_ab
    h = base.h0 + gamma * pert.v
    return operator_norm((h - z * eye) - half @ c_hat @ half)


def spectral_strip(base: GappedOperator, pert: FormPerturbation, gamma: float) -> StripResult:
    """Strip around iR free of spectrum for |gamma| (a + b delta) < delta"""
    delta = base.delta
    width = abs(gamma) * (pert.a + pert.b * delta)
    if not width < delta:
        message = (f"|gamma|(a + b delta) = {width:.6g} is not below delta = {delta:.6g}")
        logger.warning("Spectral strip unavailable: %s", message)
        return StripResult(None, False, message)

    lo, hi = -delta + width, delta - width
    h = base.h0 + gamma * pert.v
    if pert.symmetric and complex(gamma).imag == 0.0:
        inside = [x for x in eigh(h).eigenvalues if lo < x < hi]
    else:
        inside = [x for x in sla.eigvals(h) if lo < x.real < hi]
    if inside:
        return StripResult((lo, hi), False, f"{len(inside)} eigenvalue(s) inside the strip")
    return StripResult((lo, hi), True, "")


def ab_from_omega(base: GappedOperator, v: Any, omega: float,
                  steps: int = 64) -> Optional[Tuple[float, float]]:
    """First (a, b) on a grid with a + b delta < omega delta and ||C_ab|| <= 1.

    The grid runs over a in [0, omega delta); for each a the smallest feasible
    b is found by bisection (||C_ab|| decreases in b).
    """
    v = as_square(v, "V")
    _check_dims(base, v)
    if not omega > 0:
        raise InputError("omega must be positive", MODULE, "omega-positive")
    delta = base.delta
    if operator_norm(v) == 0.0:
        return 0.0, 0.0

    rho_full, _ = compute_rho(base, v)

    def feasible(a: float, b: float) -> bool:
        return a + b > 0 and operator_norm(compute_c_ab(base, v, a, b)) <= 1.0 + FEASIBILITY_TOL

    budget = omega * delta
    for a in np.linspace(0.0, budget, steps, endpoint=False):
        if a == 0.0:
            b = rho_full
        else:
            lo, hi = 0.0, max(rho_full, 1e-300)
            if not feasible(a, hi):
                continue
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if feasible(a, mid):
                    hi = mid
                else:
                    lo = mid
            b = hi
        if a + b * delta < budget and feasible(a, b):
            return float(a), float(b)
    return None


def quadratic_bound_holds(base: GappedOperator, v: Any, a: float, b: float,
                          samples: int = 2000, seed: int = 0) -> bool:
    """|<Vu, u>| <= a||u||^2 + b|| |H0|^{1/2} u ||^2 on random test vectors"""
    v = as_square(v, "V")
    rng = np.random.default_rng(seed)
    u = random_complex(rng, base.dim, samples)
    u /= np.linalg.norm(u, axis=0)
    lhs = np.abs(np.einsum('ij,ij->j', u.conj(), v @ u))
    rhs = a + b * np.linalg.norm(base.abs_sqrt @ u, axis=0) ** 2
    return bool(np.all(lhs <= rhs * (1 + 1e-12)))


def random_instance(rng: np.random.Generator, n: int, symmetric: bool = True,
                    rho_half: Optional[float] = None, rho_full: Optional[float] = None,
                    delta: float = 1.0) -> Tuple[GappedOperator, ComplexMatrix]:
    """Gapped H0 with a random V scaled to the requested rho"""
    base = GappedOperator.from_matrix(random_gapped_hermitian(rng, n, delta))
    v = random_hermitian(rng, n) if symmetric else random_complex(rng, n, n)
    full, half = compute_rho(base, v)
    if rho_half is not None:
        v = v * (rho_half / half)
    elif rho_full is not None:
        v = v * (rho_full / full)
    return base, v
