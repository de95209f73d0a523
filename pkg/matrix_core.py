"""
Dense complex matrix kernel for gapdiag.

Hermitian eigendecomposition, matrix functions, operator norms, an
ordered-Schur spectral splitting used as ground truth by every other module,
and the JSON matrix exchange format.

All functions are pure and operate on ``numpy`` arrays of dtype complex128;
inputs are never modified.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from errors import InputError, InvariantViolation, PreconditionError

logger = logging.getLogger(__name__)

MODULE = "matrix_core"

# A ComplexMatrix is a 2-D complex128 ndarray.
ComplexMatrix = np.ndarray

HERMITIAN_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
COMMUTATION_TOL = 1e-9
SCHUR_MARGIN = 1e-8


def scaled(tol: float, scale: float) -> float:
    """Absolute-plus-relative tolerance tol * (1 + scale)"""
    return tol * (1.0 + scale)


def as_matrix(data: Any, name: str = "matrix") -> ComplexMatrix:
    """Convert to a finite 2-D complex matrix, rejecting NaN/Inf"""
    try:
        a = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} is not numeric: {e}", MODULE, "finite-entries") from e
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {a.shape}", MODULE, "shape")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries", MODULE, "finite-entries")
    return a


def as_square(data: Any, name: str = "matrix") -> ComplexMatrix:
    """Convert to a finite square complex matrix"""
    a = as_matrix(data, name)
    if a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be square, got shape {a.shape}", MODULE, "shape")
    return a


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose"""
    return a.conj().T


def operator_norm(a: Any) -> float:
    """Largest singular value"""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(sla.svdvals(a)[0])


def is_hermitian(a: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    """Hermitian to relative tolerance"""
    return operator_norm(a - dagger(a)) <= scaled(tol, operator_norm(a))


def hermitian_part(a: ComplexMatrix) -> ComplexMatrix:
    """(A + A*) / 2"""
    return 0.5 * (a + dagger(a))


@dataclass(frozen=True)
class HermitianEigensystem:
    """Ascending eigenvalues and unitary eigenvector columns"""
    eigenvalues: np.ndarray
    eigenvectors: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def eigh(a: Any, tol: float = HERMITIAN_TOL) -> HermitianEigensystem:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as (A + A*)/2 before decomposition; inputs
    further than ``tol`` (relative) from Hermitian are rejected.
    """
    a = as_square(a)
    if not is_hermitian(a, tol):
        raise InputError("matrix is not Hermitian", MODULE, "hermitian-input")
    sym = hermitian_part(a)
    values, vectors = sla.eigh(sym)
    system = HermitianEigensystem(np.asarray(values, dtype=float), vectors)

    norm_a = operator_norm(sym)
    residual = operator_norm(sym - system.reconstruct())
    if residual > scaled(RECONSTRUCTION_TOL, norm_a):
        raise InvariantViolation(
            f"eigendecomposition residual {residual:.3e} too large", MODULE, "eigh-reconstruction"
        )
    return system


def matrix_function(a: Any, f: Callable[[np.ndarray], np.ndarray]) -> ComplexMatrix:
    """V f(Lambda) V* for Hermitian A and a real scalar function f"""
    system = eigh(a)
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.asarray(f(system.eigenvalues), dtype=np.complex128)
    if not np.all(np.isfinite(values)):
        raise PreconditionError(
            "function is undefined at an eigenvalue", MODULE, "function-finite-on-spectrum"
        )
    v = system.eigenvectors
    return (v * values) @ dagger(v)


def inverse_sqrt(a: Any) -> ComplexMatrix:
    """A^{-1/2} for Hermitian positive definite A"""
    return matrix_function(a, lambda x: np.where(x > 0, x, np.nan) ** -0.5)


def sqrtm_psd(a: Any) -> ComplexMatrix:
    """A^{1/2} for Hermitian positive semidefinite A"""
    return matrix_function(a, lambda x: np.sqrt(np.clip(x, 0.0, None)))


def spectral_projections(a: Any) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Orthogonal spectral projections of Hermitian A onto positive and negative spectrum"""
    system = eigh(a)
    if np.any(system.eigenvalues == 0.0):
        raise PreconditionError("zero eigenvalue: splitting undefined", MODULE, "zero-in-resolvent-set")
    v = system.eigenvectors
    positive = system.eigenvalues > 0
    p_plus = v[:, positive] @ dagger(v[:, positive])
    p_minus = v[:, ~positive] @ dagger(v[:, ~positive])
    return p_plus, p_minus


def orthonormal_basis(q: ComplexMatrix, rcond: float = 1e-10) -> ComplexMatrix:
    """Orthonormal column basis of range(Q) with rank cutoff rcond * ||Q||"""
    return sla.orth(as_matrix(q), rcond=rcond)


def idempotency_residual(q: ComplexMatrix) -> float:
    """||Q^2 - Q||"""
    return operator_norm(q @ q - q)


def commutation_residual(h: ComplexMatrix, q: ComplexMatrix) -> float:
    """||HQ - QH||"""
    return operator_norm(h @ q - q @ h)


@dataclass(frozen=True)
class ProjectionPair:
    """Complementary projections Q+ and Q- = I - Q+"""
    q_plus: ComplexMatrix
    q_minus: ComplexMatrix
    idempotency_residual: float = 0.0
    commutation_residual: float = 0.0
    method: str = "exact"
    node_count: int = 0

    @classmethod
    def from_plus(cls, q_plus: ComplexMatrix, h: Optional[ComplexMatrix] = None,
                  method: str = "exact", node_count: int = 0) -> "ProjectionPair":
        """Build the pair from Q+, recording residuals against h when given"""
        q_plus = as_square(q_plus, "Q+")
        eye = np.eye(q_plus.shape[0], dtype=np.complex128)
        comm = commutation_residual(h, q_plus) if h is not None else 0.0
        return cls(q_plus, eye - q_plus, idempotency_residual(q_plus), comm, method, node_count)

    @property
    def dim(self) -> int:
        return self.q_plus.shape[0]

    @property
    def rank_plus(self) -> int:
        return int(round(np.trace(self.q_plus).real))

    def is_orthogonal(self, tol: float = 1e-9) -> bool:
        return operator_norm(self.q_plus - dagger(self.q_plus)) <= scaled(tol, operator_norm(self.q_plus))


def eigenvalue_axis_margin(h: ComplexMatrix) -> float:
    """Smallest |Re lambda| over the spectrum of h"""
    values = sla.eigvals(as_square(h))
    return float(np.min(np.abs(values.real))) if values.size else np.inf


def schur_split(h: Any, margin: float = SCHUR_MARGIN) -> ProjectionPair:
    """Spectral splitting by ordered complex Schur form and one Sylvester solve.

    With T = Z* H Z ordered so that the leading k eigenvalues have positive
    real part, Q+ = Z [[I, Y], [0, 0]] Z* where T11 Y - Y T22 = T12.
    """
    h = as_square(h, "H")
    n = h.shape[0]
    norm_h = operator_norm(h)
    if eigenvalue_axis_margin(h) < margin * norm_h:
        raise PreconditionError(
            "eigenvalue too close to the imaginary axis", MODULE, "axis-margin"
        )

    t, z, k = sla.schur(h, output='complex', sort='rhp')
    q_t = np.zeros((n, n), dtype=np.complex128)
    q_t[:k, :k] = np.eye(k)
    if 0 < k < n:
        y = sla.solve_sylvester(t[:k, :k], -t[k:, k:], t[:k, k:])
        q_t[:k, k:] = y
    q_plus = z @ q_t @ dagger(z)
    pair = ProjectionPair.from_plus(q_plus, h, method="schur")

    q_norm = operator_norm(q_plus)
    if pair.commutation_residual > COMMUTATION_TOL * max(norm_h, 1.0) * max(q_norm, 1.0):
        raise InvariantViolation(
            f"commutation residual {pair.commutation_residual:.3e}", MODULE, "schur-commutation"
        )
    return pair


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def random_complex(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    """Matrix with independent standard complex Gaussian entries"""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_hermitian(rng: np.random.Generator, n: int) -> ComplexMatrix:
    """Random Hermitian matrix with unit operator norm"""
    a = random_complex(rng, n, n)
    h = hermitian_part(a)
    return h / operator_norm(h)


def random_unitary(rng: np.random.Generator, n: int) -> ComplexMatrix:
    """Haar-distributed unitary"""
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1)


def random_gapped_hermitian(rng: np.random.Generator, n: int, delta: float = 1.0,
                            spread: float = 4.0, n_plus: Optional[int] = None) -> ComplexMatrix:
    """Hermitian matrix with spectrum in (-delta*spread, -delta] U [delta, delta*spread]"""
    if n_plus is None:
        n_plus = int(rng.integers(1, n)) if n > 1 else 1
    magnitudes = delta * (1.0 + (spread - 1.0) * rng.random(n))
    magnitudes[0] = delta
    signs = np.array([1.0] * n_plus + [-1.0] * (n - n_plus))
    u = random_unitary(rng, n)
    return (u * (signs * magnitudes)) @ dagger(u)


# ---------------------------------------------------------------------------
# JSON exchange format
# ---------------------------------------------------------------------------

def matrix_to_json(a: ComplexMatrix) -> Dict[str, Any]:
    """{"rows": n, "cols": m, "data": [[re, im], ...]} in row-major order"""
    a = as_matrix(a)
    rows, cols = a.shape
    return {
        'rows': rows,
        'cols': cols,
        'data': [[float(x.real), float(x.imag)] for x in a.reshape(-1)],
    }


def matrix_from_json(obj: Dict[str, Any]) -> ComplexMatrix:
    """Parse the JSON matrix format, rejecting NaN/Inf and size mismatches"""
    try:
        rows = int(obj['rows'])
        cols = int(obj['cols'])
        data = obj['data']
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed matrix object: {e}", MODULE, "json-format") from e
    if rows < 0 or cols < 0 or len(data) != rows * cols:
        raise InputError(
            f"rows*cols = {rows * cols} but {len(data)} entries given", MODULE, "json-format"
        )
    try:
        pairs = np.array(data, dtype=float).reshape(rows * cols, 2)
    except (TypeError, ValueError) as e:
        raise InputError(f"entries must be [re, im] pairs: {e}", MODULE, "json-format") from e
    if not np.all(np.isfinite(pairs)):
        raise InputError("matrix contains NaN or Inf", MODULE, "finite-entries")
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(rows, cols)


def _reject_constant(token: str):
    raise InputError(f"non-finite JSON constant {token}", MODULE, "finite-entries")


def read_json(path: Union[str, Path]) -> Any:
    """Read JSON from disk, rejecting NaN/Infinity literals"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f, parse_constant=_reject_constant)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}", MODULE, "input-file") from e
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON in {path}: {e}", MODULE, "json-format") from e


def load_matrix(path: Union[str, Path]) -> ComplexMatrix:
    """Load a matrix file"""
    return matrix_from_json(read_json(path))


def model_to_json(h0: ComplexMatrix, v: ComplexMatrix) -> Dict[str, Any]:
    """{"h0": <matrix>, "v": <matrix>}"""
    return {'h0': matrix_to_json(h0), 'v': matrix_to_json(v)}


def load_model(path: Union[str, Path]) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Load an (h0, v) model file"""
    obj = read_json(path)
    if not isinstance(obj, dict) or 'h0' not in obj or 'v' not in obj:
        raise InputError(f"{path} is not a model file with 'h0' and 'v'", MODULE, "json-format")
    h0 = matrix_from_json(obj['h0'])
    v = matrix_from_json(obj['v'])
    if h0.shape != v.shape or h0.shape[0] != h0.shape[1]:
        raise InputError("h0 and v must be square with equal shapes", MODULE, "shape")
    return h0, v
