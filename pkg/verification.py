"""
Seeded property sweeps over random gapped instances.

Each instance draws a gapped Hermitian H0, a symmetric or nonsymmetric V
scaled to a target rho, and a real or complex coupling with iR in the
resolvent set. The sweep checks quadrature against the Schur oracle, the
angular norm bounds (orthogonal and oblique references), the accretivity
witnesses, the resolvent decay bound, norm/distance duality and the angular
metric triangle inequality.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from angular import (
    ReferenceProjections,
    accretivity_witnesses,
    angular_distance,
    angular_from_projections,
    norm_from_distance,
    perturbed_reference,
    verify_norm_bound,
    w_accretivity,
)
from errors import GapdiagError, PreconditionError
from form_perturbation import form_perturbation, random_instance
from matrix_core import ProjectionPair, dagger, hermitian_part, operator_norm, random_unitary, schur_split
from riesz_projector import riesz_split, verify_decay

logger = logging.getLogger(__name__)

MODULE = "verification"

DECAY_ETAS = (1.0, 10.0, 100.0)


@dataclass
class CheckTally:
    checked: int = 0
    skipped: int = 0
    violations: int = 0
    worst: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {'checked': self.checked, 'skipped': self.skipped,
                'violations': self.violations, 'worst': float(self.worst)}


@dataclass
class SweepReport:
    seed: int
    count: int
    tallies: Dict[str, CheckTally] = field(default_factory=dict)
    failures: List[Dict[str, str]] = field(default_factory=list)

    def tally(self, name: str) -> CheckTally:
        return self.tallies.setdefault(name, CheckTally())

    def fail(self, name: str, message: str, limit: int = 20):
        self.tally(name).violations += 1
        if len(self.failures) < limit:
            self.failures.append({'module': MODULE, 'invariant': name, 'message': message})

    @property
    def passed(self) -> bool:
        return all(t.violations == 0 for t in self.tallies.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'count': self.count,
            'pass': self.passed,
            'checks': {name: t.to_dict() for name, t in sorted(self.tallies.items())},
            'failures': self.failures,
        }


def _random_projection(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    u = random_unitary(rng, n)[:, :k]
    return u @ dagger(u)


def _check_instance(rng: np.random.Generator, report: SweepReport, min_dim: int, max_dim: int,
                    oracle_tol: float):
    n = int(rng.integers(min_dim, max_dim + 1))
    symmetric_v = bool(rng.integers(0, 2))
    complex_gamma = bool(rng.integers(0, 2))
    target = float(rng.uniform(0.05, 0.45))
    base, v = random_instance(rng, n, symmetric=symmetric_v, rho_half=target)
    pert = form_perturbation(base, v)

    # |gamma| rho_full <= 0.9 keeps a spectral margin of 0.1 delta around iR
    scale = min(1.0, 0.9 / pert.rho_full) if pert.rho_full > 0 else 1.0
    gamma = scale * (np.exp(1j * rng.uniform(0.1, np.pi - 0.1)) if complex_gamma else 1.0)
    h = base.h0 + gamma * v
    hermitian = symmetric_v and not complex_gamma

    tally = report.tally('oracle-equivalence')
    oracle = schur_split(h)
    q = riesz_split(h)
    distance = operator_norm(q.q_plus - oracle.q_plus)
    tally.checked += 1
    tally.worst = max(tally.worst, distance)
    if distance > oracle_tol:
        report.fail('oracle-equivalence', f"n={n}: ||riesz - schur|| = {distance:.3e}")

    rho_half = abs(gamma) * pert.rho_half
    rho_full = abs(gamma) * pert.rho_full
    p = ProjectionPair(base.p_plus, base.p_minus, method="eigh")
    if hermitian:
        q = ProjectionPair.from_plus(hermitian_part(oracle.q_plus), h, method="schur")
    else:
        q = oracle

    tally = report.tally('norm-bound')
    eligible = rho_half < 1.0 if hermitian else (rho_half < 0.5 and rho_full < 1.0)
    if not eligible:
        tally.skipped += 1
        report.tally('accretivity-witness').skipped += 1
    else:
        if rng.integers(0, 2):
            ref = ReferenceProjections.from_pair(p)
        else:
            ref = perturbed_reference(base.p_plus, float(rng.uniform(0.001, 0.02)), rng)
        try:
            x = angular_from_projections(q, ref)
            bound = verify_norm_bound(rho_half, ref.nu, hermitian, x, rho_full=rho_full)
        except PreconditionError as e:
            tally.skipped += 1
            logger.debug("norm bound skipped: %s", e)
        else:
            tally.checked += 1
            tally.worst = max(tally.worst, max(bound.norm_x_plus, bound.norm_x_minus) / max(bound.bound, 1e-300))
            for failure in bound.failures:
                report.fail('norm-bound', f"n={n}: {failure['message']}")

        tally = report.tally('accretivity-witness')
        x = angular_from_projections(q, ReferenceProjections.from_pair(p))
        for name, mu_plus, mu_minus in accretivity_witnesses(rho_half, hermitian):
            result = w_accretivity(h, mu_plus, mu_minus, p, x)
            tally.checked += 1
            if not result.passed:
                report.fail('accretivity-witness',
                            f"n={n}: {name} min eigenvalue {result.min_eigenvalue:.3e}")

    tally = report.tally('resolvent-decay')
    if complex_gamma:
        tally.skipped += 1
    else:
        decay = verify_decay(base, pert, float(np.real(gamma)), DECAY_ETAS)
        tally.checked += 1
        tally.worst = max(tally.worst, decay.max_ratio)
        if not decay.passed:
            report.fail('resolvent-decay', f"n={n}: max ratio {decay.max_ratio:.6g} {decay.diagnostic}")

    tally = report.tally('norm-distance-duality')
    if not hermitian:
        tally.skipped += 1
    else:
        x = angular_from_projections(q, ReferenceProjections.from_pair(p))
        d = operator_norm(base.p_plus - q.q_plus)
        if d < 1.0 - 1e-6:
            gap = abs(norm_from_distance(d) - x.norm_x_plus)
            tally.checked += 1
            tally.worst = max(tally.worst, gap)
            if gap > 1e-10 * (1.0 + x.norm_x_plus):
                report.fail('norm-distance-duality', f"n={n}: mismatch {gap:.3e}")
        else:
            tally.skipped += 1

    tally = report.tally('angular-triangle')
    k = int(rng.integers(1, n))
    p_l, p_m, p_n = (_random_projection(rng, n, k) for _ in range(3))
    excess = angular_distance(p_l, p_n) - angular_distance(p_l, p_m) - angular_distance(p_m, p_n)
    tally.checked += 1
    tally.worst = max(tally.worst, excess)
    if excess > 1e-10:
        report.fail('angular-triangle', f"n={n}: triangle excess {excess:.3e}")


def run_property_sweep(seed: int, count: int, min_dim: int = 4, max_dim: int = 12,
                       oracle_tol: float = 1e-6,
                       progress: Optional[Callable[[int], None]] = None) -> SweepReport:
    """Run ``count`` seeded random instances through every check"""
    rng = np.random.default_rng(seed)
    report = SweepReport(seed, count)
    for index in range(count):
        try:
            _check_instance(rng, report, min_dim, max_dim, oracle_tol)
        except GapdiagError as e:
            report.fail(e.invariant, f"instance {index}: {e}")
        if progress is not None:
            progress(index)
    return report
