# -*- coding: utf-8 -*-
"""
Certifier - two tests for two bits of device-independent randomness

Test 1 (source):  |S − 4√3| ≤ s_tol
Test 2 (device):  max_a |P(a|A_4) − 1/4| ≤ uniform_tol  and  Q extremal

Q_a = γ_a^0·𝟙 + γ_a^1·Z + γ_a^2·X + γ_a^3·Y with
  γ_a^0 = P(a|A_4)
  γ_a^1 =  (√3/2)(E_{a|4,1} + E_{a|4,2})
  γ_a^2 =  (√3/2)(E_{a|4,1} + E_{a|4,3})
  γ_a^3 = −(√3/2)(E_{a|4,2} + E_{a|4,3})

Q is extremal iff every Q_a is a rank-one positive operator and the four
are linearly independent:
  tr Q_a > trace_min
  (E1+E2)² + (E1+E3)² + (E2+E3)² − (4/3)·P(a|A_4)² ≈ 0   (|·| < det_zero)
  σ_min([E_{a|4,l}]_{a,l=1..3}) > rank_min

Verdict: both pass → guessing_bound = 1/4, certified_bits = 2
         otherwise  → guessing_bound = 1,   certified_bits = 0
"""

import json
import math
import os
import time
import uuid
from dataclasses import asdict, dataclass, replace
from datetime import datetime
from typing import List, Optional, Tuple

import numpy as np

import qlin
from ebi import QUANTUM_MAX, ebi_value
from scenario import POVM_OUTCOMES, Behavior, cond_expect

SQRT3_HALF = math.sqrt(3.0) / 2.0
UNIFORM_MARGINAL = 1.0 / POVM_OUTCOMES
CERTIFIED_GUESS = 0.25
UNCERTIFIED_GUESS = 1.0

REPORT_SCHEMA = "ebi-verdict v1"


class MissingStatistics(ValueError):
    pass


@dataclass(frozen=True)
class ExtremalityTolerances:
    trace_min: float = 1e-6
    det_zero: float = 1e-9
    rank_min: float = 1e-6


@dataclass(frozen=True)
class CertTolerances:
    s_tol: float = 1e-9
    uniform_tol: float = 1e-9
    det_zero: float = 1e-9
    trace_min: float = 1e-6
    rank_min: float = 1e-6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value}")

    def extremality(self) -> ExtremalityTolerances:
        return ExtremalityTolerances(self.trace_min, self.det_zero, self.rank_min)

    def for_shots(self, shots: int) -> 'CertTolerances':
        """
        Heuristic finite-shot widening: 3/√shots per estimated quantity.

        S aggregates 12 correlators. Lower thresholds are left alone.
        """
        unit = 3.0 / math.sqrt(shots)
        return replace(self,
                       s_tol=max(self.s_tol, 12 * unit),
                       uniform_tol=max(self.uniform_tol, unit),
                       det_zero=max(self.det_zero, unit))

    def loosened(self, factor: float) -> 'CertTolerances':
        """Every tolerance made more permissive by `factor` ≥ 1"""
        if factor < 1.0:
            raise ValueError("factor must be >= 1")
        return CertTolerances(self.s_tol * factor, self.uniform_tol * factor,
                              self.det_zero * factor, self.trace_min / factor,
                              self.rank_min / factor)


@dataclass(frozen=True, eq=False)
class QbitPovm:
    gammas: Tuple[qlin.BlochCoeffs, ...]
    operators: Tuple[np.ndarray, ...]

    @classmethod
    def from_gammas(cls, gammas) -> 'QbitPovm':
        gammas = tuple(qlin.BlochCoeffs(*g) for g in gammas)
        return cls(gammas, tuple(qlin.from_bloch(g) for g in gammas))

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(sum(self.operators) - qlin.I2)))

    def min_eigenvalues(self) -> List[float]:
        return [qlin.min_eigenvalue(op) for op in self.operators]

    def determinants(self) -> List[float]:
        """det(c0𝟙 + r·σ) = c0² − |r|²"""
        return [g.c0 ** 2 - float(np.dot(g.vector, g.vector)) for g in self.gammas]


@dataclass(frozen=True)
class OutcomeExtremality:
    outcome: int
    trace_value: float
    trace_ok: bool
    det_value: float
    det_identity_residual: float
    det_ok: bool
    min_eigenvalue: float
    positive: bool


@dataclass(frozen=True)
class ExtremalityReport:
    outcomes: Tuple[OutcomeExtremality, ...]
    singular_values: Tuple[float, ...]
    rank3: bool
    completeness_residual: float
    complete: bool
    extremal: bool

    @property
    def max_det_residual(self) -> float:
        return max(abs(o.det_identity_residual) for o in self.outcomes)


@dataclass(frozen=True)
class CertificationVerdict:
    test1_pass: bool
    s_value: float
    s_tol: float
    test2_pass: bool
    uniformity_residual: float
    uniform_tol: float
    extremality: ExtremalityReport
    certified_bits: float
    guessing_bound: float

    @property
    def certified(self) -> bool:
        return self.test1_pass and self.test2_pass

    def report_fields(self) -> List[Tuple[str, object]]:
        """Stable key/value pairs for structured reports"""
        ext = self.extremality
        fields = [
            ("verdict_schema", REPORT_SCHEMA),
            ("test1_pass", self.test1_pass),
            ("s_value", self.s_value),
            ("s_target", QUANTUM_MAX),
            ("s_tol", self.s_tol),
            ("test2_pass", self.test2_pass),
            ("uniformity_residual", self.uniformity_residual),
            ("uniform_tol", self.uniform_tol),
            ("extremal", ext.extremal),
        ]
        for o in ext.outcomes:
            a = o.outcome
            fields += [
                (f"trace_ok_{a}", o.trace_ok),
                (f"trace_{a}", o.trace_value),
                (f"det_{a}", o.det_value),
                (f"det_identity_residual_{a}", o.det_identity_residual),
                (f"positive_{a}", o.positive),
            ]
        fields += [
            ("rank3", ext.rank3),
            ("singular_values", " ".join(f"{s:.12g}" for s in ext.singular_values)),
            ("completeness_residual", ext.completeness_residual),
            ("complete", ext.complete),
            ("certified_bits", self.certified_bits),
            ("guessing_bound", self.guessing_bound),
        ]
        return fields


def _require_pairs(b: Behavior, settings):
    missing = [l for l in settings if not b.has_pair(l)]
    if missing:
        raise MissingStatistics(f"No statistics for (A_4, B_l) with l in {missing}")


def reconstruct_q(b: Behavior) -> QbitPovm:
    """Build Q from P(a|A_4) and E_{a|4,l}, l = 1..3"""
    _require_pairs(b, (1, 2, 3))
    gammas = []
    for a in range(1, POVM_OUTCOMES + 1):
        e1, e2, e3 = (cond_expect(b, a, l) for l in (1, 2, 3))
        p = float(np.mean([b.povm_marginal(a, l) for l in (1, 2, 3)]))
        gammas.append((p,
                       SQRT3_HALF * (e1 + e2),
                       SQRT3_HALF * (e1 + e3),
                       -SQRT3_HALF * (e2 + e3)))
    return QbitPovm.from_gammas(gammas)


def conditional_matrix(b: Behavior) -> np.ndarray:
    """[E_{a|4,l}] for a, l = 1..3"""
    return np.array([[cond_expect(b, a, l) for l in (1, 2, 3)] for a in (1, 2, 3)])


def det_identity_residual(b: Behavior, a: int) -> float:
    e1, e2, e3 = (cond_expect(b, a, l) for l in (1, 2, 3))
    p = float(np.mean([b.povm_marginal(a, l) for l in (1, 2, 3)]))
    return (e1 + e2) ** 2 + (e1 + e3) ** 2 + (e2 + e3) ** 2 - (4.0 / 3.0) * p ** 2


def check_extremality(q: QbitPovm, b: Behavior,
                      tol: ExtremalityTolerances = ExtremalityTolerances()) -> ExtremalityReport:
    """
    Trace, determinant and rank diagnostics for Q = reconstruct_q(b).

    The determinant identity decides the rank-one flag; the direct
    determinant is reported next to it. Positivity and completeness of Q
    are checked explicitly with det_zero as tolerance.
    """
    outcomes = []
    dets = q.determinants()
    min_eigs = q.min_eigenvalues()
    for a in range(1, POVM_OUTCOMES + 1):
        trace_value = 2.0 * q.gammas[a - 1].c0
        residual = det_identity_residual(b, a)
        outcomes.append(OutcomeExtremality(
            outcome=a,
            trace_value=trace_value,
            trace_ok=trace_value > tol.trace_min,
            det_value=dets[a - 1],
            det_identity_residual=residual,
            det_ok=abs(residual) < tol.det_zero,
            min_eigenvalue=min_eigs[a - 1],
            positive=min_eigs[a - 1] >= -tol.det_zero,
        ))

    singular_values = tuple(float(s) for s in np.linalg.svd(conditional_matrix(b), compute_uv=False))
    rank3 = min(singular_values) > tol.rank_min
    completeness = q.completeness_residual()
    complete = completeness <= tol.det_zero

    extremal = (all(o.trace_ok and o.det_ok and o.positive for o in outcomes)
                and rank3 and complete)
    return ExtremalityReport(tuple(outcomes), singular_values, rank3, completeness, complete, extremal)


def certify(b: Behavior, tol: CertTolerances = CertTolerances()) -> CertificationVerdict:
    if not b.complete:
        raise MissingStatistics("Certification needs every (A_k, B_l) and (A_4, B_l) pair")

    s_value = ebi_value(b)
    test1 = abs(s_value - QUANTUM_MAX) <= tol.s_tol

    uniformity = float(np.max(np.abs(b.povm_marginals - UNIFORM_MARGINAL)))
    report = check_extremality(reconstruct_q(b), b, tol.extremality())
    test2 = uniformity <= tol.uniform_tol and report.extremal

    certified = test1 and test2
    guessing_bound = CERTIFIED_GUESS if certified else UNCERTIFIED_GUESS
    return CertificationVerdict(
        test1_pass=test1,
        s_value=s_value,
        s_tol=tol.s_tol,
        test2_pass=test2,
        uniformity_residual=uniformity,
        uniform_tol=tol.uniform_tol,
        extremality=report,
        certified_bits=-math.log2(guessing_bound) + 0.0,
        guessing_bound=guessing_bound,
    )


class Certifier:
    """
    Runs certify with per-behavior tolerances and keeps a decision log.

    Estimated behaviors get tolerances widened by CertTolerances.for_shots;
    exact behaviors use the configured tolerances as they are.
    """

    def __init__(self, tolerances: Optional[CertTolerances] = None, log_file: Optional[str] = None,
                 run_id: Optional[str] = None):
        self.tolerances = tolerances or CertTolerances()
        self.log_file = log_file if log_file is not None else os.getenv('EBI_CERT_LOG')
        self.run_id = run_id or str(uuid.uuid4())
        self.log: List[str] = []

    def tolerances_for(self, behavior: Behavior) -> CertTolerances:
        if behavior.estimated and behavior.shots:
            return self.tolerances.for_shots(behavior.shots)
        return self.tolerances

    def certify(self, behavior: Behavior, source: str = "") -> CertificationVerdict:
        start_time = time.time()
        tol = self.tolerances_for(behavior)
        verdict = certify(behavior, tol)
        elapsed_ms = (time.time() - start_time) * 1000

        self.log.append(f"S: {verdict.s_value:.6f}, uniformity: {verdict.uniformity_residual:.3g}, "
                        f"extremal: {verdict.extremality.extremal}")
        self._log_decision(verdict, tol, source, elapsed_ms)
        return verdict

    def _explain(self, verdict: CertificationVerdict) -> str:
        if verdict.certified:
            return "Maximal EBI violation and extremal uniform Q: two bits certified."
        reasons = []
        if not verdict.test1_pass:
            reasons.append(f"S = {verdict.s_value:.9f} is not 4√3 within {verdict.s_tol:g}")
        if verdict.uniformity_residual > verdict.uniform_tol:
            reasons.append(f"A_4 marginals deviate from 1/4 by {verdict.uniformity_residual:.3g}")
        if not verdict.extremality.extremal:
            reasons.append("Q is not an extremal four-outcome qubit POVM")
        return "; ".join(reasons) + "."

    def _log_decision(self, verdict: CertificationVerdict, tol: CertTolerances, source: str,
                      elapsed_ms: float = 0.0):
        """Append one JSON line per decision, stable field order"""
        if not self.log_file:
            return
        try:
            ext = verdict.extremality
            log_entry = {
                "run_id": self.run_id,
                "timestamp": datetime.now().isoformat(),
                "phase": "certify",
                "source": source,
                "tolerances": {k: float(v) for k, v in asdict(tol).items()},
                "diagnostics": {
                    "s_value": round(verdict.s_value, 12),
                    "uniformity_residual": float(verdict.uniformity_residual),
                    "min_singular_value": float(min(ext.singular_values)),
                    "max_det_residual": float(ext.max_det_residual),
                },
                "verdict": "certified" if verdict.certified else "rejected",
                "certified_bits": verdict.certified_bits,
                "guessing_bound": verdict.guessing_bound,
                "explanation": self._explain(verdict),
                "elapsed_ms": round(float(elapsed_ms), 3),
            }
            with open(self.log_file, 'a', encoding='utf-8') as f:
                f.write(json.dumps(log_entry) + '\n')
        except Exception:
            # Logging never breaks certification
            pass
