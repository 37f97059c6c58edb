# -*- coding: utf-8 -*-
"""
attack_sweep - certify built-in attack families over a parameter grid

Each row pairs the certifier's verdict on the observed behavior with Eve's
guessing probability for the same model. A row with G above 1/4 must fail
at least one test.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from adversary import (EXACT_GAP, classical_guess_prob, dephasing_model, four_lambda_attack,
                       optimal_guess, werner_model)
from certifier import CertTolerances, CertificationVerdict, certify
from scenario import Behavior, behavior_of

SWEEP_COLUMNS = ("family", "parameter", "S", "P-uniformity residual", "extremal",
                 "test1", "test2", "certified", "G lower", "G upper", "exact")
SWEEP_DELIMITER = "\t"


@dataclass(frozen=True)
class SweepRow:
    family: str
    parameter: float
    s_value: float = float('nan')
    uniformity_residual: float = float('nan')
    extremal: bool = False
    test1: bool = False
    test2: bool = False
    certified: bool = False
    g_lower: float = float('nan')
    g_upper: float = float('nan')
    exact: bool = False
    elapsed_ms: float = 0.0
    error: Optional[str] = None


def _werner(v: float) -> Tuple[Behavior, float, float]:
    model = werner_model(v)
    eve = optimal_guess(model)
    return behavior_of(model.strategy()), eve.value, eve.upper_bound


def _dephasing(t: float) -> Tuple[Behavior, float, float]:
    model = dephasing_model(t)
    eve = optimal_guess(model)
    return behavior_of(model.strategy()), eve.value, eve.upper_bound


def _four_lambda(q: float) -> Tuple[Behavior, float, float]:
    g, behavior = classical_guess_prob(four_lambda_attack(q))
    return behavior, g, g


FAMILIES: Dict[str, Callable[[float], Tuple[Behavior, float, float]]] = {
    'werner': _werner,
    'classical': _four_lambda,
    'dephasing': _dephasing,
}

DEFAULT_GRIDS: Dict[str, Tuple[float, ...]] = {
    'werner': tuple(float(x) for x in np.round(np.linspace(0.0, 1.0, 21), 10)),
    'classical': tuple(float(x) for x in np.round(np.linspace(0.0, 1.0, 11), 10)),
    'dephasing': tuple(float(x) for x in np.round(np.linspace(0.0, 1.0, 11), 10)),
}


def evaluate_row(family: str, parameter: float,
                 tolerances: CertTolerances = CertTolerances()) -> SweepRow:
    """One sweep row; errors are stored on the row"""
    start_time = time.time()
    try:
        behavior, g_lower, g_upper = FAMILIES[family](parameter)
        verdict: CertificationVerdict = certify(behavior, tolerances)
        return SweepRow(
            family=family,
            parameter=parameter,
            s_value=verdict.s_value,
            uniformity_residual=verdict.uniformity_residual,
            extremal=verdict.extremality.extremal,
            test1=verdict.test1_pass,
            test2=verdict.test2_pass,
            certified=verdict.certified,
            g_lower=g_lower,
            g_upper=g_upper,
            exact=g_upper - g_lower <= EXACT_GAP,
            elapsed_ms=(time.time() - start_time) * 1000,
        )
    except Exception as e:
        return SweepRow(family=family, parameter=parameter,
                        elapsed_ms=(time.time() - start_time) * 1000,
                        error=f"{type(e).__name__}: {e}")


def attack_sweep(family: str, grid: Optional[Sequence[float]] = None,
                 tolerances: CertTolerances = CertTolerances(), jobs: int = 1) -> List[SweepRow]:
    """One row per grid point, in grid order; jobs > 1 uses a process pool"""
    if family not in FAMILIES:
        raise ValueError(f"Unknown attack family {family!r}; choose from {sorted(FAMILIES)}")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    grid = DEFAULT_GRIDS[family] if grid is None else tuple(float(p) for p in grid)

    if jobs == 1 or len(grid) < 2:
        return [evaluate_row(family, p, tolerances) for p in grid]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(evaluate_row, [family] * len(grid), grid, [tolerances] * len(grid)))


def full_sweep(tolerances: CertTolerances = CertTolerances(), jobs: int = 1) -> List[SweepRow]:
    """All built-in families over their default grids"""
    rows = []
    for family in FAMILIES:
        rows.extend(attack_sweep(family, tolerances=tolerances, jobs=jobs))
    return rows


def theorem_violations(rows: Sequence[SweepRow], slack: float = 1e-9) -> List[SweepRow]:
    """Certified rows whose certified upper bound on G exceeds 1/4 + slack; expected empty"""
    return [r for r in rows if r.error is None and r.certified and r.g_upper > 0.25 + slack]


def format_sweep_table(rows: Sequence[SweepRow]) -> str:
    """Tab-delimited table with a header line; errored rows carry the error text"""
    lines = [SWEEP_DELIMITER.join(SWEEP_COLUMNS + ("error",))]
    for r in rows:
        cells = [r.family, f"{r.parameter:.6g}", f"{r.s_value:.12f}", f"{r.uniformity_residual:.6e}",
                 str(r.extremal), str(r.test1), str(r.test2), str(r.certified),
                 f"{r.g_lower:.12f}", f"{r.g_upper:.12f}", str(r.exact), r.error or ""]
        lines.append(SWEEP_DELIMITER.join(cells))
    return "\n".join(lines) + "\n"


def print_sweep(rows: Sequence[SweepRow]):
    """Console summary in the banner style of the CLI"""
    print("\n" + "=" * 100)
    print("ATTACK SWEEP")
    print("=" * 100)
    print(f"{'family':<11} {'param':<7} {'S':<12} {'P-unif':<10} {'extremal':<9} "
          f"{'certified':<10} {'G lower':<10} {'G upper':<10}")
    print("-" * 100)
    for r in rows:
        if r.error:
            print(f"{r.family:<11} {r.parameter:<7.3f} ❌ {r.error}")
            continue
        mark = "✅" if r.certified else "❌"
        print(f"{r.family:<11} {r.parameter:<7.3f} {r.s_value:<12.6f} {r.uniformity_residual:<10.2e} "
              f"{str(r.extremal):<9} {mark:<10} {r.g_lower:<10.6f} {r.g_upper:<10.6f}")


if __name__ == "__main__":
    rows = full_sweep()
    print_sweep(rows)
    bad = theorem_violations(rows)
    print(f"\n{len(rows)} rows, {sum(r.certified for r in rows)} certified, {len(bad)} violations")
