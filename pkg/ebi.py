# -*- coding: utf-8 -*-
"""
ebi - the elegant Bell inequality

S = E11 + E12 − E13 − E14
  + E21 − E22 + E23 − E24
  + E31 − E32 − E33 + E34   ≤ 6 (local), ≤ 4√3 (quantum)

Reference strategy (maximal violation):
- state |φ₊⟩ = (|00⟩ + |11⟩)/√2. The source text calls this "the singlet";
  we follow its explicit formula, not the conventional singlet.
- Alice: A_1 = Z, A_2 = X, A_3 = Y (a complete set of qubit MUBs)
- Bob:   B_l = (1/√3)·m_l·σ with m = (1,1,−1), (1,−1,1), (−1,1,1), (−1,−1,−1)
- A_4:   A_{a|4} = ¼(𝟙 + n_a·σ), tetrahedral n_a
"""

import itertools
import math
from typing import NamedTuple, Sequence, Tuple

import numpy as np

import qlin
from scenario import (ALICE_SETTINGS, BOB_SETTINGS, Behavior, Strategy,
                      behavior_of, correlators)

EBI_SIGNS = np.array([
    [+1, +1, -1, -1],
    [+1, -1, +1, -1],
    [+1, -1, -1, +1],
], dtype=int)

CLASSICAL_BOUND = 6.0
QUANTUM_MAX = 4.0 * math.sqrt(3.0)

_S3 = 1.0 / math.sqrt(3.0)

# (Z, X, Y) directions
BOB_DIRECTIONS = (
    (+1.0, +1.0, -1.0),
    (+1.0, -1.0, +1.0),
    (-1.0, +1.0, +1.0),
    (-1.0, -1.0, -1.0),
)
POVM_DIRECTIONS = (
    (-1.0, -1.0, -1.0),
    (-1.0, +1.0, +1.0),
    (+1.0, -1.0, +1.0),
    (+1.0, +1.0, -1.0),
)

PHI_PLUS = qlin.ket(1, 0, 0, 1)


class DeterministicAssignment(NamedTuple):
    alice: Tuple[int, ...]
    bob: Tuple[int, ...]


def ebi_value(b: Behavior) -> float:
    """S = Σ_{k,l} sign(k,l)·E_{k,l}"""
    return float(np.sum(EBI_SIGNS * correlators(b)))


def ebi_value_deterministic(assignment: DeterministicAssignment) -> float:
    """S of a local deterministic assignment evaluated directly on the ±1 values"""
    a = np.asarray(assignment.alice, dtype=float)
    b = np.asarray(assignment.bob, dtype=float)
    return float(a @ EBI_SIGNS @ b)


def reference_alice_observables() -> Tuple[np.ndarray, ...]:
    return (qlin.Z.copy(), qlin.X.copy(), qlin.Y.copy())


def reference_bob_observables() -> Tuple[np.ndarray, ...]:
    return tuple(qlin.from_bloch((0.0, *(_S3 * np.array(m)))) for m in BOB_DIRECTIONS)


def reference_povm() -> Tuple[np.ndarray, ...]:
    return tuple(qlin.from_bloch((0.25, *(0.25 * _S3 * np.array(n)))) for n in POVM_DIRECTIONS)


def reference_strategy() -> Strategy:
    return Strategy(
        state=PHI_PLUS.copy(),
        alice_obs=reference_alice_observables(),
        alice_povm=reference_povm(),
        bob_obs=reference_bob_observables(),
    )


def werner_state(v: float) -> np.ndarray:
    """v·|φ₊⟩⟨φ₊| + (1 − v)·𝟙/4"""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {v}")
    return v * qlin.projector(PHI_PLUS) + (1.0 - v) * np.eye(4, dtype=complex) / 4.0


def werner_strategy(v: float) -> Strategy:
    """Reference measurements on a Werner state of visibility v"""
    ref = reference_strategy()
    return Strategy(werner_state(v), ref.alice_obs, ref.alice_povm, ref.bob_obs)


def deterministic_strategy(assignment: DeterministicAssignment, povm_outcome: int = 1) -> Strategy:
    """
    Local deterministic strategy as degenerate observables ±𝟙 on |00⟩.

    A_4 always answers `povm_outcome`.
    """
    eye = np.eye(2, dtype=complex)
    povm = tuple(eye.copy() if a == povm_outcome else np.zeros((2, 2), dtype=complex)
                 for a in range(1, 5))
    return Strategy(
        state=qlin.basis_ket(4, 0),
        alice_obs=tuple(float(x) * eye for x in assignment.alice),
        alice_povm=povm,
        bob_obs=tuple(float(y) * eye for y in assignment.bob),
    )


def all_deterministic_assignments():
    for alice in itertools.product((+1, -1), repeat=ALICE_SETTINGS):
        for bob in itertools.product((+1, -1), repeat=BOB_SETTINGS):
            yield DeterministicAssignment(alice, bob)


def classical_max_bruteforce() -> Tuple[float, DeterministicAssignment]:
    """Exhaustive search over all 2³·2⁴ = 128 deterministic assignments"""
    best_value, best = -math.inf, None
    for assignment in all_deterministic_assignments():
        value = ebi_value(behavior_of(deterministic_strategy(assignment)))
        if value > best_value:
            best_value, best = value, assignment
    return best_value, best


def bloch_direction(op: np.ndarray) -> np.ndarray:
    """Unit (Z, X, Y) direction of a qubit operator's traceless part"""
    r = qlin.to_bloch(op).vector
    return r / np.linalg.norm(r)


def mub_overlaps(observables: Sequence[np.ndarray]) -> np.ndarray:
    """|⟨u|v⟩|² for eigenvectors u, v of distinct observables"""
    overlaps = []
    for i, j in itertools.combinations(range(len(observables)), 2):
        _, vi = qlin.eig_hermitian(observables[i])
        _, vj = qlin.eig_hermitian(observables[j])
        for u in vi:
            for w in vj:
                overlaps.append(abs(np.vdot(u, w)) ** 2)
    return np.array(overlaps)


def tetrahedron_gram(elements: Sequence[np.ndarray]) -> np.ndarray:
    """Gram matrix of the unit Bloch directions of qubit operators"""
    dirs = np.array([bloch_direction(el) for el in elements])
    return dirs @ dirs.T
