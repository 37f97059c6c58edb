# -*- coding: utf-8 -*-
"""
optimizer - seesaw maximization of the EBI over local-dimension strategies

One round:
1. state     ← top eigenvector of W = Σ_{k,l} sign(k,l)·A_k ⊗ B_l
2. each B_l  ← sgn(tr_A[ρ (Σ_k sign(k,l) A_k ⊗ 𝟙)])
3. each A_k  ← sgn(tr_B[ρ (𝟙 ⊗ Σ_l sign(k,l) B_l)])

sgn(M) = Σ sign(λ_i)|v_i⟩⟨v_i| with sign(0) = +1. Every step is a
maximization of S with the rest fixed, so round values never decrease. A
round that would decrease S is discarded and ends the run: a dip within
convergence_eps counts as convergence, a larger one sets stopped_on_decrease.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

import qlin
from ebi import EBI_SIGNS, reference_povm
from scenario import (ALICE_SETTINGS, BOB_SETTINGS, POVM_OUTCOMES, Strategy,
                      random_dichotomic)

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SeesawConfig:
    max_rounds: int = 10_000
    convergence_eps: float = 1e-12
    seed: int = 0
    local_dim: int = 2

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if not self.convergence_eps > 0.0:
            raise ValueError(f"convergence_eps must be positive, got {self.convergence_eps}")
        if self.local_dim < 1:
            raise ValueError(f"local_dim must be >= 1, got {self.local_dim}")


@dataclass(frozen=True, eq=False)
class SeesawResult:
    value: float
    strategy: Strategy
    trace: Tuple[float, ...]
    converged: bool
    stopped_on_decrease: bool = False

    @property
    def rounds(self) -> int:
        return len(self.trace)


def bell_operator(alice_obs: Sequence[np.ndarray], bob_obs: Sequence[np.ndarray]) -> np.ndarray:
    """W = Σ_{k,l} sign(k,l)·A_k ⊗ B_l"""
    d = alice_obs[0].shape[0] * bob_obs[0].shape[0]
    w = np.zeros((d, d), dtype=complex)
    for k in range(ALICE_SETTINGS):
        for l in range(BOB_SETTINGS):
            w += EBI_SIGNS[k, l] * qlin.tensor(alice_obs[k], bob_obs[l])
    return w


def sign_operator(m: np.ndarray) -> np.ndarray:
    """Spectral ±1 rounding; zero eigenvalues round to +1"""
    return qlin.operator_function(qlin.hermitian_part(m), lambda x: 1.0 if x >= 0.0 else -1.0)


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Global phase making the first nonzero amplitude real and positive"""
    for amp in v:
        if abs(amp) > qlin.ALGEBRAIC_TOL:
            return v * (abs(amp) / amp)
    return v


def top_eigenvector(w: np.ndarray) -> np.ndarray:
    """
    Top eigenvector of W; a degenerate top eigenspace is resolved by taking
    the returned eigenvector with the lexicographically largest amplitudes.
    """
    values, vectors = qlin.eig_hermitian(w)
    candidates = [canonical_phase(v) for lam, v in zip(values, vectors)
                  if lam >= values[0] - DEGENERACY_TOL]

    def key(v):
        return tuple(np.round(np.column_stack([v.real, v.imag]).ravel(), 10))

    return max(candidates, key=key)


def _bob_effective(rho: np.ndarray, alice_obs, l: int, dims) -> np.ndarray:
    k_op = sum(EBI_SIGNS[k, l] * alice_obs[k] for k in range(ALICE_SETTINGS))
    eye_b = np.eye(dims[1], dtype=complex)
    return qlin.partial_trace(rho @ qlin.tensor(k_op, eye_b), qlin.SUBSYSTEM_B, dims)


def _alice_effective(rho: np.ndarray, bob_obs, k: int, dims) -> np.ndarray:
    l_op = sum(EBI_SIGNS[k, l] * bob_obs[l] for l in range(BOB_SETTINGS))
    eye_a = np.eye(dims[0], dtype=complex)
    return qlin.partial_trace(rho @ qlin.tensor(eye_a, l_op), qlin.SUBSYSTEM_A, dims)


def random_start(local_dim: int, rng: np.random.Generator) -> Strategy:
    """Random dichotomic observables; the state is replaced in the first round"""
    d = local_dim
    if d == 2:
        povm = reference_povm()
    else:
        povm = (np.eye(d, dtype=complex),) + tuple(np.zeros((d, d), dtype=complex)
                                                   for _ in range(POVM_OUTCOMES - 1))
    return Strategy(
        state=qlin.basis_ket(d * d, 0),
        alice_obs=tuple(random_dichotomic(d, rng) for _ in range(ALICE_SETTINGS)),
        alice_povm=povm,
        bob_obs=tuple(random_dichotomic(d, rng) for _ in range(BOB_SETTINGS)),
    )


def seesaw_maximize(cfg: SeesawConfig = SeesawConfig(), start: Optional[Strategy] = None) -> SeesawResult:
    """Alternating maximization from `start` or from a random start drawn from cfg.seed"""
    if start is None:
        start = random_start(cfg.local_dim, np.random.default_rng(cfg.seed))
    dims = start.dims
    alice = list(start.alice_obs)
    bob = list(start.bob_obs)
    state = start.state

    trace: List[float] = []
    converged = False
    stopped_on_decrease = False
    for _ in range(cfg.max_rounds):
        psi = top_eigenvector(bell_operator(alice, bob))
        rho = qlin.projector(psi)
        new_bob = [sign_operator(_bob_effective(rho, alice, l, dims)) for l in range(BOB_SETTINGS)]
        new_alice = [sign_operator(_alice_effective(rho, new_bob, k, dims)) for k in range(ALICE_SETTINGS)]
        value = qlin.expectation(psi, bell_operator(new_alice, new_bob))

        if trace and value < trace[-1]:
            # Rounding-level dips count as a stall; anything larger is a real decrease
            if value >= trace[-1] - cfg.convergence_eps:
                converged = True
            else:
                stopped_on_decrease = True
            break
        alice, bob, state = new_alice, new_bob, psi
        trace.append(value)
        if len(trace) > 1 and trace[-1] - trace[-2] < cfg.convergence_eps:
            converged = True
            break

    strategy = Strategy(state, tuple(alice), start.alice_povm, tuple(bob))
    return SeesawResult(trace[-1] if trace else -math.inf, strategy, tuple(trace), converged,
                        stopped_on_decrease)


def seesaw_restarts(seeds: Sequence[int], base: SeesawConfig = SeesawConfig()) -> List[SeesawResult]:
    """Independent runs, one per seed"""
    return [seesaw_maximize(SeesawConfig(base.max_rounds, base.convergence_eps, seed, base.local_dim))
            for seed in seeds]
