# -*- coding: utf-8 -*-
"""
adversary - explicit attack models and Eve's guessing probability

G = max_F Σ_a P(a, a | A_4, F)

For a tripartite pure state |Ψ⟩ on A⊗B⊗E, Eve's conditional states are
σ_a = tr_AB[(A_{a|4} ⊗ 𝟙 ⊗ 𝟙)|Ψ⟩⟨Ψ|] and Σ_a P(a, a) = Σ_a tr(F_a σ_a).

The maximum over F is bracketed:
- lower bound: value of an explicit POVM found by the fixed-point update
      F_a ← Λ⁺ σ_a F_a σ_a Λ⁺,   Λ = (Σ_a σ_a F_a σ_a)^{1/2}
- upper bound: tr Y for an explicit Y ⪰ σ_a (all a), built from
  Y₀ = Herm(Σ_a σ_a F_a) by adding the positive part of σ_a − Y for each a
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

import qlin
from ebi import (PHI_PLUS, all_deterministic_assignments, deterministic_strategy,
                 ebi_value_deterministic, reference_strategy)
from qlin import SPECTRAL_TOL
from scenario import (POVM_OUTCOMES, Behavior, InvalidStrategy, Strategy,
                      behavior_of, check_povm, mix_behaviors)

EVE_MAX_DIM = 8
EVE_MAX_ITERATIONS = 500
EVE_CONVERGENCE = 1e-10
EXACT_GAP = 1e-6


class InvalidModel(ValueError):
    pass


class InvalidConditionals(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TripartiteModel:
    """Pure state on A⊗B⊗E, Alice/Bob measurements, and a fixed Eve POVM"""
    state: np.ndarray
    dims: Tuple[int, int, int]
    alice_obs: Tuple[np.ndarray, ...]
    alice_povm: Tuple[np.ndarray, ...]
    bob_obs: Tuple[np.ndarray, ...]
    eve_povm: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, 'state', np.asarray(self.state, dtype=complex).ravel())
        for name in ('alice_obs', 'alice_povm', 'bob_obs', 'eve_povm'):
            object.__setattr__(self, name, tuple(np.asarray(op, dtype=complex) for op in getattr(self, name)))

    @property
    def density(self) -> np.ndarray:
        return qlin.projector(self.state)

    def validate(self, tol: float = SPECTRAL_TOL):
        d_a, d_b, d_e = self.dims
        if self.state.shape != (d_a * d_b * d_e,):
            raise InvalidModel(f"state has {self.state.shape[0]} amplitudes, expected {d_a * d_b * d_e}")
        if abs(np.linalg.norm(self.state) - 1.0) > tol:
            raise InvalidModel("state is not normalized")
        if d_e > EVE_MAX_DIM:
            raise InvalidModel(f"Eve dimension {d_e} exceeds {EVE_MAX_DIM}")
        if len(self.eve_povm) != POVM_OUTCOMES:
            raise InvalidModel(f"Eve POVM needs {POVM_OUTCOMES} elements, got {len(self.eve_povm)}")
        try:
            check_povm(self.eve_povm, d_e, tol, name="F")
            self.strategy().validate(tol)
        except InvalidStrategy as e:
            raise InvalidModel(str(e)) from e

    def strategy(self) -> Strategy:
        """Alice-Bob strategy on the reduced state ρ_AB"""
        d_a, d_b, d_e = self.dims
        rho_ab = qlin.partial_trace(self.density, qlin.SUBSYSTEM_A, (d_a * d_b, d_e))
        return Strategy(rho_ab, self.alice_obs, self.alice_povm, self.bob_obs)


def eve_conditional_states(m: TripartiteModel) -> Tuple[np.ndarray, ...]:
    """σ_a = tr_AB[(A_{a|4} ⊗ 𝟙_B ⊗ 𝟙_E)|Ψ⟩⟨Ψ|]"""
    d_a, d_b, d_e = m.dims
    rho = m.density
    eye_be = np.eye(d_b * d_e, dtype=complex)
    out = []
    for el in m.alice_povm:
        weighted = qlin.tensor(el, eye_be) @ rho
        out.append(qlin.hermitian_part(qlin.partial_trace(weighted, qlin.SUBSYSTEM_B, (d_a * d_b, d_e))))
    return tuple(out)


def guess_prob(m: TripartiteModel) -> float:
    """Σ_a ⟨Ψ| A_{a|4} ⊗ 𝟙_B ⊗ F_a |Ψ⟩ for the model's own F"""
    m.validate()
    d_a, d_b, d_e = m.dims
    eye_b = np.eye(d_b, dtype=complex)
    value = sum(qlin.expectation(m.state, qlin.tensor(a_el, eye_b, f_el))
                for a_el, f_el in zip(m.alice_povm, m.eve_povm))
    return float(min(1.0, max(0.0, value)))


@dataclass(frozen=True, eq=False)
class EveMeasurement:
    povm: Tuple[np.ndarray, ...]
    value: float
    upper_bound: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.upper_bound - self.value

    @property
    def exact(self) -> bool:
        return self.gap <= EXACT_GAP


def _check_conditionals(sigmas: Sequence[np.ndarray], tol: float) -> Tuple[np.ndarray, ...]:
    if len(sigmas) < 1:
        raise InvalidConditionals("Need at least one conditional state")
    sigmas = tuple(np.asarray(s, dtype=complex) for s in sigmas)
    dim = sigmas[0].shape[0]
    total = 0.0
    for a, s in enumerate(sigmas, start=1):
        if s.shape != (dim, dim):
            raise InvalidConditionals(f"σ_{a} has shape {s.shape}, expected {(dim, dim)}")
        if not qlin.is_hermitian(s, tol) or qlin.min_eigenvalue(s) < -tol:
            raise InvalidConditionals(f"σ_{a} is not positive semidefinite")
        total += float(np.real(np.trace(s)))
    if abs(total - 1.0) > tol:
        raise InvalidConditionals(f"Conditional traces sum to {total}, expected 1")
    return tuple(qlin.hermitian_part(s) for s in sigmas)


def _success(povm, sigmas) -> float:
    return float(sum(np.real(np.trace(f @ s)) for f, s in zip(povm, sigmas)))


def dual_certificate(sigmas: Sequence[np.ndarray], povm: Sequence[np.ndarray]) -> np.ndarray:
    """Y ⪰ σ_a for every a; tr Y bounds the success probability of any POVM"""
    y = qlin.hermitian_part(sum(s @ f for s, f in zip(sigmas, povm)))
    for s in sigmas:
        y = y + qlin.operator_function(s - y, lambda x: max(x, 0.0))
    return y


def optimal_eve_measurement(conditional_states: Sequence[np.ndarray],
                            max_iterations: int = EVE_MAX_ITERATIONS,
                            convergence: float = EVE_CONVERGENCE,
                            tol: float = SPECTRAL_TOL) -> EveMeasurement:
    """Maximize Σ_a tr(F_a σ_a) over POVMs F, with a certified upper bound"""
    sigmas = _check_conditionals(conditional_states, tol)
    n = len(sigmas)
    dim = sigmas[0].shape[0]
    eye = np.eye(dim, dtype=complex)

    povm = tuple(eye / n for _ in range(n))
    best, best_value = povm, _success(povm, sigmas)
    upper = math.inf
    value = best_value
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        lam_sq = qlin.hermitian_part(sum(s @ f @ s for s, f in zip(sigmas, povm)))
        values, vectors = qlin.eig_hermitian(lam_sq)
        cutoff = max(values[0], 0.0) * 1e-12
        lam_pinv = np.zeros_like(eye)
        support = np.zeros_like(eye)
        for lv, vec in zip(values, vectors):
            if lv > cutoff and lv > 0.0:
                p = qlin.projector(vec)
                lam_pinv += p / math.sqrt(lv)
                support += p
        # Outside the support of Λ the σ_a vanish; share it evenly
        rest = (eye - support) / n
        povm = tuple(qlin.hermitian_part(lam_pinv @ s @ f @ s @ lam_pinv) + rest
                     for s, f in zip(sigmas, povm))

        new_value = _success(povm, sigmas)
        if new_value > best_value:
            best, best_value = povm, new_value
        if abs(new_value - value) < convergence:
            # Stalled primal; stop once the dual bound closes the bracket
            upper = min(upper, _dual_bound(sigmas, best))
            if upper - best_value <= EXACT_GAP:
                break
        value = new_value

    upper = min(upper, _dual_bound(sigmas, best))
    return EveMeasurement(best, best_value, max(upper, best_value), iterations)


def _dual_bound(sigmas: Sequence[np.ndarray], povm: Sequence[np.ndarray]) -> float:
    return float(np.real(np.trace(dual_certificate(sigmas, povm))))


def helstrom_value(sigma_1: np.ndarray, sigma_2: np.ndarray) -> float:
    """Optimal two-outcome success: 1/2 + ‖σ₁ − σ₂‖₁/2 (traces summing to 1)"""
    return 0.5 + 0.5 * qlin.trace_norm(np.asarray(sigma_1) - np.asarray(sigma_2))


def optimal_guess(m: TripartiteModel) -> EveMeasurement:
    m.validate()
    return optimal_eve_measurement(eve_conditional_states(m))


# ---------------------------------------------------------------------------
# Built-in quantum attack models
# ---------------------------------------------------------------------------

def computational_povm(dim: int) -> Tuple[np.ndarray, ...]:
    """Projectors onto |0⟩..|3⟩, padded with zeros or merged into the last outcome"""
    elements = [np.zeros((dim, dim), dtype=complex) for _ in range(POVM_OUTCOMES)]
    for i in range(dim):
        elements[min(i, POVM_OUTCOMES - 1)] += qlin.projector(qlin.basis_ket(dim, i))
    return tuple(elements)


def product_eve_model(strategy: Strategy, eve_state: np.ndarray,
                      eve_povm: Optional[Sequence[np.ndarray]] = None) -> TripartiteModel:
    """|ψ⟩_AB ⊗ |e⟩_E; requires a pure Alice-Bob state"""
    if strategy.state.ndim != 1:
        raise InvalidModel("product_eve_model needs a pure Alice-Bob state")
    eve_state = np.asarray(eve_state, dtype=complex).ravel()
    d_a, d_b = strategy.dims
    d_e = eve_state.shape[0]
    return TripartiteModel(
        state=np.kron(strategy.state, eve_state),
        dims=(d_a, d_b, d_e),
        alice_obs=strategy.alice_obs,
        alice_povm=strategy.alice_povm,
        bob_obs=strategy.bob_obs,
        eve_povm=tuple(eve_povm) if eve_povm is not None else computational_povm(d_e),
    )


def bell_basis() -> Tuple[np.ndarray, ...]:
    """|φ₊⟩, |φ₋⟩, |ψ₊⟩, |ψ₋⟩"""
    return (PHI_PLUS.copy(), qlin.ket(1, 0, 0, -1), qlin.ket(0, 1, 1, 0), qlin.ket(0, 1, -1, 0))


def werner_model(v: float) -> TripartiteModel:
    """
    Purification of v|φ₊⟩⟨φ₊| + (1 − v)𝟙/4 held by Eve (dim 4).

    Eve's register records which Bell state was prepared.
    """
    if not 0.0 <= v <= 1.0:
        raise InvalidModel(f"visibility must be in [0, 1], got {v}")
    weights = [v + (1.0 - v) / 4.0] + [(1.0 - v) / 4.0] * 3
    psi = sum(math.sqrt(w) * np.kron(bell, qlin.basis_ket(4, i))
              for i, (w, bell) in enumerate(zip(weights, bell_basis())))
    ref = reference_strategy()
    return TripartiteModel(psi, (2, 2, 4), ref.alice_obs, ref.alice_povm, ref.bob_obs, computational_povm(4))


def dephasing_model(t: float) -> TripartiteModel:
    """
    Partial-correlation attack of strength t ∈ [0, 1]:

        √(1−t)|φ₊⟩|0⟩ + √(t/2)(|00⟩|1⟩ + |11⟩|2⟩)

    With weight t Eve holds a copy of the Z value shared by Alice and Bob.
    """
    if not 0.0 <= t <= 1.0:
        raise InvalidModel(f"correlation strength must be in [0, 1], got {t}")
    e = [qlin.basis_ket(3, i) for i in range(3)]
    psi = (math.sqrt(1.0 - t) * np.kron(PHI_PLUS, e[0])
           + math.sqrt(t / 2.0) * np.kron(qlin.basis_ket(4, 0), e[1])
           + math.sqrt(t / 2.0) * np.kron(qlin.basis_ket(4, 3), e[2]))
    ref = reference_strategy()
    return TripartiteModel(psi, (2, 2, 3), ref.alice_obs, ref.alice_povm, ref.bob_obs, computational_povm(3))


def classical_copy_model() -> TripartiteModel:
    """(|000⟩ + |111⟩)/√2 with Alice's A_4 reading Z: Eve always guesses right"""
    psi = qlin.ket(1, 0, 0, 0, 0, 0, 0, 1)
    p0, p1 = qlin.projector(qlin.basis_ket(2, 0)), qlin.projector(qlin.basis_ket(2, 1))
    zero = np.zeros((2, 2), dtype=complex)
    ref = reference_strategy()
    return TripartiteModel(psi, (2, 2, 2), ref.alice_obs, (p0, p1, zero, zero), ref.bob_obs,
                           (p0, p1, zero, zero))


# ---------------------------------------------------------------------------
# Classical attacks
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClassicalAttack:
    """Hidden variable λ with weight p(λ), a strategy per λ, and Eve's guess g(λ) ∈ 1..4"""
    weights: Tuple[float, ...]
    strategies: Tuple[Strategy, ...]
    guesses: Tuple[int, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if not (len(w) == len(self.strategies) == len(self.guesses)) or len(w) == 0:
            raise ValueError("weights, strategies and guesses must have the same nonzero length")
        if np.any(w < 0) or abs(float(np.sum(w)) - 1.0) > SPECTRAL_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        if any(g not in range(1, POVM_OUTCOMES + 1) for g in self.guesses):
            raise ValueError("guesses must be outcomes 1..4")


def classical_guess_prob(att: ClassicalAttack) -> Tuple[float, Behavior]:
    """G = Σ_λ p(λ)·P(g(λ)|A_4, λ) and the averaged behavior"""
    behaviors = [behavior_of(s) for s in att.strategies]
    g = sum(w * b.povm_marginal(guess) for w, b, guess in zip(att.weights, behaviors, att.guesses))
    return float(g), mix_behaviors(behaviors, att.weights)


def four_lambda_attack(q: float = 1.0) -> ClassicalAttack:
    """
    λ = (a, e): Alice's A_4 answers a, Eve guesses e.

    p(a, e) = ¼[q·δ_ae + (1 − q)/4], so G = q + (1 − q)/4 while
    P(a|A_4) = 1/4. Dichotomic settings follow a classical optimal
    assignment, so S = 6.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    assignment = max(all_deterministic_assignments(), key=ebi_value_deterministic)
    weights, strategies, guesses = [], [], []
    for a in range(1, POVM_OUTCOMES + 1):
        strategy = deterministic_strategy(assignment, povm_outcome=a)
        for e in range(1, POVM_OUTCOMES + 1):
            weights.append(0.25 * (q * (a == e) + (1.0 - q) / 4.0))
            strategies.append(strategy)
            guesses.append(e)
    return ClassicalAttack(tuple(weights), tuple(strategies), tuple(guesses))


def single_lambda_attack(strategy: Strategy, guess: int = 1) -> ClassicalAttack:
    return ClassicalAttack((1.0,), (strategy,), (guess,))
