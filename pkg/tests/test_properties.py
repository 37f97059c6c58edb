# -*- coding: utf-8 -*-
"""
Property suites over seeded random inputs
"""
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

import qlin
from certifier import CertTolerances, certify, reconstruct_q
from ebi import classical_max_bruteforce, deterministic_strategy, ebi_value, reference_strategy
from scenario import (behavior_of, bob_expectation, cond_expect, estimate, mix_behaviors,
                      no_signaling_residual, outcome_index, random_strategy, sample)


def test_no_signaling_random_strategies():
    """behavior_of is no-signaling on 200 random qubit strategies"""
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        b = behavior_of(random_strategy(rng))
        worst = max(worst, no_signaling_residual(b))
    assert worst < 1e-10, f"Worst no-signaling residual {worst}"
    print(f"✅ No-signaling over 200 strategies (worst {worst:.2e})")


def test_no_signaling_higher_dimension():
    rng = np.random.default_rng(5)
    for dims in ((3, 2), (2, 3), (3, 3)):
        b = behavior_of(random_strategy(rng, dims))
        assert no_signaling_residual(b) < 1e-10, f"dims={dims}"
    print("✅ No-signaling in higher local dimension")


def test_eigendecomposition_random_hermitian():
    """Σ λ|v⟩⟨v| reproduces 200 random Hermitian matrices of dimension 1..8"""
    rng = np.random.default_rng(7)
    for i in range(200):
        dim = int(rng.integers(1, 9))
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        m = qlin.hermitian_part(g)
        values, vectors = qlin.eig_hermitian(m)
        rebuilt = sum(lam * qlin.projector(v) for lam, v in zip(values, vectors))
        err = float(np.max(np.abs(rebuilt - m)))
        assert err < 1e-10, f"case {i} (dim {dim}): reconstruction error {err}"
        gram = np.array([[np.vdot(u, v) for v in vectors] for u in vectors])
        assert np.allclose(gram, np.eye(dim), atol=1e-10), f"case {i}: eigenvectors not orthonormal"
    print("✅ Eigendecomposition over 200 random Hermitian matrices")


def test_reconstruct_q_linearity():
    """reconstruct_q(w·b1 + (1−w)·b2) = w·Q(b1) + (1−w)·Q(b2)"""
    rng = np.random.default_rng(17)
    for _ in range(100):
        b1 = behavior_of(random_strategy(rng))
        b2 = behavior_of(random_strategy(rng))
        w = float(rng.uniform())
        mixed = reconstruct_q(mix_behaviors([b1, b2], [w, 1.0 - w]))
        q1, q2 = reconstruct_q(b1), reconstruct_q(b2)
        for qm, x, y in zip(mixed.operators, q1.operators, q2.operators):
            assert np.allclose(qm, w * x + (1.0 - w) * y, atol=1e-12)
    print("✅ reconstruct_q linearity over 100 pairs")


def test_certify_tolerance_monotonicity():
    """A test that passes at some tolerances passes at every looser setting"""
    rng = np.random.default_rng(23)
    ref = behavior_of(reference_strategy())
    strict = CertTolerances()
    passed_strict = 0
    for i in range(50):
        # Near-reference behaviors so that both outcomes occur
        eps = float(10.0 ** rng.uniform(-13, -1))
        b = mix_behaviors([ref, behavior_of(random_strategy(rng))], [1.0 - eps, eps])
        before = certify(b, strict)
        passed_strict += before.certified
        for factor in (10.0, 1e3, 1e6):
            after = certify(b, strict.loosened(factor))
            assert after.test1_pass or not before.test1_pass, f"case {i}: test 1 lost at factor {factor}"
            assert after.test2_pass or not before.test2_pass, f"case {i}: test 2 lost at factor {factor}"
            assert after.certified_bits >= before.certified_bits
    print(f"✅ Tolerance monotonicity over 50 behaviors ({passed_strict} certified at defaults)")


def test_tensor_associativity():
    rng = np.random.default_rng(31)
    a, b, c = (qlin.hermitian_part(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) for d in (2, 3, 2))
    left = qlin.tensor(qlin.tensor(a, b), c)
    right = qlin.tensor(a, qlin.tensor(b, c))
    assert np.allclose(left, right)
    assert np.allclose(qlin.tensor(a, b, c), left)
    print("✅ Tensor associativity")


def test_bloch_roundtrip_random():
    rng = np.random.default_rng(37)
    for _ in range(50):
        c = rng.normal(size=4)
        back = qlin.to_bloch(qlin.from_bloch(c))
        assert np.allclose(tuple(back), c, atol=1e-14)
    print("✅ Bloch coefficients recovered")


def test_sampled_frequencies_are_distributions():
    record = sample(reference_strategy(), 2000, seed=99)
    b = estimate(record)
    assert b.complete and b.estimated
    assert np.allclose(np.sum(b.joint_dichotomic, axis=(2, 3)), 1.0)
    assert np.allclose(np.sum(b.joint_povm, axis=(0, 2)), 1.0)
    again = sample(reference_strategy(), 2000, seed=99)
    assert np.array_equal(record.dichotomic, again.dichotomic) and np.array_equal(record.povm, again.povm)
    print("✅ Sampled frequencies are normalized and seed-deterministic")


def test_povm_conditionals_sum_to_bob_expectation():
    """Σ_a E_{a|4,l} = ⟨B_l⟩, read against every dichotomic setting of Alice"""
    rng = np.random.default_rng(41)
    strategies = [reference_strategy()] + [random_strategy(rng) for _ in range(50)]
    for i, s in enumerate(strategies):
        b = behavior_of(s)
        for l in range(1, 5):
            total = sum(cond_expect(b, a, l) for a in range(1, 5))
            assert abs(total - bob_expectation(b, l)) < 1e-12, f"case {i}, l={l}"
            for k in range(1, 4):
                assert abs(total - bob_expectation(b, l, k)) < 1e-10, f"case {i}, l={l}, k={k}"
    print("✅ Σ_a E_{a|4,l} = ⟨B_l⟩ over 51 strategies")


def _max_deviation(estimated, exact):
    return max(float(np.max(np.abs(estimated.joint_dichotomic - exact.joint_dichotomic))),
               float(np.max(np.abs(estimated.joint_povm - exact.joint_povm))))


def test_estimate_converges_with_shots():
    ref = reference_strategy()
    exact = behavior_of(ref)
    small = [_max_deviation(estimate(sample(ref, 10 ** 3, seed)), exact) for seed in range(5)]
    large = [_max_deviation(estimate(sample(ref, 10 ** 6, seed)), exact) for seed in range(5)]
    assert np.mean(large) < np.mean(small), f"{np.mean(large)} vs {np.mean(small)}"
    assert max(large) < 5e-3, f"Worst deviation at 10^6 shots: {max(large)}"
    print(f"✅ Estimates converge (10^3: {np.mean(small):.2e}, 10^6: {np.mean(large):.2e})")


def test_sample_single_shot_and_deterministic_counts():
    record = sample(reference_strategy(), 1, seed=8)
    assert np.all(np.sum(record.dichotomic, axis=(2, 3)) == 1)
    assert np.all(np.sum(record.povm, axis=(0, 2)) == 1)

    _, assignment = classical_max_bruteforce()
    record = sample(deterministic_strategy(assignment, povm_outcome=3), 50, seed=0)
    for k, x in enumerate(assignment.alice):
        for l, y in enumerate(assignment.bob):
            assert record.dichotomic[k, l, outcome_index(x), outcome_index(y)] == 50
    for l, y in enumerate(assignment.bob):
        assert record.povm[2, l, outcome_index(y)] == 50
    assert record.total == 50 * 16
    print("✅ Single-shot and deterministic counts")


def test_ebi_value_linear_on_mixtures():
    rng = np.random.default_rng(43)
    for _ in range(50):
        b1 = behavior_of(random_strategy(rng))
        b2 = behavior_of(random_strategy(rng))
        w = float(rng.uniform())
        mixed = ebi_value(mix_behaviors([b1, b2], [w, 1.0 - w]))
        assert abs(mixed - (w * ebi_value(b1) + (1.0 - w) * ebi_value(b2))) < 1e-12
    print("✅ ebi_value linear over 50 mixtures")


def run_all_tests():
    print("=" * 60)
    print("PROPERTY TESTS")
    print("=" * 60)
    tests = [
        test_no_signaling_random_strategies,
        test_no_signaling_higher_dimension,
        test_eigendecomposition_random_hermitian,
        test_reconstruct_q_linearity,
        test_certify_tolerance_monotonicity,
        test_tensor_associativity,
        test_bloch_roundtrip_random,
        test_sampled_frequencies_are_distributions,
        test_povm_conditionals_sum_to_bob_expectation,
        test_estimate_converges_with_shots,
        test_sample_single_shot_and_deterministic_counts,
        test_ebi_value_linear_on_mixtures,
    ]
    try:
        for test in tests:
            test()
        print("\n✅ All property tests passed!")
        return True
    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        return False


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
