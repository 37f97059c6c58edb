# -*- coding: utf-8 -*-
"""
Unit tests for the linear algebra, scenario, EBI and certifier layers
"""
import sys
import os
import json
import math
import tempfile
sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

import qlin
from certifier import (CertTolerances, Certifier, MissingStatistics, certify,
                       check_extremality, conditional_matrix, det_identity_residual,
                       reconstruct_q)
from ebi import (CLASSICAL_BOUND, EBI_SIGNS, QUANTUM_MAX, all_deterministic_assignments,
                 classical_max_bruteforce, deterministic_strategy, ebi_value,
                 ebi_value_deterministic, mub_overlaps, reference_povm, reference_strategy,
                 tetrahedron_gram, werner_strategy)
from scenario import (Behavior, CountRecord, CountsFormatError, EmptyRecord, IndexOutOfRange,
                      InvalidStrategy, Strategy, behavior_of, cond_expect, correlator,
                      correlators, estimate, format_counts, mix_behaviors, no_signaling_residual,
                      parse_counts, uniform_behavior)

SQ3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# qlin
# ---------------------------------------------------------------------------

def test_pauli_products():
    """ZX = iY, XY = iZ, YZ = iX and every Pauli squares to 𝟙"""
    assert np.allclose(qlin.Z @ qlin.X, 1j * qlin.Y)
    assert np.allclose(qlin.X @ qlin.Y, 1j * qlin.Z)
    assert np.allclose(qlin.Y @ qlin.Z, 1j * qlin.X)
    for p in (qlin.Z, qlin.X, qlin.Y):
        assert np.allclose(p @ p, qlin.I2)
    print("✅ Pauli algebra test passed")


def test_qubit_eigendecomposition():
    values, vectors = qlin.eig_hermitian(qlin.Z)
    assert np.allclose(values, [1.0, -1.0]), f"Got: {values}"
    assert np.allclose(vectors[0], [1.0, 0.0]), f"Got: {vectors[0]}"

    m = qlin.from_bloch((0.3, 0.2, -0.5, 0.7))
    values, vectors = qlin.eig_hermitian(m)
    r = math.sqrt(0.2 ** 2 + 0.5 ** 2 + 0.7 ** 2)
    assert np.allclose(values, [0.3 + r, 0.3 - r]), f"Got: {values}"
    rebuilt = sum(lam * qlin.projector(v) for lam, v in zip(values, vectors))
    assert np.allclose(rebuilt, m, atol=1e-12)
    print("✅ Qubit eigendecomposition test passed")


def test_jacobi_eigendecomposition():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m = qlin.hermitian_part(g)
    values, vectors = qlin.eig_hermitian(m)
    assert np.all(np.diff(values) <= 1e-12), f"Eigenvalues not descending: {values}"
    assert np.allclose(values, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-10)
    for lam, v in zip(values, vectors):
        assert np.linalg.norm(m @ v - lam * v) < 1e-10
    print("✅ Jacobi eigendecomposition test passed")


def test_hermitian_checks():
    with pytest.raises(qlin.NotHermitian):
        qlin.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(qlin.DimensionMismatch):
        qlin.partial_trace(np.eye(4), qlin.SUBSYSTEM_A, (2, 3))
    assert qlin.is_hermitian(qlin.Y)
    assert not qlin.is_hermitian(np.ones((2, 3)))
    print("✅ Hermiticity check test passed")


def test_partial_trace_and_tensor():
    rho = qlin.projector(qlin.ket(1, 0, 0, 1))
    assert np.allclose(qlin.partial_trace(rho, qlin.SUBSYSTEM_A, (2, 2)), qlin.I2 / 2)
    assert np.allclose(qlin.partial_trace(rho, qlin.SUBSYSTEM_B, (2, 2)), qlin.I2 / 2)

    a = qlin.from_bloch((0.5, 0.1, 0.2, 0.3))
    b = np.diag([1.0, 2.0, 3.0]).astype(complex)
    ab = qlin.tensor(a, b)
    assert ab.shape == (6, 6)
    assert np.allclose(qlin.partial_trace(ab, qlin.SUBSYSTEM_A, (2, 3)), a * np.trace(b))
    assert np.allclose(qlin.partial_trace(ab, qlin.SUBSYSTEM_B, (2, 3)), b * np.trace(a))
    print("✅ Partial trace test passed")


def test_bloch_coefficients():
    c = qlin.to_bloch(qlin.from_bloch((0.25, -0.1, 0.2, 0.05)))
    assert np.allclose(tuple(c), (0.25, -0.1, 0.2, 0.05))
    assert np.allclose(c.vector, [-0.1, 0.2, 0.05])
    with pytest.raises(qlin.DimensionMismatch):
        qlin.to_bloch(np.eye(3))
    assert np.isclose(qlin.trace_norm(qlin.Z), 2.0)
    assert np.isclose(qlin.min_eigenvalue(qlin.X), -1.0)
    print("✅ Bloch coefficient test passed")


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

def test_reference_correlators():
    """E_{k,l} = sign(k,l)/√3 on the reference strategy"""
    b = behavior_of(reference_strategy())
    assert np.allclose(correlators(b), EBI_SIGNS / SQ3, atol=1e-12), f"Got: {correlators(b)}"
    assert math.isclose(correlator(b, 1, 1), 1 / SQ3, abs_tol=1e-12)
    assert math.isclose(correlator(b, 1, 3), -1 / SQ3, abs_tol=1e-12)
    assert np.allclose(b.povm_marginals, 0.25, atol=1e-12)
    assert np.allclose([cond_expect(b, 1, l) for l in (1, 2, 3)], [-0.25, 1 / 12, 1 / 12], atol=1e-12)
    assert no_signaling_residual(b) < 1e-12
    assert b.validate() == [], f"Got: {b.validate()}"
    print("✅ Reference correlator test passed")


def test_label_checks():
    b = behavior_of(reference_strategy())
    for bad in ((0, 1), (4, 1), (1, 5)):
        with pytest.raises(IndexOutOfRange):
            correlator(b, *bad)
    with pytest.raises(IndexOutOfRange):
        b.povm_marginal(5)
    print("✅ Label range test passed")


def test_invalid_strategy_names_operator():
    ref = reference_strategy()
    bad_bob = (2.0 * qlin.Z,) + ref.bob_obs[1:]
    with pytest.raises(InvalidStrategy) as info:
        behavior_of(Strategy(ref.state, ref.alice_obs, ref.alice_povm, bad_bob))
    assert info.value.operator_name == "B_1", f"Got: {info.value.operator_name}"

    bad_povm = (np.eye(2),) + ref.alice_povm[1:]
    with pytest.raises(InvalidStrategy) as info:
        Strategy(ref.state, ref.alice_obs, bad_povm, ref.bob_obs).validate()
    assert info.value.operator_name == "A_4"

    with pytest.raises(InvalidStrategy) as info:
        Strategy(qlin.ket(1, 0, 0, 1) * 2, ref.alice_obs, ref.alice_povm, ref.bob_obs).validate()
    assert info.value.operator_name == "state"
    print("✅ Invalid strategy test passed")


def test_counts_format():
    dich = np.zeros((3, 4, 2, 2), dtype=int)
    dich[0, 0] = [[40, 10], [10, 40]]
    povm = np.zeros((4, 4, 2), dtype=int)
    povm[:, 1, 0] = [25, 25, 25, 25]
    record = CountRecord(dich, povm, 100)

    text = format_counts(record)
    assert text.startswith("# ebi-counts v1\n# shots: 100\n"), f"Got: {text[:40]}"
    assert "D 1 1 +1 +1 40" in text and "P 3 2 +1 25" in text
    parsed = parse_counts(text)
    assert np.array_equal(parsed.dichotomic, dich) and np.array_equal(parsed.povm, povm)

    b = estimate(parsed)
    assert b.estimated and b.shots == 100
    assert b.has_pair(1, 1) and not b.has_pair(2, 1) and not b.complete
    assert math.isclose(correlator(b, 1, 1), 0.6)
    assert np.isnan(correlator(b, 2, 2))
    print("✅ Counts format test passed")


def test_counts_errors():
    with pytest.raises(CountsFormatError):
        parse_counts("# shots: 10\n")
    with pytest.raises(CountsFormatError):
        parse_counts("# ebi-counts v1\nD 1 1 +1 +1 5\n")
    with pytest.raises(CountsFormatError):
        parse_counts("# ebi-counts v1\n# shots: 5\nD 1 9 +1 +1 5\n")
    with pytest.raises(CountsFormatError):
        parse_counts("# ebi-counts v1\n# shots: 5\nD 1 1 +2 +1 5\n")
    dich = np.zeros((3, 4, 2, 2), dtype=int)
    dich[0, 0, 0, 0] = 7
    with pytest.raises(CountsFormatError):
        CountRecord(dich, np.zeros((4, 4, 2), dtype=int), 10)
    with pytest.raises(EmptyRecord):
        estimate(CountRecord(np.zeros((3, 4, 2, 2), dtype=int), np.zeros((4, 4, 2), dtype=int), 10))
    print("✅ Counts error test passed")


# ---------------------------------------------------------------------------
# ebi
# ---------------------------------------------------------------------------

def test_quantum_and_classical_values():
    assert math.isclose(ebi_value(behavior_of(reference_strategy())), QUANTUM_MAX, abs_tol=1e-9)
    value, assignment = classical_max_bruteforce()
    assert value == CLASSICAL_BOUND, f"Got: {value}"
    assert ebi_value_deterministic(assignment) == 6.0
    print("✅ Quantum/classical value test passed")


def test_deterministic_values_agree():
    """Direct ±1 evaluation matches the Born-rule behavior for all 128 assignments"""
    count = 0
    for assignment in all_deterministic_assignments():
        direct = ebi_value_deterministic(assignment)
        via_behavior = ebi_value(behavior_of(deterministic_strategy(assignment)))
        assert math.isclose(direct, via_behavior, abs_tol=1e-12), f"{assignment}: {direct} vs {via_behavior}"
        assert direct <= CLASSICAL_BOUND
        count += 1
    assert count == 128
    print("✅ Deterministic assignment test passed")


def test_werner_scaling():
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        s = ebi_value(behavior_of(werner_strategy(v)))
        assert math.isclose(s, QUANTUM_MAX * v, abs_tol=1e-9), f"v={v}: S={s}"
    with pytest.raises(ValueError):
        werner_strategy(1.5)
    print("✅ Werner scaling test passed")


def test_measurement_geometry():
    ref = reference_strategy()
    overlaps = mub_overlaps(ref.alice_obs)
    assert np.allclose(overlaps, 0.5, atol=1e-12), f"Got: {overlaps}"
    for elements in (reference_povm(), ref.bob_obs):
        gram = tetrahedron_gram(elements)
        off = gram[~np.eye(4, dtype=bool)]
        assert np.allclose(off, -1 / 3, atol=1e-12), f"Got: {gram}"
    assert np.allclose(sum(reference_povm()), qlin.I2)
    print("✅ MUB and tetrahedron geometry test passed")


# ---------------------------------------------------------------------------
# certifier
# ---------------------------------------------------------------------------

def test_reconstruct_reference_povm():
    b = behavior_of(reference_strategy())
    q = reconstruct_q(b)
    for a, (qa, ref) in enumerate(zip(q.operators, reference_povm()), start=1):
        assert np.allclose(qa, ref, atol=1e-10), f"Q_{a} = {qa}"
    g1 = q.gammas[0]
    assert np.allclose(tuple(g1), (0.25, -1 / (4 * SQ3), -1 / (4 * SQ3), -1 / (4 * SQ3)), atol=1e-12)
    print("✅ Q reconstruction test passed")


def test_reference_extremality():
    b = behavior_of(reference_strategy())
    report = check_extremality(reconstruct_q(b), b)
    assert report.extremal and report.rank3 and report.complete
    for o in report.outcomes:
        assert math.isclose(o.trace_value, 0.5, abs_tol=1e-12)
        assert abs(o.det_identity_residual) < 1e-12
        assert abs(o.det_value) < 1e-12
    expected = (1.0 / 12.0) * np.array([[-3, 1, 1], [1, -3, 1], [1, 1, -3]])
    assert np.allclose(conditional_matrix(b), expected, atol=1e-12)
    assert math.isclose(min(report.singular_values), 1 / 12, abs_tol=1e-10), f"Got: {report.singular_values}"
    assert math.isclose(max(report.singular_values), 1 / 3, abs_tol=1e-10)
    print("✅ Reference extremality test passed")


def test_white_noise_fails_determinant():
    b = uniform_behavior()
    q = reconstruct_q(b)
    assert np.allclose(q.operators, [qlin.I2 / 4] * 4)
    report = check_extremality(q, b)
    assert all(math.isclose(d, 1 / 16) for d in q.determinants())
    assert math.isclose(det_identity_residual(b, 1), -1 / 12)
    assert not any(o.det_ok for o in report.outcomes) and not report.extremal
    verdict = certify(b)
    assert not verdict.test1_pass and not verdict.test2_pass and verdict.certified_bits == 0
    print("✅ White-noise determinant test passed")


def test_noisy_reference_is_not_extremal():
    """0.9·reference + 0.1·white noise keeps uniform marginals but loses rank one"""
    b = mix_behaviors([behavior_of(reference_strategy()), uniform_behavior()], [0.9, 0.1])
    report = check_extremality(reconstruct_q(b), b)
    assert np.allclose(b.povm_marginals, 0.25)
    assert not report.extremal
    assert report.max_det_residual > 1e-3, f"Got: {report.max_det_residual}"
    assert not any(o.det_ok for o in report.outcomes)
    print("✅ Noisy reference extremality test passed")


def test_werner_near_one_is_not_certified():
    verdict = certify(behavior_of(werner_strategy(0.99)))
    assert math.isclose(verdict.s_value, 0.99 * QUANTUM_MAX, abs_tol=1e-9), f"S = {verdict.s_value}"
    assert not verdict.test1_pass and not verdict.certified
    assert verdict.certified_bits == 0.0 and verdict.guessing_bound == 1.0
    print("✅ Werner v=0.99 rejection test passed")


def test_determinant_identity():
    """det Q_a = −(3/4)·residual_a on arbitrary quantum behaviors"""
    from scenario import random_strategy
    rng = np.random.default_rng(11)
    for _ in range(20):
        b = behavior_of(random_strategy(rng))
        q = reconstruct_q(b)
        for a in range(1, 5):
            assert math.isclose(q.determinants()[a - 1], -0.75 * det_identity_residual(b, a), abs_tol=1e-12)
    print("✅ Determinant identity test passed")


def test_certify_reference():
    verdict = certify(behavior_of(reference_strategy()))
    assert verdict.test1_pass and verdict.test2_pass and verdict.certified
    assert verdict.certified_bits == 2.0 and verdict.guessing_bound == 0.25
    keys = [k for k, _ in verdict.report_fields()]
    assert len(keys) == len(set(keys)), "Report keys must be unique"
    assert keys[0] == "verdict_schema" and keys[-1] == "guessing_bound"
    print("✅ Reference certification test passed")


def test_certify_requires_complete_statistics():
    b = behavior_of(reference_strategy())
    jp = b.joint_povm.copy()
    jp[:, 0, :] = np.nan
    partial = Behavior(b.joint_dichotomic, jp, estimated=True, shots=100)
    with pytest.raises(MissingStatistics):
        certify(partial)
    with pytest.raises(MissingStatistics):
        reconstruct_q(partial)
    print("✅ Missing statistics test passed")


def test_tolerances():
    t = CertTolerances()
    assert (t.s_tol, t.uniform_tol, t.det_zero, t.trace_min, t.rank_min) == (1e-9, 1e-9, 1e-9, 1e-6, 1e-6)
    wide = t.for_shots(10 ** 6)
    assert math.isclose(wide.s_tol, 0.036) and math.isclose(wide.uniform_tol, 0.003)
    assert math.isclose(wide.det_zero, 0.003) and wide.rank_min == t.rank_min
    loose = t.loosened(10.0)
    assert math.isclose(loose.s_tol, 1e-8) and math.isclose(loose.trace_min, 1e-7)
    with pytest.raises(ValueError):
        CertTolerances(s_tol=0.0)
    with pytest.raises(ValueError):
        t.loosened(0.5)
    print("✅ Tolerance test passed")


def test_certifier_log():
    with tempfile.TemporaryDirectory() as tmp:
        log_file = os.path.join(tmp, 'ebi_cert_log.jsonl')
        certifier = Certifier(log_file=log_file, run_id='unit')
        certifier.certify(behavior_of(reference_strategy()), source='builtin-reference')
        certifier.certify(behavior_of(werner_strategy(0.5)), source='werner(v=0.5)')

        with open(log_file, 'r', encoding='utf-8') as f:
            records = [json.loads(line) for line in f]
    assert len(records) == 2
    assert list(records[0].keys()) == ["run_id", "timestamp", "phase", "source", "tolerances",
                                       "diagnostics", "verdict", "certified_bits", "guessing_bound",
                                       "explanation", "elapsed_ms"], f"Got: {list(records[0].keys())}"
    assert records[0]["verdict"] == "certified" and records[1]["verdict"] == "rejected"
    assert records[1]["run_id"] == "unit" and "4√3" in records[1]["explanation"]
    assert len(certifier.log) == 2 and certifier.log[0].startswith("S: 6.928")
    print("✅ Certifier log test passed")


def test_certifier_widens_for_estimated():
    certifier = Certifier(log_file='')
    exact = behavior_of(reference_strategy())
    est = Behavior(exact.joint_dichotomic, exact.joint_povm, estimated=True, shots=10 ** 4)
    assert certifier.tolerances_for(exact) == CertTolerances()
    assert math.isclose(certifier.tolerances_for(est).s_tol, 12 * 3 / 100)
    print("✅ Estimated tolerance widening test passed")


def run_all_tests():
    """Run all unit tests"""
    print("="*60)
    print("UNIT TESTS")
    print("="*60)

    tests = [
        test_pauli_products,
        test_qubit_eigendecomposition,
        test_jacobi_eigendecomposition,
        test_hermitian_checks,
        test_partial_trace_and_tensor,
        test_bloch_coefficients,
        test_reference_correlators,
        test_label_checks,
        test_invalid_strategy_names_operator,
        test_counts_format,
        test_counts_errors,
        test_quantum_and_classical_values,
        test_deterministic_values_agree,
        test_werner_scaling,
        test_measurement_geometry,
        test_reconstruct_reference_povm,
        test_reference_extremality,
        test_white_noise_fails_determinant,
        test_noisy_reference_is_not_extremal,
        test_werner_near_one_is_not_certified,
        test_determinant_identity,
        test_certify_reference,
        test_certify_requires_complete_statistics,
        test_tolerances,
        test_certifier_log,
        test_certifier_widens_for_estimated,
    ]
    try:
        for test in tests:
            test()
        print("\n✅ All unit tests passed!")
        return True
    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        return False
    except Exception as e:
        print(f"\n❌ Error: {e}")
        import traceback
        traceback.print_exc()
        return False

if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
