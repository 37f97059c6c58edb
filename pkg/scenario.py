# -*- coding: utf-8 -*-
"""
scenario - Bell strategies, exact behaviors, finite-shot sampling

Settings and outcomes use the protocol labels in the public API:
- Alice's dichotomic settings k = 1..3, Bob's settings l = 1..4
- dichotomic outcomes a, b ∈ {+1, −1}
- Alice's four-outcome measurement A_4 has outcomes a = 1..4

Array layout (0-based, outcome index 0 ↔ +1, 1 ↔ −1):
- joint_dichotomic[k, l, ia, ib] = P(a, b | A_k, B_l)
- joint_povm[a, l, ib]           = P(a, b | A_4, B_l)

P(a, b) = tr(ρ · Π_a ⊗ Π_b) with Π_± = (𝟙 ± O)/2 for a dichotomic O.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

import qlin
from qlin import SPECTRAL_TOL

ALICE_SETTINGS = 3
BOB_SETTINGS = 4
POVM_OUTCOMES = 4
OUTCOMES = (+1, -1)

COUNTS_FORMAT_VERSION = "ebi-counts v1"


class InvalidStrategy(ValueError):
    def __init__(self, operator_name, message):
        super().__init__(f"{operator_name}: {message}")
        self.operator_name = operator_name


class IndexOutOfRange(IndexError):
    pass


class EmptyRecord(ValueError):
    pass


class CountsFormatError(ValueError):
    pass


def outcome_index(value: int) -> int:
    """+1 → 0, −1 → 1"""
    if value == +1:
        return 0
    if value == -1:
        return 1
    raise IndexOutOfRange(f"Dichotomic outcome must be +1 or -1, got {value!r}")


def _check_label(name: str, value: int, upper: int):
    if not isinstance(value, (int, np.integer)) or not 1 <= value <= upper:
        raise IndexOutOfRange(f"{name} must be in 1..{upper}, got {value!r}")


@dataclass(frozen=True, eq=False)
class Strategy:
    """
    Shared state plus local measurements.

    state may be a ket on dA·dB or a density operator of that dimension.
    """
    state: np.ndarray
    alice_obs: Tuple[np.ndarray, ...]
    alice_povm: Tuple[np.ndarray, ...]
    bob_obs: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, 'state', np.asarray(self.state, dtype=complex))
        for name in ('alice_obs', 'alice_povm', 'bob_obs'):
            ops = tuple(np.asarray(op, dtype=complex) for op in getattr(self, name))
            object.__setattr__(self, name, ops)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.alice_obs[0].shape[0], self.bob_obs[0].shape[0]

    @property
    def rho(self) -> np.ndarray:
        return qlin.density(self.state)

    def validate(self, tol: float = SPECTRAL_TOL):
        """Raise InvalidStrategy naming the first operator that breaks an invariant"""
        if len(self.alice_obs) != ALICE_SETTINGS:
            raise InvalidStrategy("alice_obs", f"expected {ALICE_SETTINGS} observables, got {len(self.alice_obs)}")
        if len(self.bob_obs) != BOB_SETTINGS:
            raise InvalidStrategy("bob_obs", f"expected {BOB_SETTINGS} observables, got {len(self.bob_obs)}")
        if len(self.alice_povm) != POVM_OUTCOMES:
            raise InvalidStrategy("alice_povm", f"expected {POVM_OUTCOMES} elements, got {len(self.alice_povm)}")

        d_a, d_b = self.dims
        for k, op in enumerate(self.alice_obs, start=1):
            _check_dichotomic(f"A_{k}", op, d_a, tol)
        for l, op in enumerate(self.bob_obs, start=1):
            _check_dichotomic(f"B_{l}", op, d_b, tol)
        check_povm(self.alice_povm, d_a, tol, name="A_4")

        rho = self.rho
        if rho.shape != (d_a * d_b, d_a * d_b):
            raise InvalidStrategy("state", f"dimension {rho.shape[0]} does not match {d_a}x{d_b}")
        if abs(np.real(np.trace(rho)) - 1.0) > tol:
            raise InvalidStrategy("state", "not normalized")
        if not qlin.is_hermitian(rho, tol) or qlin.min_eigenvalue(rho) < -tol:
            raise InvalidStrategy("state", "not a positive semidefinite density operator")


def _check_dichotomic(name: str, op: np.ndarray, dim: int, tol: float):
    if op.shape != (dim, dim):
        raise InvalidStrategy(name, f"shape {op.shape} does not match local dimension {dim}")
    if not qlin.is_hermitian(op, tol):
        raise InvalidStrategy(name, "not Hermitian")
    if np.max(np.abs(op @ op - np.eye(dim))) > tol:
        raise InvalidStrategy(name, "does not square to the identity")


def check_povm(elements: Sequence[np.ndarray], dim: int, tol: float = SPECTRAL_TOL, name: str = "POVM"):
    """Positivity and completeness of a POVM; raises InvalidStrategy"""
    total = np.zeros((dim, dim), dtype=complex)
    for a, el in enumerate(elements, start=1):
        el = np.asarray(el, dtype=complex)
        if el.shape != (dim, dim):
            raise InvalidStrategy(f"{name}[{a}]", f"shape {el.shape} does not match dimension {dim}")
        if not qlin.is_hermitian(el, tol):
            raise InvalidStrategy(f"{name}[{a}]", "not Hermitian")
        if qlin.min_eigenvalue(el) < -tol:
            raise InvalidStrategy(f"{name}[{a}]", "not positive semidefinite")
        total += el
    if np.max(np.abs(total - np.eye(dim))) > tol:
        raise InvalidStrategy(name, "elements do not sum to the identity")


def dichotomic_projectors(op: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(Π_+, Π_−) = ((𝟙 + O)/2, (𝟙 − O)/2); O = ±𝟙 gives a deterministic outcome"""
    eye = np.eye(op.shape[0], dtype=complex)
    return 0.5 * (eye + op), 0.5 * (eye - op)


@dataclass(frozen=True, eq=False)
class Behavior:
    """
    Outcome probability tables for all setting pairs.

    Entries are NaN where a setting pair has no statistics (estimated
    behaviors only). `estimated` marks finite-shot relative frequencies.
    """
    joint_dichotomic: np.ndarray
    joint_povm: np.ndarray
    estimated: bool = False
    shots: Optional[int] = None

    def __post_init__(self):
        jd = np.asarray(self.joint_dichotomic, dtype=float)
        jp = np.asarray(self.joint_povm, dtype=float)
        if jd.shape != (ALICE_SETTINGS, BOB_SETTINGS, 2, 2):
            raise ValueError(f"joint_dichotomic must have shape (3, 4, 2, 2), got {jd.shape}")
        if jp.shape != (POVM_OUTCOMES, BOB_SETTINGS, 2):
            raise ValueError(f"joint_povm must have shape (4, 4, 2), got {jp.shape}")
        object.__setattr__(self, 'joint_dichotomic', jd)
        object.__setattr__(self, 'joint_povm', jp)

    def has_pair(self, l: int, k: Optional[int] = None) -> bool:
        """Statistics present for (A_k, B_l), or (A_4, B_l) when k is None"""
        if k is None:
            return not np.any(np.isnan(self.joint_povm[:, l - 1, :]))
        return not np.any(np.isnan(self.joint_dichotomic[k - 1, l - 1]))

    @property
    def complete(self) -> bool:
        return not (np.any(np.isnan(self.joint_dichotomic)) or np.any(np.isnan(self.joint_povm)))

    def povm_marginal(self, a: int, l: Optional[int] = None) -> float:
        """P(a|A_4), from pair (A_4, B_l) or averaged over all available l"""
        _check_label("a", a, POVM_OUTCOMES)
        if l is not None:
            _check_label("l", l, BOB_SETTINGS)
            return float(np.sum(self.joint_povm[a - 1, l - 1]))
        per_l = np.sum(self.joint_povm[a - 1], axis=1)
        return float(np.nanmean(per_l))

    @property
    def povm_marginals(self) -> np.ndarray:
        return np.array([self.povm_marginal(a) for a in range(1, POVM_OUTCOMES + 1)])

    def validate(self, tol: float = SPECTRAL_TOL) -> List[str]:
        """List of invariant violations; empty when the behavior is valid"""
        issues = []
        for name, table, axes in (("joint_dichotomic", self.joint_dichotomic, (2, 3)),
                                  ("joint_povm", self.joint_povm, (0, 2))):
            present = table[~np.isnan(table)]
            if np.any(present < -1e-12) or np.any(present > 1 + 1e-12):
                issues.append(f"{name}: probability outside [0, 1]")
            sums = np.sum(table, axis=axes)
            sums = sums[~np.isnan(sums)]
            if np.any(np.abs(sums - 1.0) > tol):
                issues.append(f"{name}: conditional distribution does not sum to 1")
        residual = no_signaling_residual(self)
        if residual > tol:
            label = "advisory, estimated" if self.estimated else "violated"
            issues.append(f"no-signaling {label}: residual {residual:.3g}")
        return issues


def no_signaling_residual(b: Behavior) -> float:
    """Largest spread of any one-party marginal across the other party's settings"""
    spreads = [0.0]

    def spread(values):
        values = np.asarray(values)
        values = values[~np.isnan(values)]
        return float(np.max(values) - np.min(values)) if values.size > 1 else 0.0

    # Alice's A_1..A_3 marginals across l
    alice_dich = np.sum(b.joint_dichotomic, axis=3)  # [k, l, ia]
    for k in range(ALICE_SETTINGS):
        for ia in range(2):
            spreads.append(spread(alice_dich[k, :, ia]))
    # A_4 marginals across l
    alice_povm = np.sum(b.joint_povm, axis=2)  # [a, l]
    for a in range(POVM_OUTCOMES):
        spreads.append(spread(alice_povm[a, :]))
    # Bob's marginals across Alice's five settings
    bob_dich = np.sum(b.joint_dichotomic, axis=2)  # [k, l, ib]
    bob_povm = np.sum(b.joint_povm, axis=0)  # [l, ib]
    for l in range(BOB_SETTINGS):
        for ib in range(2):
            spreads.append(spread(np.append(bob_dich[:, l, ib], bob_povm[l, ib])))
    return max(spreads)


def behavior_of(s: Strategy, tol: float = SPECTRAL_TOL) -> Behavior:
    """Exact behavior by the Born rule"""
    s.validate(tol)
    rho = s.rho
    alice_proj = [dichotomic_projectors(op) for op in s.alice_obs]
    bob_proj = [dichotomic_projectors(op) for op in s.bob_obs]

    jd = np.zeros((ALICE_SETTINGS, BOB_SETTINGS, 2, 2))
    for k, pa in enumerate(alice_proj):
        for l, pb in enumerate(bob_proj):
            for ia in range(2):
                for ib in range(2):
                    jd[k, l, ia, ib] = qlin.expectation(rho, qlin.tensor(pa[ia], pb[ib]))

    jp = np.zeros((POVM_OUTCOMES, BOB_SETTINGS, 2))
    for a, el in enumerate(s.alice_povm):
        for l, pb in enumerate(bob_proj):
            for ib in range(2):
                jp[a, l, ib] = qlin.expectation(rho, qlin.tensor(el, pb[ib]))

    return Behavior(jd, jp)


def correlator(b: Behavior, k: int, l: int) -> float:
    """E_{k,l} = Σ_{a,b} ab·P(a,b|A_k,B_l)"""
    _check_label("k", k, ALICE_SETTINGS)
    _check_label("l", l, BOB_SETTINGS)
    p = b.joint_dichotomic[k - 1, l - 1]
    return float(p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1])


def correlators(b: Behavior) -> np.ndarray:
    """3×4 matrix of E_{k,l}"""
    p = b.joint_dichotomic
    return p[:, :, 0, 0] - p[:, :, 0, 1] - p[:, :, 1, 0] + p[:, :, 1, 1]


def cond_expect(b: Behavior, a: int, l: int) -> float:
    """E_{a|4,l} = Σ_b b·P(a,b|A_4,B_l)"""
    _check_label("a", a, POVM_OUTCOMES)
    _check_label("l", l, BOB_SETTINGS)
    p = b.joint_povm[a - 1, l - 1]
    return float(p[0] - p[1])


def bob_expectation(b: Behavior, l: int, k: Optional[int] = None) -> float:
    """⟨B_l⟩ read from the (A_k, B_l) table, or from (A_4, B_l) when k is None"""
    _check_label("l", l, BOB_SETTINGS)
    if k is None:
        p = np.sum(b.joint_povm[:, l - 1, :], axis=0)
    else:
        _check_label("k", k, ALICE_SETTINGS)
        p = np.sum(b.joint_dichotomic[k - 1, l - 1], axis=0)
    return float(p[0] - p[1])


def mix_behaviors(behaviors: Sequence[Behavior], weights: Sequence[float]) -> Behavior:
    """Convex combination Σ w_i·b_i"""
    weights = np.asarray(weights, dtype=float)
    if len(behaviors) != len(weights) or len(behaviors) == 0:
        raise ValueError("Need one weight per behavior")
    jd = sum(w * b.joint_dichotomic for w, b in zip(weights, behaviors))
    jp = sum(w * b.joint_povm for w, b in zip(weights, behaviors))
    return Behavior(jd, jp, estimated=any(b.estimated for b in behaviors))


def uniform_behavior() -> Behavior:
    """Uncorrelated uniform noise: every dichotomic joint 1/4, every A_4 joint 1/8"""
    return Behavior(np.full((ALICE_SETTINGS, BOB_SETTINGS, 2, 2), 0.25),
                    np.full((POVM_OUTCOMES, BOB_SETTINGS, 2), 0.125))


# ---------------------------------------------------------------------------
# Random strategies
# ---------------------------------------------------------------------------

def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_dichotomic(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random ±1 observable; traceless unit Bloch vector for qubits"""
    if dim == 2:
        n = rng.normal(size=3)
        return qlin.unit_observable(n)
    u = random_unitary(dim, rng)
    signs = rng.choice([-1.0, 1.0], size=dim)
    return qlin.hermitian_part(u @ np.diag(signs) @ u.conj().T)


def random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> Tuple[np.ndarray, ...]:
    """G_a = M_a M_a†, normalized as S^{-1/2} G_a S^{-1/2} with S = Σ G_a"""
    raw = []
    for _ in range(outcomes):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(m @ m.conj().T)
    inv_sqrt = qlin.operator_function(sum(raw), lambda x: 1.0 / np.sqrt(x))
    return tuple(qlin.hermitian_part(inv_sqrt @ g @ inv_sqrt) for g in raw)


def random_strategy(rng: np.random.Generator, dims: Tuple[int, int] = (2, 2)) -> Strategy:
    d_a, d_b = dims
    return Strategy(
        state=random_ket(d_a * d_b, rng),
        alice_obs=tuple(random_dichotomic(d_a, rng) for _ in range(ALICE_SETTINGS)),
        alice_povm=random_povm(d_a, POVM_OUTCOMES, rng),
        bob_obs=tuple(random_dichotomic(d_b, rng) for _ in range(BOB_SETTINGS)),
    )


# ---------------------------------------------------------------------------
# Finite statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CountRecord:
    """
    Integer outcome counts per setting pair.

    dichotomic[k, l, ia, ib] and povm[a, l, ib] follow the Behavior layout.
    A setting pair with zero total counts is treated as absent.
    """
    dichotomic: np.ndarray
    povm: np.ndarray
    shots: int

    def __post_init__(self):
        d = np.asarray(self.dichotomic, dtype=np.int64)
        p = np.asarray(self.povm, dtype=np.int64)
        if d.shape != (ALICE_SETTINGS, BOB_SETTINGS, 2, 2) or p.shape != (POVM_OUTCOMES, BOB_SETTINGS, 2):
            raise CountsFormatError("Count tables have the wrong shape")
        if self.shots < 1:
            raise CountsFormatError(f"shots must be positive, got {self.shots}")
        if np.any(d < 0) or np.any(p < 0):
            raise CountsFormatError("Counts must be nonnegative")
        totals = np.concatenate([np.sum(d, axis=(2, 3)).ravel(), np.sum(p, axis=(0, 2)).ravel()])
        bad = totals[(totals != 0) & (totals != self.shots)]
        if bad.size:
            raise CountsFormatError(f"Setting pair total {int(bad[0])} differs from declared shots {self.shots}")
        object.__setattr__(self, 'dichotomic', d)
        object.__setattr__(self, 'povm', p)

    @property
    def total(self) -> int:
        return int(np.sum(self.dichotomic) + np.sum(self.povm))


def _clean_distribution(p: np.ndarray) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float).ravel(), 0.0, None)
    return p / np.sum(p)


def sample(s: Strategy, shots_per_pair: int, seed: int) -> CountRecord:
    """
    i.i.d. counts from behavior_of(s).

    One child generator per setting pair, spawned from SeedSequence(seed),
    so each pair's stream depends only on the seed and its position.
    """
    if shots_per_pair < 1:
        raise ValueError(f"shots_per_pair must be >= 1, got {shots_per_pair}")
    b = behavior_of(s)
    n_pairs = ALICE_SETTINGS * BOB_SETTINGS + BOB_SETTINGS
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n_pairs)]

    dich = np.zeros((ALICE_SETTINGS, BOB_SETTINGS, 2, 2), dtype=np.int64)
    i = 0
    for k in range(ALICE_SETTINGS):
        for l in range(BOB_SETTINGS):
            probs = _clean_distribution(b.joint_dichotomic[k, l])
            dich[k, l] = rngs[i].multinomial(shots_per_pair, probs).reshape(2, 2)
            i += 1
    povm = np.zeros((POVM_OUTCOMES, BOB_SETTINGS, 2), dtype=np.int64)
    for l in range(BOB_SETTINGS):
        probs = _clean_distribution(b.joint_povm[:, l, :])
        povm[:, l, :] = rngs[i].multinomial(shots_per_pair, probs).reshape(POVM_OUTCOMES, 2)
        i += 1
    return CountRecord(dich, povm, shots_per_pair)


def estimate(c: CountRecord) -> Behavior:
    """Relative frequencies; absent setting pairs become NaN"""
    if c.total == 0:
        raise EmptyRecord("Count record holds no outcomes")
    d_tot = np.sum(c.dichotomic, axis=(2, 3), keepdims=True).astype(float)
    p_tot = np.sum(c.povm, axis=(0, 2), keepdims=True).astype(float)
    with np.errstate(invalid='ignore', divide='ignore'):
        jd = np.where(d_tot > 0, c.dichotomic / d_tot, np.nan)
        jp = np.where(p_tot > 0, c.povm / p_tot, np.nan)
    return Behavior(jd, jp, estimated=True, shots=c.shots)


def format_counts(c: CountRecord) -> str:
    """
    Line-oriented counts format:

        # ebi-counts v1
        # shots: <n>
        # shape: alice=3 bob=4 povm=4
        D <k> <l> <a=±1> <b=±1> <count>
        P <a=1..4> <l> <b=±1> <count>
    """
    lines = [f"# {COUNTS_FORMAT_VERSION}",
             f"# shots: {c.shots}",
             f"# shape: alice={ALICE_SETTINGS} bob={BOB_SETTINGS} povm={POVM_OUTCOMES}"]
    for k in range(ALICE_SETTINGS):
        for l in range(BOB_SETTINGS):
            if np.sum(c.dichotomic[k, l]) == 0:
                continue
            for ia, a in enumerate(OUTCOMES):
                for ib, b in enumerate(OUTCOMES):
                    lines.append(f"D {k + 1} {l + 1} {a:+d} {b:+d} {int(c.dichotomic[k, l, ia, ib])}")
    for l in range(BOB_SETTINGS):
        if np.sum(c.povm[:, l]) == 0:
            continue
        for a in range(POVM_OUTCOMES):
            for ib, b in enumerate(OUTCOMES):
                lines.append(f"P {a + 1} {l + 1} {b:+d} {int(c.povm[a, l, ib])}")
    return "\n".join(lines) + "\n"


def parse_counts(text: str) -> CountRecord:
    shots = None
    dich = np.zeros((ALICE_SETTINGS, BOB_SETTINGS, 2, 2), dtype=np.int64)
    povm = np.zeros((POVM_OUTCOMES, BOB_SETTINGS, 2), dtype=np.int64)
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# {COUNTS_FORMAT_VERSION}":
        raise CountsFormatError(f"Missing '# {COUNTS_FORMAT_VERSION}' header")

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("shots:"):
                try:
                    shots = int(body.split(":", 1)[1])
                except ValueError:
                    raise CountsFormatError(f"line {lineno}: bad shots header")
            elif body.startswith("shape:") and body != f"shape: alice={ALICE_SETTINGS} bob={BOB_SETTINGS} povm={POVM_OUTCOMES}":
                raise CountsFormatError(f"line {lineno}: unsupported scenario shape '{body}'")
            continue
        parts = line.split()
        try:
            if parts[0] == "D" and len(parts) == 6:
                k, l, a, b, n = (int(x) for x in parts[1:])
                _check_label("k", k, ALICE_SETTINGS)
                _check_label("l", l, BOB_SETTINGS)
                dich[k - 1, l - 1, outcome_index(a), outcome_index(b)] = n
            elif parts[0] == "P" and len(parts) == 5:
                a, l, b, n = (int(x) for x in parts[1:])
                _check_label("a", a, POVM_OUTCOMES)
                _check_label("l", l, BOB_SETTINGS)
                povm[a - 1, l - 1, outcome_index(b)] = n
            else:
                raise CountsFormatError(f"line {lineno}: unrecognized record '{line}'")
        except (ValueError, IndexError) as e:
            if isinstance(e, CountsFormatError):
                raise
            raise CountsFormatError(f"line {lineno}: {e}")

    if shots is None:
        raise CountsFormatError("Missing '# shots:' header")
    return CountRecord(dich, povm, shots)


def write_counts(c: CountRecord, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_counts(c))


def read_counts(path: str) -> CountRecord:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_counts(f.read())
