import numpy as np
import pytest

from magiclab.entropy import (
    binary_entropy,
    entropy_from_spectrum,
    fannes_rhs,
    m0_support,
    stabilizer_entropy,
    stabilizer_group,
    swap_trick_value,
)
from magiclab.pauli import full_spectrum, pauli_expectation, pauli_multiply
from magiclab.states import (
    GateCircuit,
    NamedGate,
    StateVector,
    apply_circuit,
    basis_state,
    haar_sample,
    random_clifford_circuit,
    trace_distance_pure,
    zero_state,
)

from oracles import naive_stabilizer_entropy, random_state

LOG2_4_3 = np.log2(4.0 / 3.0)  # M_2 of the canonical magic state


def t_state(m=1):
    one = StateVector(1, np.array([1.0, np.exp(1j * np.pi / 4)]) / np.sqrt(2.0))
    out = one
    for _ in range(m - 1):
        out = out.tensor(one)
    return out


def bell_state():
    return StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_zero_on_stabilizer_states():
    for st in (zero_state(3), bell_state(), basis_state(2, 3)):
        for alpha in (0, 1, 2, 3, 4, 2.5):
            assert abs(stabilizer_entropy(st, alpha).value) < 1e-9


def test_t_state_closed_forms():
    st = t_state()
    assert stabilizer_entropy(st, 2).value == pytest.approx(LOG2_4_3, abs=1e-12)
    # spectrum {1/2, 1/4, 1/4, 0}: Shannon = 1.5 bits
    assert stabilizer_entropy(st, 1).value == pytest.approx(0.5, abs=1e-12)
    rep = m0_support(st)
    assert rep.support_size == 3
    assert rep.value == pytest.approx(np.log2(3) - 1, abs=1e-12)


def test_additivity_of_t_tensor_powers():
    for m in (2, 3, 4):
        st = t_state(m)
        assert stabilizer_entropy(st, 2).value == pytest.approx(m * LOG2_4_3, abs=1e-9)


def test_additivity_random_pairs():
    rng = np.random.default_rng(8)
    for _ in range(10):
        a = StateVector(2, random_state(2, rng))
        b = StateVector(3, random_state(3, rng))
        ab = a.tensor(b)
        for alpha in (1, 2, 3):
            want = stabilizer_entropy(a, alpha).value + stabilizer_entropy(b, alpha).value
            assert stabilizer_entropy(ab, alpha).value == pytest.approx(want, abs=1e-9)


def test_matches_naive_oracle():
    rng = np.random.default_rng(21)
    for n in (1, 2, 3):
        for _ in range(5):
            amps = random_state(n, rng)
            st = StateVector(n, amps)
            for alpha in (1.0, 2.0, 3.0, 1.7):
                want = naive_stabilizer_entropy(amps, n, alpha)
                assert stabilizer_entropy(st, alpha).value == pytest.approx(want, abs=1e-9)


def test_hierarchy_on_random_states():
    rng = np.random.default_rng(33)
    alphas = [0, 1, 2, 3, 4]
    for _ in range(100):
        n = int(rng.integers(1, 5))
        spec = full_spectrum(StateVector(n, random_state(n, rng)))
        vals = [entropy_from_spectrum(spec, a).value for a in alphas]
        for lo, hi in zip(vals, vals[1:]):
            assert lo >= hi - 1e-9


def test_clifford_invariance():
    rng = np.random.default_rng(55)
    for seed in range(20):
        n = int(rng.integers(1, 4))
        st = StateVector(n, random_state(n, rng))
        circ = random_clifford_circuit(n, seed)
        out = apply_circuit(st, circ)
        for alpha in (1, 2, 3):
            assert stabilizer_entropy(out, alpha).value == pytest.approx(
                stabilizer_entropy(st, alpha).value, abs=1e-9)


def test_alpha_near_one_rejected():
    st = t_state()
    with pytest.raises(ValueError, match="alpha=1"):
        stabilizer_entropy(st, 1.0 + 1e-10)
    # exactly 1 routes to the Shannon path
    assert stabilizer_entropy(st, 1.0).value == pytest.approx(0.5, abs=1e-12)


def test_upper_bound_strict():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        st = StateVector(n, random_state(n, rng))
        # M_0 of a generic state is exactly n (full support); strictness starts at alpha >= 1
        assert stabilizer_entropy(st, 0).value <= n
        for alpha in (1, 2):
            v = stabilizer_entropy(st, alpha).value
            assert 0.0 - 1e-9 <= v < n


def test_swap_trick_examples():
    assert swap_trick_value(bell_state(), 2) == pytest.approx(1.0, abs=1e-12)
    assert swap_trick_value(t_state(), 2) == pytest.approx(0.75, abs=1e-12)
    # (1 + 2 (1/sqrt2)^6) / 2
    assert swap_trick_value(t_state(), 3) == pytest.approx(0.625, abs=1e-12)
    with pytest.raises(ValueError):
        swap_trick_value(t_state(), 1)


def test_swap_trick_is_exponentiated_entropy():
    rng = np.random.default_rng(77)
    for _ in range(30):
        n = int(rng.integers(1, 4))
        st = StateVector(n, random_state(n, rng))
        spec = full_spectrum(st)
        for alpha in (2, 3):
            want = 2.0 ** ((1 - alpha) * entropy_from_spectrum(spec, alpha).value)
            assert swap_trick_value(st, alpha, spectrum=spec) == pytest.approx(want, abs=1e-9)


def test_stabilizer_group_of_stabilizer_state():
    rep = stabilizer_group(bell_state())
    assert rep.order == 4 and rep.nullity == 0
    # generators reproduce signed unit expectations and commute
    for g in rep.generators:
        assert pauli_expectation(bell_state(), g.hermitian_representative()) == pytest.approx(
            1.0 if g.phase_exp == 0 else -1.0, abs=1e-9)
    for g in rep.generators:
        for h in rep.generators:
            assert g.commutes_with(h)
    # closure on generators
    prod = pauli_multiply(rep.generators[0], rep.generators[1])
    members = {(0, 0), (3, 0), (0, 3), (3, 3)}
    assert (prod.x_mask, prod.z_mask) in members


def test_stabilizer_group_t_state():
    rep = stabilizer_group(t_state())
    assert rep.order == 1 and rep.nullity == 1 and rep.generators == ()


def test_stabilizer_group_haar_full_nullity():
    hits = 0
    for seed in range(30):
        rep = stabilizer_group(haar_sample(4, seed))
        hits += rep.nullity == 4
    assert hits == 30


def test_fannes_rhs_values():
    assert fannes_rhs(0.0, 3, 1) == 0.0
    # frozen from the formula: 0.5 log2(15) + 1
    assert fannes_rhs(0.5, 2, 1) == pytest.approx(2.9534452978042594, abs=1e-12)
    assert fannes_rhs(0.1, 1, 2) == pytest.approx(0.8, abs=1e-12)
    with pytest.raises(ValueError):
        fannes_rhs(-0.1, 2, 1)
    with pytest.raises(ValueError):
        fannes_rhs(0.3, 2, 0.5)


def test_binary_entropy_endpoints():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)


def test_fannes_inequalities_small_sample():
    rng = np.random.default_rng(99)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        a = StateVector(n, random_state(n, rng))
        b = StateVector(n, random_state(n, rng))
        td = trace_distance_pure(a, b)
        d1 = abs(stabilizer_entropy(a, 1).value - stabilizer_entropy(b, 1).value)
        d2 = abs(stabilizer_entropy(a, 2).value - stabilizer_entropy(b, 2).value)
        assert d1 <= fannes_rhs(td, n, 1) + 1e-12
        assert d2 <= fannes_rhs(td, n, 2) + 1e-12


def test_t_count_bound():
    # m T factors tensored with stabilizer padding never exceed M_alpha = m
    for m in (1, 2, 3):
        st = t_state(m).tensor(bell_state())
        for alpha in (1, 2, 3):
            assert stabilizer_entropy(st, alpha).value <= m + 1e-9


def test_batch_reuses_spectrum():
    st = haar_sample(5, 3)
    spec = full_spectrum(st)
    a = entropy_from_spectrum(spec, 2).value
    b = stabilizer_entropy(st, 2).value
    assert a == b
