import numpy as np
import pytest

from magiclab.pauli import PauliOperator, full_spectrum, pauli_expectation
from magiclab.states import (
    BasisPermutationGate,
    ControlledZGate,
    CutSpec,
    GateCircuit,
    NamedGate,
    SingleQubitGate,
    StateVector,
    apply_circuit,
    basis_state,
    circuit_unitary,
    clifford_tableau_of_circuit,
    entanglement_entropy,
    haar_sample,
    load_state,
    random_clifford_circuit,
    save_state,
    state_from_bytes,
    state_from_json,
    state_to_bytes,
    state_to_json,
    trace_distance_pure,
    zero_state,
)

from oracles import random_state


def bell_circuit():
    return GateCircuit((NamedGate("h", (0,)), NamedGate("cnot", (0, 1))))


def test_bell_preparation():
    out = apply_circuit(zero_state(2), bell_circuit())
    want = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(out.amps, want, atol=1e-12)


def test_graph_state_stabilizer():
    plus2 = apply_circuit(zero_state(2), GateCircuit((NamedGate("h", (0,)), NamedGate("h", (1,)))))
    graph = apply_circuit(plus2, GateCircuit((ControlledZGate((0, 1)),)))
    assert pauli_expectation(graph, PauliOperator.from_label("XZ")) == pytest.approx(1.0)
    assert pauli_expectation(graph, PauliOperator.from_label("ZX")) == pytest.approx(1.0)


def test_empty_circuit_is_identity():
    st = haar_sample(3, 5)
    out = apply_circuit(st, GateCircuit())
    assert np.array_equal(out.amps, st.amps)


def test_circuit_site_bounds_checked():
    with pytest.raises(ValueError):
        apply_circuit(zero_state(2), GateCircuit((NamedGate("h", (2,)),)))


def test_single_qubit_gate_must_be_unitary():
    with pytest.raises(ValueError):
        SingleQubitGate(0, np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_multi_cz_flips_all_ones_only():
    n = 3
    amps = np.arange(1, 9, dtype=complex)
    amps = amps / np.linalg.norm(amps)
    out = apply_circuit(StateVector(n, amps), GateCircuit((ControlledZGate((0, 1, 2)),)))
    expect = amps.copy()
    expect[7] = -expect[7]
    assert np.allclose(out.amps, expect, atol=0)


def test_basis_permutation_gate():
    rng = np.random.default_rng(0)
    perm = rng.permutation(8)
    st = StateVector(3, random_state(3, rng))
    out = apply_circuit(st, GateCircuit((BasisPermutationGate(perm),)))
    for x in range(8):
        assert out.amps[perm[x]] == st.amps[x]


def test_haar_sample_deterministic_and_normalized():
    a = haar_sample(4, 123)
    b = haar_sample(4, 123)
    c = haar_sample(4, 124)
    assert np.array_equal(a.amps, b.amps)
    assert not np.array_equal(a.amps, c.amps)
    assert a.norm() == pytest.approx(1.0, abs=1e-12)


# --- Clifford machinery ----------------------------------------------------


def _pauli_of_row(n, row):
    return PauliOperator(n, row[0], row[1], 2 * row[2])


def _local_bits_to_state_mask(mask, n):
    # tableau masks are little-endian in the qubit index; state-side masks
    # put qubit j at bit n-1-j
    out = 0
    for j in range(n):
        if (mask >> j) & 1:
            out |= 1 << (n - 1 - j)
    return out


GENS = [
    ("h", (0,)), ("s", (0,)), ("sdg", (0,)), ("x", (0,)), ("z", (0,)),
    ("cnot", (0, 1)), ("cnot", (1, 0)), ("cz", (0, 1)),
]


def test_tableau_rules_match_dense_conjugation():
    from magiclab.states import SDG_MATRIX, X_MATRIX, Z_MATRIX, _Tableau

    n = 2
    for name, sites in GENS:
        if name == "h":
            circ = GateCircuit((NamedGate("h", sites),))
        elif name == "s":
            circ = GateCircuit((NamedGate("s", sites),))
        elif name == "sdg":
            circ = GateCircuit((SingleQubitGate(sites[0], SDG_MATRIX),))
        elif name == "x":
            circ = GateCircuit((SingleQubitGate(sites[0], X_MATRIX),))
        elif name == "z":
            circ = GateCircuit((SingleQubitGate(sites[0], Z_MATRIX),))
        elif name == "cnot":
            circ = GateCircuit((NamedGate("cnot", sites),))
        else:
            circ = GateCircuit((ControlledZGate(sites),))
        u = circuit_unitary(circ, n)
        for a in range(4):
            for b in range(4):
                if a == b == 0:
                    continue
                rows = [[a, b, 0]]
                tab = _Tableau(n, rows)
                getattr(tab, name)(*sites)
                got = rows[0]
                p_in = PauliOperator(n, _local_bits_to_state_mask(a, n),
                                     _local_bits_to_state_mask(b, n))
                p_out = PauliOperator(n, _local_bits_to_state_mask(got[0], n),
                                      _local_bits_to_state_mask(got[1], n), 2 * got[2])
                assert np.allclose(u @ p_in.to_matrix() @ u.conj().T,
                                   p_out.to_matrix(), atol=1e-12), (name, sites, a, b)


def test_random_clifford_reproduces_sampled_tableau():
    # the emitted circuit must conjugate X_i/Z_i exactly as its own tableau says
    for seed in range(20):
        for m in (1, 2, 3):
            circ = random_clifford_circuit(m, seed)
            tab = clifford_tableau_of_circuit(circ, m)
            u = circuit_unitary(circ, m)
            for i in range(m):
                for row, gen in ((tab.rows[i], PauliOperator(m, _local_bits_to_state_mask(1 << i, m), 0)),
                                 (tab.rows[m + i], PauliOperator(m, 0, _local_bits_to_state_mask(1 << i, m)))):
                    target = PauliOperator(m, _local_bits_to_state_mask(row[0], m),
                                           _local_bits_to_state_mask(row[1], m), 2 * row[2])
                    assert np.allclose(u @ gen.to_matrix() @ u.conj().T,
                                       target.to_matrix(), atol=1e-10)


def test_random_clifford_single_qubit_covers_group():
    # 24 distinct single-qubit Cliffords up to global phase
    seen = set()
    for seed in range(400):
        tab = clifford_tableau_of_circuit(random_clifford_circuit(1, seed), 1)
        seen.add(tuple(tuple(r) for r in tab.rows))
    assert len(seen) == 24


def test_random_clifford_deterministic():
    a = random_clifford_circuit(3, 99)
    b = random_clifford_circuit(3, 99)
    assert clifford_tableau_of_circuit(a, 3).rows == clifford_tableau_of_circuit(b, 3).rows


def test_clifford_preserves_stabilizer_entropy_moment():
    # conjugating by a Clifford permutes the Pauli spectrum
    rng = np.random.default_rng(42)
    for seed in range(5):
        st = StateVector(2, random_state(2, rng))
        circ = random_clifford_circuit(2, seed)
        before = np.sort(full_spectrum(st).values)
        after = np.sort(full_spectrum(apply_circuit(st, circ)).values)
        assert np.max(np.abs(before - after)) < 1e-12


# --- entanglement ----------------------------------------------------------


def test_product_state_zero_entropy():
    st = haar_sample(1, 0).tensor(haar_sample(1, 1)).tensor(haar_sample(1, 2))
    for cut in (CutSpec((0,)), CutSpec((1,)), CutSpec((0, 2))):
        assert entanglement_entropy(st, cut, 1) == pytest.approx(0.0, abs=1e-9)
        assert entanglement_entropy(st, cut, 2) == pytest.approx(0.0, abs=1e-9)


def test_bell_pair_one_bit():
    bell = apply_circuit(zero_state(2), bell_circuit())
    assert entanglement_entropy(bell, CutSpec((0,)), 1) == pytest.approx(1.0, abs=1e-12)
    assert entanglement_entropy(bell, CutSpec((1,)), 2) == pytest.approx(1.0, abs=1e-12)


def test_ghz_any_cut_one_bit():
    n = 5
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    ghz = StateVector(n, amps)
    for cut in (CutSpec((0,)), CutSpec((1, 3)), CutSpec((0, 1, 2, 3))):
        assert entanglement_entropy(ghz, cut, 1) == pytest.approx(1.0, abs=1e-12)
        assert entanglement_entropy(ghz, cut, 2) == pytest.approx(1.0, abs=1e-12)


def test_entropy_symmetric_under_complement():
    st = haar_sample(5, 7)
    a = CutSpec((0, 2))
    b = CutSpec((1, 3, 4))
    for order in (1, 2):
        assert entanglement_entropy(st, a, order) == pytest.approx(
            entanglement_entropy(st, b, order), abs=1e-9)


def test_renyi_hierarchy_on_random_states():
    rng = np.random.default_rng(100)
    for i in range(100):
        st = StateVector(4, random_state(4, rng))
        cut = CutSpec((0, 1))
        assert entanglement_entropy(st, cut, 1) >= entanglement_entropy(st, cut, 2) - 1e-9


def test_single_qubit_circuit_preserves_all_cut_entropies():
    rng = np.random.default_rng(5)
    st = haar_sample(4, 8)
    gates = []
    for q in range(4):
        m = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0]
        gates.append(SingleQubitGate(q, m))
    out = apply_circuit(st, GateCircuit(tuple(gates)))
    for bits in range(1, 15):
        cut = CutSpec(tuple(q for q in range(4) if bits >> q & 1))
        if len(cut.sites) == 4:
            continue
        for order in (1, 2):
            assert entanglement_entropy(out, cut, order) == pytest.approx(
                entanglement_entropy(st, cut, order), abs=1e-9)


def test_cut_validation():
    st = haar_sample(3, 0)
    with pytest.raises(ValueError):
        entanglement_entropy(st, CutSpec(()), 1)
    with pytest.raises(ValueError):
        entanglement_entropy(st, CutSpec((0, 1, 2)), 1)


# --- distances and serialization -------------------------------------------


def test_trace_distance_examples():
    psi = haar_sample(2, 3)
    # sqrt amplifies the ~1e-16 rounding of the self-overlap to ~1e-8
    assert trace_distance_pure(psi, psi) == pytest.approx(0.0, abs=1e-7)
    assert trace_distance_pure(basis_state(1, 0), basis_state(1, 1)) == pytest.approx(2.0)
    plus = StateVector(1, np.array([1.0, 1.0]) / np.sqrt(2))
    assert trace_distance_pure(basis_state(1, 0), plus) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_binary_round_trip_bit_exact(tmp_path):
    st = haar_sample(5, 77)
    path = tmp_path / "state.qsv"
    save_state(st, path)
    back = load_state(path)
    assert back.n == st.n
    assert np.array_equal(back.amps, st.amps)
    assert state_to_bytes(back) == state_to_bytes(st)


def test_binary_rejects_garbage():
    with pytest.raises(ValueError):
        state_from_bytes(b"NOTASTATE" + b"\x00" * 32)


def test_json_round_trip():
    st = haar_sample(3, 5)
    back = state_from_json(state_to_json(st))
    assert np.allclose(back.amps, st.amps, atol=0)
