import numpy as np
import pytest

from magiclab.otoc import OtocSpec, averaged_otoc, otoc_value, scrambling_ratio
from magiclab.pauli import PauliOperator
from magiclab.states import (
    GateCircuit,
    NamedGate,
    SingleQubitGate,
    circuit_unitary,
    random_circuit,
    random_clifford_circuit,
)
from magiclab.subset_phase import SubsetPhaseSpec

from oracles import naive_otoc_average_8pt

T_GATE = np.diag([1.0, np.exp(1j * np.pi / 4)])


def P(label):
    return PauliOperator.from_label(label)


def test_identity_circuit_two_point():
    spec = OtocSpec(GateCircuit(), 1, ((P("X"), P("X")),))
    assert otoc_value(spec) == pytest.approx(1.0)


def test_identity_circuit_xzxz():
    spec = OtocSpec(GateCircuit(), 1, ((P("X"), P("Z")), (P("X"), P("Z"))))
    assert otoc_value(spec) == pytest.approx(-1.0)


def test_identity_pauli_rejected():
    with pytest.raises(ValueError, match="non-identity"):
        OtocSpec(GateCircuit(), 2, ((P("II"), P("XX")),))


def test_clifford_values_are_quantized():
    rng = np.random.default_rng(3)
    allowed = np.array([0, 1, -1, 1j, -1j], dtype=complex)
    for seed in range(50):
        circ = random_clifford_circuit(2, seed)
        pairs = []
        for _ in range(int(rng.integers(1, 3))):
            while True:
                p = PauliOperator(2, int(rng.integers(4)), int(rng.integers(4)))
                q = PauliOperator(2, int(rng.integers(4)), int(rng.integers(4)))
                if not (p.is_identity or q.is_identity):
                    break
            pairs.append((p, q))
        val = otoc_value(OtocSpec(circ, 2, tuple(pairs)))
        assert np.min(np.abs(allowed - val)) < 1e-9


def test_clifford_average_is_maximal():
    for seed in range(5):
        for n in (1, 2):
            circ = random_clifford_circuit(n, seed)
            d = 1 << n
            assert averaged_otoc(circ, n, 2) == pytest.approx(1.0 / d ** 2, abs=1e-12)


def test_t_h_average_frozen_value():
    # H then T prepares the canonical magic state from |0>; moment 3/4, d = 2
    circ = GateCircuit((NamedGate("h", (0,)), SingleQubitGate(0, T_GATE)))
    assert averaged_otoc(circ, 1, 2) == pytest.approx(0.1875, abs=1e-12)
    assert averaged_otoc(circ, 1, 2, method="direct") == pytest.approx(0.1875, abs=1e-9)


def test_direct_matches_spectrum_identity():
    for seed in range(8):
        for n in (1, 2):
            circ = random_circuit(n, 2, seed)
            spec_val = averaged_otoc(circ, n, 2, method="spectrum")
            direct_val = averaged_otoc(circ, n, 2, method="direct")
            assert abs(spec_val - direct_val) < 1e-9


def test_direct_matches_external_oracle():
    for seed in (0, 1):
        circ = random_circuit(2, 2, seed)
        mine = averaged_otoc(circ, 2, 2, method="direct")
        ref = naive_otoc_average_8pt(circuit_unitary(circ, 2), 2)
        assert mine == pytest.approx(ref, abs=1e-9)


def test_direct_mode_gate():
    with pytest.raises(ValueError):
        averaged_otoc(GateCircuit(), 2, 3, method="direct")
    with pytest.raises(ValueError):
        averaged_otoc(GateCircuit(), 5, 2, method="direct")


def test_average_bounded_by_clifford_value():
    for seed in range(5):
        n = 2
        circ = random_circuit(n, 2, seed)
        val = averaged_otoc(circ, n, 2)
        assert 0.0 < val <= 1.0 / (1 << n) ** 2 + 1e-12


def test_scrambling_ratio_monotone_and_consistent():
    spec = SubsetPhaseSpec(n=4, k=2, fn_kind="kwise", fn_seed=1, subset_seed=1)
    rows = scrambling_ratio(spec, [4, 6], alpha=2, haar_seeds=10, master_seed=5)
    assert rows[0]["n"] == 4 and rows[1]["n"] == 6
    assert rows[1]["ratio"] > rows[0]["ratio"]
    for row in rows:
        assert row["ratio"] == pytest.approx(row["c_pm"] / row["c_haar_mean"], rel=1e-12)
