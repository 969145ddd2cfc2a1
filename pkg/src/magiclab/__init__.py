"""magiclab: a numerical laboratory for nonstabilizerness.

Builds subset phase state ensembles and computes every desk-scale
nonstabilizerness quantity around them: characteristic Pauli spectra,
stabilizer Renyi entropies, stabilizer nullity, convex magic monotones
over exhaustive stabilizer catalogs (robustness, fidelity, extent,
max-relative entropy), OTOC identities, continuity bounds, and
distillation copy-count limits.

Repository-wide convention: every logarithm, entropy, and "bits" value is
base 2, so entropies of n-qubit states live in [0, n).
"""

from .states import (
    StateVector,
    GateCircuit,
    SingleQubitGate,
    ControlledZGate,
    NamedGate,
    BasisPermutationGate,
    CutSpec,
    apply_circuit,
    haar_sample,
    random_clifford_circuit,
    entanglement_entropy,
    trace_distance_pure,
    zero_state,
    basis_state,
    save_state,
    load_state,
)
from .pauli import (
    PauliOperator,
    PauliSpectrum,
    pauli_expectation,
    pauli_multiply,
    full_spectrum,
)

__version__ = "0.1.0"
