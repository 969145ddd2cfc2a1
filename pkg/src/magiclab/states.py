"""Dense statevector engine: gates, Haar/Clifford sampling, entanglement, distances.

Conventions used everywhere in this package:

- Basis index bits are big-endian in the qubit label: qubit ``j`` of an
  ``n``-qubit register sits at bit position ``n - 1 - j`` of the flat index,
  so the basis label reads left to right as ``|q0 q1 ... q_{n-1}>``.
- All logarithms and entropies are base 2 (bits).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

NORM_ATOL = 1e-9
UNITARY_ATOL = 1e-10

H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
S_MATRIX = np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=complex)
SDG_MATRIX = np.array([[1.0, 0.0], [0.0, -1.0j]], dtype=complex)
X_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z_MATRIX = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of ``n`` qubits as a dense length-2^n amplitude array."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.n:
            raise ValueError(f"amplitude array has length {amps.shape[0]}, expected 2^{self.n}")
        object.__setattr__(self, "amps", _freeze(amps))

    @property
    def dim(self) -> int:
        return 1 << self.n

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def require_normalized(self, atol: float = NORM_ATOL) -> None:
        if abs(self.norm() - 1.0) > atol:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(self.norm() - 1.0):.3e}")

    def normalized(self) -> "StateVector":
        return StateVector(self.n, self.amps / np.linalg.norm(self.amps))

    def inner(self, other: "StateVector") -> complex:
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return complex(np.vdot(self.amps, other.amps))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(self.n + other.n, np.kron(self.amps, other.amps))


def zero_state(n: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def basis_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


# ---------------------------------------------------------------------------
# Gate records and circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleQubitGate:
    """A 2x2 unitary applied to one site."""

    site: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("single-qubit gate matrix must be 2x2")
        if not np.allclose(m @ m.conj().T, np.eye(2), atol=UNITARY_ATOL):
            raise ValueError("single-qubit gate matrix is not unitary to 1e-10")
        object.__setattr__(self, "matrix", _freeze(m))


@dataclass(frozen=True)
class ControlledZGate:
    """C^{m-1}Z on a set of >= 2 sites: flips the sign of the all-ones pattern."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(sorted(int(s) for s in self.sites))
        if len(sites) < 2 or len(set(sites)) != len(sites):
            raise ValueError("controlled-Z needs >= 2 distinct sites")
        object.__setattr__(self, "sites", sites)


@dataclass(frozen=True)
class NamedGate:
    """Named Clifford generator: 'h' or 's' on one site, 'cnot' on (control, target)."""

    name: str
    sites: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if self.name in ("h", "s"):
            if len(sites) != 1:
                raise ValueError(f"{self.name} takes one site")
        elif self.name == "cnot":
            if len(sites) != 2 or sites[0] == sites[1]:
                raise ValueError("cnot takes (control, target) with distinct sites")
        else:
            raise ValueError(f"unknown named gate {self.name!r}")
        object.__setattr__(self, "sites", sites)


@dataclass(frozen=True)
class BasisPermutationGate:
    """Relabels computational basis states: |x> -> |table[x]>.

    Not part of the minimal gate grammar: compiling an arbitrary reversible
    permutation into CNOT/CZ networks is out of scope here, and subset-phase
    compilation needs the block as a unit.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64).reshape(-1)
        d = t.shape[0]
        if d < 2 or (d & (d - 1)) != 0:
            raise ValueError("permutation table length must be a power of two")
        if not np.array_equal(np.sort(t), np.arange(d)):
            raise ValueError("table is not a permutation")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def n(self) -> int:
        return int(self.table.shape[0]).bit_length() - 1


@dataclass(frozen=True)
class GateCircuit:
    """Ordered list of gate records, applied first-to-last."""

    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, *gates) -> "GateCircuit":
        return GateCircuit(self.gates + tuple(gates))

    def extended(self, other: "GateCircuit") -> "GateCircuit":
        return GateCircuit(self.gates + other.gates)

    def max_site(self) -> int:
        top = -1
        for g in self.gates:
            if isinstance(g, SingleQubitGate):
                top = max(top, g.site)
            elif isinstance(g, (ControlledZGate, NamedGate)):
                top = max(top, max(g.sites))
            elif isinstance(g, BasisPermutationGate):
                top = max(top, g.n - 1)
        return top


def _apply_single(amps: np.ndarray, n: int, site: int, m: np.ndarray) -> np.ndarray:
    view = amps.reshape(1 << site, 2, -1)
    return np.einsum("ab,ibk->iak", m, view).reshape(-1)


def apply_circuit(state: StateVector, circuit: GateCircuit) -> StateVector:
    """Apply the circuit's records in list order; preserves the norm."""
    n = state.n
    top = circuit.max_site()
    if top >= n:
        raise ValueError(f"circuit touches site {top} but the state has only {n} qubits")
    amps = np.array(state.amps, dtype=complex)
    d = amps.shape[0]
    idx = None
    for g in circuit.gates:
        if isinstance(g, SingleQubitGate):
            amps = _apply_single(amps, n, g.site, g.matrix)
        elif isinstance(g, NamedGate):
            if g.name == "h":
                amps = _apply_single(amps, n, g.sites[0], H_MATRIX)
            elif g.name == "s":
                amps = _apply_single(amps, n, g.sites[0], S_MATRIX)
            else:  # cnot
                c, t = g.sites
                pc, pt = n - 1 - c, n - 1 - t
                if idx is None:
                    idx = np.arange(d)
                dst = idx ^ (((idx >> pc) & 1) << pt)
                out = np.empty_like(amps)
                out[dst] = amps
                amps = out
        elif isinstance(g, ControlledZGate):
            mask = 0
            for s in g.sites:
                mask |= 1 << (n - 1 - s)
            if idx is None:
                idx = np.arange(d)
            sel = (idx & mask) == mask
            amps = amps.copy()
            amps[sel] = -amps[sel]
        elif isinstance(g, BasisPermutationGate):
            if g.n != n:
                raise ValueError("permutation block size does not match the register")
            out = np.empty_like(amps)
            out[g.table] = amps
            amps = out
        else:
            raise TypeError(f"unknown gate record {type(g).__name__}")
    return StateVector(n, amps)


def circuit_unitary(circuit: GateCircuit, n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the circuit (small n only)."""
    if n > 12:
        raise ValueError("dense unitary limited to n <= 12")
    d = 1 << n
    cols = np.empty((d, d), dtype=complex)
    for x in range(d):
        cols[:, x] = apply_circuit(basis_state(n, x), circuit).amps
    return cols


# ---------------------------------------------------------------------------
# Random states and random Clifford circuits
# ---------------------------------------------------------------------------


def haar_sample(n: int, seed) -> StateVector:
    """Haar-random pure state: iid standard complex Gaussian amplitudes, normalized."""
    if n > 14:
        raise ValueError("haar_sample limited to n <= 14")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, z / np.linalg.norm(z))


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_circuit(n: int, depth: int, seed) -> GateCircuit:
    """Generic test circuit: Haar single-qubit layers interleaved with CZ/CNOT."""
    rng = np.random.default_rng(seed)
    gates = []
    for layer in range(depth):
        for q in range(n):
            gates.append(SingleQubitGate(q, haar_unitary(2, rng)))
        if n >= 2:
            for q in range(layer % 2, n - 1, 2):
                if rng.integers(2):
                    gates.append(ControlledZGate((q, q + 1)))
                else:
                    gates.append(NamedGate("cnot", (q, q + 1)))
    return GateCircuit(tuple(gates))


def _symp(u, v) -> int:
    # symplectic product of (x, z) mask pairs; 1 iff the Paulis anticommute
    return ((u[0] & v[1]).bit_count() + (u[1] & v[0]).bit_count()) & 1


def _random_symplectic_pairs(m: int, rng) -> list:
    """Uniform random symplectic basis over GF(2)^{2m} as (f_i, g_i) mask pairs."""
    pairs = []

    def project(v):
        # remove components along the already-fixed hyperbolic pairs
        for f, g in pairs:
            if _symp(v, g):
                v = (v[0] ^ f[0], v[1] ^ f[1])
            if _symp(v, f):
                v = (v[0] ^ g[0], v[1] ^ g[1])
        return v

    lim = 1 << m
    for _ in range(m):
        while True:
            v = project((int(rng.integers(lim)), int(rng.integers(lim))))
            if v != (0, 0):
                break
        while True:
            w = project((int(rng.integers(lim)), int(rng.integers(lim))))
            if _symp(v, w) == 1:
                break
        pairs.append((v, w))
    return pairs


class _Tableau:
    """Images of X_i/Z_i under conjugation, as rows [x_mask, z_mask, sign_bit].

    Bit j of a mask is qubit j (local ordering, internal to the synthesis)."""

    def __init__(self, m: int, rows):
        self.m = m
        self.rows = rows  # 2m lists [x, z, s]; rows 0..m-1 are X-images

    @classmethod
    def from_pairs(cls, pairs, signs):
        rows = []
        for (f, _g), s in zip(pairs, signs[: len(pairs)]):
            rows.append([f[0], f[1], int(s)])
        for (_f, g), s in zip(pairs, signs[len(pairs):]):
            rows.append([g[0], g[1], int(s)])
        return cls(len(pairs), rows)

    def _each(self):
        return self.rows

    def h(self, q):
        b = 1 << q
        for r in self._each():
            x, z = r[0] & b, r[1] & b
            if x and z:
                r[2] ^= 1
            r[0] ^= x ^ z
            r[1] ^= x ^ z

    def s(self, q):
        b = 1 << q
        for r in self._each():
            if r[0] & b and r[1] & b:
                r[2] ^= 1
            r[1] ^= r[0] & b

    def sdg(self, q):
        b = 1 << q
        for r in self._each():
            if r[0] & b and not r[1] & b:
                r[2] ^= 1
            r[1] ^= r[0] & b

    def cnot(self, c, t):
        bc, bt = 1 << c, 1 << t
        for r in self._each():
            xc = (r[0] >> c) & 1
            zt = (r[1] >> t) & 1
            xt = (r[0] >> t) & 1
            zc = (r[1] >> c) & 1
            if xc & zt & (xt ^ zc ^ 1):
                r[2] ^= 1
            if xc:
                r[0] ^= bt
            if zt:
                r[1] ^= bc
    def cz(self, a, b):
        ba, bb = 1 << a, 1 << b
        for r in self._each():
            xa = (r[0] >> a) & 1
            xb = (r[0] >> b) & 1
            za = (r[1] >> a) & 1
            zb = (r[1] >> b) & 1
            if xa & xb & (za ^ zb):
                r[2] ^= 1
            if xa:
                r[1] ^= bb
            if xb:
                r[1] ^= ba

    def x(self, q):
        for r in self._each():
            if (r[1] >> q) & 1:
                r[2] ^= 1

    def z(self, q):
        for r in self._each():
            if (r[0] >> q) & 1:
                r[2] ^= 1

    def apply(self, op):
        getattr(self, op[0])(*op[1:])


def _synthesize(tab: _Tableau) -> list:
    """Reduce the tableau to the identity, returning the list of applied ops."""
    m = tab.m
    ops = []

    def do(*op):
        tab.apply(op)
        ops.append(op)

    def reduce_to_x(row_idx, i):
        # turn rows[row_idx] into +-X_i using gates that act only on sites >= i
        r = tab.rows[row_idx]
        if (r[0] >> i) == 0:
            j = i + (r[1] >> i).bit_length() - 1
            do("h", j)
        if not (r[0] >> i) & 1:
            j = i + ((r[0] >> i) & -(r[0] >> i)).bit_length() - 1
            do("cnot", j, i)
        rest = r[0] >> (i + 1)
        while rest:
            j = i + 1 + (rest & -rest).bit_length() - 1
            do("cnot", i, j)
            rest = r[0] >> (i + 1)
        if (r[1] >> i) & 1:
            do("sdg", i)
        rest = r[1] >> (i + 1)
        while rest:
            j = i + 1 + (rest & -rest).bit_length() - 1
            do("cz", i, j)
            rest = r[1] >> (i + 1)

    for i in range(m):
        reduce_to_x(i, i)
        do("h", i)       # pair (X_i-row, Z_i-row) is now (Z_i, *)
        reduce_to_x(m + i, i)
        do("h", i)       # back to (X_i, Z_i)
        if tab.rows[i][2]:
            do("z", i)
        if tab.rows[m + i][2]:
            do("x", i)

    for i in range(m):
        assert tab.rows[i] == [1 << i, 0, 0] and tab.rows[m + i] == [0, 1 << i, 0]
    return ops


_OP_INVERSE = {"h": "h", "s": "sdg", "sdg": "s", "cnot": "cnot", "cz": "cz", "x": "x", "z": "z"}


def _ops_to_circuit(ops) -> GateCircuit:
    gates = []
    for op in ops:
        kind = op[0]
        if kind == "h":
            gates.append(NamedGate("h", (op[1],)))
        elif kind == "s":
            gates.append(NamedGate("s", (op[1],)))
        elif kind == "sdg":
            gates.append(SingleQubitGate(op[1], SDG_MATRIX))
        elif kind == "cnot":
            gates.append(NamedGate("cnot", (op[1], op[2])))
        elif kind == "cz":
            gates.append(ControlledZGate((op[1], op[2])))
        elif kind == "x":
            gates.append(SingleQubitGate(op[1], X_MATRIX))
        elif kind == "z":
            gates.append(SingleQubitGate(op[1], Z_MATRIX))
        else:
            raise ValueError(kind)
    return GateCircuit(tuple(gates))


def random_clifford_circuit(m: int, seed) -> GateCircuit:
    """Uniformly random m-qubit Clifford as a generator circuit.

    Samples a uniform symplectic basis (the images of X_i/Z_i) plus uniform
    sign bits, then synthesizes a circuit realizing that tableau by Gaussian
    sweeping. Deterministic given the seed.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    rng = np.random.default_rng(seed)
    pairs = _random_symplectic_pairs(m, rng)
    signs = [int(b) for b in rng.integers(0, 2, size=2 * m)]
    tab = _Tableau.from_pairs(pairs, signs)
    ops = _synthesize(tab)
    inverse_ops = [(_OP_INVERSE[op[0]],) + op[1:] for op in reversed(ops)]
    return _ops_to_circuit(inverse_ops)


def clifford_tableau_of_circuit(circuit: GateCircuit, m: int) -> _Tableau:
    """Conjugation action of a Clifford circuit on the X_i/Z_i generators."""
    rows = [[1 << i, 0, 0] for i in range(m)] + [[0, 1 << i, 0] for i in range(m)]
    tab = _Tableau(m, rows)
    for g in circuit.gates:
        if isinstance(g, NamedGate):
            if g.name == "cnot":
                tab.cnot(*g.sites)
            else:
                getattr(tab, g.name)(g.sites[0])
        elif isinstance(g, ControlledZGate):
            if len(g.sites) != 2:
                raise ValueError("only two-site CZ records are Clifford generators")
            tab.cz(*g.sites)
        elif isinstance(g, SingleQubitGate):
            for name, mat in (("sdg", SDG_MATRIX), ("x", X_MATRIX), ("z", Z_MATRIX),
                              ("s", S_MATRIX), ("h", H_MATRIX)):
                if np.allclose(g.matrix, mat, atol=1e-12):
                    getattr(tab, name)(g.site)
                    break
            else:
                raise ValueError("single-qubit record is not a recognized Clifford generator")
        else:
            raise ValueError(f"non-Clifford record {type(g).__name__}")
    return tab


# ---------------------------------------------------------------------------
# Entanglement and distances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutSpec:
    """Bipartition A|B given by the site indices in A."""

    sites: tuple

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(sorted(set(int(s) for s in self.sites))))

    def validate(self, n: int) -> None:
        if not self.sites:
            raise ValueError("cut must be nonempty")
        if len(self.sites) >= n or min(self.sites) < 0 or max(self.sites) >= n:
            raise ValueError("cut must be a proper nonempty subset of the sites")


EIG_CLAMP = 1e-12


def reduced_eigenvalues(state: StateVector, cut: CutSpec) -> np.ndarray:
    """Eigenvalues of the reduced state on the smaller side of the cut."""
    cut.validate(state.n)
    n = state.n
    inside = list(cut.sites)
    outside = [q for q in range(n) if q not in cut.sites]
    if len(inside) > len(outside):
        inside, outside = outside, inside
    tensor = state.amps.reshape([2] * n)
    mat = np.transpose(tensor, inside + outside).reshape(1 << len(inside), -1)
    rho = mat @ mat.conj().T
    evals = np.linalg.eigvalsh(rho).real
    evals[evals < EIG_CLAMP] = 0.0
    return evals


def entanglement_entropy(state: StateVector, cut: CutSpec, order: int = 1) -> float:
    """Renyi entanglement entropy across the cut, in bits; order 1 or 2."""
    evals = reduced_eigenvalues(state, cut)
    nz = evals[evals > 0]
    if order == 1:
        return float(-(nz * np.log2(nz)).sum())
    if order == 2:
        return float(-np.log2((nz * nz).sum()))
    raise ValueError("order must be 1 or 2")


def trace_distance_pure(a: StateVector, b: StateVector) -> float:
    """||psi - phi||_1 = 2 sqrt(1 - |<psi|phi>|^2) for pure states."""
    if a.n != b.n:
        raise ValueError("qubit count mismatch")
    overlap = abs(a.inner(b)) ** 2
    return float(2.0 * np.sqrt(max(0.0, 1.0 - overlap)))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_STATE_MAGIC = b"MLQSTATE"
_STATE_VERSION = 1


def state_to_bytes(state: StateVector) -> bytes:
    header = _STATE_MAGIC + struct.pack("<HH", _STATE_VERSION, state.n)
    return header + state.amps.astype("<c16").tobytes()


def state_from_bytes(blob: bytes) -> StateVector:
    if blob[:8] != _STATE_MAGIC:
        raise ValueError("not a state file (bad magic bytes)")
    version, n = struct.unpack("<HH", blob[8:12])
    if version != _STATE_VERSION:
        raise ValueError(f"unsupported state format version {version}")
    amps = np.frombuffer(blob[12:], dtype="<c16")
    if amps.shape[0] != 1 << n:
        raise ValueError("payload length does not match header")
    return StateVector(n, amps.astype(complex))


def save_state(state: StateVector, path) -> None:
    with open(path, "wb") as fh:
        fh.write(state_to_bytes(state))


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        return state_from_bytes(fh.read())


def state_to_json(state: StateVector) -> str:
    pairs = [[float(a.real), float(a.imag)] for a in state.amps]
    return json.dumps({"format": "magiclab-state", "version": _STATE_VERSION,
                       "n": state.n, "amplitudes": pairs})


def state_from_json(text: str) -> StateVector:
    doc = json.loads(text)
    if doc.get("format") != "magiclab-state":
        raise ValueError("not a state JSON document")
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return StateVector(int(doc["n"]), amps)
