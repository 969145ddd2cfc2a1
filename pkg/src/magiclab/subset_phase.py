"""Construction of subset phase states: (1/sqrt|S|) sum_{x in S} (-1)^{f(x)} |x>.

Ensembles are driven by two seeded ingredients:

- the sign function ``f``, as a plain truth table, a t-wise independent
  polynomial over GF(2^k) evaluated on the subset index, or a hypergraph
  parity polynomial on the index bits;
- the subset ``S``, either an explicit list or the image of the prefix
  {0, ..., 2^k - 1} under a keyed Feistel permutation of basis labels.

The Feistel permutation is a TOY stand-in for a pseudorandom permutation:
it is a seeded bijection with decent statistical mixing and an explicit
inverse, and makes no cryptographic claim whatsoever. Every statistical
guarantee exercised in this repository only needs exact t-wise
independence, which the polynomial family supplies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .states import (
    BasisPermutationGate,
    ControlledZGate,
    GateCircuit,
    NamedGate,
    SingleQubitGate,
    StateVector,
    Z_MATRIX,
)

# Low-weight irreducible polynomials over GF(2), one per extension degree.
# Bit i of the entry is the coefficient of x^i (leading bit included).
# Irreducibility is verified by Rabin's test in the test suite.
IRREDUCIBLE_POLY = {
    1: 0b11,                 # x + 1
    2: 0b111,                # x^2 + x + 1
    3: 0b1011,               # x^3 + x + 1
    4: 0b10011,              # x^4 + x + 1
    5: 0b100101,             # x^5 + x^2 + 1
    6: 0b1000011,            # x^6 + x + 1
    7: 0b10000011,           # x^7 + x + 1
    8: 0b100011011,          # x^8 + x^4 + x^3 + x + 1
    9: 0b1000000011,         # x^9 + x + 1
    10: 0b10000001001,       # x^10 + x^3 + 1
    11: 0b100000000101,      # x^11 + x^2 + 1
    12: 0b1000000001001,     # x^12 + x^3 + 1
    13: 0b10000000011011,    # x^13 + x^4 + x^3 + x + 1
    14: 0b100000000100001,   # x^14 + x^5 + 1
    15: 0b1000000000000011,  # x^15 + x + 1
    16: 0b10000000000101011, # x^16 + x^5 + x^3 + x + 1
}


def gf_mul(a: int, b: int, m: int) -> int:
    """Multiply in GF(2^m) using the committed irreducible polynomial."""
    poly = IRREDUCIBLE_POLY[m]
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return acc


@dataclass(frozen=True)
class KWiseFunction:
    """Random degree-(t-1) polynomial over GF(2^m); output is the low bit.

    Values on any t distinct inputs are jointly uniform field elements, so
    the extracted bit is exactly t-wise independent and unbiased.
    """

    m: int
    t: int
    coefficients: tuple

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("independence parameter t must be >= 1")
        if self.m not in IRREDUCIBLE_POLY:
            raise ValueError(f"no committed field of degree {self.m}")
        if len(self.coefficients) != self.t:
            raise ValueError("need exactly t coefficients")
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    def field_value(self, u: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = gf_mul(acc, u, self.m) ^ c
        return acc

    def __call__(self, u: int) -> int:
        return self.field_value(u) & 1


def sample_kwise_function(m: int, t: int = 8, seed=0) -> KWiseFunction:
    """Uniformly random member of the t-wise independent family over GF(2^m)."""
    rng = np.random.default_rng(seed)
    coeffs = tuple(int(c) for c in rng.integers(0, 1 << m, size=t))
    return KWiseFunction(m, t, coeffs)


# ---------------------------------------------------------------------------
# Toy Feistel permutation over n-bit labels
# ---------------------------------------------------------------------------

_MIX_A = 0x9E3779B97F4A7C15
_MIX_B = 0xBF58476D1CE4E5B9
_MIX_C = 0x94D049BB133111EB
_M64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    x = (x + _MIX_A) & _M64
    x = ((x ^ (x >> 30)) * _MIX_B) & _M64
    x = ((x ^ (x >> 27)) * _MIX_C) & _M64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class FeistelPermutation:
    """Keyed bijection on {0,1}^n: 4-round Feistel with a 64-bit mixer.

    Odd n uses an unbalanced ceil(n/2)/floor(n/2) split. NOT a secure PRP;
    see the module docstring.
    """

    n: int
    rounds: int
    round_keys: tuple

    def __post_init__(self):
        if self.rounds < 4 or self.rounds % 2:
            raise ValueError("need an even round count >= 4")
        if self.n < 1:
            raise ValueError("need n >= 1")
        object.__setattr__(self, "round_keys", tuple(int(k) for k in self.round_keys))
        if len(self.round_keys) != self.rounds:
            raise ValueError("need one key per round")

    @classmethod
    def from_seed(cls, n: int, seed, rounds: int = 4) -> "FeistelPermutation":
        keys = np.random.SeedSequence(seed).generate_state(rounds, dtype=np.uint64)
        return cls(n, rounds, tuple(int(k) for k in keys))

    def _widths(self):
        return (self.n + 1) // 2, self.n // 2

    def apply(self, x: int) -> int:
        if not 0 <= x < (1 << self.n):
            raise ValueError("input outside the domain")
        a, b = self._widths()
        left, right = x >> b, x & ((1 << b) - 1)
        for key in self.round_keys:
            f = _mix64(key ^ _mix64(right)) & ((1 << a) - 1)
            left, right = right, left ^ f
            a, b = b, a
        return (left << b) | right

    def invert(self, y: int) -> int:
        if not 0 <= y < (1 << self.n):
            raise ValueError("input outside the domain")
        a, b = self._widths()
        left, right = y >> b, y & ((1 << b) - 1)
        for key in reversed(self.round_keys):
            a, b = b, a
            f = _mix64(key ^ _mix64(left)) & ((1 << a) - 1)
            left, right = right ^ f, left
        return (left << b) | right

    def table(self) -> np.ndarray:
        return np.array([self.apply(x) for x in range(1 << self.n)], dtype=np.int64)


def sample_subset(n: int, k: int, seed) -> np.ndarray:
    """Images of 0..2^k-1 (zero-padded to n bits) under the seeded permutation."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    perm = FeistelPermutation.from_seed(n, seed)
    return np.array([perm.apply(t) for t in range(1 << k)], dtype=np.int64)


# ---------------------------------------------------------------------------
# Hypergraph sign polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypergraphPolynomial:
    """f(t) = sum_{e in E} prod_{j in e} t_j mod 2 on k index bits (0-indexed)."""

    k: int
    hyperedges: tuple

    def __post_init__(self):
        edges = []
        for e in self.hyperedges:
            e = tuple(sorted(set(int(v) for v in e)))
            if not e:
                raise ValueError("hyperedges must contain at least one variable")
            if e[0] < 0 or e[-1] >= self.k:
                raise ValueError("hyperedge variable out of range")
            edges.append(e)
        object.__setattr__(self, "hyperedges", tuple(sorted(set(edges))))

    def __call__(self, t: int) -> int:
        total = 0
        for e in self.hyperedges:
            prod = 1
            for v in e:
                prod &= (t >> v) & 1
                if not prod:
                    break
            total ^= prod
        return total


def sample_hypergraph(k: int, seed) -> HypergraphPolynomial:
    """Each of the 2^k - 1 nonempty hyperedges kept independently w.p. 1/2."""
    if k > 12:
        raise ValueError("hypergraph sampling enumerates all hyperedges; k <= 12")
    rng = np.random.default_rng(seed)
    edges = []
    for mask in range(1, 1 << k):
        if rng.integers(2):
            edges.append(tuple(j for j in range(k) if (mask >> j) & 1))
    return HypergraphPolynomial(k, tuple(edges))


# ---------------------------------------------------------------------------
# Specs and construction
# ---------------------------------------------------------------------------

FN_KINDS = ("truth_table", "kwise", "hypergraph")
SUBSET_KINDS = ("prefix_image_of_permutation", "explicit_list")


@dataclass(frozen=True)
class SubsetPhaseSpec:
    """Everything needed to rebuild one subset phase state deterministically."""

    n: int
    k: int
    fn_kind: str = "kwise"
    fn_seed: int = 0
    subset_kind: str = "prefix_image_of_permutation"
    subset_seed: int = 0
    fn_degree: int = 8
    hyperedges: tuple = None
    explicit_subset: tuple = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if self.fn_kind not in FN_KINDS:
            raise ValueError(f"fn_kind must be one of {FN_KINDS}")
        if self.subset_kind not in SUBSET_KINDS:
            raise ValueError(f"subset_kind must be one of {SUBSET_KINDS}")
        if self.hyperedges is not None:
            object.__setattr__(self, "hyperedges",
                               tuple(tuple(int(v) for v in e) for e in self.hyperedges))
        if self.explicit_subset is not None:
            object.__setattr__(self, "explicit_subset",
                               tuple(int(x) for x in self.explicit_subset))

    def subset(self) -> np.ndarray:
        if self.subset_kind == "explicit_list":
            if self.explicit_subset is None:
                raise ValueError("explicit_list subsets need explicit_subset")
            arr = np.array(self.explicit_subset, dtype=np.int64)
            if arr.shape[0] != 1 << self.k:
                raise ValueError(f"explicit subset must list exactly 2^{self.k} strings")
            if np.unique(arr).shape[0] != arr.shape[0]:
                raise ValueError("explicit subset contains duplicate strings")
            if arr.min() < 0 or arr.max() >= (1 << self.n):
                raise ValueError("subset string outside the n-bit domain")
            return arr
        return sample_subset(self.n, self.k, self.subset_seed)

    def sign_function(self):
        """Returns f as a callable on (index, bitstring) pairs."""
        if self.fn_kind == "truth_table":
            rng = np.random.default_rng(self.fn_seed)
            table = rng.integers(0, 2, size=1 << self.n)
            return lambda idx, x: int(table[x])
        if self.fn_kind == "kwise":
            kw = sample_kwise_function(self.k, self.fn_degree, self.fn_seed)
            return lambda idx, x: kw(idx)
        poly = (HypergraphPolynomial(self.k, self.hyperedges)
                if self.hyperedges is not None else sample_hypergraph(self.k, self.fn_seed))
        return lambda idx, x: poly(idx)

    def to_json(self) -> str:
        doc = {
            "n": self.n, "k": self.k,
            "fn_kind": self.fn_kind, "fn_seed": self.fn_seed,
            "subset_kind": self.subset_kind, "subset_seed": self.subset_seed,
            "fn_degree": self.fn_degree,
            "hyperedges": None if self.hyperedges is None else [list(e) for e in self.hyperedges],
            "explicit_subset": None if self.explicit_subset is None else list(self.explicit_subset),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SubsetPhaseSpec":
        doc = json.loads(text)
        return cls(
            n=int(doc["n"]), k=int(doc["k"]),
            fn_kind=doc["fn_kind"], fn_seed=int(doc["fn_seed"]),
            subset_kind=doc["subset_kind"], subset_seed=int(doc["subset_seed"]),
            fn_degree=int(doc.get("fn_degree", 8)),
            hyperedges=None if doc.get("hyperedges") is None
            else tuple(tuple(e) for e in doc["hyperedges"]),
            explicit_subset=None if doc.get("explicit_subset") is None
            else tuple(doc["explicit_subset"]),
        )


def build_subset_phase_state(spec: SubsetPhaseSpec) -> StateVector:
    """(1/sqrt|S|) sum_{x in S} (-1)^{f(x)} |x>; deterministic given the seeds."""
    if spec.n > 14:
        raise ValueError("subset phase construction limited to n <= 14")
    subset = spec.subset()
    f = spec.sign_function()
    amps = np.zeros(1 << spec.n, dtype=complex)
    scale = 1.0 / np.sqrt(subset.shape[0])
    for idx, x in enumerate(subset):
        amps[x] = -scale if f(idx, int(x)) else scale
    return StateVector(spec.n, amps)


def compile_hypergraph_circuit(poly: HypergraphPolynomial, n: int,
                               perm: FeistelPermutation) -> GateCircuit:
    """Circuit preparing the hypergraph subset phase state from |0...0>.

    Layout: H on the k index qubits, one C^{m-1}Z (or Z) per hyperedge,
    then the basis-permutation block carrying the embedded strings onto
    the subset. Variable j of the polynomial lives on qubit n-1-j, so the
    embedded index integers are exactly 0..2^k-1.
    """
    k = poly.k
    if k > n:
        raise ValueError("polynomial has more variables than qubits")
    if perm.n != n:
        raise ValueError("permutation domain must match the register size")
    gates = [NamedGate("h", (n - 1 - j,)) for j in range(k)]
    for e in poly.hyperedges:
        sites = tuple(sorted(n - 1 - j for j in e))
        if len(sites) == 1:
            gates.append(SingleQubitGate(sites[0], Z_MATRIX))
        else:
            gates.append(ControlledZGate(sites))
    gates.append(BasisPermutationGate(perm.table()))
    return GateCircuit(tuple(gates))


def hypergraph_spec_state(poly: HypergraphPolynomial, n: int,
                          perm: FeistelPermutation) -> StateVector:
    """Direct construction matching compile_hypergraph_circuit for cross-checks."""
    amps = np.zeros(1 << n, dtype=complex)
    scale = 1.0 / np.sqrt(1 << poly.k)
    for t in range(1 << poly.k):
        amps[perm.apply(t)] = -scale if poly(t) else scale
    return StateVector(n, amps)
