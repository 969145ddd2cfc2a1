"""Convex magic monotones over an exhaustively enumerated stabilizer dictionary.

Implements, for n <= 4 qubits (extent n <= 3 by default):

- exact enumeration of all pure stabilizer states via the affine-subspace
  canonical form  (1/sqrt|A|) sum_{t} i^{l(t)} (-1)^{q(t)} |R t + s>,
- robustness: the l1-minimal signed mixture of stabilizer projectors (an LP
  in the Pauli basis),
- stabilizer fidelity: the maximal squared overlap,
- stabilizer extent: the l1-minimal stabilizer superposition (a complex l1
  program solved by phase discretization with dual-guided refinement),
- the max-relative entropy for pure states (equal to the extent),
- the explicit closed-form robustness certificate for subset phase states,
  which needs no LP and scales to every supported n.

All reported values are log2 of the conventional quantities, i.e. bits;
every measure vanishes exactly on catalog members.

The LP solver is a self-contained dense two-phase simplex with Bland's
rule: deterministic, no external dependencies, comfortably fast at
catalog sizes up to n = 3 (1080 states). n = 4 (36720 states) works but
is gated behind ``allow_large`` with a runtime warning.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .pauli import signed_expectations
from .states import StateVector
from .subset_phase import SubsetPhaseSpec, build_subset_phase_state

_I_POW = np.array([1.0, 1.0j, -1.0, -1.0j])


def expected_catalog_size(n: int) -> int:
    """2^n * prod_{k=1..n} (2^k + 1): 6, 60, 1080, 36720 for n = 1..4."""
    total = 1 << n
    for k in range(1, n + 1):
        total *= (1 << k) + 1
    return total


@dataclass(frozen=True)
class StabilizerCatalog:
    """All pure n-qubit stabilizer states, one row per state."""

    n: int
    states: np.ndarray  # [count, 2^n] complex

    def __post_init__(self):
        st = np.asarray(self.states, dtype=complex)
        st.flags.writeable = False
        object.__setattr__(self, "states", st)

    @property
    def count(self) -> int:
        return self.states.shape[0]

    def state(self, i: int) -> StateVector:
        return StateVector(self.n, self.states[i])


def _rref_row_spaces(n: int, k: int):
    """All k-dimensional subspaces of GF(2)^n as reduced-echelon row sets.

    Rows are integers in the state-index bit convention (column c at bit
    n-1-c). Yields (rows, pivot_columns)."""
    if k == 0:
        yield [], ()
        return
    for pivots in combinations(range(n), k):
        free_slots = []
        for j, cj in enumerate(pivots):
            for c in range(cj + 1, n):
                if c not in pivots:
                    free_slots.append((j, c))
        for pattern in range(1 << len(free_slots)):
            rows = [1 << (n - 1 - cj) for cj in pivots]
            for idx, (j, c) in enumerate(free_slots):
                if (pattern >> idx) & 1:
                    rows[j] |= 1 << (n - 1 - c)
            yield rows, pivots


def _phase_exponents(k: int) -> np.ndarray:
    """Exponent of i for every (linear Z4, quadratic) phase pair, per t.

    Returns an int8 array [4^k * 2^(k(k-1)/2), 2^k]."""
    tt = np.arange(1 << k)
    tbits = ((tt[:, None] >> np.arange(k)[None, :]) & 1).astype(np.int8)  # [2^k, k]
    pairs = list(combinations(range(k), 2))
    lin_choices = np.array(np.meshgrid(*([range(4)] * k), indexing="ij"),
                           dtype=np.int8).reshape(k, -1).T if k else np.zeros((1, 0), np.int8)
    quad_choices = np.arange(1 << len(pairs))
    out = np.empty((lin_choices.shape[0] * quad_choices.shape[0], 1 << k), dtype=np.int8)
    row = 0
    for d in lin_choices:
        lin = (tbits @ d.astype(np.int64)) % 4  # [2^k]
        for qmask in quad_choices:
            quad = np.zeros(1 << k, dtype=np.int64)
            for idx, (a, b) in enumerate(pairs):
                if (qmask >> idx) & 1:
                    quad += tbits[:, a].astype(np.int64) * tbits[:, b]
            out[row] = (lin + 2 * quad) % 4
            row += 1
    return out


def enumerate_stabilizers(n: int, cache_dir=None) -> StabilizerCatalog:
    """Exhaustive catalog of pure stabilizer states for n <= 4."""
    if n > 4:
        raise ValueError("stabilizer enumeration supported for n <= 4 only")
    if cache_dir is not None:
        path = os.path.join(cache_dir, f"stabilizer_catalog_n{n}.bin")
        if os.path.exists(path):
            return load_catalog(path)
    d = 1 << n
    blocks = []
    for k in range(n + 1):
        exps = _phase_exponents(k)
        amp_block = _I_POW[exps] / np.sqrt(1 << k)  # [phase combos, 2^k]
        for rows, pivots in _rref_row_spaces(n, k):
            elements = np.zeros(1 << k, dtype=np.int64)
            for t in range(1 << k):
                x = 0
                for j in range(k):
                    if (t >> j) & 1:
                        x ^= rows[j]
                elements[t] = x
            pivot_mask = 0
            for c in pivots:
                pivot_mask |= 1 << (n - 1 - c)
            free_cols = [c for c in range(n) if c not in pivots]
            for smask in range(1 << len(free_cols)):
                s = 0
                for idx, c in enumerate(free_cols):
                    if (smask >> idx) & 1:
                        s |= 1 << (n - 1 - c)
                block = np.zeros((amp_block.shape[0], d), dtype=complex)
                block[:, elements ^ s] = amp_block
                blocks.append(block)
    states = np.vstack(blocks)
    assert states.shape[0] == expected_catalog_size(n)
    catalog = StabilizerCatalog(n, states)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        save_catalog(catalog, path)
    return catalog


_CATALOG_MAGIC = b"MLCATLG1"


def save_catalog(catalog: StabilizerCatalog, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_CATALOG_MAGIC)
        fh.write(struct.pack("<HI", catalog.n, catalog.count))
        fh.write(catalog.states.astype("<c16").tobytes())


def load_catalog(path) -> StabilizerCatalog:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != _CATALOG_MAGIC:
        raise ValueError("not a catalog cache file")
    n, count = struct.unpack("<HI", blob[8:14])
    states = np.frombuffer(blob[14:], dtype="<c16").reshape(count, 1 << n)
    return StabilizerCatalog(n, states.astype(complex))


# ---------------------------------------------------------------------------
# Dense two-phase simplex with Bland's rule
# ---------------------------------------------------------------------------


class SimplexError(RuntimeError):
    pass


def _simplex_core(A, b, cost, basis, tol=1e-9, max_iter=200_000):
    m = A.shape[0]
    basis = list(basis)
    for _ in range(max_iter):
        B = A[:, basis]
        xb = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, cost[basis])
        reduced = cost - y @ A
        reduced[basis] = 0.0
        candidates = np.nonzero(reduced < -tol)[0]
        entering = int(candidates[0]) if candidates.size else -1  # Bland: smallest index
        if entering < 0:
            x = np.zeros(A.shape[1])
            x[basis] = xb
            return x, basis, y
        direction = np.linalg.solve(B, A[:, entering])
        rows = np.nonzero(direction > tol)[0]
        if rows.size == 0:
            raise SimplexError("unbounded LP")
        ratios = xb[rows] / direction[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        leave_row = min(ties, key=lambda r: basis[r])  # Bland tie-break
        basis[leave_row] = entering
    raise SimplexError("simplex iteration limit reached")


def simplex_min(A: np.ndarray, b: np.ndarray, cost: np.ndarray,
                tol: float = 1e-9):
    """min cost.x subject to A x = b, x >= 0. Returns (x, objective, duals)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, ncols = A.shape
    flip = b < 0
    row_sign = np.where(flip, -1.0, 1.0)
    A = A.copy()
    A[flip] *= -1.0
    b[flip] *= -1.0
    full = np.hstack([A, np.eye(m)])
    cost1 = np.concatenate([np.zeros(ncols), np.ones(m)])
    basis = list(range(ncols, ncols + m))
    x1, basis, _ = _simplex_core(full, b, cost1, basis)
    if x1[ncols:].sum() > 1e-7:
        raise SimplexError("infeasible LP")
    # pivot leftover artificials out of the basis; drop rows that are redundant
    keep_rows = list(range(m))
    for row, var in enumerate(list(basis)):
        if var < ncols:
            continue
        B = full[:, basis]
        tableau_row = np.linalg.solve(B, full[:, :ncols])[row]
        pivots = np.nonzero(np.abs(tableau_row) > 1e-7)[0]
        pivots = [int(j) for j in pivots if j not in basis]
        if pivots:
            basis[row] = pivots[0]
        else:
            keep_rows.remove(row)
    if len(keep_rows) < m:
        rows = np.array(keep_rows)
        full = full[rows][:, :ncols]
        b = b[rows]
        basis = [basis[r] for r in keep_rows]
        full_phase2 = full
    else:
        full_phase2 = full[:, :ncols]
    cost2 = np.asarray(cost, dtype=float)
    x, basis, y = _simplex_core(full_phase2, b, cost2, basis)
    if len(keep_rows) == m:
        y = y * row_sign  # undo the phase-1 row flips in the duals
    return x, float(cost2 @ x), y


# ---------------------------------------------------------------------------
# Certificates and measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexCertificate:
    """Result of one convex-measure evaluation, with its decomposition."""

    measure: str
    value_bits: float
    coefficients: dict | None
    residual: float
    lower_bound_bits: float | None = None
    terms: tuple | None = None


def _check_catalog(state: StateVector, catalog: StabilizerCatalog) -> None:
    if catalog.n != state.n:
        raise ValueError("catalog qubit count does not match the state")


def _warn_large(n: int, allow_large: bool, what: str) -> None:
    if n >= 4 and not allow_large:
        raise ValueError(
            f"{what} at n=4 runs a simplex over {expected_catalog_size(4)} columns "
            "and can take minutes; pass allow_large=True to proceed")


def robustness_lp(state: StateVector, catalog: StabilizerCatalog,
                  allow_large: bool = False) -> ConvexCertificate:
    """log2 of the minimal l1 norm over signed stabilizer-projector mixtures.

    Solved as an LP in the real Pauli basis: 4^n equality rows
    tr(P sum_i c_i sigma_i) = tr(P psi), split c = u - v with u, v >= 0.
    """
    _check_catalog(state, catalog)
    _warn_large(state.n, allow_large, "robustness_lp")
    state.require_normalized()
    n = state.n
    b = signed_expectations(state)
    A = np.empty((b.shape[0], catalog.count))
    for i in range(catalog.count):
        A[:, i] = signed_expectations(catalog.state(i))
    big = np.hstack([A, -A])
    cost = np.ones(2 * catalog.count)
    x, objective, _ = simplex_min(big, b, cost)
    coeff = x[: catalog.count] - x[catalog.count:]
    nz = np.nonzero(np.abs(coeff) > 1e-12)[0]
    # reconstruction residual in max-norm against |psi><psi|
    target = np.outer(state.amps, state.amps.conj())
    recon = np.zeros_like(target)
    for i in nz:
        v = catalog.states[i]
        recon += coeff[i] * np.outer(v, v.conj())
    residual = float(np.max(np.abs(recon - target)))
    return ConvexCertificate(
        measure="robustness",
        value_bits=float(np.log2(objective)),
        coefficients={int(i): complex(coeff[i]) for i in nz},
        residual=residual,
    )


def stabilizer_fidelity(state: StateVector, catalog: StabilizerCatalog) -> float:
    """-log2 of the maximal squared overlap with a stabilizer state (bits)."""
    _check_catalog(state, catalog)
    state.require_normalized()
    overlaps = np.abs(catalog.states.conj() @ state.amps) ** 2
    return float(-np.log2(overlaps.max()))


class ExtentConvergenceError(RuntimeError):
    def __init__(self, upper_bits, lower_bits):
        super().__init__(
            f"extent refinement did not certify the target gap: "
            f"bounds [{lower_bits:.6f}, {upper_bits:.6f}] bits")
        self.upper_bits = upper_bits
        self.lower_bits = lower_bits


def stabilizer_extent(state: StateVector, catalog: StabilizerCatalog,
                      rel_tol: float = 1e-3, rounds: int = 3,
                      sectors: int = 16,
                      allow_large: bool = False) -> ConvexCertificate:
    """log2 min (sum |c|)^2 over stabilizer superpositions psi = sum c_phi |phi>.

    The complex l1 program is relaxed onto a fan of phase directions per
    catalog state (``sectors`` uniform directions to start), then refined:
    each round re-solves with an extra direction per state aligned with the
    current dual certificate. The dual also certifies a lower bound; the
    loop stops once the bracket is within ``rel_tol`` relative width.
    """
    _check_catalog(state, catalog)
    _warn_large(state.n, allow_large, "stabilizer_extent")
    state.require_normalized()
    d = state.dim
    # fix the global phase: largest amplitude made real positive
    pivot = int(np.argmax(np.abs(state.amps)))
    target = state.amps * np.exp(-1j * np.angle(state.amps[pivot]))
    b = np.concatenate([target.real, target.imag])

    count = catalog.count
    base_dirs = np.exp(2j * np.pi * np.arange(sectors) / sectors)
    # columns tracked as (state index, direction phase)
    col_state = list(np.repeat(np.arange(count), sectors))
    col_dir = list(np.tile(base_dirs, count))

    def build_matrix():
        vec = catalog.states[col_state] * np.asarray(col_dir)[:, None]
        return np.vstack([vec.real.T, vec.imag.T])

    upper = lower = None
    solution = None
    for _ in range(max(1, rounds) + 1):  # initial solve + `rounds` refinements
        A = build_matrix()
        cost = np.ones(A.shape[1])
        x, objective, y = simplex_min(A, b, cost)
        dual = y[:d] + 1j * y[d:] if y.shape[0] == 2 * d else None
        if dual is None:
            # redundant rows were dropped; recover the dual by re-solving
            raise SimplexError("extent LP lost rows; target inconsistent")
        g = catalog.states @ dual.conj()
        maxg = float(np.abs(g).max())
        # fold the relaxed solution back to complex coefficients
        coeffs = {}
        for w, si, u in zip(x, col_state, col_dir):
            if w > 1e-13:
                coeffs[int(si)] = coeffs.get(int(si), 0.0) + w * u
        achieved = float(sum(abs(c) for c in coeffs.values()))
        upper = achieved if upper is None else min(upper, achieved)
        lb = objective / max(maxg, 1.0)
        lower = lb if lower is None else max(lower, lb)
        solution = coeffs
        if upper <= lower * (1.0 + rel_tol):
            break
        # dual-guided refinement: new directions per violating state, centered
        # on the phase the dual certificate points at
        viol = np.nonzero(np.abs(g) > 1.0 + 1e-12)[0]
        if viol.size == 0:
            break
        phases = np.conj(g[viol] / np.abs(g[viol]))
        for offset in (0.0, np.pi / (4 * sectors), -np.pi / (4 * sectors)):
            col_state.extend(int(i) for i in viol)
            col_dir.extend(phases * np.exp(1j * offset))
    if upper > lower * (1.0 + rel_tol):
        raise ExtentConvergenceError(2 * np.log2(upper), 2 * np.log2(lower))
    recon = np.zeros(d, dtype=complex)
    for i, c in solution.items():
        recon += c * catalog.states[i]
    residual = float(np.max(np.abs(recon - target)))
    return ConvexCertificate(
        measure="extent",
        value_bits=float(2 * np.log2(upper)),
        coefficients={i: complex(c) for i, c in solution.items()},
        residual=residual,
        lower_bound_bits=float(2 * np.log2(lower)),
    )


def dmax_pure(state: StateVector, catalog: StabilizerCatalog,
              allow_large: bool = False) -> float:
    """Max-relative entropy of magic for pure states: equals the extent."""
    return stabilizer_extent(state, catalog, allow_large=allow_large).value_bits


def robustness_certificate_subset_phase(spec: SubsetPhaseSpec) -> ConvexCertificate:
    """Closed-form robustness decomposition of a subset phase state.

    |psi><psi| = (1/|S|) sum_i |x_i><x_i|
               + (1/|S|) sum_{i<j} s_ij (sigma+_ij - sigma-_ij),

    with sigma+-_ij the projectors onto (|x_i> +- |x_j>)/sqrt(2) and
    s_ij = sign(a_i) sign(a_j). Total l1 weight is exactly |S|, an upper
    bound on the robustness; needs no catalog and no LP.
    """
    state = build_subset_phase_state(spec)
    support = np.nonzero(np.abs(state.amps) > 0)[0]
    size = support.shape[0]
    signs = np.sign(state.amps[support].real).astype(int)
    terms = [("basis", int(x), int(x), 1.0 / size) for x in support]
    for i in range(size):
        for j in range(i + 1, size):
            s = float(signs[i] * signs[j]) / size
            terms.append(("pair+", int(support[i]), int(support[j]), s))
            terms.append(("pair-", int(support[i]), int(support[j]), -s))
    weight = sum(abs(t[3]) for t in terms)
    # reconstruction residual on the support block (zero off-support by construction);
    # sigma+- = (|xi><xi| + |xj><xj| +- (|xi><xj| + h.c.)) / 2
    amps_s = state.amps[support]
    target = np.outer(amps_s, amps_s.conj())
    lookup = {int(x): i for i, x in enumerate(support)}
    recon = np.zeros((size, size), dtype=complex)
    for kind, xi, xj, w in terms:
        i, j = lookup[xi], lookup[xj]
        if kind == "basis":
            recon[i, i] += w
        else:
            cross = 1.0 if kind == "pair+" else -1.0
            recon[i, i] += w * 0.5
            recon[j, j] += w * 0.5
            recon[i, j] += w * cross * 0.5
            recon[j, i] += w * cross * 0.5
    residual = float(np.max(np.abs(recon - target)))
    return ConvexCertificate(
        measure="robustness",
        value_bits=float(np.log2(weight)),
        coefficients=None,
        residual=residual,
        terms=tuple(terms),
    )
