"""Symplectic Pauli-group algebra and the fast characteristic-spectrum transform.

A Pauli operator on ``n`` qubits is stored as mask pair ``(a, b)`` plus a
phase exponent ``e`` (a power of the imaginary unit):

    P = i^e * W(a, b),      W(a, b) = i^{|a & b|} X^a Z^b,

where ``X^a`` applies X on every qubit whose bit is set in ``a`` (bit
position ``n - 1 - j`` for qubit ``j``, matching :mod:`magiclab.states`),
and ``|a & b|`` is a popcount. ``W(a, b)`` is the Hermitian canonical
representative with eigenvalues +-1; ``e = 0`` selects it.

The characteristic spectrum of a pure state collects

    Xi(P) = tr^2(P psi) / d        over all 4^n Hermitian W(a, b),

a probability distribution. Spectrum entries are indexed ``(a << n) | b``:
Z-mask fastest, which makes each fixed-``a`` slice a length-2^n
Walsh-Hadamard transform of the correlation vector
``c_a(x) = conj(psi_{x XOR a}) psi_x`` and the whole spectrum an
O(n 4^n) computation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .states import StateVector

DEFAULT_MAX_QUBITS = 14
_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


def _max_qubits() -> int:
    return int(os.environ.get("MAGICLAB_MAX_QUBITS", DEFAULT_MAX_QUBITS))


def _default_workers() -> int:
    return max(1, int(os.environ.get("MAGICLAB_THREADS", "1")))


@dataclass(frozen=True)
class PauliOperator:
    """One element of the n-qubit Pauli group in symplectic encoding."""

    n: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        lim = 1 << self.n
        if not (0 <= self.x_mask < lim and 0 <= self.z_mask < lim):
            raise ValueError("mask out of range for the qubit count")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Parse e.g. 'XIZ', '-YY', 'iXZ'. Qubit 0 is the leftmost letter."""
        phase = 0
        body = label
        for prefix, e in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if body.startswith(prefix) and set(body[len(prefix):]) <= set("IXYZ"):
                phase, body = e, body[len(prefix):]
                break
        n = len(body)
        if n == 0 or not set(body) <= set("IXYZ"):
            raise ValueError(f"bad Pauli label {label!r}")
        a = b = 0
        for j, ch in enumerate(body):
            bit = 1 << (n - 1 - j)
            if ch in "XY":
                a |= bit
            if ch in "ZY":
                b |= bit
        return cls(n, a, b, phase)

    @property
    def label(self) -> str:
        letters = []
        for j in range(self.n):
            bit = 1 << (self.n - 1 - j)
            x, z = bool(self.x_mask & bit), bool(self.z_mask & bit)
            letters.append("IXZY"[x + 2 * z] if not (x and z) else "Y")
        prefix = ["", "i", "-", "-i"][self.phase_exp]
        return prefix + "".join(letters)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    def hermitian_representative(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x_mask, self.z_mask, 0)

    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def commutes_with(self, other: "PauliOperator") -> bool:
        s = (self.x_mask & other.z_mask).bit_count() + (self.z_mask & other.x_mask).bit_count()
        return s % 2 == 0

    def to_matrix(self) -> np.ndarray:
        if self.n > 12:
            raise ValueError("dense Pauli matrices limited to n <= 12")
        d = 1 << self.n
        x = np.arange(d)
        parity = np.bitwise_count(x & self.z_mask) & 1
        phase = _I_POWERS[((self.x_mask & self.z_mask).bit_count() + self.phase_exp) % 4]
        m = np.zeros((d, d), dtype=complex)
        m[x ^ self.x_mask, x] = phase * np.where(parity, -1.0, 1.0)
        return m


def pauli_multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Product p * q with exact phase bookkeeping in the W(a, b) encoding."""
    if p.n != q.n:
        raise ValueError("qubit count mismatch")
    a, b = p.x_mask, p.z_mask
    c, d = q.x_mask, q.z_mask
    # i^{|a&b|} X^a Z^b i^{|c&d|} X^c Z^d = i^{...} W(a^c, b^d)
    e = (
        p.phase_exp
        + q.phase_exp
        + (a & b).bit_count()
        + (c & d).bit_count()
        + 2 * (b & c).bit_count()
        - ((a ^ c) & (b ^ d)).bit_count()
    )
    return PauliOperator(p.n, a ^ c, b ^ d, e % 4)


def pauli_expectation(state: StateVector, p: PauliOperator) -> float:
    """tr(P psi) for a Hermitian representative P; a real number in [-1, 1]."""
    if p.n != state.n:
        raise ValueError(f"Pauli acts on {p.n} qubits but the state has {state.n}")
    if not p.is_hermitian:
        raise ValueError("expectation needs the Hermitian representative (even phase_exp)")
    state.require_normalized()
    d = state.dim
    x = np.arange(d)
    parity = np.bitwise_count(x & p.z_mask) & 1
    signs = 1.0 - 2.0 * parity
    s = np.sum(signs * state.amps.conj()[x ^ p.x_mask] * state.amps)
    phase = _I_POWERS[((p.x_mask & p.z_mask).bit_count() + p.phase_exp) % 4]
    return float((phase * s).real)


@dataclass(frozen=True)
class PauliSpectrum:
    """All 4^n squared normalized Pauli expectations of a pure state.

    ``values[(a << n) | b] = tr^2(W(a,b) psi) / d``; the entries form a
    probability distribution (identity entry 1/d for pure states)."""

    n: int
    values: np.ndarray
    purity: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.shape[0] != 1 << (2 * self.n):
            raise ValueError("spectrum must have 4^n entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def entry(self, p: PauliOperator) -> float:
        return float(self.values[(p.x_mask << self.n) | p.z_mask])

    def moment(self, alpha: float) -> float:
        """sum_P Xi(P)^alpha (zero entries skipped for non-integer alpha)."""
        v = self.values
        if alpha == 1.0:
            return float(v.sum())
        nz = v[v > 0.0]
        return float((nz ** alpha).sum())

    def support_size(self, tol: float = 1e-8) -> int:
        """Number of Paulis with |tr(P psi)| above tol."""
        # values store tr^2/d, so |tr| > tol  <=>  value > tol^2 / d
        return int((self.values > tol * tol / self.dim).sum())


def signed_expectations(state: StateVector) -> np.ndarray:
    """All 4^n signed values tr(W(a,b) psi), indexed like the spectrum.

    Same Walsh-Hadamard core as :func:`full_spectrum`, but keeps the real
    signed expectation instead of its square (needed by the convex-measure
    solvers, which work in the Pauli basis).
    """
    n = state.n
    if n > 8:
        raise ValueError("signed expectation table limited to n <= 8")
    state.require_normalized()
    d = state.dim
    amps = state.amps
    conj = amps.conj()
    x = np.arange(d)
    out = np.empty(d * d, dtype=float)
    for a in range(d):
        corr = conj[x ^ a] * amps
        w = _fwht_last_axis(corr.copy())
        phase = _I_POWERS[np.bitwise_count(x & a) % 4]  # i^{|a & b|} over all b
        out[a * d: (a + 1) * d] = (phase * w).real
    return out


def spectrum_index(x_mask: int, z_mask: int, n: int) -> int:
    return (x_mask << n) | z_mask


def index_to_masks(index: int, n: int):
    return index >> n, index & ((1 << n) - 1)


def _fwht_last_axis(a: np.ndarray) -> np.ndarray:
    """In-place Walsh-Hadamard transform along the last axis (length 2^m)."""
    m = a.shape[-1]
    h = 1
    while h < m:
        v = a.reshape(a.shape[:-1] + (m // (2 * h), 2, h))
        top = v[..., 0, :].copy()
        v[..., 0, :] += v[..., 1, :]
        v[..., 1, :] = top - v[..., 1, :]
        h *= 2
    return a


def full_spectrum(state: StateVector, workers: int | None = None) -> PauliSpectrum:
    """All 4^n spectrum entries via per-X-mask Walsh-Hadamard transforms.

    Cost O(n 4^n) time and O(4^n) memory. The X-mask slices are independent
    and may be split across ``workers`` threads; each slice writes its own
    preallocated block, so results are bit-identical for any worker count.
    """
    n = state.n
    cap = _max_qubits()
    if n > cap:
        need = (1 << (2 * n)) * 8
        raise ValueError(
            f"full_spectrum at n={n} needs a 4^n float array (~{need / 1e9:.1f} GB); "
            f"the configured maximum is n={cap} (MAGICLAB_MAX_QUBITS overrides)"
        )
    state.require_normalized()
    d = state.dim
    amps = state.amps
    conj = amps.conj()
    nsq = float(np.real(np.vdot(amps, amps)))
    scale = 1.0 / (d * nsq * nsq)
    values = np.empty(d * d, dtype=float)
    x = np.arange(d)

    # chunk size: keep the complex work array around 2^22 entries
    rows = max(1, min(d, (1 << 22) // d))
    starts = list(range(0, d, rows))

    def fill(a0: int) -> None:
        a1 = min(a0 + rows, d)
        a = np.arange(a0, a1)
        corr = conj[a[:, None] ^ x[None, :]] * amps[None, :]
        w = _fwht_last_axis(corr)
        block = w.real
        block *= block
        im = w.imag
        im *= im
        block += im
        block *= scale
        values[a0 * d: a1 * d] = block.reshape(-1)

    nworkers = _default_workers() if workers is None else max(1, int(workers))
    if nworkers == 1 or len(starts) == 1:
        for a0 in starts:
            fill(a0)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            list(pool.map(fill, starts))
    return PauliSpectrum(n, values, 1.0)
