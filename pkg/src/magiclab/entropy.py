"""Stabilizer Renyi entropies, the swap-trick moment, stabilizer groups/nullity,
and the continuity (Fannes-type) bounds. All values are in bits.

For a pure state the characteristic distribution Xi assigns tr^2(P psi)/d to
each Hermitian Pauli; the alpha-stabilizer entropy is

    M_alpha = S_alpha(Xi) + S_2(psi) - log2(d),

with S_2(psi) = -log2 purity = 0 for pure inputs. M_alpha vanishes exactly on
stabilizer states, is Clifford-invariant, additive under tensor products, and
non-increasing in alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliOperator, PauliSpectrum, full_spectrum, pauli_expectation
from .states import StateVector

M0_DEFAULT_TOL = 1e-8
GROUP_DEFAULT_TOL = 1e-6
SHANNON_FLOOR = 1e-15


@dataclass(frozen=True)
class EntropyReport:
    """One stabilizer-entropy evaluation."""

    alpha: float
    value: float
    support_size: int | None = None
    purity: float = 1.0

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "value": self.value,
                "support_size": self.support_size, "purity": self.purity}


@dataclass(frozen=True)
class StabilizerGroupReport:
    """Group of Paulis with unit-magnitude expectation, and the nullity."""

    n: int
    generators: tuple
    order: int
    nullity: int


def _spectrum_for(state: StateVector, spectrum: PauliSpectrum | None) -> PauliSpectrum:
    if spectrum is None:
        return full_spectrum(state)
    if state is not None and spectrum.n != state.n:
        raise ValueError("precomputed spectrum does not match the state")
    return spectrum


def entropy_from_spectrum(spectrum: PauliSpectrum, alpha: float,
                          m0_tol: float = M0_DEFAULT_TOL) -> EntropyReport:
    """M_alpha from a precomputed spectrum (the batch-friendly entry point)."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    n = spectrum.n
    offset = float(np.log2(spectrum.purity))  # -S_2(psi); zero for pure states
    if alpha == 0:
        support = spectrum.support_size(m0_tol)
        value = float(np.log2(support)) - n - offset
        return EntropyReport(0.0, value, support_size=support, purity=spectrum.purity)
    if alpha == 1:
        v = spectrum.values
        nz = v[v > SHANNON_FLOOR]
        shannon = float(-(nz * np.log2(nz)).sum())
        return EntropyReport(1.0, shannon - n - offset, purity=spectrum.purity)
    if abs(alpha - 1.0) < 1e-9:
        raise ValueError("alpha within 1e-9 of 1: use alpha=1, which takes the Shannon path")
    renyi = float(np.log2(spectrum.moment(alpha)) / (1.0 - alpha))
    return EntropyReport(float(alpha), renyi - n - offset, purity=spectrum.purity)


def stabilizer_entropy(state: StateVector, alpha: float,
                       spectrum: PauliSpectrum | None = None) -> EntropyReport:
    """M_alpha of a normalized pure state."""
    return entropy_from_spectrum(_spectrum_for(state, spectrum), alpha)


def m0_support(state: StateVector, tol: float = M0_DEFAULT_TOL,
               spectrum: PauliSpectrum | None = None) -> EntropyReport:
    """M_0: log2 of the Pauli support size minus n.

    The support count depends on the tolerance; nonzero subset-phase
    expectations are >= 1/|S| by construction, far above the default.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return entropy_from_spectrum(_spectrum_for(state, spectrum), 0.0, m0_tol=tol)


def swap_trick_value(state: StateVector, alpha: int,
                     spectrum: PauliSpectrum | None = None) -> float:
    """The 2*alpha-copy moment d^{-1} sum_P tr^{2 alpha}(P psi) = 2^{(1-alpha) M_alpha}.

    Computed from the spectrum, never by forming psi^{(x) 2 alpha}:
    tr^{2 alpha} = (d Xi)^alpha, so the moment is d^{alpha-1} sum Xi^alpha.
    """
    if int(alpha) != alpha or alpha < 2:
        raise ValueError("the swap-trick operator form needs integer alpha >= 2")
    spec = _spectrum_for(state, spectrum)
    d = spec.dim
    return float(d ** (alpha - 1) * spec.moment(float(alpha)))


def stabilizer_group(state: StateVector, tol: float = GROUP_DEFAULT_TOL,
                     spectrum: PauliSpectrum | None = None) -> StabilizerGroupReport:
    """Paulis with |tr(P psi)| > 1 - tol, verified to form a commuting group."""
    spec = _spectrum_for(state, spectrum)
    n = spec.n
    d = spec.dim
    cutoff = (1.0 - tol) ** 2 / d
    idx = np.nonzero(spec.values > cutoff)[0]
    members = [(int(i) >> n, int(i) & (d - 1)) for i in idx]
    mset = set(members)
    for (a1, b1) in members:
        for (a2, b2) in members:
            if (a1 ^ a2, b1 ^ b2) not in mset:
                raise ValueError("collected unit-expectation set is not closed; "
                                 "the state is numerically inconsistent")
            if ((a1 & b2).bit_count() + (b1 & a2).bit_count()) % 2:
                raise ValueError("collected unit-expectation set does not commute; "
                                 "the state is numerically inconsistent")
    order = len(members)
    if order & (order - 1):
        raise ValueError("unit-expectation set size is not a power of two")
    # GF(2) basis of the (a, b) vectors, excluding the identity
    by_leading_bit = {}
    for (a, b) in members:
        v = (a << n) | b
        while v:
            top = v.bit_length() - 1
            if top not in by_leading_bit:
                by_leading_bit[top] = v
                break
            v ^= by_leading_bit[top]
    generators = []
    for v in sorted(by_leading_bit.values()):
        a, b = v >> n, v & (d - 1)
        sign = pauli_expectation(state, PauliOperator(n, a, b)) if state is not None else 1.0
        generators.append(PauliOperator(n, a, b, 0 if sign > 0 else 2))
    nullity = n - order.bit_length() + 1
    return StabilizerGroupReport(n, tuple(generators), order, nullity)


def binary_entropy(t: float) -> float:
    """H_bin in bits, with 0 log 0 = 0."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("binary entropy needs t in [0, 1]")
    if t in (0.0, 1.0):
        return 0.0
    return float(-t * np.log2(t) - (1.0 - t) * np.log2(1.0 - t))


def fannes_rhs(td: float, n: int, alpha: float) -> float:
    """Continuity bound on |M_alpha(psi) - M_alpha(phi)| at trace distance td.

    alpha = 1:  td log2(d^2 - 1) + H_bin(td) for td <= 1/2, else + 1.
    alpha > 1:  d^2 alpha / (alpha - 1) * td.
    """
    if not 0.0 <= td <= 2.0:
        raise ValueError("pure-state trace distance lies in [0, 2]")
    d = 1 << n
    if alpha == 1:
        base = td * float(np.log2(d * d - 1))
        return base + (binary_entropy(td) if td <= 0.5 else 1.0)
    if alpha > 1:
        return float(d * d * alpha / (alpha - 1.0) * td)
    raise ValueError("the continuity bound covers alpha = 1 and alpha > 1")
