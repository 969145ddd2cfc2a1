"""Reproducible experiment harnesses with replayable manifests.

Every experiment is a pure function of its manifest: per-sample randomness
comes from hashed streams seed(i) = SeedSequence(master_seed, spawn_key=(i,)),
so re-running a manifest reproduces every row byte-for-byte, with any worker
count. Analytic-bound comparisons are recorded as soft pass/fail checks in
the table; the acceptance suite re-asserts them hard at its pinned
parameter points.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .convex import StabilizerCatalog, stabilizer_fidelity
from .entropy import entropy_from_spectrum, stabilizer_entropy, swap_trick_value
from .pauli import full_spectrum
from .states import (
    CutSpec,
    GateCircuit,
    SingleQubitGate,
    StateVector,
    apply_circuit,
    entanglement_entropy,
    haar_sample,
    haar_unitary,
    random_clifford_circuit,
)
from .subset_phase import SubsetPhaseSpec, build_subset_phase_state


def sample_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent per-sample RNG stream: hash of (master_seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


@dataclass(frozen=True)
class ExperimentManifest:
    """Everything needed to replay one experiment run bit-for-bit."""

    experiment_name: str
    master_seed: int
    params: dict
    code_version: str = __version__

    def to_json(self) -> str:
        return json.dumps({
            "experiment_name": self.experiment_name,
            "master_seed": self.master_seed,
            "params": self.params,
            "code_version": self.code_version,
        }, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        doc = json.loads(text)
        return cls(doc["experiment_name"], int(doc["master_seed"]),
                   dict(doc["params"]), doc.get("code_version", __version__))


@dataclass
class BoundCheck:
    """One soft analytic-bound comparison recorded with the results."""

    name: str
    passed: bool
    observed: float
    bound: float

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "observed": self.observed, "bound": self.bound}


@dataclass
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def add(self, *cells) -> None:
        if len(cells) != len(self.columns):
            raise ValueError("row width does not match the schema")
        self.rows.append(tuple(_plain(c) for c in cells))

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def summary(self) -> dict:
        out = {}
        for i, name in enumerate(self.columns):
            vals = [r[i] for r in self.rows]
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                arr = np.asarray(vals, dtype=float)
                stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
                out[name] = {"mean": float(arr.mean()), "stderr": stderr,
                             "min": float(arr.min()), "max": float(arr.max())}
        return out

    def all_checks_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")  # RFC 4180
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell_text(c) for c in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "summary": self.summary(),
            "checks": [c.to_dict() for c in self.checks],
        }, sort_keys=True, indent=2)


def _plain(c):
    if isinstance(c, (np.floating,)):
        return float(c)
    if isinstance(c, (np.integer,)):
        return int(c)
    return c


def _cell_text(c):
    return repr(c) if isinstance(c, float) else str(c)


def _indexed_map(count: int, fn, workers: int = 1) -> list:
    """fn(i) for i in range(count), order-stable for any worker count."""
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _mean_stderr(arr) -> tuple:
    arr = np.asarray(arr, dtype=float)
    if arr.size < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


# ---------------------------------------------------------------------------
# Haar baseline
# ---------------------------------------------------------------------------


def haar_baseline(n: int, samples: int, alpha_list, seed: int,
                  workers: int = 1):
    """Stabilizer entropies of Haar samples vs the known average/typicality floors."""
    if n > 12:
        raise ValueError("haar_baseline limited to n <= 12")
    alphas = [float(a) for a in alpha_list]
    manifest = ExperimentManifest("haar_baseline", seed, {
        "n": n, "samples": samples, "alpha_list": alphas})
    cols = ("sample",) + tuple(f"M{_alpha_tag(a)}" for a in alphas)
    table = ResultTable(cols)

    def one(i):
        st = haar_sample(n, np.random.SeedSequence(seed, spawn_key=(i,)))
        spec = full_spectrum(st)
        return [entropy_from_spectrum(spec, a).value for a in alphas]

    for i, vals in enumerate(_indexed_map(samples, one, workers)):
        table.add(i, *vals)

    for a in alphas:
        col = table.column(f"M{_alpha_tag(a)}")
        if a == 2.0:
            table.checks.append(BoundCheck(
                "mean M2 >= n - 2 - 0.2", float(col.mean()) >= n - 2 - 0.2,
                float(col.mean()), n - 2 - 0.2))
        elif a >= 3 and a == int(a):
            bound = n / (a - 1) - 0.2
            table.checks.append(BoundCheck(
                f"mean M{int(a)} >= n/(alpha-1) - 0.2", float(col.mean()) >= bound,
                float(col.mean()), bound))
        if a >= 2 and a == int(a):
            # Levy typicality floor at beta = 1/4
            floor = n / (4 * a) if int(a) % 2 == 0 else n / (4 * (a - 1))
            table.checks.append(BoundCheck(
                f"min M{int(a)} >= beta-floor", float(col.min()) >= floor,
                float(col.min()), floor))
    return manifest, table


def _alpha_tag(a: float) -> str:
    return str(int(a)) if float(a).is_integer() else str(a).replace(".", "p")


# ---------------------------------------------------------------------------
# Random phase states over the full domain
# ---------------------------------------------------------------------------


def phase_state_average(n: int, samples: int, seed: int, workers: int = 1):
    """Mean of 2^{-M2} for uniform truth-table phase states vs the 20/2^n bound."""
    if n < 4:
        raise ValueError("degenerate below n = 4; use n >= 4")
    if n > 10:
        raise ValueError("phase_state_average limited to n <= 10")
    manifest = ExperimentManifest("phase_state_average", seed, {"n": n, "samples": samples})
    table = ResultTable(("sample", "M2", "pow2_neg_M2"))

    def one(i):
        stream = sample_stream(seed, i)
        spec = SubsetPhaseSpec(n=n, k=n, fn_kind="truth_table",
                               fn_seed=int(stream.integers(1 << 63)))
        st = build_subset_phase_state(spec)
        m2 = stabilizer_entropy(st, 2).value
        return m2, 2.0 ** (-m2)

    for i, (m2, z) in enumerate(_indexed_map(samples, one, workers)):
        table.add(i, m2, z)

    mean, stderr = _mean_stderr(table.column("pow2_neg_M2"))
    bound = 20.0 / (1 << n) + 3.0 * stderr
    table.checks.append(BoundCheck("mean 2^-M2 <= 20/2^n + 3 stderr",
                                   mean <= bound, mean, bound))
    return manifest, table


# ---------------------------------------------------------------------------
# Subset-phase tightness
# ---------------------------------------------------------------------------


def subset_tightness(n: int, k_list, samples: int, seed: int, workers: int = 1):
    """M0 <= 2k always; M2 concentrated at Theta(k) for 8-wise independent signs."""
    manifest = ExperimentManifest("subset_tightness", seed, {
        "n": n, "k_list": [int(k) for k in k_list], "samples": samples})
    table = ResultTable(("k", "sample", "M0", "M2"))

    jobs = [(int(k), i) for k in k_list for i in range(samples)]

    def one(j):
        k, i = jobs[j]
        stream = sample_stream(seed, j)
        spec = SubsetPhaseSpec(
            n=n, k=k, fn_kind="kwise", fn_degree=8,
            fn_seed=int(stream.integers(1 << 63)),
            subset_seed=int(stream.integers(1 << 63)))
        st = build_subset_phase_state(spec)
        sp = full_spectrum(st)
        return (entropy_from_spectrum(sp, 0).value, entropy_from_spectrum(sp, 2).value)

    for j, (m0, m2) in enumerate(_indexed_map(len(jobs), one, workers)):
        k, i = jobs[j]
        table.add(k, i, m0, m2)

    m0_col = table.column("M0")
    k_col = table.column("k")
    m2_col = table.column("M2")
    table.checks.append(BoundCheck("M0 <= 2k always",
                                   bool(np.all(m0_col <= 2 * k_col + 1e-9)),
                                   float((m0_col - 2 * k_col).max()), 0.0))
    for k in sorted(set(int(v) for v in k_list)):
        sel = k_col == k
        frac = float(np.mean(m2_col[sel] <= k / 4.0))
        table.checks.append(BoundCheck(
            f"k={k}: Pr[M2 <= k/4] <= 2^-k/4", frac <= 2.0 ** (-k / 4.0),
            frac, 2.0 ** (-k / 4.0)))
        med = float(np.median(m2_col[sel] / k))
        table.checks.append(BoundCheck(
            f"k={k}: median M2/k in [1/4, 2]", 0.25 <= med <= 2.0, med, 2.0))
    return manifest, table


# ---------------------------------------------------------------------------
# Hadamard-test distinguisher gap
# ---------------------------------------------------------------------------


def distinguisher_gap(n: int, k: int, alpha: int, samples: int, seed: int,
                      workers: int = 1):
    """Acceptance probability (1 + tr Pi psi^{2a})/2 for subset vs Haar ensembles.

    The interference-test route needs the Hermitian-unitary form of the
    moment operator, which exists for odd alpha only.
    """
    if alpha % 2 == 0 or alpha < 3:
        raise ValueError("the interference-test route needs odd alpha >= 3")
    manifest = ExperimentManifest("distinguisher_gap", seed, {
        "n": n, "k": k, "alpha": alpha, "samples": samples})
    table = ResultTable(("ensemble", "sample", "moment", "accept_prob"))

    def one(j):
        stream = sample_stream(seed, j)
        if j < samples:
            spec = SubsetPhaseSpec(
                n=n, k=k, fn_kind="kwise", fn_degree=8,
                fn_seed=int(stream.integers(1 << 63)),
                subset_seed=int(stream.integers(1 << 63)))
            st = build_subset_phase_state(spec)
            name = "subset"
        else:
            st = haar_sample(n, stream)
            name = "haar"
        moment = swap_trick_value(st, alpha)
        return name, j % samples, moment, (1.0 + moment) / 2.0

    for row in _indexed_map(2 * samples, one, workers):
        table.add(*row)

    ens = table.column("ensemble")
    p = table.column("accept_prob").astype(float)
    sub_mean, sub_err = _mean_stderr(p[ens == "subset"])
    haar_mean, haar_err = _mean_stderr(p[ens == "haar"])
    gap = sub_mean - haar_mean
    sigma = math.hypot(sub_err, haar_err)
    if 2 * k <= n:  # the gap is only claimed for small subsets
        table.checks.append(BoundCheck("subset-vs-haar gap > 0 at 3 sigma",
                                       gap > 3 * sigma, gap, 3 * sigma))
    return manifest, table


# ---------------------------------------------------------------------------
# Independent tuning of entanglement and magic
# ---------------------------------------------------------------------------


def _balanced_cuts_in_support(support_size: int, count: int, rng) -> list:
    cuts = []
    for _ in range(count):
        sites = rng.choice(support_size, size=support_size // 2, replace=False)
        cuts.append(CutSpec(tuple(int(s) for s in sites)))
    return cuts


def tune_entanglement(n: int, k: int, f_target: int, samples: int, seed: int,
                      cuts_per_sample: int = 5, workers: int = 1):
    """Clifford on the first 2 f_target qubits: magic frozen, entanglement boosted."""
    if f_target > n // 2:
        raise ValueError("need f_target <= n/2 so the support fits the register")
    manifest = ExperimentManifest("tune_entanglement", seed, {
        "n": n, "k": k, "f_target": f_target, "samples": samples,
        "cuts_per_sample": cuts_per_sample})
    table = ResultTable(("sample", "cut", "m2_before", "m2_after", "m2_delta",
                         "ent_before", "ent_after"))

    def one(i):
        stream = sample_stream(seed, i)
        spec = SubsetPhaseSpec(
            n=n, k=k, fn_kind="kwise", fn_degree=8,
            fn_seed=int(stream.integers(1 << 63)),
            subset_seed=int(stream.integers(1 << 63)))
        st = build_subset_phase_state(spec)
        circ = random_clifford_circuit(2 * f_target, int(stream.integers(1 << 63)))
        boosted = apply_circuit(st, circ)
        m2_before = stabilizer_entropy(st, 2).value
        m2_after = stabilizer_entropy(boosted, 2).value
        rows = []
        for c, cut in enumerate(_balanced_cuts_in_support(2 * f_target,
                                                          cuts_per_sample, stream)):
            rows.append((i, c, m2_before, m2_after, abs(m2_after - m2_before),
                         entanglement_entropy(st, cut, 2),
                         entanglement_entropy(boosted, cut, 2)))
        return rows

    for rows in _indexed_map(samples, one, workers):
        for row in rows:
            table.add(*row)

    delta = table.column("m2_delta").astype(float)
    table.checks.append(BoundCheck("M2 unchanged per sample (<= 1e-9)",
                                   bool(delta.max() <= 1e-9), float(delta.max()), 1e-9))
    increase = table.column("ent_after").astype(float) - table.column("ent_before").astype(float)
    if k < f_target:
        table.checks.append(BoundCheck("median cut-entropy increase >= 1 bit",
                                       float(np.median(increase)) >= 1.0,
                                       float(np.median(increase)), 1.0))
    return manifest, table


def _all_cuts(n: int) -> list:
    # one representative per bipartition: subsets containing qubit 0
    cuts = []
    for mask in range(1, 1 << (n - 1)):
        sites = [0] + [q for q in range(1, n) if (mask >> (q - 1)) & 1]
        if len(sites) < n:
            cuts.append(CutSpec(tuple(sites)))
    return cuts


def tune_magic(n: int, k: int, g_target: int, samples: int, seed: int,
               workers: int = 1):
    """Haar single-qubit gates on the first g_target qubits: entanglement frozen
    across every cut, magic boosted toward the (4/5)^g moment decay."""
    if g_target > n:
        raise ValueError("need g_target <= n")
    manifest = ExperimentManifest("tune_magic", seed, {
        "n": n, "k": k, "g_target": g_target, "samples": samples})
    table = ResultTable(("sample", "m2_before", "m2_after", "pow2_neg_m2_after",
                         "max_cut_delta"))
    cuts = _all_cuts(n)

    def one(i):
        stream = sample_stream(seed, i)
        spec = SubsetPhaseSpec(
            n=n, k=k, fn_kind="kwise", fn_degree=8,
            fn_seed=int(stream.integers(1 << 63)),
            subset_seed=int(stream.integers(1 << 63)))
        st = build_subset_phase_state(spec)
        gates = tuple(SingleQubitGate(q, haar_unitary(2, stream))
                      for q in range(g_target))
        boosted = apply_circuit(st, GateCircuit(gates))
        m2_before = stabilizer_entropy(st, 2).value
        m2_after = stabilizer_entropy(boosted, 2).value
        worst = 0.0
        for cut in cuts:
            before = entanglement_entropy(st, cut, 2)
            after = entanglement_entropy(boosted, cut, 2)
            worst = max(worst, abs(after - before))
        return i, m2_before, m2_after, 2.0 ** (-m2_after), worst

    for row in _indexed_map(samples, one, workers):
        table.add(*row)

    worst = table.column("max_cut_delta").astype(float)
    table.checks.append(BoundCheck("every cut entropy unchanged (<= 1e-9)",
                                   bool(worst.max() <= 1e-9), float(worst.max()), 1e-9))
    mean, stderr = _mean_stderr(table.column("pow2_neg_m2_after"))
    bound = 2520.0 * (0.8 ** g_target) + 3 * stderr
    table.checks.append(BoundCheck("mean 2^-M2 <= 2520 (4/5)^g + 3 stderr",
                                   mean <= bound, mean, bound))
    if g_target > 0:
        med_b = float(np.median(table.column("m2_before")))
        med_a = float(np.median(table.column("m2_after")))
        table.checks.append(BoundCheck("median M2 strictly increases",
                                       med_a > med_b, med_a, med_b))
    return manifest, table


def independence_grid(n: int, k: int, f_targets, g_targets, samples: int,
                      seed: int, cuts_per_sample: int = 5, workers: int = 1):
    """Cross product of the two tuning moves: achieved (entanglement, M2) medians."""
    manifest = ExperimentManifest("independence_grid", seed, {
        "n": n, "k": k, "f_targets": [int(f) for f in f_targets],
        "g_targets": [int(g) for g in g_targets], "samples": samples,
        "cuts_per_sample": cuts_per_sample})
    table = ResultTable(("f_target", "g_target", "median_entanglement", "median_M2"))
    cells = [(int(f), int(g)) for f in f_targets for g in g_targets]
    for ci, (f, g) in enumerate(cells):
        ents, m2s = [], []
        for i in range(samples):
            stream = sample_stream(seed, ci * samples + i)
            spec = SubsetPhaseSpec(
                n=n, k=k, fn_kind="kwise", fn_degree=8,
                fn_seed=int(stream.integers(1 << 63)),
                subset_seed=int(stream.integers(1 << 63)))
            st = build_subset_phase_state(spec)
            if f > 0:
                st = apply_circuit(st, random_clifford_circuit(
                    2 * f, int(stream.integers(1 << 63))))
            if g > 0:
                st = apply_circuit(st, GateCircuit(tuple(
                    SingleQubitGate(q, haar_unitary(2, stream)) for q in range(g))))
            support = 2 * f if f > 0 else n
            for cut in _balanced_cuts_in_support(support, cuts_per_sample, stream):
                ents.append(entanglement_entropy(st, cut, 2))
            m2s.append(stabilizer_entropy(st, 2).value)
        table.add(f, g, float(np.median(ents)), float(np.median(m2s)))
    return manifest, table


# ---------------------------------------------------------------------------
# Copy moments of the ensemble vs Haar
# ---------------------------------------------------------------------------


def _symmetric_projector(d: int, copies: int) -> np.ndarray:
    from itertools import permutations

    dim = d ** copies
    acc = np.zeros((dim, dim))
    idx = np.arange(dim)
    digits = np.empty((copies, dim), dtype=np.int64)
    rem = idx.copy()
    for c in range(copies - 1, -1, -1):
        digits[c] = rem % d
        rem //= d
    perms = list(permutations(range(copies)))
    for sigma in perms:
        target = np.zeros(dim, dtype=np.int64)
        for c in range(copies):
            target = target * d + digits[sigma[c]]
        acc[target, idx] += 1.0
    return acc / len(perms)


def moment_distance(n: int, k: int, copies: int, ensemble_samples, seed: int,
                    workers: int = 1):
    """Trace distance between the ensemble copy-moment and the Haar moment.

    ensemble_samples=None enumerates the complete (sign function, subset)
    ensemble exactly (small n only); an integer runs a Monte Carlo average
    over seeded subset-phase states.
    """
    if n * copies > 8:
        raise ValueError("dense moment operators need n * copies <= 8")
    d = 1 << n
    dim = d ** copies
    manifest = ExperimentManifest("moment_distance", seed, {
        "n": n, "k": k, "copies": copies,
        "ensemble_samples": ensemble_samples})

    def accumulate(states) -> np.ndarray:
        acc = np.zeros((dim, dim), dtype=complex)
        total = 0
        for amps in states:
            v = amps
            for _ in range(copies - 1):
                v = np.kron(v, amps)
            acc += np.outer(v, v.conj())
            total += 1
        return acc / total

    if ensemble_samples is None:
        from itertools import combinations

        size = 1 << k
        n_subsets = math.comb(d, size)
        if n_subsets * (1 << size) > 1_000_000:
            raise ValueError("exact enumeration too large; pass a sample count")

        def exact_states():
            for subset in combinations(range(d), size):
                for signs in range(1 << size):
                    amps = np.zeros(d, dtype=complex)
                    for pos, x in enumerate(subset):
                        amps[x] = -1.0 if (signs >> pos) & 1 else 1.0
                    yield amps / math.sqrt(size)

        phi = accumulate(exact_states())
    else:
        def mc_states():
            for i in range(int(ensemble_samples)):
                stream = sample_stream(seed, i)
                spec = SubsetPhaseSpec(
                    n=n, k=k, fn_kind="kwise", fn_degree=8,
                    fn_seed=int(stream.integers(1 << 63)),
                    subset_seed=int(stream.integers(1 << 63)))
                yield build_subset_phase_state(spec).amps

        phi = accumulate(mc_states())

    haar = _symmetric_projector(d, copies) / math.comb(d + copies - 1, copies)
    evals = np.linalg.eigvalsh(phi - haar)
    distance = float(0.5 * np.abs(evals).sum())
    table = ResultTable(("n", "k", "copies", "samples", "trace_distance"))
    table.add(n, k, copies, -1 if ensemble_samples is None else int(ensemble_samples),
              distance)
    return manifest, table


# ---------------------------------------------------------------------------
# Distillation copy-count bound
# ---------------------------------------------------------------------------


def distillation_bound(m_copies: int, target: StateVector,
                       catalog: StabilizerCatalog, input_dmax_bits: float,
                       p_success: float, epsilon: float):
    """Copy-count lower bound for approximate probabilistic synthesis:

        copies >= (log2 p + log2(1 - eps) + m * Fbits(target)) / Dmax(input),

    with Fbits the stabilizer fidelity of the target in bits. Also reports
    the naive monotone-ratio bound for comparison. eps -> 1 drives the
    bound to -inf (vacuous); it is returned as-is with a warning flag."""
    if not 0.0 < p_success <= 1.0:
        raise ValueError("success probability must be in (0, 1]")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must be in [0, 1)")
    if input_dmax_bits <= 0:
        raise ValueError("input D_max must be positive")
    fbits = stabilizer_fidelity(target, catalog)
    numerator = math.log2(p_success) + math.log2(1.0 - epsilon) + m_copies * fbits
    bound = numerator / input_dmax_bits
    vacuous = bound <= 0.0
    return {
        "copies_lower_bound": bound,
        "target_fidelity_bits": fbits,
        "fidelity_term": m_copies * fbits,
        "naive_ratio_bound": m_copies * fbits / input_dmax_bits,
        "vacuous": vacuous,
    }


# ---------------------------------------------------------------------------
# Continuity scan
# ---------------------------------------------------------------------------


def fannes_scan(n: int, pairs: int, seed: int, workers: int = 1):
    """Random state pairs against the M1 and M2 continuity bounds."""
    from .entropy import fannes_rhs
    from .states import trace_distance_pure

    manifest = ExperimentManifest("fannes_scan", seed, {"n": n, "pairs": pairs})
    table = ResultTable(("pair", "trace_distance", "dM1", "rhs1", "dM2", "rhs2",
                         "ok1", "ok2"))

    def one(i):
        stream = sample_stream(seed, i)
        a = haar_sample(n, stream)
        b = haar_sample(n, stream)
        td = trace_distance_pure(a, b)
        sa, sb = full_spectrum(a), full_spectrum(b)
        d1 = abs(entropy_from_spectrum(sa, 1).value - entropy_from_spectrum(sb, 1).value)
        d2 = abs(entropy_from_spectrum(sa, 2).value - entropy_from_spectrum(sb, 2).value)
        r1, r2 = fannes_rhs(td, n, 1), fannes_rhs(td, n, 2)
        return i, td, d1, r1, d2, r2, d1 <= r1 + 1e-12, d2 <= r2 + 1e-12

    for row in _indexed_map(pairs, one, workers):
        table.add(*row)

    ok1 = table.column("ok1")
    ok2 = table.column("ok2")
    table.checks.append(BoundCheck("M1 continuity: zero violations",
                                   bool(np.all(ok1)), float(np.sum(~ok1.astype(bool))), 0.0))
    table.checks.append(BoundCheck("M2 continuity: zero violations",
                                   bool(np.all(ok2)), float(np.sum(~ok2.astype(bool))), 0.0))
    return manifest, table


# ---------------------------------------------------------------------------
# Manifest replay
# ---------------------------------------------------------------------------


def run_manifest(manifest: ExperimentManifest, workers: int = 1):
    """Re-run an experiment from its manifest; byte-identical tables."""
    name = manifest.experiment_name
    p = manifest.params
    seed = manifest.master_seed
    if name == "haar_baseline":
        return haar_baseline(p["n"], p["samples"], p["alpha_list"], seed, workers)[1]
    if name == "phase_state_average":
        return phase_state_average(p["n"], p["samples"], seed, workers)[1]
    if name == "subset_tightness":
        return subset_tightness(p["n"], p["k_list"], p["samples"], seed, workers)[1]
    if name == "distinguisher_gap":
        return distinguisher_gap(p["n"], p["k"], p["alpha"], p["samples"], seed, workers)[1]
    if name == "tune_entanglement":
        return tune_entanglement(p["n"], p["k"], p["f_target"], p["samples"], seed,
                                 p.get("cuts_per_sample", 5), workers)[1]
    if name == "tune_magic":
        return tune_magic(p["n"], p["k"], p["g_target"], p["samples"], seed, workers)[1]
    if name == "independence_grid":
        return independence_grid(p["n"], p["k"], p["f_targets"], p["g_targets"],
                                 p["samples"], seed, p.get("cuts_per_sample", 5),
                                 workers)[1]
    if name == "moment_distance":
        return moment_distance(p["n"], p["k"], p["copies"], p["ensemble_samples"],
                               seed, workers)[1]
    if name == "fannes_scan":
        return fannes_scan(p["n"], p["pairs"], seed, workers)[1]
    raise ValueError(f"unknown experiment {name!r}")
