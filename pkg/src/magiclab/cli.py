"""Command-line front door: run experiments, compute measures, manage catalogs.

Exit codes: 0 success, 1 usage error, 2 a bound-checking run recorded a
failed check. Every experiment writes its result table (CSV or JSON) plus
the replay manifest into the output directory.

Environment: MAGICLAB_THREADS sets the default worker count and
MAGICLAB_MAX_QUBITS the spectrum memory cap; command-line flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .convex import (
    enumerate_stabilizers,
    robustness_certificate_subset_phase,
    robustness_lp,
    stabilizer_extent,
    stabilizer_fidelity,
)
from .entropy import entropy_from_spectrum, stabilizer_group
from .experiments import (
    ExperimentManifest,
    ResultTable,
    distillation_bound,
    distinguisher_gap,
    fannes_scan,
    haar_baseline,
    independence_grid,
    moment_distance,
    phase_state_average,
    subset_tightness,
    tune_entanglement,
    tune_magic,
)
from .otoc import averaged_otoc, scrambling_ratio
from .pauli import full_spectrum
from .states import StateVector, load_state, random_circuit, save_state
from .subset_phase import SubsetPhaseSpec, build_subset_phase_state

T_STATE = StateVector(1, np.array([1.0, np.exp(1j * np.pi / 4)]) / np.sqrt(2.0))


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _default_workers() -> int:
    return max(1, int(os.environ.get("MAGICLAB_THREADS", "1")))


def _write_outputs(manifest: ExperimentManifest, table: ResultTable,
                   outdir: str, fmt: str) -> list:
    os.makedirs(outdir, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    stem = f"{manifest.experiment_name}_{manifest.master_seed}_{stamp}"
    paths = []
    mpath = os.path.join(outdir, stem + ".manifest.json")
    with open(mpath, "w") as fh:
        fh.write(manifest.to_json())
    paths.append(mpath)
    tpath = os.path.join(outdir, stem + "." + fmt)
    with open(tpath, "w", newline="") as fh:
        fh.write(table.to_csv() if fmt == "csv" else table.to_json())
    paths.append(tpath)
    return paths


def _report(manifest, table, args) -> int:
    paths = _write_outputs(manifest, table, args.outdir, args.format)
    summary = table.summary()
    for name, stats in summary.items():
        print(f"{name}: mean={stats['mean']:.6g} stderr={stats['stderr']:.3g} "
              f"min={stats['min']:.6g} max={stats['max']:.6g}")
    status = 0
    for check in table.checks:
        flag = "PASS" if check.passed else "FAIL"
        print(f"[{flag}] {check.name}: observed {check.observed:.6g} vs bound "
              f"{check.bound:.6g}")
        if not check.passed:
            status = 2
    for p in paths:
        print(f"wrote {p}")
    return status


def _add_common(sp, seed_default=0):
    sp.add_argument("--seed", type=int, default=seed_default,
                    help="master seed; every run is a pure function of it")
    sp.add_argument("--outdir", default="./results", help="output directory")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker threads (default: MAGICLAB_THREADS or 1); "
                         "results are identical for any value")


def _workers(args) -> int:
    return args.workers if args.workers is not None else _default_workers()


def _get_catalog(n: int, cache_dir: str | None):
    return enumerate_stabilizers(n, cache_dir=cache_dir)


def main(argv=None) -> int:
    parser = _Parser(prog="magiclab",
                     description="Nonstabilizerness laboratory: subset phase "
                                 "state ensembles and every desk-scale magic "
                                 "quantity around them.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="build (and cache) the exhaustive "
                                       "stabilizer-state catalog for n <= 4")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cache-dir", default="./results/catalogs")

    p = sub.add_parser("build", help="build a subset phase state from its spec "
                                     "and write it as a state file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--fn-kind", choices=("truth_table", "kwise", "hypergraph"),
                   default="kwise")
    p.add_argument("--fn-seed", type=int, default=0)
    p.add_argument("--fn-degree", type=int, default=8)
    p.add_argument("--subset-kind", choices=("prefix_image_of_permutation",
                                             "explicit_list"),
                   default="prefix_image_of_permutation")
    p.add_argument("--subset-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output state file path")

    p = sub.add_parser("magic", help="compute magic measures of a serialized state")
    p.add_argument("--state", required=True, help="path to a state file")
    p.add_argument("--alpha", default="2", help="comma list of Renyi orders")
    p.add_argument("--measures", default="entropy",
                   help="comma list from: entropy,m0,rob,fid,ext,dmax,nullity")
    p.add_argument("--cache-dir", default="./results/catalogs")
    p.add_argument("--allow-large", action="store_true",
                   help="allow the n=4 catalog LPs (slow: 36720 columns)")

    p = sub.add_parser("haar-baseline",
                       help="checks the Haar floors: mean M2 >= n-2-0.2 and the "
                            "typicality floor min M_alpha >= n/(4 alpha)")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--alpha", default="2")
    _add_common(p)

    p = sub.add_parser("phase-average",
                       help="checks that uniform truth-table phase states have "
                            "mean 2^-M2 <= 20/2^n (+3 stderr)")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--samples", type=int, default=500)
    _add_common(p)

    p = sub.add_parser("subset-tightness",
                       help="checks M0 <= 2k always and the M2 >= k/4 "
                            "concentration for 8-wise independent signs")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k-list", default="2,4,6")
    p.add_argument("--samples", type=int, default=50)
    _add_common(p)

    p = sub.add_parser("distinguish",
                       help="interference-test acceptance probability gap "
                            "between subset-phase and Haar ensembles (odd alpha)")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=int, default=3)
    p.add_argument("--samples", type=int, default=100)
    _add_common(p)

    p = sub.add_parser("tune-ent",
                       help="checks a Clifford on 2f qubits boosts cut entropy "
                            "(median +1 bit for k < f) while M2 is unchanged")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--f-target", type=int, default=4)
    p.add_argument("--samples", type=int, default=50)
    _add_common(p)

    p = sub.add_parser("tune-magic",
                       help="checks Haar single-qubit gates on g qubits leave "
                            "every cut entropy unchanged while mean 2^-M2 "
                            "<= 2520 (4/5)^g and the median M2 rises")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--g-target", type=int, default=8)
    p.add_argument("--samples", type=int, default=100)
    _add_common(p)

    p = sub.add_parser("independence-grid",
                       help="2-D grid of achieved (entanglement, M2) medians "
                            "over (f, g) tuning pairs")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--f-targets", default="1,2,3")
    p.add_argument("--g-targets", default="0,4,8")
    p.add_argument("--samples", type=int, default=20)
    _add_common(p)

    p = sub.add_parser("otoc",
                       help="checks the correlator identity <C_4a> = "
                            "2^{(1-a) M_a}/d^2 (direct vs spectrum) or reports "
                            "the subset-vs-Haar scrambling ratio growth")
    p.add_argument("--mode", choices=("identity", "ratio"), default="identity")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--n-list", default="4,6,8")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--circuits", type=int, default=20)
    p.add_argument("--haar-seeds", type=int, default=20)
    p.add_argument("--depth", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("fannes-scan",
                       help="checks the M1/M2 continuity bounds "
                            "|dM| <= td log2(d^2-1) + H(td) on random pairs")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--pairs", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("moments",
                       help="trace distance of the ensemble copy-moment from "
                            "the Haar moment (monotone in |S|)")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--exact", action="store_true",
                   help="enumerate the complete (f, S) ensemble instead of MC")
    _add_common(p)

    p = sub.add_parser("distill-bound",
                       help="copy-count lower bound "
                            "(log2 p + log2(1-eps) + m Fbits) / Dmax")
    p.add_argument("--m", type=int, required=True, help="target copies")
    p.add_argument("--target", default="T",
                   help="'T' or a path to a state file (n <= 3)")
    p.add_argument("--dmax", type=float, required=True,
                   help="D_max of the input state, bits")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--cache-dir", default="./results/catalogs")
    p.add_argument("--outdir", default="./results")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help / usage errors
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _parse_list(text: str, cast=float) -> list:
    return [cast(tok) for tok in str(text).split(",") if tok != ""]


def _dispatch(args) -> int:
    cmd = args.command

    if cmd == "catalog":
        catalog = _get_catalog(args.n, args.cache_dir)
        print(f"{catalog.count} states")
        return 0

    if cmd == "build":
        spec = SubsetPhaseSpec(n=args.n, k=args.k, fn_kind=args.fn_kind,
                               fn_seed=args.fn_seed, subset_kind=args.subset_kind,
                               subset_seed=args.subset_seed, fn_degree=args.fn_degree)
        state = build_subset_phase_state(spec)
        save_state(state, args.out)
        with open(args.out + ".spec.json", "w") as fh:
            fh.write(spec.to_json())
        print(f"wrote {args.out} ({state.n} qubits, support {1 << args.k})")
        return 0

    if cmd == "magic":
        state = load_state(args.state)
        alphas = _parse_list(args.alpha, float)
        measures = [m.strip() for m in args.measures.split(",")]
        spectrum = full_spectrum(state)
        out = {}
        catalog = None
        if any(m in ("rob", "fid", "ext", "dmax") for m in measures):
            catalog = _get_catalog(state.n, args.cache_dir)
        for m in measures:
            if m == "entropy":
                for a in alphas:
                    out[f"M{a:g}"] = entropy_from_spectrum(spectrum, a).value
            elif m == "m0":
                out["M0"] = entropy_from_spectrum(spectrum, 0).value
            elif m == "rob":
                out["robustness_bits"] = robustness_lp(
                    state, catalog, allow_large=args.allow_large).value_bits
            elif m == "fid":
                out["fidelity_bits"] = stabilizer_fidelity(state, catalog)
            elif m == "ext":
                out["extent_bits"] = stabilizer_extent(
                    state, catalog, allow_large=args.allow_large).value_bits
            elif m == "dmax":
                out["dmax_bits"] = stabilizer_extent(
                    state, catalog, allow_large=args.allow_large).value_bits
            elif m == "nullity":
                out["nullity"] = stabilizer_group(state, spectrum=spectrum).nullity
            else:
                raise ValueError(f"unknown measure {m!r}")
        for key, val in out.items():
            print(f"{key} = {val:.10g}")
        return 0

    if cmd == "distill-bound":
        if args.target == "T":
            target = T_STATE
        else:
            target = load_state(args.target)
        catalog = _get_catalog(target.n, args.cache_dir)
        result = distillation_bound(args.m, target, catalog, args.dmax,
                                    args.p, args.eps)
        for key, val in result.items():
            print(f"{key} = {val}")
        return 0

    workers = _workers(args)

    if cmd == "haar-baseline":
        manifest, table = haar_baseline(args.n, args.samples,
                                        _parse_list(args.alpha, float),
                                        args.seed, workers)
    elif cmd == "phase-average":
        manifest, table = phase_state_average(args.n, args.samples, args.seed, workers)
    elif cmd == "subset-tightness":
        manifest, table = subset_tightness(args.n, _parse_list(args.k_list, int),
                                           args.samples, args.seed, workers)
    elif cmd == "distinguish":
        manifest, table = distinguisher_gap(args.n, args.k, args.alpha,
                                            args.samples, args.seed, workers)
    elif cmd == "tune-ent":
        manifest, table = tune_entanglement(args.n, args.k, args.f_target,
                                            args.samples, args.seed, workers=workers)
    elif cmd == "tune-magic":
        manifest, table = tune_magic(args.n, args.k, args.g_target, args.samples,
                                     args.seed, workers)
    elif cmd == "independence-grid":
        manifest, table = independence_grid(args.n, args.k,
                                            _parse_list(args.f_targets, int),
                                            _parse_list(args.g_targets, int),
                                            args.samples, args.seed, workers=workers)
    elif cmd == "fannes-scan":
        manifest, table = fannes_scan(args.n, args.pairs, args.seed, workers)
    elif cmd == "moments":
        manifest, table = moment_distance(args.n, args.k, args.copies,
                                          None if args.exact else args.samples,
                                          args.seed, workers)
    elif cmd == "otoc":
        manifest, table = _run_otoc(args, workers)
    else:
        raise ValueError(f"unhandled command {cmd!r}")

    return _report(manifest, table, args)


def _run_otoc(args, workers):
    from .experiments import BoundCheck

    if args.mode == "identity":
        if args.n > 2:
            raise ValueError("the direct group average is gated to n <= 2 here")
        manifest = ExperimentManifest("otoc_identity", args.seed, {
            "n": args.n, "circuits": args.circuits, "depth": args.depth})
        table = ResultTable(("circuit", "spectrum_value", "direct_value", "delta"))
        for i in range(args.circuits):
            circ = random_circuit(args.n, args.depth,
                                  np.random.SeedSequence(args.seed, spawn_key=(i,)))
            sv = averaged_otoc(circ, args.n, 2, method="spectrum")
            dv = averaged_otoc(circ, args.n, 2, method="direct")
            table.add(i, sv, dv, abs(sv - dv))
        worst = float(table.column("delta").max())
        table.checks.append(BoundCheck("identity: direct vs spectrum <= 1e-9",
                                       worst <= 1e-9, worst, 1e-9))
        return manifest, table

    manifest = ExperimentManifest("otoc_ratio", args.seed, {
        "n_list": _parse_list(args.n_list, int), "k": args.k,
        "alpha": args.alpha, "haar_seeds": args.haar_seeds})
    spec = SubsetPhaseSpec(n=max(_parse_list(args.n_list, int)), k=args.k,
                           fn_kind="kwise", fn_seed=args.seed,
                           subset_seed=args.seed)
    rows = scrambling_ratio(spec, _parse_list(args.n_list, int), args.alpha,
                            args.haar_seeds, args.seed)
    table = ResultTable(("n", "c_pm", "c_haar_mean", "c_haar_stderr", "ratio"))
    for row in rows:
        table.add(row["n"], row["c_pm"], row["c_haar_mean"],
                  row["c_haar_stderr"], row["ratio"])
    ratios = table.column("ratio")
    grows = bool(np.all(ratios[1:] >= 2.0 * ratios[:-1])) if len(ratios) > 1 else True
    table.checks.append(BoundCheck("ratio at least doubles per n step", grows,
                                   float((ratios[1:] / ratios[:-1]).min()) if len(ratios) > 1 else 0.0,
                                   2.0))
    return manifest, table


if __name__ == "__main__":
    sys.exit(main())
