"""Command-line entry point: ``projenergy <command> [flags]``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .energy import Convention, conjectured_value, energy
from .geometry import KernelSpec
from .measures import (
    DiscreteMeasure,
    MeasureFormatError,
    load_measure,
    random_configuration,
    save_measure,
)
from .optimize import (
    AscentOptions,
    ThresholdInconsistency,
    aggregation_constant,
    estimate_threshold,
    maximize_particles,
    restart_seed,
    stability_experiment,
)
from .transport import parse_p, transport_distance
from .verify import chain_check, frame_bound_check, majorization_check

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _f(x) -> str:
    return f"{x:.17g}"


def _t(x) -> str:
    return f"{x:.12g}"


def _versions() -> str:
    try:
        own = version("artifact")
    except PackageNotFoundError:
        own = "unknown"
    import scipy

    return f"projenergy {own}; numpy {np.__version__}; scipy {scipy.__version__}; python {sys.version.split()[0]}"


def write_manifest(output: Path, command: str, params: dict, seed, started: str, outputs: list[Path]):
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "versions": _versions(),
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    path = output.with_name(output.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def _write_csv(path: Path, header, rows, trailer: str | None = None):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        if trailer:
            fh.write(trailer + "\n")


def _alpha(text: str) -> float:
    value = math.inf if str(text).lower() in ("inf", "infinity") else float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return value


# -- commands -------------------------------------------------------------------


def cmd_energy(args) -> int:
    mu = load_measure(args.measure_file)
    report = energy(KernelSpec.power(args.alpha), mu, Convention.parse(args.convention))
    print(f"energy      {_t(report.value)}")
    print(f"convention  {report.convention.value}")
    print(f"kernel      {report.kernel.describe()}")
    return EXIT_OK


def _ascent_options(args, restarts=None) -> AscentOptions:
    return AscentOptions(
        restarts=restarts or args.restarts,
        max_iters=args.max_iters,
        seed=args.seed,
        workers=args.threads,
    )


def cmd_optimize(args) -> int:
    if args.dim < 1 or args.n_points < 1 or not (0 < args.alpha < math.inf):
        raise UsageError("need --dim >= 1, --n-points >= 1 and finite --alpha > 0")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    result = maximize_particles(args.dim, args.n_points, args.alpha, _ascent_options(args))
    measure_path, csv_path = out / "best_measure.json", out / "restarts.csv"
    save_measure(result.best, measure_path)
    rows = [
        (k, _f(e), it, int(c))
        for k, (e, it, c) in enumerate(zip(result.per_restart_energies, result.iterations, result.converged_flags))
    ]
    _write_csv(csv_path, ["restart", "final_energy", "iterations", "converged"], rows)
    target = conjectured_value(args.dim, args.n_points, strict=False)
    write_manifest(out / "run", "optimize", vars_for_manifest(args), args.seed, started, [measure_path, csv_path])
    print(f"best energy {_t(result.best_energy)}  conjectured {_t(target)}  gap {_t(result.best_energy - target)}")
    return EXIT_OK


def cmd_scan_alpha(args) -> int:
    if not (0 < args.alpha_lo < args.alpha_hi):
        raise UsageError("need 0 < --alpha-lo < --alpha-hi")
    out = Path(args.output)
    started = datetime.now(timezone.utc).isoformat()
    opts = _ascent_options(args)
    status = EXIT_OK
    try:
        est = estimate_threshold(args.dim, args.n_points, args.alpha_lo, args.alpha_hi, args.alpha_tol, opts)
    except ThresholdInconsistency as exc:
        est, status = exc.estimate, EXIT_INTERNAL
        print(f"inconsistent verdicts: {exc}", file=sys.stderr)
    rows = [(_f(s.alpha), _f(s.best_energy), _f(s.conjectured), _f(s.gap), s.verdict) for s in est.samples]
    lo, hi = est.bracket
    trailer = f"# bracket {_f(lo)} {_f(hi)}" + (" trivial" if est.trivial else "")
    _write_csv(out, ["alpha", "best_energy", "conjectured", "gap", "verdict"], rows, trailer)
    write_manifest(out, "scan-alpha", vars_for_manifest(args), args.seed, started, [out])
    for s in est.samples:
        print(f"alpha {_t(s.alpha):>14}  best {_t(s.best_energy)}  gap {_t(s.gap)}  {s.verdict}")
    for flag in est.flags:
        print(f"note: {flag}")
    print(f"bracket [{_t(lo)}, {_t(hi)}]" + (" (trivial: N <= d+1)" if est.trivial else ""))
    return status


def cmd_transport(args) -> int:
    mu, nu = load_measure(args.file_a), load_measure(args.file_b)
    if mu.dim != nu.dim:
        raise UsageError(f"dimension mismatch: S^{mu.dim} vs S^{nu.dim}")
    value, plan = transport_distance(mu, nu, parse_p(args.p), args.metric)
    print(_t(value))
    if args.output:
        out = Path(args.output)
        started = datetime.now(timezone.utc).isoformat()
        _write_csv(out, ["i", "j", "mass"], [(i, j, _f(m)) for i, j, m in plan.support()])
        write_manifest(out, "transport", vars_for_manifest(args), None, started, [out])
    return EXIT_OK


def _verify_majorization(args):
    alphas = args.alpha or [2.0]
    rows, ok = [], True
    for a in alphas:
        rep = majorization_check(a, args.grid)
        ok &= rep.passed
        rows.append((_f(a), _f(rep.min_gap), _f(rep.min_gap_at), int(rep.passed)))
        print(f"alpha {_t(a)}: {'pass' if rep.passed else 'FAIL'}  min gap {_t(rep.min_gap)} at t={_t(rep.min_gap_at)}")
    return ok, ["alpha", "min_gap", "min_gap_at", "pass"], rows


def _random_measures(dims, trials, seed):
    for d in dims:
        for k in range(trials):
            s = restart_seed(seed, 1000 * d + k)
            n = 1 + s % 8
            yield d, k, random_configuration(d, n, s, weighted=True)


def _verify_chain(args):
    alphas = args.alpha or [2.0, 4.0]
    dims = [args.dim] if args.dim else [1, 2, 3]
    rows, ok = [], True
    for a in alphas:
        for d, k, mu in _random_measures(dims, args.trials, args.seed):
            rep = chain_check(mu, a)
            ok &= rep.passed
            rows.append((_f(a), d, k, _f(rep.e_f), _f(rep.e_g), _f(rep.e_g_sigma), int(rep.passed)))
    print(f"chain: {sum(r[-1] for r in rows)}/{len(rows)} cases pass")
    return ok, ["alpha", "d", "case", "e_f", "e_g", "e_g_sigma", "pass"], rows


def _pdelta_measure(d, style):
    if style == "uniform":
        w = np.full(d + 1, 1.0 / (d + 1))
    else:
        w = np.concatenate([[0.6], np.full(d, 0.4 / d)])
    return DiscreteMeasure(np.eye(d + 1), w)


def _verify_stability(args):
    alphas = args.alpha or [2.0]
    dims = [args.dim] if args.dim else [1, 2, 3]
    rows, ok = [], True
    for d in dims:
        for a in alphas:
            for style in args.weights:
                rep = stability_experiment(_pdelta_measure(d, style), a, args.radius, args.k_split, args.trials, args.seed)
                ok &= rep.violations == 0
                rows.append((d, _f(a), style, rep.trials, rep.violations, _f(rep.max_energy_gain)))
                print(f"d={d} alpha={_t(a)} {style}: {rep.violations}/{rep.trials} violations, max gain {_t(rep.max_energy_gain)}")
    return ok, ["d", "alpha", "weights", "trials", "violations", "max_energy_gain"], rows


def _verify_aggregation(args):
    dims = [args.dim] if args.dim else [1, 2, 3]
    rows, ok = [], True
    for d in dims:
        eye = np.eye(d + 1)
        nus = [DiscreteMeasure.dirac(eye[i]) for i in range(1, d + 1)]
        rep = aggregation_constant(nus, args.radius, args.c_target, args.samples, args.seed)
        ok &= rep.passed
        rows.append((d, _f(args.radius), _f(rep.c_empirical), _f(args.c_target), int(rep.passed)))
        print(f"d={d}: C_empirical {_t(rep.c_empirical)} (target {_t(args.c_target)}) {'pass' if rep.passed else 'FAIL'}")
    return ok, ["d", "radius", "c_empirical", "c_target", "pass"], rows


def _verify_frame(args):
    dims = [args.dim] if args.dim else [1, 2, 3]
    rows, ok = [], True
    for d, k, mu in _random_measures(dims, args.trials, args.seed):
        rep = frame_bound_check(mu)
        good = rep.identity_holds and rep.tr_I2 >= rep.lower_bound - 1e-12
        ok &= good
        rows.append((d, k, _f(rep.tr_I2), _f(rep.lower_bound), _f(rep.identity_error), int(good)))
    print(f"frame: {sum(r[-1] for r in rows)}/{len(rows)} cases pass")
    return ok, ["d", "case", "tr_I2", "lower_bound", "identity_error", "pass"], rows


SUITES = {
    "majorization": _verify_majorization,
    "chain": _verify_chain,
    "stability": _verify_stability,
    "aggregation": _verify_aggregation,
    "frame": _verify_frame,
}


def cmd_verify(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    if args.trials is None:
        args.trials = 1000 if args.suite == "stability" else 100
    ok, header, rows = SUITES[args.suite](args)
    if args.output:
        out = Path(args.output)
        _write_csv(out, header, rows)
        write_manifest(out, f"verify {args.suite}", vars_for_manifest(args), args.seed, started, [out])
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------


def vars_for_manifest(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "params")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projenergy", description=__doc__.splitlines()[0])
    parser.add_argument("--params", help="JSON file whose keys override flags")
    parser.add_argument("--threads", type=int, default=1, help="worker cap (results do not depend on it)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="energy of a measure file")
    p.add_argument("measure_file")
    p.add_argument("--alpha", type=_alpha, default=1.0)
    p.add_argument("--convention", choices=["half", "plain"], default="half")
    p.set_defaults(func=cmd_energy)

    def ascent_flags(q):
        q.add_argument("--dim", type=int, required=True)
        q.add_argument("--n-points", type=int, required=True)
        q.add_argument("--restarts", type=int, default=16)
        q.add_argument("--max-iters", type=int, default=5000)
        q.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("optimize", help="maximize energy over N equal masses")
    ascent_flags(p)
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--output", default="optimize_out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("scan-alpha", help="bracket the threshold exponent")
    ascent_flags(p)
    p.add_argument("--alpha-lo", type=float, default=1.0)
    p.add_argument("--alpha-hi", type=float, default=3.0)
    p.add_argument("--alpha-tol", type=float, default=0.05)
    p.add_argument("--output", default="scan_alpha.csv")
    p.set_defaults(func=cmd_scan_alpha)

    p = sub.add_parser("transport", help="transport distance between two measure files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--p", default="1", choices=["1", "2", "inf"])
    p.add_argument("--metric", default="sphere", choices=["sphere", "projective"])
    p.add_argument("--output", help="plan CSV (i, j, mass)")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--alpha", type=float, action="append", help="repeatable")
    p.add_argument("--dim", type=int)
    p.add_argument("--grid", type=int, default=100_000)
    p.add_argument("--trials", type=int, help="cases per setting (default 1000 for stability, else 100)")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--k-split", type=int, default=5)
    p.add_argument("--weights", nargs="+", choices=["uniform", "skewed"], default=["uniform", "skewed"])
    p.add_argument("--c-target", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="per-case CSV")
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_params(args):
    if not args.params:
        return args
    try:
        overrides = json.loads(Path(args.params).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read parameter file: {exc}") from exc
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise UsageError(f"unknown parameter {key!r}")
        setattr(args, attr, value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args = _apply_params(args)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except (UsageError, MeasureFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
