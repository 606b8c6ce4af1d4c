"""Command-line front end: generate graphs, evaluate bounds, run Monte Carlo
sweeps, fit thresholds, validate bounds against exact enumeration, and rerun
the two packaged threshold studies.

Every artifact embeds (JSON) or gets a sidecar (CSV) run manifest with the
subcommand, a full parameter echo, sha256 digests of the input files, the
library version, the seed, and a timestamp.  Outputs are deterministic given
the manifest: the worker count only sets the process pool size and is
excluded from the parameter echo.

Exit codes: 0 success, 1 usage error, 2 input error (missing or malformed
files, bad values), 3 numerical failure (unconverged spectral iteration,
degenerate fit, bound violations found by verify, reproduced threshold
outside the reference interval).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .bounds import _jsonable, evaluate_bounds, uniqueness_report
from .corpus import corpus
from .generators import GeneratorSpec, build, families, two_region
from .graph import Digraph, EdgeListError, read_edge_list, write_edge_list
from .montecarlo import fit_threshold, sweep, SweepResult
from .oracle import exact_chi_identity_check
from .spectral import SpectralConvergenceError
from .validate import soundness_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

# frozen configurations of the two packaged threshold studies
REPRODUCE = {
    "fig2": {
        "mode": "out",
        "p_start": 0.30,
        "p_stop": 0.44,
        "p_step": 0.01,
        "interval": (0.326, 0.366),
        "description": "out-cluster threshold of the two-region ring",
    },
    "figstr": {
        "mode": "str",
        "p_start": 0.46,
        "p_stop": 0.62,
        "p_step": 0.01,
        "interval": (0.510, 0.550),
        "description": "strongly-connected-cluster threshold of the two-region ring",
    },
}
REPRODUCE_SIZES = (75, 100)
MIN_REALIZATIONS_FOR_VERDICT = 20


class CliError(Exception):
    """Input-level failure; rendered as a one-line diagnostic, exit 2."""


class Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- manifest and output helpers ---


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _manifest(args: argparse.Namespace, inputs: Sequence[str] = ()) -> dict:
    params = {
        k: v for k, v in vars(args).items()
        if k not in ("func", "workers") and not k.startswith("_")
    }
    return {
        "subcommand": args._subcommand,
        "parameters": _jsonable(params),
        "input_digests": {os.path.basename(p) or p: _sha256(p) for p in inputs},
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _write_json(path: Optional[str], obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_csv(path: str, rows: List[dict], manifest: dict) -> None:
    if not rows:
        raise CliError("no rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    _write_json(path + ".manifest.json", manifest)


def _read_graph(path: str) -> Digraph:
    if not os.path.exists(path):
        raise CliError(f"graph file not found: {path}")
    try:
        return read_edge_list(path)
    except EdgeListError as exc:
        raise CliError(f"bad edge list {path}: {exc}") from exc


def _parse_floats(text: str, what: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise CliError(f"bad {what}: {text!r}") from exc


def _parse_pairs(text: str, n: int) -> List[Tuple[int, int]]:
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            u, v = (int(t) for t in tok.split(":"))
        except ValueError as exc:
            raise CliError(f"bad pair {tok!r}; expected u:v") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise CliError(f"pair {tok!r} out of range for n={n}")
        pairs.append((u, v))
    return pairs


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0:
        raise CliError("p-step must be positive")
    if stop < start:
        raise CliError("p-stop must be >= p-start")
    count = int(round((stop - start) / step))
    grid = np.round(start + step * np.arange(count + 1), 10)
    return grid[grid <= stop + 1e-12]


def _probability_vector(args: argparse.Namespace, n: int) -> np.ndarray:
    if args.p_file is not None:
        if not os.path.exists(args.p_file):
            raise CliError(f"probability file not found: {args.p_file}")
        with open(args.p_file) as fh:
            values = [float(line) for line in fh if line.strip()]
    else:
        values = _parse_floats(args.p, "probability list")
    if len(values) == 1:
        values = values * n
    if len(values) != n:
        raise CliError(f"need 1 or {n} probabilities, got {len(values)}")
    arr = np.asarray(values, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise CliError("probabilities must lie in [0, 1]")
    return arr


# --- generate ---


def cmd_generate(args: argparse.Namespace) -> int:
    family = args.family.replace("-", "_")
    flag_map = {
        "L": args.L, "d1": args.d1, "d2": args.d2, "D": args.D, "r": args.r,
        "d": args.d, "variant": args.variant, "n": args.n,
    }
    params = {k: v for k, v in flag_map.items() if v is not None}
    if args.dims is not None:
        params["dims"] = [int(t) for t in args.dims.split(",")]
    spec = GeneratorSpec(family=family, params=params, seed=args.seed)
    try:
        d = build(spec)
    except (TypeError, ValueError) as exc:
        raise CliError(f"cannot build {args.family}: {exc}") from exc
    write_edge_list(d, args.output)
    _write_json(args.output + ".manifest.json", _manifest(args))
    print(f"wrote {args.output}: n={d.n} m={d.m} family={args.family}")
    return EXIT_OK


# --- analyze ---


def cmd_analyze(args: argparse.Namespace) -> int:
    d = _read_graph(args.graph)
    p = _probability_vector(args, d.n)
    pairs = _parse_pairs(args.pairs, d.n) if args.pairs else None
    report = evaluate_bounds(
        d, p, pairs=pairs, depth_cap=args.depth_cap,
        strict=not args.allow_unconverged,
    )
    uniq = uniqueness_report(d, p)
    payload = {
        "manifest": _manifest(args, [args.graph]),
        "report": report.to_dict(),
        "uniqueness": uniq.to_dict(),
    }
    _write_json(args.output, payload)
    if args.output:
        applicable = sum(1 for r in report.records if r.applicable)
        print(f"wrote {args.output}: {applicable}/{len(report.records)}"
              f" records applicable")
    return EXIT_OK


# --- simulate ---


def cmd_simulate(args: argparse.Namespace) -> int:
    d = _read_graph(args.graph)
    if args.p_list is not None:
        grid = np.asarray(_parse_floats(args.p_list, "p-list"))
    else:
        if None in (args.p_start, args.p_stop, args.p_step):
            raise CliError("need --p-list or all of --p-start/--p-stop/--p-step")
        grid = _grid(args.p_start, args.p_stop, args.p_step)
    modes = tuple(t.strip() for t in args.modes.split(",") if t.strip())
    probes = [int(t) for t in args.probes.split(",") if t.strip()] if args.probes else []
    for v in probes:
        if not (0 <= v < d.n):
            raise CliError(f"probe {v} out of range for n={d.n}")
    try:
        result = sweep(
            d, grid, realizations=args.realizations, seed=args.seed,
            modes=modes, probes=probes, workers=args.workers,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _write_csv(args.output, result.to_rows(), _manifest(args, [args.graph]))
    print(f"wrote {args.output}: {grid.size} grid points x {len(modes)} modes,"
          f" {args.realizations} realizations")
    return EXIT_OK


# --- fit ---


def _load_sweep(path: str) -> SweepResult:
    if not os.path.exists(path):
        raise CliError(f"sweep file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise CliError(f"sweep file {path} is empty")
    return SweepResult.from_rows(rows)


def _fit_payload(fit) -> dict:
    payload = asdict(fit)
    payload["per_size"] = [asdict(s) for s in fit.per_size]
    return payload


def cmd_fit(args: argparse.Namespace) -> int:
    sweeps = []
    paths = []
    for token in args.sweep:
        if "=" not in token:
            raise CliError(f"bad --sweep {token!r}; expected SIZE=path.csv")
        size_text, path = token.split("=", 1)
        try:
            size = float(size_text)
        except ValueError as exc:
            raise CliError(f"bad size in --sweep {token!r}") from exc
        sweeps.append((size, _load_sweep(path)))
        paths.append(path)
    try:
        fit = fit_threshold(sweeps, mode=args.mode, window_rule=args.window_rule)
    except ValueError as exc:
        print(f"nbperc fit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    payload = {"manifest": _manifest(args, paths), "fit": _fit_payload(fit)}
    _write_json(args.output, payload)
    if args.output:
        print(f"wrote {args.output}: p_c(1/L)={fit.p_c:.6f}"
              f" p_c(1/L^2)={fit.p_c_quadratic:.6f}")
    return EXIT_OK


# --- verify ---


def cmd_verify(args: argparse.Namespace) -> int:
    items = corpus(args.count, seed=args.corpus_seed, n_max=args.n_max)
    rows = []
    total_checks = total_violations = 0
    identity_failures = 0
    print(f"{'label':34s} {'checks':>7s} {'skipped':>8s} {'violations':>11s}"
          f" {'identity':>9s}")
    for i, item in enumerate(items):
        rep = soundness_report(
            item.digraph, item.p, depth_cap=args.depth_cap, tol=args.tol,
            label=item.label, workers=args.workers,
        )
        identity: Optional[bool] = None
        if i < args.identity_count:
            identity = exact_chi_identity_check(item.digraph, item.p)
            identity_failures += 0 if identity else 1
        total_checks += len(rep.checks)
        total_violations += len(rep.violations)
        row = rep.to_dict()
        row["identity"] = identity
        rows.append(row)
        id_text = "-" if identity is None else ("pass" if identity else "FAIL")
        print(f"{rep.label:34s} {len(rep.checks):7d} {len(rep.skipped):8d}"
              f" {len(rep.violations):11d} {id_text:>9s}")
    ok = total_violations == 0 and identity_failures == 0
    status = "pass" if ok else "fail"
    print(f"total: {total_checks} checks, {total_violations} violations,"
          f" {identity_failures} identity failures across {len(items)} inputs")
    print(f"status: {status}")
    if args.output:
        payload = {
            "manifest": _manifest(args),
            "items": rows,
            "total_checks": total_checks,
            "total_violations": total_violations,
            "identity_failures": identity_failures,
            "status": status,
        }
        _write_json(args.output, payload)
    return EXIT_OK if ok else EXIT_NUMERIC


# --- reproduce ---


def cmd_reproduce(args: argparse.Namespace) -> int:
    cfg = REPRODUCE[args.figure]
    realizations = 4 if args.smoke else args.realizations
    sizes = tuple(int(t) for t in args.sizes.split(","))
    if len(sizes) < 2:
        raise CliError("need at least two sizes")
    grid = _grid(cfg["p_start"], cfg["p_stop"], cfg["p_step"])
    os.makedirs(args.output, exist_ok=True)

    sweeps = []
    csv_paths = {}
    for L in sizes:
        d = two_region(L, 3, 2, seed=0)
        result = sweep(
            d, grid, realizations=realizations, seed=args.seed,
            modes=(cfg["mode"],), workers=args.workers,
        )
        path = os.path.join(args.output, f"{args.figure}_L{L}.csv")
        _write_csv(path, result.to_rows(), _manifest(args))
        csv_paths[L] = path
        sweeps.append((float(L), result))

    sufficient = realizations >= MIN_REALIZATIONS_FOR_VERDICT
    fit_error = None
    try:
        fit = fit_threshold(sweeps, mode=cfg["mode"])
    except ValueError as exc:
        if sufficient:
            print(f"nbperc reproduce: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        fit, fit_error = None, str(exc)
    if fit is not None:
        _write_json(os.path.join(args.output, f"{args.figure}_fit.json"),
                    {"manifest": _manifest(args), "fit": _fit_payload(fit)})

    other = "linear" if args.extrapolation == "quadratic" else "quadratic"
    if fit is not None:
        p_c, p_c_se = fit.estimate(args.extrapolation)
        p_c_other = fit.estimate(other)[0]
        intercepts = {str(int(s.size)): s.p_intercept for s in fit.per_size}
    else:
        p_c = p_c_se = p_c_other = math.nan
        intercepts = {}
    lo, hi = cfg["interval"]
    if not sufficient:
        status = "insufficient statistics"
    elif lo <= p_c <= hi:
        status = "pass"
    else:
        status = "fail"
    summary = {
        "manifest": _manifest(args),
        "figure": args.figure,
        "description": cfg["description"],
        "mode": cfg["mode"],
        "grid": [float(p) for p in grid],
        "sizes": list(sizes),
        "realizations": realizations,
        "extrapolation": args.extrapolation,
        "p_c": p_c,
        "p_c_se": p_c_se,
        f"p_c_{other}": p_c_other,
        "fit_error": fit_error,
        "per_size_intercepts": intercepts,
        "max_second_largest": {
            str(int(L)): int(max(sw.second_largest_max[cfg["mode"]]))
            for L, sw in sweeps
            if cfg["mode"] in sw.second_largest_max
        },
        "reference_interval": [lo, hi],
        "status": status,
        "sweep_files": {str(L): os.path.basename(p) for L, p in csv_paths.items()},
    }
    _write_json(os.path.join(args.output, f"{args.figure}_summary.json"), summary)
    print(f"{args.figure}: p_c={p_c:.6f} +- {p_c_se:.6f}"
          f" ({args.extrapolation} extrapolation),"
          f" reference interval [{lo}, {hi}], status: {status}")
    return EXIT_OK if status != "fail" else EXIT_NUMERIC


# --- parser ---


def _build_parser() -> Parser:
    parser = Parser(
        prog="nbperc",
        description=(
            "Spectral bounds and Monte Carlo estimates for heterogeneous"
            " site percolation on directed graphs."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="_subcommand", required=True, metavar="command")

    g = sub.add_parser(
        "generate", help="write a graph from a named family as an edge list")
    g.add_argument("family",
                   choices=sorted(f.replace("_", "-") for f in families()))
    g.add_argument("--L", type=int, help="ring length (two-region)")
    g.add_argument("--d1", type=int, help="first-region degree (two-region)")
    g.add_argument("--d2", type=int, help="second-region degree (two-region)")
    g.add_argument("--D", type=int, help="branching number (rooted-tree)")
    g.add_argument("--r", type=int, help="radius / generations")
    g.add_argument("--d", type=int, help="degree (tree-closed, random-regular)")
    g.add_argument("--variant", choices=("a", "b", "c"),
                   help="leaf-closure variant (tree-closed)")
    g.add_argument("--dims", help="comma-separated side lengths (torus)")
    g.add_argument("--n", type=int, help="vertex count (cycle, complete, random-regular)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True, metavar="FILE")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser(
        "analyze", help="evaluate every bound on a graph and write a report")
    a.add_argument("graph", metavar="EDGEFILE")
    pgroup = a.add_mutually_exclusive_group(required=True)
    pgroup.add_argument("--p", help="open probability: scalar or comma list")
    pgroup.add_argument("--p-file", help="file with one probability per line")
    a.add_argument("--pairs", help="connectivity pairs as u:v,u:v (default: auto)")
    a.add_argument("--depth-cap", type=int, default=12,
                   help="return-path search depth cap")
    a.add_argument("--allow-unconverged", action="store_true",
                   help="mark unconverged spectral radii inapplicable instead"
                        " of failing")
    a.add_argument("-o", "--output", metavar="FILE", help="default: stdout")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser(
        "simulate", help="Monte Carlo sweep of largest-cluster sizes over p")
    s.add_argument("graph", metavar="EDGEFILE")
    s.add_argument("--p-start", type=float)
    s.add_argument("--p-stop", type=float)
    s.add_argument("--p-step", type=float)
    s.add_argument("--p-list", help="explicit comma-separated grid")
    s.add_argument("--realizations", type=int, default=120)
    s.add_argument("--modes", default="out",
                   help="comma list from und,out,in,str (default out)")
    s.add_argument("--probes", default="",
                   help="comma list of probe vertices for per-vertex"
                        " cluster-size means")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output", required=True, metavar="CSV")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser(
        "fit", help="fit pseudo-critical points and extrapolate the threshold")
    f.add_argument("--sweep", action="append", required=True, metavar="SIZE=CSV",
                   help="repeatable; at least two sizes")
    f.add_argument("--mode", default="out")
    f.add_argument("--window-rule", default="std-half-max",
                   choices=("std-half-max",))
    f.add_argument("-o", "--output", metavar="FILE", help="default: stdout")
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser(
        "verify", help="check every bound against exact enumeration on a"
                       " random corpus")
    v.add_argument("--corpus-seed", type=int, default=1)
    v.add_argument("--count", type=int, default=40, help="corpus size")
    v.add_argument("--n-max", type=int, default=10,
                   help="largest vertex count (enumeration is 2^n)")
    v.add_argument("--depth-cap", type=int, default=12)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--identity-count", type=int, default=8,
                   help="items receiving the chi = sum-of-tau identity check")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("-o", "--output", metavar="FILE")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser(
        "reproduce", help="rerun a packaged two-region threshold study")
    r.add_argument("figure", choices=sorted(REPRODUCE))
    r.add_argument("--realizations", type=int, default=120)
    r.add_argument("--smoke", action="store_true",
                   help="4 realizations; reports insufficient statistics")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--sizes", default=",".join(str(L) for L in REPRODUCE_SIZES))
    r.add_argument("--extrapolation", choices=("linear", "quadratic"),
                   default="quadratic",
                   help="finite-size abscissa: linear in 1/L or in 1/L^2")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("-o", "--output", required=True, metavar="DIR")
    r.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"nbperc {args._subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SpectralConvergenceError as exc:
        print(f"nbperc {args._subcommand}: numerical failure: {exc}",
              file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
