"""Command-line front end.

Subcommands: predict, curve, profile, coupling, be, conc, exposure,
gen-degrees. Every command accepts --seed/--threads/--format/--out/--budget
plus an optional --config JSON file whose keys mirror the long flag names
(explicit flags win). Exit codes: 0 = all checked bounds hold, 1 = a bound
failed, 2 = invalid input.

Outputs are tables: CSV (default) or JSON lines via --format jsonl, written
to --out or stdout. With a fixed config and seed, single-threaded runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import coupling as cpl
from . import degrees as deg
from . import exposure as expo
from . import walks
from .errors import BudgetExceeded, NbcutoffError
from .pairing import HalfEdgeSpace, uniform_pairing
from .rng import stream

DEFAULT_BUDGET = 2_000_000_000
EPS_GRID = (0.9, 0.75, 0.5, 0.25, 0.1)


# --- plumbing ---------------------------------------------------------------


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for independent replicates (default 1)")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None,
                   help="output format (default csv)")
    p.add_argument("--out", type=str, default=None,
                   help="output path (default stdout)")
    p.add_argument("--budget", type=int, default=None,
                   help=f"operation budget, checked up front (default {DEFAULT_BUDGET})")
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with defaults for any long flag")


def _degree_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--counts", type=str, default=None,
                   help='degree histogram as JSON, e.g. \'{"3": 500, "4": 500}\'')
    p.add_argument("--degrees-file", type=str, default=None,
                   help="newline-delimited degrees or JSON counts file")
    p.add_argument("--pmf", type=str, default=None,
                   help='degree pmf as JSON for IID sampling, e.g. \'{"3": 0.5, "4": 0.5}\'')
    p.add_argument("--n", type=int, default=None,
                   help="number of vertices (with --pmf)")


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    payload = json.loads(Path(args.config).read_text())
    if not isinstance(payload, dict):
        raise NbcutoffError("--config must hold a JSON object")
    for key, value in payload.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _fill(args: argparse.Namespace, **defaults) -> None:
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _check_budget(ops: float, budget: int) -> None:
    if ops > budget:
        raise BudgetExceeded(
            f"run needs ~{ops:.3g} elementary operations, budget is {budget:.3g}"
        )


def _load_sequence(args: argparse.Namespace) -> deg.DegreeSequence:
    sources = [s for s in (args.counts, args.degrees_file, args.pmf) if s is not None]
    if len(sources) != 1:
        raise NbcutoffError(
            "give exactly one of --counts, --degrees-file, --pmf"
        )
    if args.counts is not None:
        return deg.degrees_from_counts(json.loads(args.counts))
    if args.degrees_file is not None:
        return deg.load_degrees(args.degrees_file)
    if args.n is None:
        raise NbcutoffError("--pmf needs --n")
    pmf = {int(k): float(v) for k, v in json.loads(args.pmf).items()}
    return deg.sample_iid_degrees(pmf, args.n, rng=stream(args.seed, "gen-degrees"))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return json.dumps(value)
    return str(value)


def _emit(args: argparse.Namespace, header: list, rows: list) -> None:
    if args.format == "csv":
        lines = [",".join(header)]
        lines += [",".join(_cell(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = "".join(
            json.dumps(dict(zip(header, row))) + "\n" for row in rows
        )
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _resolve_t_max(value, pred: deg.CutoffPrediction) -> int:
    """AUTO horizon: six window-widths past t_star, at least ten steps."""
    if value is None or (isinstance(value, str) and value.lower() == "auto"):
        return math.ceil(pred.t_star + max(6.0 * pred.omega_star, 10.0))
    return int(value)


def _phi_prediction(t: float, pred: deg.CutoffPrediction) -> float:
    if pred.omega_star > 0.0:
        return deg.gaussian_tail((t - pred.t_star) / pred.omega_star)
    if t < pred.t_star:
        return 1.0
    return 0.5 if t == pred.t_star else 0.0


# --- commands -----------------------------------------------------------------


def cmd_predict(args) -> int:
    seq = _load_sequence(args)
    st = deg.stats(seq)
    pred = deg.cutoff_prediction(st)
    report = deg.sparsity_report(st)
    record = st.to_record()
    record["t_star"] = pred.t_star
    record["omega_star"] = pred.omega_star
    for eps in EPS_GRID:
        record[f"t_mix_pred_{eps}"] = pred.t_mix(eps)
    for key in ("degree_ratio", "sparse", "window_ratio", "window_ok",
                "lattice_ratio", "lattice_ok", "regular"):
        record[key] = report[key]
    _emit(args, list(record), [list(record.values())])
    return 0


def cmd_curve(args) -> int:
    seq = _load_sequence(args)
    st = deg.stats(seq)
    pred = deg.cutoff_prediction(st)
    t_max = _resolve_t_max(args.t_max, pred)
    space = HalfEdgeSpace.from_degrees(seq)
    starts = walks.default_starts(space, stream(args.seed, "starts"),
                                  n_sampled=args.starts)
    _check_budget(float(space.N) * (t_max + 1) * starts.size, args.budget)
    pairing = uniform_pairing(space, stream(args.seed, "pairing"))
    curve = walks.tv_curve(space, pairing, starts, t_max)
    header, rows = curve.to_table()
    header.insert(2, "phi_pred")
    for row in rows:
        row.insert(2, _phi_prediction(float(row[0]), pred))
    _emit(args, header, rows)
    return 0


def _profile_one(seq, seed: int, lambdas, pred, t_max: int):
    space = HalfEdgeSpace.from_degrees(seq)
    pairing = uniform_pairing(space, stream(seed, "pairing"))
    starts = walks.default_starts(space, stream(seed, "starts"))
    curve = walks.tv_curve(space, pairing, starts, t_max)
    rows = []
    for lam in lambdas:
        t_eval = pred.time_at(lam)
        d = curve.value_at(min(max(t_eval, 0.0), t_max))
        phi = deg.gaussian_tail(lam)
        rows.append([seed, lam, t_eval, d, phi, abs(d - phi)])
    return rows


def cmd_profile(args) -> int:
    mix = {int(k): int(v) for k, v in json.loads(args.mix).items()}
    scales = [int(s) for s in str(args.scales).split(",") if s != ""]
    lambdas = [float(s) for s in str(args.lambdas).split(",") if s != ""]
    seeds = [args.seed + i for i in range(args.seeds)]
    jobs = []
    total_ops = 0.0
    for scale in scales:
        seq = deg.degrees_from_counts({d: c * scale for d, c in mix.items()})
        st = deg.stats(seq)
        pred = deg.cutoff_prediction(st)
        t_max = _resolve_t_max(args.t_max, pred)
        total_ops += float(seq.N) * (t_max + 1) * 34 * len(seeds)
        for seed in seeds:
            jobs.append((scale, seq, seed, pred, t_max))
    _check_budget(total_ops, args.budget)
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(
                lambda j: _profile_one(j[1], j[2], lambdas, j[3], j[4]), jobs
            ))
    else:
        results = [_profile_one(seq, seed, lambdas, pred, t_max)
                   for _, seq, seed, pred, t_max in jobs]
    header = ["n", "N", "seed", "lambda", "t", "d", "phi", "abs_err"]
    rows = []
    for (scale, seq, _, _, _), chunk in zip(jobs, results):
        for row in chunk:
            rows.append([seq.n, seq.N] + row)
    _emit(args, header, rows)
    return 0


def cmd_coupling(args) -> int:
    seq = _load_sequence(args)
    space = HalfEdgeSpace.from_degrees(seq)
    _check_budget(float(args.replicates) * args.t, args.budget)
    report = cpl.failure_cdf_experiment(space, args.t, args.replicates, args.seed)
    flat = {k: v for k, v in report.items() if k != "reasons"}
    for reason, count in report["reasons"].items():
        flat[f"count_{reason}"] = count
    _emit(args, list(flat), [list(flat.values())])
    return 0 if report["pass"] else 1


def _resolve_theta(spec_value, st: deg.DegreeStats, t: int) -> float:
    if isinstance(spec_value, str):
        if spec_value == "clt-center":
            return math.exp(-st.mu * t)
        if spec_value == "log-over-n":
            return math.log(st.N) / st.N
        return float(spec_value)
    return float(spec_value)


def cmd_be(args) -> int:
    seq = _load_sequence(args)
    st = deg.stats(seq)
    _check_budget(float(args.samples) * args.t, args.budget)
    theta = _resolve_theta(args.theta, st, args.t)
    report = cpl.berry_esseen_check(
        st, seq, args.t, theta, args.samples, rng=stream(args.seed, "be")
    )
    _emit(args, list(report), [list(report.values())])
    return 0 if report["pass"] else 1


def cmd_conc(args) -> int:
    size = args.size
    if size % 2 != 0:
        raise NbcutoffError("--size must be even")
    if args.weights_file:
        weights = np.load(args.weights_file)
        if weights.shape != (size, size):
            raise NbcutoffError("--weights-file shape must match --size")
    else:
        weights = stream(args.seed, "conc-weights").random((size, size))
        np.fill_diagonal(weights, 0.0)
    fracs = [float(s) for s in str(args.a_frac).split(",") if s != ""]
    mean_sum, _ = expo._mean_and_theta(weights)
    exhaustive = size <= 10
    _check_budget(
        (105.0 * size if exhaustive else float(args.trials) * size) * len(fracs),
        args.budget,
    )
    rows = []
    ok = True
    for i, frac in enumerate(fracs):
        a = frac * mean_sum
        if exhaustive:
            rep = expo.exhaustive_lower_tail(weights, a)
        else:
            rep = expo.concentration_experiment(
                weights, a, args.trials, rng=stream(args.seed, "conc", i)
            )
        rep = {"a_frac": frac, **rep}
        ok = ok and rep["pass"]
        rows.append(rep)
    header = list(rows[0])
    _emit(args, header, [[r[k] for k in header] for r in rows])
    return 0 if ok else 1


def cmd_exposure(args) -> int:
    seq = _load_sequence(args)
    space = HalfEdgeSpace.from_degrees(seq)
    N = space.N
    w_min = expo.default_min_weight(N)
    _check_budget(float(args.runs) * (args.t / w_min + N), args.budget)
    theta = (expo.default_truncation(N) if args.theta in (None, "default")
             else float(args.theta))
    exact_check = N <= 64
    rows = []
    ok = True
    header = ["run", "x", "y", "tau", "frontier_x", "frontier_y",
              "within", "excess", "pt_lower", "exact", "pass"]
    for i in range(args.runs):
        r = stream(args.seed, "exposure", i)
        x = int(r.integers(N))
        y = int(r.integers(N - 1))
        if y >= x:
            y += 1
        result = expo.run_exposure(space, x, y, args.t, rng=r)
        ts = expo.truncated_sums(result, theta)
        pt_lower, completed = expo.completion_estimate(space, result, theta, r)
        exact = None
        passed = True
        if exact_check:
            dist = walks.distribution_at(space, completed, x, args.t)
            exact = float(dist.mass[completed.mate[y]])
            passed = pt_lower <= exact + 1e-12
        ok = ok and passed
        rows.append([i, x, y, result.tau, int(result.h_x.size),
                     int(result.h_y.size), ts.within, ts.excess,
                     pt_lower, exact, passed])
    _emit(args, header, rows)
    return 0 if ok else 1


def cmd_gen_degrees(args) -> int:
    if args.pmf is None or args.n is None:
        raise NbcutoffError("gen-degrees needs --pmf and --n")
    _check_budget(float(args.n), args.budget)
    pmf = {int(k): float(v) for k, v in json.loads(args.pmf).items()}
    seq = deg.sample_iid_degrees(pmf, args.n, rng=stream(args.seed, "gen-degrees"))
    if args.out:
        deg.save_degrees(args.out, seq, fmt=args.degree_format)
        record = deg.stats(seq).to_record()
        sys.stdout.write(json.dumps(record) + "\n")
    else:
        sys.stdout.write("\n".join(str(int(d)) for d in seq.degrees) + "\n")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nbcutoff",
        description="Mixing of the non-backtracking walk on configuration models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="degree stats and the predicted mixing window")
    _common_flags(p)
    _degree_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("curve", help="exact distance-to-uniform curve on one instance")
    _common_flags(p)
    _degree_flags(p)
    p.add_argument("--t-max", default=None, help='horizon (int or "auto")')
    p.add_argument("--starts", type=int, default=None, help="sampled starts (default 32)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("profile", help="rescaled distance profile across sizes")
    _common_flags(p)
    p.add_argument("--mix", type=str, default=None,
                   help='degree mix template as JSON counts, e.g. \'{"3":1,"4":1}\'')
    p.add_argument("--scales", type=str, default=None,
                   help="comma-separated template multipliers, one per size")
    p.add_argument("--seeds", type=int, default=None, help="replicates per size (default 5)")
    p.add_argument("--lambdas", type=str, default=None,
                   help="window coordinates (default -2,-1,0,1,2)")
    p.add_argument("--t-max", default=None, help='horizon (int or "auto")')
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("coupling", help="coupling failure-time CDF vs its bound")
    _common_flags(p)
    _degree_flags(p)
    p.add_argument("--t", type=int, default=None, help="steps (default 50)")
    p.add_argument("--replicates", type=int, default=None, help="default 10000")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("be", help="normal approximation check for log-weights")
    _common_flags(p)
    _degree_flags(p)
    p.add_argument("--t", type=int, default=None, help="steps (default 100)")
    p.add_argument("--theta", default=None,
                   help='threshold: float, "clt-center" (exp(-mu t)) or "log-over-n"')
    p.add_argument("--samples", type=int, default=None, help="default 100000")
    p.set_defaults(func=cmd_be)

    p = sub.add_parser("conc", help="pair-sum concentration vs the switch bound")
    _common_flags(p)
    p.add_argument("--size", type=int, default=None, help="index-set size (default 8)")
    p.add_argument("--trials", type=int, default=None,
                   help="Monte Carlo pairings when size > 10 (default 2000)")
    p.add_argument("--a-frac", type=str, default=None,
                   help="deviations as fractions of the mean (default 0.25,0.5,0.75)")
    p.add_argument("--weights-file", type=str, default=None,
                   help="optional .npy weight matrix")
    p.set_defaults(func=cmd_conc)

    p = sub.add_parser("exposure", help="exposure forests and completion bounds")
    _common_flags(p)
    _degree_flags(p)
    p.add_argument("--t", type=int, default=None, help="even horizon (default 4)")
    p.add_argument("--runs", type=int, default=None, help="default 10")
    p.add_argument("--theta", default=None,
                   help='pair-product truncation (float or "default")')
    p.set_defaults(func=cmd_exposure)

    p = sub.add_parser("gen-degrees", help="sample an IID degree sequence")
    _common_flags(p)
    _degree_flags(p)
    p.add_argument("--degree-format", choices=("lines", "counts"), default="lines")
    p.set_defaults(func=cmd_gen_degrees)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        _fill(args, seed=0, threads=1, format="csv", budget=DEFAULT_BUDGET)
        _fill(args, t=_default_t(args.command), replicates=10_000, samples=100_000,
              starts=32, seeds=5, runs=10, size=8, trials=2000,
              a_frac="0.25,0.5,0.75", lambdas="-2,-1,0,1,2",
              mix='{"3":1,"4":1}', scales="100,1000",
              theta=_default_theta(args.command))
        return args.func(args)
    except NbcutoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _default_t(command: str) -> int:
    return {"coupling": 50, "be": 100, "exposure": 4}.get(command, 0)


def _default_theta(command: str) -> str:
    return "clt-center" if command == "be" else "default"


if __name__ == "__main__":
    sys.exit(main())
