"""Command-line surface.

Subcommands: ``km`` (non-private curve and metrics), ``dp`` (one private
release), ``surrogate`` (dataset reconstruction from a stored probability
vector), ``collab`` (one collaboration run), ``experiment`` (Monte-Carlo
sweep from a JSON config), ``report`` (re-render stored results).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import io
from .collab import CollabConfig, _PARTITION_STREAM, make_partition, run_path
from .mechanisms import DPCountMatrix, DPProbability, DPSurvival
from .metrics import evaluate_fidelity, greenwood_variance, loglog_band
from .rng import NoiseSource, derive_seed
from .surrogate import generate_dataset
from .survival import (
    build_grid,
    count_events,
    counts_to_dataset,
    discretize,
    km_estimate,
    km_to_prob,
    prob_to_km,
)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    data = io.read_survival_csv(args.input, uncensored_only=not args.include_censored)
    t_max = args.t_max if args.t_max is not None else float(data.times.max())
    grid = build_grid(t_max, args.bin_size)
    return data, grid, discretize(data, grid)


def _write_report_table(report, out_dir: Path, stem: str, extra: dict) -> None:
    obj = dict(extra)
    obj["metrics"] = io.report_to_json(report)
    io.write_json(obj, out_dir / f"{stem}.json")
    flat = io.report_to_json(report)
    header, row = [], []
    for key in ("p", "median", "s25", "s50", "s75"):
        entry = flat[key]
        header += [key, f"{key}_lo", f"{key}_hi"]
        row += [io._cell(entry["value"]), io._cell(entry["ci"][0]), io._cell(entry["ci"][1])]
    with (out_dir / f"{stem}.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerow(row)


def cmd_km(args) -> int:
    data, grid, disc = _load(args)
    out = _out_dir(args)
    counts = count_events(disc, grid)
    curve = km_estimate(counts)
    band = loglog_band(curve, greenwood_variance(counts, curve), alpha=args.alpha)
    report = evaluate_fidelity(disc, disc, grid, alpha=args.alpha)
    io.emit_plotdata(curve, out / "km_curve.csv", band)
    _write_report_table(
        report,
        out,
        "km_table",
        {"input": str(args.input), "n": data.n, "bin_size": args.bin_size, "t_max": grid.t_max},
    )
    med = "undefined" if report.median is None else io._fmt(report.median)
    print(
        f"km: n={data.n} median={med} ci={report.median_ci} "
        f"s25={report.survival[0.25]:.4f} s50={report.survival[0.5]:.4f} s75={report.survival[0.75]:.4f}"
    )
    print(f"wrote {out / 'km_table.csv'}, {out / 'km_curve.csv'}")
    return 0


def cmd_dp(args) -> int:
    data, grid, disc = _load(args)
    out = _out_dir(args)
    counts = count_events(disc, grid)
    curve = km_estimate(counts)
    rng = NoiseSource(args.seed)
    n = data.n
    if args.method == "dp-surv":
        released = DPSurvival(epsilon=args.epsilon, k_fraction=args.k_fraction).release(
            curve, n, rng
        )
        artifact = io.curve_to_json(released)
        surrogate = generate_dataset(km_to_prob(released), n)
        released_curve = released
    elif args.method == "dp-prob":
        released = DPProbability(
            epsilon=args.epsilon, sensitivity_factor=args.sensitivity_factor
        ).release(km_to_prob(curve), n, rng)
        artifact = io.prob_to_json(released)
        surrogate = generate_dataset(released, n)
        released_curve = prob_to_km(released)
    else:
        released = DPCountMatrix(epsilon=args.epsilon).release(counts, rng)
        artifact = io.counts_to_json(released)
        surrogate = counts_to_dataset(released)
        released_curve = km_estimate(released)
    report = evaluate_fidelity(surrogate, disc, grid)
    io.write_json(artifact, out / "release.json")
    io.emit_plotdata(released_curve, out / "dp_curve.csv")
    _write_report_table(
        report,
        out,
        "dp_table",
        {"input": str(args.input), "method": args.method, "epsilon": args.epsilon, "seed": args.seed},
    )
    print(f"dp: method={args.method} epsilon={args.epsilon} p={report.p_value:.4f}")
    print(f"wrote {out / 'release.json'}, {out / 'dp_curve.csv'}, {out / 'dp_table.csv'}")
    return 0


def cmd_surrogate(args) -> int:
    prob = io.prob_from_json(io.read_json(args.probs))
    data = generate_dataset(prob, args.n)
    out = _out_dir(args)
    io.write_survival_csv(data, out / "surrogate.csv")
    print(f"surrogate: wrote {data.n} records to {out / 'surrogate.csv'}")
    return 0


def cmd_collab(args) -> int:
    data, grid, disc = _load(args)
    out = _out_dir(args)
    cfg = CollabConfig(
        epsilon=args.epsilon,
        bin_size=args.bin_size,
        t_max=grid.t_max,
        n_clients=args.n_clients,
        k_fraction=args.k_fraction,
        split=args.split,
        minority_fraction=args.minority_fraction,
    )
    partition = make_partition(disc, cfg, NoiseSource(derive_seed(args.seed, _PARTITION_STREAM)))
    result = run_path(args.path, partition, cfg, NoiseSource(derive_seed(args.seed, 0)), disc)
    io.emit_plotdata(result.curve, out / "collab_curve.csv")
    _write_report_table(
        result.report,
        out,
        "collab_run",
        {
            "input": str(args.input),
            "path": args.path,
            "epsilon": args.epsilon,
            "n_clients": args.n_clients,
            "shard_sizes": partition.sizes,
            "seed": args.seed,
        },
    )
    print(
        f"collab: path={args.path} epsilon={args.epsilon} "
        f"p={result.report.p_value:.4f} median={result.report.median}"
    )
    print(f"wrote {out / 'collab_run.csv'}, {out / 'collab_curve.csv'}")
    return 0


def cmd_experiment(args) -> int:
    from .experiment import run_experiment

    raw = io.read_json(args.config)
    cfg = io.resolve_experiment_config(raw)
    dataset = Path(cfg["dataset"])
    if not dataset.is_absolute():
        cfg["dataset"] = str((Path(args.config).resolve().parent / dataset).resolve())
    out = Path(
        args.out_dir
        or cfg["output_dir"]
        or os.environ.get("KMDP_OUT_DIR", ".")
    )
    out.mkdir(parents=True, exist_ok=True)
    results = run_experiment(cfg)
    io.write_json(results, out / "results.json")
    io.write_results_csv(results, out / "results.csv")
    print(f"experiment: {len(results['rows'])} rows over {cfg['runs']} runs each")
    print(f"wrote {out / 'results.json'}, {out / 'results.csv'}")
    return 0


def cmd_report(args) -> int:
    results = io.read_json(args.results)
    out = _out_dir(args)
    io.write_results_csv(results, out / "results.csv")
    print(f"report: re-rendered {out / 'results.csv'}")
    return 0


def _add_common_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="dataset CSV (duration,event)")
    p.add_argument("--bin-size", "--b", type=float, default=1.0, help="grid bin width")
    p.add_argument("--t-max", type=float, default=None, help="study horizon (default: data max)")
    p.add_argument(
        "--include-censored",
        action="store_true",
        help="keep censored records (default drops them)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmdp", description="Private and collaborative Kaplan-Meier estimation"
    )
    default_out = os.environ.get("KMDP_OUT_DIR", ".")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("km", help="non-private Kaplan-Meier curve and metrics")
    _add_common_input(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out-dir", default=default_out)
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("dp", help="one private release of one mechanism")
    _add_common_input(p)
    p.add_argument("--method", required=True, choices=["dp-surv", "dp-prob", "dp-matrix"])
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--k-fraction", type=float, default=io.DEFAULT_K_FRACTION)
    p.add_argument("--sensitivity-factor", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=default_out)
    p.set_defaults(func=cmd_dp)

    p = sub.add_parser("surrogate", help="reconstruct a dataset from a stored probability vector")
    p.add_argument("--probs", required=True, help="prob-mass JSON artifact")
    p.add_argument("--n", type=int, required=True, help="population size to generate")
    p.add_argument("--out-dir", default=default_out)
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("collab", help="one collaboration run over simulated clients")
    _add_common_input(p)
    p.add_argument("--path", required=True, choices=list("ABCDEFM"))
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n-clients", type=int, default=10)
    p.add_argument("--k-fraction", type=float, default=io.DEFAULT_K_FRACTION)
    p.add_argument("--split", choices=["even", "uneven"], default="even")
    p.add_argument("--minority-fraction", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=default_out)
    p.set_defaults(func=cmd_collab)

    p = sub.add_parser("experiment", help="full Monte-Carlo sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None, help="overrides the config's output_dir")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="re-render stored experiment results")
    p.add_argument("--results", required=True, help="results.json from experiment")
    p.add_argument("--out-dir", default=default_out)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
