"""Command line interface.

Subcommands
-----------
gen       generate a synthetic corpus (with ground-truth sidecar)
discover  find reward-explaining regions in a corpus, write a JSON report
oracle    exhaustively score a (center, radius) grid, write a CSV table
eval      score a report against a corpus (and optionally ground truth)
report    render a report as a table and plot-ready CSV files

Exit codes: 0 success; 2 input error (schema, dimensions, bad parameters);
3 degenerate labels (all rewards identical); 4 center-seeding failure;
1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as corpus_io
from .config import make_discovery_config, parse_assignment, parse_config_file
from .core import Region
from .discovery import discover, evaluate_report
from .errors import InvalidParameterError, RewardRegionsError
from .oracle import grid_search, write_csv as write_oracle_csv
from .synth import generate, make_spec


def _parse_region_flag(text: str, dim: int) -> Region:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != dim + 1:
        raise InvalidParameterError(
            f"--region needs {dim + 1} comma-separated numbers for dim {dim} "
            f"(x0,..,x{dim - 1},radius), got {text!r}"
        )
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise InvalidParameterError(f"--region values must be numbers, got {text!r}") from None
    return Region(center=np.array(nums[:-1]), radius=nums[-1])


def _cmd_gen(args) -> int:
    extra = {}
    if args.horizon is not None:
        extra["horizon"] = args.horizon
    if args.step_scale is not None:
        extra["step_scale"] = args.step_scale
    regions = None
    if args.region:
        regions = [_parse_region_flag(r, args.dim) for r in args.region]
    spec = make_spec(
        args.task,
        dim=args.dim,
        regions=regions,
        n_traj=args.traj,
        label_noise=args.noise,
        seed=args.seed,
        with_actions=args.with_actions,
        **extra,
    )
    dataset, truth = generate(spec)
    corpus_io.write_corpus(args.out, dataset, meta={"generator": spec.to_dict()})
    truth_path = args.truth if args.truth else args.out + ".truth.json"
    corpus_io.write_truth(truth_path, truth)
    frac = truth["success_fraction"]
    print(f"wrote {len(dataset)} trajectories (dim {dataset.dim}) to {args.out}")
    if spec.kind != "null":
        print(f"pre-noise success fraction: {frac:.3f}")
    print(f"truth sidecar: {truth_path}")
    return 0


def _cmd_discover(args) -> int:
    file_values = parse_config_file(args.config) if args.config else None
    set_values: dict = {}
    for item in args.set or []:
        if "=" not in item:
            raise InvalidParameterError(
                f"--set expects key=value, got {item!r}"
            )
        key, value = item.split("=", 1)
        name, typed = parse_assignment(key, value)
        set_values[name] = typed
    if file_values:
        merged_file = dict(file_values)
        merged_file.update(set_values)
    else:
        merged_file = set_values
    cfg = make_discovery_config(
        merged_file,
        n_regions=args.m,
        n_restarts=args.restarts,
        seed=args.seed,
        reward_clusters=args.reward_clusters,
        jobs=args.jobs,
        ig_floor=args.ig_floor,
    )
    dataset = corpus_io.read_corpus(args.data)
    report = discover(dataset, config=cfg, trace_dir=args.trace_dir)
    corpus_io.write_report(args.out, report)
    sys.stdout.write(report.to_table())
    print(f"report: {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    dataset = corpus_io.read_corpus(args.data)
    rewards = dataset.rewards
    n_distinct = np.unique(rewards).shape[0]
    k = args.reward_clusters if args.reward_clusters is not None else min(2, n_distinct)
    from .rewards import discretize_rewards

    labels, alphabet = discretize_rewards(rewards, k=k)
    frozen = ()
    if args.frozen_report:
        frozen = corpus_io.read_report(args.frozen_report).regions
    result = grid_search(dataset, labels, n_radii=args.n_radii, frozen=frozen,
                         n_labels=alphabet.size)
    meta = {
        "data": str(args.data),
        "reward_clusters": int(k),
        "n_frozen": len(frozen),
        "alphabet_values": [float(v) for v in alphabet.values],
    }
    write_oracle_csv(result, args.out, meta=meta, top=args.top)
    center = ", ".join(f"{c:.6g}" for c in result.region.center)
    print(f"best: H = {result.value:.6f} nats "
          f"(IG {result.information_gain:.6f}) at center ({center}) "
          f"radius {result.region.radius:.6g}")
    print(f"table: {args.out}")
    return 0


def _cmd_eval(args) -> int:
    report = corpus_io.read_report(args.report)
    dataset = corpus_io.read_corpus(args.data)
    truth = corpus_io.read_truth(args.truth) if args.truth else None
    result = evaluate_report(report, dataset, truth)
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"eval: {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_report(args) -> int:
    report = corpus_io.read_report(args.report)
    sys.stdout.write(report.to_table())
    if args.regions_csv:
        corpus_io.write_regions_csv(args.regions_csv, report)
        print(f"regions csv: {args.regions_csv}")
    if args.points_csv:
        if not args.data:
            raise InvalidParameterError("--points-csv requires --data")
        dataset = corpus_io.read_corpus(args.data)
        corpus_io.write_points_csv(args.points_csv, dataset)
        print(f"points csv: {args.points_csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rewardregions",
        description="Discover hyper-spherical state-space regions that "
                    "explain terminal rewards.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--task", required=True, choices=("paint", "door", "null"))
    p.add_argument("--out", required=True, help="corpus output path (JSON lines)")
    p.add_argument("--truth", help="truth sidecar path (default: <out>.truth.json)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--traj", type=int, default=200, help="number of trajectories")
    p.add_argument("--horizon", type=int, help="states per trajectory")
    p.add_argument("--step-scale", type=float, help="random-walk step stddev")
    p.add_argument("--noise", type=float, default=0.0, help="label flip probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--region", action="append",
                   help="planted region as x0,..,xd-1,radius (repeatable)")
    p.add_argument("--with-actions", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("discover", help="discover regions in a corpus")
    p.add_argument("--data", required=True, help="corpus path")
    p.add_argument("--out", required=True, help="report output path (JSON)")
    p.add_argument("--m", type=int, help="number of regions (default 1)")
    p.add_argument("--restarts", type=int, help="optimizer restarts per stage (default 8)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--reward-clusters", type=int,
                   help="reward alphabet size (default: 2, capped at distinct rewards)")
    p.add_argument("--jobs", type=int, help="worker threads for restarts (default 1)")
    p.add_argument("--ig-floor", type=float,
                   help="stop early when a stage gains fewer nats than this")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--trace-dir", help="write per-restart optimization traces here")
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("oracle", help="exhaustive grid search (reference)")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--n-radii", type=int, default=32)
    p.add_argument("--reward-clusters", type=int)
    p.add_argument("--frozen-report",
                   help="treat this report's regions as frozen variables")
    p.add_argument("--top", type=int, help="write only the best N rows")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("eval", help="score a report against a corpus")
    p.add_argument("--report", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--truth", help="ground-truth sidecar from gen")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="render a report")
    p.add_argument("--report", required=True)
    p.add_argument("--data", help="corpus path (for --points-csv)")
    p.add_argument("--points-csv", help="write one row per state")
    p.add_argument("--regions-csv", help="write one row per region")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RewardRegionsError as e:
        print(f"{e.slug}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"io: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
