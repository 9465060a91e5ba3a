"""Command-line entry point: run, verify, bench, and opt subcommands."""

from __future__ import annotations

import argparse
import sys

from . import config as configmod
from .config import ConfigError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subcoord",
        description="Online multi-agent submodular coordination experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, action="append", help="override config seeds (repeatable)")
    p_run.add_argument("--out", help="output directory (overrides config and SUBCOORD_OUT)")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel seed workers")

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=["properties", "stagewise", "regret", "all"])
    p_verify.add_argument("--seed", type=int, default=0)

    p_bench = sub.add_parser("bench", help="time core components")
    p_bench.add_argument("config", nargs="?", help="optional config (sizes ignored)")
    p_bench.add_argument("--agents", type=int, default=4)

    p_opt = sub.add_parser("opt", help="dump the myopic brute-force optimum rollout")
    p_opt.add_argument("config")
    p_opt.add_argument("--rounds", type=int, default=None)
    p_opt.add_argument("--out", help="write CSV here instead of stdout")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            from .runner import run

            cfg = configmod.load(args.config)
            paths = run(cfg, out_dir=args.out, seeds=args.seed, jobs=args.jobs)
            for p in paths:
                print(p)
            return 0
        if args.command == "verify":
            from .verify import SUITES, run_suite

            names = list(SUITES) if args.suite == "all" else [args.suite]
            checks = run_suite(names, root_seed=args.seed)
            print("check,measured,bound,status")
            for c in checks:
                print(c.line())
            ok = all(c.passed for c in checks)
            print(f"overall,{int(ok)},1,{'pass' if ok else 'FAIL'}")
            return 0 if ok else 1
        if args.command == "bench":
            from .bench import bench_table, format_table

            print(format_table(bench_table(max_agents=args.agents)), end="")
            return 0
        if args.command == "opt":
            from .runner import opt_dump

            cfg = configmod.load(args.config)
            text = opt_dump(cfg, rounds=args.rounds)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                print(text, end="")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
