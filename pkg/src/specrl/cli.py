"""Command-line entry points.

Subcommands: train, eval, fuzz-progression, enumerate-tasks,
export-embeddings.  The CLI is a thin wrapper over the library; everything
it does is available programmatically (see the demos directory).
"""

from __future__ import annotations

import argparse
import csv
import sys

from .config import load_config
from .curriculum import enumerate_tasks
from .fuzz import fuzz_progression
from .harness import evaluate_checkpoint, export_embeddings, train
from .ltl import to_string
from .scenarios import SCENARIO_NAMES, make_scenario


def _cmd_train(args) -> int:
    config = load_config(args.config)
    result = train(config, seed=args.seed, out_dir=args.out, quiet=args.quiet)
    print(f"done: {result['run_id']} steps={result['env_steps']} "
          f"updates={result['updates']} level={result['level']} "
          f"wall_clock={result['wall_clock_s']:.0f}s")
    print(f"metrics: {result['metrics']}")
    print(f"checkpoint: {result['checkpoint']}")
    return 0


def _cmd_eval(args) -> int:
    rows, mean, mean_len = evaluate_checkpoint(
        args.ckpt, episodes_per_task=args.episodes, seed=args.seed,
        tasks=args.tasks)
    writer = csv.writer(open(args.out, "w", newline="") if args.out else sys.stdout)
    writer.writerow(["level", "task", "success_rate"])
    for level, task, rate in rows:
        writer.writerow([level, task, f"{rate:.4f}"])
    print(f"# mean_success={mean:.4f} mean_episode_length={mean_len:.1f}",
          file=sys.stderr)
    return 0


def _cmd_fuzz(args) -> int:
    report = fuzz_progression(count=args.count, max_depth=args.max_depth,
                              max_symbols=args.max_symbols, seed=args.seed)
    print(report.summary())
    for mismatch in report.mismatches[:20]:
        print(mismatch)
    return 0 if report.ok else 1


def _cmd_enumerate(args) -> int:
    scenario = make_scenario(args.scenario)
    for task in enumerate_tasks(scenario, args.level):
        print(f"{args.level}\t{to_string(task, scenario.symbols)}")
    return 0


def _cmd_export(args) -> int:
    info = export_embeddings(args.ckpt, episodes=args.episodes,
                             seed=args.seed, out_path=args.out)
    print(f"wrote {info['rows']} rows x {info['columns']} columns to {info['path']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrl",
        description="Train and evaluate policies that follow co-safe LTL "
                    "instructions with runtime-adjustable symbol grounding.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run one seeded training run")
    p.add_argument("--config", required=True, help="run config JSON file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint task by task")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--episodes", type=int, default=50,
                   help="episodes per task")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tasks", choices=("all", "available"), default="all")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("fuzz-progression",
                       help="cross-check progression against the trace oracle")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-symbols", type=int, default=6)
    p.set_defaults(func=_cmd_fuzz)

    p = sub.add_parser("enumerate-tasks",
                       help="print the level-tagged task set of a scenario")
    p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("export-embeddings",
                       help="dump per-step state+task embeddings to CSV")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="embeddings.csv")
    p.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
