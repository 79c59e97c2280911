"""Command-line entry point.

Subcommands: train (one experiment from a config file), sweep-bandit (goal
count sweep), ablate (the six sharing variants), diag (checkpoint
diagnostics), sizecalc (exact problem-size arithmetic). CRADOL_OUT sets the
default output root.
"""

from __future__ import annotations

import argparse
import sys

from .. import sizecalc as sc
from .config import ExperimentConfig
from .runner import default_out_root, diag_report, run_ablations, run_experiment, sweep_bandit


def _add_common(p):
    p.add_argument("--config", required=True, help="flat key=value experiment config file")
    p.add_argument("--out", default=None, help=f"output root (default $CRADOL_OUT or {default_out_root()!r})")
    p.add_argument("--workers", type=int, default=None, help="parallel seed processes (default: min(seeds, cpus))")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cradol", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one experiment over its seed list")
    _add_common(p_train)
    p_train.add_argument("--seed", type=int, default=None, help="train this single seed instead of the config's list")

    p_sweep = sub.add_parser("sweep-bandit", help="goal-count sweep: cradol vs oc")
    _add_common(p_sweep)
    p_sweep.add_argument("--goals", default="2,5,25", help="comma-separated goal counts")

    p_abl = sub.add_parser("ablate", help="run the six sharing-ablation variants")
    _add_common(p_abl)

    p_diag = sub.add_parser("diag", help="mechanism map + option correlation for a checkpoint")
    p_diag.add_argument("--checkpoint", required=True)
    p_diag.add_argument("--out", default=None)

    p_size = sub.add_parser("sizecalc", help="exact problem-size table and ordering check")
    p_size.add_argument("--preset", choices=sorted(sc.PRESETS), default=None)
    p_size.add_argument("--actions", type=int, default=None)
    p_size.add_argument("--beliefs", type=int, default=None)
    p_size.add_argument("--options", type=int, default=None)
    p_size.add_argument("--subsets", default=None, help="comma-separated per-option belief subset sizes")
    p_size.add_argument("--option-beliefs", type=int, default=None, help="belief size for the policy over options")

    args = parser.parse_args(argv)

    if args.command == "sizecalc":
        if args.preset:
            spec = sc.PRESETS[args.preset]
        else:
            missing = [n for n in ("actions", "beliefs", "options", "subsets") if getattr(args, n) is None]
            if missing:
                parser.error(f"sizecalc needs --preset or all of: {', '.join('--' + m for m in missing)}")
            subsets = tuple(int(s) for s in args.subsets.split(","))
            option_beliefs = args.option_beliefs if args.option_beliefs is not None else min(subsets, default=0)
            spec = sc.ProblemSpec(
                actions=args.actions,
                beliefs=args.beliefs,
                options=args.options,
                option_subsets=subsets,
                option_policy_beliefs=option_beliefs,
            )
        for line in sc.report_lines(spec):
            print(line)
        return 0

    if args.command == "diag":
        out = args.out or default_out_root()
        report = diag_report(args.checkpoint, out)
        print(f"wrote diagnostics for {report['domain']}/{report['algorithm']} to {out}")
        for o, mechs in enumerate(report["active_sets"]):
            print(f"option {o}: mechanisms {mechs}")
        return 0

    exp = ExperimentConfig.load(args.config)
    if args.command == "train":
        if args.seed is not None:
            exp.seeds = (args.seed,)
        summary = run_experiment(exp, out_dir=args.out, workers=args.workers, quiet=False)
        print(f"run dir: {summary['run_dir']}")
        return 0 if not summary["incomplete"] else 1

    if args.command == "sweep-bandit":
        goals = [int(g) for g in args.goals.split(",")]
        table = sweep_bandit(exp, goals, out_dir=args.out, workers=args.workers, quiet=False)
        for alg, count, mean, half in table:
            print(f"{alg:8s} goals={count:<3d} auc={mean:.2f} +- {half:.2f}")
        return 0

    if args.command == "ablate":
        results = run_ablations(exp, out_dir=args.out, workers=args.workers, quiet=False)
        for alg, summary in results.items():
            print(f"{alg:24s} hash={summary['config_hash'][:12]} v_bar={summary['v_bar_mean']:.3f}")
        return 0 if all(not s["incomplete"] for s in results.values()) else 1

    return 2


if __name__ == "__main__":
    sys.exit(main())
