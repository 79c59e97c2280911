"""Experiment orchestration: seeded multi-run campaigns and their reports.

Seeds run as independent jobs (process-per-seed when workers allow), each
writing its own curve CSV, checkpoint, and diagnostics under the run
directory. Aggregation always recomputes summary statistics from the
per-seed CSV files, so the emitted summary and the raw data cannot drift.
"""

from __future__ import annotations

import csv
import json
import multiprocessing as mp
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from ..trainer import Trainer, read_curve_csv
from . import diagnostics, plots
from .config import ABLATION_IDS, ExperimentConfig
from .metrics import auc, v_bar

DEFAULT_BANDIT_STEPS = {2: 30_000, 5: 40_000, 25: 60_000}


def default_out_root():
    return os.environ.get("CRADOL_OUT", "runs")


def _pin_blas_threads():
    # worker processes inherit these; tiny matrices gain nothing from threads
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")


def _run_seed(payload: dict) -> dict:
    """Train one seed and write its artifacts; runs in a worker process."""
    exp = ExperimentConfig.from_text(payload["exp_text"])
    seed = payload["seed"]
    seed_dir = payload["seed_dir"]
    os.makedirs(seed_dir, exist_ok=True)
    net_cfg, tr_cfg = exp.resolve()
    trainer = Trainer(net_cfg, tr_cfg, domain=exp.domain, seed=seed)

    stop = None
    threshold = payload.get("stop_at_return")
    if threshold is not None:
        stop = lambda rows: rows[-1].mean_return >= threshold

    trainer.train(csv_path=os.path.join(seed_dir, "curve.csv"), stop_condition=stop)
    trainer.save_checkpoint(
        os.path.join(seed_dir, "checkpoint.bin"),
        extra={"algorithm": exp.algorithm, "config_hash": payload["config_hash"]},
    )

    mm = diagnostics.mechanism_map(trainer.net)
    diag = {
        "attention": mm["attention"].tolist(),
        "active_sets": mm["active_sets"],
        "option_correlation": diagnostics.option_correlation(
            trainer.net, probe_obs=diagnostics.probe_observations(exp.domain)
        ).tolist(),
    }
    with open(os.path.join(seed_dir, "diagnostics.json"), "w") as f:
        json.dump(diag, f, indent=1)
    return {"seed": seed, "ok": True}


def run_experiment(exp: ExperimentConfig, out_dir=None, workers=None, stop_at_return=None, quiet=True):
    """Train every seed of one experiment; returns the summary dict.

    Writes, under <out>/<domain>_<algorithm>/: a frozen config copy and its
    hash, per-seed curve.csv + checkpoint.bin + diagnostics.json, per_seed.csv,
    summary.csv, and curves.svg.
    """
    run_dir = os.path.join(out_dir or exp.out or default_out_root(), exp.name)
    os.makedirs(run_dir, exist_ok=True)
    cfg_hash = exp.hash()
    exp.save(os.path.join(run_dir, "config.txt"))
    with open(os.path.join(run_dir, "config_hash.txt"), "w") as f:
        f.write(cfg_hash + "\n")

    payloads = [
        {
            "exp_text": exp.to_text(),
            "seed": seed,
            "seed_dir": os.path.join(run_dir, f"seed{seed}"),
            "stop_at_return": stop_at_return,
            "config_hash": cfg_hash,
        }
        for seed in exp.seeds
    ]

    workers = workers if workers is not None else min(len(exp.seeds), os.cpu_count() or 1)
    failures = {}
    if workers > 1 and len(exp.seeds) > 1:
        _pin_blas_threads()
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as ex:
            futs = {ex.submit(_run_seed, p): p["seed"] for p in payloads}
            for fut, seed in futs.items():
                try:
                    fut.result()
                except Exception:
                    failures[seed] = traceback.format_exc()
    else:
        for p in payloads:
            try:
                _run_seed(p)
            except Exception:
                failures[p["seed"]] = traceback.format_exc()

    # aggregate strictly from the per-seed CSV files, in seed order
    curves = {}
    for seed in exp.seeds:
        if seed in failures:
            continue
        curves[seed] = read_curve_csv(os.path.join(run_dir, f"seed{seed}", "curve.csv"))

    per_seed_path = os.path.join(run_dir, "per_seed.csv")
    with open(per_seed_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["seed", "v_bar", "auc", "n_evals", "final_env_step"])
        for seed, rows in curves.items():
            w.writerow([seed, repr(v_bar(rows)), repr(auc(rows)), len(rows), rows[-1].env_step])

    vbars = [v_bar(rows) for rows in curves.values()]
    aucs = [auc(rows) for rows in curves.values()]
    summary = {
        "domain": exp.domain,
        "algorithm": exp.algorithm,
        "n_seeds": len(curves),
        "v_bar_mean": float(np.mean(vbars)) if vbars else float("nan"),
        "v_bar_std": float(np.std(vbars)) if vbars else float("nan"),
        "auc_mean": float(np.mean(aucs)) if aucs else float("nan"),
        "auc_std": float(np.std(aucs)) if aucs else float("nan"),
        "config_hash": cfg_hash,
        "incomplete": bool(failures),
        "failed_seeds": sorted(failures),
    }
    with open(os.path.join(run_dir, "summary.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(list(summary))
        w.writerow(
            [
                summary["domain"], summary["algorithm"], summary["n_seeds"],
                repr(summary["v_bar_mean"]), repr(summary["v_bar_std"]),
                repr(summary["auc_mean"]), repr(summary["auc_std"]),
                summary["config_hash"], summary["incomplete"],
                ";".join(str(s) for s in summary["failed_seeds"]),
            ]
        )
    if failures:
        with open(os.path.join(run_dir, "failures.txt"), "w") as f:
            for seed, tb in failures.items():
                f.write(f"== seed {seed}\n{tb}\n")
    if curves:
        plots.save_learning_curves(
            {exp.algorithm: list(curves.values())},
            os.path.join(run_dir, "curves.svg"),
            title=f"{exp.domain}: {exp.algorithm}",
        )
    summary["curves"] = curves
    summary["run_dir"] = run_dir
    if not quiet:
        print(
            f"[{exp.name}] seeds={summary['n_seeds']} "
            f"v_bar={summary['v_bar_mean']:.3f}+-{summary['v_bar_std']:.3f} "
            f"auc={summary['auc_mean']:.2f}+-{summary['auc_std']:.2f}"
        )
    return summary


def sweep_bandit(base: ExperimentConfig, goal_counts, out_dir=None, workers=None, quiet=True):
    """CRADOL vs the single-mechanism baseline across spurious-goal counts.

    Each goal count gets its own training budget (more goals, longer runs)
    unless the base config pins trainer.total_steps explicitly.
    """
    out_root = out_dir or base.out or default_out_root()
    sweep_dir = os.path.join(out_root, "bandit_sweep")
    os.makedirs(sweep_dir, exist_ok=True)
    table = []
    curve_labels = {}
    for count in goal_counts:
        for alg in ("cradol", "oc"):
            overrides = dict(base.trainer)
            if "total_steps" not in overrides:
                overrides["total_steps"] = DEFAULT_BANDIT_STEPS.get(int(count), 50_000)
            exp = replace(base, domain=f"bandit-{count}", algorithm=alg, trainer=overrides)
            summary = run_experiment(exp, out_dir=sweep_dir, workers=workers, quiet=quiet)
            aucs = [auc(rows) for rows in summary["curves"].values()]
            n = max(1, len(aucs))
            half = 1.96 * float(np.std(aucs)) / np.sqrt(n) if aucs else float("nan")
            table.append((alg, int(count), float(np.mean(aucs)) if aucs else float("nan"), half))
            curve_labels[f"{alg}-{count}goals"] = list(summary["curves"].values())

    with open(os.path.join(sweep_dir, "sweep.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["algorithm", "goal_count", "auc_mean", "auc_ci95_half"])
        for row in table:
            w.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
    plots.save_bandit_sweep(table, os.path.join(sweep_dir, "sweep.svg"))
    return table


def run_ablations(base: ExperimentConfig, out_dir=None, workers=None, quiet=True):
    """Train the six sharing variants of the architecture on one domain."""
    out_root = out_dir or base.out or default_out_root()
    abl_dir = os.path.join(out_root, "ablations")
    os.makedirs(abl_dir, exist_ok=True)
    results = {}
    all_curves = {}
    for alg in ABLATION_IDS:
        exp = replace(base, algorithm=alg)
        summary = run_experiment(exp, out_dir=abl_dir, workers=workers, quiet=quiet)
        results[alg] = summary
        if summary["curves"]:
            all_curves[alg] = list(summary["curves"].values())
    with open(os.path.join(abl_dir, "ablations.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["algorithm", "config_hash", "v_bar_mean", "v_bar_std", "auc_mean", "auc_std"])
        for alg in ABLATION_IDS:
            s = results[alg]
            w.writerow(
                [alg, s["config_hash"], repr(s["v_bar_mean"]), repr(s["v_bar_std"]), repr(s["auc_mean"]), repr(s["auc_std"])]
            )
    if all_curves:
        plots.save_learning_curves(
            all_curves, os.path.join(abl_dir, "ablations.svg"), title=f"{base.domain}: sharing ablations"
        )
    return results


def diag_report(checkpoint_path, out_dir):
    """Render mechanism map, option correlation, and option traces for a checkpoint."""
    os.makedirs(out_dir, exist_ok=True)
    net, cfg = diagnostics.net_from_checkpoint(checkpoint_path)
    mm = diagnostics.mechanism_map(net)
    corr = diagnostics.option_correlation(net, probe_obs=diagnostics.probe_observations(cfg["domain"]))
    report = {
        "checkpoint": os.path.abspath(checkpoint_path),
        "domain": cfg.get("domain"),
        "algorithm": cfg.get("algorithm"),
        "attention": mm["attention"].tolist(),
        "active_sets": mm["active_sets"],
        "option_correlation": corr.tolist(),
    }
    trajectories = diagnostics.option_trajectories(checkpoint_path, episodes=3)
    report["option_trajectories"] = trajectories
    with open(os.path.join(out_dir, "diagnostics.json"), "w") as f:
        json.dump(report, f, indent=1)
    plots.save_mechanism_map(mm["attention"], mm["active_sets"], os.path.join(out_dir, "mechanism_map.svg"))
    plots.save_correlation(corr, os.path.join(out_dir, "option_correlation.svg"))
    plots.save_option_trajectories(trajectories, os.path.join(out_dir, "option_trajectories.svg"))
    return report
