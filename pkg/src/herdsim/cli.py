"""Command-line entry point.

Verbs: sweep, form, compare, meanfield, audit.  Experiment verbs require
--config, --seed and --out so that no hidden default can affect results;
--set key=value overrides always beat file values.  Exit codes: 0 success,
1 configuration error (message names the key), 2 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, meanfield
from .config import ConfigError, apply_overrides, load_config
from .formation import UtilityModel, replay_events
from .graph import Graph, is_pairwise_stable
from .signals import SignalStructure


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herdsim")
    sub = parser.add_subparsers(dest="verb", required=True)

    def experiment(name, doc):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--seed", required=True, type=int, help="master seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker cap; outputs do not depend on it")
        return p

    experiment("sweep", "density sweep: runs.csv, contagion.csv, fvi_grid.csv")
    experiment("form", "formation ensemble: graphs, event logs, degrees.csv")
    experiment("compare", "endogenous vs ER ensembles: runs.csv, contagion_bias.csv, degrees.csv")

    mf = sub.add_parser("meanfield", help="fixed points of the self-consistency map")
    mf.add_argument("--mu0", required=True, type=float)
    mf.add_argument("--mu1", required=True, type=float)
    mf.add_argument("--sigma2", required=True, type=float)
    mf.add_argument("--out", default=None, help="also write curve/fixed-point CSVs here")

    audit = sub.add_parser("audit", help="pairwise-stability audit of a graph file")
    audit.add_argument("--graph", required=True, help="edge-list file")
    audit.add_argument("--config", required=True, help="profile configuration")
    audit.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return parser


def _load(args):
    cfg = load_config(args.config)
    return apply_overrides(cfg, args.set)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    records = harness.run_sweep(cfg, args.seed, args.jobs)
    harness.write_runs_csv(records, out / "runs.csv")
    harness.write_contagion_csv(cfg, records, out / "contagion.csv")
    harness.write_fvi_csv(cfg.label(), records, out / "fvi_grid.csv")
    harness.write_manifest(out / "manifest.txt", cfg, args.seed)
    print(f"sweep: {len(records)} runs -> {out}")
    return 0


def _cmd_form(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    results = harness.run_formation_ensemble(cfg, args.seed, args.jobs)
    graph_dir = out / "graphs"
    log_dir = out / "logs"
    graph_dir.mkdir(exist_ok=True)
    log_dir.mkdir(exist_ok=True)
    for idx, res in enumerate(results):
        res.graph.save(graph_dir / f"net_{idx:04d}.edges")
        with open(log_dir / f"net_{idx:04d}.log", "w", encoding="utf-8") as fh:
            fh.write(res.event_log_text())
    rows = harness._degree_rows(cfg.label("endo"), [r.graph for r in results], cfg.n_informed)
    harness.write_degrees_csv(rows, out / "degrees.csv")
    densities = [r.graph.density() for r in results]
    harness.write_manifest(
        out / "manifest.txt", cfg, args.seed,
        extra={"n_networks": len(results), "mean_density": repr(float(np.mean(densities)))},
    )
    print(f"form: {len(results)} networks, mean density {np.mean(densities):.4f} -> {out}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    result = harness.compare_ensembles(cfg, args.seed, args.jobs)
    harness.write_runs_csv(result.endo_records + result.er_records, out / "runs.csv")
    harness.write_bias_csv(result.bias_rows, out / "contagion_bias.csv")
    harness.write_degrees_csv(result.degree_rows, out / "degrees.csv")
    harness.write_manifest(
        out / "manifest.txt", cfg, args.seed,
        extra={
            "endo_mean_density": repr(result.endo_mean_density),
            "er_density": repr(result.er_density),
        },
    )
    endo_mean = np.mean([r.x_final for r in result.endo_records])
    er_mean = np.mean([r.x_final for r in result.er_records])
    print(f"compare: endo mean x_final {endo_mean:.4f} vs er {er_mean:.4f} -> {out}")
    return 0


def _cmd_meanfield(args) -> int:
    sig = SignalStructure(args.mu0, args.mu1, math.sqrt(args.sigma2))
    points = meanfield.fixed_points(sig)
    for fp in points:
        print(f"q* = {fp.q_star:.6f}  [{fp.stability}]")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        samples = meanfield.curve_samples(sig)
        lines = ["q,prob_one"]
        lines.extend(f"{q!r},{p!r}" for q, p in samples)
        (out / "meanfield_curve.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        lines = ["q_star,stability"]
        lines.extend(f"{fp.q_star!r},{fp.stability}" for fp in points)
        (out / "meanfield_fixed_points.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_audit(args) -> int:
    cfg = apply_overrides(load_config(args.config), args.set)
    g = Graph.load(args.graph)
    profiles = harness.endo_profiles(cfg)
    if len(profiles) != g.n:
        raise ConfigError(
            f"config population size n_agents={len(profiles)} does not match graph n={g.n}"
        )
    model = UtilityModel(cfg.q_prime)
    from .formation import expected_utility

    def utility(i, neighborhood):
        return expected_utility(profiles[i], [profiles[m] for m in neighborhood], model)

    stable, violations = is_pairwise_stable(g, utility, [p.cost for p in profiles])
    n_delete = sum(1 for v in violations if v[2] == "delete")
    n_add = sum(1 for v in violations if v[2] == "add")
    print(f"pairwise stable: {stable}")
    print(f"deletion violations: {n_delete}")
    print(f"addition violations: {n_add}")
    for i, j, kind in violations:
        print(f"  {kind}: ({i}, {j})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "form": _cmd_form,
        "compare": _cmd_compare,
        "meanfield": _cmd_meanfield,
        "audit": _cmd_audit,
    }
    try:
        return handlers[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
