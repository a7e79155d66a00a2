"""Experiment orchestration: seeded sweeps, ensemble comparisons, CSV output.

Reproducibility contract: every run's generator is seeded by a pure
function of (master seed, stream id, two run coordinates), so sweeps can be
executed with any worker count, in any order, and still emit byte-identical
CSV files.  The mixing function is splitmix64 applied per coordinate.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .config import SimulationConfig
from .formation import AgentProfile, FormationResult, UtilityModel, form_network
from .graph import Graph, er_random
from .learning import (
    PopulationState,
    contagion_flag,
    convergence_time,
    init_actions,
    run,
)
from .signals import SignalStructure

__all__ = [
    "RunRecord",
    "CompareResult",
    "derive_seed",
    "run_sweep",
    "estimate_contagion_prob",
    "final_vs_initial",
    "run_formation_ensemble",
    "compare_ensembles",
    "endo_profiles",
    "RUNS_HEADER",
    "write_runs_csv",
    "parse_runs_csv",
    "write_contagion_csv",
    "write_fvi_csv",
    "write_degrees_csv",
    "write_bias_csv",
    "write_manifest",
]

CONDITIONINGS = ("all", "start_le_half", "start_gt_half")

# seed-stream tags, one per independent random purpose
STREAM_SWEEP = 0
STREAM_FORMATION = 1
STREAM_ENDO_RUN = 2
STREAM_ER_GRAPH = 3
STREAM_ER_RUN = 4
STREAM_ENDO_BIAS = 5
STREAM_ER_BIAS = 6

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix(x: int) -> int:
    x &= _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, *coords: int) -> int:
    """Mix run coordinates into the master seed (splitmix64 per coordinate)."""
    s = master & _MASK
    for c in coords:
        s = _splitmix((s + _GOLDEN + (int(c) & _MASK)) & _MASK)
    return s


@dataclass(frozen=True)
class RunRecord:
    """One simulation run: sweep coordinate, endpoints and contagion metrics."""

    config: str
    seed: int
    rho: float
    x_init: float
    x_final: float
    contagion: bool
    conv_time: int | None


def _pmap(fn, tasks, jobs):
    jobs = jobs if jobs is not None else (os.cpu_count() or 1)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


# ---------------------------------------------------------------------------
# sweep experiments (Table 1)
# ---------------------------------------------------------------------------


def _base_profiles(cfg: SimulationConfig) -> tuple[AgentProfile, ...]:
    sig = SignalStructure(cfg.mu0, cfg.mu1, cfg.sigma)
    return (AgentProfile(sig, cost=cfg.cost, informed=False),) * cfg.n_agents


def _informed_profile(cfg: SimulationConfig) -> AgentProfile:
    sig = SignalStructure(cfg.mu0_informed, cfg.mu1_informed, cfg.sigma)
    return AgentProfile(sig, cost=cfg.cost_informed, informed=True)


def _measure(cfg, traj, label, seed, rho) -> RunRecord:
    conv = convergence_time(traj) if len(traj) > 15 else None
    return RunRecord(
        config=label,
        seed=seed,
        rho=rho,
        x_init=traj.x_init,
        x_final=traj.x_final,
        contagion=contagion_flag(traj.actions[-1], cfg.theta),
        conv_time=conv,
    )


def _sweep_run(cfg: SimulationConfig, axis_value: float, seed: int) -> RunRecord:
    """One sweep replicate.  RNG consumption order: class assignment (only
    for informed-probability sweeps), graph, initialization, update steps."""
    rng = np.random.default_rng(seed)
    if cfg.informed_prob_grid is not None:
        informed = _informed_profile(cfg)
        uninformed = _base_profiles(cfg)[0]
        mask = rng.random(cfg.n_agents) < axis_value
        profiles = tuple(informed if m else uninformed for m in mask)
        rho = cfg.rho_grid[0]
    else:
        profiles = _base_profiles(cfg)
        rho = axis_value
    graph = er_random(cfg.n_agents, rho, rng)
    state = PopulationState(profiles, graph, cfg.theta)
    state = init_actions(state, rng, cfg.bias)
    traj = run(state, cfg.scenario, cfg.t_steps, rng)
    return _measure(cfg, traj, cfg.label(), seed, axis_value)


def _sweep_axis_worker(task) -> list[RunRecord]:
    cfg, master_seed, axis_idx = task
    axes = cfg.informed_prob_grid if cfg.informed_prob_grid is not None else cfg.rho_grid
    out = []
    for rep in range(cfg.s_reps):
        seed = derive_seed(master_seed, STREAM_SWEEP, axis_idx, rep)
        out.append(_sweep_run(cfg, axes[axis_idx], seed))
    return out


def run_sweep(
    cfg: SimulationConfig, master_seed: int, jobs: int | None = None
) -> list[RunRecord]:
    """Run the full (axis value x replicate) grid; order is axis-major."""
    axes = cfg.informed_prob_grid if cfg.informed_prob_grid is not None else cfg.rho_grid
    tasks = [(cfg, master_seed, idx) for idx in range(len(axes))]
    return [rec for batch in _pmap(_sweep_axis_worker, tasks, jobs) for rec in batch]


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def estimate_contagion_prob(
    records: list[RunRecord], conditioning: str = "all"
) -> list[tuple[float, int, float | None]]:
    """Contagion frequency per sweep coordinate under one conditioning.

    Returns (rho, n_runs, probability) sorted by rho; probability is None
    for empty conditioned cells (reported as missing downstream).
    """
    if conditioning not in CONDITIONINGS:
        raise ValueError(f"unknown conditioning: {conditioning!r}")
    groups: dict[float, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.rho, []).append(rec)
    out = []
    for rho in sorted(groups):
        subset = groups[rho]
        if conditioning == "start_le_half":
            subset = [r for r in subset if r.x_init <= 0.5]
        elif conditioning == "start_gt_half":
            subset = [r for r in subset if r.x_init > 0.5]
        if subset:
            p = sum(r.contagion for r in subset) / len(subset)
            out.append((rho, len(subset), p))
        else:
            out.append((rho, 0, None))
    return out


def final_vs_initial(
    records: list[RunRecord], bins: int = 20
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint (x_init, x_final) frequency grid pooled over all records."""
    xi = [r.x_init for r in records]
    xf = [r.x_final for r in records]
    counts, xe, ye = np.histogram2d(xi, xf, bins=bins, range=[[0, 1], [0, 1]])
    return counts.astype(np.int64), xe, ye


# ---------------------------------------------------------------------------
# endogenous-network experiments (Table 2)
# ---------------------------------------------------------------------------


def endo_profiles(cfg: SimulationConfig) -> tuple[AgentProfile, ...]:
    """Heterogeneous population: agents 0..n_informed-1 are informed."""
    informed = _informed_profile(cfg)
    uninformed = AgentProfile(
        SignalStructure(cfg.mu0, cfg.mu1, cfg.sigma), cost=cfg.cost, informed=False
    )
    return (informed,) * cfg.n_informed + (uninformed,) * (cfg.n_agents - cfg.n_informed)


def _formation_worker(task) -> FormationResult:
    cfg, seed = task
    rng = np.random.default_rng(seed)
    return form_network(
        endo_profiles(cfg), cfg.t_c, cfg.beta, UtilityModel(cfg.q_prime), rng
    )


def run_formation_ensemble(
    cfg: SimulationConfig,
    master_seed: int,
    jobs: int | None = None,
    n_networks: int | None = None,
) -> list[FormationResult]:
    n = n_networks if n_networks is not None else cfg.n_networks
    tasks = [
        (cfg, derive_seed(master_seed, STREAM_FORMATION, idx, 0)) for idx in range(n)
    ]
    return _pmap(_formation_worker, tasks, jobs)


def _fixed_graph_run(
    cfg: SimulationConfig,
    profiles,
    graph: Graph,
    seed: int,
    label: str,
    bias: float | None,
) -> RunRecord:
    rng = np.random.default_rng(seed)
    state = PopulationState(profiles, graph, cfg.theta)
    state = init_actions(state, rng, bias)
    traj = run(state, cfg.scenario, cfg.t_steps, rng)
    return _measure(cfg, traj, label, seed, graph.density())


def _degree_rows(label: str, graphs: list[Graph], n_informed: int):
    """Pooled degree histogram rows (config, group, degree, count)."""
    all_deg, inf_deg, unf_deg = [], [], []
    for g in graphs:
        deg = g.degrees()
        all_deg.append(deg)
        inf_deg.append(deg[:n_informed])
        unf_deg.append(deg[n_informed:])
    rows = []
    for group, parts in (("all", all_deg), ("informed", inf_deg), ("uninformed", unf_deg)):
        pooled = np.concatenate(parts)
        counts = np.bincount(pooled)
        rows.extend(
            (label, group, deg, int(c)) for deg, c in enumerate(counts) if c > 0
        )
    return rows


@dataclass
class CompareResult:
    """Endogenous-vs-ER comparison: run records, bias curves, degree stats."""

    endo_records: list[RunRecord]
    er_records: list[RunRecord]
    bias_rows: list[tuple[str, float, int, float]]
    degree_rows: list[tuple[str, str, int, int]]
    endo_mean_density: float
    er_density: float
    formed: list[FormationResult] = field(default_factory=list)


def compare_ensembles(
    cfg: SimulationConfig,
    master_seed: int,
    jobs: int | None = None,
    n_networks: int | None = None,
) -> CompareResult:
    """Form an endogenous ensemble and race it against density-matched ER.

    Learning runs use the configured weighting scenario (equal for the
    reference configuration), one unbiased run per network, plus
    cfg.s_reps biased runs per bias-grid level per ensemble.  Networks are
    held fixed during learning.
    """
    profiles = endo_profiles(cfg)
    formed = run_formation_ensemble(cfg, master_seed, jobs, n_networks)
    nets = [fr.graph for fr in formed]
    endo_mean_density = float(np.mean([g.density() for g in nets]))
    er_rho = cfg.er_density if cfg.er_density is not None else endo_mean_density

    er_graphs = [
        er_random(
            cfg.n_agents,
            er_rho,
            np.random.default_rng(derive_seed(master_seed, STREAM_ER_GRAPH, idx, 0)),
        )
        for idx in range(len(nets))
    ]

    endo_label, er_label = cfg.label("endo"), cfg.label("er")
    endo_records = [
        _fixed_graph_run(
            cfg, profiles, g, derive_seed(master_seed, STREAM_ENDO_RUN, idx, 0),
            endo_label, None,
        )
        for idx, g in enumerate(nets)
    ]
    er_records = [
        _fixed_graph_run(
            cfg, profiles, g, derive_seed(master_seed, STREAM_ER_RUN, idx, 0),
            er_label, None,
        )
        for idx, g in enumerate(er_graphs)
    ]

    bias_rows = []
    for label, graphs, stream in (
        (endo_label, nets, STREAM_ENDO_BIAS),
        (er_label, er_graphs, STREAM_ER_BIAS),
    ):
        for b_idx, b in enumerate(cfg.bias_grid):
            flags = []
            for rep in range(cfg.s_reps):
                g = graphs[rep % len(graphs)]
                seed = derive_seed(master_seed, stream, b_idx, rep)
                rec = _fixed_graph_run(cfg, profiles, g, seed, label, b)
                flags.append(rec.contagion)
            bias_rows.append((label, b, len(flags), float(np.mean(flags))))

    degree_rows = _degree_rows(endo_label, nets, cfg.n_informed) + _degree_rows(
        er_label, er_graphs, cfg.n_informed
    )
    return CompareResult(
        endo_records=endo_records,
        er_records=er_records,
        bias_rows=bias_rows,
        degree_rows=degree_rows,
        endo_mean_density=endo_mean_density,
        er_density=er_rho,
        formed=formed,
    )


# ---------------------------------------------------------------------------
# CSV emission (fixed headers; repr round-trips floats exactly)
# ---------------------------------------------------------------------------

RUNS_HEADER = "config,seed,rho,x_init,x_final,contagion,conv_time"
CONTAGION_HEADER = "config,rho,conditioning,n_runs,p_contagion"
FVI_HEADER = "config,xi_index,xf_index,xi_center,xf_center,count"
DEGREES_HEADER = "config,group,degree,count"
BIAS_HEADER = "config,bias,n_runs,p_contagion"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_runs_csv(records: list[RunRecord], path) -> None:
    lines = [RUNS_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (r.config, r.seed, r.rho, r.x_init, r.x_final, r.contagion, r.conv_time)
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_runs_csv(path) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != RUNS_HEADER:
        raise ValueError(f"runs csv must start with header {RUNS_HEADER!r}")
    out = []
    for line in lines[1:]:
        config, seed, rho, xi, xf, cont, conv = line.split(",")
        out.append(
            RunRecord(
                config=config,
                seed=int(seed),
                rho=float(rho),
                x_init=float(xi),
                x_final=float(xf),
                contagion=bool(int(cont)),
                conv_time=None if conv == "" else int(conv),
            )
        )
    return out


def write_contagion_csv(cfg: SimulationConfig, records: list[RunRecord], path) -> None:
    lines = [CONTAGION_HEADER]
    label = records[0].config if records else cfg.label()
    for conditioning in CONDITIONINGS:
        for rho, n, p in estimate_contagion_prob(records, conditioning):
            lines.append(",".join((label, _fmt(rho), conditioning, str(n), _fmt(p))))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_fvi_csv(label: str, records: list[RunRecord], path, bins: int = 20) -> None:
    counts, xe, ye = final_vs_initial(records, bins)
    lines = [FVI_HEADER]
    for i in range(bins):
        for j in range(bins):
            xc = 0.5 * (xe[i] + xe[i + 1])
            yc = 0.5 * (ye[j] + ye[j + 1])
            lines.append(
                ",".join((label, str(i), str(j), _fmt(float(xc)), _fmt(float(yc)), str(int(counts[i, j]))))
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_degrees_csv(rows, path) -> None:
    lines = [DEGREES_HEADER]
    lines.extend(",".join((c, g, str(d), str(n))) for c, g, d, n in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_bias_csv(rows, path) -> None:
    lines = [BIAS_HEADER]
    lines.extend(
        ",".join((c, _fmt(b), str(n), _fmt(p))) for c, b, n, p in rows
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(path, cfg: SimulationConfig, master_seed: int, extra: dict | None = None) -> None:
    from . import __version__

    lines = [
        f"herdsim_version = {__version__}",
        f"master_seed = {master_seed}",
        f"config_hash = {cfg.config_hash()}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    lines.append("")
    lines.append(cfg.canonical_text())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
