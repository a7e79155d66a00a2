"""Synchronous social-learning dynamics.

Each step every agent draws a fresh private signal, forms a private belief,
averages its neighbors' previous-period actions into a social belief,
combines the two through one of three weighting scenarios and picks the
action 0 or 1.  Updates are synchronous: all agents react to the t-1
action snapshot.  Exact ties of the decision statistic keep the previous
action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import kernels
from .formation import AgentProfile
from .graph import Graph
from .kernels import SCENARIOS

__all__ = [
    "SCENARIOS",
    "Agent",
    "PopulationState",
    "Trajectory",
    "social_belief",
    "weight",
    "decide",
    "init_actions",
    "step",
    "run",
    "convergence_time",
    "majority_threshold",
    "contagion_flag",
]


@dataclass(frozen=True)
class Agent:
    """Read-only view of one agent's profile and dynamic state."""

    id: int
    profile: AgentProfile
    action: int
    last_private_belief: float
    last_social_belief: float | None


@dataclass(frozen=True)
class PopulationState:
    """Population snapshot: static profiles plus graph, actions and beliefs."""

    profiles: tuple[AgentProfile, ...]
    graph: Graph
    theta: int
    time: int = 0
    actions: np.ndarray | None = None
    private_beliefs: np.ndarray | None = None
    social_beliefs: np.ndarray | None = None

    def __post_init__(self):
        if len(self.profiles) != self.graph.n:
            raise ValueError("graph node count must equal agent count")
        if self.theta not in (0, 1):
            raise ValueError("theta must be 0 or 1")

    @property
    def n(self) -> int:
        return self.graph.n

    def agent(self, i: int) -> Agent:
        if self.actions is None:
            raise ValueError("population not initialized")
        q = float(self.social_beliefs[i])
        return Agent(
            id=i,
            profile=self.profiles[i],
            action=int(self.actions[i]),
            last_private_belief=float(self.private_beliefs[i]),
            last_social_belief=None if np.isnan(q) else q,
        )


@dataclass(frozen=True)
class Trajectory:
    """Per-step record of all actions; row 0 is the initial state."""

    actions: np.ndarray  # (T+1, N) int8

    @property
    def averages(self) -> np.ndarray:
        return self.actions.mean(axis=1)

    @property
    def x_init(self) -> float:
        return float(self.actions[0].mean())

    @property
    def x_final(self) -> float:
        return float(self.actions[-1].mean())

    def __len__(self) -> int:
        return self.actions.shape[0]


def social_belief(neighbor_actions: Sequence[int]) -> float | None:
    """Mean of observed neighbor actions; None when there are no neighbors."""
    if len(neighbor_actions) == 0:
        return None
    return float(np.mean(neighbor_actions))


def weight(
    scenario: str,
    p: float,
    q: float | None,
    k: int,
    n_agents: int | None = None,
) -> float:
    """Decision statistic t(p, q) for one agent.

    k is the neighborhood size; q must be None exactly when k == 0, in which
    case every scenario reduces to t = p.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown weighting scenario: {scenario!r}")
    if k == 0:
        if q is not None:
            raise ValueError("social belief present but neighborhood is empty")
        return p
    if q is None:
        raise ValueError("social belief required when k > 0")
    if scenario == "equal":
        return 0.5 * (p + q)
    if scenario == "neighborhood_size":
        return p / (k + 1) + q * k / (k + 1)
    if n_agents is None:
        raise ValueError("relative_neighborhood weighting needs the population size")
    w = k / (n_agents - 1)
    return p * (1.0 - w) + q * w


def decide(t_value: float, prev_action: int) -> int:
    """1 above 1/2, 0 below, previous action on an exact tie."""
    if t_value > 0.5:
        return 1
    if t_value < 0.5:
        return 0
    return prev_action


def _signal_arrays(profiles, theta):
    mu0 = np.array([pr.sig.mu0 for pr in profiles])
    mu1 = np.array([pr.sig.mu1 for pr in profiles])
    sigma = np.array([pr.sig.sigma for pr in profiles])
    mu_true = mu1 if theta == 1 else mu0
    return mu_true, mu1 - mu0, mu0 + mu1, 1.0 / (2.0 * sigma**2), sigma


def init_actions(
    state: PopulationState,
    rng: np.random.Generator,
    bias: float | None = None,
) -> PopulationState:
    """Autarky initialization at t=0.

    Every agent draws a signal and acts on its private belief alone.  With a
    bias b, actions are instead overridden by independent Bernoulli(b) draws
    (beliefs are still computed and recorded).
    """
    if state.time != 0:
        raise ValueError("initialization requires time = 0")
    if bias is not None and not 0.0 <= bias <= 1.0:
        raise ValueError(f"bias must lie in [0, 1], got {bias}")
    n = state.n
    mu_true, dmu, msum, inv2s2, sigma = _signal_arrays(state.profiles, state.theta)
    z0 = rng.standard_normal(n)
    bias_u = rng.random(n) if bias is not None else None
    x0, p0 = kernels.initial_actions(
        z0, mu_true, dmu, msum, inv2s2, sigma, bias_u, -1.0 if bias is None else bias
    )
    return replace(
        state,
        actions=x0,
        private_beliefs=p0,
        social_beliefs=np.full(n, np.nan),
    )


def _simulate(state, scenario, n_steps, rng):
    mu_true, dmu, msum, inv2s2, sigma = _signal_arrays(state.profiles, state.theta)
    coef_p, rhs = kernels.scenario_coefficients(
        scenario, state.graph.degrees(), state.n
    )
    z = rng.standard_normal((n_steps, state.n))
    return kernels.simulate(
        z,
        state.actions,
        state.graph.csr(),
        state.graph.adj,
        mu_true,
        dmu,
        msum,
        inv2s2,
        sigma,
        coef_p,
        rhs,
    )


def step(
    state: PopulationState, scenario: str, rng: np.random.Generator
) -> PopulationState:
    """One synchronous update against the t-1 action snapshot."""
    if state.actions is None:
        raise ValueError("population must be initialized before stepping")
    actions, p_last, q_last = _simulate(state, scenario, 1, rng)
    return replace(
        state,
        time=state.time + 1,
        actions=actions[-1],
        private_beliefs=p_last,
        social_beliefs=q_last,
    )


def run(
    state: PopulationState,
    scenario: str,
    n_steps: int,
    rng: np.random.Generator,
) -> Trajectory:
    """Apply n_steps updates and record the full action history.

    The input state is not modified; row 0 of the trajectory is its action
    vector.  Deterministic given the rng state.
    """
    if state.actions is None:
        raise ValueError("population must be initialized before running")
    if n_steps < 0:
        raise ValueError("step count must be nonnegative")
    if n_steps == 0:
        return Trajectory(state.actions[None, :].copy())
    actions, _, _ = _simulate(state, scenario, n_steps, rng)
    return Trajectory(actions)


def convergence_time(traj: Trajectory, dt: int = 15, tol: float = 0.05) -> int | None:
    """First t with mean |x_i(t) - x_i(t+dt)| below tol; None if never."""
    if len(traj) <= dt:
        raise ValueError("trajectory shorter than the comparison window")
    a = traj.actions
    diffs = np.abs(a[: len(traj) - dt].astype(np.int16) - a[dt:].astype(np.int16))
    hits = np.flatnonzero(diffs.mean(axis=1) < tol)
    return int(hits[0]) if hits.size else None


def majority_threshold(
    scenario: str, k: int, m: float, n_agents: int | None = None
) -> float:
    """Minimal neighbor-action sum strictly required for action 1.

    m >= 1 is the private likelihood ratio f0/f1 favoring state 0.
    """
    if m < 1:
        raise ValueError("likelihood ratio must be >= 1")
    if k < 1:
        raise ValueError("threshold needs at least one neighbor")
    if scenario == "equal":
        return k * (1.0 - 1.0 / (1.0 + m))
    if scenario == "neighborhood_size":
        return k / 2.0 + (0.5 - 1.0 / (1.0 + m))
    if scenario == "relative_neighborhood":
        if n_agents is None:
            raise ValueError("relative_neighborhood threshold needs the population size")
        return (n_agents - 1.0) * (0.5 - 1.0 / (1.0 + m)) + k / (1.0 + m)
    raise ValueError(f"unknown weighting scenario: {scenario!r}")


def contagion_flag(
    final_actions: Sequence[int], theta: int, frac: float = 0.8
) -> bool:
    """True iff strictly more than frac of agents end on the non-matching action."""
    a = np.asarray(final_actions)
    if a.size == 0:
        raise ValueError("empty action vector")
    return bool(np.mean(a != theta) > frac)
