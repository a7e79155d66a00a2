"""Endogenous network formation.

Link values come from a truncated-belief utility model: an agent assumes
each neighbor's own social belief is a fixed q' (default 1/2), computes the
probability z_j that neighbor j picks a state-matching action, convolves
those into the distribution of its own social belief, and mixes the
state-matching probability over that distribution.  The formation loop
repeatedly proposes links, accepting when both endpoints' marginal utility
clears their per-link cost, with a one-shot "swap out the least informative
neighbor" fallback on failure.

Acceptance additionally requires that the move leaves every link in the
accepting agent's own portfolio worth its cost (adding a link reprices the
agent's existing links, and a myopic accept can turn them into deletion
violations).  Because a move only reprices the two endpoints' own
neighborhoods, this check makes deletion-side pairwise stability an
invariant of the entire formation process.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .graph import Graph
from .signals import SignalStructure, state_match_prob

__all__ = [
    "AgentProfile",
    "UtilityModel",
    "SocialBeliefDistribution",
    "FormationEvent",
    "FormationResult",
    "COST_TOL",
    "neighbor_match_prob",
    "social_belief_distribution",
    "expected_utility",
    "marginal_utility",
    "selection_weights",
    "least_informative",
    "form_network",
    "replay_events",
]

# Acceptance comparisons use >= within this tolerance.  Zero-marginal ties
# are real here: at q'=1/2 the value of a first link to a same-class partner
# equals autarky utility exactly, and rejecting those ties would freeze the
# empty graph forever.
COST_TOL = 1e-12


@dataclass(frozen=True)
class AgentProfile:
    """Static agent attributes: signal structure, per-link cost, class tag."""

    sig: SignalStructure
    cost: float = 0.0
    informed: bool = False

    def __post_init__(self):
        if self.cost < 0:
            raise ValueError("link cost must be nonnegative")

    @property
    def signal_strength(self) -> float:
        """E = |1/2 - mu0|, the selection-weight proxy for informativeness."""
        return abs(0.5 - self.sig.mu0)


@dataclass(frozen=True)
class UtilityModel:
    """Evaluation context: the assumed social belief q' of one's neighbors."""

    q_prime: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.q_prime <= 1.0:
            raise ValueError("q_prime must lie in [0, 1]")


@dataclass(frozen=True)
class SocialBeliefDistribution:
    """Distribution of an agent's social belief over the support {0, 1/k, ..., 1}."""

    support: np.ndarray
    mass: np.ndarray


def neighbor_match_prob(profile_j: AgentProfile, q_prime: float) -> float:
    """Probability that neighbor j picks the state-matching action given q'."""
    return state_match_prob(profile_j.sig, q_prime)


def social_belief_distribution(z: Sequence[float]) -> SocialBeliefDistribution:
    """Exact distribution of q = (# non-matching neighbors) / k.

    Neighbor j is non-matching independently with probability 1 - z_j; the
    Poisson-binomial mass is built by an O(k^2) convolution over neighbors.
    """
    z = np.asarray(z, dtype=float)
    k = z.size
    if k == 0:
        raise ValueError("social belief distribution needs at least one neighbor")
    if np.any((z < 0) | (z > 1)):
        raise ValueError("match probabilities must lie in [0, 1]")
    mass = np.zeros(k + 1)
    mass[0] = 1.0
    for j, zj in enumerate(z):
        upper = j + 1
        mass[1 : upper + 1] = mass[1 : upper + 1] * zj + mass[:upper] * (1.0 - zj)
        mass[0] *= zj
    return SocialBeliefDistribution(support=np.arange(k + 1) / k, mass=mass)


@lru_cache(maxsize=None)
def _match_prob_grid(sig: SignalStructure, k: int) -> np.ndarray:
    return np.array([state_match_prob(sig, m / k) for m in range(k + 1)])


@lru_cache(maxsize=None)
def _utility_from_z(sig_i: SignalStructure, z_sorted: tuple[float, ...]) -> float:
    """Gross utility given the sorted neighbor match probabilities.

    The assumed q' enters only through the z values, so this is the shared
    memoized core for formation, replay and the stability audit.
    """
    if not z_sorted:
        return state_match_prob(sig_i, 0.5)
    dist = social_belief_distribution(z_sorted)
    return float(np.dot(dist.mass, _match_prob_grid(sig_i, len(z_sorted))))


def expected_utility(
    profile_i: AgentProfile,
    neighbor_profiles: Sequence[AgentProfile],
    model: UtilityModel,
) -> float:
    """Gross expected utility of agent i with the given neighborhood.

    Isolated agents act on their private belief alone, so the value is the
    autarky match probability Pr(p < 1/2).  Otherwise the state-matching
    probability is averaged over the social-belief distribution induced by
    the neighbors' z values.
    """
    z = tuple(sorted(neighbor_match_prob(pj, model.q_prime) for pj in neighbor_profiles))
    return _utility_from_z(profile_i.sig, z)


def marginal_utility(
    profile_i: AgentProfile,
    neighborhood: Sequence[AgentProfile],
    candidate: AgentProfile,
    model: UtilityModel,
) -> float:
    """Utility gain for i from adding the candidate to its neighborhood.

    Entries represent distinct agents, so the candidate must not be one of
    the neighborhood objects (object identity, not value equality: two
    agents of the same class are equal-valued but distinct).
    """
    if any(pj is candidate for pj in neighborhood):
        raise ValueError("candidate is already a neighbor")
    base = expected_utility(profile_i, neighborhood, model)
    return expected_utility(profile_i, list(neighborhood) + [candidate], model) - base


def selection_weights(candidates: Sequence[AgentProfile], beta: float) -> np.ndarray:
    """Softmax over signal strengths E_j with inverse temperature beta."""
    if len(candidates) == 0:
        raise ValueError("no candidates to weight")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    e = np.array([pr.signal_strength for pr in candidates])
    w = np.exp(beta * (e - e.max()))
    return w / w.sum()


def least_informative(neighborhood: Sequence[AgentProfile]) -> int:
    """Index of the lowest-E neighbor; ties break toward the lowest index."""
    if len(neighborhood) == 0:
        raise ValueError("empty neighborhood")
    strengths = [pr.signal_strength for pr in neighborhood]
    return int(np.argmin(strengths))


@dataclass(frozen=True)
class FormationEvent:
    """One considered pair: marginals at evaluation time plus the decision.

    decision is one of formed / formed_swap_i / formed_swap_j /
    formed_swap_both / rejected / skipped.  removed_i / removed_j name the
    neighbors dropped by an accepted swap; du_i_swap / du_j_swap are the
    re-evaluated marginals of a swap attempt (NaN when no attempt was made).
    """

    iteration: int
    i: int
    j: int
    du_i: float
    du_j: float
    decision: str
    removed_i: int = -1
    removed_j: int = -1
    du_i_swap: float = float("nan")
    du_j_swap: float = float("nan")

    def to_line(self) -> str:
        return (
            f"iter={self.iteration} i={self.i} j={self.j} "
            f"du_i={self.du_i!r} du_j={self.du_j!r} decision={self.decision} "
            f"removed_i={self.removed_i} removed_j={self.removed_j} "
            f"du_i_swap={self.du_i_swap!r} du_j_swap={self.du_j_swap!r}"
        )

    @classmethod
    def from_line(cls, line: str) -> "FormationEvent":
        fields_ = dict(part.split("=", 1) for part in line.split())
        return cls(
            iteration=int(fields_["iter"]),
            i=int(fields_["i"]),
            j=int(fields_["j"]),
            du_i=float(fields_["du_i"]),
            du_j=float(fields_["du_j"]),
            decision=fields_["decision"],
            removed_i=int(fields_["removed_i"]),
            removed_j=int(fields_["removed_j"]),
            du_i_swap=float(fields_["du_i_swap"]),
            du_j_swap=float(fields_["du_j_swap"]),
        )


@dataclass
class FormationResult:
    graph: Graph
    events: list[FormationEvent] = field(default_factory=list)

    def event_log_text(self) -> str:
        return "\n".join(ev.to_line() for ev in self.events) + "\n"

    @classmethod
    def from_event_log(cls, graph: Graph, text: str) -> "FormationResult":
        events = [FormationEvent.from_line(ln) for ln in text.splitlines() if ln.strip()]
        return cls(graph=graph, events=events)


def _clears(du: float, cost: float) -> bool:
    return du >= cost - COST_TOL


class _Evaluator:
    """Neighborhood utilities for a fixed profile population."""

    def __init__(self, profiles: Sequence[AgentProfile], model: UtilityModel):
        self.profiles = tuple(profiles)
        self.model = model
        self.z = [neighbor_match_prob(pr, model.q_prime) for pr in self.profiles]

    def utility(self, node: int, neighborhood: tuple[int, ...]) -> float:
        key = tuple(sorted(self.z[m] for m in neighborhood))
        return _utility_from_z(self.profiles[node].sig, key)

    def marginal(self, node: int, neighborhood: tuple[int, ...], add: int) -> float:
        return self.utility(node, neighborhood + (add,)) - self.utility(node, neighborhood)

    def portfolio_stable(self, node: int, neighborhood: tuple[int, ...]) -> bool:
        """True iff every held link is worth the node's cost (no deletion gain)."""
        cost = self.profiles[node].cost
        total = self.utility(node, neighborhood)
        for m in neighborhood:
            rest = tuple(x for x in neighborhood if x != m)
            if not _clears(total - self.utility(node, rest), cost):
                return False
        return True

    def accepts(self, node: int, neighborhood: tuple[int, ...], partner: int, du: float) -> bool:
        """Acceptance rule: the gain clears the cost and the post-move
        portfolio stays deletion-stable."""
        if not _clears(du, self.profiles[node].cost):
            return False
        return self.portfolio_stable(node, neighborhood + (partner,))

    def swap(self, node: int, neighborhood: tuple[int, ...], partner: int):
        """Drop the least informative neighbor, add the partner, re-evaluate.

        Returns (dropped id, utility change, accepted); (None, nan, False)
        when there is nothing to drop.
        """
        if not neighborhood:
            return None, float("nan"), False
        nb = sorted(neighborhood)
        drop = nb[least_informative([self.profiles[m] for m in nb])]
        kept = tuple(m for m in neighborhood if m != drop)
        du = self.utility(node, kept + (partner,)) - self.utility(node, neighborhood)
        return drop, du, self.accepts(node, kept, partner, du)


def form_network(
    profiles: Sequence[AgentProfile],
    n_iterations: int,
    beta: float,
    model: UtilityModel,
    rng: np.random.Generator,
) -> FormationResult:
    """Grow a pairwise-stable network from the empty graph.

    Each iteration picks a random initiator i, samples a non-neighbor j with
    probability proportional to exp(beta * E_j), and evaluates both marginal
    utilities against the endpoint costs.  A link forms when both clear; on a
    one-sided failure the failing endpoint tries once to swap out its least
    informative neighbor, and on a two-sided failure both do.  Iterations
    with no eligible partner are skipped but still counted.
    """
    if n_iterations < 1:
        raise ValueError("iteration count must be >= 1")
    ev = _Evaluator(profiles, model)
    n = len(ev.profiles)
    g = Graph(n)
    events: list[FormationEvent] = []

    for it in range(n_iterations):
        i = int(rng.integers(n))
        pool = [m for m in range(n) if m != i and not g.has_link(i, m)]
        if not pool:
            events.append(FormationEvent(it, i, -1, float("nan"), float("nan"), "skipped"))
            continue
        w = selection_weights([ev.profiles[m] for m in pool], beta)
        j = int(pool[rng.choice(len(pool), p=w)])

        k_i = tuple(g.neighbors(i).tolist())
        k_j = tuple(g.neighbors(j).tolist())
        du_i = ev.marginal(i, k_i, j)
        du_j = ev.marginal(j, k_j, i)
        ok_i = ev.accepts(i, k_i, j, du_i)
        ok_j = ev.accepts(j, k_j, i, du_j)

        if ok_i and ok_j:
            g.add_link(i, j)
            events.append(FormationEvent(it, i, j, du_i, du_j, "formed"))
        elif ok_i and not ok_j:
            drop_j, du_j_swap, ok = ev.swap(j, k_j, i)
            if ok:
                g.remove_link(j, drop_j)
                g.add_link(i, j)
                events.append(
                    FormationEvent(
                        it, i, j, du_i, du_j, "formed_swap_j",
                        removed_j=drop_j, du_j_swap=du_j_swap,
                    )
                )
            else:
                events.append(FormationEvent(it, i, j, du_i, du_j, "rejected"))
        elif ok_j and not ok_i:
            drop_i, du_i_swap, ok = ev.swap(i, k_i, j)
            if ok:
                g.remove_link(i, drop_i)
                g.add_link(i, j)
                events.append(
                    FormationEvent(
                        it, i, j, du_i, du_j, "formed_swap_i",
                        removed_i=drop_i, du_i_swap=du_i_swap,
                    )
                )
            else:
                events.append(FormationEvent(it, i, j, du_i, du_j, "rejected"))
        else:
            drop_i, du_i_swap, oki = ev.swap(i, k_i, j)
            drop_j, du_j_swap, okj = ev.swap(j, k_j, i)
            if oki and okj:
                g.remove_link(i, drop_i)
                g.remove_link(j, drop_j)
                g.add_link(i, j)
                events.append(
                    FormationEvent(
                        it, i, j, du_i, du_j, "formed_swap_both",
                        removed_i=drop_i, removed_j=drop_j,
                        du_i_swap=du_i_swap, du_j_swap=du_j_swap,
                    )
                )
            else:
                events.append(FormationEvent(it, i, j, du_i, du_j, "rejected"))

    return FormationResult(graph=g, events=events)


def replay_events(
    profiles: Sequence[AgentProfile],
    events: Sequence[FormationEvent],
    model: UtilityModel,
    tol: float = 1e-9,
) -> Graph:
    """Re-execute an event log, verifying every accepted link was profitable.

    Recomputes the marginal utilities from the reconstructed graph state at
    each event, checks they match the logged values, and checks accepted
    moves clear the endpoint costs under the formation acceptance rule.
    Returns the reconstructed graph; raises ValueError on any mismatch.
    """
    ev = _Evaluator(profiles, model)
    g = Graph(len(ev.profiles))

    def check(what, logged, recomputed, ev_):
        if abs(logged - recomputed) > tol:
            raise ValueError(
                f"replay mismatch at iteration {ev_.iteration} ({what}): "
                f"logged {logged!r}, recomputed {recomputed!r}"
            )

    for event in events:
        if event.decision == "skipped":
            continue
        i, j = event.i, event.j
        k_i = tuple(g.neighbors(i).tolist())
        k_j = tuple(g.neighbors(j).tolist())
        check("du_i", event.du_i, ev.marginal(i, k_i, j), event)
        check("du_j", event.du_j, ev.marginal(j, k_j, i), event)
        if event.decision == "rejected":
            continue

        def require(ok, who):
            if not ok:
                raise ValueError(
                    f"accepted move at iteration {event.iteration} is not "
                    f"profitable for endpoint {who}"
                )

        # each swapping side must be acceptable via its re-evaluated swap
        # marginal, every other side via its direct marginal
        if event.removed_i >= 0:
            kept = tuple(m for m in k_i if m != event.removed_i)
            du_sw = ev.utility(i, kept + (j,)) - ev.utility(i, k_i)
            check("du_i_swap", event.du_i_swap, du_sw, event)
            require(ev.accepts(i, kept, j, du_sw), i)
        else:
            require(ev.accepts(i, k_i, j, event.du_i), i)
        if event.removed_j >= 0:
            kept = tuple(m for m in k_j if m != event.removed_j)
            du_sw = ev.utility(j, kept + (i,)) - ev.utility(j, k_j)
            check("du_j_swap", event.du_j_swap, du_sw, event)
            require(ev.accepts(j, kept, i, du_sw), j)
        else:
            require(ev.accepts(j, k_j, i, event.du_j), j)
        if event.removed_i >= 0:
            g.remove_link(i, event.removed_i)
        if event.removed_j >= 0:
            g.remove_link(j, event.removed_j)
        g.add_link(i, j)
    return g
