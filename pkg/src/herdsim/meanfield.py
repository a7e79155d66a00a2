"""Representative-agent self-consistency analysis under equal weighting.

The population-average action q must reproduce itself through the map
q -> Pr(x=1 | q).  The map is the upper tail of the private-belief CDF, so
it is sigmoid-shaped: besides the absorbing ends 0 and 1 there is one
interior crossing, the critical social belief beyond which the population
locks onto the state non-matching action.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SignalStructure, state_match_prob

__all__ = ["FixedPoint", "residual", "prob_one", "fixed_points", "iterate_map"]

GRID_POINTS = 1024


@dataclass(frozen=True)
class FixedPoint:
    q_star: float
    stability: str  # "stable" | "unstable"


def prob_one(sig: SignalStructure, q: float) -> float:
    """Pr(x=1 | q): probability of the state non-matching action under theta=0."""
    return 1.0 - state_match_prob(sig, q)


def residual(sig: SignalStructure, q: float) -> float:
    """Self-consistency residual r(q) = Pr(x=1 | q) - q; roots are fixed points."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"social belief must lie in [0, 1], got {q}")
    return prob_one(sig, q) - q


def _bisect(sig, lo, hi, r_lo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r_mid = residual(sig, mid)
        if r_mid == 0.0:
            return mid
        if (r_mid > 0) == (r_lo > 0):
            lo, r_lo = mid, r_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_points(sig: SignalStructure, tol: float = 1e-8) -> list[FixedPoint]:
    """All fixed points of the self-consistency map, with stability tags.

    The endpoints 0 and 1 are always fixed; interior roots are isolated by a
    uniform sign scan and refined by bisection.  Stability comes from the
    one-sided signs of the residual: a root where r flips from negative to
    positive repels, the reverse attracts.
    """
    sig._require_informative()
    qs = np.linspace(0.0, 1.0, GRID_POINTS + 1)[1:-1]
    rs = np.array([residual(sig, q) for q in qs])

    interior: list[float] = []
    for idx in np.flatnonzero(np.sign(rs[:-1]) * np.sign(rs[1:]) < 0):
        interior.append(_bisect(sig, qs[idx], qs[idx + 1], rs[idx], tol))
    interior.extend(float(qs[idx]) for idx in np.flatnonzero(rs == 0.0))
    interior.sort()

    eps = 1.0 / GRID_POINTS

    def side_sign(q):
        return np.sign(residual(sig, q))

    points = [FixedPoint(0.0, "stable" if side_sign(eps) < 0 else "unstable")]
    for q in interior:
        left, right = side_sign(max(q - eps, 0.0)), side_sign(min(q + eps, 1.0))
        stab = "unstable" if (left < 0 and right > 0) else "stable"
        points.append(FixedPoint(float(q), stab))
    points.append(FixedPoint(1.0, "stable" if side_sign(1.0 - eps) > 0 else "unstable"))
    return points


def iterate_map(sig: SignalStructure, q0: float, n_steps: int) -> np.ndarray:
    """Forward-iterate q_{k+1} = Pr(x=1 | q_k); returns [q0, q1, ..., qn]."""
    if n_steps < 1:
        raise ValueError("need at least one iteration")
    out = np.empty(n_steps + 1)
    out[0] = q0
    for k in range(n_steps):
        out[k + 1] = prob_one(sig, out[k])
    return out


def curve_samples(sig: SignalStructure, n_points: int = 201) -> np.ndarray:
    """(q, Pr(x=1|q)) samples for plotting the self-consistency map."""
    qs = np.linspace(0.0, 1.0, n_points)
    return np.column_stack([qs, [prob_one(sig, q) for q in qs]])
