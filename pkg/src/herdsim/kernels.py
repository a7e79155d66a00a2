"""Hot simulation kernels.

The synchronous action-update loop dominates sweep runtime, so it is
JIT-compiled with numba by default.  Setting HERDSIM_BACKEND=numpy selects
a vectorized pure-numpy path instead (numba is also skipped automatically
when it cannot be imported).  Both paths consume identical pre-drawn
random arrays and perform the same float operations, so trajectories agree
across backends.

Decisions are evaluated in a rescaled form: instead of comparing the
convex combination t(p, q) with 1/2, each scenario compares
``coef_p * p + sum_of_neighbor_actions`` with a per-agent constant.  The
two forms are algebraically identical, but the rescaled one keeps
half-integer tie cases exact in floating point (the neighbor sum is an
integer), which makes the three weighting scenarios collapse bit-for-bit
when the signal is uninformative (p = 1/2 exactly).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "active_backend",
    "scenario_coefficients",
    "initial_actions",
    "simulate",
    "SCENARIOS",
]

SCENARIOS = ("equal", "neighborhood_size", "relative_neighborhood")

_env = os.environ.get("HERDSIM_BACKEND", "").strip().lower()
if _env not in ("", "numba", "numpy"):
    raise RuntimeError(f"HERDSIM_BACKEND must be 'numba' or 'numpy', got {_env!r}")

_use_numba = _env != "numpy"
if _use_numba:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via env flag instead
        if _env == "numba":
            raise
        _use_numba = False


def active_backend() -> str:
    return "numba" if _use_numba else "numpy"


def scenario_coefficients(
    scenario: str, degrees: np.ndarray, n_agents: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent (coef_p, rhs) for the rescaled decision comparison.

    The decision is x=1 iff coef_p*p + nsum > rhs (tie keeps the previous
    action), where nsum is the integer sum of neighbor actions:
      equal:                  k*p + nsum  vs  k
      neighborhood size:      p + nsum    vs  (k+1)/2
      relative neighborhood:  (N-1-k)*p + nsum  vs  (N-1)/2
    Isolated agents (k=0) fall back to p vs 1/2 in every scenario.
    """
    k = np.asarray(degrees, dtype=np.float64)
    if scenario == "equal":
        coef, rhs = k.copy(), k.copy()
    elif scenario == "neighborhood_size":
        coef, rhs = np.ones_like(k), (k + 1.0) / 2.0
    elif scenario == "relative_neighborhood":
        coef, rhs = (n_agents - 1.0) - k, np.full_like(k, (n_agents - 1.0) / 2.0)
    else:
        raise ValueError(f"unknown weighting scenario: {scenario!r}")
    isolated = k == 0
    coef[isolated] = 1.0
    rhs[isolated] = 0.5
    return coef, rhs


def _beliefs(z_row, mu_true, dmu, msum, inv2s2, sigma):
    s = mu_true + sigma * z_row
    llr = dmu * (2.0 * s - msum) * inv2s2
    return 1.0 / (1.0 + np.exp(-llr))


def initial_actions(
    z0: np.ndarray,
    mu_true: np.ndarray,
    dmu: np.ndarray,
    msum: np.ndarray,
    inv2s2: np.ndarray,
    sigma: np.ndarray,
    bias_u: np.ndarray | None = None,
    bias: float = -1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Autarky initialization: x = 1 iff p > 1/2 (ties resolve to 0).

    With bias >= 0 the actions are overridden by independent Bernoulli(bias)
    draws; beliefs are still computed and returned.
    """
    p = _beliefs(z0, mu_true, dmu, msum, inv2s2, sigma)
    x = (p > 0.5).astype(np.int8)
    if bias >= 0.0:
        x = (bias_u < bias).astype(np.int8)
    return x, p


def _simulate_numpy(z, x0, adj, mu_true, dmu, msum, inv2s2, sigma, coef_p, rhs):
    n_steps, n = z.shape
    actions = np.empty((n_steps + 1, n), dtype=np.int8)
    actions[0] = x0
    p = np.full(n, np.nan)
    q = np.full(n, np.nan)
    k = adj.sum(axis=1).astype(np.float64)
    adj_u8 = adj.astype(np.uint8)
    has_nb = k > 0
    for t in range(1, n_steps + 1):
        prev = actions[t - 1]
        nsum = adj_u8 @ prev.astype(np.int64)
        p = _beliefs(z[t - 1], mu_true, dmu, msum, inv2s2, sigma)
        q = np.where(has_nb, nsum / np.where(has_nb, k, 1.0), np.nan)
        lhs = coef_p * p + nsum
        actions[t] = np.where(lhs > rhs, 1, np.where(lhs < rhs, 0, prev)).astype(np.int8)
    return actions, p, q


if _use_numba:

    @njit(cache=True)
    def _simulate_numba(
        z, x0, indptr, indices, mu_true, dmu, msum, inv2s2, sigma, coef_p, rhs
    ):  # pragma: no cover - compiled
        n_steps, n = z.shape
        actions = np.empty((n_steps + 1, n), dtype=np.int8)
        p_last = np.full(n, np.nan)
        q_last = np.full(n, np.nan)
        for i in range(n):
            actions[0, i] = x0[i]
        for t in range(1, n_steps + 1):
            for i in range(n):
                lo, hi = indptr[i], indptr[i + 1]
                nsum = 0
                for jj in range(lo, hi):
                    nsum += actions[t - 1, indices[jj]]
                s = mu_true[i] + sigma[i] * z[t - 1, i]
                llr = dmu[i] * (2.0 * s - msum[i]) * inv2s2[i]
                p = 1.0 / (1.0 + np.exp(-llr))
                p_last[i] = p
                if hi > lo:
                    q_last[i] = nsum / (hi - lo)
                lhs = coef_p[i] * p + nsum
                if lhs > rhs[i]:
                    actions[t, i] = 1
                elif lhs < rhs[i]:
                    actions[t, i] = 0
                else:
                    actions[t, i] = actions[t - 1, i]
        return actions, p_last, q_last


def simulate(
    z: np.ndarray,
    x0: np.ndarray,
    graph_csr: tuple[np.ndarray, np.ndarray],
    adj: np.ndarray,
    mu_true: np.ndarray,
    dmu: np.ndarray,
    msum: np.ndarray,
    inv2s2: np.ndarray,
    sigma: np.ndarray,
    coef_p: np.ndarray,
    rhs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run T synchronous update steps from x0.

    z has shape (T, N) of standard normals (one fresh signal per agent per
    step).  Returns (actions[(T+1) x N], last private beliefs, last social
    beliefs; NaN where undefined).
    """
    if _use_numba:
        indptr, indices = graph_csr
        return _simulate_numba(
            z, x0, indptr, indices, mu_true, dmu, msum, inv2s2, sigma, coef_p, rhs
        )
    return _simulate_numpy(z, x0, adj, mu_true, dmu, msum, inv2s2, sigma, coef_p, rhs)
