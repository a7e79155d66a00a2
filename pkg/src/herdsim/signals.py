"""Gaussian signal structures and the induced belief distribution.

An agent observes a noisy signal about a hidden binary state and converts
it into a posterior probability (the private belief) by Bayes' rule.  With
equal-variance Gaussian signal densities the belief has a closed-form
inverse and density, and the probability of choosing a state-matching
action given an adversarial social belief reduces to one Gaussian CDF
evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = [
    "SignalStructure",
    "sample_world_state",
    "sample_signal",
    "private_belief",
    "belief_inverse",
    "belief_cdf",
    "belief_pdf",
    "state_match_prob",
]


@dataclass(frozen=True)
class SignalStructure:
    """Equal-variance Gaussian signal pair: N(mu0, sigma) under state 0,
    N(mu1, sigma) under state 1."""

    mu0: float
    mu1: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def informative(self) -> bool:
        return self.mu0 != self.mu1

    def _require_informative(self):
        if not self.informative:
            raise ValueError("operation requires an informative structure (mu0 != mu1)")


def sample_world_state(rng: np.random.Generator) -> int:
    """Draw the hidden state, 0 or 1 with probability 1/2 each."""
    return int(rng.integers(0, 2))


def sample_signal(sig: SignalStructure, theta: int, rng: np.random.Generator, size=None):
    """Draw signal(s) from the state-conditional Gaussian density."""
    mu = sig.mu1 if theta == 1 else sig.mu0
    return rng.normal(mu, sig.sigma, size=size)


def private_belief(sig: SignalStructure, s):
    """Posterior probability of state 1 given signal s.

    p = (1 + f0(s)/f1(s))^-1, which for equal sigmas reduces to a logistic
    function of s.  Vectorizes over s.
    """
    llr = (sig.mu1 - sig.mu0) * (2.0 * np.asarray(s, dtype=float) - sig.mu0 - sig.mu1)
    llr /= 2.0 * sig.sigma**2
    out = 1.0 / (1.0 + np.exp(-llr))
    return float(out) if np.isscalar(s) else out


def belief_inverse(sig: SignalStructure, p: float) -> float:
    """Signal value that produces private belief p, for 0 < p < 1."""
    sig._require_informative()
    if not 0.0 < p < 1.0:
        raise ValueError(f"belief inverse requires 0 < p < 1, got {p}")
    num = sig.mu0**2 - sig.mu1**2 + 2.0 * sig.sigma**2 * math.log((1.0 - p) / p)
    return num / (2.0 * (sig.mu0 - sig.mu1))


def belief_cdf(sig: SignalStructure, p, theta: int):
    """Pr(private belief <= p | theta).  Vectorizes over p."""
    sig._require_informative()
    p = np.asarray(p, dtype=float)
    mu = sig.mu1 if theta == 1 else sig.mu0
    with np.errstate(divide="ignore"):
        s = (
            sig.mu0**2
            - sig.mu1**2
            + 2.0 * sig.sigma**2 * np.log((1.0 - p) / p)
        ) / (2.0 * (sig.mu0 - sig.mu1))
    inner = ndtr((s - mu) / sig.sigma)
    # p increasing in s iff mu1 > mu0; flip the tail otherwise
    cdf = inner if sig.mu1 > sig.mu0 else 1.0 - inner
    cdf = np.where(p <= 0.0, 0.0, np.where(p >= 1.0, 1.0, cdf))
    return float(cdf) if cdf.ndim == 0 else cdf


def belief_pdf(sig: SignalStructure, p, theta: int):
    """Density of the private belief at p given theta.

    Change of variables from the signal density: f_p(p) = |ds/dp| f_s(s(p)),
    with |ds/dp| = sigma^2 / (|mu1 - mu0| p (1 - p)).  Zero outside (0, 1).
    Vectorizes over p.
    """
    sig._require_informative()
    p = np.asarray(p, dtype=float)
    inside = (p > 0.0) & (p < 1.0)
    pc = np.where(inside, p, 0.5)  # placeholder to keep log/division finite
    mu = sig.mu1 if theta == 1 else sig.mu0
    dmu = sig.mu1 - sig.mu0
    s = (
        sig.mu0**2 - sig.mu1**2 + 2.0 * sig.sigma**2 * np.log((1.0 - pc) / pc)
    ) / (2.0 * (sig.mu0 - sig.mu1))
    jac = sig.sigma**2 / (abs(dmu) * pc * (1.0 - pc))
    f_s = np.exp(-((s - mu) ** 2) / (2.0 * sig.sigma**2)) / (
        math.sqrt(2.0 * math.pi) * sig.sigma
    )
    out = np.where(inside, jac * f_s, 0.0)
    return float(out) if out.ndim == 0 else out


def state_match_prob(sig: SignalStructure, q: float) -> float:
    """Probability of choosing the state-matching action given social belief q.

    Under the equal-weighting decision rule this is Pr(p <= 1 - q | theta=0);
    q here counts the fraction of neighbors on the state non-matching action.
    """
    if q <= 0.0:
        return 1.0
    if q >= 1.0:
        return 0.0
    return float(belief_cdf(sig, 1.0 - q, theta=0))
