"""Recursive Bayesian filter over per-candidate loop-closure hypotheses.

Each previously visited image i is a candidate with a binary state ("the
current image closes a loop with i"). Per incoming frame:

1. Time evolution: the prior for candidate i is seeded from the previous
   posteriors in a +/-window neighborhood of i (a loop at i makes loops at
   adjacent frames likely), then passed through a sticky transition
   (p_stay if on, p_leak if off).
2. Measurement: similarity scores are converted to likelihoods relative to
   the score population of the current frame; only scores at least one
   standard deviation above the mean carry evidence.
3. Posterior: per-candidate two-point Bayes update against a null
   hypothesis with constant likelihood.

Candidates are independent, so several simultaneous loop closures can hold
high posteriors at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BayesParams",
    "neighborhood_probability",
    "neighborhood_probabilities",
    "belief",
    "score_likelihoods",
    "update_posteriors",
    "detect",
]


@dataclass(frozen=True)
class BayesParams:
    """Filter constants.

    p_stay / p_leak: transition probabilities into the "loop" state from the
        previous "loop" / "no loop" states; must sum to 1.
    window: neighborhood half-width used to seed a candidate's prior from
        the previous frame's posteriors.
    prior_new: prior for a candidate with no prior neighborhood.
    null_likelihood: constant likelihood of the no-loop hypothesis.
    detection_threshold: posteriors strictly above this are detections.
    low_score_evidence: if True, scores at most one standard deviation
        above the mean carry the scaled evidence term instead (study
        variant; likelihoods are clamped at zero).
    noisy_or_neighborhood: combine neighborhood posteriors with a noisy-OR
        instead of a max (study variant).
    """

    p_stay: float = 0.9
    p_leak: float = 0.1
    window: int = 2
    prior_new: float = 0.1
    null_likelihood: float = 1.0
    detection_threshold: float = 0.7
    low_score_evidence: bool = False
    noisy_or_neighborhood: bool = False

    def __post_init__(self) -> None:
        for name in ("p_stay", "p_leak", "prior_new"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if abs(self.p_stay + self.p_leak - 1.0) > 1e-12:
            raise ValueError("p_stay + p_leak must equal 1")
        if self.window < 0:
            raise ValueError("window must be non-negative")
        if self.null_likelihood <= 0:
            raise ValueError("null_likelihood must be positive")
        if not 0.0 <= self.detection_threshold <= 1.0:
            raise ValueError("detection_threshold must be in [0, 1]")


def neighborhood_probability(previous: np.ndarray | None, index: int,
                             params: BayesParams = BayesParams()) -> float:
    """Prior loop probability for one candidate from the previous posteriors.

    Takes the maximum previous posterior over candidates within
    ``params.window`` of ``index`` (including ``index`` itself, clipped to
    the valid range). An empty neighborhood yields ``params.prior_new``.
    """
    if previous is None or len(previous) == 0:
        return params.prior_new
    lo = max(0, index - params.window)
    hi = min(len(previous), index + params.window + 1)
    if lo >= hi:
        return params.prior_new
    window = np.asarray(previous, dtype=np.float64)[lo:hi]
    if params.noisy_or_neighborhood:
        return float(1.0 - np.prod(1.0 - window))
    return float(window.max())


def neighborhood_probabilities(previous: np.ndarray | None, n: int,
                               params: BayesParams = BayesParams(),
                               ) -> np.ndarray:
    """Vectorized :func:`neighborhood_probability` for candidates 0..n-1."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if previous is None or len(previous) == 0:
        return np.full(n, params.prior_new, dtype=np.float64)
    prev = np.asarray(previous, dtype=np.float64)
    if params.noisy_or_neighborhood:
        return np.array([
            neighborhood_probability(prev, i, params) for i in range(n)
        ], dtype=np.float64)
    out = np.full(n, -np.inf, dtype=np.float64)
    for shift in range(-params.window, params.window + 1):
        lo = max(0, -shift)
        hi = min(n, len(prev) - shift)
        if lo < hi:
            np.maximum(out[lo:hi], prev[lo + shift:hi + shift],
                       out=out[lo:hi])
    empty = ~np.isfinite(out)
    out[empty] = params.prior_new
    return out


def belief(p_neighborhood: float | np.ndarray,
           params: BayesParams = BayesParams()):
    """Prior belief (no-loop, loop) after the sticky transition.

    belief_loop = p_stay * p + p_leak * (1 - p); belief_no = 1 - belief_loop.
    Accepts scalars or arrays.
    """
    p = np.asarray(p_neighborhood, dtype=np.float64)
    b_loop = params.p_stay * p + params.p_leak * (1.0 - p)
    b_no = 1.0 - b_loop
    if np.ndim(p_neighborhood) == 0:
        return float(b_no), float(b_loop)
    return b_no, b_loop


def score_likelihoods(scores: np.ndarray,
                      params: BayesParams = BayesParams()) -> np.ndarray:
    """Likelihood of the loop hypothesis per candidate, from this frame's scores.

    With mean mu and population standard deviation sd of the score vector,
    a score s at least sd above the mean gets likelihood (s - sd) / mu;
    everything else gets 1 (no evidence either way). Degenerate score
    populations (fewer than 2 scores, non-positive mean, or zero spread)
    carry no information: all ones.
    """
    s = np.asarray(scores, dtype=np.float64)
    ones = np.ones(s.shape[0], dtype=np.float64)
    if s.shape[0] < 2:
        return ones
    mu = float(s.mean())
    sd = float(s.std())
    if mu <= 0.0 or sd == 0.0:
        return ones
    if params.low_score_evidence:
        informative = s <= mu + sd
    else:
        informative = s >= mu + sd
    out = ones
    out[informative] = np.maximum((s[informative] - sd) / mu, 0.0)
    return out


def update_posteriors(previous: np.ndarray | None, scores: np.ndarray,
                      params: BayesParams = BayesParams()) -> np.ndarray:
    """One filter step: previous posteriors + current scores -> posteriors.

    ``scores`` has one entry per current candidate; candidates beyond the
    previous frame's range are new and start from ``prior_new`` (or from
    whatever previous posteriors fall inside their neighborhood window).
    """
    s = np.asarray(scores, dtype=np.float64)
    p_nbr = neighborhood_probabilities(previous, s.shape[0], params)
    b_no, b_loop = belief(p_nbr, params)
    like = score_likelihoods(s, params)
    numer = like * b_loop
    denom = numer + params.null_likelihood * b_no
    posterior = np.zeros(s.shape[0], dtype=np.float64)
    ok = denom > 0
    posterior[ok] = numer[ok] / denom[ok]
    return posterior


def detect(posterior: np.ndarray,
           params: BayesParams = BayesParams()) -> np.ndarray:
    """Candidate indices whose posterior strictly exceeds the threshold."""
    p = np.asarray(posterior, dtype=np.float64)
    return np.nonzero(p > params.detection_threshold)[0]
