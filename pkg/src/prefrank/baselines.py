"""Comparison rankers: Rank Centrality and Graph Rank."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, PairIndex
from .ranking import PrefRankResult, PreferenceSample, Ranking, pref_rank
from .svm import DEFAULT_C

DEFAULT_DAMPING = 0.01
POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000


@dataclass
class MarkovChain:
    transition: np.ndarray
    stationary: np.ndarray
    iterations: int = 0


def comparison_chain(n: int, sample: PreferenceSample, damping: float = DEFAULT_DAMPING) -> np.ndarray:
    """Random walk that moves from loser to winner.

    ``P[l, w] = (share of l-vs-w comparisons won by w) / d_max`` where d_max is the
    largest number of distinct opponents of any node; the diagonal keeps the
    remaining mass. The result is mixed with the uniform chain by ``damping``.
    """
    if not (0.0 <= damping <= 1.0):
        raise ValueError("damping must lie in [0, 1]")
    pairs = PairIndex(n)
    wins = np.zeros((n, n))
    i = pairs.first[sample.indices]
    j = pairs.second[sample.indices]
    winner = np.where(sample.labels > 0, i, j)
    loser = np.where(sample.labels > 0, j, i)
    np.add.at(wins, (winner, loser), 1.0)
    total = wins + wins.T
    compared = total > 0
    share = np.zeros((n, n))
    share[compared] = wins.T[compared] / total[compared]
    d_max = int(compared.sum(axis=1).max()) if compared.any() else 0
    P = share / d_max if d_max else np.zeros((n, n))
    P[np.diag_indices(n)] = 1.0 - P.sum(axis=1)
    return (1.0 - damping) * P + damping / n


def stationary_distribution(P: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER):
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() <= tol:
            return nxt, it
        pi = nxt
    return pi, max_iter


def rank_centrality_chain(n: int, sample: PreferenceSample, damping: float = DEFAULT_DAMPING) -> MarkovChain:
    P = comparison_chain(n, sample, damping)
    pi, it = stationary_distribution(P)
    return MarkovChain(P, pi, it)


def rank_centrality(n: int, sample: PreferenceSample, damping: float = DEFAULT_DAMPING) -> Ranking:
    chain = rank_centrality_chain(n, sample, damping)
    # rounding lets exactly tied states fall back to the index tie-break
    return Ranking.from_scores(np.round(chain.stationary, 12))


def graph_rank(graph: Graph, sample: PreferenceSample, C: float = DEFAULT_C, **kwargs) -> PrefRankResult:
    """Laplacian-regularized pairwise SVM: Pref-Rank with the Lap-PD embedding."""
    return pref_rank(graph, "Lap-PD", sample, C=C, **kwargs)
