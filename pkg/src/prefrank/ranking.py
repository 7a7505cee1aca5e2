"""The Pref-Rank pipeline: pair sampling, SVM scoring, win counting, and losses.

Sign convention used everywhere: ``y_k = +1`` iff node ``i_k`` is preferred to
``j_k``, i.e. it has the larger preference value (equivalently the smaller rank).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, PairIndex
from .kernels import NodeKernel, PairKernel, PairMode, laplacian_kernel, ls_kernel
from .svm import DEFAULT_C, DEFAULT_TOL, SvmProblem, SvmSolution, solve_dual


class RankingError(ValueError):
    pass


class Task(str, enum.Enum):
    BR = "BR"
    OR = "OR"
    FR = "FR"


EMBEDDINGS = ("LS-Kron", "LS-PD", "Lap-Kron", "Lap-PD", "nLap-Kron", "nLap-PD")


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class Ranking:
    """``sigma[i]`` is the 1-based rank of node i (1 = most preferred)."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma)
        if s.ndim != 1 or s.size == 0:
            raise RankingError("ranking must be a non-empty vector")
        s = s.astype(int)
        if not np.array_equal(np.sort(s), np.arange(1, s.size + 1)):
            raise RankingError("ranking is not a permutation of 1..n")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @property
    def n(self) -> int:
        return self.sigma.size

    def __eq__(self, other):
        return isinstance(other, Ranking) and np.array_equal(self.sigma, other.sigma)

    def __hash__(self):
        return hash(self.sigma.tobytes())

    def order(self) -> np.ndarray:
        """Nodes listed best first."""
        return np.argsort(self.sigma)

    @classmethod
    def from_scores(cls, scores) -> "Ranking":
        """Higher score ranks first; ties broken by ascending node index."""
        scores = np.asarray(scores, dtype=float)
        order = np.lexsort((np.arange(scores.size), -scores))
        sigma = np.empty(scores.size, dtype=int)
        sigma[order] = np.arange(1, scores.size + 1)
        return cls(sigma)

    def to_text(self) -> str:
        return " ".join(str(int(r)) for r in self.sigma)

    @classmethod
    def from_text(cls, text: str) -> "Ranking":
        return cls(np.array([int(t) for t in text.split()]))


@dataclass(frozen=True, eq=False)
class PreferenceVector:
    values: np.ndarray
    task: Task = Task.FR
    levels: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise RankingError("preference must be a non-empty vector")
        task = Task(self.task)
        if task is Task.BR and not np.all(np.isin(v, (-1.0, 1.0))):
            raise RankingError("BR preferences must be +1/-1")
        if task is Task.OR:
            if self.levels is None or self.levels < 2:
                raise RankingError("OR preferences need a level count d >= 2")
            if not np.all((v == np.round(v)) & (v >= 1) & (v <= self.levels)):
                raise RankingError(f"OR preferences must be integers in 1..{self.levels}")
        if task is Task.FR and np.unique(v).size != v.size:
            raise RankingError("FR preferences must be pairwise distinct")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "task", task)

    @property
    def n(self) -> int:
        return self.values.size

    def ranking(self) -> Ranking:
        """Induced ranking; tied values are ordered by node index."""
        return Ranking.from_scores(self.values)

    def pair_labels(self, pairs: PairIndex | None = None) -> np.ndarray:
        """Per-pair label in {+1, -1, 0}; 0 marks tied pairs."""
        pairs = pairs or PairIndex(self.n)
        return np.sign(self.values[pairs.first] - self.values[pairs.second])

    def header(self) -> str:
        if self.task is Task.OR:
            return f"task={self.task.value} d={self.levels}"
        return f"task={self.task.value}"

    def write(self, path) -> None:
        body = "\n".join(repr(float(x)) for x in self.values)
        Path(path).write_text(f"{self.header()}\n{body}\n")

    @classmethod
    def read(cls, path) -> "PreferenceVector":
        lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("task="):
            raise RankingError(f"{path}: missing 'task=' header line")
        meta = dict(tok.split("=", 1) for tok in lines[0].split())
        levels = int(meta["d"]) if "d" in meta else None
        return cls(np.array([float(x) for x in lines[1:]]), Task(meta["task"]), levels)


@dataclass(frozen=True)
class PreferenceSample:
    n: int
    indices: np.ndarray
    labels: np.ndarray
    fraction: float
    requested: int
    dropped_ties: int = 0

    @property
    def m(self) -> int:
        return int(self.indices.size)

    def to_csv(self, path) -> None:
        rows = ["k,y"] + [f"{k + 1},{int(y)}" for k, y in zip(self.indices, self.labels)]
        Path(path).write_text("\n".join(rows) + "\n")

    @classmethod
    def from_csv(cls, path, n: int, fraction: float = math.nan) -> "PreferenceSample":
        lines = Path(path).read_text().split()
        if not lines or lines[0] != "k,y":
            raise RankingError(f"{path}: expected 'k,y' header")
        ks, ys = [], []
        for ln in lines[1:]:
            k, y = ln.split(",")
            ks.append(int(k) - 1)
            ys.append(int(y))
        return cls(n, np.array(ks, dtype=np.intp), np.array(ys, dtype=float), fraction, len(ks))


# ---------------------------------------------------------------------------
# sampling


def sample_pairs(n: int, f: float, preference: PreferenceVector, seed=None) -> PreferenceSample:
    """Draw ceil(N f) distinct pairs uniformly; label them and drop tied pairs."""
    if not (0.0 < f <= 1.0):
        raise RankingError(f"sampling fraction must lie in (0, 1], got {f}")
    if preference.n != n:
        raise RankingError(f"preference has {preference.n} entries, graph has {n} nodes")
    pairs = PairIndex(n)
    m = min(pairs.N, math.ceil(pairs.N * f - 1e-12))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    drawn = np.sort(rng.permutation(pairs.N)[:m])
    y = preference.pair_labels(pairs)[drawn]
    keep = y != 0
    return PreferenceSample(n, drawn[keep], y[keep].astype(float), f, m, int(np.count_nonzero(~keep)))


# ---------------------------------------------------------------------------
# pipeline


def node_kernel(graph: Graph, family: str) -> NodeKernel:
    family = family.lower()
    if family == "ls":
        return ls_kernel(graph)
    if family == "lap":
        return laplacian_kernel(graph, normalized=False)
    if family == "nlap":
        return laplacian_kernel(graph, normalized=True)
    raise RankingError(f"unknown kernel family {family!r}")


def parse_embedding(choice: str) -> tuple[str, PairMode]:
    try:
        family, lift = choice.split("-")
        mode = {"kron": PairMode.KRONECKER, "pd": PairMode.PAIRWISE_DIFFERENCE}[lift.lower()]
    except (ValueError, KeyError):
        raise RankingError(f"unknown embedding {choice!r}; expected one of {', '.join(EMBEDDINGS)}") from None
    if family.lower() not in ("ls", "lap", "nlap"):
        raise RankingError(f"unknown embedding {choice!r}; expected one of {', '.join(EMBEDDINGS)}")
    return family, mode


def build_pair_kernel(graph: Graph, embedding: str) -> PairKernel:
    family, mode = parse_embedding(embedding)
    return PairKernel(node_kernel(graph, family), mode)


def win_counts(scores, n: int) -> np.ndarray:
    """c(i) = pairs won by i as first element (score > 0) or as second (score < 0)."""
    scores = np.asarray(scores, dtype=float)
    pairs = PairIndex(n)
    if scores.shape != (pairs.N,):
        raise RankingError(f"expected {pairs.N} pair scores, got {scores.shape}")
    return np.bincount(pairs.first, weights=scores > 0, minlength=n).astype(int) + np.bincount(
        pairs.second, weights=scores < 0, minlength=n
    ).astype(int)


def ranking_from_scores(scores, n: int) -> Ranking:
    return Ranking.from_scores(win_counts(scores, n))


@dataclass
class PrefRankResult:
    scores: np.ndarray
    ranking: Ranking
    solution: SvmSolution | None = field(default=None, repr=False)
    embedding: str = ""


def pref_rank(
    graph: Graph,
    embedding: str,
    sample: PreferenceSample,
    C: float = DEFAULT_C,
    tol: float = DEFAULT_TOL,
    kernel: PairKernel | None = None,
) -> PrefRankResult:
    """Score every node pair with an SVM over the chosen pair embedding and rank by wins.

    ``kernel`` may be passed to reuse a pair kernel already built for ``graph``.
    """
    if sample.m == 0:
        raise RankingError("empty preference sample")
    if sample.n != graph.n:
        raise RankingError("sample and graph disagree on n")
    pk = kernel if kernel is not None else build_pair_kernel(graph, embedding)
    sol = solve_dual(SvmProblem(pk, sample.indices, sample.labels, C=C, tol=tol))
    return PrefRankResult(sol.scores, ranking_from_scores(sol.scores, graph.n), sol, embedding)


# ---------------------------------------------------------------------------
# losses


def _check_same(a: Ranking, b: Ranking):
    if a.n != b.n:
        raise RankingError(f"rankings of different sizes: {a.n} vs {b.n}")


def discordant_pairs(sigma_star: Ranking, sigma_hat: Ranking) -> int:
    _check_same(sigma_star, sigma_hat)
    s, h = sigma_star.sigma, sigma_hat.sigma
    iu = np.triu_indices(s.size, 1)
    prod = (s[iu[0]] - s[iu[1]]) * (h[iu[0]] - h[iu[1]])
    return int(np.count_nonzero(prod < 0))


def total_displacement(sigma_star: Ranking, sigma_hat: Ranking) -> int:
    _check_same(sigma_star, sigma_hat)
    return int(np.abs(sigma_star.sigma - sigma_hat.sigma).sum())


def kendall_tau(sigma_star: Ranking, sigma_hat: Ranking) -> float:
    """Fraction of node pairs ordered differently by the two rankings."""
    n = sigma_star.n
    N = n * (n - 1) // 2
    return discordant_pairs(sigma_star, sigma_hat) / N if N else 0.0


def spearman_footrule(sigma_star: Ranking, sigma_hat: Ranking) -> float:
    """Mean absolute rank displacement."""
    return total_displacement(sigma_star, sigma_hat) / sigma_star.n


def zero_one_loss(y, f):
    return (np.asarray(y) * np.asarray(f) <= 0).astype(float)


def hinge_loss(y, f):
    return np.maximum(0.0, 1.0 - np.asarray(y) * np.asarray(f))


def ramp_loss(y, f):
    return np.minimum(1.0, hinge_loss(y, f))


LOSSES = {"zero-one": zero_one_loss, "hinge": hinge_loss, "ramp": ramp_loss}


def pairwise_error(
    scores,
    preference: PreferenceVector,
    subset: str = "D",
    loss: str = "zero-one",
    sample: PreferenceSample | None = None,
) -> float:
    """Mean pairwise loss over a pair subset.

    ``subset``: "train" (sampled pairs), "test" (unsampled pairs), "all" (every
    pair; requires no ties) or "D" (pairs with distinct preferences). Tied pairs
    carry no label and are excluded from train/test.
    """
    scores = np.asarray(scores, dtype=float)
    pairs = PairIndex(preference.n)
    if scores.shape != (pairs.N,):
        raise RankingError(f"expected {pairs.N} pair scores, got {scores.shape}")
    y = preference.pair_labels(pairs)
    distinct = y != 0
    if subset == "D":
        mask = distinct
    elif subset == "all":
        if not distinct.all():
            raise RankingError("subset 'all' undefined with tied preferences; use 'D'")
        mask = distinct
    elif subset in ("train", "test"):
        if sample is None:
            raise RankingError(f"subset {subset!r} needs the training sample")
        in_sample = np.zeros(pairs.N, dtype=bool)
        in_sample[sample.indices] = True
        mask = distinct & (in_sample if subset == "train" else ~in_sample)
    else:
        raise RankingError(f"unknown subset {subset!r}")
    if not mask.any():
        raise RankingError(f"pair subset {subset!r} is empty")
    try:
        fn = LOSSES[loss]
    except KeyError:
        raise RankingError(f"unknown loss {loss!r}") from None
    return float(fn(y[mask], scores[mask]).mean())


def scores_from_ranking(ranking: Ranking) -> np.ndarray:
    """Pair scores implied by a ranking: positive iff i_k is ranked above j_k."""
    pairs = PairIndex(ranking.n)
    s = ranking.sigma
    return (s[pairs.second] - s[pairs.first]).astype(float)
