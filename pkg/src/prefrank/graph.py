"""Undirected graphs, node-pair indexing and graph generators.

Nodes are 0-based internally. The edge-list text format is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    pass


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph stored as a dense 0/1 adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise GraphError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        a = (a != 0).astype(np.int8)
        if not np.array_equal(a, a.T):
            raise GraphError("adjacency is not symmetric")
        if np.any(np.diag(a)):
            raise GraphError("adjacency has self-loops")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.n, self.adjacency.tobytes()))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        a = np.zeros((n, n), dtype=np.int8)
        for i, j in edges:
            a[i, j] = a[j, i] = 1
        return cls(a)


class PairIndex:
    """Lexicographic enumeration of node pairs (i, j), i < j.

    Pair k maps to ``(first[k], second[k])``; ``(0,1), (0,2), ..., (n-2, n-1)``.
    """

    def __init__(self, n: int):
        if n < 1:
            raise GraphError("n must be positive")
        self.n = n
        self.N = n * (n - 1) // 2
        first, second = np.triu_indices(n, 1)
        self.first = first.astype(np.intp)
        self.second = second.astype(np.intp)
        self.first.setflags(write=False)
        self.second.setflags(write=False)

    def __len__(self):
        return self.N

    def index(self, i: int, j: int) -> int:
        if not (0 <= i < j < self.n):
            raise GraphError(f"invalid pair ({i}, {j}) for n={self.n}")
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def pair(self, k: int) -> tuple[int, int]:
        if not (0 <= k < self.N):
            raise GraphError(f"pair index {k} out of range [0, {self.N})")
        return int(self.first[k]), int(self.second[k])

    def index_array(self, i, j) -> np.ndarray:
        i = np.asarray(i)
        j = np.asarray(j)
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)


# ---------------------------------------------------------------------------
# generators


def gen_complete(n: int) -> Graph:
    if n < 1:
        raise GraphError("n must be positive")
    return Graph(np.ones((n, n), dtype=np.int8) - np.eye(n, dtype=np.int8))


def clique_blocks(n: int, k: int) -> np.ndarray:
    """Block label per node: k contiguous blocks of near-equal size, larger blocks first."""
    if not (1 <= k <= n):
        raise GraphError(f"need 1 <= k <= n, got k={k}, n={n}")
    sizes = [n // k + (1 if b < n % k else 0) for b in range(k)]
    return np.repeat(np.arange(k), sizes)


def gen_union_cliques(n: int, k: int) -> Graph:
    labels = clique_blocks(n, k)
    a = (labels[:, None] == labels[None, :]).astype(np.int8)
    np.fill_diagonal(a, 0)
    return Graph(a)


def gen_regular(n: int, r: int, seed=None, max_restarts: int = 100) -> Graph:
    """Random r-regular graph: configuration-model pairing followed by edge-swap repair."""
    if n < 1 or not (0 <= r < n):
        raise GraphError(f"need 0 <= r < n, got r={r}, n={n}")
    if (n * r) % 2:
        raise GraphError(f"no {r}-regular graph on {n} nodes: n*r is odd")
    rng = _rng(seed)
    if r == 0:
        return Graph(np.zeros((n, n), dtype=np.int8))
    for _ in range(max_restarts):
        stubs = np.repeat(np.arange(n), r)
        rng.shuffle(stubs)
        pairs = [tuple(sorted(p)) for p in stubs.reshape(-1, 2).tolist()]
        edges = _repair_pairing(pairs, rng, n)
        if edges is not None:
            return Graph.from_edges(n, edges)
    raise GraphError(f"failed to build a {r}-regular graph on {n} nodes after {max_restarts} restarts")


def _repair_pairing(pairs, rng, n, max_swaps_per_edge: int = 50):
    # Keep the first copy of each simple edge; every self-loop or repeated edge is
    # fixed by a degree-preserving double swap against a random good edge.
    good: list[tuple[int, int]] = []
    present: set[tuple[int, int]] = set()
    bad = []
    for a, b in pairs:
        if a != b and (a, b) not in present:
            good.append((a, b))
            present.add((a, b))
        else:
            bad.append((a, b))
    for a, b in bad:
        for _ in range(max_swaps_per_edge):
            if not good:
                return None
            idx = int(rng.integers(len(good)))
            c, d = good[idx]
            if rng.random() < 0.5:
                c, d = d, c
            e1 = tuple(sorted((a, c)))
            e2 = tuple(sorted((b, d)))
            if a == c or b == d or e1 == e2 or e1 in present or e2 in present:
                continue
            present.discard(good[idx])
            good[idx] = e1
            good.append(e2)
            present.update((e1, e2))
            break
        else:
            return None
    return good


def gen_erdos_renyi(n: int, q: float, seed=None) -> Graph:
    if not (0.0 <= q <= 1.0):
        raise GraphError(f"edge probability must lie in [0, 1], got {q}")
    rng = _rng(seed)
    upper = np.triu(rng.random((n, n)) < q, 1)
    return Graph((upper | upper.T).astype(np.int8))


def gen_two_cluster(n: int, p: float, q: float, seed=None) -> Graph:
    """Two equal clusters (first and second half of the nodes); within w.p. p, across w.p. q."""
    if n % 2:
        raise GraphError(f"two-cluster graph needs an even node count, got {n}")
    if not (0.0 <= q <= p <= 1.0):
        raise GraphError(f"need 0 <= q <= p <= 1, got p={p}, q={q}")
    rng = _rng(seed)
    cluster = np.arange(n) >= n // 2
    prob = np.where(cluster[:, None] == cluster[None, :], p, q)
    upper = np.triu(rng.random((n, n)) < prob, 1)
    return Graph((upper | upper.T).astype(np.int8))


def graph_from_features(X) -> Graph:
    """RBF similarity graph thresholded at the mean off-diagonal similarity.

    The bandwidth is the mean pairwise Euclidean distance. An edge is present iff
    its similarity is strictly above the mean.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 2:
        raise GraphError("need at least two points")
    sq = np.sum(X * X, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    np.fill_diagonal(d2, 0.0)
    iu = np.triu_indices(n, 1)
    mu = float(np.mean(np.sqrt(d2[iu])))
    if mu == 0.0:
        raise GraphError("all points identical: mean pairwise distance is zero")
    sim = np.exp(-d2 / (2.0 * mu * mu))
    threshold = float(np.mean(sim[iu]))
    a = (sim > threshold).astype(np.int8)
    np.fill_diagonal(a, 0)
    return Graph(a)


# ---------------------------------------------------------------------------
# file formats


def write_edge_list(graph: Graph, path) -> None:
    lines = [str(graph.n)] + [f"{i + 1} {j + 1}" for i, j in graph.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    rows = [ln.split() for ln in Path(path).read_text().splitlines()]
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows or len(rows[0]) != 1:
        raise GraphError(f"{path}: first line must hold the node count")
    n = int(rows[0][0])
    seen = set()
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'i j'")
        i, j = int(r[0]) - 1, int(r[1]) - 1
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"{path}:{lineno}: node out of range 1..{n}")
        if i == j:
            raise GraphError(f"{path}:{lineno}: self-loop on node {i + 1}")
        e = (min(i, j), max(i, j))
        if e in seen:
            raise GraphError(f"{path}:{lineno}: duplicate edge {i + 1} {j + 1}")
        seen.add(e)
    return Graph.from_edges(n, seen)


def read_feature_file(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse sparse ``label index:value ...`` lines into (labels, dense features)."""
    labels = []
    entries = []
    dim = 0
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            labels.append(float(parts[0]))
            row = {}
            for tok in parts[1:]:
                idx, val = tok.split(":", 1)
                idx = int(idx)
                if idx < 1:
                    raise ValueError(f"feature index {idx} < 1")
                row[idx - 1] = float(val)
                dim = max(dim, idx)
        except ValueError as exc:
            raise GraphError(f"{path}:{lineno}: {exc}") from exc
        entries.append(row)
    if not labels:
        raise GraphError(f"{path}: no data rows")
    X = np.zeros((len(labels), dim))
    for r, row in enumerate(entries):
        for c, v in row.items():
            X[r, c] = v
    return np.array(labels), X
