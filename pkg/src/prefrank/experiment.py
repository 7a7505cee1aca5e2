"""Experiment harness: instance generation, sweeps over the sampling fraction, CSV output."""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import graph as graphs
from .baselines import DEFAULT_DAMPING, rank_centrality
from .graph import Graph
from .kernels import PairKernel
from .ranking import (
    PreferenceSample,
    PreferenceVector,
    Ranking,
    Task,
    build_pair_kernel,
    kendall_tau,
    pairwise_error,
    pref_rank,
    sample_pairs,
    scores_from_ranking,
    spearman_footrule,
)
from .svm import DEFAULT_C, DEFAULT_TOL

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_FRACTIONS = [round(0.05 * i, 2) for i in range(1, 11)]
ALGORITHMS = {"PR-Kron": "LS-Kron", "PR-PD": "LS-PD", "GR": "Lap-PD", "RC": None}
CSV_FIELDS = [
    "schema",
    "kind",
    "algorithm",
    "embedding",
    "f",
    "trial",
    "er_D",
    "d_k",
    "d_s",
    "train_error",
    "m_effective",
    "wall_time_ms",
    "seed",
    "C",
    "config_hash",
]
METRICS = ("er_D", "d_k", "d_s", "train_error", "m_effective")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# graphs and preferences


def make_graph(spec: dict, seed=None) -> Graph:
    """Build a graph from ``{"family": ..., params}`` or ``{"file": path}``."""
    spec = dict(spec)
    if "file" in spec:
        return graphs.read_edge_list(spec["file"])
    family = spec.pop("family", None)
    n = int(spec.get("n", 0))
    if family == "complete":
        return graphs.gen_complete(n)
    if family in ("union-cliques", "cliques"):
        return graphs.gen_union_cliques(n, int(spec["k"]))
    if family == "regular":
        return graphs.gen_regular(n, int(spec["r"]), seed)
    if family in ("erdos-renyi", "er"):
        return graphs.gen_erdos_renyi(n, float(spec["q"]), seed)
    if family == "two-cluster":
        return graphs.gen_two_cluster(n, float(spec["p"]), float(spec["q"]), seed)
    raise ConfigError(f"unknown graph family {family!r}")


def _break_ties(values: np.ndarray) -> np.ndarray:
    _, counts = np.unique(values, return_counts=True)
    if np.all(counts == 1):
        return values
    return values + 1e-12 * np.arange(values.size)


def fr_from_graph(graph: Graph, seed=None) -> PreferenceVector:
    """Full-ranking scores ``A alpha`` with alpha uniform on [0, 1]^n."""
    rng = np.random.default_rng(seed)
    alpha = rng.random(graph.n)
    return PreferenceVector(_break_ties(graph.adjacency @ alpha), Task.FR)


def quantize(values, levels: int) -> np.ndarray:
    """Equal-frequency ratings 1..levels by rank of ``values`` (higher value, higher rating)."""
    order = np.lexsort((np.arange(len(values)), np.asarray(values)))
    ratings = np.empty(len(values), dtype=int)
    ratings[order] = np.arange(len(values)) * levels // len(values) + 1
    return ratings


def two_cluster_preference(n: int, task: Task, levels: int = 10, br_prob: float = 0.8, seed=None) -> PreferenceVector:
    """Cluster-consistent preferences: nodes of the first half dominate the second half.

    FR: uniformly random order inside each cluster; OR(d): ratings from the upper
    half of 1..d for cluster one and the lower half for cluster two; BR: +1 with
    probability ``br_prob`` in cluster one and ``1 - br_prob`` in cluster two.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    if task is Task.FR:
        ranks = np.concatenate([rng.permutation(half) + 1, rng.permutation(n - half) + half + 1])
        return PreferenceVector((n + 1 - ranks).astype(float), Task.FR)
    if task is Task.OR:
        cut = levels // 2
        top = rng.integers(cut + 1, levels + 1, size=half)
        bottom = rng.integers(1, cut + 1, size=n - half)
        return PreferenceVector(np.concatenate([top, bottom]).astype(float), Task.OR, levels)
    p = np.where(np.arange(n) < half, br_prob, 1.0 - br_prob)
    return PreferenceVector(np.where(rng.random(n) < p, 1.0, -1.0), Task.BR)


def make_preference(graph: Graph, graph_spec: dict, task: Task, levels: int = 10, br_prob: float = 0.8, seed=None):
    task = Task(task)
    if graph_spec.get("family") == "two-cluster":
        return two_cluster_preference(graph.n, task, levels, br_prob, seed)
    fr = fr_from_graph(graph, seed)
    if task is Task.FR:
        return fr
    if task is Task.OR:
        return PreferenceVector(quantize(fr.values, levels).astype(float), Task.OR, levels)
    return PreferenceVector(np.where(quantize(fr.values, 2) == 2, 1.0, -1.0), Task.BR)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    graph: dict
    task: str = "FR"
    levels: int = 10
    br_prob: float = 0.8
    algorithms: list = field(default_factory=lambda: ["PR-Kron", "PR-PD", "GR", "RC"])
    fractions: list = field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    repeats: int = 10
    C: float = DEFAULT_C
    tol: float = DEFAULT_TOL
    damping: float = DEFAULT_DAMPING
    seed: int = 0
    fresh_instance: bool = False
    jobs: int = 1
    preference_file: str | None = None
    output: str | None = None

    def __post_init__(self):
        self.task = Task(self.task).value
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not self.fractions or any(not (0.0 < float(f) <= 1.0) for f in self.fractions):
            raise ConfigError("fraction grid must be a non-empty subset of (0, 1]")
        self.fractions = [float(f) for f in self.fractions]
        for a in self.algorithms:
            algorithm_embedding(a)
        if not self.C > 0:
            raise ConfigError("C must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(v) for k, v in self.__dict__.items()}

    def hash(self) -> str:
        d = self.to_dict()
        # neither the destination nor the worker count changes any result
        d.pop("output", None)
        d.pop("jobs", None)
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "graph" not in data:
            raise ConfigError("config needs a 'graph' section")
        return cls(**data)


def algorithm_embedding(name: str) -> str | None:
    if name in ALGORITHMS:
        return ALGORITHMS[name]
    from .ranking import parse_embedding

    parse_embedding(name)
    return name


def trial_seed(seed: int, f: float, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(round(f * 1_000_000)), int(trial)])


# ---------------------------------------------------------------------------
# running


@dataclass
class Instance:
    graph: Graph
    preference: PreferenceVector
    kernels: dict = field(default_factory=dict)

    def kernel(self, embedding: str) -> PairKernel:
        if embedding not in self.kernels:
            self.kernels[embedding] = build_pair_kernel(self.graph, embedding)
        return self.kernels[embedding]


def build_instance(config: ExperimentConfig, seed) -> Instance:
    ss = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    g_seed, p_seed = ss.spawn(2)
    graph = make_graph(config.graph, np.random.default_rng(g_seed))
    if config.preference_file:
        pref = PreferenceVector.read(config.preference_file)
    else:
        pref = make_preference(graph, config.graph, Task(config.task), config.levels, config.br_prob, p_seed)
    if pref.n != graph.n:
        raise ConfigError(f"preference has {pref.n} entries but graph has {graph.n} nodes")
    return Instance(graph, pref)


def run_algorithm(name: str, instance: Instance, sample: PreferenceSample, C: float, tol: float, damping: float):
    """Returns (pair scores, predicted ranking)."""
    emb = algorithm_embedding(name)
    if emb is None:
        ranking = rank_centrality(instance.graph.n, sample, damping)
        return scores_from_ranking(ranking), ranking
    res = pref_rank(instance.graph, emb, sample, C=C, tol=tol, kernel=instance.kernel(emb))
    return res.scores, res.ranking


def evaluate(name, instance, sample, scores, ranking: Ranking) -> dict:
    pref = instance.preference
    star = pref.ranking()
    row = {
        "er_D": pairwise_error(scores, pref, "D"),
        "d_k": kendall_tau(star, ranking),
        "d_s": spearman_footrule(star, ranking),
        "train_error": pairwise_error(scores, pref, "train", sample=sample) if sample.m else math.nan,
        "m_effective": sample.m,
    }
    return row


def run_trial(config: ExperimentConfig, f: float, trial: int, shared: Instance | None) -> list[dict]:
    ss = trial_seed(config.seed, f, trial)
    inst_seed, sample_seed = ss.spawn(2)
    instance = shared if shared is not None else build_instance(config, inst_seed)
    sample = sample_pairs(instance.graph.n, f, instance.preference, np.random.default_rng(sample_seed))
    rows = []
    for name in config.algorithms:
        t0 = time.perf_counter()
        if sample.m == 0:
            raise RuntimeError(f"f={f} trial={trial}: sample is empty after dropping ties")
        scores, ranking = run_algorithm(name, instance, sample, config.C, config.tol, config.damping)
        wall = (time.perf_counter() - t0) * 1000.0
        row = evaluate(name, instance, sample, scores, ranking)
        row.update(
            kind="trial",
            algorithm=name,
            embedding=algorithm_embedding(name) or "",
            f=f,
            trial=trial,
            wall_time_ms=wall,
            seed=config.seed,
        )
        rows.append(row)
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    out = []
    for kind, fn in (("mean", np.mean), ("std", lambda v: np.std(v, ddof=0))):
        row = {k: rows[0][k] for k in ("algorithm", "embedding", "f", "seed")}
        row.update(kind=kind, trial="")
        for m in METRICS + ("wall_time_ms",):
            row[m] = float(fn([r[m] for r in rows]))
        out.append(row)
    return out


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


class CsvWriter:
    """Single serialized writer for metrics rows."""

    def __init__(self, path, config: ExperimentConfig):
        self.path = Path(path) if path else None
        self.fh = self.path.open("w", newline="") if self.path else None
        self.writer = csv.DictWriter(self.fh, fieldnames=CSV_FIELDS) if self.fh else None
        self.extra = {"schema": SCHEMA_VERSION, "C": config.C, "config_hash": config.hash()}
        if self.fh:
            self.fh.write(f"# schema={SCHEMA_VERSION} config_hash={config.hash()}\n")
            self.writer.writeheader()

    def write(self, row: dict):
        if self.writer:
            full = {**self.extra, **row}
            self.writer.writerow({k: _fmt(full.get(k)) for k in CSV_FIELDS})
            self.fh.flush()

    def close(self):
        if self.fh:
            self.fh.close()


def run_experiment(config: ExperimentConfig, output=None, progress=None) -> list[dict]:
    """Run every (f, trial) and return trial and summary rows in (algorithm, f, trial) order.

    On failure the rows finished so far plus an ``error`` marker row are flushed
    before the exception propagates.
    """
    output = output if output is not None else config.output
    shared = None if config.fresh_instance else build_instance(config, config.seed)
    if shared is not None:
        for name in config.algorithms:
            if algorithm_embedding(name):
                shared.kernel(algorithm_embedding(name))
    results: dict[tuple[str, float], list[dict]] = {(a, f): [] for a in config.algorithms for f in config.fractions}
    writer = CsvWriter(output, config)
    error = None
    tasks = [(f, t) for f in config.fractions for t in range(config.repeats)]
    try:
        if config.jobs > 1:
            # numpy releases the GIL in the heavy kernels; rows are regrouped below
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(run_trial, config, f, t, shared) for f, t in tasks]
                for (f, t), fut in zip(tasks, futures):
                    for row in fut.result():
                        results[(row["algorithm"], f)].append(row)
                    if progress:
                        progress(f, t)
        else:
            for f, t in tasks:
                for row in run_trial(config, f, t, shared):
                    results[(row["algorithm"], f)].append(row)
                if progress:
                    progress(f, t)
    except Exception as exc:  # noqa: BLE001 - reported in the CSV, then re-raised
        error = exc
    rows = []
    for a in config.algorithms:
        for f in config.fractions:
            group = results[(a, f)]
            rows.extend(group)
            if group and len(group) == config.repeats:
                rows.extend(summarize(group))
    for r in rows:
        writer.write({**r, "C": config.C})
    if error is not None:
        writer.write({"kind": "error", "algorithm": type(error).__name__, "embedding": str(error)})
        writer.close()
        raise error
    writer.close()
    return rows


def read_metrics(path) -> list[dict]:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# ---------------------------------------------------------------------------
# real-data ingestion


def labels_to_preference(labels, task: Task) -> PreferenceVector:
    labels = np.asarray(labels, dtype=float)
    task = Task(task)
    if task is Task.BR:
        return PreferenceVector(np.where(labels == labels.max(), 1.0, -1.0), Task.BR)
    if task is Task.OR:
        uniq = np.unique(labels)
        ratings = np.searchsorted(uniq, labels) + 1
        return PreferenceVector(ratings.astype(float), Task.OR, max(2, uniq.size))
    return PreferenceVector(_break_ties(labels), Task.FR)


def ingest(feature_file, out_dir, subset_size: int = 40, subsets: int = 10, task="FR", seed=0) -> list[tuple[Path, Path]]:
    """Cut random item subsets, build RBF-threshold graphs, write graph/preference pairs."""
    labels, X = graphs.read_feature_file(feature_file)
    if subset_size > labels.size:
        raise ConfigError(f"subset size {subset_size} exceeds dataset size {labels.size}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    written = []
    for s in range(subsets):
        items = np.sort(rng.choice(labels.size, size=subset_size, replace=False))
        g = graphs.graph_from_features(X[items])
        pref = labels_to_preference(labels[items], task)
        gpath = out / f"subset_{s:02d}.edges"
        ppath = out / f"subset_{s:02d}.pref"
        graphs.write_edge_list(g, gpath)
        pref.write(ppath)
        (out / f"subset_{s:02d}.items").write_text(" ".join(str(i + 1) for i in items) + "\n")
        written.append((gpath, ppath))
    return written
