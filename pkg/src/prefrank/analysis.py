"""Numerical side of the theory: Rademacher bounds, generalization bounds,
Lovász-theta constants for special graph families and sample complexity."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .kernels import NodeKernel, PairKernel, PairMode
from .spectral import eig_sym

C1_DEFAULT = 5.05
MC_SAMPLES = 2000


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Rademacher complexity


def rademacher_bound(kernel: NodeKernel, mode: PairMode | str, C: float, p: float, pair_matrix=None) -> float:
    """Analytic upper bound on the transductive Rademacher complexity.

    Kronecker: ``C lambda1(K) sqrt(2p)``; pairwise difference: ``2C sqrt(p n lambda1(K))``;
    mode ``"generic"`` uses a materialized pair kernel: ``C sqrt(2 p lambda1(K~))``.
    """
    if not (0.0 <= p <= 1.0):
        raise AnalysisError(f"p must lie in [0, 1], got {p}")
    if str(mode) == "generic":
        if pair_matrix is None:
            raise AnalysisError("generic bound needs the materialized pair kernel")
        lam = max(0.0, float(eig_sym(pair_matrix).eigenvalues[0]))
        return C * math.sqrt(2.0 * p * lam)
    mode = PairMode(mode)
    lam = max(0.0, kernel.lambda1())
    if mode is PairMode.KRONECKER:
        return C * lam * math.sqrt(2.0 * p)
    return 2.0 * C * math.sqrt(p * kernel.n * lam)


def rademacher_mc(pair_matrix, C: float, p: float, samples: int = MC_SAMPLES, seed=None) -> tuple[float, float]:
    """Monte Carlo estimate (and standard error) of the transductive Rademacher complexity.

    For a fixed draw gamma the supremum of beta^T K~ gamma over ``|beta|_inf <= C``
    equals ``C |K~ gamma|_1``.
    """
    K = np.asarray(pair_matrix, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise AnalysisError("rademacher_mc needs a materialized square pair kernel")
    if not (0.0 < p <= 0.5):
        raise AnalysisError(f"p must lie in (0, 1/2], got {p}")
    N = K.shape[0]
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random((samples, N))
    gamma = np.where(u < p, 1.0, np.where(u < 2 * p, -1.0, 0.0))
    vals = C * np.abs(gamma @ K).sum(axis=1) / N
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan
    return float(vals.mean()), stderr


@dataclass
class BoundReport:
    embedding: str
    mode: str
    n: int
    lambda1_node: float
    lambda1_pair: float | None
    bound_value: float
    mc_estimate: float | None
    mc_stderr: float | None
    p: float
    C: float

    @property
    def valid(self) -> bool:
        if self.mc_estimate is None:
            return True
        return self.mc_estimate <= self.bound_value + 3.0 * (self.mc_stderr or 0.0)

    def as_row(self) -> dict:
        row = asdict(self)
        row["valid"] = self.valid
        return row


def bound_report(
    kernel: NodeKernel,
    mode: PairMode | str,
    C: float,
    p: float,
    embedding: str = "",
    samples: int = MC_SAMPLES,
    seed=None,
) -> BoundReport:
    """Analytic bound plus, when the pair kernel is small enough, its MC estimate."""
    generic = str(mode) == "generic"
    lift = PairKernel(kernel, PairMode.KRONECKER if generic else mode)
    lam_pair = est = err = None
    pair_matrix = None
    if kernel.n <= PairKernel.MATERIALIZE_MAX_N and lift.N > 0:
        pair_matrix = lift.materialize()
        lam_pair = float(eig_sym(pair_matrix).eigenvalues[0])
        if 0.0 < p <= 0.5:
            est, err = rademacher_mc(pair_matrix, C, p, samples, seed)
    bound = rademacher_bound(kernel, mode, C, p, pair_matrix)
    return BoundReport(
        embedding or kernel.kind.value,
        "generic" if generic else PairMode(mode).value,
        kernel.n,
        kernel.lambda1(),
        lam_pair,
        bound,
        est,
        err,
        p,
        C,
    )


def write_reports(reports, path) -> None:
    """JSON lines for ``*.jsonl``/``*.json`` paths, CSV otherwise."""
    rows = [r.as_row() if isinstance(r, BoundReport) else dict(r) for r in reports]
    path = Path(path)
    if path.suffix in (".jsonl", ".json"):
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        return
    if not rows:
        path.write_text("")
        return
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in r.items()})


# ---------------------------------------------------------------------------
# generalization bound


def generalization_rhs(
    train_error: float,
    mode: PairMode | str,
    lambda1: float,
    C: float,
    f: float,
    N: int,
    delta: float,
    rho: float = 1.0,
    B: float = 1.0,
    n: int | None = None,
    C1: float = C1_DEFAULT,
) -> float:
    """Right-hand side of the test-error bound for Kronecker or pairwise-difference embeddings.

    ``lambda1`` is the top eigenvalue of the node kernel (of the pair kernel for
    mode ``"generic"``); the PD form also needs ``n``.
    """
    if not (0.0 < f < 1.0):
        raise AnalysisError(f"f must lie in (0, 1), got {f}")
    if not (0.0 < delta < 1.0):
        raise AnalysisError(f"delta must lie in (0, 1), got {delta}")
    root = math.sqrt(f * (1.0 - f))
    if str(mode) == "generic":
        slack = C * math.sqrt(2.0 * lambda1) / (rho * root)
    elif PairMode(mode) is PairMode.KRONECKER:
        slack = C * lambda1 * math.sqrt(2.0) / (rho * root)
    else:
        if n is None:
            raise AnalysisError("pairwise-difference bound needs n")
        slack = 2.0 * C * math.sqrt(n * lambda1) / (rho * root)
    confidence = C1 * B / (1.0 - f) * math.sqrt(math.log(1.0 / delta) / (N * f))
    return train_error + slack + confidence


# ---------------------------------------------------------------------------
# special families and sample complexity


class Family(str, enum.Enum):
    COMPLETE = "complete"
    UNION_OF_CLIQUES = "union-cliques"
    COMPLEMENT_POWER_LAW = "complement-power-law"
    COMPLEMENT_K_COLORABLE = "complement-k-colorable"
    ERDOS_RENYI = "erdos-renyi"


@dataclass(frozen=True)
class ThetaFamily:
    family: Family
    k: int | None = None
    q: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family in (Family.UNION_OF_CLIQUES, Family.COMPLEMENT_K_COLORABLE) and not self.k:
            raise AnalysisError(f"{self.family.value} needs k >= 1")


def theta_bound(family: ThetaFamily, n: int) -> float:
    """Upper-bound constant for the Lovász number of a special family.

    Order-level families (power law, random graphs) use sqrt(n) with constant 1.
    """
    fam = family.family
    if fam is Family.COMPLETE:
        return 1.0
    if fam in (Family.UNION_OF_CLIQUES, Family.COMPLEMENT_K_COLORABLE):
        if family.k > n:
            raise AnalysisError(f"k={family.k} exceeds n={n}")
        return float(family.k)
    if fam in (Family.COMPLEMENT_POWER_LAW, Family.ERDOS_RENYI):
        return math.sqrt(n)
    raise AnalysisError(f"unknown family {fam!r}")


@dataclass(frozen=True)
class SampleComplexity:
    theta: float
    n: int
    epsilon: float
    f_raw: float
    f_star: float
    m_star: int
    m_bound: float
    admissible: bool


def epsilon_limit(theta: float, n: int) -> float:
    return (1.0 - math.log(theta) / math.log(n)) / 2.0


def sample_complexity(theta: float, n: int, epsilon: float, strict: bool = True) -> SampleComplexity:
    """Sufficient sampling fraction ``(sqrt(theta) / n^(1/2 - eps))^(4/3)`` and pair count.

    With ``strict`` the exponent must satisfy 0 < eps < (1 - log_n theta) / 2;
    otherwise any 0 < eps < 1/2 is evaluated and ``admissible`` records the check.
    """
    if n < 2:
        raise AnalysisError("n must be at least 2")
    if not (1.0 <= theta <= n):
        raise AnalysisError(f"theta must lie in [1, n], got {theta}")
    limit = epsilon_limit(theta, n)
    admissible = 0.0 < epsilon < limit
    if strict and not admissible:
        raise AnalysisError(f"epsilon must lie in (0, {limit:.6g}) for theta={theta}, n={n}")
    if not (0.0 < epsilon < 0.5):
        raise AnalysisError("epsilon must lie in (0, 1/2)")
    f_raw = (math.sqrt(theta) / n ** (0.5 - epsilon)) ** (4.0 / 3.0)
    f_star = min(f_raw, 1.0)
    N = n * (n - 1) // 2
    m_star = min(N, math.ceil(N * f_star - 1e-9))
    m_bound = 0.5 * (n ** (2.0 + 2.0 * epsilon) * theta) ** (2.0 / 3.0)
    return SampleComplexity(theta, n, epsilon, f_raw, f_star, m_star, m_bound, admissible)


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(value) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])
