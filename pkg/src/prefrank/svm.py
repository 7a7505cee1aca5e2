"""Bias-free box-constrained SVM dual solver over a pair kernel.

Maximizes ``sum(a) - 0.5 a^T Q a`` over ``0 <= a <= C`` where
``Q[k, l] = y_k y_l K~[k, l]`` on the sampled pairs. Updates two coordinates at a
time (the pair with the largest projected-gradient violations) and solves each
two-variable box subproblem exactly.
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .kernels import PairKernel

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_C = 1.0
DENSE_LIMIT = 4000
OMEGA_BOX = 1e8


class NonPSDKernelError(ArithmeticError):
    """Negative curvature met along a coordinate direction."""


class UnboundedDualError(ArithmeticError):
    pass


@dataclass
class SvmProblem:
    kernel: PairKernel
    indices: np.ndarray
    labels: np.ndarray
    C: float = DEFAULT_C
    tol: float = DEFAULT_TOL
    max_passes: int | None = None
    cache_rows: int = 256

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.intp)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.indices.ndim != 1 or self.indices.shape != self.labels.shape:
            raise ValueError("indices and labels must be 1-D and of equal length")
        if self.indices.size == 0:
            raise ValueError("empty training sample")
        if np.unique(self.indices).size != self.indices.size:
            raise ValueError("sample indices must be distinct")
        if self.indices.min() < 0 or self.indices.max() >= self.kernel.N:
            raise ValueError(f"sample indices must lie in [0, {self.kernel.N})")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")

    @property
    def m(self) -> int:
        return self.indices.size

    def gram(self) -> np.ndarray:
        """Label-signed Gram matrix Q over the sample (m x m)."""
        y = self.labels
        return self.kernel.block(self.indices, self.indices) * np.outer(y, y)


@dataclass
class SvmSolution:
    alpha: np.ndarray
    dual_objective: float
    scores: np.ndarray
    beta: np.ndarray
    iterations: int = 0
    converged: bool = True
    max_violation: float = 0.0
    objective_trace: list = field(default_factory=list, repr=False)


class _DenseRows:
    def __init__(self, Q):
        self.Q = Q
        self.diag = np.diag(Q).copy()

    def row(self, r):
        return self.Q[r]


class _CachedRows:
    """LRU cache over rows of Q computed on demand from the pair kernel."""

    def __init__(self, problem: SvmProblem, size: int):
        self.p = problem
        self.size = max(2, size)
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()
        y = problem.labels
        self.diag = problem.kernel.diagonal(problem.indices) * y * y

    def row(self, r):
        hit = self.cache.get(r)
        if hit is not None:
            self.cache.move_to_end(r)
            return hit
        p = self.p
        out = p.kernel.block([p.indices[r]], p.indices)[0] * (p.labels[r] * p.labels)
        self.cache[r] = out
        if len(self.cache) > self.size:
            self.cache.popitem(last=False)
        return out


def _projected_gradient(alpha, g, C):
    pg = g.copy()
    at_lo = alpha <= 0.0
    at_hi = alpha >= C
    pg[at_lo] = np.maximum(g[at_lo], 0.0)
    pg[at_hi] = np.minimum(g[at_hi], 0.0)
    return pg


def _gain(g2, H, d):
    return g2 @ d - 0.5 * d @ H @ d


def _best_1d(lin, curv, lo, hi):
    if curv > 0:
        return min(max(lin / curv, lo), hi)
    if lin > 0:
        return hi
    if lin < 0:
        return lo
    return 0.0


def _solve_pair(g2, H, lo, hi, eps):
    """Exact maximizer of g2.d - d^T H d / 2 over the box lo <= d <= hi (2-D)."""
    a, b, c = H[0, 0], H[0, 1], H[1, 1]
    scale = max(abs(a), abs(c), 1.0)
    if a < -eps * scale or c < -eps * scale or a * c - b * b < -eps * scale * scale:
        raise NonPSDKernelError(f"negative curvature in 2x2 block [[{a:.3g},{b:.3g}],[{b:.3g},{c:.3g}]]")
    cands = [np.zeros(2)]
    det = a * c - b * b
    if det > eps * scale * scale:
        d = np.array([c * g2[0] - b * g2[1], a * g2[1] - b * g2[0]]) / det
        if lo[0] <= d[0] <= hi[0] and lo[1] <= d[1] <= hi[1]:
            return d
    for fixed in (lo[0], hi[0]):
        cands.append(np.array([fixed, _best_1d(g2[1] - b * fixed, c, lo[1], hi[1])]))
    for fixed in (lo[1], hi[1]):
        cands.append(np.array([_best_1d(g2[0] - b * fixed, a, lo[0], hi[0]), fixed]))
    gains = [_gain(g2, H, d) for d in cands]
    return cands[int(np.argmax(gains))]


def _gap_from_gradient(alpha, g, C):
    # primal - dual written through the dual gradient g = 1 - Q alpha
    return float(np.sum(C * np.maximum(g, 0.0) - alpha * g))


def _coordinate_ascent(rows, m, C, tol, max_iter, trace=False, stall_limit=None, gap_tol=None):
    alpha = np.zeros(m)
    g = np.ones(m)
    obj = 0.0
    diag = rows.diag
    scale = max(1.0, float(np.max(np.abs(diag)))) if m else 1.0
    eps = 1e-12
    if np.any(diag < -eps * scale):
        raise NonPSDKernelError(f"negative diagonal entry {diag.min():.3g} in kernel")
    stall_limit = stall_limit or max(50, 2 * m)
    # half of tol leaves room for rounding between the two gap evaluations
    gap_tol = 0.5 * tol if gap_tol is None else gap_tol
    stalled = 0
    history = [0.0] if trace else []
    it = 0
    viol_max = 0.0
    converged = False
    while it < max_iter:
        pg = _projected_gradient(alpha, g, C)
        viol = np.abs(pg)
        i = int(np.argmax(viol))
        viol_max = float(viol[i])
        if viol_max <= tol and _gap_from_gradient(alpha, g, C) <= gap_tol:
            converged = True
            break
        it += 1
        if m == 1:
            if diag[0] < -eps * scale:
                raise NonPSDKernelError("negative curvature")
            d_i = _best_1d(g[0], diag[0], -alpha[0], C - alpha[0])
            step = d_i * g[0] - 0.5 * diag[0] * d_i * d_i
            alpha[0] += d_i
            g -= rows.row(0) * d_i
        else:
            viol[i] = -1.0
            j = int(np.argmax(viol))
            qi = rows.row(i)
            qj = rows.row(j)
            H = np.array([[diag[i], qi[j]], [qi[j], diag[j]]])
            g2 = np.array([g[i], g[j]])
            lo = np.array([-alpha[i], -alpha[j]])
            hi = np.array([C - alpha[i], C - alpha[j]])
            d = _solve_pair(g2, H, lo, hi, 1e-10)
            step = float(_gain(g2, H, d))
            # snap onto bounds to keep active-set tests exact
            ai = alpha[i] + d[0]
            aj = alpha[j] + d[1]
            ai = 0.0 if ai <= 0.0 else (C if ai >= C else ai)
            aj = 0.0 if aj <= 0.0 else (C if aj >= C else aj)
            d = np.array([ai - alpha[i], aj - alpha[j]])
            alpha[i], alpha[j] = ai, aj
            g -= qi * d[0] + qj * d[1]
        obj += step
        if trace:
            history.append(obj)
        if step <= 1e-16 * max(1.0, abs(obj)):
            stalled += 1
            if stalled >= stall_limit:
                # no representable progress left; the KKT test alone decides
                converged = viol_max <= tol
                log.debug("coordinate ascent stalled after %d iterations", it)
                break
        else:
            stalled = 0
    # recompute objective from scratch to avoid drift in the running sum
    qa = 1.0 - g
    obj = float(alpha.sum() - 0.5 * alpha @ qa)
    return alpha, g, obj, it, converged, viol_max, history


def solve_dual(problem: SvmProblem, trace: bool = False) -> SvmSolution:
    m = problem.m
    if m <= DENSE_LIMIT:
        rows = _DenseRows(problem.gram())
    else:
        rows = _CachedRows(problem, problem.cache_rows)
    passes = problem.max_passes if problem.max_passes is not None else 10 * m
    alpha, g, obj, it, converged, viol, history = _coordinate_ascent(
        rows, m, problem.C, problem.tol, max_iter=passes * m, trace=trace
    )
    if not converged:
        log.warning("SVM dual stopped before convergence: max violation %.3e after %d updates", viol, it)
    coef = problem.labels * alpha
    beta = np.zeros(problem.kernel.N)
    beta[problem.indices] = coef
    scores = problem.kernel.matvec(coef, support=problem.indices)
    return SvmSolution(alpha, obj, scores, beta, it, converged, viol, history)


def primal_objective(problem: SvmProblem, solution: SvmSolution) -> float:
    y = problem.labels
    coef = y * solution.alpha
    f_s = solution.scores[problem.indices]
    w_sq = float(coef @ f_s)
    hinge = np.maximum(0.0, 1.0 - y * f_s)
    return 0.5 * w_sq + problem.C * float(hinge.sum())


def dual_gap(problem: SvmProblem, solution: SvmSolution) -> float:
    """Primal minus dual objective; nonnegative up to rounding."""
    return primal_objective(problem, solution) - solution.dual_objective


def kkt_violations(problem: SvmProblem, solution: SvmSolution, tol: float | None = None) -> list[int]:
    """Sample positions whose margin breaks the box KKT conditions at ``tol``."""
    tol = problem.tol if tol is None else tol
    a = solution.alpha
    margin = problem.labels * solution.scores[problem.indices]
    C = problem.C
    bad = (
        ((a <= 0.0) & (margin < 1.0 - tol))
        | ((a > 0.0) & (a < C) & (np.abs(margin - 1.0) > tol))
        | ((a >= C) & (margin > 1.0 + tol))
    )
    return np.flatnonzero(bad).tolist()


def omega(K, y, tol: float = 1e-9, box: float = OMEGA_BOX) -> float:
    """Hard-margin dual optimum ``max_{a >= 0} sum(a) - a^T (yy^T o K) a / 2``."""
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    if K.ndim == 0:
        K = K.reshape(1, 1)
    if y.ndim == 0:
        y = y.reshape(1)
    m = y.size
    Q = K * np.outer(y, y)
    alpha, _, obj, _, converged, _, _ = _coordinate_ascent(
        _DenseRows(Q), m, box, tol, max_iter=200 * m * m + 1000, gap_tol=math.inf
    )
    if np.any(alpha >= box * (1 - 1e-9)) or obj > 1e-3 * box:
        raise UnboundedDualError("hard-margin dual is unbounded (labels not separable by the kernel)")
    return obj


def optimal_c(theta: float, n: int, f: float) -> float:
    """Regularization constant ``(theta^3 / (N n sqrt(8 f (1 - f))))^(1/2)``."""
    if not (0.0 < f < 1.0):
        raise ValueError("f must lie in (0, 1)")
    N = n * (n - 1) / 2
    return math.sqrt(theta**3 / (N * n * math.sqrt(8.0 * f * (1.0 - f))))
