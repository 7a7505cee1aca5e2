"""Node kernels on a graph and their lift to kernels over node pairs.

Two lifts are provided. The Kronecker lift scores pair (i, j) against (i', j') by
``K[i, i'] * K[j, j']``; the pairwise-difference lift embeds a pair as
``u_i - u_j`` which gives ``K[i,i'] - K[i,j'] - K[j,i'] + K[j,j']``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, PairIndex
from .spectral import eig_sym, is_psd, pseudo_inverse

MEMBERSHIP_TOL = 1e-8


class KernelKind(str, enum.Enum):
    LS = "LS"
    LAPLACIAN = "Laplacian"
    NORMALIZED_LAPLACIAN = "NormalizedLaplacian"
    CUSTOM = "Custom"


class PairMode(str, enum.Enum):
    KRONECKER = "Kronecker"
    PAIRWISE_DIFFERENCE = "PairwiseDifference"


class KernelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NodeKernel:
    matrix: np.ndarray
    kind: KernelKind = KernelKind.CUSTOM

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise KernelError(f"kernel must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "kind", KernelKind(self.kind))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def lambda1(self) -> float:
        return float(eig_sym(self.matrix).eigenvalues[0])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")


def laplacian_kernel(graph: Graph, normalized: bool = False) -> NodeKernel:
    a = graph.adjacency.astype(float)
    deg = a.sum(axis=1)
    if normalized:
        if np.any(deg == 0):
            isolated = np.flatnonzero(deg == 0).tolist()
            raise KernelError(f"normalized Laplacian undefined with isolated nodes {isolated}")
        s = 1.0 / np.sqrt(deg)
        lap = np.eye(graph.n) - s[:, None] * a * s[None, :]
        kind = KernelKind.NORMALIZED_LAPLACIAN
    else:
        lap = np.diag(deg) - a
        kind = KernelKind.LAPLACIAN
    return NodeKernel(pseudo_inverse(lap), kind)


def ls_tau(graph: Graph) -> float:
    a = graph.adjacency.astype(float)
    lam_min = float(eig_sym(a).eigenvalues[-1])
    return max(abs(lam_min), 1.0)


def ls_kernel(graph: Graph) -> NodeKernel:
    """``A / tau + I`` with ``tau = max(|lambda_min(A)|, 1)``."""
    a = graph.adjacency.astype(float)
    k = a / ls_tau(graph) + np.eye(graph.n)
    return NodeKernel(k, KernelKind.LS)


@dataclass(frozen=True)
class MembershipReport:
    diagonal: list = field(default_factory=list)
    off_edge: list = field(default_factory=list)
    psd: bool = True
    min_eigenvalue: float = 0.0

    @property
    def violations(self) -> list[str]:
        out = [f"K[{i},{i}] = {v:.6g} != 1" for i, v in self.diagonal]
        out += [f"K[{i},{j}] = {v:.6g} on non-edge" for i, j, v in self.off_edge]
        if not self.psd:
            out.append(f"not PSD (lambda_min = {self.min_eigenvalue:.6g})")
        return out

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_membership(kernel, graph: Graph, tol: float = MEMBERSHIP_TOL) -> MembershipReport:
    """Check unit diagonal, zeros on non-edges and positive semidefiniteness."""
    k = kernel.matrix if isinstance(kernel, NodeKernel) else np.asarray(kernel, dtype=float)
    if k.shape != (graph.n, graph.n):
        raise KernelError(f"kernel shape {k.shape} does not match n={graph.n}")
    diag = [(i, float(v)) for i, v in enumerate(np.diag(k)) if abs(v - 1.0) > tol]
    non_edge = (graph.adjacency == 0) & ~np.eye(graph.n, dtype=bool)
    ii, jj = np.nonzero(np.triu(non_edge & (np.abs(k) > tol), 1))
    off = [(int(i), int(j), float(k[i, j])) for i, j in zip(ii, jj)]
    w = eig_sym(k).eigenvalues
    psd = bool(w[-1] >= -tol * max(1.0, float(w[0])))
    return MembershipReport(diag, off, psd, float(w[-1]))


def rkhs_norm(f, kernel) -> float:
    """``f^T K^+ f``; works for node kernels and materialized pair kernels alike."""
    k = kernel.matrix if isinstance(kernel, NodeKernel) else np.asarray(kernel, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.shape != (k.shape[0],):
        raise KernelError(f"vector length {f.shape} does not match kernel size {k.shape[0]}")
    return float(f @ pseudo_inverse(k) @ f)


def incidence_difference(n: int) -> np.ndarray:
    """n x N matrix whose k-th column is e_i - e_j for pair k = (i, j)."""
    idx = PairIndex(n)
    e = np.zeros((n, idx.N))
    cols = np.arange(idx.N)
    e[idx.first, cols] = 1.0
    e[idx.second, cols] = -1.0
    return e


class PairKernel:
    """Lazily evaluated kernel over the N = n(n-1)/2 node pairs."""

    MATERIALIZE_MAX_N = 40

    def __init__(self, source: NodeKernel, mode: PairMode | str):
        self.source = source
        self.mode = PairMode(mode)
        self.pairs = PairIndex(source.n)

    @property
    def N(self) -> int:
        return self.pairs.N

    def entry(self, k: int, l: int) -> float:
        return float(self.block([k], [l])[0, 0])

    def block(self, rows, cols) -> np.ndarray:
        """Sub-matrix of pair-kernel entries for pair indices ``rows`` x ``cols``."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        k = self.source.matrix
        i, j = self.pairs.first[rows], self.pairs.second[rows]
        ip, jp = self.pairs.first[cols], self.pairs.second[cols]
        if self.mode is PairMode.KRONECKER:
            return k[np.ix_(i, ip)] * k[np.ix_(j, jp)]
        return k[np.ix_(i, ip)] - k[np.ix_(i, jp)] - k[np.ix_(j, ip)] + k[np.ix_(j, jp)]

    def diagonal(self, idx=None) -> np.ndarray:
        if idx is None:
            idx = np.arange(self.N)
        idx = np.asarray(idx, dtype=np.intp)
        k = self.source.matrix
        i, j = self.pairs.first[idx], self.pairs.second[idx]
        if self.mode is PairMode.KRONECKER:
            return k[i, i] * k[j, j]
        return k[i, i] - 2.0 * k[i, j] + k[j, j]

    def matvec(self, beta, support=None) -> np.ndarray:
        """All N scores ``K~ beta`` where beta is nonzero only on ``support``."""
        beta = np.asarray(beta, dtype=float)
        if support is None:
            support = np.flatnonzero(beta)
            coef = beta[support]
        else:
            support = np.asarray(support, dtype=np.intp)
            coef = beta
        k = self.source.matrix
        si, sj = self.pairs.first[support], self.pairs.second[support]
        if self.mode is PairMode.KRONECKER:
            # sum_l c_l K[i, i_l] K[j, j_l] = (K[:, si] diag(c) K[:, sj]^T)[i, j]
            m = (k[:, si] * coef) @ k[:, sj].T
        else:
            # difference embedding: score(i, j) = g_i - g_j with g = K E beta
            g = k[:, si] @ coef - k[:, sj] @ coef
            m = g[:, None] - g[None, :]
        return m[self.pairs.first, self.pairs.second]

    def materialize(self, force: bool = False) -> np.ndarray:
        if self.source.n > self.MATERIALIZE_MAX_N and not force:
            raise KernelError(
                f"refusing to materialize a {self.N}x{self.N} pair kernel (n > {self.MATERIALIZE_MAX_N})"
            )
        idx = np.arange(self.N)
        return self.block(idx, idx)


def pair_kernel(kernel: NodeKernel, mode: PairMode | str = PairMode.KRONECKER) -> PairKernel:
    return PairKernel(kernel, mode)


def full_kronecker(kernel: NodeKernel) -> np.ndarray:
    """Unrestricted n^2 x n^2 product kernel over all ordered pairs."""
    return np.kron(kernel.matrix, kernel.matrix)


def kernel_is_psd(kernel: NodeKernel, tol: float = 1e-10) -> bool:
    return is_psd(kernel.matrix, tol)
