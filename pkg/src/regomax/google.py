"""Implicit Google matrix operator, PageRank, CheiRank and 2DRank."""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .graph import DirectedGraph

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1000


class ConvergenceError(RuntimeError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0.5, 1), got {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class GoogleOperator:
    """G = alpha*S + (1-alpha)/N applied without materialising G.

    ``S`` is the column-stochastic link matrix: column ``j`` spreads ``1/outdeg(j)``
    over the targets of ``j``, or ``1/N`` over all nodes when ``j`` is dangling.
    Products are split into ``threads`` row blocks; each row is computed the
    same way in every partition, so results do not depend on the thread count.
    """

    graph: DirectedGraph
    alpha: float = DEFAULT_ALPHA
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        object.__setattr__(self, "threads", max(1, int(self.threads or os.cpu_count() or 1)))

    @property
    def n(self) -> int:
        return self.graph.node_count

    @cached_property
    def dangling(self) -> np.ndarray:
        return self.graph.out_degree() == 0

    @cached_property
    def _link_rows(self) -> sp.csr_matrix:
        # row j holds the normalised out-links of j, i.e. the transpose of S without dangling columns
        g = self.graph
        deg = g.out_degree()
        data = np.repeat(1.0 / np.maximum(deg, 1), deg)
        return sp.csr_matrix((data, g.indices, g.indptr), shape=(g.node_count, g.node_count))

    @cached_property
    def _link_cols(self) -> sp.csr_matrix:
        return self._link_rows.T.tocsr()

    def _blocks(self, mat: sp.csr_matrix) -> list[tuple[int, int, sp.csr_matrix]]:
        n = mat.shape[0]
        k = min(self.threads, max(n, 1))
        bounds = np.linspace(0, n, k + 1).astype(int)
        return [(a, b, mat[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]

    @cached_property
    def _col_blocks(self):
        return self._blocks(self._link_cols)

    @cached_property
    def _row_blocks(self):
        return self._blocks(self._link_rows)

    def _spmv(self, blocks, x: np.ndarray) -> np.ndarray:
        if len(blocks) == 1:
            return blocks[0][2] @ x
        out = np.empty((blocks[-1][1],) + x.shape[1:])

        def run(blk):
            a, b, m = blk
            out[a:b] = m @ x

        with ThreadPoolExecutor(len(blocks)) as ex:
            list(ex.map(run, blocks))
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """G @ x for any real vector or (N, k) block; no normalisation checks."""
        n = self.n
        y = self._spmv(self._col_blocks, x)
        y *= self.alpha
        scalar = (self.alpha * x[self.dangling].sum(axis=0) + (1.0 - self.alpha) * x.sum(axis=0)) / n
        y += scalar
        return y

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """G.T @ y."""
        n = self.n
        x = self._spmv(self._row_blocks, y)
        total = y.sum(axis=0)
        x[self.dangling] = total / n
        x *= self.alpha
        x += (1.0 - self.alpha) * total / n
        return x

    def apply(self, v: np.ndarray) -> np.ndarray:
        """G @ v for a probability vector v."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.n},)")
        if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-9:
            raise ValueError("input must be a non-negative vector with L1 norm 1")
        return self.matvec(v)

    def dense(self) -> np.ndarray:
        """Materialise G (small N only)."""
        return self.matvec(np.eye(self.n))


def ordering_of(p: np.ndarray) -> np.ndarray:
    """Node indices by descending value, ties by ascending index."""
    p = np.asarray(p)
    return np.lexsort((np.arange(len(p)), -p))


@dataclass(frozen=True)
class RankVector:
    probabilities: np.ndarray
    ordering: np.ndarray
    residual: float
    iterations: int
    converged: bool = True

    @property
    def ranks(self) -> np.ndarray:
        """1-based rank K of every node."""
        k = np.empty(len(self.ordering), dtype=np.int64)
        k[self.ordering] = np.arange(1, len(self.ordering) + 1)
        return k


def power_iterate(matvec, start: np.ndarray, tol: float, max_iter: int):
    """Iterate ``v <- matvec(v)`` on probability vectors until ``|Gv - v|_1 < tol``.

    Returns ``(vector, residual, iterations, converged)`` where ``vector`` is
    the last image ``G v`` and ``residual`` is ``|G v - v|_1`` for its preimage.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.asarray(start, dtype=float)
    v = v / v.sum()
    residual = np.inf
    for it in range(1, max_iter + 1):
        w = matvec(v)
        w /= w.sum()
        residual = float(np.abs(w - v).sum())
        v = w
        if residual < tol:
            return v, residual, it, True
    return v, residual, max_iter, False


def stationary(matrix: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = 10_000,
               start: np.ndarray | None = None) -> RankVector:
    """Fixed point of a small dense column-stochastic matrix by power iteration."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if start is None:
        start = np.full(n, 1.0 / n)
    v, res, it, ok = power_iterate(matrix.dot, start, tol, max_iter)
    return RankVector(v, ordering_of(v), res, it, ok)


def pagerank(op: GoogleOperator, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
             start: np.ndarray | None = None) -> RankVector:
    """Leading eigenvector of G from a uniform start.

    An unconverged result is returned with ``converged=False`` and a warning.
    """
    n = op.n
    if n == 0:
        return RankVector(np.zeros(0), np.zeros(0, dtype=np.int64), 0.0, 0, True)
    if start is None:
        start = np.full(n, 1.0 / n)
    v, res, it, ok = power_iterate(op.matvec, start, tol, max_iter)
    if not ok:
        warnings.warn(f"PageRank not converged after {it} iterations (residual {res:.3e})",
                      ConvergenceWarning, stacklevel=2)
    logger.debug("pagerank: N=%d iterations=%d residual=%.3e", n, it, res)
    return RankVector(v, ordering_of(v), res, it, ok)


def cheirank(g: DirectedGraph, alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, threads: int = 1) -> RankVector:
    """PageRank of the graph with inverted links."""
    return pagerank(GoogleOperator(g.invert(), alpha, threads), tol, max_iter)


def two_d_rank(K: Sequence[int], K_star: Sequence[int]) -> np.ndarray:
    """Combine PageRank and CheiRank orderings by square-frame scanning.

    ``K`` and ``K_star`` are orderings (node indices, best first). At frame
    size k the node with CheiRank k is appended if its PageRank is within the
    frame, then the node with PageRank k if its CheiRank is within the frame.
    """
    K = np.asarray(K, dtype=np.int64)
    K_star = np.asarray(K_star, dtype=np.int64)
    if K.shape != K_star.shape:
        raise ValueError("orderings have different lengths")
    n = len(K)
    rank = np.empty(n, dtype=np.int64)
    rank[K] = np.arange(n)
    rank_star = np.empty(n, dtype=np.int64)
    rank_star[K_star] = np.arange(n)
    if not (np.array_equal(np.sort(K), np.arange(n)) and np.array_equal(np.sort(K_star), np.arange(n))):
        raise ValueError("orderings must be permutations of the same node set")

    out = np.empty(n, dtype=np.int64)
    placed = np.zeros(n, dtype=bool)
    pos = 0
    for k in range(n):
        for node, other in ((K_star[k], rank[K_star[k]]), (K[k], rank_star[K[k]])):
            if other <= k and not placed[node]:
                placed[node] = True
                out[pos] = node
                pos += 1
    return out


def overlap_curve(list_a: Sequence[str], list_b: Sequence[str], j_max: int | None = None) -> np.ndarray:
    """eta(j) = |top-j(A) & top-j(B)| / j for j = 1..j_max."""
    if len(set(list_a)) != len(list_a) or len(set(list_b)) != len(list_b):
        raise ValueError("rank lists must not contain duplicates")
    if j_max is None:
        j_max = min(len(list_a), len(list_b))
    if j_max > len(list_a) or j_max > len(list_b):
        raise ValueError(f"j_max={j_max} exceeds a list length")
    seen_a: set = set()
    seen_b: set = set()
    common = 0
    eta = np.empty(j_max)
    for j in range(j_max):
        a, b = list_a[j], list_b[j]
        if a == b:
            common += 1
        else:
            common += (a in seen_b) + (b in seen_a)
        seen_a.add(a)
        seen_b.add(b)
        eta[j] = common / (j + 1)
    return eta
