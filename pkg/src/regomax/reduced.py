"""Reduced Google matrix of a node subset and its direct/projected/hidden split."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .google import (DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL, ConvergenceError,
                     ConvergenceWarning, GoogleOperator, RankVector, stationary)
from .graph import DirectedGraph, NodeSubset

logger = logging.getLogger(__name__)

NEGATIVE_TOL = 1e-10
SERIES_TOL = 1e-12


def default_series_max(alpha: float) -> int:
    return 10 * math.ceil(math.log(1e-12) / math.log(alpha))


class NumericalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectralPair:
    """Leading eigenvalue of the complement block with its right/left vectors."""

    lambda_c: float
    psi_right: np.ndarray
    psi_left: np.ndarray
    iterations: tuple[int, int] = (0, 0)


@dataclass(frozen=True, eq=False)
class ReducedGoogleMatrix:
    """G_R = g_rr + g_pr + g_qr over an ordered subset.

    Column ``u`` / row ``i`` follow the subset basis order; entry ``[i, u]`` is
    the transition weight from ``u`` to ``i``.
    """

    order: NodeSubset
    names: tuple[str, ...]
    g_rr: np.ndarray
    g_pr: np.ndarray
    g_qr: np.ndarray
    lambda_c: float
    alpha: float
    n_nodes: int
    reduced_pagerank: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def n_r(self) -> int:
        return len(self.names)

    @property
    def g_r(self) -> np.ndarray:
        return self.g_rr + self.g_pr + self.g_qr

    @property
    def g_qrnd(self) -> np.ndarray:
        return qrnd(self)

    @property
    def teleport_floor(self) -> float:
        """Value of a g_rr entry with no direct link behind it."""
        return (1.0 - self.alpha) / self.n_nodes

    @property
    def weights(self) -> dict[str, float]:
        n = self.n_r
        return {
            "W_R": float(self.g_r.sum() / n),
            "W_rr": float(self.g_rr.sum() / n),
            "W_pr": float(self.g_pr.sum() / n),
            "W_qr": float(self.g_qr.sum() / n),
            "W_qrnd": float(self.g_qrnd.sum() / n),
        }


def _complement(n: int, subset: NodeSubset) -> tuple[np.ndarray, np.ndarray]:
    r = subset.as_array()
    mask = np.ones(n, dtype=bool)
    mask[r] = False
    return r, np.flatnonzero(mask)


def _embed(n: int, idx: np.ndarray, x: np.ndarray) -> np.ndarray:
    full = np.zeros((n,) + x.shape[1:])
    full[idx] = x
    return full


def leading_pair(g: DirectedGraph, subset: NodeSubset, alpha: float = DEFAULT_ALPHA,
                 tol: float = DEFAULT_TOL, max_iter: int = 10 * DEFAULT_MAX_ITER,
                 op: GoogleOperator | None = None) -> SpectralPair:
    """Perron pair of the complement block G_ss by power iteration.

    ``psi_right`` is L1-normalised; ``psi_left`` is scaled so that
    ``psi_left @ psi_right == 1``.
    """
    op = op or GoogleOperator(g, alpha)
    n = g.node_count
    if len(subset) == 0 or len(subset) >= n:
        raise ValueError("leading_pair needs 0 < n_r < N")
    _, s = _complement(n, subset)
    n_s = len(s)

    def solve(apply):
        v = np.full(n_s, 1.0 / n_s)
        lam, res = 0.0, np.inf
        for it in range(1, max_iter + 1):
            w = apply(_embed(n, s, v))[s]
            lam = w.sum()
            res = float(np.abs(w - lam * v).sum())
            v = w / lam
            if res < tol:
                return v, lam, it
        raise ConvergenceError(f"G_ss power iteration: residual {res:.3e} after {max_iter} iterations")

    psi_r, lam_r, it_r = solve(op.matvec)
    psi_l, lam_l, it_l = solve(op.rmatvec)
    dot = float(psi_l @ psi_r)
    if abs(dot) < 1e-12:
        raise NumericalError("degenerate left/right normalisation")
    logger.debug("leading_pair: lambda_c=%.15f (left %.15f) iterations=(%d, %d)", lam_r, lam_l, it_r, it_l)
    return SpectralPair(float(lam_r), psi_r, psi_l / dot, (it_r, it_l))


def compute_grr(g: DirectedGraph, subset: NodeSubset, alpha: float = DEFAULT_ALPHA,
                op: GoogleOperator | None = None) -> np.ndarray:
    """Subset block of G using the full-graph column normalisation."""
    op = op or GoogleOperator(g, alpha)
    r = subset.as_array()
    n = g.node_count
    out = np.empty((len(r), len(r)))
    for u_pos, u in enumerate(r):
        col = np.full(n, (1.0 - op.alpha) / n)
        targets = g.targets(u)
        if len(targets):
            col[targets] += op.alpha / len(targets)
        else:
            col += op.alpha / n
        out[:, u_pos] = col[r]
    return out


def _series_block(op, r, s, pair, cols, series_tol, series_max):
    """Hidden component for a block of subset columns.

    Runs x_0 = Q G_sr e_u, x_{k+1} = Q G_ss x_k and sums G_rs x_k; each column
    stops once the L1 norm of its x_k drops below ``series_tol``.
    """
    n = op.n
    psi_r, psi_l = pair.psi_right, pair.psi_left
    start = np.zeros((n, len(cols)))
    start[r[cols], np.arange(len(cols))] = 1.0
    z = op.matvec(start)
    x = z[s]
    x -= np.outer(psi_r, psi_l @ x)
    acc = np.zeros((len(r), len(cols)))
    terms = np.zeros(len(cols), dtype=np.int64)
    active = np.arange(len(cols))
    for k in range(series_max):
        norms = np.abs(x).sum(axis=0)
        keep = norms >= series_tol
        active, x = active[keep], x[:, keep]
        if not len(active):
            break
        z = op.matvec(_embed(n, s, x))
        acc[:, active] += z[r]
        terms[active] += 1
        x = z[s]
        x -= np.outer(psi_r, psi_l @ x)
    return acc, terms, active


def compute_components(g: DirectedGraph, subset: NodeSubset, alpha: float = DEFAULT_ALPHA,
                       tol: float = DEFAULT_TOL, max_iter: int = 10 * DEFAULT_MAX_ITER,
                       series_tol: float = SERIES_TOL, series_max: int | None = None,
                       pair: SpectralPair | None = None, threads: int = 1,
                       block_size: int = 16) -> ReducedGoogleMatrix:
    """Reduced Google matrix of ``subset`` split into direct, projected and hidden parts.

    The complement blocks are never materialised: every product goes through
    the implicit operator. Columns of the hidden part are solved in fixed
    blocks of ``block_size``, in parallel across ``threads``.
    """
    op = GoogleOperator(g, alpha)
    n = g.node_count
    r, s = _complement(n, subset)
    n_r = len(r)
    if n_r == 0:
        raise ValueError("empty subset")
    if series_max is None:
        series_max = default_series_max(op.alpha)
    names = tuple(g.name_of(int(i)) for i in r)
    g_rr = compute_grr(g, subset, op=op)
    info = {"tol": tol, "series_tol": series_tol, "series_max": series_max}

    if len(s) == 0:
        zero = np.zeros((n_r, n_r))
        p = stationary(g_rr, tol).probabilities
        info.update(pair_iterations=[0, 0], series_terms=[0] * n_r, unconverged_columns=[])
        return ReducedGoogleMatrix(subset, names, g_rr, zero, zero.copy(), 0.0, op.alpha, n, p, info)

    if pair is None:
        pair = leading_pair(g, subset, tol=tol, max_iter=max_iter, op=op)

    # projected part: G_rs psi_R  (psi_L^T G_sr) / (1 - lambda_c)
    out_r = op.matvec(_embed(n, s, pair.psi_right))[r]
    in_l = op.rmatvec(_embed(n, s, pair.psi_left))[r]
    g_pr = np.outer(out_r, in_l) / (1.0 - pair.lambda_c)

    blocks = [np.arange(a, min(a + block_size, n_r)) for a in range(0, n_r, block_size)]
    work = lambda cols: _series_block(op, r, s, pair, cols, series_tol, series_max)  # noqa: E731
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    g_qr = np.empty((n_r, n_r))
    terms = np.empty(n_r, dtype=np.int64)
    unconverged: list[int] = []
    for cols, (acc, t, left) in zip(blocks, results):
        g_qr[:, cols] = acc
        terms[cols] = t
        unconverged.extend(int(cols[i]) for i in left)
    if unconverged:
        warnings.warn(f"hidden-link series not converged in {series_max} terms for columns {unconverged}",
                      ConvergenceWarning, stacklevel=2)

    # g_qr is a difference of two non-negative terms and may be negative; G_R may not
    g_r = g_rr + g_pr + g_qr
    for label, comp in (("g_pr", g_pr), ("G_R", g_r)):
        low = comp.min()
        if low < -NEGATIVE_TOL:
            raise NumericalError(f"{label} has entry {low:.3e} below -{NEGATIVE_TOL:g}")

    p = stationary(g_r, tol)
    if not p.converged:
        raise ConvergenceError("reduced PageRank did not converge")
    info.update(pair_iterations=list(pair.iterations), series_terms=terms.tolist(),
                unconverged_columns=unconverged)
    return ReducedGoogleMatrix(subset, names, g_rr, g_pr, g_qr, pair.lambda_c, op.alpha, n,
                               p.probabilities, info)


def qrnd(m: ReducedGoogleMatrix) -> np.ndarray:
    """g_qr with its diagonal removed."""
    out = m.g_qr.copy()
    np.fill_diagonal(out, 0.0)
    return out


def reduced_pagerank(m: ReducedGoogleMatrix, tol: float = DEFAULT_TOL,
                     max_iter: int = 100_000) -> RankVector:
    p = stationary(m.g_r, tol, max_iter)
    if not p.converged:
        raise ConvergenceError(f"reduced PageRank residual {p.residual:.3e} after {max_iter} iterations")
    return p
