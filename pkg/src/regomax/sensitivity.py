"""Log-derivative sensitivity of reduced PageRank to single-link perturbations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .google import ConvergenceError, stationary

DEFAULT_DELTA = 1e-3
# tighter than the rank default: finite differences divide solver noise by 2*delta
SOLVER_TOL = 1e-13
SCHEMES = ("central", "forward", "backward")


@dataclass(frozen=True)
class SensitivityResult:
    source: int
    target_link: int
    values: dict[int, float] = field(default_factory=dict)
    delta: float = DEFAULT_DELTA
    scheme: str = "central"


def _as_matrix(m) -> np.ndarray:
    return np.asarray(getattr(m, "g_r", m), dtype=float)


def perturb_column(m, u: int, c: int, delta: float) -> np.ndarray:
    """Scale entry (c, u) by 1 + delta and renormalise column u to 1."""
    g = _as_matrix(m).copy()
    if delta <= -1:
        raise ValueError("delta must be > -1")
    if not g[c, u] > 0:
        raise ValueError(f"entry ({c}, {u}) is zero; perturbation is meaningless")
    if delta == 0:
        return g
    g[c, u] *= 1.0 + delta
    g[:, u] /= g[:, u].sum()
    return g


class _Solver:
    def __init__(self, g: np.ndarray, tol: float, max_iter: int):
        self.g = g
        self.tol = tol
        self.max_iter = max_iter
        self.base = self._solve(g, None)

    def _solve(self, g, start):
        p = stationary(g, self.tol, self.max_iter, start)
        if not p.converged:
            raise ConvergenceError(f"fixed point residual {p.residual:.3e} after {self.max_iter} iterations")
        return p.probabilities

    def log_pagerank(self, u, c, delta):
        g = perturb_column(self.g, u, c, delta)
        if np.array_equal(g, self.g):
            p = self.base
        else:
            p = self._solve(g, self.base)
        with np.errstate(divide="ignore"):
            return np.log(p)

    def derivative(self, u, c, delta, scheme, observe):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        observe = np.asarray(observe, dtype=np.int64)
        if np.any(self.base[observe] <= 0):
            bad = observe[self.base[observe] <= 0].tolist()
            raise ValueError(f"zero reduced PageRank at {bad}; log-derivative undefined")
        if scheme == "central":
            hi, lo, step = self.log_pagerank(u, c, delta), self.log_pagerank(u, c, -delta), 2 * delta
        elif scheme == "forward":
            hi, lo, step = self.log_pagerank(u, c, delta), np.log(self.base), delta
        else:
            hi, lo, step = np.log(self.base), self.log_pagerank(u, c, -delta), delta
        return (hi[observe] - lo[observe]) / step


def diagonal_sensitivity(m, u: int, c: int, delta: float = DEFAULT_DELTA, scheme: str = "central",
                         tol: float = SOLVER_TOL, max_iter: int = 100_000) -> float:
    """d ln P(c) / d delta for the link u -> c, by finite differences."""
    solver = _Solver(_as_matrix(m), tol, max_iter)
    return float(solver.derivative(u, c, delta, scheme, [c])[0])


def sensitivity_table(m, u: int, link_targets: Sequence[int], observe: Sequence[int],
                      delta: float = DEFAULT_DELTA, scheme: str = "central",
                      tol: float = SOLVER_TOL, max_iter: int = 100_000) -> list[SensitivityResult]:
    """D(u -> c, c') for every c in ``link_targets`` and c' in ``observe``.

    The perturbed fixed points are warm-started from the unperturbed one.
    """
    if not len(observe):
        return []
    g = _as_matrix(m)
    n = g.shape[0]
    for idx in (u, *link_targets, *observe):
        if not 0 <= idx < n:
            raise IndexError(f"index {idx} outside subset of size {n}")
    solver = _Solver(g, tol, max_iter)
    out = []
    for c in link_targets:
        d = solver.derivative(u, c, delta, scheme, observe)
        out.append(SensitivityResult(u, int(c), {int(k): float(v) for k, v in zip(observe, d)},
                                     delta, scheme))
    return out
