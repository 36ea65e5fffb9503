"""Cross-edition aggregation: cumulative rank score and averaged reduced matrices."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .google import DEFAULT_TOL, ConvergenceError, RankVector, stationary

K_TOP = 100


@dataclass(frozen=True)
class EditionRankTable:
    edition: str
    entries: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(set(self.entries)) != len(self.entries):
            dup = sorted({e for e in self.entries if self.entries.count(e) > 1})
            raise ValueError(f"edition {self.edition}: duplicate names {dup}")


@dataclass(frozen=True)
class ThetaScore:
    name: str
    theta: int
    appearances: int


def theta_scores(tables: Sequence[EditionRankTable], k_top: int = K_TOP) -> list[ThetaScore]:
    """Sum over editions of (k_top + 1 - rank), absent entries counting as rank k_top + 1.

    Sorted by theta descending, then appearances descending, then name.
    """
    if not tables:
        raise ValueError("no edition tables")
    theta: dict[str, int] = defaultdict(int)
    count: dict[str, int] = defaultdict(int)
    for table in tables:
        if len(table.entries) > k_top:
            raise ValueError(f"edition {table.edition} has {len(table.entries)} entries > k_top={k_top}")
        for rank, name in enumerate(table.entries, 1):
            theta[name] += k_top + 1 - rank
            count[name] += 1
    scores = [ThetaScore(n, theta[n], count[n]) for n in theta]
    scores.sort(key=lambda s: (-s.theta, -s.appearances, s.name))
    return scores


@dataclass(frozen=True, eq=False)
class AveragedReducedMatrix:
    """Equal-weight mean of per-edition reduced matrices over a shared basis.

    ``presence[e, i]`` says whether entity ``i`` exists in edition ``e``.
    The uniform filler of absent columns is booked into ``g_pr``.
    """

    order: tuple[str, ...]
    editions: tuple[str, ...]
    matrix: np.ndarray
    presence: np.ndarray
    g_rr: np.ndarray
    g_pr: np.ndarray
    g_qr: np.ndarray

    @property
    def weights(self) -> dict[str, float]:
        n = len(self.order)
        return {"W_R": float(self.matrix.sum() / n), "W_rr": float(self.g_rr.sum() / n),
                "W_pr": float(self.g_pr.sum() / n), "W_qr": float(self.g_qr.sum() / n)}


@dataclass(frozen=True)
class EmbeddedComponents:
    """One edition's components placed in a wider basis; absent rows and columns are zero."""

    names: tuple[str, ...]
    g_rr: np.ndarray
    g_pr: np.ndarray
    g_qr: np.ndarray

    @property
    def g_r(self) -> np.ndarray:
        return self.g_rr + self.g_pr + self.g_qr


def embed_in_basis(m, order: Sequence[str]) -> tuple[EmbeddedComponents, np.ndarray]:
    """Place ``m`` (computed over the entities it contains) into ``order``.

    Returns the embedded components and the boolean presence row; ``m``
    itself comes back when its basis already equals ``order``. Names of
    ``m`` missing from ``order`` are an error.
    """
    order = tuple(order)
    pos = {name: i for i, name in enumerate(order)}
    missing = [name for name in m.names if name not in pos]
    if missing:
        raise ValueError(f"names {missing[:5]} are not in the target basis")
    idx = np.array([pos[name] for name in m.names], dtype=np.int64)
    present = np.zeros(len(order), dtype=bool)
    present[idx] = True
    if len(idx) == len(order) and np.array_equal(idx, np.arange(len(order))):
        return m, present
    comps = []
    for c in (m.g_rr, m.g_pr, m.g_qr):
        full = np.zeros((len(order), len(order)))
        full[np.ix_(idx, idx)] = c
        comps.append(full)
    return EmbeddedComponents(order, *comps), present


def adjust_for_absence(components: Sequence[np.ndarray], present: np.ndarray) -> list[np.ndarray]:
    """Apply the absent-entity rules to one edition's (g_rr, g_pr, g_qr).

    Rows into absent entities are zeroed and each present column is rescaled
    so the full matrix stays column-stochastic; absent columns become uniform
    and are booked in the projected component (index 1). With every entity
    present the inputs are returned unchanged.
    """
    present = np.asarray(present, dtype=bool)
    if present.all():
        return list(components)
    n = len(present)
    comps = [np.array(c, dtype=float) for c in components]
    for c in comps:
        c[~present, :] = 0.0
    total = sum(comps)
    sums = total.sum(axis=0)
    cols = np.flatnonzero(present)
    empty = cols[sums[cols] <= 0]
    if len(empty):
        raise ValueError(f"columns {empty.tolist()} lose all mass once absent rows are removed")
    for c in comps:
        c[:, cols] /= sums[cols]
        c[:, ~present] = 0.0
    comps[1][:, ~present] = 1.0 / n
    return comps


def average_reduced(matrices, presence: np.ndarray | None = None,
                    editions: Sequence[str] | None = None) -> AveragedReducedMatrix:
    """Entry-wise mean of the adjusted per-edition reduced matrices.

    ``matrices`` are ReducedGoogleMatrix-like objects (``names``, ``g_rr``,
    ``g_pr``, ``g_qr``) sharing one basis order.
    """
    matrices = list(matrices)
    if not matrices:
        raise ValueError("no matrices to average")
    order = tuple(matrices[0].names)
    n = len(order)
    for m in matrices[1:]:
        if tuple(m.names) != order:
            raise ValueError("reduced matrices do not share the same basis order")
    n_e = len(matrices)
    if presence is None:
        presence = np.ones((n_e, n), dtype=bool)
    presence = np.asarray(presence, dtype=bool)
    if presence.shape != (n_e, n):
        raise ValueError(f"presence mask has shape {presence.shape}, expected {(n_e, n)}")
    if editions is None:
        editions = tuple(str(i) for i in range(n_e))

    acc = [np.zeros((n, n)) for _ in range(3)]
    total = np.zeros((n, n))
    for m, mask in zip(matrices, presence):
        adjusted = adjust_for_absence((m.g_rr, m.g_pr, m.g_qr), mask)
        for a, c in zip(acc, adjusted):
            a += c
        total += m.g_r if mask.all() else sum(adjusted)
    g_rr, g_pr, g_qr = (a / n_e for a in acc)
    return AveragedReducedMatrix(order, tuple(editions), total / n_e, presence, g_rr, g_pr, g_qr)


def pagerank_of_average(avg: AveragedReducedMatrix, tol: float = DEFAULT_TOL,
                        max_iter: int = 100_000) -> RankVector:
    p = stationary(avg.matrix, tol, max_iter)
    if not p.converged:
        raise ConvergenceError(f"averaged-matrix PageRank residual {p.residual:.3e}")
    return p


def presence_from_mapping(editions: Sequence[str], order: Sequence[str],
                          mask: Mapping[tuple[str, str], bool]) -> np.ndarray:
    """Mask array from (edition, name) -> present; missing pairs count as present."""
    return np.array([[mask.get((e, name), True) for name in order] for e in editions], dtype=bool)
