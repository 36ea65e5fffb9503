"""File formats: rank tables, reduced-matrix directories, edition tables, group files."""

from __future__ import annotations

import csv
import json
import os
from collections import OrderedDict

import numpy as np

from .editions import EditionRankTable, ThetaScore
from .google import RankVector
from .graph import NodeSubset
from .reduced import NEGATIVE_TOL, ReducedGoogleMatrix

SIDECAR = "reduced.json"
COMPONENT_FILES = {"G_R": "G_R.csv", "G_rr": "G_rr.csv", "G_pr": "G_pr.csv",
                   "G_qr": "G_qr.csv", "G_qrnd": "G_qrnd.csv"}


def fmt_prob(x: float) -> str:
    return f"{x:.12g}"


def fmt_matrix(x: float) -> str:
    return f"{x:.15g}"


def rank_tsv(rv: RankVector, names=None, probabilities=None) -> str:
    """rank, index, name, probability; ``probabilities`` overrides the printed column."""
    p = rv.probabilities if probabilities is None else probabilities
    lines = []
    for k, idx in enumerate(rv.ordering, 1):
        name = names(int(idx)) if callable(names) else (names[idx] if names is not None else str(idx))
        lines.append(f"{k}\t{idx}\t{name}\t{fmt_prob(p[idx])}")
    return "\n".join(lines) + ("\n" if lines else "")


def _clamp(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[(out < 0) & (out >= -NEGATIVE_TOL)] = 0.0
    return out


def write_matrix_csv(path: str, names, a: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in a:
            w.writerow([fmt_matrix(v + 0.0) for v in row])


def read_matrix_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0]
    a = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, len(names))
    if a.shape != (len(names), len(names)):
        raise ValueError(f"{path}: expected {len(names)}x{len(names)} matrix")
    return names, a


def write_reduced(dirname: str, m: ReducedGoogleMatrix, extra: dict | None = None) -> dict:
    """Export every component as CSV plus a JSON sidecar; returns the sidecar dict.

    Round-off negatives down to -1e-10 are written as 0 in the non-negative
    components; g_qr keeps its sign.
    """
    os.makedirs(dirname, exist_ok=True)
    names = list(m.names)
    comps = {"G_R": _clamp(m.g_r), "G_rr": m.g_rr, "G_pr": _clamp(m.g_pr),
             "G_qr": m.g_qr, "G_qrnd": m.g_qrnd}
    for key, a in comps.items():
        write_matrix_csv(os.path.join(dirname, COMPONENT_FILES[key]), names, a)
    side = OrderedDict(
        names=names,
        indices=list(m.order.indices),
        n_nodes=m.n_nodes,
        alpha=m.alpha,
        lambda_c=m.lambda_c,
        weights=m.weights,
        reduced_pagerank=[float(x) for x in m.reduced_pagerank],
        tolerances={k: m.info[k] for k in ("tol", "series_tol", "series_max") if k in m.info},
        iterations={k: m.info[k] for k in ("pair_iterations", "series_terms", "unconverged_columns")
                    if k in m.info},
    )
    if extra:
        side.update(extra)
    with open(os.path.join(dirname, SIDECAR), "w", encoding="utf-8") as fh:
        json.dump(side, fh, indent=1)
        fh.write("\n")
    return side


def read_reduced(dirname: str) -> ReducedGoogleMatrix:
    """Load a directory written by :func:`write_reduced` without recomputation."""
    with open(os.path.join(dirname, SIDECAR), encoding="utf-8") as fh:
        side = json.load(fh)
    comps = {}
    for key in ("G_rr", "G_pr", "G_qr"):
        names, comps[key] = read_matrix_csv(os.path.join(dirname, COMPONENT_FILES[key]))
        if names != side["names"]:
            raise ValueError(f"{dirname}: {key} basis differs from sidecar")
    info = dict(side.get("tolerances", {}))
    info.update(side.get("iterations", {}))
    for k in ("edition",):
        if k in side:
            info[k] = side[k]
    order = NodeSubset(tuple(side["indices"]), tuple(True for _ in side["indices"]))
    return ReducedGoogleMatrix(order, tuple(side["names"]), comps["G_rr"], comps["G_pr"], comps["G_qr"],
                               float(side["lambda_c"]), float(side["alpha"]), int(side["n_nodes"]),
                               np.asarray(side["reduced_pagerank"], dtype=float), info)


def _tsv_rows(path: str):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line.split("\t")


def read_edition_tables(paths) -> list[EditionRankTable]:
    """Read ``edition<TAB>rank<TAB>name`` rows from one or more files.

    Editions keep first-seen order; entries are sorted by rank, which must
    run 1..n without gaps.
    """
    rows: dict[str, dict[int, str]] = OrderedDict()
    for path in ([paths] if isinstance(paths, str) else paths):
        for lineno, parts in _tsv_rows(path):
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected edition<TAB>rank<TAB>name")
            ed, rank, name = parts[0].strip(), int(parts[1]), parts[2].strip()
            table = rows.setdefault(ed, {})
            if rank in table:
                raise ValueError(f"{path}:{lineno}: duplicate rank {rank} in edition {ed}")
            table[rank] = name
    tables = []
    for ed, table in rows.items():
        ranks = sorted(table)
        if ranks != list(range(1, len(ranks) + 1)):
            raise ValueError(f"edition {ed}: ranks are not 1..{len(ranks)}")
        tables.append(EditionRankTable(ed, tuple(table[r] for r in ranks)))
    return tables


def theta_tsv(scores: list[ThetaScore]) -> str:
    return "".join(f"{k}\t{s.theta}\t{s.appearances}\t{s.name}\n" for k, s in enumerate(scores, 1))


def read_presence(path: str) -> dict[tuple[str, str], bool]:
    mask = {}
    for lineno, parts in _tsv_rows(path):
        if len(parts) != 3 or parts[2].strip() not in ("0", "1"):
            raise ValueError(f"{path}:{lineno}: expected edition<TAB>name<TAB>0|1")
        mask[(parts[0].strip(), parts[1].strip())] = parts[2].strip() == "1"
    return mask


def read_groups(path: str) -> list[tuple[str, str, bool]]:
    """Rows of (name, group, leader) in file order."""
    out = []
    for lineno, parts in _tsv_rows(path):
        if len(parts) != 3 or parts[2].strip() not in ("0", "1"):
            raise ValueError(f"{path}:{lineno}: expected name<TAB>group<TAB>0|1")
        out.append((parts[0].strip(), parts[1].strip(), parts[2].strip() == "1"))
    return out


def read_rank_list(path: str) -> list[str]:
    """Plain ordered list of names, one per line (e.g. an external ranking)."""
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
