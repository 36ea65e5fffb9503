"""Immutable directed graphs stored as source-grouped sorted target lists."""

from __future__ import annotations

import io
import logging
import re
import warnings
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# node indices are stored as int32
MAX_NODES = 2**31 - 1


class EdgeListError(ValueError):
    """Malformed edge-list input; ``lineno`` is 1-based (0 when not line specific)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


class SubsetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Directed 0/1 graph in compressed form.

    ``indptr[j]:indptr[j+1]`` slices ``indices`` to give the sorted, distinct
    targets of source node ``j``. Self-loops are never stored.
    """

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: Mapping[int, str] | None = None
    _names: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int32)
        if indptr.shape != (self.node_count + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValueError("indptr does not match node_count/indices")
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if self.labels is not None:
            labels = {int(k): str(v) for k, v in self.labels.items()}
            names = {}
            for k, v in labels.items():
                if not 0 <= k < self.node_count:
                    raise ValueError(f"label index {k} out of range")
                if v in names:
                    raise ValueError(f"duplicate label {v!r}")
                names[v] = k
            object.__setattr__(self, "labels", labels)
            object.__setattr__(self, "_names", names)

    @classmethod
    def from_edges(cls, src, dst, node_count: int | None = None, labels=None) -> "DirectedGraph":
        """Build from parallel source/target arrays; drops self-loops and duplicates."""
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if len(src) and (src.min() < 0 or dst.min() < 0):
            raise ValueError("node ids must be non-negative")
        seen = int(max(src.max(), dst.max())) + 1 if len(src) else 0
        n = seen if node_count is None else int(node_count)
        if n < seen:
            raise ValueError(f"node_count={n} smaller than 1 + max id ({seen})")
        if n > MAX_NODES:
            raise ValueError(f"node count {n} exceeds {MAX_NODES}")
        keep = src != dst
        keys = np.unique(src[keep] * n + dst[keep])
        sources = keys // n
        targets = (keys % n).astype(np.int32)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sources, minlength=n), out=indptr[1:])
        return cls(n, indptr, targets, labels)

    @property
    def edge_count(self) -> int:
        return len(self.indices)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def targets(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(sources, targets) arrays in storage order."""
        src = np.repeat(np.arange(self.node_count, dtype=np.int64), self.out_degree())
        return src, self.indices.astype(np.int64)

    def invert(self) -> "DirectedGraph":
        """Graph with every link reversed; labels carried over."""
        src, dst = self.edges()
        return DirectedGraph.from_edges(dst, src, self.node_count, self.labels)

    def index_of(self, name: str) -> int:
        if self._names is None or name not in self._names:
            raise KeyError(name)
        return self._names[name]

    def name_of(self, index: int) -> str:
        if self.labels is not None and index in self.labels:
            return self.labels[index]
        return str(index)

    def with_labels(self, labels: Mapping[int, str]) -> "DirectedGraph":
        return DirectedGraph(self.node_count, self.indptr, self.indices, labels)

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and self.labels == other.labels
        )

    __hash__ = None


@dataclass(frozen=True)
class NodeSubset:
    """Ordered node selection; the order defines the reduced-matrix basis."""

    indices: tuple[int, ...]
    from_name: tuple[bool, ...]

    def __len__(self):
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


_HEADER = re.compile(rb"^#\s*N=\s*(\d+)\s*$", re.MULTILINE)


def _parse_slow(lines: Sequence[bytes]) -> tuple[list[int], list[int]]:
    src, dst = [], []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip(b"\r")
        if not line.strip() or line.startswith(b"#"):
            continue
        parts = line.split(b"\t")
        if len(parts) != 2:
            raise EdgeListError(f"expected 'src<TAB>dst', got {line[:60]!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"non-integer node id in {line[:60]!r}", lineno) from None
        if a < 0 or b < 0:
            raise EdgeListError("negative node id", lineno)
        if a >= MAX_NODES or b >= MAX_NODES:
            raise EdgeListError(f"node id exceeds {MAX_NODES - 1}", lineno)
        src.append(a)
        dst.append(b)
    return src, dst


def load_edge_list(source: BinaryIO | bytes | str, node_count: int | None = None) -> DirectedGraph:
    """Read a ``src<TAB>dst`` edge list.

    ``#`` lines are comments, except ``#N=<n>`` which fixes the node count so
    isolated trailing nodes are kept. ``node_count`` overrides the header.
    Self-loops are dropped and duplicate edges collapse to one.
    """
    if isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    headers = _HEADER.findall(data)
    n_override = node_count if node_count is not None else (int(headers[-1]) if headers else None)

    # C parser first; on any failure the line-by-line parser locates the bad line
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            arr = np.loadtxt(io.BytesIO(data), delimiter="\t", comments="#", dtype=np.int64, ndmin=2)
        if arr.size and (arr.shape[1] != 2 or arr.min() < 0 or arr.max() >= MAX_NODES):
            raise ValueError
    except (ValueError, OverflowError):
        src, dst = _parse_slow(data.split(b"\n"))
        arr = np.column_stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    if arr.size == 0:
        logger.warning("empty edge list")
        arr = np.zeros((0, 2), dtype=np.int64)

    try:
        return DirectedGraph.from_edges(arr[:, 0], arr[:, 1], n_override)
    except ValueError as exc:
        raise EdgeListError(str(exc)) from None


def load_labels(source: BinaryIO | bytes | str) -> dict[int, str]:
    """Read an ``index<TAB>name`` label file."""
    if isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    labels: dict[int, str] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), 1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 2:
            raise EdgeListError("expected 'index<TAB>name'", lineno)
        try:
            idx = int(parts[0])
        except ValueError:
            raise EdgeListError(f"bad index {parts[0]!r}", lineno) from None
        name = parts[1].strip()
        if name in seen or idx in labels:
            raise EdgeListError(f"duplicate label entry {name!r}", lineno)
        seen.add(name)
        labels[idx] = name
    return labels


def read_subset_file(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def resolve_subset(g: DirectedGraph, entries: Iterable[str | int]) -> NodeSubset:
    """Resolve names or indices to an ordered subset.

    Strings are looked up as labels first; a string that is not a label but
    parses as an integer is taken as a raw index.
    """
    indices: list[int] = []
    origin: list[bool] = []
    seen: set[int] = set()
    for entry in entries:
        if isinstance(entry, (int, np.integer)):
            idx, named = int(entry), False
        else:
            entry = str(entry)
            if g._names is not None and entry in g._names:
                idx, named = g._names[entry], True
            else:
                try:
                    idx, named = int(entry), False
                except ValueError:
                    raise SubsetError(f"unknown node name {entry!r}") from None
        if not 0 <= idx < g.node_count:
            raise SubsetError(f"node index {idx} out of range [0, {g.node_count})")
        if idx in seen:
            raise SubsetError(f"duplicate subset entry {entry!r}")
        seen.add(idx)
        indices.append(idx)
        origin.append(named)
    return NodeSubset(tuple(indices), tuple(origin))


def read_graph(path: str, labels_path: str | None = None) -> DirectedGraph:
    g = load_edge_list(path)
    if labels_path:
        g = g.with_labels(load_labels(labels_path))
    return g
