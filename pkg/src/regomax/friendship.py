"""Leveled network of strongest effective links grown from group leaders."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .reduced import qrnd

FORMAT = "friendship/1"
HIDDEN_ATOL = 1e-15

EDGE_STYLES = {1: "solid", 2: "dashed", 3: "dotted"}
PALETTE = ("#1f77b4", "#9467bd", "#d62728", "#2ca02c", "#ffbf00", "#8c564b",
           "#e377c2", "#7f7f7f", "#17becf", "#bcbd22", "#ff7f0e", "#393b79")


@dataclass(frozen=True)
class FriendNode:
    index: int
    name: str
    group: str
    leader: bool
    level: int
    parent: int | None = None


@dataclass(frozen=True)
class FriendEdge:
    source: int
    target: int
    origin_level: int
    hidden: bool
    weight: float


@dataclass(frozen=True)
class FriendshipNetwork:
    nodes: tuple[FriendNode, ...] = ()
    edges: tuple[FriendEdge, ...] = ()
    f: int = 4
    meta: dict = field(default_factory=dict)

    def node(self, index: int) -> FriendNode:
        for n in self.nodes:
            if n.index == index:
                return n
        raise KeyError(index)

    @property
    def levels(self) -> dict[int, int]:
        return {n.index: n.level for n in self.nodes}


def effective_matrix(m) -> np.ndarray:
    """Direct links plus hidden links without self-loops."""
    return m.g_rr + qrnd(m)


def top_friends(eff: np.ndarray, u: int, f: int) -> list[int]:
    """The f largest off-diagonal entries of column u; ties go to the lower index."""
    col = eff[:, u]
    cand = np.array([i for i in range(len(col)) if i != u], dtype=np.int64)
    order = np.lexsort((cand, -col[cand]))
    return cand[order[:f]].tolist()


def build_network(eff: np.ndarray, leaders: Sequence[int], groups: Mapping[int, str], f: int = 4,
                  direct: np.ndarray | None = None, floor: float | None = None,
                  names: Sequence[str] | None = None) -> FriendshipNetwork:
    """Grow the friendship network level by level.

    Leaders form level 1 in the given order. Each node of a level is expanded
    in placement order; its f strongest links are all recorded as edges, and
    friends not yet placed go to the next level. A new friend claimed by
    several expanders of the same level attaches to the first claimant from
    its own group, else to the first claimant. An edge is hidden when the
    ``direct`` (g_rr) entry behind it sits at ``floor``.
    """
    eff = np.asarray(eff, dtype=float)
    n = eff.shape[0]
    if f < 1:
        raise ValueError("f must be >= 1")
    if not leaders:
        raise ValueError("at least one leader is required")
    if len(set(leaders)) != len(leaders):
        raise ValueError("leaders must be distinct")
    for u in leaders:
        if not 0 <= u < n:
            raise IndexError(f"leader index {u} out of range")
    missing = [i for i in range(n) if i not in groups]
    if missing:
        raise ValueError(f"no group given for indices {missing[:10]}")
    if names is None:
        names = [str(i) for i in range(n)]
    check_hidden = direct is not None and floor is not None

    placed: dict[int, FriendNode] = {}
    for u in leaders:
        placed[u] = FriendNode(u, names[u], groups[u], True, 1)
    edges: list[FriendEdge] = []
    frontier = list(leaders)
    while frontier:
        claims: dict[int, list[int]] = {}
        for x in frontier:
            level = placed[x].level
            for y in top_friends(eff, x, f):
                hidden = bool(check_hidden and abs(direct[y, x] - floor) <= HIDDEN_ATOL)
                edges.append(FriendEdge(x, y, level, hidden, float(eff[y, x])))
                if y not in placed:
                    claims.setdefault(y, []).append(x)
        for y, claimants in claims.items():
            same = [x for x in claimants if groups[x] == groups[y]]
            parent = (same or claimants)[0]
            placed[y] = FriendNode(y, names[y], groups[y], False, placed[parent].level + 1, parent)
        frontier = list(claims)
    return FriendshipNetwork(tuple(placed.values()), tuple(edges), f)


def to_json(net: FriendshipNetwork) -> bytes:
    doc = {
        "format": FORMAT,
        "f": net.f,
        "meta": net.meta,
        "nodes": [asdict(n) for n in net.nodes],
        "edges": [asdict(e) for e in net.edges],
    }
    return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode("utf-8")


def from_json(data: bytes | str) -> FriendshipNetwork:
    doc = json.loads(data)
    if doc.get("format") != FORMAT:
        raise ValueError(f"unsupported format {doc.get('format')!r}")
    nodes = tuple(FriendNode(**n) for n in doc["nodes"])
    edges = tuple(FriendEdge(**e) for e in doc["edges"])
    return FriendshipNetwork(nodes, edges, doc["f"], doc.get("meta", {}))


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(net: FriendshipNetwork) -> bytes:
    """Graphviz rendering: color = group, filled = leader, edge style = origin level, red = hidden."""
    groups = sorted({n.group for n in net.nodes})
    color = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(groups)}
    lines = ["digraph friendship {", "  node [shape=circle, penwidth=2];"]
    for n in net.nodes:
        attrs = [f"label={_quote(n.name)}", f"color={_quote(color[n.group])}",
                 f"group={_quote(n.group)}", f"level={n.level}", f"xlabel={_quote(f'L{n.level}')}"]
        if n.leader:
            attrs += ["style=filled", f"fillcolor={_quote(color[n.group])}"]
        lines.append(f"  {_quote(str(n.index))} [{', '.join(attrs)}];")
    for e in net.edges:
        attrs = [f"origin_level={e.origin_level}", f"color={'red' if e.hidden else 'black'}",
                 f"eff={e.weight!r}"]
        style = EDGE_STYLES.get(e.origin_level)
        if style is None:
            # level 4 and beyond: backslash-marked lines
            attrs += ["style=solid", 'label="\\\\"']
        else:
            attrs.append(f"style={style}")
        if e.hidden:
            attrs.append("hidden=true")
        lines.append(f"  {_quote(str(e.source))} -> {_quote(str(e.target))} [{', '.join(attrs)}];")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_network(net: FriendshipNetwork, fmt: str = "json") -> bytes:
    if fmt == "json":
        return to_json(net)
    if fmt == "dot":
        return to_dot(net)
    raise ValueError(f"unknown format {fmt!r}")
