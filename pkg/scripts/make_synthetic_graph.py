"""Generate a synthetic directed graph as a tab-separated edge list.

Targets follow a Zipf-like popularity law so that PageRank has a heavy tail
similar to hyperlink networks; a fraction of nodes are left dangling.
"""

import argparse
import sys

import numpy as np

from regomax.graph import DirectedGraph


def synthetic_edges(n_nodes, n_edges, dangling=0.1, exponent=1.1, seed=0):
    """Exactly ``n_edges`` distinct non-loop edges, sorted by (src, dst)."""
    rng = np.random.default_rng(seed)
    active = np.flatnonzero(rng.random(n_nodes) >= dangling)
    weights = 1.0 / np.arange(1, n_nodes + 1) ** exponent
    cdf = np.cumsum(weights) / weights.sum()
    popular = rng.permutation(n_nodes)
    keys = np.empty(0, dtype=np.int64)
    while keys.size < n_edges:
        k = int((n_edges - keys.size) * 1.2) + 1000
        src = active[rng.integers(0, active.size, k)]
        dst = popular[np.minimum(np.searchsorted(cdf, rng.random(k)), n_nodes - 1)]
        ok = src != dst
        keys = np.union1d(keys, src[ok] * n_nodes + dst[ok])
    keys = np.sort(rng.choice(keys, n_edges, replace=False))
    return keys // n_nodes, keys % n_nodes


def synthetic_graph(n_nodes, n_edges, **kw) -> DirectedGraph:
    src, dst = synthetic_edges(n_nodes, n_edges, **kw)
    return DirectedGraph.from_edges(src, dst, n_nodes)


def write_tsv(path, n_nodes, src, dst, chunk=1_000_000):
    with open(path, "w") as fh:
        fh.write(f"#N={n_nodes}\n")
        for lo in range(0, src.size, chunk):
            block = np.column_stack([src[lo:lo + chunk], dst[lo:lo + chunk]])
            np.savetxt(fh, block, fmt="%d", delimiter="\t")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    ap.add_argument("--nodes", type=int, default=1_000_000)
    ap.add_argument("--edges", type=int, default=20_000_000)
    ap.add_argument("--dangling", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    src, dst = synthetic_edges(args.nodes, args.edges, args.dangling, seed=args.seed)
    write_tsv(args.output, args.nodes, src, dst)
    print(f"wrote {src.size} edges over {args.nodes} nodes to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
