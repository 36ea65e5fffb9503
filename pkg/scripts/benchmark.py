"""Time PageRank and the reduction of a 100-node subset on a large synthetic graph.

Default sizes are 1e6 nodes and 2e7 edges. The edge list is written to disk
once and reused, so the timings include TSV parsing for the reduction step.
"""

import argparse
import json
import os
import time
from pathlib import Path

import numpy as np

from make_synthetic_graph import synthetic_edges, write_tsv
from regomax.cli import main as cli
from regomax.google import GoogleOperator, pagerank
from regomax.graph import read_graph


def run(workdir, nodes, edges, n_r, threads, seed=0):
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    graph = workdir / f"synthetic_{nodes}_{edges}_{seed}.tsv"
    if not graph.exists():
        t = time.perf_counter()
        write_tsv(graph, nodes, *synthetic_edges(nodes, edges, seed=seed))
        print(f"generated {graph} in {time.perf_counter() - t:.1f} s")
    subset = workdir / f"subset_{n_r}.txt"
    rng = np.random.default_rng(seed + 1)
    subset.write_text("".join(f"{i}\n" for i in sorted(rng.choice(nodes, n_r, replace=False))))

    t = time.perf_counter()
    g = read_graph(str(graph))
    t_load = time.perf_counter() - t
    t = time.perf_counter()
    rv = pagerank(GoogleOperator(g, threads=threads), tol=1e-10)
    t_rank = time.perf_counter() - t
    t = time.perf_counter()
    rc = cli(["reduce", str(graph), str(subset), "--threads", str(threads), "-o", str(workdir / "reduced")])
    t_reduce = time.perf_counter() - t
    result = {"nodes": nodes, "edges": g.edge_count, "threads": threads, "cpus": os.cpu_count(),
              "load_s": round(t_load, 2), "pagerank_s": round(t_rank, 2), "pagerank_iterations": rv.iterations,
              "pagerank_residual": rv.residual, "reduce_s": round(t_reduce, 1), "reduce_exit": rc}
    print(json.dumps(result, indent=1))
    return result


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="bench")
    ap.add_argument("--nodes", type=int, default=1_000_000)
    ap.add_argument("--edges", type=int, default=20_000_000)
    ap.add_argument("--n-r", type=int, default=100)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()
    run(args.workdir, args.nodes, args.edges, args.n_r, args.threads)
