"""Random instances and dense reference computations used as test oracles.

Nothing here calls into the implicit operators under test: the dense Google
matrix is rebuilt from the raw edge arrays.
"""

import numpy as np

from regomax.graph import DirectedGraph, NodeSubset


def random_graph(seed, n=None, mean_degree=5, dangling=0.1, n_range=(20, 200)):
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
    src = rng.integers(0, n, mean_degree * n)
    dst = rng.integers(0, n, mean_degree * n)
    dead = rng.random(n) < dangling
    keep = ~dead[src]
    return DirectedGraph.from_edges(src[keep], dst[keep], n)


def random_subset(seed, g, n_r):
    rng = np.random.default_rng(seed + 10_000)
    idx = rng.choice(g.node_count, n_r, replace=False)
    return NodeSubset(tuple(int(i) for i in idx), (False,) * n_r)


def dense_google(g, alpha=0.85):
    n = g.node_count
    a = np.zeros((n, n))
    src, dst = g.edges()
    a[dst, src] = 1.0
    s = np.empty((n, n))
    for j in range(n):
        deg = a[:, j].sum()
        s[:, j] = a[:, j] / deg if deg else 1.0 / n
    return alpha * s + (1 - alpha) / n


def dense_pagerank(G):
    w, v = np.linalg.eig(G)
    p = np.abs(v[:, np.argmin(np.abs(w - 1))].real)
    return p / p.sum()


def dense_reduced(G, r):
    r = np.asarray(r)
    s = np.setdiff1d(np.arange(G.shape[0]), r)
    g_rr = G[np.ix_(r, r)]
    if not len(s):
        return g_rr, np.zeros_like(g_rr)
    ind = G[np.ix_(r, s)] @ np.linalg.solve(np.eye(len(s)) - G[np.ix_(s, s)], G[np.ix_(s, r)])
    return g_rr, ind


def random_stochastic(rng, n):
    m = rng.random((n, n))
    return m / m.sum(axis=0)


def split(rng, m):
    """Split a stochastic matrix into three non-negative parts summing back to it."""
    w = rng.random((3,) + m.shape)
    w /= w.sum(axis=0)
    rr, pr = m * w[0], m * w[1]
    return rr, pr, m - rr - pr


def reference_average(matrices, masks):
    """Explicit loops over editions, rows and columns."""
    n = len(matrices[0].names)
    total = [[0.0] * n for _ in range(n)]
    for m, mask in zip(matrices, masks):
        g = m.g_r
        for u in range(n):
            if not mask[u]:
                col = [1.0 / n] * n
            else:
                col = [g[i, u] if mask[i] else 0.0 for i in range(n)]
                if not all(mask):
                    s = sum(col)
                    col = [x / s for x in col]
            for i in range(n):
                total[i][u] += col[i]
    return np.array(total) / len(matrices)


ALPHA, N_GLOBAL = 0.85, 1000
FLOOR = (1 - ALPHA) / N_GLOBAL

# strongest two out-links of each node (column = source), best first
FRIENDS = {0: [1, 5], 4: [5, 2], 1: [3, 0], 5: [3, 6], 2: [0, 7], 3: [0, 1], 6: [4, 5], 7: [6, 4]}
DIRECT = {(0, 1), (4, 5), (1, 0), (5, 6), (3, 0), (6, 4)}
GROUPS = {0: "A", 1: "A", 2: "A", 3: "A", 4: "B", 5: "B", 6: "B", 7: "B"}


def eight_node_fixture():
    eff = np.full((8, 8), 0.01)
    eff += np.arange(64).reshape(8, 8) * 1e-5  # distinct weak entries
    np.fill_diagonal(eff, 0.9)  # strongest entry of each column, never a candidate
    for u, (first, second) in FRIENDS.items():
        eff[first, u] = 0.5
        eff[second, u] = 0.3
    # tie for node 6's second slot: 5 and 7 both at 0.3, lower index wins
    eff[7, 6] = 0.3
    direct = np.full((8, 8), FLOOR)
    for u, v in DIRECT:
        direct[v, u] = FLOOR + 0.3
    return eff, direct
