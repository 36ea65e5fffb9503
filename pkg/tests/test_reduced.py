import numpy as np
import pytest

from helpers import dense_google, dense_pagerank, dense_reduced, random_graph, random_subset
from regomax.google import GoogleOperator, ordering_of, pagerank
from regomax.graph import DirectedGraph, NodeSubset
from regomax.reduced import compute_components, compute_grr, leading_pair, qrnd, reduced_pagerank


def subset(*idx):
    return NodeSubset(tuple(idx), (False,) * len(idx))


def test_leading_pair_single_dangling_complement():
    # node 3 has no out-links: G_ss = alpha/N + (1 - alpha)/N = 1/N
    g = DirectedGraph.from_edges([0, 1, 2], [1, 2, 3], 4)
    pair = leading_pair(g, subset(0, 1, 2))
    assert pair.lambda_c == pytest.approx(0.25, abs=1e-15)
    assert pair.psi_left @ pair.psi_right == pytest.approx(1)


@pytest.mark.parametrize("seed", range(4))
def test_leading_pair_dense_oracle(seed):
    g = random_graph(seed, n=100)
    sub = random_subset(seed, g, 10)
    G = dense_google(g)
    s = np.setdiff1d(np.arange(100), sub.as_array())
    G_ss = G[np.ix_(s, s)]
    expected = np.max(np.linalg.eigvals(G_ss).real)
    pair = leading_pair(g, sub)
    assert pair.lambda_c == pytest.approx(expected, abs=1e-8)
    assert 0 < pair.lambda_c < 1
    assert np.abs(G_ss @ pair.psi_right - pair.lambda_c * pair.psi_right).sum() < 1e-10
    assert np.abs(G_ss.T @ pair.psi_left - pair.lambda_c * pair.psi_left).sum() < 1e-9
    assert pair.psi_left @ pair.psi_right == pytest.approx(1, abs=1e-12)
    assert pair.psi_right.sum() == pytest.approx(1)


def test_leading_pair_requires_proper_subset():
    g = random_graph(0, n=10)
    with pytest.raises(ValueError):
        leading_pair(g, subset(*range(10)))


def test_grr_dangling_column():
    g = DirectedGraph.from_edges([0], [1], 5)
    grr = compute_grr(g, subset(1, 0))
    # node 1 is dangling: uniform 1/N column
    assert np.allclose(grr[:, 0], 1 / 5, atol=1e-16)


def test_grr_single_link_column():
    g = DirectedGraph.from_edges([0], [1], 5)
    grr = compute_grr(g, subset(0, 1), alpha=0.85)
    assert grr[1, 0] == pytest.approx(0.85 + 0.15 / 5, abs=1e-16)
    assert grr[0, 0] == (1 - 0.85) / 5


@pytest.mark.parametrize("seed", range(3))
def test_grr_equals_dense_block(seed):
    g = random_graph(seed, n=50)
    sub = random_subset(seed, g, 5)
    r = sub.as_array()
    assert np.allclose(compute_grr(g, sub), dense_google(g)[np.ix_(r, r)], rtol=0, atol=1e-16)


def test_full_subset_has_no_scattering_part():
    g = random_graph(1, n=30)
    m = compute_components(g, subset(*range(30)))
    assert not m.g_pr.any() and not m.g_qr.any()
    assert np.allclose(m.g_r, dense_google(g), atol=1e-15)


def dense_projected_split(G, r):
    """G_pr and G_qr from an explicit eigen-decomposition of the complement block."""
    s = np.setdiff1d(np.arange(G.shape[0]), r)
    g_ss, g_rs, g_sr = G[np.ix_(s, s)], G[np.ix_(r, s)], G[np.ix_(s, r)]
    w, v = np.linalg.eig(g_ss)
    lam = w[np.argmax(w.real)].real
    right = np.abs(v[:, np.argmax(w.real)].real)
    wl, vl = np.linalg.eig(g_ss.T)
    left = np.abs(vl[:, np.argmax(wl.real)].real)
    left /= left @ right
    p_c = np.outer(right, left)
    g_pr = g_rs @ p_c @ g_sr / (1 - lam)
    q = np.eye(len(s)) - p_c
    g_qr = g_rs @ q @ np.linalg.solve(np.eye(len(s)) - g_ss, g_sr)
    return lam, g_pr, g_qr


@pytest.mark.parametrize("seed", range(4))
def test_projected_and_hidden_parts_match_eigen_oracle(seed):
    g = random_graph(seed + 40, n=120)
    sub = random_subset(seed + 40, g, 10)
    m = compute_components(g, sub)
    lam, g_pr, g_qr = dense_projected_split(dense_google(g), sub.as_array())
    assert abs(m.lambda_c - lam) < 1e-10
    assert np.abs(m.g_pr - g_pr).max() < 1e-8
    assert np.abs(m.g_qr - g_qr).max() < 1e-8
    assert m.g_pr.min() >= 0
    # the hidden part is a difference of two non-negative terms and is genuinely signed
    assert m.g_qr.min() < -1e-6


@pytest.mark.parametrize("seed", range(6))
def test_components_match_dense_resolvent(seed):
    g = random_graph(seed, n=100)
    sub = random_subset(seed, g, 10)
    m = compute_components(g, sub)
    g_rr, ind = dense_reduced(dense_google(g), sub.as_array())
    assert np.abs(m.g_r - (g_rr + ind)).max() < 1e-6
    assert np.abs(m.g_pr + m.g_qr - ind).max() < 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_structure_invariants(seed):
    g = random_graph(seed)
    sub = random_subset(seed, g, 12)
    m = compute_components(g, sub)
    assert np.abs(m.g_r.sum(axis=0) - 1).max() < 1e-8
    w = m.weights
    assert w["W_rr"] + w["W_pr"] + w["W_qr"] == pytest.approx(1, abs=1e-8)
    assert w["W_qrnd"] <= w["W_qr"] + 1e-15 or np.trace(m.g_qr) < 0
    assert (m.g_rr >= 0).all() and (m.g_pr >= 0).all()
    assert m.g_r.min() >= -1e-10
    # rank one: columns of g_pr are parallel
    cols = m.g_pr / np.linalg.norm(m.g_pr, axis=0)
    assert np.abs(cols.T @ cols - 1).max() < 1e-10


def test_absent_direct_links_sit_at_teleport_floor():
    g = random_graph(8, n=80)
    sub = random_subset(8, g, 10)
    m = compute_components(g, sub)
    r = sub.as_array()
    for u_pos, u in enumerate(r):
        t = set(g.targets(u).tolist())
        if not t:
            continue
        for i_pos, i in enumerate(r):
            if i not in t:
                assert m.g_rr[i_pos, u_pos] == m.teleport_floor


def test_qrnd():
    g = random_graph(4, n=60)
    m = compute_components(g, random_subset(4, g, 6))
    q = qrnd(m)
    assert not np.diag(q).any()
    off = ~np.eye(6, dtype=bool)
    assert np.array_equal(q[off], m.g_qr[off])


@pytest.mark.parametrize("seed", range(5))
def test_reduced_pagerank_is_global_restriction(seed):
    g = random_graph(seed, n=100)
    sub = random_subset(seed, g, 10)
    m = compute_components(g, sub)
    glob = pagerank(GoogleOperator(g)).probabilities[sub.as_array()]
    glob /= glob.sum()
    p = reduced_pagerank(m).probabilities
    assert np.abs(p - glob).sum() < 1e-6
    assert np.array_equal(ordering_of(p), ordering_of(glob))
    assert np.allclose(m.reduced_pagerank, p, atol=1e-12)


def test_reduced_pagerank_single_node():
    g = random_graph(2, n=40)
    m = compute_components(g, subset(7))
    assert reduced_pagerank(m).probabilities.tolist() == [1.0]


def test_deterministic_and_thread_independent():
    g = random_graph(9, n=150)
    sub = random_subset(9, g, 20)
    a = compute_components(g, sub, threads=1, block_size=4)
    b = compute_components(g, sub, threads=3, block_size=4)
    for x, y in ((a.g_rr, b.g_rr), (a.g_pr, b.g_pr), (a.g_qr, b.g_qr)):
        assert np.array_equal(x, y)


def test_dense_pagerank_oracle_consistency():
    # the reduced fixed point also matches the dense eigen-solve route
    g = random_graph(12, n=120)
    sub = random_subset(12, g, 8)
    m = compute_components(g, sub)
    p = dense_pagerank(dense_google(g))[sub.as_array()]
    assert np.abs(m.reduced_pagerank - p / p.sum()).sum() < 1e-8
