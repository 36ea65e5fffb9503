import numpy as np
import pytest
import sympy

from helpers import random_graph, random_stochastic, random_subset
from regomax.google import stationary
from regomax.reduced import compute_components
from regomax.sensitivity import diagonal_sensitivity, perturb_column, sensitivity_table


def two_by_two_derivative():
    """d ln P0 / d delta at 0 for [[1/2, 1/2], [1/2, 1/2]] with entry (0, 0) scaled."""
    d = sympy.symbols("delta")
    half = sympy.Rational(1, 2)
    a = half * (1 + d) / (half * (1 + d) + half)
    m = sympy.Matrix([[a, half], [1 - a, half]])
    p0, p1 = sympy.symbols("p0 p1")
    sol = sympy.solve([m[0, 0] * p0 + m[0, 1] * p1 - p0, p0 + p1 - 1], [p0, p1], dict=True)[0]
    return float(sympy.diff(sympy.log(sol[p0]), d).subs(d, 0))


def test_perturb_identity():
    g = random_stochastic(np.random.default_rng(0), 4)
    assert np.array_equal(perturb_column(g, 1, 2, 0.0), g)


def test_perturb_single_mass_column():
    g = random_stochastic(np.random.default_rng(0), 3)
    g[:, 1] = [0, 0, 1]
    assert np.array_equal(perturb_column(g, 1, 2, 0.3), g)


def test_perturb_hand_renormalisation():
    g = np.array([[0.5, 0.3], [0.5, 0.7]])
    out = perturb_column(g, 0, 0, 0.1)
    assert out[:, 0] == pytest.approx([0.55 / 1.05, 0.5 / 1.05], abs=1e-16)
    assert np.array_equal(out[:, 1], g[:, 1])


def test_perturb_errors():
    g = np.array([[1.0, 0.5], [0.0, 0.5]])
    with pytest.raises(ValueError):
        perturb_column(g, 0, 1, 0.1)
    with pytest.raises(ValueError):
        perturb_column(g, 1, 0, -1.0)


def test_perturbed_matrix_stays_stochastic():
    rng = np.random.default_rng(3)
    g = random_stochastic(rng, 10)
    for u, c in rng.integers(0, 10, (20, 2)):
        out = perturb_column(g, u, c, 1e-3)
        assert np.abs(out.sum(axis=0) - 1).max() < 1e-12
        assert stationary(out).probabilities.sum() == pytest.approx(1, abs=1e-10)


def test_single_mass_gives_zero():
    g = random_stochastic(np.random.default_rng(1), 5)
    g[:, 2] = 0
    g[4, 2] = 1
    assert diagonal_sensitivity(g, 2, 4) == 0.0
    table = sensitivity_table(g, 2, [4], list(range(5)))
    assert all(v == 0.0 for v in table[0].values.values())


def test_two_by_two_analytic():
    expected = two_by_two_derivative()
    assert expected == pytest.approx(0.25)
    g = np.full((2, 2), 0.5)
    assert diagonal_sensitivity(g, 0, 0) == pytest.approx(expected, abs=1e-6)
    assert diagonal_sensitivity(g, 0, 0, scheme="forward", delta=1e-5) == pytest.approx(expected, abs=1e-5)


def test_step_halving_consistency():
    g = random_stochastic(np.random.default_rng(5), 8)
    a = diagonal_sensitivity(g, 1, 3, delta=1e-3)
    b = diagonal_sensitivity(g, 1, 3, delta=1e-4)
    assert a == pytest.approx(b, rel=1e-4)


def test_central_is_mean_of_one_sided():
    g = random_stochastic(np.random.default_rng(6), 6)
    c = diagonal_sensitivity(g, 0, 2, scheme="central")
    f = diagonal_sensitivity(g, 0, 2, scheme="forward")
    b = diagonal_sensitivity(g, 0, 2, scheme="backward")
    assert abs(c - (f + b) / 2) < 1e-12


def test_zero_pagerank_is_an_error():
    g = np.array([[0.5, 0.0, 0.5], [0.5, 1.0, 0.5], [0.0, 0.0, 0.0]])
    with pytest.raises(ValueError, match="zero reduced PageRank"):
        sensitivity_table(g, 0, [0], [2])


def test_empty_observe():
    g = random_stochastic(np.random.default_rng(0), 4)
    assert sensitivity_table(g, 0, [1, 2], []) == []


def test_batch_equals_singles():
    g = random_graph(4, n=80)
    m = compute_components(g, random_subset(4, g, 8))
    targets = [1, 3, 6]
    observe = list(range(8))
    table = sensitivity_table(m, 0, targets, observe)
    assert [r.target_link for r in table] == targets
    for r in table:
        assert r.values[r.target_link] == pytest.approx(diagonal_sensitivity(m, 0, r.target_link), abs=1e-12)
        for k in observe:
            single = sensitivity_table(m, 0, [r.target_link], [k])[0].values[k]
            assert r.values[k] == pytest.approx(single, abs=1e-12)
