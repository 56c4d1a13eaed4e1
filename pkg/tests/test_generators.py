import math

import numpy as np
import pytest
from scipy import stats

from commstruct.generators import GenSpec, _pair_from_index, er_graph, generate, pa_graph
from commstruct.graph import connected_components, format_edge_list


def test_er_extremes():
    assert er_graph(GenSpec("ER", 5, p=0.0)).m == 0
    G = er_graph(GenSpec("ER", 5, p=1.0))
    assert G.m == 10
    assert set(G.degrees.tolist()) == {4}


@pytest.mark.parametrize("bad", [
    dict(model="ER", n=5, p=1.5), dict(model="ER", n=5, p=-0.1), dict(model="ER", n=1, p=0.5),
    dict(model="PA", n=5, d=0), dict(model="PA", n=5, d=5), dict(model="XX", n=5, p=0.1),
    dict(model="ER", n=5), dict(model="ER", n=5, p=0.1, seed=-1),
])
def test_genspec_validation(bad):
    with pytest.raises(ValueError):
        GenSpec(**bad)


@pytest.mark.parametrize("n", [2, 3, 7, 50, 1001])
def test_pair_index_matches_enumeration(n):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    i, j = _pair_from_index(np.arange(len(pairs), dtype=np.int64), n)
    assert list(zip(i.tolist(), j.tolist())) == pairs


def test_pair_index_large_n_spot_checks():
    n = 10_000
    rng = np.random.default_rng(0)
    i = rng.integers(0, n - 1, 2000)
    j = np.array([rng.integers(a + 1, n) for a in i])
    k = i * (2 * n - i - 1) // 2 + (j - i - 1)
    i2, j2 = _pair_from_index(k, n)
    assert np.array_equal(i, i2) and np.array_equal(j, j2)


def test_er_edge_count_n10000():
    n, p = 10_000, 0.0005
    pairs = n * (n - 1) / 2
    mean, sd = p * pairs, math.sqrt(pairs * p * (1 - p))
    assert mean == pytest.approx(24997.5)
    for seed in range(20):
        m = er_graph(GenSpec("ER", n, p=p, seed=seed)).m
        assert abs(m - mean) <= 3 * sd


def test_er_mean_over_many_seeds():
    counts = [er_graph(GenSpec("ER", 200, p=0.05, seed=s)).m for s in range(1000)]
    assert np.mean(counts) == pytest.approx(995, rel=0.02)


def test_skip_sampling_matches_bernoulli_per_pair():
    # naive reference: one Bernoulli trial per pair
    n, p, reps = 8, 0.3, 3000
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng = np.random.default_rng(99)
    naive = np.zeros(len(pairs))
    skip = np.zeros(len(pairs))
    index = {pr: k for k, pr in enumerate(pairs)}
    for s in range(reps):
        naive += rng.random(len(pairs)) < p
        for e in er_graph(GenSpec("ER", n, p=p, seed=s)).edges():
            skip[index[e]] += 1
    sd = math.sqrt(reps * p * (1 - p))
    assert np.all(np.abs(skip - reps * p) < 4.5 * sd)
    assert np.all(np.abs(naive - reps * p) < 4.5 * sd)
    # same edge-count distribution
    res = stats.ks_2samp(
        [er_graph(GenSpec("ER", n, p=p, seed=10_000 + s)).m for s in range(800)],
        rng.binomial(len(pairs), p, 800))
    assert res.pvalue > 1e-3


def test_pa_initial_graph_only():
    G = pa_graph(GenSpec("PA", 4, d=3, seed=5))
    assert G.m == 6 and G.n == 4


@pytest.mark.parametrize("n,d,m", [(100, 1, 99), (10_000, 4, 39990), (50, 3, 6 + 3 * 46)])
def test_pa_closed_form_edge_count(n, d, m):
    assert pa_graph(GenSpec("PA", n, d=d, seed=1)).m == m == math.comb(d + 1, 2) + d * (n - d - 1)


def test_pa_new_nodes_have_d_distinct_earlier_targets():
    d = 3
    G = pa_graph(GenSpec("PA", 300, d=d, seed=2))
    for v in range(d + 1, G.n):
        earlier = [w for w in G.neighbors(v) if w < v]
        assert len(earlier) == d


def test_pa_hubs_emerge():
    # reference (networkx BA, 20 seeds) had max degree >= 249 in every run
    big = sum(pa_graph(GenSpec("PA", 10_000, d=4, seed=s)).degrees.max() > 100 for s in range(20))
    assert big >= 18


@pytest.mark.parametrize("d", [1, 2, 5])
def test_pa_connected(d):
    for seed in range(5):
        G = pa_graph(GenSpec("PA", 400, d=d, seed=seed))
        assert len(connected_components(G)) == 1


def test_pa_older_nodes_are_richer():
    rhos = []
    for seed in range(10):
        G = pa_graph(GenSpec("PA", 2000, d=2, seed=seed))
        rhos.append(stats.spearmanr(np.arange(G.n), G.degrees).statistic)
    assert np.mean(rhos) < 0
    assert all(r < 0 for r in rhos)


@pytest.mark.parametrize("spec", [GenSpec("ER", 300, p=0.02, seed=11), GenSpec("PA", 300, d=2, seed=11)])
def test_determinism(spec):
    assert format_edge_list(generate(spec)) == format_edge_list(generate(spec))


def test_keys_separate_streams():
    a = format_edge_list(er_graph(GenSpec("ER", 300, p=0.02, seed=1)))
    b = format_edge_list(er_graph(GenSpec("ER", 300, p=0.02, seed=2)))
    c = format_edge_list(er_graph(GenSpec("ER", 300, p=0.021, seed=1)))
    assert len({a, b, c}) == 3
