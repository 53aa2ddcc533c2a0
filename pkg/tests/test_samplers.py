import numpy as np
import pytest

from mrfcrb.fim import accumulator_from_batch, new_accumulator, accumulate
from mrfcrb.model import Configuration, make_model, sufficient_statistic
from mrfcrb.oracle import enumerate_moments
from mrfcrb.samplers import (
    Rng,
    SamplerKind,
    derive_seeds,
    gibbs_sweep,
    run_chain,
    state_histogram,
    swendsen_wang_step,
    write_chain_dump,
)


def test_sampler_kind_aliases():
    assert SamplerKind.parse("gibbs") is SamplerKind.GIBBS_SYSTEMATIC
    assert SamplerKind.parse("sw") is SamplerKind.SWENDSEN_WANG
    assert SamplerKind.parse("gibbs_random_scan") is SamplerKind.GIBBS_RANDOM_SCAN


def test_rng_deterministic():
    a, b = Rng(123), Rng(123)
    assert [a.u01() for _ in range(5)] == [b.u01() for _ in range(5)]
    assert Rng(124).u01() != Rng(123).u01()


def test_derive_seeds():
    s1 = derive_seeds(7, 10)
    assert s1 == derive_seeds(7, 10)
    assert len(set(s1)) == 10
    assert derive_seeds(8, 10) != s1


def test_gibbs_sweep_theta_zero_marginals():
    # at theta=0 every conditional is uniform, so one sweep from a fixed
    # start leaves each site uniform over the labels
    m = make_model(2, 2, "free", 3)
    counts = np.zeros(3)
    n_rep = 3000
    for seed in range(n_rep):
        c = Configuration(np.zeros(4, dtype=np.int32))
        gibbs_sweep(m, 0.0, c, Rng(seed))
        counts[c.labels[0]] += 1
    np.testing.assert_allclose(counts / n_rep, 1 / 3, atol=0.03)


def test_run_chain_length_and_determinism():
    m = make_model(4, 4, "free", 2)
    out = run_chain(m, 0.3, SamplerKind.GIBBS_SYSTEMATIC, n_burn=5, n_mc=2, seed=1)
    assert out.stat_series.shape == (2, 1)
    a = run_chain(m, 0.7, SamplerKind.GIBBS_SYSTEMATIC, n_burn=50, n_mc=500, seed=9)
    b = run_chain(m, 0.7, SamplerKind.GIBBS_SYSTEMATIC, n_burn=50, n_mc=500, seed=9)
    assert np.array_equal(a.stat_series, b.stat_series)
    assert np.array_equal(a.final_config.labels, b.final_config.labels)


def test_run_chain_rejects_bad_counts():
    m = make_model(4, 4, "free", 2)
    with pytest.raises(ValueError):
        run_chain(m, 0.3, SamplerKind.GIBBS_SYSTEMATIC, n_mc=1, seed=1)
    with pytest.raises(ValueError):
        run_chain(m, 0.3, SamplerKind.GIBBS_SYSTEMATIC, n_burn=-1, n_mc=10, seed=1)


def test_running_phi_matches_recompute():
    m = make_model(5, 4, "free", 3)
    for kind in (SamplerKind.GIBBS_SYSTEMATIC, SamplerKind.GIBBS_RANDOM_SCAN,
                 SamplerKind.SWENDSEN_WANG):
        out = run_chain(m, 0.6, kind, n_burn=20, n_mc=50, seed=4)
        assert out.stat_series[-1, 0] == sufficient_statistic(m, out.final_config)[0]


def test_chain_mean_matches_oracle():
    m = make_model(3, 3, "toroidal", 2)
    exact = enumerate_moments(m, 0.5)
    out = run_chain(m, 0.5, SamplerKind.GIBBS_SYSTEMATIC, n_burn=1000, n_mc=200_000, seed=5)
    s = out.stat_series[:, 0].astype(float)
    # crude MC standard error ignoring autocorrelation, inflated 5x
    se = 5 * s.std() / np.sqrt(len(s))
    assert abs(s.mean() - exact.mean_stat[0]) < 3 * se


def test_sw_theta_zero_is_iid_uniform():
    m = make_model(3, 3, "free", 2)
    c = Configuration(np.zeros(9, dtype=np.int32))
    rng = Rng(13)
    ones = 0
    for _ in range(2000):
        swendsen_wang_step(m, 0.0, c, rng)
        ones += int(c.labels.sum())
    assert abs(ones / (2000 * 9) - 0.5) < 0.02


def test_sw_large_theta_keeps_single_cluster():
    m = make_model(4, 4, "free", 3)
    c = Configuration(np.full(16, 2, dtype=np.int32))
    rng = Rng(21)
    for _ in range(20):
        swendsen_wang_step(m, 50.0, c, rng)
        assert len(np.unique(c.labels)) == 1


def test_sw_rejects_negative_theta():
    m = make_model(3, 3, "free", 2)
    c = Configuration(np.zeros(9, dtype=np.int32))
    with pytest.raises(ValueError):
        swendsen_wang_step(m, -0.1, c, Rng(1))
    with pytest.raises(ValueError):
        run_chain(m, -0.5, SamplerKind.SWENDSEN_WANG, n_mc=10, seed=1)


def test_sw_preserves_stationary_distribution():
    # draw exact samples by enumeration, apply one SW step to each, and
    # compare the mean statistic before and after
    m = make_model(2, 2, "free", 2)
    theta = 0.8
    weights = []
    states = []
    for code in range(16):
        lab = np.array([(code >> i) & 1 for i in range(4)], dtype=np.int32)
        states.append(lab)
        weights.append(np.exp(theta * sufficient_statistic(m, Configuration(lab))[0]))
    p = np.array(weights) / sum(weights)
    exact_mean = sum(pi * sufficient_statistic(m, Configuration(s))[0]
                     for pi, s in zip(p, states))
    np_rng = np.random.default_rng(77)
    rng = Rng(78)
    n = 40_000
    draws = np_rng.choice(16, size=n, p=p)
    total = 0
    for idx in draws:
        c = Configuration(states[idx].copy())
        swendsen_wang_step(m, theta, c, rng)
        total += sufficient_statistic(m, c)[0]
    se = np.sqrt(float(enumerate_moments(m, theta).cov_stat[0, 0]) / n)
    assert abs(total / n - exact_mean) < 4 * se


@pytest.mark.parametrize("kind", [SamplerKind.GIBBS_SYSTEMATIC, SamplerKind.SWENDSEN_WANG])
def test_quick_stationarity(kind):
    # light version of the acceptance chi-square gate
    scipy_stats = pytest.importorskip("scipy.stats")
    m = make_model(2, 2, "free", 2)
    theta = 0.4
    weights = np.empty(16)
    for code in range(16):
        lab = np.array([(code >> i) & 1 for i in range(4)], dtype=np.int32)
        weights[code] = np.exp(theta * sufficient_statistic(m, Configuration(lab))[0])
    p = weights / weights.sum()
    hist = state_histogram(m, theta, kind, 100_000, seed=3, thin=5)
    chi2 = float((((hist - hist.sum() * p) ** 2) / (hist.sum() * p)).sum())
    assert scipy_stats.chi2.sf(chi2, 15) > 1e-4


def test_consumer_streaming_matches_batch():
    m = make_model(3, 3, "free", 2)
    acc = new_accumulator(1)
    out = run_chain(m, 0.5, SamplerKind.GIBBS_SYSTEMATIC, n_burn=10, n_mc=2000,
                    seed=6, consumer=lambda u: accumulate(acc, u.astype(float)))
    batch = accumulator_from_batch(out.stat_series)
    assert acc.count == batch.count == 2000
    np.testing.assert_allclose(acc.comoment, batch.comoment, rtol=1e-10)


def test_chain_dump(tmp_path):
    m = make_model(3, 3, "free", 2)
    out = run_chain(m, 0.5, SamplerKind.GIBBS_SYSTEMATIC, n_burn=10, n_mc=25, seed=6)
    path = tmp_path / "chain.txt"
    write_chain_dump(path, m, 0.5, out)
    lines = path.read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    data = [ln for ln in lines if not ln.startswith("#")]
    assert any("seed=6" in ln for ln in header)
    assert len(data) == 25
    assert int(data[-1]) == out.stat_series[-1, 0]


def test_explicit_initial_condition():
    m = make_model(3, 3, "free", 2)
    z0 = Configuration(np.ones(9, dtype=np.int32))
    out = run_chain(m, 0.2, SamplerKind.GIBBS_SYSTEMATIC, z0=z0, n_burn=0, n_mc=5, seed=2)
    assert out.stat_series.shape == (5, 1)
    assert np.all(z0.labels == 1)  # caller's config untouched
