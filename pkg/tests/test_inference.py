import math

import numpy as np
import pytest

from wbrier import inference as inf
from wbrier import metrics as mt
from wbrier import weightfn as wf
from wbrier.decompose import ipa
from wbrier.errors import DegenerateDataError
from wbrier.rocutil import auc
from wbrier.simlab import generate_set_b

# sum r (1 - r) (1 - I_r(2, 8) - 0.2)^2 / 5 over the risks below, with scipy's beta cdf
NULL_VAR_TOY = 0.015256289501394729
TOY = mt.ValidationSet(np.array([0.05, 0.1, 0.2, 0.4, 0.7]), np.array([0, 0, 1, 0, 1]))

WEIGHTS = [wf.Uniform(), wf.Beta(2, 5), wf.Beta(2, 8), wf.Beta(4, 8)]


def calibrated(rng, n):
    r = rng.beta(1.5, 3, n)
    return mt.ValidationSet(r, (rng.random(n) < r).astype(int))


def test_var_zero_for_perfect_predictions():
    y = np.array([0, 1, 1, 0])
    d = mt.ValidationSet(y.astype(float), y)
    for w in WEIGHTS:
        assert inf.var_bsw(d, w) == 0.0
        assert inf.var_bsw_null(d, w) == 0.0


def test_uniform_var_is_sample_variance(rng):
    d = calibrated(rng, 3000)
    loss = 0.5 * (d.risks - d.outcomes) ** 2
    assert abs(inf.var_bsw(d, wf.Uniform()) - np.var(loss)) < 1e-12
    assert abs(inf.var_bsw(d, wf.Uniform(), of_mean=True) - np.var(loss) / d.n) < 1e-15


def test_null_variance_toy():
    assert abs(inf.var_bsw_null(TOY, wf.Beta(2, 8)) - NULL_VAR_TOY) < 1e-14


def test_null_variance_uniform(rng):
    d = calibrated(rng, 1000)
    r = d.risks
    expected = np.mean(r * (1 - r) * 0.25 * (1 - 2 * r) ** 2)
    assert abs(inf.var_bsw_null(d, wf.Uniform()) - expected) < 1e-15


def test_null_variance_matches_weighted_z(rng):
    for _ in range(20):
        d = calibrated(rng, 500)
        for w in WEIGHTS:
            A, B = mt.loss_components(d.risks, w)
            num = np.mean((d.outcomes - d.risks) * (A - B))
            z = num / math.sqrt(inf.var_bsw_null(d, w) / d.n)
            assert abs(z - mt.spiegelhalter_z_weighted(d, w)) < 1e-12


def test_calibrated_variance_difference_identity(rng):
    for _ in range(20):
        d = calibrated(rng, 800)
        r = d.risks
        for w in WEIGHTS:
            lhs = inf.var_bsw_wellcal(d, w) - inf.var_bsw_calibrated(d, w)
            rhs = np.mean(r * (1 - r) * (1 - wf.cdf(w, r) - wf.mean(w)) ** 2)
            assert abs(lhs - rhs) < 1e-12
            assert inf.var_bsw_wellcal(d, w) >= inf.var_bsw_calibrated(d, w)


def test_calibrated_variance_constant_risk():
    d = mt.ValidationSet(np.full(10, 0.3), np.array([0, 1] * 5))
    assert inf.var_bsw_calibrated(d, wf.Beta(2, 8)) == 0.0


def test_asymptotic_ci_root_n(rng):
    ratios = []
    w = wf.Beta(2, 5)
    for _ in range(30):
        small, large = calibrated(rng, 2000), calibrated(rng, 8000)
        a, b = inf.asymptotic_ci(small, w), inf.asymptotic_ci(large, w)
        ratios.append((b.upper - b.lower) / (a.upper - a.lower))
    assert 0.45 <= np.mean(ratios) <= 0.55
    ci = inf.asymptotic_ci(small, w, level=0.9, calibrated=True)
    assert ci.lower < ci.estimate < ci.upper and ci.method == "asymptotic-normal"
    assert ci.estimate == mt.weighted_brier_calibrated(small, w)


def test_asymptotic_matches_bootstrap_width():
    d = generate_set_b(10_000, seed=7)["true"]
    w = wf.Beta(2, 5)
    a = inf.asymptotic_ci(d, w)
    b = inf.bootstrap(d, inf.bsw_statistic(w), inf.BootstrapConfig(2000, seed=1))
    ratio = (a.upper - a.lower) / (b.upper - b.lower)
    assert abs(ratio - 1) < 0.15


def test_constant_statistic_zero_width(rng):
    d = calibrated(rng, 100)
    ci = inf.bootstrap(d, lambda x: 0.25, inf.BootstrapConfig(200, seed=3))
    assert ci.lower == ci.upper == ci.estimate == 0.25 and not ci.flagged


def test_sample_mean_fast_path_agrees(rng):
    d = calibrated(rng, 400)
    w = wf.Beta(2, 8)
    cfg = inf.BootstrapConfig(300, seed=9)
    fast = inf.bootstrap_replicates(d, inf.bsw_statistic(w), cfg)
    slow = inf.bootstrap_replicates(d, lambda x: mt.weighted_brier(x, w), cfg)
    np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-15)


def test_deterministic_across_workers(rng):
    d = calibrated(rng, 500)
    cfg = inf.BootstrapConfig(400, seed=2**63 + 5)
    one = inf.bootstrap_replicates(d, ipa, cfg, workers=1)
    four = inf.bootstrap_replicates(d, ipa, cfg, workers=4)
    assert np.array_equal(one, four)
    again = inf.bootstrap(d, ipa, cfg)
    assert again == inf.bootstrap(d, ipa, cfg, workers=3)
    other = inf.bootstrap_replicates(d, ipa, inf.BootstrapConfig(400, seed=6))
    assert not np.array_equal(one, other)


def test_replicate_streams_fixed_by_index():
    cfg = inf.BootstrapConfig(10, seed=4)
    rs = inf.Resampler(50, cfg)
    assert np.array_equal(rs.indices(7), inf.Resampler(50, cfg).indices(7))
    assert not np.array_equal(rs.indices(7), rs.indices(8))
    assert not np.array_equal(rs.indices(7, 0), rs.indices(7, 1))


def test_cluster_resampling_keeps_clusters_whole():
    ids = np.repeat(np.arange(20), 3)
    rs = inf.Resampler(60, inf.BootstrapConfig(5, seed=1, resampling_unit="cluster"), ids)
    idx = rs.indices(0)
    assert idx.size == 60
    picked = ids[idx]
    for c in np.unique(picked):
        assert np.sum(picked == c) % 3 == 0


def test_cluster_interval_wider(rng):
    n_clusters, size = 300, 8
    ids = np.repeat(np.arange(n_clusters), size)
    # risks and outcomes both shared within a cluster, so the loss is too
    shared = np.repeat(rng.normal(0, 1.5, n_clusters), size)
    r = 1 / (1 + np.exp(-(shared + rng.normal(0, 0.1, ids.size))))
    y = np.repeat(rng.random(n_clusters), size) < r
    y = np.where(rng.random(ids.size) < 0.05, ~y, y).astype(int)
    d = mt.ValidationSet(r, y, ids)
    stat = inf.bsw_statistic(wf.Beta(2, 5))
    obs = inf.bootstrap(d, stat, inf.BootstrapConfig(1000, seed=1))
    clu = inf.bootstrap(d, stat, inf.BootstrapConfig(1000, seed=1, resampling_unit="cluster"))
    assert (clu.upper - clu.lower) > 1.3 * (obs.upper - obs.lower)


def test_cluster_mode_needs_ids(rng):
    with pytest.raises(ValueError):
        inf.bootstrap(calibrated(rng, 50), auc,
                      inf.BootstrapConfig(100, resampling_unit="cluster"))


def test_degenerate_resamples_redrawn():
    r = np.linspace(0.01, 0.99, 40)
    y = np.zeros(40, dtype=int)
    y[0] = 1
    d = mt.ValidationSet(r, y)
    reps = inf.bootstrap_replicates(d, auc, inf.BootstrapConfig(50, seed=0))
    assert reps.shape == (50,) and np.all(np.isfinite(reps))

    def always_fails(x):
        raise DegenerateDataError("nope")

    with pytest.raises(DegenerateDataError):
        inf.bootstrap_replicates(d, always_fails, inf.BootstrapConfig(3, seed=0))


def test_few_replicates_warns(rng):
    with pytest.warns(UserWarning):
        inf.bootstrap(calibrated(rng, 50), auc, inf.BootstrapConfig(20))


def test_paired_shares_draws(rng):
    d = calibrated(rng, 300)
    cfg = inf.BootstrapConfig(200, seed=11)
    reps = inf.bootstrap_paired([d, d], ipa, cfg)
    assert reps.shape == (2, 200)
    assert np.array_equal(reps[0], reps[1])
    with pytest.raises(ValueError):
        inf.bootstrap_paired([d, calibrated(rng, 10)], ipa, cfg)


def test_percentile_ci_flags_outside():
    ci = inf.percentile_ci(200.0, np.arange(100.0), 0.95)
    assert ci.flagged and ci.method == "bootstrap-percentile"
    assert ci.as_dict()["flagged"] is True


@pytest.mark.parametrize("kwargs", [dict(replicates=0), dict(resampling_unit="patient"),
                                    dict(seed=-1), dict(seed=2**64)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        inf.BootstrapConfig(**kwargs)
