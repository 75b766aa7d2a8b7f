import json
import math

import numpy as np
import pytest

import torus_needlets as tn


def smooth_density(q, alpha, bandlimit, cond=tn.Condition.Cond1):
    return tn.make_density(q, alpha, tn.default_scale(q, alpha, bandlimit, cond), bandlimit, cond)


def test_density_integrates_to_one():
    f = smooth_density(1, 2.0, 16)
    x = 2 * math.pi * np.arange(64) / 64
    assert abs(f(x).mean() * 2 * math.pi - 1.0) < 1e-12
    assert f.grid_min > 0
    g = tn.density_from_text(f.to_text())
    assert np.allclose(g.coefficients(), f.coefficients())


def test_window_partition_of_unity():
    w = tn.WindowFunction(2.0)
    x = np.linspace(1.0, 100.0, 50)
    total = sum(w.squared(x / 2.0**j) for j in range(9))
    assert np.max(np.abs(total - 1.0)) < 1e-10


def test_statistic_matches_needlet_sum_and_has_unit_scale():
    frame = tn.NeedletFrame(1, 2.0, 3)
    f = smooth_density(1, 2.0, 4 * frame.shell_radius)
    x1, x2 = tn.sample_pair(f, f, 300.0, seed=7, replica=1)
    assert x1.shape[1] == 1
    u = tn.compute_u(frame, x1, x2)
    # U = sum over ordered pairs of the kernel
    pts = [(1, p) for p in x1] + [(2, p) for p in x2]
    direct = sum(
        tn.kernel_h(frame, a, list(p), b, list(r))
        for i, (a, p) in enumerate(pts)
        for k, (b, r) in enumerate(pts)
        if i != k
    )
    assert abs(u - direct) < 1e-8 * max(1.0, abs(u))
    res = tn.evaluate_ustat(frame, f, 300.0, x1, x2)
    assert res["normalized"] == pytest.approx(u / math.sqrt(tn.analytic_variance(frame, f, 300.0)))


def test_sampling_is_reproducible():
    f = tn.uniform_density(2, 2)
    a = tn.sample_pair(f, f, 50.0, seed=3, replica=9)
    b = tn.sample_pair(f, f, 50.0, seed=3, replica=9)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert a[0].shape[1] == 2


def test_bound_report_and_unit_bound():
    assert tn.wasserstein_bound(1.0, 1.0, 1.0, 1.0) == pytest.approx(14.485281374238570, abs=1e-15)
    frame = tn.NeedletFrame(1, 2.0, 2)
    f = smooth_density(1, 2.0, 4 * frame.shell_radius)
    rep = tn.bound_report(frame, f, 1000.0)
    t = rep["terms"]
    assert rep["wasserstein_bound"] == pytest.approx(t["star11"] + t["star21"] + t["l4"])
    direct = tn.bound_report(frame, f, 1000.0, tn.SumPath.Direct)
    assert direct["wasserstein_bound"] == pytest.approx(rep["wasserstein_bound"], rel=1e-10)


def test_distances():
    z = np.random.default_rng(0).standard_normal(20000)
    assert tn.empirical_wasserstein(z) < 0.02
    assert tn.ks_distance(z) < 0.02
    with pytest.raises(tn.TooFewSamples):
        tn.ks_distance(np.array([]))


def test_errors_are_mapped():
    with pytest.raises(tn.InsufficientBandlimit):
        tn.analytic_variance(tn.NeedletFrame(1, 2.0, 3), tn.uniform_density(1, 4), 10.0)
    with pytest.raises(tn.Error):
        tn.make_density(1, 0.2, 0.01, 8)


def test_experiment_is_deterministic():
    kw = dict(j=[2], R=[100, 200], replicas=100, seed=11)
    a = tn.run_experiment(**kw)
    b = tn.run_experiment(workers=2, **kw)
    assert a["csv"] == b["csv"]
    doc = json.loads(a["json"])
    assert len(doc["rows"]) == 2
    assert len(a["statistics"][0]) == 100
