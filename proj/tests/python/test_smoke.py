import json

import numpy as np
import pytest

import hope_bandit as hb

SMALL = {
    "master_seed": 3,
    "repetitions": 2,
    "defaults": {"K": 3, "T": 60, "p": 20},
    "scenarios": [{"id": "s1"}, {"id": "s2"}],
    "policies": [{"name": "hope"}, {"name": "rdl-etc"}, {"name": "lin-ucb"}],
}


def test_lasso_on_identity_soft_thresholds():
    beta, converged = hb.fit_lasso(np.eye(2), np.array([3.0, 0.5]), 1.0, objective_scale="unit")
    assert converged
    np.testing.assert_allclose(beta, [2.5, 0.0], atol=1e-12)


def test_rdl_is_minimum_norm_interpolant():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 12))
    y = rng.standard_normal(5)
    theta = hb.fit_rdl(X, y)
    np.testing.assert_allclose(X @ theta, y, atol=1e-10)
    np.testing.assert_allclose(theta, np.linalg.pinv(X) @ y, atol=1e-10)


def test_sis_keeps_the_aligned_feature():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 8))
    y = 5.0 * X[:, 6]
    assert hb.sis_screen(X, y, 1) == [6]


def test_project_split_identity():
    theta = np.array([2.0, -1.0, 0.5, 3.0])
    alpha, z, zeta = hb.project_split(np.eye(4), np.array([1.0, 0, 0, 0]), theta)
    assert alpha == pytest.approx(1.0)
    np.testing.assert_array_equal(z, [1, 0, 0, 0])
    np.testing.assert_allclose(zeta, [0, -0.5, 0.25, 1.5])


def test_pwe_estimate_is_close_on_sparse_data():
    rng = np.random.default_rng(2)
    theta = np.zeros(40)
    theta[[3, 17, 29]] = [1.5, -2.0, 1.0]
    X = rng.standard_normal((60, 40))
    y = X @ theta + 0.05 * rng.standard_normal(60)
    x = rng.standard_normal(40)
    mu = hb.pwe_estimate(X, y, x, sigma=0.05)
    assert abs(mu - x @ theta) < 0.2 * max(1.0, abs(x @ theta))
    assert hb.pwe_estimate(X, y, np.zeros(40), sigma=0.05) == 0.0


def test_choose_n():
    assert hb.choose_n("s1", 5, 500) == 22
    assert hb.choose_n("s1", 5, 500, 20.0) == 50
    with pytest.raises(hb.ConfigError):
        hb.choose_n("s1", 5, 19)


def test_config_validation_reports_locations():
    assert hb.validate_config(json.dumps(SMALL)) == []
    bad = dict(SMALL, policies=[{"name": "lin-ucb", "ucb_alpah": 1}])
    with pytest.raises(hb.ConfigError, match="/policies/0/ucb_alpah"):
        hb.validate_config(json.dumps(bad))
    assert json.loads(hb.default_config())["repetitions"] == 10


def test_run_grid_is_deterministic_and_complete():
    a = hb.run_grid(json.dumps(SMALL))
    b = hb.run_grid(json.dumps(SMALL), jobs=2)
    assert len(a["series"]) == 6
    assert not a["skipped"] and not a["failures"]
    for sa, sb in zip(a["series"], b["series"]):
        assert (sa["scenario"], sa["policy"]) == (sb["scenario"], sb["policy"])
        assert sa["mean"] == sb["mean"]
        assert len(sa["mean"]) == 60
        assert all(s >= 0 for s in sa["std"])
        assert all(np.diff(sa["mean"]) >= 0)


def test_run_experiment_writes_files(tmp_path):
    out = hb.run_experiment(json.dumps(dict(SMALL, repetitions=1)), str(tmp_path))
    assert out["series"][0]["repetitions"] == 1
    for name in ["raw_traces.csv", "aggregate.csv", "summary.csv", "plot_s1.svg", "plot_s2.svg"]:
        assert (tmp_path / name).exists()
