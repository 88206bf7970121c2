import math

import numpy as np
import pytest

import roughchaos as rc


def test_circle_area():
    t = np.linspace(0.0, 2.0 * math.pi, 513)
    p = rc.lift_piecewise_linear(np.column_stack([np.cos(t), np.sin(t)]))
    x, xx = p.increment(0, p.steps)
    assert np.allclose(x, 0.0, atol=1e-12)
    assert abs(0.5 * (xx[0, 1] - xx[1, 0]) - math.pi) < 1e-3


def test_brownian_lift_is_geometric_and_deterministic():
    a = rc.lift_brownian(3, steps=16, refine=4, seed=7)
    assert a == rc.lift_brownian(3, steps=16, refine=4, seed=7)
    assert a.points.shape == (17, 3) and a.areas.shape == (16, 3, 3)
    x, xx = a.increment(2, 11)
    assert np.allclose(xx + xx.T, np.outer(x, x), atol=1e-12)
    b = rc.RoughPath(a.points, a.areas, a.horizon)
    assert rc.homogeneous_distance(a, b) == 0.0


def test_rough_path_csv_round_trip(tmp_path):
    a = rc.lift_brownian(2, steps=8, refine=2, seed=3)
    rc.write_rough_path_csv(tmp_path / "p.csv", a)
    assert rc.read_rough_path_csv(tmp_path / "p.csv") == a


def test_transport_and_w1():
    plan = rc.solve_transport([0.5, 0.5], [0.5, 0.5], [0.0, 1.0, 1.0, 0.0])
    assert plan["objective"] == 0.0
    x = np.array([0.0, 1.0, 3.0])
    y = np.array([0.5, 2.0])
    # W1 on the line is the integral of |F - G|.
    grid = np.linspace(-1, 4, 50001)
    F = (x[None, :] <= grid[:, None]).mean(1)
    G = (y[None, :] <= grid[:, None]).mean(1)
    assert abs(rc.wasserstein1(x, y) - getattr(np, "trapezoid", getattr(np, "trapz", None))(abs(F - G), grid)) < 1e-3
    pts = np.random.default_rng(1).normal(size=(20, 2))
    assert rc.wasserstein1(pts, pts) == pytest.approx(0.0, abs=1e-12)


def test_run_experiment(tmp_path):
    text = "schema = 1\nseed = 5\nm = 4\nn_list = 4, 8\nsamples = 500\n"
    report = rc.run_experiment("sanov-decay", text, out=tmp_path)
    assert report["experiment"] == "sanov-decay"
    assert report["config_sha1"] == rc.git_blob_sha1(text)
    assert (tmp_path / "report.json").exists()
    assert report == rc.run_experiment("sanov-decay", text, threads=2)
    assert "sanov-decay" in rc.experiment_ids()


def test_config_errors():
    with pytest.raises(rc.ConfigError):
        rc.run_experiment("sanov-decay", "schema = 1\nseed = 1\nbogus = 2\n")
    with pytest.raises(ValueError):
        rc.run_experiment("poc", "seed = 1\n")
