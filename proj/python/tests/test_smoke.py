import json
import math

import numpy as np
import pytest

import hpcfe


def g_low(x):
    return np.sin(8 * np.pi * x)


def test_pedagogical_values():
    low, high = hpcfe.pedagogical(1 / 16)
    assert low == pytest.approx(1.0)
    assert high == pytest.approx(1 / 16 - math.sqrt(2))
    with pytest.raises(ValueError):
        hpcfe.pedagogical(1.5)


def test_train_predict_interpolates():
    x = np.linspace(0, 1, 20).reshape(-1, 1)
    y = g_low(x[:, 0])
    model = hpcfe.train(x, y, [0.0], [1.0], hpcfe.Config(nugget=0.0))
    mean, var = model.predict(x)
    assert np.max(np.abs(mean - y)) <= 1e-6 * (y.max() - y.min())
    assert np.all(var >= 0)
    assert json.loads(model.to_json())["format"] == "hpcfe-model"


def test_model_json_round_trip():
    x = np.linspace(0, 1, 30).reshape(-1, 1)
    model = hpcfe.train(x, g_low(x[:, 0]), [0.0], [1.0])
    loaded = hpcfe.load_model(model.to_json())
    q = np.linspace(0, 1, 7).reshape(-1, 1)
    np.testing.assert_array_equal(loaded.predict(q)[0], model.predict(q)[0])


def test_cascade_beats_low_fidelity():
    x1 = np.linspace(0, 1, 50).reshape(-1, 1)
    x2 = x1[::3]
    y1 = np.array([hpcfe.pedagogical(v)[0] for v in x1[:, 0]])
    y2 = np.array([hpcfe.pedagogical(v)[1] for v in x2[:, 0]])
    cascade = hpcfe.train_cascade([(x1, y1), (x2, y2)], [0.0], [1.0])
    assert cascade.levels == 2
    q = np.linspace(0, 1, 200).reshape(-1, 1)
    truth = np.array([hpcfe.pedagogical(v)[1] for v in q[:, 0]])
    mean, _ = cascade.predict(q)
    assert np.sqrt(np.mean((mean - truth) ** 2)) < 0.1


def test_duplicates_without_nugget_raise_numerical_error():
    x = np.array([[0.1], [0.1], [0.5], [0.9]])
    with pytest.raises(ArithmeticError):
        hpcfe.train(x, np.array([1.0, 1.0, 2.0, 0.5]), [0.0], [1.0], hpcfe.Config(nugget=0.0))


def test_study_and_twin():
    r = hpcfe.run_study("pedagogical", seed=1)
    assert r["multi_fidelity"]["rmse"] < min(r["hf_only"]["rmse"], r["lf_only"]["rmse"])
    t = hpcfe.twin_scenario("stiffness", "frequency", 10)
    assert t["mf_rmse"] < t["sf_rmse"]
    assert len(t["t_s"]) == len(t["mean"])


def test_cli_exit_codes(tmp_path):
    assert hpcfe.cli(["predict", "--model", str(tmp_path / "missing.json"),
                      "--query", str(tmp_path / "q.csv"), "--out", str(tmp_path / "p.csv")]) == 1
    out = tmp_path / "uq"
    assert hpcfe.cli(["uq", "run", "--bench", "pedagogical", "--seed", "2", "--out-dir", str(out)]) == 0
    assert (out / "metrics.csv").read_text().startswith("model,rmse,ks_distance,mean_abs_error")
