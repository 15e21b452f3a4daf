import json
import math
import os
import pathlib

import pytest

import multiscale as ms

SRC = pathlib.Path(os.environ.get("MULTISCALE_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
LINEAR = SRC / "configs" / "linear_benchmark.json"


@pytest.fixture(scope="module")
def linear():
    return ms.Config.from_file(str(LINEAR))


def small(cfg, ensemble=8):
    doc = json.loads(cfg.to_json())
    doc["ensemble_size"] = ensemble
    doc["model"]["h_macro"] = 0.002
    return ms.Config.from_string(json.dumps(doc))


def test_config_round_trip(linear):
    again = ms.Config.from_string(linear.to_json())
    assert again.hash() == linear.hash()
    assert len(linear.hash()) == 16
    assert linear.n_modes == 16
    assert linear.omega > 0


def test_unknown_key_rejected(linear):
    doc = json.loads(linear.to_json())
    doc["bogus"] = 1
    with pytest.raises(ms.ConfigRejected):
        ms.Config.from_string(json.dumps(doc))


def test_analytic_fbar_matches_closed_form(linear):
    # linear benchmark: mode k of the averaged drift at e_1 is 1/(alpha_{2,1} + 2) on mode 1, zero elsewhere
    x = [1.0] + [0.0] * (linear.n_modes - 1)
    f = ms.analytic_fbar(linear, x)
    assert f[0] == pytest.approx(1.0 / (math.pi**2 + 2.0), rel=1e-12)
    assert all(abs(c) < 1e-15 for c in f[1:])


def test_estimate_fbar_within_error(linear):
    x = [1.0] + [0.0] * (linear.n_modes - 1)
    drift, se = ms.estimate_fbar(linear, x)
    exact = ms.analytic_fbar(linear, x)
    assert len(drift) == len(se) == linear.n_modes
    assert abs(drift[0] - exact[0]) <= 4.0 * se[0] + 1e-12


def test_trajectory_deterministic(linear):
    a = ms.simulate_trajectory(linear, trajectory_id=3, epsilon=0.1, sample_times=[0.5, 1.0])
    b = ms.simulate_trajectory(linear, trajectory_id=3, epsilon=0.1, sample_times=[0.5, 1.0])
    c = ms.simulate_trajectory(linear, trajectory_id=4, epsilon=0.1, sample_times=[0.5, 1.0])
    assert a["samples"] == b["samples"]
    assert a["samples"][-1]["u"] != c["samples"][-1]["u"]
    assert [s["t"] for s in a["samples"]] == pytest.approx([0.5, 1.0])


def test_khasminskii_delta():
    eps = 0.01
    assert ms.khasminskii_delta(eps, 1.0, 2.0) == pytest.approx(eps * math.sqrt(abs(math.log(eps))), rel=1e-12)
    with pytest.raises(ms.InvalidParameter):
        ms.khasminskii_delta(1.5, 1.0, 2.0)


def test_tables_independent_of_workers(linear):
    cfg = small(linear)
    one = ms.khasminskii_study(cfg, workers=1)
    three = ms.khasminskii_study(cfg, workers=3)
    assert one == three
    assert {"experiment_id", "epsilon", "statistic_id", "value", "std_error", "n", "censored_count"} <= set(one[0])
