import json
import math

import numpy as np
import pytest

import modev


def test_catalog_and_kernel_queries():
    assert "gauss1" in modev.catalog_model_ids()
    rad = modev.load_model("rad1")
    assert rad.log_mgf([0.0], [1.0]) == pytest.approx(math.log(math.cosh(1.0)))
    assert rad.tilt_mean([0.0], [1.0])[0] == pytest.approx(math.tanh(1.0))
    assert modev.load_model("gauss1", gamma=0.2).a(32) == pytest.approx(32 ** -0.2)


def test_spectral_helpers():
    assert modev.pinv_quad_form(np.diag([1.0, 0.0]), [0.0, 1.0]) == math.inf
    np.testing.assert_allclose(modev.truncated_inv_sqrt(np.diag([1.0, 0.0]), 3.0), np.diag([1.0, 3.0]))
    np.testing.assert_allclose(modev.psd_sqrt(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]))


def test_rates():
    ou = modev.load_model("ou1")
    assert modev.terminal_rate(ou, [1.0])["value"] == pytest.approx(1.156518, rel=1e-5)
    assert modev.terminal_rate(modev.load_model("degen2"), [0.0, 1.0])["value"] is None
    lap = modev.laplace_value(modev.load_model("gauss1"), "linear 1", m=200)
    assert lap["value"] == pytest.approx(-0.5, abs=1e-8)


def test_dynamics():
    ou = modev.load_model("ou1")
    assert modev.noiseless_path(ou, 10).shape == (1, 11)
    assert modev.transition_matrix(ou, 0.0, 1.0)[0, 0] == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_estimate_and_ladder():
    gauss = modev.load_model("gauss1")
    est = modev.estimate(gauss, "terminal>=1", n=256, replications=2000, seed=3)
    truth = 0.5 * math.erfc(256 ** 0.25 / math.sqrt(2.0))
    assert abs(est["estimate"] - truth) <= 4 * est["std_error"]
    report = modev.run_ladder(gauss, "terminal>=1", [64, 256], replications=500)
    assert [row["n"] for row in report["rows"]] == [64, 256]


def test_errors_and_cli():
    with pytest.raises(modev.ConfigError):
        modev.load_model("no-such-model")
    with pytest.raises(modev.Error):
        modev.estimate(modev.load_model("exp1"), "terminal>=1", n=16, K=4.0)
    code, out, _ = modev.run_cli(["rate", "--model", "ou1", "--target", "1.0", "--json"])
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.156518, rel=1e-5)
