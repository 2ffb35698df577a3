"""End-to-end smoke tests of the Python bindings.

The heavy numerical validation lives in the C++ test suites; these checks
confirm that the extension loads, numpy arrays round-trip, results match the
documented conventions, and C++ errors surface as Python exceptions.
"""

import math
import os

import numpy as np
import pytest

import ccadet


def make_rng(seed):
    return np.random.default_rng(seed)


def random_signs(rng, rows, cols):
    return rng.choice([-1.0, 1.0], size=(rows, cols))


def test_theory_helpers():
    assert ccadet.theoretical_rho_max(1.0) == pytest.approx(0.5)
    assert ccadet.theoretical_rho_max(0.0) == 0.0
    with pytest.raises(ValueError):
        ccadet.theoretical_rho_max(-0.5)


def test_link_model():
    assert ccadet.los_probability(10.0) == 1.0
    assert 0.0 < ccadet.los_probability(500.0) < 1.0

    gain, clamped = ccadet.uma_path_gain(100.0, 2.0, True)
    assert 0.0 < gain < 1.0
    assert not clamped
    _, clamped_far = ccadet.uma_path_gain(1e5, 2.0, False)
    assert clamped_far

    a = ccadet.array_response(math.pi / 2.0, 4)
    np.testing.assert_allclose(a, np.ones(4), atol=1e-12)
    np.testing.assert_allclose(np.abs(ccadet.array_response(0.3, 8)), 1.0, atol=1e-12)


def test_solve_cca_identical_views():
    rng = make_rng(7)
    y = rng.normal(size=(6, 400))
    q1, q2, rho = ccadet.solve_cca(y, y, 3)
    assert q1.shape == (6, 3)
    assert q2.shape == (6, 3)
    np.testing.assert_allclose(rho, 1.0, atol=1e-6)


def test_racma_round_trip():
    rng = make_rng(11)
    truth = random_signs(rng, 60, 2)
    mixing = np.array([[1.0, 0.4], [-0.3, 1.2]])
    s_hat, mixing_hat, residual = ccadet.racma_factorize(truth @ mixing, 2)
    assert residual < 1e-8
    aligned, permutation, signs = ccadet.resolve_ambiguity(s_hat, truth)
    np.testing.assert_array_equal(aligned, truth)
    assert sorted(permutation) == [0, 1]
    assert set(np.abs(signs)) == {1.0}
    np.testing.assert_allclose(
        np.abs(s_hat), np.ones_like(s_hat), atol=0.0
    )  # entries exactly +-1

    with pytest.raises(ValueError):
        ccadet.racma_factorize(np.zeros((4, 2)), 2)  # below the row floor
    with pytest.raises(ArithmeticError):
        rank1 = np.hstack([truth[:, :1], 2.0 * truth[:, :1]])
        ccadet.racma_factorize(rank1, 2)  # non-identifiable mixture


def test_blind_detection_noiseless():
    rng = make_rng(23)
    t, k_e, m = 300, 2, 6
    common = random_signs(rng, t, k_e)
    mix1 = rng.normal(size=(2 * m, k_e))
    mix2 = rng.normal(size=(2 * m, k_e))
    result = ccadet.detect_cca_racma(mix1 @ common.T, mix2 @ common.T, k_e)
    assert result["rho"].shape == (k_e,)
    assert result["rho"].min() > 1.0 - 1e-6
    assert result["racma_residual"] < 1e-6
    aligned, _, _ = ccadet.resolve_ambiguity(result["symbols"], common)
    np.testing.assert_array_equal(aligned, common)


def test_cca_sync_finds_the_delay():
    rng = make_rng(31)
    t, t_tilde, delay = 200, 240, 13
    stream = random_signs(rng, t_tilde + delay, 1)
    mix1 = rng.normal(size=(4, 1))
    mix2 = rng.normal(size=(4, 1))
    noise = 0.05
    y1 = mix1 @ stream[delay : delay + t_tilde].T + noise * rng.normal(size=(4, t_tilde))
    y2 = mix2 @ stream[:t_tilde].T + noise * rng.normal(size=(4, t_tilde))
    trace = ccadet.cca_sync(y1, y2, t, [0, 40])
    assert trace["tau_star"] == delay
    assert trace["peak_found"]
    assert trace["solves"] == 41
    assert len(trace["offsets"]) == 41
    assert trace["rho1"][delay] > 0.9

    with pytest.raises(ValueError):
        ccadet.cca_sync(y1, y2, t, [0, 100])  # window exceeds the recording


def test_principal_angles():
    rng = make_rng(41)
    basis = rng.normal(size=(50, 3))
    recombined = basis @ rng.normal(size=(3, 3))
    angles = ccadet.principal_angles(basis, recombined)
    assert np.max(angles) < 1e-7


def test_run_experiment_rows():
    preset = os.path.join(os.environ["CCADET_PRESET_DIR"], "small_mlsic.scn")
    rows = ccadet.run_experiment(
        preset,
        trials=2,
        seed=5,
        overrides=["snr_grid_db = 6", "t_symbols = 200"],
    )
    assert len(rows) == 3  # one SNR x three detectors
    assert [row["detector"] for row in rows] == ["cca_racma", "zf_sic", "ml_sic"]
    for row in rows:
        assert row["scenario_id"] == "small_mlsic"
        assert row["snr_db"] == 6.0
        assert row["trials"] == 2
        assert row["bits_total"] == 2 * 2 * 200  # trials x k_e x T
        assert 0.0 <= row["ber"] <= 1.0
        assert row["ber"] == row["bit_errors"] / row["bits_total"]
        assert row["failed_trials"] == 0

    again = ccadet.run_experiment(
        preset,
        trials=2,
        seed=5,
        threads=4,
        overrides=["snr_grid_db = 6", "t_symbols = 200"],
    )
    assert rows == again

    with pytest.raises(ValueError):
        ccadet.run_experiment(preset, overrides=["bogus = 1"])
    with pytest.raises(ValueError):
        ccadet.run_experiment(os.path.join(os.path.dirname(preset), "missing.scn"))
