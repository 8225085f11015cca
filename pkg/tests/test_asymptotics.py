"""Large-antenna SINR limits against a scalar-loop oracle."""

import numpy as np
import pytest
from scipy.stats import norm

from mcmimo.asymptotics import (ber_floor, norm_factors, ultimate_sinr,
                                ultimate_sinr_simplified, write_floor_csv)
from mcmimo.harness import power_control


def sinr_oracle(beta, alpha, rho):
    """Direct per-user evaluation of the limit SINR, scalar loops only."""
    L, K, _ = beta.shape
    nu = np.empty((K, L))
    for k in range(K):
        for j in range(L):
            nu[k, j] = sum(rho[k, i] * beta[j, k, i] for i in range(L)) + 1.0 / K
    out = np.empty((K, L))
    for k in range(K):
        for l in range(L):
            num = alpha[k, l] * beta[l, k, l] ** 2 / nu[k, l] ** 2
            den = sum(alpha[k, j] * beta[j, k, l] ** 2 / nu[k, j] ** 2
                      for j in range(L) if j != l)
            out[k, l] = num / den if den > 0 else np.inf
    return out


def random_fixture(rng, L=4, K=4):
    beta = 10.0 ** rng.uniform(-6, 0, size=(L, K, L))
    alpha = 10.0 ** rng.uniform(-1, 2, size=(K, L))
    rho = 10.0 ** rng.uniform(-1, 2, size=(K, L))
    return beta, alpha, rho


def test_matches_scalar_oracle_on_100_fixtures():
    rng = np.random.default_rng(60)
    for _ in range(100):
        beta, alpha, rho = random_fixture(rng)
        np.testing.assert_allclose(ultimate_sinr(beta, alpha, rho),
                                   sinr_oracle(beta, alpha, rho), rtol=1e-12)


def test_single_cell_returns_infinity_marker():
    beta = np.full((1, 3, 1), 0.7)
    s = ultimate_sinr(beta, np.ones((3, 1)), np.ones((3, 1)))
    assert s.shape == (3, 1)
    assert np.all(np.isinf(s))
    assert np.all(np.isinf(ultimate_sinr_simplified(beta)))


def test_two_cell_fully_symmetric_gives_unity():
    beta = np.full((2, 4, 2), 0.3)
    s = ultimate_sinr(beta, np.full((4, 2), 2.0), np.full((4, 2), 5.0))
    np.testing.assert_array_equal(s, np.ones((4, 2)))


def test_simplified_single_interferer():
    beta = np.zeros((2, 1, 2))
    beta[0, 0, 0] = beta[1, 0, 1] = 1.0   # serving links
    beta[1, 0, 0] = beta[0, 0, 1] = 0.5   # cross links
    np.testing.assert_allclose(ultimate_sinr_simplified(beta),
                               [[4.0, 4.0]], rtol=1e-15)


def test_simplified_vanishing_interference():
    beta = np.zeros((2, 2, 2))
    beta[0, :, 0] = beta[1, :, 1] = 1.0
    assert np.all(np.isinf(ultimate_sinr_simplified(beta)))


def test_simplified_scale_invariance():
    rng = np.random.default_rng(61)
    beta, _, _ = random_fixture(rng)
    base = ultimate_sinr_simplified(beta)
    for c in (1e-3, 1.0, 1e3):
        np.testing.assert_allclose(ultimate_sinr_simplified(c * beta), base,
                                   rtol=1e-12)


def test_exact_sinr_invariant_when_powers_track_beta():
    # inverting power control makes the limit depend on beta ratios only
    rng = np.random.default_rng(62)
    beta, _, _ = random_fixture(rng)
    ref = None
    for c in (1e-3, 1.0, 1e3):
        pa = power_control(c * beta, 10.0, 10.0, 4)
        s = ultimate_sinr(c * beta, pa.alpha, pa.rho)
        if ref is None:
            ref = s
        else:
            np.testing.assert_allclose(s, ref, rtol=1e-12)


def test_norm_factors_exceed_pilot_floor():
    rng = np.random.default_rng(63)
    for _ in range(10):
        beta, _, rho = random_fixture(rng, L=3, K=5)
        nu = norm_factors(beta, rho).nu
        assert nu.shape == (5, 3)
        assert np.all(nu > 1.0 / 5)


def test_ber_floor_values():
    assert ber_floor(4.0, 4) == pytest.approx(norm.sf(2.0), rel=1e-12)
    assert ber_floor(4.0, 4) == pytest.approx(2.28e-2, abs=5e-4)
    assert ber_floor(np.inf, 4) == 0.0
    assert isinstance(ber_floor(1.0, 4), float)
    grid = ber_floor(np.linspace(0.5, 30, 40), 4)
    assert np.all(np.diff(grid) < 0)
    with pytest.raises(ValueError):
        ber_floor(0.0, 4)
    with pytest.raises(ValueError):
        ber_floor(-1.0, 4)


def test_floor_csv_round_trip(tmp_path):
    path = tmp_path / "floor.csv"
    rows = [(0, 0, 2.5, 2.0, 0.079), (0, 1, np.inf, np.inf, 0.0)]
    write_floor_csv(path, rows, header_comment="probe")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# probe")
    assert lines[1] == "cell,user,sinr_asymptotic,sinr_simplified,ber_floor"
    assert lines[2].split(",")[:2] == ["0", "0"]
    assert "inf" in lines[3]
