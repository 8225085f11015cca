"""Power control, downlink algebra, and the Monte-Carlo drop machinery."""

import numpy as np
import pytest
from scipy.stats import norm

from mcmimo.channel import draw_fading_block, draw_small_scale
from mcmimo.config import SystemConfig, modulation_spec, validate_config
from mcmimo.harness import (BER_CSV_COLUMNS, BerPoint, downlink_transmit,
                            floor_table, genie_gains, power_control,
                            run_point, run_scenario, run_techniques,
                            write_ber_csv)
from mcmimo.modem import map_bits
from mcmimo.precoding import zf_precoder


def test_power_control_values():
    beta = np.full((2, 1, 2), 0.1)
    beta[0, 0, 0] = 1.0
    beta[1, 0, 1] = 0.5
    pa = power_control(beta, 10.0, 10.0, 4)
    assert pa.rho.shape == pa.alpha.shape == (1, 2)
    np.testing.assert_allclose(pa.rho, [[10.0, 20.0]])
    np.testing.assert_allclose(pa.alpha, [[20.0, 40.0]])


def test_power_control_inverts_own_link():
    rng = np.random.default_rng(70)
    beta = 10.0 ** rng.uniform(-5, 0, size=(3, 4, 3))
    pa = power_control(beta, 10.0, 5.0, 16)
    own = beta[np.arange(3), :, np.arange(3)].T
    np.testing.assert_allclose(pa.rho * own, 5.0, rtol=1e-12)
    np.testing.assert_allclose(pa.alpha * own, 40.0, rtol=1e-12)
    doubled = power_control(2.0 * beta, 10.0, 5.0, 16)
    np.testing.assert_allclose(doubled.rho, pa.rho / 2.0, rtol=1e-12)


def test_power_control_rejects_nonpositive_beta():
    beta = np.ones((2, 2, 2))
    beta[0, 0, 0] = 0.0
    with pytest.raises(ValueError):
        power_control(beta, 10.0, 10.0, 4)


def test_zf_downlink_noiseless_recovers_scaled_symbols():
    rng = np.random.default_rng(71)
    spec = modulation_spec(4)
    beta = np.ones((1, 4, 1))
    for N in (4, 32):
        block = draw_fading_block(rng, beta, N)
        pre = zf_precoder(block.H[0, 0])
        x = map_bits(rng.integers(0, 2, size=8), spec).reshape(1, 4)
        r = downlink_transmit(block, [pre], np.ones((4, 1)), x)
        np.testing.assert_allclose(r, x[0] / np.sqrt(pre.gamma), atol=1e-10)


def test_downlink_noise_only_when_alpha_vanishes():
    rng = np.random.default_rng(72)
    beta = np.ones((1, 4, 1))
    block = draw_fading_block(rng, beta, 8, size=(2000,))
    pre = zf_precoder(block.H[:, 0, 0])
    x = np.ones((2000, 1, 4), dtype=complex)
    silent = downlink_transmit(block, [pre], np.zeros((4, 1)), x)
    assert np.all(silent == 0)
    noisy = downlink_transmit(block, [pre], np.zeros((4, 1)), x,
                              rng=np.random.default_rng(73))
    for part in (noisy.real, noisy.imag):
        assert abs(part.var() - 0.5) < 0.02
        assert abs(part.mean()) < 0.02


def test_genie_gains_match_manual_diagonal():
    rng = np.random.default_rng(74)
    L, K, N = 2, 3, 5
    beta = 10.0 ** rng.uniform(-2, 0, size=(L, K, L))
    block = draw_fading_block(rng, beta, N)
    P = np.stack([zf_precoder(block.H[l, l]).P for l in range(L)])
    alpha = 10.0 ** rng.uniform(-1, 1, size=(K, L))
    g = genie_gains(block.G, P, alpha)
    assert g.shape == (L, K)
    for l in range(L):
        for k in range(K):
            want = np.sqrt(alpha[k, l]) * (block.G[l, l] @ P[l])[k, k]
            assert g[l, k] == pytest.approx(want, rel=1e-12)


def small_config(**kw):
    base = dict(num_cells=2, users_per_cell=4, bs_antennas=16,
                csi_mode="Contaminated", precoder_kind="ZF",
                frames_per_drop=2, num_drops=8, min_bit_errors=0, rng_seed=11)
    base.update(kw)
    return validate_config(SystemConfig(**base))


def test_run_point_matches_semianalytic_zf_reference():
    # Single cell, perfect CSI: the demapped stream sees Es/N0 = 2 SNR / gamma
    # with gamma = trace((H H^H)^-1)/K, so BER = E[Q(sqrt(2 SNR / gamma))].
    cfg = validate_config(SystemConfig(
        num_cells=1, users_per_cell=4, bs_antennas=8, snr_dl_db=0.0,
        csi_mode="Perfect", precoder_kind="ZF", frames_per_drop=50,
        num_drops=400, min_bit_errors=0, rng_seed=7))
    point = run_point(cfg, "ZF")
    assert point.bits == 400 * 50 * 4 * 2

    rng = np.random.default_rng(75)
    H = draw_small_scale(rng, 4, 8, size=(20000,))
    lam = np.linalg.eigvalsh(H @ H.conj().transpose(0, 2, 1))
    gamma = np.sum(1.0 / lam, axis=1) / 4.0
    per_draw = norm.sf(np.sqrt(2.0 / gamma))
    p_ref = per_draw.mean()
    tol = 4.0 * np.sqrt(p_ref * (1 - p_ref) / point.bits) \
        + 3.0 * per_draw.std() / np.sqrt(per_draw.size)
    assert abs(point.ber - p_ref) < tol


def test_worker_count_does_not_change_results():
    cfg = small_config(num_drops=12)
    kinds = ("MF", "ZF", "RZF", "MMSE")
    serial = run_techniques(cfg, kinds, workers=1)
    parallel = run_techniques(cfg, kinds, workers=2)
    assert serial == parallel


def test_techniques_share_drop_randomness():
    # zeta = 0 turns the ridge precoder into plain ZF, and on common draws
    # the two must produce the same error count bit for bit
    cfg = small_config(rzf_zeta=0.0, num_drops=6)
    zf, rzf = run_techniques(cfg, ["ZF", "RZF"])
    assert (zf.bit_errors, zf.bits) == (rzf.bit_errors, rzf.bits)


def test_error_target_extends_drops():
    cfg = small_config(bs_antennas=8, num_drops=2, min_bit_errors=50,
                       rng_seed=13)
    point = run_point(cfg, "ZF")
    assert point.drops > 2
    assert point.bit_errors >= 50 or point.drops == 20


def test_zero_error_target_runs_exactly_num_drops():
    cfg = small_config(num_drops=3)
    assert run_point(cfg, "ZF").drops == 3


def test_seed_handling():
    cfg = small_config(num_drops=4, frames_per_drop=4)
    by_config = run_point(cfg, "ZF")
    assert run_point(cfg, "ZF", rng=11) == by_config  # cfg seed was 11
    assert run_point(cfg, "ZF", rng=12) != by_config
    gen_point = run_point(cfg, "ZF", rng=np.random.default_rng(5))
    assert gen_point.bits == by_config.bits
    with pytest.raises(TypeError):
        run_point(cfg, "ZF", rng="not-a-seed")


def test_run_scenario_sweeps():
    cfg = small_config(num_drops=2)
    fixed = run_scenario(cfg, "k-fixed", [8, 16], techniques=["MF", "ZF"])
    assert [(p.technique, p.N, p.K) for p in fixed] == [
        ("MF", 8, 4), ("ZF", 8, 4), ("MF", 16, 4), ("ZF", 16, 4)]
    square = run_scenario(cfg, "NEqualsK", [2, 4])
    assert [(p.N, p.K) for p in square] == [(2, 2), (4, 4)]
    assert run_scenario(cfg, "KFixed", []) == []


def test_unknown_names_rejected():
    cfg = small_config()
    with pytest.raises(ValueError):
        run_point(cfg, "DPC")
    with pytest.raises(ValueError):
        run_scenario(cfg, "diagonal", [4])


def test_write_ber_csv(tmp_path):
    cfg = small_config()
    points = [
        BerPoint("ZF", 16, 4, "Contaminated", 37, 512, 37 / 512, 8),
        BerPoint("MF", 16, 4, "Contaminated", 90, 512, 90 / 512, 8),
    ]
    path = tmp_path / "ber.csv"
    write_ber_csv(path, points, "k_fixed", cfg, header_comment="run meta")
    lines = path.read_text().splitlines()
    assert lines[0] == "# run meta"
    assert lines[1] == ",".join(BER_CSV_COLUMNS)
    first = lines[2].split(",")
    assert first[:5] == ["ZF", "KFixed", "Contaminated", "16", "4"]
    assert first[6:8] == ["512", "37"]
    assert len(lines) == 4


def test_floor_table_shape_and_replay():
    cfg = small_config(num_cells=4, num_drops=5)
    rows = floor_table(cfg)
    assert len(rows) == 4 * 4
    assert [(c, u) for c, u, *_ in rows] == [
        (c, u) for c in range(4) for u in range(4)]
    for _, _, exact, simplified, floor in rows:
        assert np.isfinite(exact) and exact > 0
        assert np.isfinite(simplified) and simplified > 0
        assert 0 < floor < 0.5
    assert floor_table(cfg) == rows
