"""Small-scale fading statistics and full-channel composition."""

import numpy as np
import pytest

from mcmimo.channel import (FadingBlock, ShapeMismatch, compose_full_channel,
                            draw_fading_block, draw_small_scale)


def test_entry_moments():
    rng = np.random.default_rng(42)
    h = draw_small_scale(rng, 1000, 1000).ravel()
    # E|h|^2 = 1 (std of mean 0.001), E h = 0, E|h|^4 = 2 (std ~ 0.002)
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.005
    assert abs(np.mean(h.real)) < 0.005
    assert abs(np.mean(h.imag)) < 0.005
    assert abs(np.mean(np.abs(h) ** 4) - 2.0) < 0.02


def test_per_dimension_variance():
    rng = np.random.default_rng(1)
    h = draw_small_scale(rng, 500, 500).ravel()
    assert abs(np.var(h.real) - 0.5) < 0.01
    assert abs(np.var(h.imag) - 0.5) < 0.01


def test_leading_batch_shape():
    rng = np.random.default_rng(0)
    h = draw_small_scale(rng, 3, 5, size=(7, 2))
    assert h.shape == (7, 2, 3, 5)


def test_compose_identity_and_row_scaling():
    L, K, N = 2, 3, 4
    rng = np.random.default_rng(2)
    H = draw_small_scale(rng, K, N, size=(L, L))
    ones = np.ones((L, K, L))
    np.testing.assert_array_equal(compose_full_channel(H, ones), H)

    beta = np.ones((L, K, L))
    beta[0, 1, 1] = 4.0  # BS 0, user 1 of cell 1
    G = compose_full_channel(H, beta)
    np.testing.assert_allclose(G[0, 1, 1], 2.0 * H[0, 1, 1], rtol=1e-15)
    np.testing.assert_array_equal(G[1], H[1])


def test_row_energy_scales_with_beta():
    # E||g||^2 = N * beta; 1e4 draws give std of mean = beta*N*sqrt(1/(N*1e4))
    K, N, draws = 1, 16, 10_000
    beta = np.full((1, K, 1), 2.5)
    rng = np.random.default_rng(3)
    H = draw_small_scale(rng, K, N, size=(draws, 1, 1))
    G = compose_full_channel(H, beta)
    energy = np.sum(np.abs(G[:, 0, 0, 0]) ** 2, axis=-1)
    bound = 3.0 * 2.5 * N / np.sqrt(N * draws)
    assert abs(np.mean(energy) - N * 2.5) < bound


def test_shape_mismatch():
    rng = np.random.default_rng(4)
    H = draw_small_scale(rng, 3, 5, size=(2, 2))
    with pytest.raises(ShapeMismatch):
        compose_full_channel(H, np.ones((2, 3, 3)))  # beta not (L, K, L)
    with pytest.raises(ShapeMismatch):
        compose_full_channel(H, np.ones((2, 4, 2)))  # K disagrees
    with pytest.raises(ShapeMismatch):
        compose_full_channel(H[0], np.ones((2, 3, 2)))  # missing cell axes


def test_draw_fading_block():
    rng = np.random.default_rng(5)
    beta = np.full((2, 3, 2), 0.25)
    block = draw_fading_block(rng, beta, N=8, size=(6,))
    assert isinstance(block, FadingBlock)
    assert block.H.shape == (6, 2, 2, 3, 8)
    assert block.G.shape == block.H.shape
    np.testing.assert_allclose(block.G, 0.5 * block.H, rtol=1e-15)
