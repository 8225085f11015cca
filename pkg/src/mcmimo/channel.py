"""Small-scale fading blocks and full channel composition.

Array conventions:
  - H has shape (..., L, L, K, N): H[..., l, j] is the K x N small-scale
    matrix between BS l and the K users of cell j, i.i.d. entries with
    Normal(0, 1/2) real and imaginary parts (unit complex variance).
  - G = diag(sqrt(beta[l, :, j])) @ H[l, j] row-scales each user's vector by
    the square root of its large-scale gain.
Leading axes (e.g. a frame batch) broadcast through every operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeMismatch(ValueError):
    """Array shapes disagree with the (L, K, L)/(..., L, L, K, N) conventions."""


def draw_small_scale(rng: np.random.Generator, K: int, N: int,
                     size: tuple = ()) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian block of shape
    (*size, K, N) with E[|h|^2] = 1."""
    shape = (*size, K, N)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return np.sqrt(0.5) * (re + 1j * im)


def compose_full_channel(H: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Scale row k of each H[..., l, j] by sqrt(beta[l, k, j])."""
    beta = np.asarray(beta)
    H = np.asarray(H)
    if beta.ndim != 3 or beta.shape[0] != beta.shape[2]:
        raise ShapeMismatch(f"beta must be (L, K, L), got {beta.shape}")
    L, K, _ = beta.shape
    if H.ndim < 4 or H.shape[-4] != L or H.shape[-3] != L or H.shape[-2] != K:
        raise ShapeMismatch(
            f"H must be (..., {L}, {L}, {K}, N) to match beta {beta.shape}, got {H.shape}")
    amp = np.sqrt(beta.transpose(0, 2, 1))[..., None]  # (L, L, K, 1), [l, j, k]
    return amp * H


@dataclass(frozen=True)
class FadingBlock:
    """One coherence block (or a leading batch of them): the small-scale H
    and the composed full channel G, same shape."""

    H: np.ndarray
    G: np.ndarray


def draw_fading_block(rng: np.random.Generator, beta: np.ndarray, N: int,
                      size: tuple = ()) -> FadingBlock:
    """Draw H for every (BS, cell) pair and compose G against `beta`."""
    L, K, _ = beta.shape
    H = draw_small_scale(rng, K, N, size=(*size, L, L))
    return FadingBlock(H=H, G=compose_full_channel(H, beta))
