"""Uplink training: pilot construction, reception, correlation, CSI modes.

All cells reuse the same K orthogonal length-K pilots, transmitted
synchronously (worst case for contamination). The correlator divides by K,
which requires Psi @ Psi^H = K I; the DFT matrix satisfies that with
unit-modulus entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import FadingBlock, ShapeMismatch
from .config import CSI_MODES


@dataclass(frozen=True)
class PilotSet:
    """Rows of Psi are the per-user pilot sequences."""

    Psi: np.ndarray

    @property
    def K(self) -> int:
        return self.Psi.shape[0]


def pilot_matrix(K: int) -> PilotSet:
    """K x K DFT pilots: entry (m, k) = exp(-2*pi*i*m*k/K)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    m = np.arange(K)
    Psi = np.exp(-2j * np.pi * np.outer(m, m) / K)
    Psi.flags.writeable = False
    return PilotSet(Psi=Psi)


def _training_noise(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    # unit complex variance: 1/2 per real dimension
    return np.sqrt(0.5) * (rng.standard_normal(shape)
                           + 1j * rng.standard_normal(shape))


def uplink_training(block: FadingBlock, rho: np.ndarray, pilots: PilotSet,
                    cell: int, rng: np.random.Generator | None = None,
                    cells: Sequence[int] | None = None) -> np.ndarray:
    """Received pilot-phase signal at BS `cell`, shape (..., N, K).

    Y = sum_j G_{cell,j}^T diag(sqrt(rho[:, j])) Psi + noise. `cells`
    restricts the transmitting cells (used to synthesize the
    contamination-free counterfactual); rng=None turns noise off.
    """
    G = np.asarray(block.G)
    rho = np.asarray(rho, dtype=float)
    if G.ndim < 4:
        raise ShapeMismatch(f"G must be (..., L, L, K, N), got {G.shape}")
    L, K = G.shape[-3], G.shape[-2]
    if G.shape[-4] != L:
        raise ShapeMismatch(f"G cell axes disagree: {G.shape}")
    if rho.shape != (K, L):
        raise ShapeMismatch(f"rho must be ({K}, {L}), got {rho.shape}")
    if pilots.Psi.shape != (K, K):
        raise ShapeMismatch(f"pilots must be ({K}, {K}), got {pilots.Psi.shape}")
    if not 0 <= cell < L:
        raise ShapeMismatch(f"cell index {cell} out of range for L={L}")

    Gl = G[..., cell, :, :, :]  # (..., L, K, N), axis -3 indexes source cell j
    amp = np.sqrt(rho)          # (K, L)
    if cells is not None:
        idx = list(cells)
        Gl = Gl[..., idx, :, :]
        amp = amp[:, idx]
    # Y[..., n, m] = sum_{j,k} G[..., j, k, n] * sqrt(rho[k, j]) * Psi[k, m]
    Y = np.einsum("...jkn,kj,km->...nm", Gl, amp, pilots.Psi, optimize=True)
    if rng is not None:
        Y = Y + _training_noise(rng, Y.shape)
    return Y


def correlate(Y: np.ndarray, pilots: PilotSet) -> np.ndarray:
    """Pilot correlator: G_hat^T = (1/K) Y Psi^H, returned as G_hat (..., K, N)."""
    K = pilots.K
    if Y.shape[-1] != K:
        raise ShapeMismatch(f"Y must be (..., N, {K}), got {Y.shape}")
    Gt = np.matmul(Y, np.conjugate(pilots.Psi).T) / K  # (..., N, K)
    return np.swapaxes(Gt, -1, -2)


@dataclass(frozen=True)
class ChannelEstimate:
    """Correlator output G_hat and the rescaled H_hat used by the precoders."""

    G_hat: np.ndarray
    H_hat: np.ndarray
    mode: str


def estimate_channel(block, pilots: PilotSet, mode: str, beta: np.ndarray,
                     rho: np.ndarray, cell: int,
                     rng: np.random.Generator | None = None) -> ChannelEstimate:
    """CSI at BS `cell` under the given fidelity mode.

    Trained modes rescale row k of G_hat by 1/sqrt(rho[k, cell] *
    beta[cell, k, cell]) so that with one cell and no noise H_hat equals H
    exactly; this keeps the regularizer formulas on the unit-variance scale.
    `block` may be a FadingBlock; a raw received matrix Y (..., N, K) is
    accepted for the trained modes.
    """
    if mode not in CSI_MODES:
        raise ValueError(f"unknown csi mode {mode!r}, expected one of {CSI_MODES}")
    beta = np.asarray(beta, dtype=float)
    rho = np.asarray(rho, dtype=float)

    if mode == "Perfect":
        if not isinstance(block, FadingBlock):
            raise ShapeMismatch("Perfect mode needs the FadingBlock, not Y")
        H_own = block.H[..., cell, cell, :, :]
        return ChannelEstimate(G_hat=block.G[..., cell, cell, :, :],
                               H_hat=H_own, mode=mode)

    if isinstance(block, FadingBlock):
        cells = [cell] if mode == "NoisyNoContamination" else None
        Y = uplink_training(block, rho, pilots, cell, rng=rng, cells=cells)
    else:
        Y = np.asarray(block)
    G_hat = correlate(Y, pilots)
    K = G_hat.shape[-2]
    if beta.shape[1] != K or rho.shape[0] != K:
        raise ShapeMismatch(
            f"beta {beta.shape} / rho {rho.shape} disagree with K={K}")
    scale = np.sqrt(rho[:, cell] * beta[cell, :, cell])  # (K,)
    H_hat = G_hat / scale[:, None]
    return ChannelEstimate(G_hat=G_hat, H_hat=H_hat, mode=mode)
