"""Linear downlink precoders: MF, ZF, RZF, MMSE-regularized.

Every kind shares one power normalization: with B the unnormalized matrix,
gamma = trace(B^H B)/K and P = B/sqrt(gamma), so trace(P^H P) = K always.
For MF this gives gamma = trace(H_hat^H H_hat)/K and for ZF
gamma = trace((H_hat H_hat^H)^{-1})/K, matching the per-kind definitions.

Inputs may carry leading batch axes: H_hat (..., K, N) -> P (..., N, K).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_TOL = 1e-12  # relative singular-value cutoff for the K x K Gram


class PrecodingError(ValueError):
    pass


class ZeroChannel(PrecodingError):
    """All-zero channel estimate: no direction to precode along."""


class RankDeficient(PrecodingError):
    """Gram matrix singular at zero regularization."""


@dataclass(frozen=True)
class Precoder:
    """Normalized precoding matrix with its power factor.

    P: (..., N, K); gamma: scalar or (...) batch; zeta set for RZF/MMSE.
    """

    P: np.ndarray
    gamma: np.ndarray | float
    kind: str
    zeta: float | None = None


def _conj_t(A: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(A, -1, -2))


def mf_precoder(H_hat: np.ndarray) -> Precoder:
    """Matched filter: P = H_hat^H / sqrt(gamma), gamma = ||H_hat||_F^2 / K."""
    H_hat = np.asarray(H_hat)
    K = H_hat.shape[-2]
    gamma = np.sum(np.abs(H_hat) ** 2, axis=(-2, -1)) / K
    if np.any(gamma == 0):
        raise ZeroChannel("channel estimate has zero Frobenius norm")
    P = _conj_t(H_hat) / np.sqrt(gamma)[..., None, None]
    return Precoder(P=P, gamma=gamma if gamma.ndim else float(gamma), kind="MF")


def _gram_eig(H_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    W = np.matmul(H_hat, _conj_t(H_hat))
    lam, U = np.linalg.eigh(W)  # ascending eigenvalues, W = U diag(lam) U^H
    return lam, U


def _regularized(H_hat: np.ndarray, zeta: float, kind: str) -> Precoder:
    H_hat = np.asarray(H_hat)
    lam, U = _gram_eig(H_hat)
    lam_max = lam[..., -1]
    if zeta == 0.0:
        if np.any(lam_max <= 0) or np.any(lam[..., 0] < RANK_TOL * lam_max):
            raise RankDeficient(
                "Gram matrix singular (relative eigenvalue below tolerance)")
        inv = 1.0 / lam
        gamma = np.sum(inv, axis=-1) / H_hat.shape[-2]
    else:
        if np.any(lam_max <= 0):
            raise ZeroChannel("channel estimate has zero Frobenius norm")
        shifted = lam + zeta
        inv = 1.0 / shifted
        # trace(B^H B) = sum_k lam_k/(lam_k + zeta)^2
        gamma = np.sum(lam * inv * inv, axis=-1) / H_hat.shape[-2]
    # B = H_hat^H U diag(inv) U^H
    B = np.matmul(np.matmul(_conj_t(H_hat), U * inv[..., None, :]), _conj_t(U))
    P = B / np.sqrt(gamma)[..., None, None]
    return Precoder(P=P, gamma=gamma if gamma.ndim else float(gamma),
                    kind=kind, zeta=zeta)


def zf_precoder(H_hat: np.ndarray) -> Precoder:
    """Zero forcing: P = H_hat^H (H_hat H_hat^H)^{-1} / sqrt(gamma); satisfies
    H_hat P = I/sqrt(gamma) on full-rank inputs."""
    p = _regularized(H_hat, 0.0, "ZF")
    return Precoder(P=p.P, gamma=p.gamma, kind="ZF")


def rzf_precoder(H_hat: np.ndarray, zeta: float) -> Precoder:
    """Regularized ZF: P = H_hat^H (H_hat H_hat^H + zeta I)^{-1} / sqrt(gamma).

    zeta = 0 reduces to ZF (same rank condition); zeta -> infinity turns the
    direction into the matched filter's.
    """
    if zeta < 0:
        raise ValueError(f"zeta must be >= 0, got {zeta}")
    return _regularized(H_hat, float(zeta), "RZF")


def zeta_mmse(K: int, sigma_n_sq: float, snr_dl_linear: float, M: int) -> float:
    """Regularizer K*sigma_n^2 / (2 * SNR_dl * log2(M)), SNR in linear scale."""
    if snr_dl_linear <= 0:
        raise ValueError(f"snr_dl_linear must be > 0, got {snr_dl_linear}")
    return K * sigma_n_sq / (2.0 * snr_dl_linear * np.log2(M))


def mmse_precoder(H_hat: np.ndarray, K: int, sigma_n_sq: float,
                  snr_dl_linear: float, M: int) -> Precoder:
    """RZF at the MMSE-optimal regularizer for the configured load and SNR."""
    zeta = zeta_mmse(K, sigma_n_sq, snr_dl_linear, M)
    p = _regularized(H_hat, zeta, "MMSE")
    return Precoder(P=p.P, gamma=p.gamma, kind="MMSE", zeta=zeta)
