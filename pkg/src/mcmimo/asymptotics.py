"""Infinite-antenna SINR limits under pilot contamination and the BER floor
reference derived from them.

Index conventions match the rest of the package: beta[l, k, j] is the
large-scale gain from BS l to user k of cell j; rho/alpha are (K, L) with
[k, j] the power of user k in cell j. Outputs are (K, L) with [k, l] the
value for user k served by cell l.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm


@dataclass(frozen=True)
class NormFactors:
    """Asymptotic power-normalization factors nu[k, j] > 1/K."""

    nu: np.ndarray


def norm_factors(beta: np.ndarray, rho: np.ndarray) -> NormFactors:
    """nu[k, j] = sum_i rho[k, i] * beta[j, k, i] + 1/K."""
    beta = np.asarray(beta, dtype=float)
    rho = np.asarray(rho, dtype=float)
    K = beta.shape[1]
    nu = np.einsum("ki,jki->kj", rho, beta) + 1.0 / K
    return NormFactors(nu=nu)


def ultimate_sinr(beta: np.ndarray, alpha: np.ndarray,
                  rho: np.ndarray) -> np.ndarray:
    """Limiting SINR of user k in cell l as the antenna count grows without
    bound, with matched filtering on contaminated estimates.

    SINR[k, l] = (alpha[k,l] beta[l,k,l]^2 / nu[k,l]^2)
                 / sum_{j != l} alpha[k,j] beta[j,k,l]^2 / nu[k,j]^2.

    A single cell has no contaminating interference: the result is +inf per
    user (the no-interference marker), not an error.
    """
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    rho = np.asarray(rho, dtype=float)
    L, K = beta.shape[0], beta.shape[1]
    nu = norm_factors(beta, rho).nu  # (K, L)
    # terms[k, j, l] = alpha[k, j] * beta[j, k, l]^2 / nu[k, j]^2
    terms = alpha[:, :, None] * beta.transpose(1, 0, 2) ** 2 / (nu ** 2)[:, :, None]
    own = terms[:, np.arange(L), np.arange(L)]          # (K, L)
    # mask the serving cell out instead of subtracting it afterwards: the
    # subtraction cancels catastrophically when the own term dominates
    masked = terms.copy()
    masked[:, np.arange(L), np.arange(L)] = 0.0
    cross = masked.sum(axis=1)                          # sum over j != l
    with np.errstate(divide="ignore"):
        out = np.where(cross > 0, own / np.where(cross > 0, cross, 1.0), np.inf)
    return out


def ultimate_sinr_simplified(beta: np.ndarray) -> np.ndarray:
    """Equal-power limiting SINR: beta[l,k,l]^2 / sum_{j != l} beta[j,k,l]^2.

    Scale-invariant in beta; +inf where no cross gain exists (L = 1 included).
    """
    beta = np.asarray(beta, dtype=float)
    L = beta.shape[0]
    sq = beta.transpose(1, 0, 2) ** 2                   # (K, j, l)
    own = sq[:, np.arange(L), np.arange(L)]
    masked = sq.copy()
    masked[:, np.arange(L), np.arange(L)] = 0.0
    cross = masked.sum(axis=1)
    with np.errstate(divide="ignore"):
        return np.where(cross > 0, own / np.where(cross > 0, cross, 1.0), np.inf)


def ber_floor(sinr, M: int):
    """Square M-QAM AWGN bit error rate at symbol SNR equal to `sinr`.

    Treats residual interference as Gaussian; for M=4 this is Q(sqrt(SINR)).
    Reference line only, not an exact floor.
    """
    sinr_arr = np.asarray(sinr, dtype=float)
    if np.any(sinr_arr <= 0):
        raise ValueError("sinr must be > 0")
    k = np.log2(M)
    val = 4.0 / k * (1.0 - 1.0 / np.sqrt(M)) \
        * norm.sf(np.sqrt(3.0 * sinr_arr / (M - 1)))
    return float(val) if np.isscalar(sinr) or sinr_arr.ndim == 0 else val


FLOOR_CSV_COLUMNS = ("cell", "user", "sinr_asymptotic", "sinr_simplified",
                     "ber_floor")


def write_floor_csv(path, rows, header_comment: str | None = None) -> None:
    """Rows of (cell, user, sinr_asymptotic, sinr_simplified, ber_floor)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(FLOOR_CSV_COLUMNS)
        for cell, user, s_asym, s_simpl, floor in rows:
            writer.writerow([
                cell, user,
                f"{s_asym:.12g}", f"{s_simpl:.12g}", f"{floor:.12g}",
            ])
