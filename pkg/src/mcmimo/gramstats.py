"""Channel-hardening statistics of the normalized Gram matrix Q = (1/N) H Hᴴ.

Empirical moments of the diagonal and off-diagonal entries are pooled over
Monte-Carlo trials and reported next to their closed forms, each with a
3-sigma CLT confidence half-width so the Monte-Carlo error is quantified.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np

# Statistic labels used in CSV rows, in output order.
GRAM_STATISTICS = (
    "mean_diag",
    "mean_diag_sq",
    "var_diag",
    "mean_offdiag_re",
    "mean_offdiag_im",
    "mean_offdiag_sqmag",
)

GRAM_CSV_COLUMNS = ("N", "statistic", "empirical", "closed_form", "ci3sigma")


def gram_matrix(H: np.ndarray) -> np.ndarray:
    """(1/N) H Hᴴ for H of shape (..., K, N).

    Hermitian by construction: the strict lower triangle is the conjugate
    of the upper, and the diagonal is assembled from |h|² sums, so it is
    exactly real and nonnegative regardless of BLAS internals.
    """
    H = np.asarray(H)
    K, N = H.shape[-2], H.shape[-1]
    Q = np.matmul(H, np.conjugate(np.swapaxes(H, -1, -2))) / N
    iu, ju = np.triu_indices(K, k=1)
    Q[..., ju, iu] = np.conjugate(Q[..., iu, ju])
    kk = np.arange(K)
    diag = np.einsum("...kn,...kn->...k", H.real, H.real) \
        + np.einsum("...kn,...kn->...k", H.imag, H.imag)
    Q[..., kk, kk] = diag / N
    return Q


def closed_form_moments(N: int) -> tuple[float, float, float, float, float, float]:
    """(E_qii, E_qii_sq, E_qij, E_qij_sqmag, var_qii, var_qij) for i.i.d.
    unit-variance complex Gaussian rows."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return (1.0, (N + 1) / N, 0.0, 1.0 / N, 1.0 / N, 1.0 / N)


@dataclass(frozen=True)
class GramStats:
    """Pooled empirical Gram-entry moments with per-statistic 3σ half-widths."""

    N: int
    K: int
    trials: int
    mean_diag: float
    mean_diag_sq: float
    var_diag: float
    mean_offdiag: complex
    mean_offdiag_sqmag: float
    ci_halfwidth: Mapping[str, float]

    def empirical(self, statistic: str) -> float:
        if statistic == "mean_offdiag_re":
            return float(np.real(self.mean_offdiag))
        if statistic == "mean_offdiag_im":
            return float(np.imag(self.mean_offdiag))
        return float(getattr(self, statistic))

    def closed_form(self, statistic: str) -> float:
        e_qii, e_qii_sq, e_qij, e_qij_sqmag, var_qii, _ = closed_form_moments(self.N)
        return {
            "mean_diag": e_qii,
            "mean_diag_sq": e_qii_sq,
            "var_diag": var_qii,
            "mean_offdiag_re": e_qij,
            "mean_offdiag_im": e_qij,
            "mean_offdiag_sqmag": e_qij_sqmag,
        }[statistic]


def _ci3(samples: np.ndarray) -> float:
    """3 sigma / sqrt(n) half-width from the sample std of `samples`."""
    n = samples.size
    if n < 2:
        return float("inf")
    return float(3.0 * np.std(samples, ddof=1) / np.sqrt(n))


def estimate_gram_moments(N: int, K: int, trials: int, rng: np.random.Generator,
                          chunk: int = 2048) -> GramStats:
    """Monte-Carlo Gram moments over `trials` independent K×N blocks.

    Diagonal entries pool over trials*K samples; off-diagonal entries pool
    over ordered pairs i<j only (q_ji is the conjugate of q_ij, so mirrored
    pairs carry no new information and would shrink the CI spuriously).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    from .channel import draw_small_scale

    iu, ju = np.triu_indices(K, k=1)
    diag_parts: list[np.ndarray] = []
    off_parts: list[np.ndarray] = []
    done = 0
    while done < trials:
        batch = min(chunk, trials - done)
        H = draw_small_scale(rng, K, N, size=(batch,))
        Q = gram_matrix(H)
        kk = np.arange(K)
        diag_parts.append(np.ascontiguousarray(Q[:, kk, kk].real))
        if iu.size:
            off_parts.append(np.ascontiguousarray(Q[:, iu, ju]))
        done += batch

    diag = np.concatenate(diag_parts).ravel()
    mean_diag = float(np.mean(diag))
    diag_sq = diag * diag
    mean_diag_sq = float(np.mean(diag_sq))
    centered_sq = (diag - mean_diag) ** 2
    var_diag = float(np.var(diag, ddof=1))

    ci: dict[str, float] = {
        "mean_diag": _ci3(diag),
        "mean_diag_sq": _ci3(diag_sq),
        "var_diag": _ci3(centered_sq),
    }

    if off_parts:
        off = np.concatenate(off_parts).ravel()
        mean_offdiag = complex(np.mean(off))
        sqmag = np.abs(off) ** 2
        mean_offdiag_sqmag = float(np.mean(sqmag))
        ci["mean_offdiag_re"] = _ci3(off.real)
        ci["mean_offdiag_im"] = _ci3(off.imag)
        ci["mean_offdiag_sqmag"] = _ci3(sqmag)
    else:  # K == 1: no off-diagonal entries exist
        mean_offdiag = complex("nan")
        mean_offdiag_sqmag = float("nan")
        ci["mean_offdiag_re"] = float("nan")
        ci["mean_offdiag_im"] = float("nan")
        ci["mean_offdiag_sqmag"] = float("nan")

    return GramStats(
        N=N, K=K, trials=trials,
        mean_diag=mean_diag,
        mean_diag_sq=mean_diag_sq,
        var_diag=var_diag,
        mean_offdiag=mean_offdiag,
        mean_offdiag_sqmag=mean_offdiag_sqmag,
        ci_halfwidth=ci,
    )


def write_gram_csv(path, stats_list, header_comment: str | None = None) -> None:
    """One row per (N, statistic): N, statistic, empirical, closed_form, ci3sigma."""
    if isinstance(stats_list, GramStats):
        stats_list = [stats_list]
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(GRAM_CSV_COLUMNS)
        for st in stats_list:
            for name in GRAM_STATISTICS:
                writer.writerow([
                    st.N, name,
                    f"{st.empirical(name):.12g}",
                    f"{st.closed_form(name):.12g}",
                    f"{st.ci_halfwidth[name]:.12g}",
                ])
