"""Square M-QAM bit mapping, coherent genie-gain demapping, error counting.

A symbol carries log2(M) bits: the first half (MSB first) selects the
in-phase amplitude, the second half the quadrature amplitude, each through
the Gray-labeled level table of ModulationSpec. The receiver divides by the
supplied complex gain and slices each dimension independently.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .config import ModulationSpec


class BadLength(ValueError):
    """Bit-stream length incompatible with the modulation or its pair."""


class ZeroGain(ValueError):
    """Coherent demapping is undefined at zero effective gain."""


def _labels_to_bits(labels: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return (labels[..., None] >> shifts) & 1


def _bits_to_labels(bits: np.ndarray, width: int) -> np.ndarray:
    weights = 1 << np.arange(width - 1, -1, -1)
    return np.tensordot(bits, weights, axes=([-1], [0]))


def map_bits(bits, spec: ModulationSpec) -> np.ndarray:
    """Bits (..., n*log2M) to unit-mean-energy symbols (..., n)."""
    bits = np.asarray(bits)
    b = spec.bits_per_symbol
    if bits.shape[-1] % b != 0:
        raise BadLength(
            f"bit count {bits.shape[-1]} not divisible by log2(M)={b}")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0/1")
    half = b // 2
    grouped = bits.reshape(*bits.shape[:-1], -1, b)
    i_lab = _bits_to_labels(grouped[..., :half], half)
    q_lab = _bits_to_labels(grouped[..., half:], half)
    return spec.levels[i_lab] + 1j * spec.levels[q_lab]


def demap(y, gain, spec: ModulationSpec) -> np.ndarray:
    """Minimum-distance decision on y/gain, inverse Gray map, (..., n*log2M) bits.

    Ties resolve to the lowest label index, i.e. the lexicographically
    smaller bit pattern.
    """
    y = np.asarray(y)
    gain = np.asarray(gain)
    if np.any(gain == 0):
        raise ZeroGain("effective gain is zero")
    z = y / gain
    half = spec.bits_per_symbol // 2
    # distance argmin per dimension; levels are indexed by Gray label
    i_lab = np.argmin(np.abs(z.real[..., None] - spec.levels), axis=-1)
    q_lab = np.argmin(np.abs(z.imag[..., None] - spec.levels), axis=-1)
    bits = np.concatenate(
        [_labels_to_bits(i_lab, half), _labels_to_bits(q_lab, half)], axis=-1)
    if bits.ndim == 1:  # single symbol in, its log2(M) bits out
        return bits
    return bits.reshape(*bits.shape[:-2], -1)


def count_errors(tx_bits, rx_bits) -> tuple[int, int]:
    """(Hamming distance, total bits)."""
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise BadLength(f"length mismatch: {tx.size} vs {rx.size}")
    return int(np.count_nonzero(tx != rx)), int(tx.size)


def qam_ber_reference(M: int, es_over_n0: float) -> float:
    """Gray-coded square M-QAM bit error rate on AWGN at symbol SNR Es/N0.

    Nearest-neighbor expression (4/log2M)(1 - 1/sqrt(M)) Q(sqrt(3 EsN0/(M-1)));
    exact for M=4, where it reduces to Q(sqrt(EsN0)).
    """
    k = np.log2(M)
    arg = np.sqrt(3.0 * es_over_n0 / (M - 1))
    return float(4.0 / k * (1.0 - 1.0 / np.sqrt(M)) * norm.sf(arg))
