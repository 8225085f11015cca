"""Monte-Carlo experiment harness: power control, downlink transmission,
drop/frame orchestration, BER accumulation, CSV output.

Reproducibility: every drop owns a random substream derived from
(seed, domain, N, K, drop index), so results are bit-identical for any
worker count, and all techniques at a point see identical channels, noise,
and payload bits (common random numbers). Error/bit counts are integers and
merge associatively in drop order.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .asymptotics import ber_floor, ultimate_sinr, ultimate_sinr_simplified
from .channel import FadingBlock, ShapeMismatch, draw_fading_block
from .config import (NOISE_VAR_PER_DIM, PRECODER_KINDS, SystemConfig,
                     modulation_spec, resolved_rzf_zeta, validate_config)
from .geometry import build_layout, large_scale_coeffs
from .modem import count_errors, demap, map_bits
from .precoding import (RankDeficient, mf_precoder, mmse_precoder,
                        rzf_precoder, zf_precoder)
from .training import estimate_channel, pilot_matrix

SCENARIOS = ("NEqualsK", "KFixed")

BER_CSV_COLUMNS = ("technique", "scenario", "csi_mode", "N", "K", "snr_dl_db",
                   "bits", "bit_errors", "ber", "drops", "seed")

_SEED_MASK = (1 << 64) - 1
_BER_DOMAIN = 0xB5E  # stream family for BER drops (floor tables replay it)
_MAX_REDRAWS = 100   # rank-deficient drops redrawn at most this many times
_EXTEND_FACTOR = 10  # error-target extension stops at this multiple of num_drops


@dataclass(frozen=True)
class PowerAllocation:
    """Inverting power control: rho[k, j] uplink, alpha[k, j] downlink."""

    rho: np.ndarray
    alpha: np.ndarray


@dataclass(frozen=True)
class BerPoint:
    """One Monte-Carlo BER measurement for (technique, N, K, csi_mode)."""

    technique: str
    N: int
    K: int
    csi_mode: str
    bit_errors: int
    bits: int
    ber: float
    drops: int
    rank_redraws: int = 0


def power_control(beta: np.ndarray, snr_dl_linear: float, snr_ul_linear: float,
                  M: int) -> PowerAllocation:
    """Large-scale inversion so every user hits the target SNRs exactly:
    rho[k, j] = SNR_ul / beta[j, k, j]; alpha[k, j] = SNR_dl log2(M) / beta[j, k, j]."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise ValueError("beta entries must be positive")
    L = beta.shape[0]
    own = beta[np.arange(L), :, np.arange(L)].T  # (K, L), own-link gains
    rho = snr_ul_linear / own
    alpha = snr_dl_linear * np.log2(M) / own
    return PowerAllocation(rho=rho, alpha=alpha)


def _complex_noise(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    return np.sqrt(NOISE_VAR_PER_DIM) * (rng.standard_normal(shape)
                                         + 1j * rng.standard_normal(shape))


def _stack_precoders(precoders) -> np.ndarray:
    if isinstance(precoders, np.ndarray):
        return precoders
    mats = [p if isinstance(p, np.ndarray) else p.P for p in precoders]
    return np.stack(mats, axis=-3)


def _transmit_all(G: np.ndarray, P: np.ndarray, alpha: np.ndarray,
                  x: np.ndarray, rng: np.random.Generator | None) -> np.ndarray:
    """Received samples for every user of every cell, shape (..., L, K).

    r[l, :] = sum_j diag(sqrt(alpha[:, j])) G[j, l] P[j] x[j] + noise: the
    power weight of cell j's contribution at a user is indexed by that
    user's position k in the pilot ordering (the pilot-aligned coupling that
    survives at large N), not by the interfering stream."""
    L, K, N = G.shape[-3], G.shape[-2], G.shape[-1]
    if G.shape[-4] != L:
        raise ShapeMismatch(f"G cell axes disagree: {G.shape}")
    if P.shape[-3:] != (L, N, K):
        raise ShapeMismatch(f"P must be (..., {L}, {N}, {K}), got {P.shape}")
    if x.shape[-2:] != (L, K):
        raise ShapeMismatch(f"x must be (..., {L}, {K}), got {x.shape}")
    if alpha.shape != (K, L):
        raise ShapeMismatch(f"alpha must be ({K}, {L}), got {alpha.shape}")
    t = np.einsum("...jnk,...jk->...jn", P, x, optimize=True)
    contrib = np.einsum("...jlkn,...jn->...jlk", G, t, optimize=True)
    w = np.sqrt(alpha).T[:, None, :]  # (L, 1, K): weight of cell j at user k
    r = (w * contrib).sum(axis=-3)
    if rng is not None:
        r = r + _complex_noise(rng, r.shape)
    return r


def downlink_transmit(block: FadingBlock, precoders, alpha: np.ndarray,
                      x: np.ndarray, rng: np.random.Generator | None = None,
                      cell: int = 0) -> np.ndarray:
    """Samples received by the K users of `cell`:
    r = sum_j diag(sqrt(alpha[:, j])) G_{j,cell} P_j x_j + noise.

    rng=None turns the additive noise off (algebra checks)."""
    P = _stack_precoders(precoders)
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x)
    r_all = _transmit_all(np.asarray(block.G), P, alpha, x, rng)
    return r_all[..., cell, :]


def genie_gains(G: np.ndarray, P: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """True effective gain of each user's own stream, shape (..., L, K):
    entry (l, k) is sqrt(alpha[k, l]) times the k-th diagonal element of
    G_{l,l} P_l."""
    L = G.shape[-3]
    own = G[..., np.arange(L), np.arange(L), :, :]  # (..., L, K, N)
    diag = np.einsum("...lkn,...lnk->...lk", own, P, optimize=True)
    return diag * np.sqrt(alpha).T


# --- drop pipeline ----------------------------------------------------------


def _drop_seed(root: int, N: int, K: int, drop: int,
               retry: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        (root & _SEED_MASK, _BER_DOMAIN, N, K, drop, retry))


def _drop_geometry(cfg: SystemConfig, rng: np.random.Generator):
    """First two draws of every drop: user placement, then shadowed gains.
    Shared with floor_table so floors match a BER run drop-for-drop."""
    placement = build_layout(cfg, rng)
    beta = large_scale_coeffs(placement, cfg, rng)
    return placement, beta


def _technique_precoder(kind: str, H_hat: np.ndarray, cfg: SystemConfig):
    if kind == "MF":
        return mf_precoder(H_hat)
    if kind == "ZF":
        return zf_precoder(H_hat)
    if kind == "RZF":
        return rzf_precoder(H_hat, resolved_rzf_zeta(cfg))
    if kind == "MMSE":
        return mmse_precoder(H_hat, cfg.users_per_cell, NOISE_VAR_PER_DIM,
                             cfg.snr_dl_linear, cfg.modulation_order)
    raise ValueError(f"unknown technique {kind!r}")


def _run_drop(cfg: SystemConfig, techniques: tuple[str, ...], drop: int,
              root: int) -> tuple[list[tuple[int, int]], int]:
    """All techniques on one drop's common draws; returns per-technique
    (bit_errors, bits) and the number of rank-deficiency redraws."""
    L, K, N = cfg.num_cells, cfg.users_per_cell, cfg.bs_antennas
    F = cfg.frames_per_drop
    spec = modulation_spec(cfg.modulation_order)
    b = spec.bits_per_symbol

    for retry in range(_MAX_REDRAWS + 1):
        rng = np.random.default_rng(_drop_seed(root, N, K, drop, retry))
        # fixed draw order: placement, beta, fading, CSI noise per cell,
        # payload bits, downlink noise
        _, beta = _drop_geometry(cfg, rng)
        pa = power_control(beta, cfg.snr_dl_linear, cfg.snr_ul_linear,
                           cfg.modulation_order)
        block = draw_fading_block(rng, beta, N, size=(F,))
        if cfg.csi_mode == "Perfect":
            H_hat = block.H[:, np.arange(L), np.arange(L)]
        else:
            pilots = pilot_matrix(K)
            H_hat = np.stack(
                [estimate_channel(block, pilots, cfg.csi_mode, beta, pa.rho,
                                  cell, rng).H_hat for cell in range(L)],
                axis=1)
        bits = rng.integers(0, 2, size=(F, L, K * b))
        dl_noise = _complex_noise(rng, (F, L, K))

        x = map_bits(bits, spec)        # (F, L, K)
        w = np.sqrt(pa.alpha).T[:, None, :]  # (L, 1, K): cell j's weight at user k
        try:
            results = []
            for kind in techniques:
                pre = _technique_precoder(kind, H_hat, cfg)  # P: (F, L, N, K)
                t = np.einsum("flnk,flk->fln", pre.P, x, optimize=True)
                contrib = np.einsum("fjlkn,fjn->fjlk", block.G, t,
                                    optimize=True)
                r = (w * contrib).sum(axis=1) + dl_noise
                gain = genie_gains(block.G, pre.P, pa.alpha)
                rx = demap(r, gain, spec)
                results.append(count_errors(bits, rx))
            return results, retry
        except RankDeficient:
            continue
    raise RankDeficient(
        f"drop {drop}: Gram still singular after {_MAX_REDRAWS} redraws")


def _drop_worker(args) -> tuple[list[tuple[int, int]], int]:
    return _run_drop(*args)


def _map_drops(cfg, techniques, drops, root, workers):
    args = [(cfg, techniques, d, root) for d in drops]
    if workers <= 1 or len(args) <= 1:
        return [_drop_worker(a) for a in args]
    chunk = max(1, len(args) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_drop_worker, args, chunksize=chunk))


def _root_seed(cfg: SystemConfig, rng) -> int:
    if rng is None:
        return int(cfg.rng_seed)
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 1 << 63))
    raise TypeError(f"rng must be None, an int seed, or a Generator, got {type(rng)}")


def _canonical_techniques(techniques) -> tuple[str, ...]:
    if isinstance(techniques, str):
        techniques = [techniques]
    out = []
    for t in techniques:
        for kind in PRECODER_KINDS:
            if str(t).upper() == kind:
                out.append(kind)
                break
        else:
            raise ValueError(f"unknown technique {t!r}, expected one of {PRECODER_KINDS}")
    return tuple(out)


def run_techniques(cfg: SystemConfig, techniques, N=None, rng=None,
                   workers: int = 1) -> list[BerPoint]:
    """All listed techniques at one sweep point on common random draws.

    Runs num_drops drops, then keeps extending in num_drops/4 chunks until
    every technique has accumulated min_bit_errors (0 disables the target),
    up to 10x num_drops total.
    """
    if N is not None and int(N) != cfg.bs_antennas:
        cfg = replace(cfg, bs_antennas=int(N))
    cfg = validate_config(cfg)
    techniques = _canonical_techniques(techniques)
    root = _root_seed(cfg, rng)

    errors = [0] * len(techniques)
    bits = [0] * len(techniques)
    redraws = 0
    drops_done = 0
    target = cfg.num_drops
    cap = _EXTEND_FACTOR * cfg.num_drops
    while True:
        batch = range(drops_done, target)
        for per_tech, retry in _map_drops(cfg, techniques, batch, root, workers):
            redraws += retry
            for i, (e, n) in enumerate(per_tech):
                errors[i] += e
                bits[i] += n
        drops_done = target
        if cfg.min_bit_errors == 0 or min(errors) >= cfg.min_bit_errors \
                or drops_done >= cap:
            break
        target = min(cap, drops_done + max(1, cfg.num_drops // 4))

    return [
        BerPoint(technique=t, N=cfg.bs_antennas, K=cfg.users_per_cell,
                 csi_mode=cfg.csi_mode, bit_errors=errors[i], bits=bits[i],
                 ber=errors[i] / bits[i], drops=drops_done,
                 rank_redraws=redraws)
        for i, t in enumerate(techniques)
    ]


def run_point(cfg: SystemConfig, technique: str, N=None, rng=None,
              workers: int = 1) -> BerPoint:
    """One technique at one sweep point; see run_techniques."""
    return run_techniques(cfg, [technique], N=N, rng=rng, workers=workers)[0]


def _canonical_scenario(scenario: str) -> str:
    key = str(scenario).replace("-", "").replace("_", "").lower()
    for s in SCENARIOS:
        if key == s.lower():
            return s
    raise ValueError(f"unknown scenario {scenario!r}, expected one of {SCENARIOS}")


def run_scenario(cfg: SystemConfig, scenario: str, sweep, techniques=None,
                 rng=None, workers: int = 1) -> list[BerPoint]:
    """One BerPoint per (technique, N) over the sweep.

    NEqualsK grows K (and the pilot length) with N; KFixed keeps K from the
    config. Techniques default to the config's precoder_kind.
    """
    scenario = _canonical_scenario(scenario)
    if techniques is None:
        techniques = [cfg.precoder_kind]
    points: list[BerPoint] = []
    for N in sweep:
        K = int(N) if scenario == "NEqualsK" else cfg.users_per_cell
        pcfg = validate_config(
            replace(cfg, bs_antennas=int(N), users_per_cell=K))
        points.extend(run_techniques(pcfg, techniques, rng=rng, workers=workers))
    return points


def write_ber_csv(path, points, scenario: str, cfg: SystemConfig,
                  header_comment: str | None = None) -> None:
    """Shared BER schema:
    technique,scenario,csi_mode,N,K,snr_dl_db,bits,bit_errors,ber,drops,seed."""
    scenario = _canonical_scenario(scenario)
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(BER_CSV_COLUMNS)
        for p in points:
            writer.writerow([
                p.technique, scenario, p.csi_mode, p.N, p.K,
                f"{cfg.snr_dl_db:.12g}", p.bits, p.bit_errors,
                f"{p.ber:.12g}", p.drops, cfg.rng_seed,
            ])


def floor_table(cfg: SystemConfig, num_drops: int | None = None,
                rng=None) -> list[tuple[int, int, float, float, float]]:
    """Geometry-averaged limiting SINRs and the BER floor per (cell, user).

    Replays the BER harness's per-drop placement/gain substreams (same seed
    derivation), so the reference describes exactly the drops a BER run at
    this config saw. The floor column averages the per-drop equal-power-limit
    BER; the exact limit is reported alongside it.
    """
    cfg = validate_config(cfg)
    drops = cfg.num_drops if num_drops is None else int(num_drops)
    root = _root_seed(cfg, rng)
    L, K, N = cfg.num_cells, cfg.users_per_cell, cfg.bs_antennas

    sum_exact = np.zeros((K, L))
    sum_simpl = np.zeros((K, L))
    sum_floor = np.zeros((K, L))
    for drop in range(drops):
        gen = np.random.default_rng(_drop_seed(root, N, K, drop, 0))
        _, beta = _drop_geometry(cfg, gen)
        pa = power_control(beta, cfg.snr_dl_linear, cfg.snr_ul_linear,
                           cfg.modulation_order)
        sum_exact += ultimate_sinr(beta, pa.alpha, pa.rho)
        simpl = ultimate_sinr_simplified(beta)
        sum_simpl += simpl
        sum_floor += ber_floor(simpl, cfg.modulation_order)

    rows = []
    for cell in range(L):
        for user in range(K):
            rows.append((cell, user,
                         float(sum_exact[user, cell] / drops),
                         float(sum_simpl[user, cell] / drops),
                         float(sum_floor[user, cell] / drops)))
    return rows
