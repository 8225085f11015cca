"""Scenario configuration and modulation bookkeeping.

Everything downstream (geometry, training, precoding, the Monte-Carlo harness)
consumes a validated, immutable SystemConfig. Validation happens once, up
front; after that the config is safe to share across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np


class ConfigError(ValueError):
    """A scenario parameter is missing, malformed, or inconsistent."""


class Underdetermined(ConfigError):
    """More users than BS antennas: the spatial system cannot be determined."""


class BadModulation(ConfigError):
    """Modulation order does not describe a square Gray-mappable QAM."""


class BadGeometry(ConfigError):
    """Cell-layout parameters are inconsistent."""


CSI_MODES = ("Perfect", "NoisyNoContamination", "Contaminated")
PRECODER_KINDS = ("MF", "ZF", "RZF", "MMSE")

# Downlink noise is circularly-symmetric with variance 1/2 per real dimension
# (unit complex variance). Fixed by the model, deliberately not configurable.
NOISE_VAR_PER_DIM = 0.5

RZF_AUTO = "auto"  # sentinel: ridge resolves to N/20 for the point's N


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters. Defaults reproduce the reference layout:
    4 hexagonal cells of radius 1600 m, 4 users each, 100 m exclusion,
    path-loss exponent 3.8, 8 dB log-normal shadowing, 4-QAM, 10 dB SNR
    targets on both links."""

    num_cells: int = 4            # L
    users_per_cell: int = 4       # K
    bs_antennas: int = 64         # N
    modulation_order: int = 4     # M, square QAM
    snr_dl_db: float = 10.0
    snr_ul_db: float = 10.0
    cell_radius_m: float = 1600.0
    exclusion_radius_m: float = 100.0
    pathloss_exponent: float = 3.8
    shadowing_sigma_db: float = 8.0
    csi_mode: str = "Perfect"
    precoder_kind: str = "ZF"
    rzf_zeta: float | str = RZF_AUTO
    frames_per_drop: int = 10
    num_drops: int = 500
    min_bit_errors: int = 200
    rng_seed: int = 1

    @property
    def snr_dl_linear(self) -> float:
        return db_to_linear(self.snr_dl_db)

    @property
    def snr_ul_linear(self) -> float:
        return db_to_linear(self.snr_ul_db)

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.modulation_order)))


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def _canonical_choice(value, choices, what):
    for c in choices:
        if str(value).lower() == c.lower():
            return c
    raise ConfigError(f"{what} must be one of {choices}, got {value!r}")


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every invariant and return the canonicalized config.

    Idempotent: validating an already-validated config returns an equal value.
    The only rewrites are canonicalizing enum spellings and numeric strings.
    The 'auto' ridge stays symbolic so that antenna sweeps re-resolve it per
    point; resolved_rzf_zeta() materializes it.
    """
    for name in ("num_cells", "users_per_cell", "bs_antennas",
                 "frames_per_drop", "num_drops"):
        v = getattr(cfg, name)
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
    if not isinstance(cfg.min_bit_errors, (int, np.integer)) or cfg.min_bit_errors < 0:
        raise ConfigError(f"min_bit_errors must be an integer >= 0, got {cfg.min_bit_errors!r}")
    if not isinstance(cfg.rng_seed, (int, np.integer)) or isinstance(cfg.rng_seed, bool):
        raise ConfigError(f"rng_seed must be an integer, got {cfg.rng_seed!r}")

    if cfg.bs_antennas < cfg.users_per_cell:
        raise Underdetermined(
            f"bs_antennas={cfg.bs_antennas} < users_per_cell={cfg.users_per_cell}; "
            "the downlink needs N >= K")

    _check_modulation_order(cfg.modulation_order)

    if cfg.cell_radius_m <= 0:
        raise BadGeometry(f"cell_radius_m must be positive, got {cfg.cell_radius_m}")
    if not 0 <= cfg.exclusion_radius_m < cfg.cell_radius_m:
        raise BadGeometry(
            f"exclusion_radius_m={cfg.exclusion_radius_m} must satisfy "
            f"0 <= exclusion < cell_radius_m={cfg.cell_radius_m}")
    if cfg.pathloss_exponent <= 0:
        raise BadGeometry(f"pathloss_exponent must be positive, got {cfg.pathloss_exponent}")
    if cfg.shadowing_sigma_db < 0:
        raise BadGeometry(f"shadowing_sigma_db must be >= 0, got {cfg.shadowing_sigma_db}")

    csi = _canonical_choice(cfg.csi_mode, CSI_MODES, "csi_mode")
    kind = _canonical_choice(cfg.precoder_kind, PRECODER_KINDS, "precoder_kind")

    zeta = cfg.rzf_zeta
    if isinstance(zeta, str):
        if zeta.lower() == RZF_AUTO:
            zeta = RZF_AUTO
        else:
            try:
                zeta = float(zeta)
            except ValueError:
                raise ConfigError(f"rzf_zeta must be a nonnegative real or 'auto', got {zeta!r}")
    if not isinstance(zeta, str):
        zeta = float(zeta)
        if not math.isfinite(zeta) or zeta < 0:
            raise ConfigError(f"rzf_zeta must be a finite nonnegative real, got {zeta!r}")

    return replace(cfg, csi_mode=csi, precoder_kind=kind, rzf_zeta=zeta,
                   rng_seed=int(cfg.rng_seed))


def resolved_rzf_zeta(cfg: SystemConfig) -> float:
    """The RZF ridge for this config: N/20 under 'auto', else the set value."""
    if isinstance(cfg.rzf_zeta, str):
        return cfg.bs_antennas / 20.0
    return float(cfg.rzf_zeta)


def _check_modulation_order(M) -> int:
    """Square Gray-mappable QAM: M = 4**m, i.e. a perfect square whose side
    is a power of two (each I/Q dimension carries an integer number of bits)."""
    if not isinstance(M, (int, np.integer)) or isinstance(M, bool):
        raise BadModulation(f"modulation_order must be an integer, got {M!r}")
    if M < 4:
        raise BadModulation(f"modulation_order must be >= 4, got {M}")
    side = math.isqrt(int(M))
    if side * side != M:
        raise BadModulation(f"modulation_order must be a perfect square, got {M}")
    if side & (side - 1):
        raise BadModulation(
            f"modulation_order must be 4**m for per-dimension Gray labeling, got {M}")
    return side


@dataclass(frozen=True)
class ModulationSpec:
    """Square M-QAM with unit mean symbol energy.

    levels[g] is the per-dimension amplitude whose Gray label is g; adjacent
    amplitudes differ in exactly one label bit. amplitude_step is the spacing
    between adjacent levels.
    """

    order: int
    amplitude_step: float
    bits_per_symbol: int
    levels: np.ndarray

    def constellation(self) -> np.ndarray:
        """All M points, indexed by [i_label, q_label]."""
        return self.levels[:, None] + 1j * self.levels[None, :]


def modulation_spec(M: int) -> ModulationSpec:
    side = _check_modulation_order(M)
    a = math.sqrt(6.0 / (M - 1))
    # amplitudes descend from +(side-1)a/2 so the all-zeros label lands on the
    # positive side; label sequence gray(i) = i ^ (i >> 1) along that order
    levels = np.empty(side)
    for i in range(side):
        levels[i ^ (i >> 1)] = (side - 1 - 2 * i) * a / 2.0
    levels.flags.writeable = False
    return ModulationSpec(order=int(M), amplitude_step=a,
                          bits_per_symbol=int(round(math.log2(M))), levels=levels)


# --- config file / mapping plumbing ---------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(SystemConfig)}
_INT_FIELDS = {"num_cells", "users_per_cell", "bs_antennas", "modulation_order",
               "frames_per_drop", "num_drops", "min_bit_errors", "rng_seed"}
_FLOAT_FIELDS = {"snr_dl_db", "snr_ul_db", "cell_radius_m", "exclusion_radius_m",
                 "pathloss_exponent", "shadowing_sigma_db"}
_STR_FIELDS = {"csi_mode", "precoder_kind"}


def _coerce(key: str, raw: str):
    if key in _INT_FIELDS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {raw!r}")
    if key in _FLOAT_FIELDS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} expects a number, got {raw!r}")
    if key == "rzf_zeta":
        return raw if raw.lower() == RZF_AUTO else float(raw)
    if key in _STR_FIELDS:
        return raw
    raise ConfigError(f"unknown config key {key!r}")


def load_config_file(path) -> dict:
    """Parse a flat `key = value` UTF-8 file; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = _coerce(key, raw)
    return out


def config_from_mapping(mapping: dict, base: SystemConfig | None = None) -> SystemConfig:
    """Overlay `mapping` onto `base` (or the defaults) and validate."""
    cfg = base if base is not None else SystemConfig()
    unknown = set(mapping) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return validate_config(replace(cfg, **mapping))
