"""Hexagonal cell layout, uniform user placement, and large-scale gains.

Conventions used throughout the package:
  - positions are 2-D points in meters;
  - beta is an (L, K, L) array, beta[l, k, j] = power gain between BS l and
    user k of cell j (dimensionless, path loss x shadowing).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


class DegenerateDistance(ValueError):
    """A user sits exactly on top of a BS; the path-loss law diverges."""


SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Placement:
    """BS centers (L, 2) and user positions (L, K, 2); user_xy[j, k] is user k
    of cell j, guaranteed inside cell j's hexagon and outside the exclusion
    disc of its serving BS."""

    bs_xy: np.ndarray
    user_xy: np.ndarray

    @property
    def num_cells(self) -> int:
        return self.bs_xy.shape[0]

    @property
    def users_per_cell(self) -> int:
        return self.user_xy.shape[1]


def hex_centers(num_cells: int, radius: float) -> np.ndarray:
    """Centers of `num_cells` flat-topped hexagons on a contiguous rhombic
    tiling (2x2 for four cells). Adjacent centers are sqrt(3)*radius apart."""
    a1 = np.array([1.5 * radius, SQRT3 * radius / 2.0])  # east-northeast neighbor
    a2 = np.array([0.0, SQRT3 * radius])                 # north neighbor
    ncols = max(1, math.isqrt(num_cells - 1) + 1) if num_cells > 1 else 1
    centers = np.empty((num_cells, 2))
    for i in range(num_cells):
        col, row = i % ncols, i // ncols
        centers[i] = col * a1 + row * a2
    return centers


def in_hexagon(xy: np.ndarray, radius: float) -> np.ndarray:
    """True where points (..., 2) lie inside the flat-topped hexagon of
    circumradius `radius` centered at the origin (vertices at (+-R, 0))."""
    x = np.abs(xy[..., 0])
    y = np.abs(xy[..., 1])
    return (y <= SQRT3 * radius / 2.0 + 1e-12) & (SQRT3 * x + y <= SQRT3 * radius + 1e-9)


def _sample_in_cell(rng: np.random.Generator, radius: float, exclusion: float,
                    count: int) -> np.ndarray:
    """Rejection-sample `count` points uniform over the hexagon minus the
    exclusion disc, both centered at the origin. Acceptance ratio is ~3/4 of
    the bounding box, so this terminates quickly."""
    out = np.empty((count, 2))
    have = 0
    while have < count:
        need = count - have
        cand = rng.uniform(-1.0, 1.0, size=(2 * need + 8, 2))
        cand[:, 0] *= radius
        cand[:, 1] *= SQRT3 * radius / 2.0
        ok = in_hexagon(cand, radius)
        if exclusion > 0.0:
            ok &= np.hypot(cand[:, 0], cand[:, 1]) >= exclusion
        cand = cand[ok]
        take = min(need, cand.shape[0])
        out[have:have + take] = cand[:take]
        have += take
    return out


def build_layout(cfg: SystemConfig, rng: np.random.Generator) -> Placement:
    """Drop K users uniformly into each of the L hexagonal cells."""
    L, K = cfg.num_cells, cfg.users_per_cell
    centers = hex_centers(L, cfg.cell_radius_m)
    users = np.empty((L, K, 2))
    for j in range(L):
        users[j] = centers[j] + _sample_in_cell(
            rng, cfg.cell_radius_m, cfg.exclusion_radius_m, K)
    return Placement(bs_xy=centers, user_xy=users)


def link_distances(placement: Placement) -> np.ndarray:
    """(L, K, L) distances; [l, k, j] = BS l to user k of cell j."""
    bs = placement.bs_xy[:, None, None, :]             # (L, 1, 1, 2)
    users = placement.user_xy.swapaxes(0, 1)[None]     # (1, K, L, 2)
    return np.linalg.norm(bs - users, axis=-1)


def large_scale_coeffs(placement: Placement, cfg: SystemConfig,
                       rng: np.random.Generator) -> np.ndarray:
    """Large-scale gains beta[l, k, j] = shadowing * (d/d0)^(-exponent).

    Shadowing is log-normal, 10^(X/10) with X ~ Normal(0, sigma_db^2), drawn
    independently per (BS, user) link. The reference distance d0 is the
    exclusion radius (or 1 m when that is zero), so served-link betas stay
    O(1); the absolute scale cancels under the harness's power inversion.
    """
    d = link_distances(placement)
    if np.any(d == 0.0):
        raise DegenerateDistance("a user coincides with a BS position")
    d0 = cfg.exclusion_radius_m if cfg.exclusion_radius_m > 0 else 1.0
    shadow_db = rng.normal(0.0, cfg.shadowing_sigma_db, size=d.shape)
    return 10.0 ** (shadow_db / 10.0) * (d / d0) ** (-cfg.pathloss_exponent)


def placement_to_csv(placement: Placement, path) -> None:
    """Dump one drop's layout as `x,y,cell,kind` rows (kind: bs|user)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "cell", "kind"])
        for j, (x, y) in enumerate(placement.bs_xy):
            w.writerow([f"{x:.6f}", f"{y:.6f}", j, "bs"])
        for j in range(placement.num_cells):
            for k in range(placement.users_per_cell):
                x, y = placement.user_xy[j, k]
                w.writerow([f"{x:.6f}", f"{y:.6f}", j, "user"])
