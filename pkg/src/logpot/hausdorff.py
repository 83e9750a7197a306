"""Hausdorff distances between finite planar sets and the spread bounds.

The equilibria together with the weighted barycenter stay within one
weighted standard deviation of the charges (directed distance); for
collinear charges the bound holds in both directions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .linalg import collinear_frame
from .potential import ChargeConfiguration, barycenter, normalize, solve_equilibria, weighted_std

__all__ = [
    "HausdorffCheck",
    "directed_hausdorff",
    "extended_equilibria",
    "symmetric_hausdorff",
    "verify_t5",
    "verify_t6",
]


def _point_set(s) -> np.ndarray:
    z = np.asarray(s, dtype=complex).ravel()
    if z.size == 0:
        raise ValueError("point set is empty")
    if not np.all(np.isfinite(z)):
        raise ValueError("point set has non-finite entries")
    return np.unique(z)


def directed_hausdorff(s1, s2) -> float:
    """``max_{p in s1} min_{q in s2} |p - q|``."""
    a, b = _point_set(s1), _point_set(s2)
    return float(np.abs(a[:, None] - b[None, :]).min(axis=1).max())


def symmetric_hausdorff(s1, s2) -> float:
    return max(directed_hausdorff(s1, s2), directed_hausdorff(s2, s1))


def extended_equilibria(config: ChargeConfiguration, equilibria=None) -> np.ndarray:
    """Equilibria followed by the weighted barycenter."""
    cfg = normalize(config)
    if equilibria is None:
        equilibria = solve_equilibria(cfg).points
    w = np.asarray(getattr(equilibria, "points", equilibria), dtype=complex).ravel()
    return np.append(w, barycenter(cfg))


@dataclass(frozen=True)
class HausdorffCheck:
    distance: float
    sigma: float
    margin: float


def verify_t5(config: ChargeConfiguration, equilibria=None) -> HausdorffCheck:
    """``sigma - h(W_e, Z)`` with ``W_e`` the extended equilibrium set.

    Raises ``AssertionError`` if dropping the barycenter increases the
    directed distance, which would mean the distance code is broken.
    """
    cfg = normalize(config)
    ext = extended_equilibria(cfg, equilibria)
    sigma = weighted_std(cfg)
    h_ext = directed_hausdorff(ext, cfg.points)
    if ext.size > 1:
        h_plain = directed_hausdorff(ext[:-1], cfg.points)
        assert h_plain <= h_ext + 1e-12, (h_plain, h_ext)
    return HausdorffCheck(h_ext, sigma, sigma - h_ext)


def verify_t6(config: ChargeConfiguration, equilibria=None) -> HausdorffCheck:
    """``sigma - H(Z, W_e)`` for collinear charges."""
    cfg = normalize(config)
    if collinear_frame(cfg.points) is None:
        raise ConfigurationError("charges are not collinear")
    ext = extended_equilibria(cfg, equilibria)
    sigma = weighted_std(cfg)
    h = symmetric_hausdorff(cfg.points, ext)
    return HausdorffCheck(h, sigma, sigma - h)
