"""Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

Two entry points share one iteration: :func:`polynomial_roots` works from
coefficients, :func:`rational_zeros` finds the zeros of
``f(z) = sum_i a_i / (z - z_i)`` directly from the charges and poles, which
stays well conditioned when the expanded numerator would not be (complex
charges, poles spread over several orders of magnitude).
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConvergenceError

__all__ = ["aberth", "poly_from_roots", "polynomial_roots", "rational_zeros"]


def aberth(
    newton: Callable[[np.ndarray], np.ndarray],
    init: np.ndarray,
    tol: float = 1e-15,
    maxiter: int = 500,
) -> np.ndarray:
    """Run the Aberth-Ehrlich iteration.

    ``newton(z)`` must return the Newton corrections ``p(z) / p'(z)`` for
    every current approximation. Each approximation is frozen once its
    correction drops below ``tol`` relative to ``max(1, |z|)``, or once the
    corrections stop shrinking at the rounding floor (clustered or multiple
    roots never get below ``tol``).
    """
    z = np.array(init, dtype=complex)
    deg = z.size
    if deg == 0:
        return z
    active = np.ones(deg, dtype=bool)
    previous = np.full(deg, np.inf)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return z
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = newton(z[idx])
            repulsion = (1.0 / diff).sum(axis=1) - 1.0
            denom = 1.0 - ratio * repulsion
            step = ratio / denom
        # landing on a pole or an exact root gives a non-finite step: stay put
        step = np.where(np.isfinite(step), step, 0.0)
        z[idx] -= step
        size = np.abs(step)
        scale = np.maximum(1.0, np.abs(z[idx]))
        stalled = (size >= 0.5 * previous[idx]) & (size <= 1e-6 * scale)
        done = (size <= tol * scale) | stalled
        previous[idx] = size
        active[idx[done]] = False
    if active.any():
        raise ConvergenceError(f"Aberth iteration did not converge in {maxiter} steps")
    return z


def _initial_circle(center: complex, radius: float, deg: int) -> np.ndarray:
    # offset angle avoids symmetric starts on real or symmetric problems
    angles = 2.0 * np.pi * np.arange(deg) / deg + 0.4
    return center + radius * np.exp(1j * angles)


def polynomial_roots(coeffs, tol: float = 1e-15, maxiter: int = 500) -> np.ndarray:
    """Roots of the polynomial with coefficients in descending order."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if c.size == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    c = c / c[0]
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    dc = c[:-1] * np.arange(deg, 0, -1)
    center = -c[1] / deg
    # Cauchy-type bound for the root radius about the centroid
    shifted = np.abs(c[1:]) ** (1.0 / np.arange(1, deg + 1))
    radius = max(2.0 * shifted.max(), 1e-3)

    def newton(z):
        return np.polyval(c, z) / np.polyval(dc, z)

    return aberth(newton, _initial_circle(center, 0.5 * radius, deg), tol, maxiter)


def rational_zeros(poles, charges, tol: float = 1e-15, maxiter: int = 1000) -> np.ndarray:
    """Zeros of ``sum_i charges[i] / (z - poles[i])`` counted with multiplicity.

    The zeros are those of the numerator ``P = f * prod(z - z_i)``, a
    polynomial of degree ``n - 1`` when the total charge is non-zero. Newton
    corrections use ``P'/P = f'/f + sum_i 1/(z - z_i)`` so the numerator is
    never expanded.
    """
    z0 = np.asarray(poles, dtype=complex).ravel()
    a = np.asarray(charges, dtype=complex).ravel()
    if z0.size != a.size:
        raise ValueError("poles and charges differ in length")
    deg = z0.size - 1
    if deg <= 0:
        return np.zeros(0, dtype=complex)
    if a.sum() == 0:
        raise ValueError("total charge is zero; numerator degree drops")

    def newton(z):
        d = z[:, None] - z0[None, :]
        inv = 1.0 / d
        f = (a * inv).sum(axis=1)
        df = -(a * inv * inv).sum(axis=1)
        logderiv = df / f + inv.sum(axis=1)
        return 1.0 / logderiv

    center = (a * z0).sum() / a.sum()
    radius = max(np.abs(z0 - center).max(), 1e-12)
    return aberth(newton, _initial_circle(center, 0.7 * radius, deg), tol, maxiter)


def poly_from_roots(roots) -> np.ndarray:
    """Monic coefficients (descending) of ``prod (z - r)``."""
    c = np.array([1.0 + 0j])
    for r in np.asarray(roots, dtype=complex).ravel():
        c = np.convolve(c, [1.0, -r])
    return c
