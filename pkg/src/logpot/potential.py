"""Charge configurations, field and potential evaluation, equilibrium points.

The equilibrium points of ``f(z) = sum a_i / (z - z_i)`` are computed as the
eigenvalues of the compression of ``diag(z_1, ..., z_n)`` to the hyperplane
orthogonal to ``(sqrt(a_1), ..., sqrt(a_n))``. The expanded numerator
polynomial is kept as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .linalg import collinear_frame, hermitian_eigen, orthonormal_complement, schur_decompose
from .roots import polynomial_roots

__all__ = [
    "ChargeConfiguration",
    "EquilibriumSet",
    "barycenter",
    "compression_matrix",
    "equilibrium_polynomial",
    "field_eval",
    "normalize",
    "potential_eval",
    "solve_equilibria",
    "weighted_variance",
]

DEFAULT_SEP = 1e-9
NORMALIZED_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChargeConfiguration:
    """Distinct planar points ``points`` (complex) carrying positive ``charges``.

    ``sep`` is the relative separation threshold: two points closer than
    ``sep * diameter`` count as coincident and are rejected (or merged, see
    :meth:`from_records`).
    """

    points: np.ndarray
    charges: np.ndarray
    normalized: bool = False
    sep: float = DEFAULT_SEP

    def __post_init__(self):
        z = np.array(self.points, dtype=complex).ravel()
        a = np.array(self.charges, dtype=float).ravel()
        if z.size == 0:
            raise ConfigurationError("configuration needs at least one point")
        if z.size != a.size:
            raise ConfigurationError(
                f"{z.size} points but {a.size} charges")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(a))):
            raise ConfigurationError("points and charges must be finite")
        if np.any(a <= 0):
            bad = int(np.flatnonzero(a <= 0)[0])
            raise ConfigurationError(f"charge #{bad} is not positive ({a[bad]!r})")
        pair = _closest_pair(z)
        if pair is not None and pair[2] <= self.sep_distance_for(z):
            i, j, _ = pair
            raise ConfigurationError(
                f"points #{i} and #{j} coincide within the separation tolerance")
        if self.normalized and abs(a.sum() - 1.0) > NORMALIZED_TOL:
            raise ConfigurationError(f"charges sum to {a.sum()!r}, not 1")
        object.__setattr__(self, "points", _readonly(z))
        object.__setattr__(self, "charges", _readonly(a))

    def sep_distance_for(self, z) -> float:
        return self.sep * _diameter(z)

    @classmethod
    def from_records(cls, points, charges, merge_coincident=False, sep=DEFAULT_SEP):
        """Build a configuration, optionally merging coincident points.

        Merging keeps the first position of each cluster and sums charges.
        """
        z = np.asarray(points, dtype=complex).ravel()
        a = np.asarray(charges, dtype=float).ravel()
        if merge_coincident and z.size == a.size and z.size > 1:
            limit = sep * _diameter(z)
            keep_z, keep_a = [], []
            for zi, ai in zip(z, a):
                for idx, zk in enumerate(keep_z):
                    if abs(zi - zk) <= limit:
                        keep_a[idx] += ai
                        break
                else:
                    keep_z.append(zi)
                    keep_a.append(ai)
            z, a = np.array(keep_z), np.array(keep_a)
        return cls(z, a, sep=sep)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def diameter(self) -> float:
        return _diameter(self.points)

    @property
    def total_charge(self) -> float:
        return float(self.charges.sum())

    def transformed(self, lam: complex, mu: complex) -> "ChargeConfiguration":
        """Same charges at ``lam * z + mu``."""
        if lam == 0:
            raise ConfigurationError("affine map must be non-singular")
        return ChargeConfiguration(lam * self.points + mu, self.charges,
                                   self.normalized, self.sep)

    def __repr__(self):
        return f"ChargeConfiguration(n={self.n}, normalized={self.normalized})"


def _diameter(z: np.ndarray) -> float:
    if z.size < 2:
        return 0.0
    return float(np.abs(z[:, None] - z[None, :]).max())


def _closest_pair(z: np.ndarray):
    if z.size < 2:
        return None
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return int(min(i, j)), int(max(i, j)), float(d[i, j])


def normalize(config: ChargeConfiguration) -> ChargeConfiguration:
    """Scale the charges to sum to one."""
    if config.normalized:
        return config
    total = config.charges.sum()
    if total <= 0:
        raise ConfigurationError("total charge is zero")
    a = config.charges / total
    return ChargeConfiguration(config.points, a, True, config.sep)


def _check_off_poles(config: ChargeConfiguration, z: np.ndarray) -> None:
    d = np.abs(z.reshape(-1, 1) - config.points[None, :]).min(axis=1)
    limit = config.sep_distance_for(config.points) if config.n > 1 else 0.0
    if np.any(d <= limit):
        raise ValueError("evaluation point lies on (or too close to) a charge")


def field_eval(config: ChargeConfiguration, z):
    """``f(z) = sum_i a_i / (z - z_i)``; vectorised over ``z``."""
    z = np.asarray(z, dtype=complex)
    _check_off_poles(config, z)
    out = (config.charges / (z[..., None] - config.points)).sum(axis=-1)
    return out if out.ndim else complex(out)


def potential_eval(config: ChargeConfiguration, z, gauge: str = "origin"):
    """Logarithmic potential at ``z``.

    ``gauge="origin"`` evaluates ``sum a_i log|1 - z/z_i|`` (undefined when a
    charge sits at the origin); ``gauge="shifted"`` evaluates
    ``sum a_i log|z - z_i|``. Both have gradient ``conj(f(z))``.
    """
    z = np.asarray(z, dtype=complex)
    _check_off_poles(config, z)
    if gauge == "origin":
        if np.any(config.points == 0):
            raise ValueError("a charge sits at the origin; use gauge='shifted'")
        terms = np.log(np.abs(1.0 - z[..., None] / config.points))
    elif gauge == "shifted":
        terms = np.log(np.abs(z[..., None] - config.points))
    else:
        raise ValueError(f"unknown gauge {gauge!r}")
    out = (config.charges * terms).sum(axis=-1)
    return out if out.ndim else float(out)


def equilibrium_polynomial(config: ChargeConfiguration) -> np.ndarray:
    """Monic coefficients (descending) of ``sum_i a_i prod_{j != i} (z - z_j)``."""
    cfg = normalize(config)
    z, a = cfg.points, cfg.charges
    coeffs = np.zeros(cfg.n, dtype=complex)
    for i in range(cfg.n):
        c = np.array([1.0 + 0j])
        for j in range(cfg.n):
            if j != i:
                c = np.convolve(c, [1.0, -z[j]])
        coeffs += a[i] * c
    coeffs[0] = 1.0
    return coeffs


def weight_vector(config: ChargeConfiguration) -> np.ndarray:
    """The unit vector ``(sqrt(a_1), ..., sqrt(a_n))`` of a normalized configuration."""
    v = np.sqrt(normalize(config).charges)
    return v / np.linalg.norm(v)


def compression_matrix(config: ChargeConfiguration) -> np.ndarray:
    """``B^* diag(z) B`` with ``B`` an orthonormal basis of the weight hyperplane."""
    cfg = normalize(config)
    if cfg.n < 2:
        raise ConfigurationError("compression needs at least two charges")
    b = orthonormal_complement(weight_vector(cfg))
    return b.conj().T @ (cfg.points[:, None] * b)


@dataclass(frozen=True, eq=False)
class EquilibriumSet:
    """The ``n - 1`` zeros of the field, with per-point residuals.

    ``basis`` holds, column by column, the orthonormal vectors (in charge
    coordinates) that triangularize the compression; ``points[j]`` is the
    diagonal entry belonging to column ``j``. It is ``None`` for the
    polynomial route.
    """

    points: np.ndarray
    residuals: np.ndarray
    method: str
    basis: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return self.points.size

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max(initial=0.0))


def equilibrium_residuals(config: ChargeConfiguration, w) -> np.ndarray:
    """``|P(w)| / (1 + |w|^(n-1))`` with ``P`` the monic equilibrium polynomial."""
    w = np.asarray(w, dtype=complex)
    if w.size == 0:
        return np.zeros(0)
    p = equilibrium_polynomial(config)
    deg = p.size - 1
    return np.abs(np.polyval(p, w)) / (1.0 + np.abs(w) ** deg)


def solve_equilibria(config: ChargeConfiguration, method: str = "compression") -> EquilibriumSet:
    """Equilibrium points of the configuration, counted with multiplicity.

    ``method="compression"`` (default) takes eigenvalues of the compression:
    a Hermitian eigensolve after rotating collinear points onto the real
    axis, a complex Schur decomposition otherwise. ``method="polynomial"``
    runs the Aberth iteration on the expanded numerator.
    """
    cfg = normalize(config)
    n = cfg.n
    if n == 1:
        empty = np.zeros(0, dtype=complex)
        return EquilibriumSet(_readonly(empty), _readonly(np.zeros(0)), method,
                              np.zeros((1, 0), dtype=complex))
    if method == "polynomial":
        w = polynomial_roots(equilibrium_polynomial(cfg))
        basis = None
    elif method == "compression":
        b = orthonormal_complement(weight_vector(cfg))
        frame = collinear_frame(cfg.points)
        if frame is not None:
            center, direction = frame
            t = ((cfg.points - center) / direction).real
            vals, vecs = hermitian_eigen(b.conj().T @ (t[:, None] * b))
            w = center + direction * vals
            basis = b @ vecs
        else:
            form = schur_decompose(b.conj().T @ (cfg.points[:, None] * b))
            w = form.eigenvalues
            basis = b @ form.q
    else:
        raise ValueError(f"unknown method {method!r}")
    res = equilibrium_residuals(cfg, w)
    return EquilibriumSet(_readonly(np.asarray(w, dtype=complex)), _readonly(res), method,
                          None if basis is None else _readonly(basis))


def barycenter(config: ChargeConfiguration) -> complex:
    cfg = normalize(config)
    return complex((cfg.charges * cfg.points).sum())


def weighted_variance(config: ChargeConfiguration) -> float:
    """``sum a_i |z_i - zeta|^2`` with ``zeta`` the weighted barycenter."""
    cfg = normalize(config)
    zeta = barycenter(cfg)
    return float((cfg.charges * np.abs(cfg.points - zeta) ** 2).sum())


def weighted_std(config: ChargeConfiguration) -> float:
    return float(np.sqrt(weighted_variance(config)))
