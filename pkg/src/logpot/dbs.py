"""Stochastic certificates relating equilibria and charges, level by level.

Level ``k`` compares the elementary symmetric functions of the equilibria
taken ``k`` at a time with those of the charge positions, weighted by
``1 - (sum of the chosen charges)``. The certificates come from compound
matrices of the unitary that carries the Schur basis of the compression
to the standard basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, fsum

import numpy as np

from .errors import CapacityError, ConfigurationError
from .linalg import compound, index_sets
from .majorization import (StochasticCertificate, WeightedTuple, check_weighted_majorization,
                           make_certificate)
from .potential import ChargeConfiguration, EquilibriumSet, normalize, solve_equilibria, weight_vector

__all__ = [
    "DbsCertificate",
    "SymmetricVectors",
    "UniquenessProbe",
    "check_newton_identities",
    "construct_first_order",
    "construct_hierarchy",
    "elementary_symmetric",
    "level_majorization",
    "m_matrix_identity",
    "moment_inequalities",
    "newton_identity_sides",
    "random_transforms",
    "symmetric_vectors",
    "uniqueness_probe",
]

MAX_SETS = 10_000
DEFAULT_TRANSFORMS = 20


def elementary_symmetric(values, m: int) -> np.ndarray:
    """``e_m`` of each row of ``values`` (shape ``(rows, k)``)."""
    v = np.asarray(values, dtype=complex)
    rows, k = v.shape
    if not 0 <= m <= k:
        return np.zeros(rows, dtype=complex)
    e = np.zeros((m + 1, rows), dtype=complex)
    e[0] = 1.0
    for j in range(k):
        for i in range(min(j + 1, m), 0, -1):
            e[i] = e[i] + v[:, j] * e[i - 1]
    return e[m]


def _equilibria(config: ChargeConfiguration, equilibria) -> tuple[ChargeConfiguration, EquilibriumSet | np.ndarray]:
    cfg = normalize(config)
    if equilibria is None:
        equilibria = solve_equilibria(cfg)
    return cfg, equilibria


def _points(equilibria) -> np.ndarray:
    if isinstance(equilibria, EquilibriumSet):
        return equilibria.points
    return np.asarray(equilibria, dtype=complex).ravel()


def _check_level(n: int, k: int, m: int | None = None) -> None:
    if not 1 <= k <= n - 1:
        raise ConfigurationError(f"level k={k} outside 1..{n - 1}")
    if m is not None and not 1 <= m <= k:
        raise ConfigurationError(f"order m={m} outside 1..{k}")
    if comb(n, k) > MAX_SETS:
        raise CapacityError(f"C({n},{k}) exceeds the cap of {MAX_SETS}")


@dataclass(frozen=True, eq=False)
class SymmetricVectors:
    """Level-``k`` symmetric-function vectors and their weights.

    Entries follow the lexicographic order of the index sets.
    """

    k: int
    m: int
    lam: complex
    mu: complex
    w_vec: np.ndarray
    z_vec: np.ndarray
    a_weights: np.ndarray
    b_weights: np.ndarray

    def tuples(self) -> tuple[WeightedTuple, WeightedTuple]:
        return WeightedTuple(self.w_vec, self.a_weights), WeightedTuple(self.z_vec, self.b_weights)


def level_weights(charges, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform weights on the ``(n-1)``-sets and ``(1 - sum a_s) / C(n-1, k)`` on the ``n``-sets."""
    a = np.asarray(charges, dtype=float)
    n = a.size
    count = comb(n - 1, k)
    sets = np.array(index_sets(n, k), dtype=int).reshape(-1, k)
    b = (1.0 - a[sets].sum(axis=1)) / count
    return np.full(count, 1.0 / count), b


def symmetric_vectors(config: ChargeConfiguration, equilibria=None, k: int = 1, m: int = 1,
                      lam: complex = 1.0, mu: complex = 0.0) -> SymmetricVectors:
    """Values of the ``m``-th elementary symmetric function on ``lam * x + mu``.

    The w-side runs over ``k``-subsets of the equilibria, the z-side over
    ``k``-subsets of the charge positions.
    """
    cfg, eq = _equilibria(config, equilibria)
    w = _points(eq)
    n = cfg.n
    _check_level(n, k, m)
    ws = np.array(index_sets(n - 1, k), dtype=int).reshape(-1, k)
    zs = np.array(index_sets(n, k), dtype=int).reshape(-1, k)
    w_vec = elementary_symmetric(lam * w[ws] + mu, m)
    z_vec = elementary_symmetric(lam * cfg.points[zs] + mu, m)
    a_w, b_w = level_weights(cfg.charges, k)
    return SymmetricVectors(k, m, complex(lam), complex(mu), w_vec, z_vec, a_w, b_w)


def random_transforms(count: int = DEFAULT_TRANSFORMS, seed: int = 0) -> list[tuple[complex, complex]]:
    """Affine parameters ``(lam, mu)`` with ``1/2 <= |lam| <= 2`` and ``|mu| <= 1``."""
    rng = np.random.default_rng(seed)
    mods = rng.uniform(0.5, 2.0, count)
    args = rng.uniform(0.0, 2.0 * np.pi, count)
    mu = np.sqrt(rng.uniform(0.0, 1.0, count)) * np.exp(2j * np.pi * rng.uniform(size=count))
    return [(complex(r * np.exp(1j * t)), complex(s)) for r, t, s in zip(mods, args, mu)]


def _mix_residual(r: np.ndarray, sv: SymmetricVectors) -> float:
    scale = max(1.0, float(np.abs(sv.z_vec).max()))
    return float(np.abs(sv.w_vec - r @ sv.z_vec).max()) / scale


@dataclass(frozen=True, eq=False)
class DbsCertificate:
    """Row-stochastic ``r`` for level ``k``.

    ``mix_residual`` is the worst mixing error over every order ``m <= k``
    and every tested affine map, relative to ``max(1, max |z-side|)``.
    """

    k: int
    r: np.ndarray
    row_residual: float
    mix_residual: float
    weight_residual: float
    transforms: int

    @property
    def residuals(self) -> tuple[float, float, float]:
        return self.row_residual, self.mix_residual, self.weight_residual

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    def certifies(self, tol: float = 1e-8) -> bool:
        return bool(self.r.min(initial=0.0) >= -1e-12 and self.max_residual <= tol)


def _basis(cfg: ChargeConfiguration, eq) -> np.ndarray:
    if not isinstance(eq, EquilibriumSet) or eq.basis is None:
        eq = solve_equilibria(cfg)
    return eq.basis, eq.points


def construct_first_order(config: ChargeConfiguration, equilibria=None,
                          transforms: int = DEFAULT_TRANSFORMS, seed: int = 0) -> StochasticCertificate:
    """``r_ij = |<v_i, e_j>|^2`` from the triangularizing basis of the compression.

    The mixing residual reported is the worst over the identity and
    ``transforms`` random affine maps, all checked with the same ``r``.
    """
    cfg, eq = _equilibria(config, equilibria)
    if cfg.n < 2:
        raise ConfigurationError("a single charge has no equilibria")
    basis, w = _basis(cfg, eq)
    r = (np.abs(basis) ** 2).T
    n = cfg.n
    wt = WeightedTuple(w, np.full(n - 1, 1.0 / (n - 1)))
    zt = WeightedTuple(cfg.points, (1.0 - cfg.charges) / (n - 1))
    cert = make_certificate(r, wt, zt)
    mix = cert.mix_residual
    for lam, mu in random_transforms(transforms, seed):
        z = lam * cfg.points + mu
        scale = max(1.0, float(np.abs(z).max()))
        mix = max(mix, float(np.abs(lam * w + mu - r @ z).max()) / scale)
    return StochasticCertificate(r, cert.row_residual, mix, cert.weight_residual)


def construct_hierarchy(config: ChargeConfiguration, k: int, equilibria=None,
                        transforms: int = DEFAULT_TRANSFORMS, seed: int = 0) -> DbsCertificate:
    """Level-``k`` certificate from the ``k``-th compound of the basis change.

    ``U`` has the conjugated basis vectors as its first ``n - 1`` rows and
    ``sqrt(a)`` as its last row. Rows of ``|U^(k)|^2`` whose index sets avoid
    the last index form ``r``. The same ``r`` is checked for every order
    ``m <= k`` at the identity map and at ``transforms`` random affine maps.
    """
    cfg, eq = _equilibria(config, equilibria)
    n = cfg.n
    _check_level(n, k)
    basis, w = _basis(cfg, eq)
    u = np.vstack([basis.conj().T, weight_vector(cfg)[None, :]])
    rows = index_sets(n - 1, k)
    c = compound(u, k, rows=rows)
    r = np.abs(c) ** 2
    a_w, b_w = level_weights(cfg.charges, k)
    row = float(np.abs(r.sum(axis=1) - 1.0).max())
    weight = float(np.abs(b_w - a_w @ r).max())
    mix = 0.0
    maps = [(1.0, 0.0)] + random_transforms(transforms, seed)
    for m in range(1, k + 1):
        for lam, mu in maps:
            mix = max(mix, _mix_residual(r, symmetric_vectors(cfg, w, k, m, lam, mu)))
    return DbsCertificate(k, r, row, mix, weight, len(maps))


def newton_identity_sides(config: ChargeConfiguration, equilibria=None, k: int = 1) -> tuple[complex, complex, float]:
    """Both sides of the level-``k`` power-sum identity and a magnitude scale.

    ``lhs = sum over (n-1)-sets of prod w``, ``rhs = sum over n-sets of
    (1 - sum a_s) prod z``; ``scale`` is the sum of absolute terms (at least 1).
    """
    cfg, eq = _equilibria(config, equilibria)
    w = _points(eq)
    n = cfg.n
    _check_level(n, k)
    ws = np.array(index_sets(n - 1, k), dtype=int).reshape(-1, k)
    zs = np.array(index_sets(n, k), dtype=int).reshape(-1, k)
    wp = np.prod(w[ws], axis=1)
    zp = (1.0 - cfg.charges[zs].sum(axis=1)) * np.prod(cfg.points[zs], axis=1)
    lhs = complex(fsum(wp.real), fsum(wp.imag))
    rhs = complex(fsum(zp.real), fsum(zp.imag))
    scale = max(1.0, float(np.abs(wp).sum() + np.abs(zp).sum()))
    return lhs, rhs, scale


def check_newton_identities(config: ChargeConfiguration, equilibria=None, k: int = 1) -> float:
    """``|lhs - rhs|`` of the level-``k`` identity, by direct enumeration."""
    lhs, rhs, _ = newton_identity_sides(config, equilibria, k)
    return abs(lhs - rhs)


def moment_inequalities(config: ChargeConfiguration, equilibria=None, k: int = 1, m: int = 1,
                        alpha: float = 2.0, normalized: bool = False) -> float:
    """RHS - LHS of the moment inequality ``sum |e_m(w_r)|^alpha <= sum (1 - sum a_s) |e_m(z_s)|^alpha``.

    With ``normalized=True`` both sides are divided by their set counts
    and the z-side weights are dropped; for equal charges the two forms
    are the same inequality.
    """
    if alpha < 1:
        raise ConfigurationError("alpha must be at least 1")
    sv = symmetric_vectors(config, equilibria, k, m)
    lhs = np.abs(sv.w_vec) ** alpha
    rhs_terms = np.abs(sv.z_vec) ** alpha
    if normalized:
        return fsum(rhs_terms) / rhs_terms.size - fsum(lhs) / lhs.size
    count = comb(normalize(config).n - 1, k)
    return fsum(count * sv.b_weights * rhs_terms) - fsum(lhs)


def m_matrix_identity(x) -> tuple[float, float, float]:
    """Check ``sum det X(i,i) over (m-1)-sets - m det X = tr(I - X)`` for ``X = I - x^T x``."""
    x = np.asarray(x, dtype=float).ravel()
    m = x.size
    if m == 0 or np.any(x <= 0) or np.any(x >= 1) or x @ x >= 1:
        raise ConfigurationError("x must lie in (0,1)^m with |x| < 1")
    big = np.eye(m) - np.outer(x, x)
    minors = fsum(np.linalg.det(big[np.ix_(s, s)]) if s else 1.0
                  for s in map(list, index_sets(m, m - 1)))
    lhs = minors - m * np.linalg.det(big)
    rhs = float(np.trace(np.eye(m) - big))
    return float(lhs), rhs, abs(float(lhs) - rhs)


def level_majorization(config: ChargeConfiguration, equilibria=None, k: int = 1, m: int | None = None,
                       lam: complex = 1.0, mu: complex = 0.0):
    """LP check of the level-``k`` relation for order ``m`` (default ``m = k``)."""
    sv = symmetric_vectors(config, equilibria, k, k if m is None else m, lam, mu)
    return check_weighted_majorization(*sv.tuples())


@dataclass(frozen=True)
class UniquenessProbe:
    """Outcome of testing a candidate equilibrium set.

    ``detected`` is true when some level-``k`` identity misses by more
    than the tolerance or some level LP is infeasible.
    """

    detected: bool
    level: int | None
    method: str | None
    worst_identity_residual: float


def uniqueness_probe(config: ChargeConfiguration, candidate, tol: float = 1e-6,
                     use_lp: bool = True) -> UniquenessProbe:
    """Does some level-``k`` relation reject ``candidate`` as the equilibria?

    The identities are checked first at every level; the LPs at ``m = k``
    run only when all identities hold.
    """
    cfg = normalize(config)
    w = np.asarray(candidate, dtype=complex).ravel()
    if w.size != cfg.n - 1:
        raise ConfigurationError(f"expected {cfg.n - 1} candidate points, got {w.size}")
    worst = 0.0
    for k in range(1, cfg.n):
        res = check_newton_identities(cfg, w, k)
        worst = max(worst, res)
        if res > tol:
            return UniquenessProbe(True, k, "identity", worst)
    if use_lp:
        for k in range(1, cfg.n):
            if not level_majorization(cfg, w, k).feasible:
                return UniquenessProbe(True, k, "lp", worst)
    return UniquenessProbe(False, None, None, worst)
