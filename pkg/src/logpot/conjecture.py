"""Monte Carlo probes of the symmetrized hierarchy and inertia-moment inequalities.

Moments are expectations over the uniform law on the standard simplex
``{t_i >= 0, sum t_i = 1}``. Random streams are counter-based (Philox) and
split into fixed-size shards with spawned seeds, so a run reproduces
bit-for-bit no matter how many threads evaluate the shards.
"""
from __future__ import annotations

import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb, factorial, fsum
from typing import Callable

import numpy as np

from .dbs import elementary_symmetric
from .errors import CapacityError, ConfigurationError
from .linalg import index_sets
from .potential import ChargeConfiguration, normalize, solve_equilibria

__all__ = [
    "InertiaSpec",
    "TrialReport",
    "Verdict",
    "dbs_hierarchy_trial",
    "inertia_closed_form",
    "inertia_inequality_trial",
    "inertia_moment_mc",
    "make_rng",
    "permutation_invariance_check",
    "simplex_sample",
]

SHARD = 1 << 14
MAX_PERMUTED_TERMS = 1_000_000
MAX_HULLS = 1_000


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; ``seed`` may be an int or a ``SeedSequence``."""
    return np.random.Generator(np.random.Philox(seed))


def simplex_sample(k: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform points of the standard simplex in R^k via sorted-uniform spacings."""
    if k < 1:
        raise ConfigurationError("simplex dimension must be at least 1")
    shape = (1 if size is None else size, k - 1)
    u = np.sort(rng.random(shape), axis=1)
    edges = np.concatenate([np.zeros((shape[0], 1)), u, np.ones((shape[0], 1))], axis=1)
    t = np.diff(edges, axis=1)
    return t[0] if size is None else t


@dataclass(frozen=True)
class InertiaSpec:
    """Exponent ``alpha`` and the line ``point + s * direction`` in R^3."""

    alpha: float = 2.0
    point: tuple = (0.0, 0.0, 0.0)
    direction: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or np.asarray(self.point, dtype=float).shape != (3,):
            raise ConfigurationError("line point and direction must be 3-vectors")
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ConfigurationError("line direction must be a unit vector")
        if self.alpha < 1:
            raise ConfigurationError("alpha must be at least 1")

    def projector(self) -> np.ndarray:
        d = np.asarray(self.direction, dtype=float)
        return np.eye(3) - np.outer(d, d)

    def moments(self, planar) -> np.ndarray:
        """``d(p, L)^alpha`` for planar points ``p`` embedded at height zero."""
        p = np.asarray(planar, dtype=complex)
        rel = np.stack([p.real, p.imag, np.zeros_like(p.real)], axis=-1) - np.asarray(self.point, float)
        perp = rel @ self.projector()
        return np.linalg.norm(perp, axis=-1) ** self.alpha


def _shard_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, SHARD)
    return [SHARD] * full + ([rest] if rest else [])


def _mc(k: int, trials: int, seed: int, evaluate: Callable[[np.ndarray], np.ndarray],
        threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of each column of ``evaluate(t_samples)``."""
    sizes = _shard_sizes(trials)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def shard(idx):
        t = simplex_sample(k, make_rng(seeds[idx]), sizes[idx])
        vals = np.atleast_2d(evaluate(t).T).T
        return ([fsum(c) for c in vals.T], [fsum(c * c) for c in vals.T])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(shard, range(len(sizes))))
    else:
        parts = [shard(i) for i in range(len(sizes))]
    cols = len(parts[0][0])
    s1 = np.array([fsum(p[0][c] for p in parts) for c in range(cols)])
    s2 = np.array([fsum(p[1][c] for p in parts) for c in range(cols)])
    mean = s1 / trials
    var = np.maximum(s2 / trials - mean * mean, 0.0) * trials / max(trials - 1, 1)
    return mean, np.sqrt(var / trials)


def inertia_moment_mc(vertices, spec: InertiaSpec, trials: int = 10_000, seed: int = 0,
                      threads: int = 1) -> tuple[float, float]:
    """Estimate and standard error of ``E d(sum t_i v_i, L)^alpha`` over the uniform simplex."""
    v = np.asarray(vertices, dtype=complex).ravel()
    if v.size == 0:
        raise ConfigurationError("need at least one vertex")
    if trials < 1000:
        raise ConfigurationError("use at least 1000 trials")
    mean, se = _mc(v.size, trials, seed, lambda t: spec.moments(t @ v), threads)
    return float(mean[0]), float(se[0])


def inertia_closed_form(vertices, spec: InertiaSpec) -> float:
    """Exact ``alpha = 2`` moment: ``sum_ij (1 + delta_ij) / (k (k + 1)) (V_i - q)^T P (V_j - q)``."""
    v = np.asarray(vertices, dtype=complex).ravel()
    k = v.size
    pts = np.stack([v.real, v.imag, np.zeros(k)], axis=1) - np.asarray(spec.point, float)
    gram = pts @ spec.projector() @ pts.T
    return float((gram.sum() + np.trace(gram)) / (k * (k + 1)))


def permutation_invariance_check(vertices, spec: InertiaSpec, trials: int = 10_000, seed: int = 0,
                                 permutations: int = 10) -> float:
    """Largest estimate change when the vertex list is permuted.

    Permuting the vertices is matched by permuting the simplex coordinates
    of the common sample, which the uniform law leaves invariant; the
    estimates then differ only by summation order.
    """
    v = np.asarray(vertices, dtype=complex).ravel()
    k = v.size
    t = simplex_sample(k, make_rng(seed), trials)
    base = fsum(spec.moments(t @ v)) / trials
    rng = make_rng(np.random.SeedSequence(seed).spawn(1)[0])
    worst = 0.0
    for _ in range(permutations):
        pi = rng.permutation(k)
        est = fsum(spec.moments(t[:, pi] @ v[pi])) / trials
        worst = max(worst, abs(est - base))
    return worst


def _equilibrium_points(cfg, equilibria) -> np.ndarray:
    if equilibria is None:
        equilibria = solve_equilibria(cfg)
    return np.asarray(getattr(equilibria, "points", equilibria), dtype=complex).ravel()


def dbs_hierarchy_trial(config: ChargeConfiguration, equilibria=None, k: int = 1, m: int = 1,
                        t=None, phi: Callable = np.abs) -> float:
    """RHS - LHS of the permutation-symmetrized level-``k`` inequality for ``phi``.

    Each side sums ``phi(e_m(t_pi(1) x_1, ..., t_pi(k) x_k))`` over index
    sets and all ``k!`` permutations; the z-side carries weights
    ``1 - sum a_s``. ``t`` defaults to the all-ones vector.
    """
    cfg = normalize(config)
    n = cfg.n
    if not 1 <= m <= k <= n - 1:
        raise ConfigurationError(f"need 1 <= m <= k <= {n - 1}")
    if factorial(k) * comb(n, k) > MAX_PERMUTED_TERMS:
        raise CapacityError("k! C(n, k) exceeds the enumeration cap")
    w = _equilibrium_points(cfg, equilibria)
    t = np.ones(k, dtype=complex) if t is None else np.asarray(t, dtype=complex).ravel()
    if t.size != k:
        raise ConfigurationError(f"t must have {k} entries")
    perms = np.array(list(itertools.permutations(range(k))), dtype=int)
    tp = t[perms]

    def side(values, sets):
        args = tp[None, :, :] * values[sets][:, None, :]
        e = elementary_symmetric(args.reshape(-1, k), m).reshape(len(sets), -1)
        return np.asarray(phi(e), dtype=float).sum(axis=1)

    ws = np.array(index_sets(n - 1, k), dtype=int).reshape(-1, k)
    zs = np.array(index_sets(n, k), dtype=int).reshape(-1, k)
    lhs = side(w, ws)
    rhs = (1.0 - cfg.charges[zs].sum(axis=1)) * side(cfg.points, zs)
    return fsum(rhs) - fsum(lhs)


class Verdict(enum.Enum):
    CONSISTENT = "consistent"
    VIOLATION_CANDIDATE = "violation-candidate"


@dataclass(frozen=True)
class TrialReport:
    lhs_estimate: float
    rhs_estimate: float
    lhs_se: float
    rhs_se: float

    @property
    def margin(self) -> float:
        return self.rhs_estimate - self.lhs_estimate

    @property
    def verdict(self) -> Verdict:
        if self.margin < -5.0 * (self.lhs_se + self.rhs_se):
            return Verdict.VIOLATION_CANDIDATE
        return Verdict.CONSISTENT


def inertia_inequality_trial(config: ChargeConfiguration, equilibria=None, k: int = 1,
                             spec: InertiaSpec | None = None, trials: int = 10_000, seed: int = 0,
                             threads: int = 1) -> TrialReport:
    """Both sides of the inertia-moment inequality at level ``k``.

    One simplex sample is shared by every hull on both sides; standard
    errors are computed from the per-sample side totals.
    """
    spec = spec or InertiaSpec()
    cfg = normalize(config)
    n = cfg.n
    if not 1 <= k <= n - 1:
        raise ConfigurationError(f"level k={k} outside 1..{n - 1}")
    if comb(n, k) > MAX_HULLS:
        raise CapacityError("C(n, k) exceeds the hull cap")
    if trials < 10_000:
        raise ConfigurationError("use at least 10000 trials")
    w = _equilibrium_points(cfg, equilibria)
    ws = np.array(index_sets(n - 1, k), dtype=int).reshape(-1, k)
    zs = np.array(index_sets(n, k), dtype=int).reshape(-1, k)
    zw = 1.0 - cfg.charges[zs].sum(axis=1)

    def evaluate(t):
        lhs = spec.moments(t @ w[ws].T).sum(axis=1)
        rhs = spec.moments(t @ cfg.points[zs].T) @ zw
        return np.stack([lhs, rhs], axis=1)

    mean, se = _mc(k, trials, seed, evaluate, threads)
    return TrialReport(float(mean[0]), float(mean[1]), float(se[0]), float(se[1]))

