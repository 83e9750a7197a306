"""Infinite charge sequences explored through finite truncations.

A :class:`SequenceFamily` generates the first ``N`` charges and positions
of an infinite sequence. Finite truncations are ordinary configurations
(or, for complex charges, bare pole/charge arrays); ladders of growing
``N`` track how the zeros move and how many fall in a region.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dbs import construct_first_order
from .errors import ConfigurationError, VerificationError
from .majorization import StochasticCertificate, battery_functions, battery_margins
from .potential import ChargeConfiguration, normalize, solve_equilibria
from .roots import rational_zeros

__all__ = [
    "ComplexChargeSet",
    "InterlacingResult",
    "Region",
    "SequenceFamily",
    "TruncationLadder",
    "builtin_family",
    "column_residual",
    "custom_family",
    "family_names",
    "interlacing_check",
    "t7_certificate",
    "t8_battery",
    "truncate",
    "truncation_zeros",
    "zero_count_explorer",
]

KINDS = ("bounded-real", "bounded-complex", "unbounded", "complex-charge")
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))
TRUNCATION_SEP = 1e-13


@dataclass(frozen=True, eq=False)
class SequenceFamily:
    """Rules producing charges ``a_i`` and positions ``z_i`` for ``i = 1, 2, ...``.

    ``charges(i)`` and ``points(i)`` take an integer array of indices.
    ``rho`` is the disk radius for bounded kinds and ``None`` otherwise.
    ``limit`` caps the length of finite (user-supplied) families.
    """

    name: str
    kind: str
    charges: Callable[[np.ndarray], np.ndarray]
    points: Callable[[np.ndarray], np.ndarray]
    rho: float | None = None
    params: dict = field(default_factory=dict)
    limit: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown family kind {self.kind!r}")
        if self.kind.startswith("bounded") and not (self.rho and self.rho > 0):
            raise ConfigurationError("bounded families need a positive rho")

    def generate(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        if n < 1:
            raise ConfigurationError("truncation length must be positive")
        if self.limit is not None and n > self.limit:
            raise ConfigurationError(f"family {self.name!r} has only {self.limit} terms")
        i = np.arange(1, n + 1)
        z = np.asarray(self.points(i), dtype=complex)
        a = np.asarray(self.charges(i))
        if self.kind == "complex-charge":
            a = a.astype(complex)
            if np.any((a * z.conj()).real <= 0) or np.any(
                    np.abs((a * z.conj()).imag) > 1e-12 * np.abs(a * z)):
                raise ConfigurationError("complex-charge family needs a_n conj(z_n) > 0")
        else:
            a = a.astype(float)
        if self.kind.startswith("bounded") and np.any(np.abs(z) >= self.rho):
            raise ConfigurationError("bounded family left the disk")
        return z, a


def _geometric_real(rho=1.0, base=0.5):
    rho, base = float(rho), float(base)
    _check_base(base)
    return SequenceFamily(
        "geometric-real", "bounded-real",
        lambda i: base ** i,
        lambda i: rho * (1.0 - base ** i) + 0j,
        rho, {"rho": rho, "base": base})


def _geometric_spiral(rho=1.0, base=0.5):
    rho, base = float(rho), float(base)
    _check_base(base)
    return SequenceFamily(
        "geometric-spiral", "bounded-complex",
        lambda i: base ** i,
        lambda i: rho * (1.0 - base ** i) * np.exp(1j / i.astype(float) ** 2),
        rho, {"rho": rho, "base": base})


def _harmonic_unbounded(phi=GOLDEN_ANGLE, power=2.0):
    phi, power = float(phi), float(power)
    return SequenceFamily(
        "harmonic-unbounded", "unbounded",
        lambda i: 1.0 / i.astype(float) ** power,
        lambda i: i * np.exp(1j * phi * i),
        None, {"phi": phi, "power": power})


def _complex_charge(phi=GOLDEN_ANGLE, power=1.0):
    phi, power = float(phi), float(power)
    return SequenceFamily(
        "complex-charge", "complex-charge",
        lambda i: np.exp(1j * phi * i) / i.astype(float) ** power,
        lambda i: i * np.exp(1j * phi * i),
        None, {"phi": phi, "power": power})


def _check_base(base: float) -> None:
    if not 0.0 < base < 1.0:
        raise ConfigurationError("base must lie in (0, 1)")


_BUILTINS = {
    "geometric-real": _geometric_real,
    "geometric-spiral": _geometric_spiral,
    "harmonic-unbounded": _harmonic_unbounded,
    "complex-charge": _complex_charge,
}


def family_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_family(name: str, **params) -> SequenceFamily:
    """One of :func:`family_names`, with its keyword parameters."""
    try:
        maker = _BUILTINS[name]
    except KeyError:
        raise ConfigurationError(f"unknown family {name!r}; choose from {family_names()}") from None
    try:
        return maker(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for family {name!r}: {exc}") from None


def custom_family(points, charges, rho: float | None = None, kind: str | None = None) -> SequenceFamily:
    """A finite user-supplied list, truncated like the built-in families."""
    z = np.asarray(points, dtype=complex).ravel()
    a = np.asarray(charges).ravel()
    if kind is None:
        if np.iscomplexobj(a) and np.any(a.imag != 0):
            kind = "complex-charge"
        elif rho is not None:
            kind = "bounded-real" if np.all(z.imag == 0) else "bounded-complex"
        else:
            kind = "unbounded"
    return SequenceFamily("custom", kind, lambda i: a[i - 1], lambda i: z[i - 1],
                          rho, {"n": z.size}, limit=z.size)


@dataclass(frozen=True, eq=False)
class ComplexChargeSet:
    """Poles with complex charges; no positivity or ordering structure."""

    points: np.ndarray
    charges: np.ndarray

    @property
    def n(self) -> int:
        return self.points.size


def truncate(family: SequenceFamily, n: int, renormalize: bool = True, sep: float = TRUNCATION_SEP):
    """The first ``n`` terms as a finite configuration.

    Positive kinds give a :class:`ChargeConfiguration` (normalized when
    ``renormalize``); the complex-charge kind gives a :class:`ComplexChargeSet`.
    Geometric families crowd their points towards the limit, hence the
    small default separation threshold.
    """
    z, a = family.generate(n)
    if family.kind == "complex-charge":
        if np.unique(z).size != z.size:
            raise ConfigurationError("generator produced coincident points")
        return ComplexChargeSet(z, a / a.sum() if renormalize else a)
    cfg = ChargeConfiguration(z, a, sep=sep)
    return normalize(cfg) if renormalize else cfg


def truncation_zeros(config) -> np.ndarray:
    """Zeros of the truncated field."""
    if isinstance(config, ComplexChargeSet):
        return rational_zeros(config.points, config.charges)
    return solve_equilibria(config).points


# ---------------------------------------------------------------------------
# Real configurations


@dataclass(frozen=True)
class InterlacingResult:
    interlaced: bool
    pattern: str
    min_gap: float


def interlacing_check(config: ChargeConfiguration, equilibria=None) -> InterlacingResult:
    """Strict alternation ``z_(1) < w_(1) < z_(2) < ... < w_(n-1) < z_(n)``.

    ``pattern`` spells the merged order with ``z`` and ``w``; gaps below
    ``1e-12 * spread`` count as ties and break the alternation.
    """
    cfg = normalize(config)
    if np.any(cfg.points.imag != 0):
        raise ConfigurationError("interlacing needs real charge positions")
    w = solve_equilibria(cfg).points if equilibria is None else np.asarray(
        getattr(equilibria, "points", equilibria), dtype=complex)
    if np.any(np.abs(w.imag) > 1e-12 * max(1.0, cfg.diameter)):
        return InterlacingResult(False, "non-real equilibria", 0.0)
    z = np.sort(cfg.points.real)
    ws = np.sort(w.real)
    merged = np.concatenate([z, ws])
    tags = np.array(["z"] * z.size + ["w"] * ws.size)
    order = np.argsort(merged, kind="stable")
    pattern = "".join(tags[order])
    values = merged[order]
    spread = max(z[-1] - z[0], np.finfo(float).tiny)
    gaps = np.diff(values)
    min_gap = float(gaps.min()) if gaps.size else spread
    ok = pattern == "zw" * ws.size + "z" and min_gap > 1e-12 * spread
    return InterlacingResult(bool(ok), pattern, min_gap / spread)


def column_residual(cert: StochasticCertificate, config: ChargeConfiguration) -> float:
    """Largest deviation of the certificate column sums from ``1 - a_j``."""
    a = normalize(config).charges
    return float(np.abs(cert.r.sum(axis=0) - (1.0 - a)).max())


def t7_certificate(config: ChargeConfiguration, tol: float = 1e-8) -> StochasticCertificate:
    """First-order certificate for real charges, with column sums ``1 - a_j``.

    Raises :class:`VerificationError` when any residual, column sums
    included, exceeds ``tol``.
    """
    cfg = normalize(config)
    if np.any(cfg.points.imag != 0):
        raise ConfigurationError("the real-line certificate needs real charge positions")
    cert = construct_first_order(cfg)
    column = column_residual(cert, cfg)
    if not cert.certifies(tol) or column > tol:
        raise VerificationError(
            f"certificate residuals {cert.max_residual:.3g}, column residual {column:.3g}")
    return cert


@dataclass(frozen=True)
class NonnegativeBatteryReport:
    worst_margin: float
    worst_function: str
    evaluations: int


def t8_battery(config: ChargeConfiguration, lam: complex = 1.0, mu: complex = 0.0, equilibria=None,
               angles: int = 24, grid: int = 9, alphas=(1.0, 2.0, 3.0)) -> NonnegativeBatteryReport:
    """Worst ``sum (1 - a_i) phi(lam z_i + mu) - sum phi(lam w_j + mu)`` over nonnegative convex ``phi``."""
    cfg = normalize(config)
    w = solve_equilibria(cfg).points if equilibria is None else np.asarray(
        getattr(equilibria, "points", equilibria), dtype=complex)
    z = lam * cfg.points + mu
    funcs = battery_functions(z, angles, grid, alphas, nonnegative_only=True)
    margins = battery_margins(funcs, lam * w + mu, np.ones(w.size), z, 1.0 - cfg.charges)
    worst = int(np.argmin(margins))
    return NonnegativeBatteryReport(float(margins[worst]), str(funcs[worst]), len(funcs))


# ---------------------------------------------------------------------------
# Ladders


@dataclass(frozen=True)
class Region:
    """Open disk (``inner = None``) or annulus ``inner < |z - center| < outer``."""

    center: complex = 0j
    outer: float = np.inf
    inner: float | None = None

    def contains(self, z) -> np.ndarray:
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        inside = d < self.outer
        if self.inner is not None:
            inside &= d > self.inner
        return inside

    @classmethod
    def default_for(cls, family: SequenceFamily) -> "Region":
        return cls(0j, family.rho if family.rho else np.inf)


@dataclass(frozen=True, eq=False)
class TruncationLadder:
    """Zeros across truncation levels with nearest-neighbour trajectories.

    ``trajectory_ids[l][j]`` names the trajectory of zero ``j`` at level
    ``l``; ``steps[l][j]`` is its displacement from the previous level
    (``nan`` when the trajectory starts there).
    """

    levels: list[int]
    zeros: list[np.ndarray]
    counts: list[int]
    trajectory_ids: list[np.ndarray]
    steps: list[np.ndarray]
    region: Region

    @property
    def max_steps(self) -> list[float]:
        """Largest matched displacement per level (``nan`` for the first level)."""
        out = []
        for s in self.steps:
            finite = s[np.isfinite(s)]
            out.append(float(finite.max()) if finite.size else float("nan"))
        return out

    def counts_nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.counts, self.counts[1:]))


def _local_gaps(z: np.ndarray) -> np.ndarray:
    """Distance from each point to its nearest neighbour in the same set."""
    if z.size < 2:
        return np.full(z.size, np.inf)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def _match(prev: np.ndarray, cur: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Greedy global nearest pairs.

    A pair is rejected when its distance exceeds half the nearest-neighbour
    gap of either endpoint, so crowded zeros only match very close partners.
    """
    owner = np.full(cur.size, -1)
    step = np.full(cur.size, np.nan)
    if prev.size == 0 or cur.size == 0:
        return owner, step
    d = np.abs(prev[:, None] - cur[None, :])
    limit = 0.5 * np.minimum(_local_gaps(prev)[:, None], _local_gaps(cur)[None, :])
    d[d > limit] = np.inf
    while True:
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if not np.isfinite(d[i, j]):
            break
        owner[j], step[j] = i, d[i, j]
        d[i, :] = np.inf
        d[:, j] = np.inf
    return owner, step


def zero_count_explorer(family: SequenceFamily, levels, region: Region | None = None,
                        threads: int = 1) -> TruncationLadder:
    """Solve each truncation, count zeros in ``region`` and link them across levels.

    Levels are solved independently (optionally on ``threads`` workers);
    matching runs in level order, so the result does not depend on
    ``threads``.
    """
    levels = [int(n) for n in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigurationError("levels must be strictly increasing")
    region = region or Region.default_for(family)

    def solve(n):
        return truncation_zeros(truncate(family, n))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            zeros = list(pool.map(solve, levels))
    else:
        zeros = [solve(n) for n in levels]
    counts = [int(region.contains(z).sum()) for z in zeros]
    ids, steps = [], []
    next_id = 0
    for l, z in enumerate(zeros):
        if l == 0:
            owner, step = np.full(z.size, -1), np.full(z.size, np.nan)
        else:
            owner, step = _match(zeros[l - 1], z)
        tid = np.empty(z.size, dtype=int)
        for j in range(z.size):
            if owner[j] >= 0:
                tid[j] = ids[l - 1][owner[j]]
            else:
                tid[j] = next_id
                next_id += 1
        ids.append(tid)
        steps.append(step)
    return TruncationLadder(levels, zeros, counts, ids, steps, region)

