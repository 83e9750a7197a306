"""Weighted multivariate majorization of weighted vector tuples.

``(X, a)`` is majorized by ``(Y, b)`` when a row-stochastic ``R`` exists
with ``X = R Y`` and ``b = a R``; equivalently ``sum a_i phi(x_i) <=
sum b_j phi(y_j)`` for every convex ``phi``. The first form is decided
exactly by a phase-one simplex; an infeasible verdict comes with a
piecewise-linear convex function that violates the second form, read off
the terminal dual values.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import fsum

import numpy as np

from .errors import ConfigurationError, LPCyclingError

__all__ = [
    "ConvexBatteryReport",
    "ConvexFunction",
    "MajorizationResult",
    "PiecewiseLinearConvex",
    "StochasticCertificate",
    "Verdict",
    "WeightedTuple",
    "check_weighted_majorization",
    "choquet_compare",
    "convex_battery",
    "verify_certificate",
]

WEIGHT_TOL = 1e-12
CERT_TOL = 1e-8
FEASIBILITY_TOL = 1e-9
MAX_PIVOTS = 1_000_000


def _as_vectors(vectors) -> np.ndarray:
    v = np.asarray(vectors)
    if np.iscomplexobj(v) or v.ndim == 1:
        v = np.asarray(v, dtype=complex).ravel()
        return np.column_stack([v.real, v.imag])
    return np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class WeightedTuple:
    """A list of vectors in R^d with probability weights.

    Complex 1-d input is read as planar vectors. Weights must be positive
    and sum to one within ``weight_tol``; a single vector carries weight 1.
    """

    vectors: np.ndarray
    weights: np.ndarray
    weight_tol: float = WEIGHT_TOL

    def __post_init__(self):
        x = _as_vectors(self.vectors)
        w = np.asarray(self.weights, dtype=float).ravel()
        if x.shape[0] != w.size:
            raise ConfigurationError(f"{x.shape[0]} vectors but {w.size} weights")
        if x.shape[0] == 0:
            raise ConfigurationError("weighted tuple is empty")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise ConfigurationError("vectors and weights must be finite")
        if np.any(w <= 0) or np.any(w > 1):
            raise ConfigurationError("weights must lie in (0, 1]")
        if abs(fsum(w) - 1.0) > self.weight_tol:
            raise ConfigurationError(f"weights sum to {fsum(w)!r}, not 1")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "vectors", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, vectors) -> "WeightedTuple":
        x = _as_vectors(vectors)
        return cls(x, np.full(x.shape[0], 1.0 / x.shape[0]))

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def barycenter(self) -> np.ndarray:
        return self.weights @ self.vectors

    def as_complex(self) -> np.ndarray:
        if self.dim != 2:
            raise ValueError("only planar tuples have a complex form")
        return self.vectors[:, 0] + 1j * self.vectors[:, 1]


@dataclass(frozen=True)
class StochasticCertificate:
    """Row-stochastic ``r`` with its measured residuals."""

    r: np.ndarray
    row_residual: float
    mix_residual: float
    weight_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.row_residual, self.mix_residual, self.weight_residual)

    def certifies(self, tol: float = CERT_TOL) -> bool:
        return bool(self.r.min(initial=0.0) >= -1e-12 and self.max_residual <= tol)


def verify_certificate(r, x: WeightedTuple, y: WeightedTuple) -> tuple[float, float, float]:
    """``(row, mix, weight)`` residuals of ``r`` for ``x`` majorized by ``y``."""
    r = np.asarray(r, dtype=float)
    if r.shape != (x.size, y.size):
        raise ValueError(f"certificate shape {r.shape} != {(x.size, y.size)}")
    if x.dim != y.dim:
        raise ValueError("tuples live in different dimensions")
    row = np.abs(r.sum(axis=1) - 1.0).max()
    mix = np.linalg.norm(x.vectors - r @ y.vectors, axis=1).max()
    weight = np.abs(y.weights - x.weights @ r).max()
    return float(row), float(mix), float(weight)


def make_certificate(r, x: WeightedTuple, y: WeightedTuple) -> StochasticCertificate:
    return StochasticCertificate(np.asarray(r, dtype=float), *verify_certificate(r, x, y))


# ---------------------------------------------------------------------------
# Convex test functions


@dataclass(frozen=True)
class ConvexFunction:
    """A convex function of a planar (complex) argument.

    ``kind`` is one of ``"support"`` (``max(0, Re(e^{-i theta}(z - c)))``),
    ``"power"`` (``|z - c|^alpha``) or ``"linear"`` (``Re(e^{-i theta} z)``).
    """

    kind: str
    center: complex = 0j
    theta: float = 0.0
    alpha: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "support":
            return np.maximum(0.0, (np.exp(-1j * self.theta) * (z - self.center)).real)
        if self.kind == "power":
            return np.abs(z - self.center) ** self.alpha
        if self.kind == "linear":
            return (np.exp(-1j * self.theta) * z).real
        raise ValueError(f"unknown convex function kind {self.kind!r}")

    @property
    def nonnegative(self) -> bool:
        return self.kind != "linear"

    def __str__(self):
        c = f"{self.center.real:.6g}{self.center.imag:+.6g}j"
        if self.kind == "support":
            return f"max(0, Re(exp(-{self.theta:.6g}j) * (z - ({c}))))"
        if self.kind == "power":
            return f"|z - ({c})|^{self.alpha:g}"
        return f"Re(exp(-{self.theta:.6g}j) * z)"


@dataclass(frozen=True)
class PiecewiseLinearConvex:
    """``phi(x) = max_p (slopes[p] . x + offsets[p])`` on R^d."""

    slopes: np.ndarray
    offsets: np.ndarray

    def __call__(self, x) -> np.ndarray:
        x = _as_vectors(x)
        return (x @ self.slopes.T + self.offsets).max(axis=1)

    def violation(self, x: WeightedTuple, y: WeightedTuple) -> float:
        """``sum a_i phi(x_i) - sum b_j phi(y_j)``; positive means the convex-function inequality fails."""
        return fsum(x.weights * self(x.vectors)) - fsum(y.weights * self(y.vectors))

    def __str__(self):
        parts = []
        for s, c in zip(self.slopes, self.offsets):
            terms = " + ".join(f"{v:.17g}*x{k + 1}" for k, v in enumerate(s))
            parts.append(f"{terms} + {c:.17g}")
        return "max(" + ", ".join(parts) + ")"


@dataclass(frozen=True)
class ConvexBatteryReport:
    worst_margin: float
    worst_function: str
    evaluations: int

    def refutes(self, tol: float) -> bool:
        return self.worst_margin < -tol


# ---------------------------------------------------------------------------
# Phase-one simplex


@dataclass
class _Phase1:
    solution: np.ndarray
    objective: float
    duals: np.ndarray
    pivots: int


def _phase_one(a: np.ndarray, b: np.ndarray, pivot_tol: float = 1e-11,
               max_pivots: int = MAX_PIVOTS) -> _Phase1:
    """Minimise the sum of artificials for ``a x = b, x >= 0`` with Bland's rule.

    Returns the primal point, the optimal artificial objective and the dual
    vector ``u`` of the phase-one program (``a^T u <= 0``, ``b^T u`` equal to
    the objective), expressed for the original row signs.
    """
    m, nvar = a.shape
    sign = np.where(b < 0, -1.0, 1.0)
    a = a * sign[:, None]
    b = b * sign
    tab = np.zeros((m + 1, nvar + m + 1))
    tab[:m, :nvar] = a
    tab[:m, nvar:nvar + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :nvar] = -a.sum(axis=0)
    tab[m, -1] = -b.sum()
    basis = np.arange(nvar, nvar + m)
    scale = max(1.0, np.abs(a).max(initial=0.0))
    tol = pivot_tol * scale
    pivots = 0
    while True:
        cost = tab[m, :-1]
        candidates = np.flatnonzero(cost < -tol)
        if candidates.size == 0:
            break
        col = candidates[0]
        column = tab[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            # unbounded direction cannot occur in phase one (objective >= 0)
            tab[m, col] = 0.0
            continue
        ratios = tab[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = tied[np.argmin(basis[tied])]
        tab[row] /= tab[row, col]
        factors = tab[:, col].copy()
        factors[row] = 0.0
        tab -= np.outer(factors, tab[row])
        basis[row] = col
        pivots += 1
        if pivots >= max_pivots:
            raise LPCyclingError(f"simplex exceeded {max_pivots} pivots")
    x = np.zeros(nvar + m)
    x[basis] = tab[:m, -1]
    duals = (1.0 - tab[m, nvar:nvar + m]) * sign
    return _Phase1(np.maximum(x[:nvar], 0.0), float(-tab[m, -1]), duals, pivots)


def _constraints(x: WeightedTuple, y: WeightedTuple):
    m, n, d = x.size, y.size, x.dim
    rows = []
    rhs = []
    # row sums
    for i in range(m):
        r = np.zeros((m, n))
        r[i] = 1.0
        rows.append(r.ravel())
        rhs.append(1.0)
    # mixing equations
    for i in range(m):
        for c in range(d):
            r = np.zeros((m, n))
            r[i] = y.vectors[:, c]
            rows.append(r.ravel())
            rhs.append(x.vectors[i, c])
    # weighted column sums; the last is implied by the others
    for j in range(n - 1):
        r = np.zeros((m, n))
        r[:, j] = x.weights
        rows.append(r.ravel())
        rhs.append(y.weights[j])
    return np.array(rows), np.array(rhs)


@dataclass(frozen=True)
class MajorizationResult:
    """Outcome of :func:`check_weighted_majorization`.

    Exactly one of ``certificate`` (feasible) and ``witness`` (infeasible)
    is set. ``witness_violation`` is the directly re-evaluated violation of
    the witness, normalised to unit Lipschitz constant.
    """

    feasible: bool
    certificate: StochasticCertificate | None = None
    witness: PiecewiseLinearConvex | None = None
    witness_violation: float = 0.0
    objective: float = 0.0
    pivots: int = 0

    def __bool__(self):
        return self.feasible


def _witness_from_duals(duals, x: WeightedTuple, y: WeightedTuple) -> PiecewiseLinearConvex:
    m, d = x.size, x.dim
    alpha = duals[:m]
    beta = duals[m:m + m * d].reshape(m, d)
    slopes = beta / x.weights[:, None]
    offsets = alpha / x.weights
    lip = np.linalg.norm(slopes, axis=1).max()
    if lip > 0:
        slopes, offsets = slopes / lip, offsets / lip
    return PiecewiseLinearConvex(slopes, offsets)


def _prune(phi: PiecewiseLinearConvex, x: WeightedTuple, y: WeightedTuple) -> PiecewiseLinearConvex:
    pts = np.vstack([x.vectors, y.vectors])
    active = np.unique(np.argmax(pts @ phi.slopes.T + phi.offsets, axis=1))
    phi = PiecewiseLinearConvex(phi.slopes[active], phi.offsets[active])
    target = phi.violation(x, y)
    p = 0
    while p < phi.offsets.size and phi.offsets.size > 1:
        keep = np.arange(phi.offsets.size) != p
        trial = PiecewiseLinearConvex(phi.slopes[keep], phi.offsets[keep])
        if trial.violation(x, y) >= 0.5 * target:
            phi = trial
        else:
            p += 1
    return phi


def check_weighted_majorization(x: WeightedTuple, y: WeightedTuple, tol: float = CERT_TOL,
                                feasibility_tol: float = FEASIBILITY_TOL) -> MajorizationResult:
    """Decide whether ``x`` is weightily majorized by ``y``.

    Feasible results carry a :class:`StochasticCertificate`; infeasible ones
    a piecewise-linear convex function whose violation was re-verified by
    direct evaluation.
    """
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    a, b = _constraints(x, y)
    lp = _phase_one(a, b)
    if lp.objective < feasibility_tol:
        r = lp.solution.reshape(x.size, y.size)
        return MajorizationResult(True, certificate=make_certificate(r, x, y),
                                  objective=lp.objective, pivots=lp.pivots)
    phi = _prune(_witness_from_duals(lp.duals, x, y), x, y)
    return MajorizationResult(False, witness=phi, witness_violation=phi.violation(x, y),
                              objective=lp.objective, pivots=lp.pivots)


# ---------------------------------------------------------------------------
# Convex battery and Choquet comparison


def battery_functions(points, angles: int = 24, grid: int = 9,
                      alphas=(1.0, 2.0, 3.0, 4.0), nonnegative_only: bool = False):
    """The planar convex test family centred on a grid over ``points``' bounding box."""
    z = np.asarray(points, dtype=complex).ravel()
    xs = np.linspace(z.real.min(), z.real.max(), grid)
    ys = np.linspace(z.imag.min(), z.imag.max(), grid)
    centers = (xs[:, None] + 1j * ys[None, :]).ravel()
    thetas = 2.0 * np.pi * np.arange(angles) / angles
    funcs = []
    if not nonnegative_only:
        funcs += [ConvexFunction("linear", theta=t) for t in thetas]
    for c in centers:
        funcs += [ConvexFunction("support", complex(c), float(t)) for t in thetas]
        funcs += [ConvexFunction("power", complex(c), alpha=float(al)) for al in alphas]
    return funcs


def battery_margins(funcs, x_points, x_weights, y_points, y_weights) -> np.ndarray:
    """``sum y_w phi(y) - sum x_w phi(x)`` for every function."""
    lhs = np.array([np.dot(x_weights, f(x_points)) for f in funcs])
    rhs = np.array([np.dot(y_weights, f(y_points)) for f in funcs])
    return rhs - lhs


def convex_battery(x: WeightedTuple, y: WeightedTuple, angles: int = 24, grid: int = 9,
                   alphas=(1.0, 2.0, 3.0, 4.0)) -> ConvexBatteryReport:
    """Smallest RHS - LHS of the convex-function condition over a planar battery."""
    if x.dim != 2 or y.dim != 2:
        raise ValueError("the convex battery is planar (d = 2)")
    funcs = battery_functions(y.as_complex(), angles, grid, alphas)
    margins = battery_margins(funcs, x.as_complex(), x.weights, y.as_complex(), y.weights)
    worst = int(np.argmin(margins))
    return ConvexBatteryReport(float(margins[worst]), str(funcs[worst]), len(funcs))


class Verdict(enum.Enum):
    DOMINATED = "Dominated"
    NOT_DOMINATED = "NotDominated"
    UNDETERMINED = "Undetermined-by-battery"


@dataclass(frozen=True)
class ChoquetComparison:
    verdict: Verdict
    result: MajorizationResult
    battery: ConvexBatteryReport | None = field(default=None)


def choquet_compare(x: WeightedTuple, y: WeightedTuple, tol: float = CERT_TOL) -> ChoquetComparison:
    """Is the measure of ``y`` a dilation of the measure of ``x``?

    The LP decides; the battery report is attached for planar
    non-dominated pairs as an advisory second opinion.
    """
    result = check_weighted_majorization(x, y, tol)
    if result.feasible:
        return ChoquetComparison(Verdict.DOMINATED, result)
    battery = convex_battery(x, y) if x.dim == 2 else None
    return ChoquetComparison(Verdict.NOT_DOMINATED, result, battery)
