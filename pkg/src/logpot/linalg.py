"""Dense complex linear algebra kernels.

Orthonormal complements, a complex Schur decomposition (Hessenberg reduction
followed by single-shift QR with Wilkinson shifts), a Hermitian eigensolver,
multiplicative and additive compound matrices, and eigenvalue multiset
matching.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, ConvergenceError

__all__ = [
    "SchurForm",
    "additive_compound",
    "as_complex_matrix",
    "collinear_frame",
    "compound",
    "hadamard",
    "hermitian_eigen",
    "index_sets",
    "match_multisets",
    "orthonormal_complement",
    "schur_decompose",
]

EPS = np.finfo(float).eps
SAFMIN = np.finfo(float).tiny
MAX_COMPOUND_DIM = 10_000
MAX_SCHUR_DIM = 2048
SWEEPS_PER_EIGENVALUE = 30


def as_complex_matrix(a, square=False) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def index_sets(n: int, k: int) -> list[tuple[int, ...]]:
    """All strictly increasing k-tuples from ``range(n)``, lexicographic."""
    return list(itertools.combinations(range(n), k))


def orthonormal_complement(v, tol: float = 1e-12) -> np.ndarray:
    """Return an ``n x (n-1)`` matrix whose columns span the complement of ``v``.

    The basis is the trailing block of the Householder reflector that maps
    ``v`` onto a multiple of the first standard basis vector, so it is
    deterministic and exactly orthonormal up to rounding.
    """
    v = np.asarray(v, dtype=complex).ravel()
    n = v.size
    if n < 2:
        raise ValueError("orthonormal complement needs dimension >= 2")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"vector is not unit length (norm={norm!r})")
    phase = v[0] / abs(v[0]) if v[0] != 0 else 1.0
    u = v.copy()
    u[0] += phase
    uu = np.vdot(u, u).real
    h = np.eye(n, dtype=complex) - (2.0 / uu) * np.outer(u, u.conj())
    return h[:, 1:]


# ---------------------------------------------------------------------------
# Schur decomposition


@dataclass(frozen=True)
class SchurForm:
    """``a = q @ t @ q.conj().T`` with ``q`` unitary and ``t`` upper triangular."""

    q: np.ndarray
    t: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.diag(self.t).copy()

    def residuals(self, a) -> dict[str, float]:
        a = np.asarray(a, dtype=complex)
        n = a.shape[0]
        scale = max(np.abs(a).max(), SAFMIN) if n else 1.0
        tscale = max(np.abs(self.t).max(), SAFMIN) if n else 1.0
        return {
            "unitarity": float(np.abs(self.q.conj().T @ self.q - np.eye(n)).max(initial=0.0)),
            "triangularity": float(np.abs(np.tril(self.t, -1)).max(initial=0.0)) / tscale,
            "reconstruction": float(
                np.abs(a - self.q @ self.t @ self.q.conj().T).max(initial=0.0)) / scale,
        }


def _givens(x: complex, y: complex) -> tuple[float, complex]:
    # G = [[c, s], [-conj(s), c]] maps (x, y) to (r, 0)
    ax, ay = abs(x), abs(y)
    if ay == 0.0:
        return 1.0, 0j
    if ax == 0.0:
        return 0.0, np.conj(y) / ay
    r = np.hypot(ax, ay)
    return ax / r, (x / ax) * np.conj(y) / r


def _rotate_rows(h, i, c, s, cols):
    top = h[i, cols].copy()
    bot = h[i + 1, cols]
    h[i, cols] = c * top + s * bot
    h[i + 1, cols] = -np.conj(s) * top + c * bot


def _rotate_cols(h, i, c, s, rows):
    # right-multiply columns (i, i+1) by G^H
    left = h[rows, i].copy()
    right = h[rows, i + 1]
    h[rows, i] = c * left + np.conj(s) * right
    h[rows, i + 1] = -s * left + c * right


def _hessenberg(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=complex)
    for j in range(n - 2):
        x = h[j + 1:, j].copy()
        alpha = np.linalg.norm(x[1:])
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        u = x
        u[0] += phase * np.linalg.norm(x)
        u /= np.linalg.norm(u)
        h[j + 1:, :] -= 2.0 * np.outer(u, u.conj() @ h[j + 1:, :])
        h[:, j + 1:] -= 2.0 * np.outer(h[:, j + 1:] @ u, u.conj())
        q[:, j + 1:] -= 2.0 * np.outer(q[:, j + 1:] @ u, u.conj())
        h[j + 2:, j] = 0.0
    return h, q


def _negligible(h: np.ndarray, k: int, lo: int, hi: int) -> bool:
    """Deflation test for the subdiagonal entry ``h[k, k-1]`` inside the block ``lo..hi``."""
    sub = abs(h[k, k - 1])
    if sub <= SAFMIN:
        return True
    tst = abs(h[k - 1, k - 1]) + abs(h[k, k])
    if tst == 0.0:
        if k - 2 >= lo:
            tst += abs(h[k - 1, k - 2].real)
        if k + 1 <= hi:
            tst += abs(h[k + 1, k].real)
    if sub > EPS * tst:
        return False
    # Ahues-Tisseur refinement of the standard test, as in LAPACK's xLAHQR
    ab = max(sub, abs(h[k - 1, k]))
    ba = min(sub, abs(h[k - 1, k]))
    diff = abs(h[k - 1, k - 1] - h[k, k])
    aa = max(abs(h[k, k]), diff)
    bb = min(abs(h[k, k]), diff)
    s = aa + ab
    return ba * (ab / s) <= max(SAFMIN, EPS * (bb * (aa / s)))


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mean = 0.5 * (a + d)
    lam1, lam2 = mean + disc, mean - disc
    return lam1 if abs(lam1 - d) <= abs(lam2 - d) else lam2


def schur_decompose(a) -> SchurForm:
    """Complex Schur decomposition ``a = Q T Q^*``.

    Raises
    ------
    ConvergenceError
        If an eigenvalue fails to deflate within ``30 * max(10, n)`` QR sweeps.
    """
    a = as_complex_matrix(a, square=True)
    n = a.shape[0]
    if n > MAX_SCHUR_DIM:
        raise CapacityError(f"dimension {n} exceeds the eigensolver cap {MAX_SCHUR_DIM}")
    if n == 0:
        return SchurForm(np.eye(0, dtype=complex), np.zeros((0, 0), complex))
    h, q = _hessenberg(a)
    max_its = SWEEPS_PER_EIGENVALUE * max(10, n)
    hi = n - 1
    its = 0
    while hi > 0:
        lo = hi
        while lo > 0 and not _negligible(h, lo, 0, hi):
            lo -= 1
        if lo > 0:
            h[lo, lo - 1] = 0.0
        if lo == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_its:
            raise ConvergenceError(
                f"QR iteration did not deflate eigenvalue {hi} within {max_its} sweeps")
        # exceptional shifts every 10 sweeps without deflation, alternating ends
        if its % 20 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        elif its % 10 == 0:
            shift = h[lo, lo] + 0.75 * abs(h[lo + 1, lo])
        else:
            shift = _wilkinson_shift(h, hi)
        x, y = h[lo, lo] - shift, h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x, y = h[k, k - 1], h[k + 1, k - 1]
            c, s = _givens(x, y)
            _rotate_rows(h, k, c, s, slice(max(k - 1, 0), n))
            _rotate_cols(h, k, c, s, slice(0, min(k + 3, hi + 1)))
            _rotate_cols(q, k, c, s, slice(0, n))
            if k > lo:
                h[k + 1, k - 1] = 0.0
    return SchurForm(q, np.triu(h))


def hermitian_eigen(a, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and a unitary eigenvector matrix of a Hermitian matrix."""
    a = as_complex_matrix(a, square=True)
    scale = np.abs(a).max(initial=0.0)
    if np.abs(a - a.conj().T).max(initial=0.0) > tol * max(scale, SAFMIN):
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    return vals, vecs


# ---------------------------------------------------------------------------
# Compound matrices


def _check_compound(n: int, k: int) -> int:
    if not 1 <= k <= n:
        raise ValueError(f"compound order k={k} out of range 1..{n}")
    size = comb(n, k)
    if size > MAX_COMPOUND_DIM:
        raise CapacityError(f"C({n},{k}) = {size} exceeds the cap {MAX_COMPOUND_DIM}")
    return size


def compound(m, k: int, rows=None) -> np.ndarray:
    """k-th (multiplicative) compound matrix: all k x k minors, lexicographically indexed.

    ``rows`` optionally restricts the output to the listed row index sets
    (each a strictly increasing tuple); the columns are always all of them.
    """
    m = as_complex_matrix(m, square=True)
    n = m.shape[0]
    _check_compound(n, k)
    cols = np.array(index_sets(n, k), dtype=int).reshape(-1, k)
    rws = cols if rows is None else np.array(list(rows), dtype=int).reshape(-1, k)
    if k == 1:
        return m[rws[:, 0]][:, cols[:, 0]]
    if k == 2:
        r0, r1 = rws[:, 0, None], rws[:, 1, None]
        c0, c1 = cols[None, :, 0], cols[None, :, 1]
        return m[r0, c0] * m[r1, c1] - m[r0, c1] * m[r1, c0]
    out = np.empty((len(rws), len(cols)), dtype=complex)
    chunk = max(1, 2_000_000 // (len(cols) * k * k))
    for start in range(0, len(rws), chunk):
        r = rws[start:start + chunk]
        sub = m[r[:, None, :, None], cols[None, :, None, :]]
        out[start:start + chunk] = np.linalg.det(sub)
    return out


def additive_compound(c, k: int) -> np.ndarray:
    """k-th additive compound: the coefficient of t in ``compound(I + t C, k)``."""
    c = as_complex_matrix(c, square=True)
    n = c.shape[0]
    size = _check_compound(n, k)
    sets = index_sets(n, k)
    position = {s: i for i, s in enumerate(sets)}
    diag = np.diag(c)
    out = np.zeros((size, size), dtype=complex)
    for i, s in enumerate(sets):
        out[i, i] = diag[list(s)].sum()
        members = set(s)
        for r, ir in enumerate(s):
            rest = s[:r] + s[r + 1:]
            for j in range(n):
                if j in members:
                    continue
                t = tuple(sorted(rest + (j,)))
                col = t.index(j)
                out[i, position[t]] = (-1) ** (r + col) * c[ir, j]
    return out


def hadamard(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a * b


# ---------------------------------------------------------------------------
# Small geometric helpers


class Matching(NamedTuple):
    distance: float
    pairs: list[tuple[int, int]]


def match_multisets(a, b) -> Matching:
    """Greedy nearest-pair matching of two equal-size point multisets.

    Repeatedly pairs the globally closest unmatched points; ``distance`` is
    the largest distance among the chosen pairs.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError(f"multisets differ in size: {a.size} vs {b.size}")
    d = np.abs(a[:, None] - b[None, :])
    pairs = []
    worst = 0.0
    for _ in range(a.size):
        i, j = np.unravel_index(np.argmin(d), d.shape)
        worst = max(worst, float(d[i, j]))
        pairs.append((int(i), int(j)))
        d[i, :] = np.inf
        d[:, j] = np.inf
    return Matching(worst, pairs)


def collinear_frame(points, rel_tol: float = 1e-10):
    """Return ``(center, direction)`` if the planar points are collinear, else None.

    The test compares the singular values of the centered 2 x n coordinate
    matrix, which makes it scale free and rotation invariant. ``direction``
    is a unit complex number along the best-fit line.
    """
    z = np.asarray(points, dtype=complex).ravel()
    center = z.mean()
    if z.size < 2:
        return center, 1.0 + 0j
    coords = np.vstack([(z - center).real, (z - center).imag])
    u, sv, _ = np.linalg.svd(coords)
    if sv[0] == 0.0:
        return center, 1.0 + 0j
    if sv[1] > rel_tol * sv[0]:
        return None
    direction = complex(u[0, 0], u[1, 0])
    return center, direction / abs(direction)
