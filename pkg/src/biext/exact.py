"""Gaussian rationals and field-generic linear algebra on numpy arrays.

Matrices are ordinary 2D numpy arrays.  An array of dtype ``object`` holding
:class:`GaussianRational` entries is treated exactly (zero tests are exact);
any other dtype is treated as binary64 complex with a relative tolerance.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np

FLOAT_TOL = 1e-12


class GaussianRational:
    """An element ``re + i*im`` of Q(i) with :class:`Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Fraction(im)
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Rational, str)):
            return cls(Fraction(x))
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, float):
            return cls(Fraction(x))
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return cls(Fraction(x[0]), Fraction(x[1]))
        raise TypeError(f"cannot coerce {x!r} to GaussianRational")

    def _other(self, other):
        try:
            return GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational((self.re * o.re + self.im * o.im) / n,
                                (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __abs__(self):
        return abs(complex(self))

    def __eq__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __repr__(self):
        if self.im == 0:
            return f"GR({self.re})"
        return f"GR({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"{self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i"


I = GaussianRational(0, 1)


class LinearAlgebraError(ValueError):
    pass


def is_exact(A) -> bool:
    return np.asarray(A).dtype == object


def gaussian_array(entries, pairs: bool = False) -> np.ndarray:
    """Exact object array from nested numbers/strings; ``pairs=True`` reads a trailing [re, im] axis."""
    a = np.asarray(entries, dtype=object)
    if pairs:
        shape = a.shape[:-1]
        flat = [GaussianRational(Fraction(x[0]), Fraction(x[1])) for x in a.reshape(-1, 2)]
    else:
        shape = a.shape
        flat = [GaussianRational.coerce(x) for x in a.reshape(-1)]
    out = np.empty(len(flat), dtype=object)
    out[:] = flat
    return out.reshape(shape)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        for idx in np.ndindex(*out.shape):
            out[idx] = GaussianRational(0)
        return out
    return np.zeros(shape, dtype=complex)


def eye(n: int, exact: bool) -> np.ndarray:
    out = zeros((n, n), exact)
    for i in range(n):
        out[i, i] = GaussianRational(1) if exact else 1.0
    return out


def conj(A) -> np.ndarray:
    return np.conjugate(A)


def to_complex(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == object:
        return np.vectorize(complex, otypes=[complex])(A) if A.size else A.astype(complex)
    return A.astype(complex)


def _tol(A) -> float | None:
    if is_exact(A):
        return None
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    return FLOAT_TOL * max(1.0, scale)


def _nonzero(x, tol) -> bool:
    return bool(x) if tol is None else abs(x) > tol


def rref(A) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns (partial pivoting for floats)."""
    A = np.array(A, copy=True)
    exact = is_exact(A)
    if not exact:
        A = A.astype(complex)
    tol = _tol(A)
    m, n = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        col = A[r:, c]
        if exact:
            cand = [i for i in range(m - r) if col[i]]
            if not cand:
                continue
            k = cand[0] + r
        else:
            k = int(np.argmax(np.abs(col))) + r
            if abs(A[k, c]) <= tol:
                A[r:, c] = 0
                continue
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = A[r] / A[r, c]
        for i in range(m):
            if i != r and _nonzero(A[i, c], tol):
                A[i] = A[i] - A[i, c] * A[r]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(A) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(A)[1])


def column_basis(A) -> np.ndarray:
    """Independent columns of ``A`` spanning its column space (first-found order)."""
    A = np.asarray(A)
    if A.size == 0:
        return A.reshape(A.shape[0], 0)
    _, piv = rref(A)
    return A[:, piv]


def nullspace(A) -> np.ndarray:
    """Columns spanning ``{x : A x = 0}``."""
    A = np.asarray(A)
    exact = is_exact(A)
    m, n = A.shape
    if n == 0:
        return zeros((0, 0), exact)
    if m == 0:
        return eye(n, exact)
    R, piv = rref(A)
    free = [j for j in range(n) if j not in piv]
    N = zeros((n, len(free)), exact)
    one = GaussianRational(1) if exact else 1.0
    for k, f in enumerate(free):
        N[f, k] = one
        for i, p in enumerate(piv):
            N[p, k] = -R[i, f]
    return N


def hstack(*blocks, rows: int | None = None, exact: bool | None = None) -> np.ndarray:
    blocks = [np.asarray(b) for b in blocks]
    if exact is None:
        exact = any(is_exact(b) for b in blocks)
    if rows is None:
        rows = blocks[0].shape[0]
    parts = [b.reshape(rows, -1) for b in blocks]
    if not parts:
        return zeros((rows, 0), exact)
    return np.concatenate(parts, axis=1) if exact else np.concatenate(parts, axis=1).astype(complex)


def span_sum(*subspaces) -> np.ndarray:
    return column_basis(hstack(*subspaces))


def intersect(U, V) -> np.ndarray:
    """Basis of col(U) ∩ col(V)."""
    U = np.asarray(U)
    V = np.asarray(V)
    n = U.shape[0]
    exact = is_exact(U) or is_exact(V)
    if U.shape[1] == 0 or V.shape[1] == 0:
        return zeros((n, 0), exact)
    U = column_basis(U)
    V = column_basis(V)
    N = nullspace(hstack(U, -V))
    if N.shape[1] == 0:
        return zeros((n, 0), exact)
    return column_basis(U @ N[: U.shape[1]])


def contains(U, v) -> bool:
    """Whether every column of ``v`` lies in col(U)."""
    U = np.asarray(U)
    v = np.asarray(v).reshape(U.shape[0], -1)
    return rank(hstack(U, v)) == rank(U)


def solve(A, B) -> np.ndarray:
    """Exact/float solution ``X`` of ``A X = B`` for consistent systems (unique if A has full column rank)."""
    A = np.asarray(A)
    B = np.asarray(B)
    vec = B.ndim == 1
    B2 = B.reshape(A.shape[0], -1)
    exact = is_exact(A) or is_exact(B2)
    if exact:
        A = _as_exact(A)
        B2 = _as_exact(B2)
    R, piv = rref(hstack(A, B2))
    n = A.shape[1]
    if any(p >= n for p in piv):
        raise LinearAlgebraError("inconsistent linear system")
    X = zeros((n, B2.shape[1]), exact)
    for i, p in enumerate(piv):
        X[p] = R[i, n:]
    return X.reshape(-1) if vec else X


def annihilator(U, n: int | None = None) -> np.ndarray:
    """Rows ``λ`` (as a matrix) with ``λ @ U = 0``."""
    U = np.asarray(U)
    if n is None:
        n = U.shape[0]
    if U.shape[1] == 0:
        return eye(n, is_exact(U))
    return nullspace(U.T).T


def row_basis(R) -> np.ndarray:
    R = np.asarray(R)
    return column_basis(R.T).T


def _as_exact(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == object:
        return np.vectorize(GaussianRational.coerce, otypes=[object])(A) if A.size else A
    out = np.empty(A.shape, dtype=object)
    for idx in np.ndindex(*A.shape):
        out[idx] = GaussianRational.coerce(complex(A[idx]))
    return out


def as_exact(A) -> np.ndarray:
    return _as_exact(A)


def is_zero_matrix(A, tol: float | None = None) -> bool:
    A = np.asarray(A)
    if A.size == 0:
        return True
    if is_exact(A):
        return not any(bool(x) for x in A.flat)
    t = FLOAT_TOL if tol is None else tol
    return bool(np.max(np.abs(A)) <= t)
