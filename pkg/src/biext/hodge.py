"""Real Hodge structures, real mixed Hodge structures and real biextensions.

Vectors are columns in a fixed basis of the complexified space.  Complex
conjugation is an antilinear involution ``v -> J @ conj(v)`` given by its
matrix ``J`` (with ``J @ conj(J) = 1``).  Subspaces are matrices whose columns
span them.  Entries may be exact (:class:`~biext.exact.GaussianRational`) or
binary64; every operation keeps exact inputs exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import exact as ex
from .exact import GaussianRational, I


class HodgeError(ValueError):
    """Invalid Hodge-theoretic input."""


class NonPureError(HodgeError):
    """Filtration and conjugation do not define a pure structure of the stated weight."""


class FramingError(HodgeError):
    """Framing maps are not isomorphisms onto the weight graded quotients."""


class Ext1RangeError(HodgeError):
    """Weights outside the two cases where Ext^1 of real Hodge structures is computed."""


def _one(exact: bool):
    return GaussianRational(1) if exact else 1.0


def _imag_unit(exact: bool):
    return I if exact else 1j


def conjugate(J: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Apply the conjugation ``J`` to the columns of ``V``."""
    return J @ ex.conj(V)


def filtration_level(F: Mapping[int, np.ndarray], p: int, n: int, exact: bool) -> np.ndarray:
    """``F^p`` for a decreasing filtration given at its jump indices.

    ``F^p`` is the space stored at the smallest key ``>= p``; above the top key
    it is zero.
    """
    keys = sorted(k for k in F if k >= p)
    if not keys:
        return ex.zeros((n, 0), exact)
    return ex.column_basis(np.asarray(F[keys[0]]).reshape(n, -1))


def _same_span(U, V) -> bool:
    return ex.rank(U) == ex.rank(V) == ex.rank(ex.hstack(U, V))


def hodge_decompose(weight: int, F: Mapping[int, np.ndarray], conjugation: np.ndarray
                    ) -> dict[tuple[int, int], np.ndarray]:
    """Pieces ``E^{p,q} = F^p ∩ conj(F^q)`` (``p + q = weight``) of a pure structure.

    Raises :class:`NonPureError` if the pieces do not give a direct sum
    decomposition of the ambient space.
    """
    J = np.asarray(conjugation)
    n = J.shape[0]
    exact = ex.is_exact(J)
    if not F:
        raise NonPureError("empty Hodge filtration")
    top = max(F)
    bottom = min(min(F), weight - top)
    pieces: dict[tuple[int, int], np.ndarray] = {}
    for p in range(bottom, top + 1):
        q = weight - p
        Fp = filtration_level(F, p, n, exact)
        Fq_bar = conjugate(J, filtration_level(F, q, n, exact))
        E = ex.intersect(Fp, Fq_bar)
        if E.shape[1]:
            pieces[(p, q)] = E
    total = sum(E.shape[1] for E in pieces.values())
    if total != n or (pieces and ex.rank(ex.hstack(*pieces.values())) != n):
        raise NonPureError(
            f"bigrading ranks {sorted((k, v.shape[1]) for k, v in pieces.items())} "
            f"do not sum to ambient dimension {n} in weight {weight}")
    return pieces


@dataclass(frozen=True, eq=False)
class RealHodgeStructure:
    """A pure real Hodge structure given by its pieces ``E^{p,q}``."""

    weight: int
    conjugation: np.ndarray
    pieces: Mapping[tuple[int, int], np.ndarray]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        J = np.asarray(self.conjugation)
        n = J.shape[0]
        if not ex.is_zero_matrix(J @ ex.conj(J) - ex.eye(n, ex.is_exact(J))):
            raise HodgeError("conjugation matrix is not an involution")
        for (p, q), E in self.pieces.items():
            if p + q != self.weight:
                raise NonPureError(f"piece {(p, q)} has wrong weight for {self.weight}")
            partner = self.pieces.get((q, p))
            if partner is None or not _same_span(conjugate(J, E), partner):
                raise NonPureError(f"conjugation does not carry E^{(p, q)} to E^{(q, p)}")
        blocks = list(self.pieces.values())
        if n and (not blocks or ex.rank(ex.hstack(*blocks)) != n
                  or sum(b.shape[1] for b in blocks) != n):
            raise NonPureError("pieces do not form a direct sum decomposition")

    @classmethod
    def from_filtration(cls, weight: int, F: Mapping[int, np.ndarray], conjugation,
                        labels: Sequence[str] = ()) -> "RealHodgeStructure":
        J = np.asarray(conjugation)
        return cls(weight, J, hodge_decompose(weight, F, J), tuple(labels))

    @classmethod
    def tate(cls, twist: int = 1, exact: bool = True, labels: Sequence[str] = ()) -> "RealHodgeStructure":
        """``ℝ(twist)``: one-dimensional of type ``(-twist, -twist)``."""
        one = ex.eye(1, exact)
        return cls(-2 * twist, one, {(-twist, -twist): one}, tuple(labels))

    @property
    def dim(self) -> int:
        return np.asarray(self.conjugation).shape[0]

    @property
    def exact(self) -> bool:
        return ex.is_exact(self.conjugation)

    def hodge_numbers(self) -> dict[tuple[int, int], int]:
        return {k: v.shape[1] for k, v in self.pieces.items()}

    def filtration(self, p: int) -> np.ndarray:
        """``F^p`` reassembled from the pieces."""
        blocks = [E for (a, _), E in sorted(self.pieces.items()) if a >= p]
        if not blocks:
            return ex.zeros((self.dim, 0), self.exact)
        return ex.hstack(*blocks)

    def hodge_filtration(self) -> dict[int, np.ndarray]:
        return {p: self.filtration(p) for p, _ in self.pieces}

    def conj(self, V) -> np.ndarray:
        return conjugate(np.asarray(self.conjugation), np.asarray(V).reshape(self.dim, -1))

    def real_basis(self, p: int, q: int | None = None) -> np.ndarray:
        """A real basis (fixed by conjugation) of ``E^{p,p}``.

        Columns are chosen deterministically among the real and imaginary
        parts of the stored generators.
        """
        q = p if q is None else q
        if p != q:
            raise HodgeError("only E^{p,p} has a real form")
        E = self.pieces.get((p, p))
        if E is None:
            return ex.zeros((self.dim, 0), self.exact)
        two = GaussianRational(2) if self.exact else 2.0
        re = (E + self.conj(E)) / two
        im = (E - self.conj(E)) / (two * _imag_unit(self.exact))
        return ex.column_basis(ex.hstack(re, im))


def ext1_dim(E: RealHodgeStructure, K: RealHodgeStructure) -> int:
    """Real dimension of ``Ext^1_MHS(E, K)`` for pure real Hodge structures.

    Zero when ``k >= e - 1``; ``dim i Hom(E, K)_R^{-1,-1}`` when ``k = e - 2``.
    """
    e, k = E.weight, K.weight
    if k >= e - 1:
        return 0
    if k == e - 2:
        hk = K.hodge_numbers()
        return sum(d * hk.get((p - 1, q - 1), 0) for (p, q), d in E.hodge_numbers().items())
    raise Ext1RangeError(f"weights e={e}, k={k}: outside the computable range (k >= e-2 required)")


@dataclass(frozen=True, eq=False)
class RealMHS:
    """A real mixed Hodge structure on ``ℂ^n`` with the given conjugation."""

    conjugation: np.ndarray
    W: Mapping[int, np.ndarray]
    F: Mapping[int, np.ndarray]

    def __post_init__(self):
        J = np.asarray(self.conjugation)
        n = J.shape[0]
        if not ex.is_zero_matrix(J @ ex.conj(J) - ex.eye(n, ex.is_exact(J))):
            raise HodgeError("conjugation matrix is not an involution")
        prev = None
        for m in sorted(self.W):
            Wm = self.weight(m)
            if not _same_span(conjugate(J, Wm), Wm):
                raise HodgeError(f"W_{m} is not stable under conjugation")
            if prev is not None and not ex.contains(Wm, prev):
                raise HodgeError("weight filtration is not increasing")
            prev = Wm
        for m in sorted(self.W):
            self._check_graded_pure(m)

    @property
    def dim(self) -> int:
        return np.asarray(self.conjugation).shape[0]

    @property
    def exact(self) -> bool:
        return ex.is_exact(self.conjugation)

    def weight(self, m: int) -> np.ndarray:
        """``W_m`` (increasing; zero below the lowest stored index)."""
        n = self.dim
        keys = sorted(k for k in self.W if k <= m)
        if not keys:
            return ex.zeros((n, 0), self.exact)
        return ex.column_basis(np.asarray(self.W[keys[-1]]).reshape(n, -1))

    def hodge(self, p: int) -> np.ndarray:
        return filtration_level(self.F, p, self.dim, self.exact)

    def conj(self, V) -> np.ndarray:
        return conjugate(np.asarray(self.conjugation), np.asarray(V).reshape(self.dim, -1))

    def _check_graded_pure(self, m: int) -> None:
        Wm, Wl = self.weight(m), self.weight(m - 1)
        dm, dl = ex.rank(Wm), ex.rank(Wl)
        if dm == dl:
            return
        lo = min(self.F) - 1 if self.F else 0
        hi = max(self.F) + 1 if self.F else 0
        for p in range(min(lo, m - hi), max(hi, m - lo) + 1):
            A = ex.intersect(self.hodge(p), Wm)
            B = ex.intersect(self.conj(self.hodge(m - p + 1)), Wm)
            ra = ex.rank(ex.hstack(A, Wl)) - dl
            rb = ex.rank(ex.hstack(B, Wl)) - dl
            rab = ex.rank(ex.hstack(A, B, Wl)) - dl
            if ra + rb != dm - dl or rab != dm - dl:
                raise NonPureError(f"F does not induce a pure structure of weight {m} on Gr^W_{m}")


@dataclass(frozen=True)
class PeriodValue:
    """Real coordinates ``t`` standing for ``i * sum(t_a r_a)`` in ``iC_R^{-1,-1}``."""

    coords: tuple
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        for c in self.coords:
            if isinstance(c, GaussianRational):
                raise TypeError("period coordinates must be real")
            if not np.isfinite(float(c)):
                raise ValueError("period coordinates must be finite")
        if self.labels and len(self.labels) != len(self.coords):
            raise ValueError("labels/coords length mismatch")

    @classmethod
    def zeros(cls, n: int, labels: Sequence[str] = (), exact: bool = True) -> "PeriodValue":
        return cls(tuple(Fraction(0) if exact else 0.0 for _ in range(n)), tuple(labels))

    def __len__(self):
        return len(self.coords)

    def __add__(self, other: "PeriodValue") -> "PeriodValue":
        self._check(other)
        return PeriodValue(tuple(a + b for a, b in zip(self.coords, other.coords)), self.labels or other.labels)

    def __sub__(self, other: "PeriodValue") -> "PeriodValue":
        self._check(other)
        return PeriodValue(tuple(a - b for a, b in zip(self.coords, other.coords)), self.labels or other.labels)

    def __neg__(self) -> "PeriodValue":
        return PeriodValue(tuple(-a for a in self.coords), self.labels)

    def _check(self, other):
        if len(self.coords) != len(other.coords):
            raise ValueError("period dimension mismatch")

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords])


@dataclass(frozen=True, eq=False)
class RealBiextension:
    """A framed real biextension with graded quotients ``ℝ``, ``B`` (weight -1), ``C`` (weight -2).

    ``unit`` is a real vector lifting ``1 ∈ Gr^W_0``; the columns of ``b_frame``
    lift the basis of ``B`` into ``W_{-1}``; the columns of ``c_frame`` are the
    image of the basis of ``C`` and span ``W_{-2}``.
    """

    conjugation: np.ndarray
    F: Mapping[int, np.ndarray]
    unit: np.ndarray
    b_frame: np.ndarray
    c_frame: np.ndarray
    B: RealHodgeStructure
    C: RealHodgeStructure
    mhs: RealMHS = field(init=False, repr=False)

    def __post_init__(self):
        J = np.asarray(self.conjugation)
        n = J.shape[0]
        if self.B.weight != -1 or self.C.weight != -2:
            raise FramingError("B must have weight -1 and C weight -2")
        unit = np.asarray(self.unit).reshape(n, 1)
        Bf = np.asarray(self.b_frame).reshape(n, self.B.dim)
        Cf = np.asarray(self.c_frame).reshape(n, self.C.dim)
        if 1 + self.B.dim + self.C.dim != n:
            raise FramingError("ambient dimension is not 1 + dim B + dim C")
        frame = ex.hstack(unit, Bf, Cf)
        if ex.rank(frame) != n:
            raise FramingError("framing vectors are not a basis")
        W = {-2: Cf, -1: ex.hstack(Bf, Cf), 0: frame}
        object.__setattr__(self, "mhs", RealMHS(J, W, dict(self.F)))
        self._check_framing(unit, Bf, Cf)

    def _check_framing(self, unit, Bf, Cf):
        m = self.mhs
        W2, W1 = m.weight(-2), m.weight(-1)
        if not ex.is_zero_matrix(m.conj(Cf) - Cf @ np.asarray(self.C.conjugation)):
            raise FramingError("C framing does not respect real structures")
        if not ex.contains(W2, m.conj(Bf) - Bf @ np.asarray(self.B.conjugation)):
            raise FramingError("B framing does not respect real structures")
        if not ex.contains(W1, m.conj(unit) - unit):
            raise FramingError("unit is not real modulo W_{-1}")
        for p in range(-3, 2):
            if not _same_span(ex.intersect(m.hodge(p), W2), Cf @ self.C.filtration(p)):
                raise FramingError(f"F^{p} on W_-2 does not match C under the framing")
            lhs = ex.hstack(ex.intersect(m.hodge(p), W1), W2)
            rhs = ex.hstack(Bf @ self.B.filtration(p), W2)
            if not _same_span(lhs, rhs):
                raise FramingError(f"F^{p} on Gr^W_-1 does not match B under the framing")
        if ex.rank(ex.hstack(m.hodge(0), W1)) != self.dim or ex.rank(ex.hstack(m.hodge(1), W1)) != ex.rank(W1):
            raise FramingError("Gr^W_0 is not of type (0,0)")

    @property
    def dim(self) -> int:
        return np.asarray(self.conjugation).shape[0]

    @property
    def exact(self) -> bool:
        return ex.is_exact(self.conjugation)

    @property
    def frame(self) -> np.ndarray:
        n = self.dim
        return ex.hstack(np.asarray(self.unit).reshape(n, 1), np.asarray(self.b_frame).reshape(n, -1),
                         np.asarray(self.c_frame).reshape(n, -1))

    def epsilon(self) -> np.ndarray:
        """Row functional ``V -> Gr^W_0 ≅ ℝ``."""
        n = self.dim
        e1 = ex.zeros((n, 1), self.exact)
        e1[0, 0] = _one(self.exact)
        return ex.solve(self.frame.T, e1).reshape(1, n)

    def period_labels(self) -> tuple[str, ...]:
        k = self.C.real_basis(-1).shape[1]
        if self.C.labels and len(self.C.labels) == k:
            return tuple(self.C.labels)
        return tuple(f"c{a}" for a in range(k))


def split_biextension(B: RealHodgeStructure, C: RealHodgeStructure) -> RealBiextension:
    """The split biextension ``ℝ ⊕ B ⊕ C`` in block coordinates."""
    exact = B.exact or C.exact
    b, c = B.dim, C.dim
    n = 1 + b + c
    J = ex.zeros((n, n), exact)
    J[0, 0] = _one(exact)
    J[1:1 + b, 1:1 + b] = np.asarray(B.conjugation)
    J[1 + b:, 1 + b:] = np.asarray(C.conjugation)
    E = ex.eye(n, exact)
    unit, Bf, Cf = E[:, :1], E[:, 1:1 + b], E[:, 1 + b:]
    F = {}
    for p in range(-2, 1):
        F[p] = ex.hstack(unit if p <= 0 else ex.zeros((n, 0), exact),
                         Bf @ B.filtration(p), Cf @ C.filtration(p), rows=n, exact=exact)
    F[1] = ex.zeros((n, 0), exact)
    return RealBiextension(J, F, unit, Bf, Cf, B, C)


def transform(v: RealBiextension, g: np.ndarray) -> RealBiextension:
    """Transport ``v`` along a real linear automorphism ``g`` (an isomorphism of framed biextensions)."""
    g = np.asarray(g)
    J = np.asarray(v.conjugation)
    Jn = g @ J @ ex.conj(_inverse(g))
    F = {p: g @ np.asarray(Fp).reshape(v.dim, -1) for p, Fp in v.F.items()}
    return RealBiextension(Jn, F, g @ np.asarray(v.unit).reshape(v.dim, 1), g @ np.asarray(v.b_frame).reshape(v.dim, -1),
                           g @ np.asarray(v.c_frame).reshape(v.dim, -1), v.B, v.C)


def _inverse(g):
    return ex.solve(g, ex.eye(g.shape[0], ex.is_exact(g)))


# --- the period recipe, on the dual -----------------------------------------

def _w1_basis(v: RealBiextension) -> np.ndarray:
    return ex.hstack(np.asarray(v.b_frame).reshape(v.dim, -1), np.asarray(v.c_frame).reshape(v.dim, -1))


def dual_splitting(v: RealBiextension) -> np.ndarray:
    """The real-MHS splitting ``s: C^∨ -> V^∨/ℝ ≅ (W_{-1}V)^∨``.

    Returns the ``c x (b+c)`` matrix whose row ``i`` is ``s`` of the dual basis
    vector ``γ_i``, written as a functional on the basis ``[b_frame | c_frame]``
    of ``W_{-1}``.  The image of ``s`` is the weight-2 part
    ``I^{2,0} + I^{1,1} + I^{0,2}`` of the canonical bigrading of the weight
    (1, 2) mixed structure ``(W_{-1}V)^∨``; for adjacent weights
    ``I^{p,q} = F^p ∩ conj(F^q)`` there.
    """
    b, c = v.B.dim, v.C.dim
    M = _w1_basis(v)
    exact = v.exact
    if c == 0:
        return ex.zeros((0, b + c), exact)
    # conjugation in W_{-1} coordinates, then on row functionals
    JM = ex.solve(M, v.mhs.conj(M))
    conj_rows = lambda R: ex.conj(R) @ ex.conj(JM)  # noqa: E731

    def dual_hodge(p):
        # F^p of the dual annihilates F^{1-p} W_{-1}
        Fw = ex.solve(M, ex.intersect(v.mhs.hodge(1 - p), v.mhs.weight(-1)))
        return ex.annihilator(Fw, b + c)

    F2, F1 = dual_hodge(2), dual_hodge(1)
    I20 = F2
    I11 = ex.intersect(F1.T, conj_rows(F1).T).T
    I02 = conj_rows(F2)
    S = ex.row_basis(np.concatenate([I20, I11, I02], axis=0))
    if S.shape[0] != c:
        raise HodgeError("weight-2 part of the canonical bigrading has the wrong rank")
    return ex.solve(S[:, b:], S)


def _extend(v: RealBiextension, s_rows: np.ndarray, lift: np.ndarray) -> np.ndarray:
    """Extend functionals on W_{-1} (rows in frame coordinates) to V, vanishing on ``lift``."""
    n = v.dim
    P = ex.hstack(lift.reshape(n, 1), _w1_basis(v))
    zero = ex.zeros((s_rows.shape[0], 1), v.exact)
    return ex.hstack(zero, s_rows, rows=s_rows.shape[0]) @ _inverse(P)


def real_lift(v: RealBiextension) -> np.ndarray:
    u = np.asarray(v.unit).reshape(v.dim, 1)
    half = Fraction(1, 2) if v.exact else 0.5
    return (u + v.mhs.conj(u)) * half


def hodge_lift(v: RealBiextension) -> np.ndarray:
    """A vector of ``F^0 V`` mapping to ``1 ∈ Gr^W_0``."""
    F0 = v.mhs.hodge(0)
    eps = (v.epsilon() @ F0).reshape(-1)
    for j, val in enumerate(eps):
        if (bool(val) if v.exact else abs(val) > 1e-12):
            return F0[:, j:j + 1] / val
    raise FramingError("F^0 V is contained in W_{-1}")


def period_sections(v: RealBiextension) -> tuple[np.ndarray, np.ndarray]:
    """Lifts ``(s̃_R, s̃_F)`` of the splitting as ``c x n`` matrices of functionals on ``V``."""
    s = dual_splitting(v)
    return _extend(v, s, real_lift(v)), _extend(v, s, hodge_lift(v))


def period_from_sections(v: RealBiextension, s_real: np.ndarray, s_hodge: np.ndarray) -> PeriodValue:
    """Class of ``s̃_F - s̃_R`` in ``C_ℂ/(C_ℝ + F^0 C) ≅ iC_ℝ^{-1,-1}``."""
    diff = s_hodge - s_real
    if not ex.is_zero_matrix(diff @ _w1_basis(v), tol=1e-9):
        raise HodgeError("sections do not lift the same splitting")
    d = (diff @ real_lift(v)).reshape(-1, 1)
    return project_period(v.C, d, v.period_labels())


def project_period(C: RealHodgeStructure, d: np.ndarray, labels: Sequence[str] = ()) -> PeriodValue:
    """Coordinates of the class of ``d ∈ C_ℂ`` in ``C_ℂ/(C_ℝ + F^0 C)``.

    Uses the bigrading: the ``(0,-2)`` part lies in ``F^0``, the ``(-2,0)``
    part is real modulo ``F^0``, and the ``(-1,-1)`` part is reduced to its
    imaginary part.
    """
    exact = C.exact
    keys = sorted(C.pieces)
    basis = ex.hstack(*[C.pieces[k] for k in keys])
    coeffs = ex.solve(basis, d.reshape(C.dim, 1))
    R = C.real_basis(-1)
    if R.shape[1] == 0:
        return PeriodValue((), ())
    start = 0
    d11 = ex.zeros((C.dim, 1), exact)
    for k in keys:
        w = C.pieces[k].shape[1]
        if k == (-1, -1):
            d11 = C.pieces[k] @ coeffs[start:start + w]
        start += w
    im = (d11 - C.conj(d11)) / (2 * _imag_unit(exact))
    t = ex.solve(R, im).reshape(-1)
    if exact:
        if any(x.im != 0 for x in t):
            raise HodgeError("period coordinates are not real")
        coords = tuple(x.re for x in t)
    else:
        coords = tuple(float(x.real) for x in t)
    return PeriodValue(coords, tuple(labels) if len(labels) == len(coords) else ())


def biextension_period(v: RealBiextension, real_shift=None, hodge_shift=None) -> PeriodValue:
    """Period of a framed real biextension.

    ``real_shift`` (a vector of ``C_ℝ``) and ``hodge_shift`` (a vector of
    ``F^0 C``), both in ``C`` coordinates, perturb the two lifted sections on
    the ``Gr^W_0`` component; the result does not depend on them.
    """
    s_real, s_hodge = period_sections(v)
    eps = v.epsilon()
    if real_shift is not None:
        r = np.asarray(real_shift).reshape(v.C.dim, 1)
        if not ex.is_zero_matrix(v.C.conj(r) - r):
            raise HodgeError("real_shift is not in C_R")
        s_real = s_real + r @ eps
    if hodge_shift is not None:
        f = np.asarray(hodge_shift).reshape(v.C.dim, 1)
        if not ex.contains(v.C.filtration(0), f):
            raise HodgeError("hodge_shift is not in F^0 C")
        s_hodge = s_hodge + f @ eps
    return period_from_sections(v, s_real, s_hodge)


def twist(v: RealBiextension, e: PeriodValue) -> RealBiextension:
    """Twist by the element of ``Ext^1(ℝ, C)`` with coordinates ``e``; adds ``e`` to the period."""
    R = v.C.real_basis(-1)
    if len(e.coords) != R.shape[1]:
        raise ValueError("period dimension mismatch")
    exact = v.exact
    n = v.dim
    if not e.coords:
        return v
    t = ex.zeros((R.shape[1], 1), exact)
    for a, x in enumerate(e.coords):
        if exact:
            t[a, 0] = GaussianRational(Fraction(x))
        else:
            t[a, 0] = float(x)
    x = R @ t * (-_imag_unit(exact))
    X = np.asarray(v.c_frame).reshape(n, -1) @ x
    g = ex.eye(n, exact) + X @ v.epsilon()
    F = {p: g @ np.asarray(Fp).reshape(n, -1) for p, Fp in v.F.items()}
    return RealBiextension(v.conjugation, F, v.unit, v.b_frame, v.c_frame, v.B, v.C)
