"""Smooth 1-forms ``a dz + b dz̄`` on a chart, evaluated vectorially.

A form exposes ``coeffs(z) -> (a, b)`` and its singular set.  Derived data
such as ``dη`` (as the coefficient of ``dz∧dz̄``) fall back to centred finite
differences unless a subclass knows them in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .elliptic import Lattice

# bidegree tags
HOLO = "(1,0)"
ANTI = "(0,1)"
MIXED = "mixed"

FD_STEP = 1e-3


class PoleProximityError(ValueError):
    """Raised when a form is evaluated within ``margin`` of a pole."""

    def __init__(self, pole, distance, margin):
        self.pole = pole
        self.distance = distance
        super().__init__(f"evaluation point at distance {distance:.3g} from pole {pole} (margin {margin:g})")


class OneForm:
    bidegree: str = MIXED
    closed: bool = False
    name: str = "form"

    def coeffs(self, z):  # pragma: no cover - abstract
        raise NotImplementedError

    # singular set: chart points, repeated over the lattice if one is set
    poles: tuple = ()
    lattice: Lattice | None = None

    def pole_distance(self, z):
        z = np.asarray(z, dtype=complex)
        best = np.full(z.shape, np.inf)
        for p in self.poles:
            if self.lattice is not None:
                dist = self.lattice.distance_to_lattice(z - p)
            else:
                dist = np.abs(z - p)
            best = np.minimum(best, dist)
        return best

    def nearest_pole(self, z):
        z = complex(z)
        best, arg = np.inf, None
        for p in self.poles:
            dist = float(self.lattice.distance_to_lattice(z - p) if self.lattice else abs(z - p))
            if dist < best:
                best, arg = dist, p
        return arg, best

    def check(self, z, margin: float):
        z = np.asarray(z, dtype=complex)
        if not self.poles:
            return
        dist = self.pole_distance(z)
        bad = dist <= margin
        if np.any(bad):
            zb = z[bad].flat[0] if z.ndim else complex(z)
            pole, d = self.nearest_pole(zb)
            raise PoleProximityError(pole, d, margin)

    def pullback(self, z, dz):
        """Value of the form on the tangent vector ``dz`` at ``z``."""
        a, b = self.coeffs(z)
        return a * dz + b * np.conj(dz)

    def d(self, z):
        """Coefficient of ``dz∧dz̄`` in the exterior derivative: ``∂_z b - ∂_z̄ a``."""
        if self.closed:
            return np.zeros(np.shape(z), dtype=complex)
        return fd_d(self, z)

    def conj(self) -> "OneForm":
        return ConjugateForm(self)

    def __add__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return FormSum(((1.0, self), (1.0, other)))

    def __sub__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return FormSum(((1.0, self), (-1.0, other)))

    def __mul__(self, c):
        if isinstance(c, OneForm):
            return NotImplemented
        return FormSum(((complex(c), self),))

    __rmul__ = __mul__

    def __neg__(self):
        return FormSum(((-1.0, self),))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _fd_step(form: OneForm, z):
    dist = form.pole_distance(z)
    return FD_STEP * np.minimum(1.0, np.where(np.isfinite(dist), dist, 1.0))


def wirtinger(func: Callable, z, h):
    """Fourth-order centred ``(∂_z, ∂_z̄)`` of a vectorised function."""
    z = np.asarray(z, dtype=complex)
    def deriv(e):
        return (8 * (func(z + h * e) - func(z - h * e)) - (func(z + 2 * h * e) - func(z - 2 * h * e))) / (12 * h)
    fx = deriv(1.0)
    fy = deriv(1j)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def fd_d(form: OneForm, z):
    h = _fd_step(form, z)
    _, a_zb = wirtinger(lambda w: form.coeffs(w)[0], z, h)
    b_z, _ = wirtinger(lambda w: form.coeffs(w)[1], z, h)
    return b_z - a_zb


def wedge(f1: OneForm, f2: OneForm, z):
    """Coefficient of ``dz∧dz̄`` in ``f1∧f2``."""
    a1, b1 = f1.coeffs(z)
    a2, b2 = f2.coeffs(z)
    return a1 * b2 - b1 * a2


def wedge_vanishes_by_type(f1: OneForm, f2: OneForm) -> bool:
    return f1.bidegree == f2.bidegree and f1.bidegree in (HOLO, ANTI)


def evaluate_form(form: OneForm, z, margin: float = 1e-9):
    """``(a, b)`` at ``z``; raises :class:`PoleProximityError` near a pole."""
    form.check(z, margin)
    return form.coeffs(z)


# -- concrete forms ---------------------------------------------------------

class ConstantForm(OneForm):
    closed = True

    def __init__(self, a=0.0, b=0.0, name=None):
        self.a = complex(a)
        self.b = complex(b)
        if self.b == 0:
            self.bidegree = HOLO
        elif self.a == 0:
            self.bidegree = ANTI
        self.name = name or f"{self.a}dz+{self.b}dz̄"

    def coeffs(self, z):
        z = np.asarray(z, dtype=complex)
        return np.full(z.shape, self.a), np.full(z.shape, self.b)


DZ = ConstantForm(1.0, 0.0, name="dz")
DZBAR = ConstantForm(0.0, 1.0, name="dz̄")


class RationalForm(OneForm):
    """``(c + Σ r_k/(z - p_k)) dz`` on the Riemann sphere chart."""

    bidegree = HOLO
    closed = True

    def __init__(self, residues: dict, const=0.0, name="rational"):
        self.residues = {complex(p): complex(r) for p, r in residues.items()}
        self.const = complex(const)
        self.poles = tuple(self.residues)
        self.name = name

    def coeffs(self, z):
        z = np.asarray(z, dtype=complex)
        a = np.full(z.shape, self.const)
        for p, r in self.residues.items():
            a = a + r / (z - p)
        return a, np.zeros(z.shape, dtype=complex)


class ZetaForm(OneForm):
    """``(c + Σ r_k ζ(z - p_k)) dz`` on ``ℂ/(ℤ+τℤ)``; requires ``Σ r_k = 0``."""

    bidegree = HOLO
    closed = True

    def __init__(self, lattice: Lattice, residues: dict, const=0.0, name="zeta"):
        total = sum(complex(r) for r in residues.values())
        if abs(total) > 1e-12:
            raise ValueError("residues of a meromorphic form on a compact curve must sum to zero")
        self.lattice = lattice
        self.residues = {complex(p): complex(r) for p, r in residues.items()}
        self.const = complex(const)
        self.poles = tuple(self.residues)
        self.name = name

    def coeffs(self, z):
        z = np.asarray(z, dtype=complex)
        a = np.full(z.shape, self.const)
        for p, r in self.residues.items():
            a = a + r * self.lattice.zeta(z - p)
        return a, np.zeros(z.shape, dtype=complex)


class ConjugateForm(OneForm):
    def __init__(self, base: OneForm):
        self.base = base
        self.closed = base.closed
        self.bidegree = {HOLO: ANTI, ANTI: HOLO}.get(base.bidegree, MIXED)
        self.poles = base.poles
        self.lattice = base.lattice
        self.name = f"conj({base.name})"

    def coeffs(self, z):
        a, b = self.base.coeffs(z)
        return np.conj(b), np.conj(a)

    def d(self, z):
        if self.closed:
            return np.zeros(np.shape(z), dtype=complex)
        # conj(b_z - a_z̄) with roles swapped: d(conj η) = conj(dη) and conj(dz∧dz̄) = -dz∧dz̄
        return -np.conj(self.base.d(z))

    def conj(self):
        return self.base


class FormSum(OneForm):
    def __init__(self, terms):
        flat = []
        for c, f in terms:
            if isinstance(f, FormSum):
                flat.extend((c * c2, f2) for c2, f2 in f.terms)
            else:
                flat.append((complex(c), f))
        self.terms = tuple(flat)
        forms = [f for _, f in self.terms]
        self.closed = all(f.closed for f in forms)
        kinds = {f.bidegree for f in forms}
        self.bidegree = kinds.pop() if len(kinds) == 1 else MIXED
        self.poles = tuple(p for f in forms for p in f.poles)
        lats = {f.lattice for f in forms if f.lattice is not None}
        self.lattice = lats.pop() if len(lats) == 1 else None
        self.name = " + ".join(f"{c}*{f.name}" for c, f in self.terms)

    def pole_distance(self, z):
        z = np.asarray(z, dtype=complex)
        best = np.full(z.shape, np.inf)
        for _, f in self.terms:
            best = np.minimum(best, f.pole_distance(z))
        return best

    def nearest_pole(self, z):
        return min((f.nearest_pole(z) for _, f in self.terms if f.poles),
                   key=lambda pd: pd[1], default=(None, np.inf))

    def coeffs(self, z):
        z = np.asarray(z, dtype=complex)
        a = np.zeros(z.shape, dtype=complex)
        b = np.zeros(z.shape, dtype=complex)
        for c, f in self.terms:
            fa, fb = f.coeffs(z)
            a = a + c * fa
            b = b + c * fb
        return a, b

    def d(self, z):
        out = np.zeros(np.shape(z), dtype=complex)
        for c, f in self.terms:
            if not f.closed:
                out = out + c * f.d(z)
        return out


@dataclass
class SmoothFunction:
    """A function with known Wirtinger derivatives (``dz`` and ``dzbar`` optional)."""

    value: Callable
    dz: Callable | None = None
    dzbar: Callable | None = None
    poles: tuple = ()
    lattice: Lattice | None = None
    name: str = "f"

    def __call__(self, z):
        return self.value(np.asarray(z, dtype=complex))

    def wirtinger(self, z):
        z = np.asarray(z, dtype=complex)
        if self.dz is not None:
            fz = self.dz(z)
            fzb = self.dzbar(z) if self.dzbar is not None else np.conj(self.dz(z))
            return fz, fzb
        return wirtinger(self.value, z, FD_STEP)


class ExactForm(OneForm):
    """``df = f_z dz + f_z̄ dz̄``."""

    closed = True

    def __init__(self, func: SmoothFunction):
        self.func = func
        self.poles = func.poles
        self.lattice = func.lattice
        self.name = f"d({func.name})"

    def coeffs(self, z):
        return self.func.wirtinger(z)


class ScaledForm(OneForm):
    """``g·η`` for a function ``g`` and form ``η``."""

    def __init__(self, func: SmoothFunction, form: OneForm):
        self.func = func
        self.form = form
        self.poles = tuple(form.poles) + tuple(func.poles)
        self.lattice = form.lattice or func.lattice
        self.bidegree = form.bidegree
        self.name = f"{func.name}*{form.name}"

    def coeffs(self, z):
        g = self.func(z)
        a, b = self.form.coeffs(z)
        return g * a, g * b

    def d(self, z):
        # d(gη) = dg∧η + g dη
        gz, gzb = self.func.wirtinger(z)
        a, b = self.form.coeffs(z)
        base = self.form.d(z) if not self.form.closed else 0.0
        return gz * b - gzb * a + self.func(z) * base


class CallableForm(OneForm):
    """Wraps ``coeffs`` callables; optional ``d`` callable gives ``dη`` exactly."""

    def __init__(self, coeffs: Callable, d: Callable | None = None, *, closed=False,
                 bidegree=MIXED, poles=(), lattice=None, name="form"):
        self._coeffs = coeffs
        self._d = d
        self.closed = closed
        self.bidegree = bidegree
        self.poles = tuple(poles)
        self.lattice = lattice
        self.name = name

    def coeffs(self, z):
        z = np.asarray(z, dtype=complex)
        a, b = self._coeffs(z)
        return np.broadcast_to(a, z.shape).astype(complex), np.broadcast_to(b, z.shape).astype(complex)

    def d(self, z):
        if self.closed:
            return np.zeros(np.shape(z), dtype=complex)
        if self._d is not None:
            return np.broadcast_to(self._d(np.asarray(z, dtype=complex)), np.shape(z)).astype(complex)
        return fd_d(self, z)
