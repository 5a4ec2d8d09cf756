"""Punctured spheres and tori: holomorphic forms, third-kind differentials, K-space."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .elliptic import Lattice
from .forms import DZ, OneForm, RationalForm, ZetaForm

INF = complex(math.inf, 0.0)
TWO_PI_I = 2j * math.pi


def is_infinite(p) -> bool:
    return cmath.isinf(complex(p))


class SurfaceError(ValueError):
    pass


@dataclass(frozen=True)
class Surface:
    """``ℙ¹`` or ``ℂ/(ℤ+τℤ)`` minus ordered punctures ``x_0, …, x_m``.

    ``x_0`` (the first puncture) is the distinguished point that fixes the
    third-kind basis and carries the Green current.
    """

    kind: str
    punctures: tuple = ()
    tau: complex | None = None

    def __post_init__(self):
        if self.kind not in ("sphere", "torus"):
            raise SurfaceError(f"unknown surface kind {self.kind!r}")
        pts = tuple(INF if is_infinite(p) else complex(p) for p in self.punctures)
        object.__setattr__(self, "punctures", pts)
        if self.kind == "torus":
            if self.tau is None:
                raise SurfaceError("torus needs tau")
            tau = complex(self.tau)
            if not tau.imag > 0:
                raise SurfaceError("Im tau must be positive")
            object.__setattr__(self, "tau", tau)
            if any(is_infinite(p) for p in pts):
                raise SurfaceError("torus punctures must be finite")
            lat = Lattice(tau)
            for i in range(len(pts)):
                for j in range(i):
                    if lat.distance_to_lattice(pts[i] - pts[j]) < 1e-12:
                        raise SurfaceError(f"punctures {pts[j]} and {pts[i]} coincide modulo the lattice")
        else:
            if self.tau is not None:
                raise SurfaceError("sphere takes no tau")
            for i in range(len(pts)):
                for j in range(i):
                    same = (is_infinite(pts[i]) and is_infinite(pts[j])) or (
                        not is_infinite(pts[i]) and not is_infinite(pts[j]) and abs(pts[i] - pts[j]) < 1e-12)
                    if same:
                        raise SurfaceError(f"punctures {pts[j]} and {pts[i]} coincide")

    @classmethod
    def sphere(cls, *punctures) -> "Surface":
        return cls("sphere", tuple(punctures))

    @classmethod
    def torus(cls, tau, *punctures) -> "Surface":
        return cls("torus", tuple(punctures), complex(tau))

    @cached_property
    def lattice(self) -> Lattice | None:
        return Lattice(self.tau) if self.kind == "torus" else None

    @property
    def genus(self) -> int:
        return 1 if self.kind == "torus" else 0

    @property
    def x0(self):
        return self.punctures[0] if self.punctures else None

    @property
    def m(self) -> int:
        return max(len(self.punctures) - 1, 0)

    @property
    def finite_punctures(self) -> tuple:
        return tuple(p for p in self.punctures if not is_infinite(p))

    def puncture_distance(self, z):
        """Distance from chart point(s) ``z`` to the nearest finite puncture (mod lattice on a torus)."""
        z = np.asarray(z, dtype=complex)
        best = np.full(z.shape, np.inf)
        for p in self.finite_punctures:
            d = self.lattice.distance_to_lattice(z - p) if self.lattice else np.abs(z - p)
            best = np.minimum(best, d)
        return best

    def check_point(self, z, margin: float = 1e-9, what: str = "point"):
        z = complex(z)
        if cmath.isinf(z) or cmath.isnan(z):
            raise SurfaceError(f"{what} {z} is not a finite chart point")
        d = float(self.puncture_distance(z))
        if d <= margin:
            raise SurfaceError(f"{what} {z} lies at a puncture (distance {d:.3g})")

    def describe(self) -> str:
        pts = ", ".join("∞" if is_infinite(p) else f"{p}" for p in self.punctures)
        head = "sphere" if self.kind == "sphere" else f"torus tau={self.tau}"
        return f"{head} minus {{{pts}}}"


# -- holomorphic forms -------------------------------------------------------

def holomorphic_basis(s: Surface) -> list[OneForm]:
    return [DZ] if s.kind == "torus" else []


# -- third kind --------------------------------------------------------------

@dataclass(frozen=True)
class ThirdKindDifferential:
    form: OneForm
    pole_pair: tuple
    residues: dict = field(default_factory=dict)
    periods: dict = field(default_factory=dict)

    def residue_error(self) -> float:
        x0, xk = self.pole_pair
        want = {x0: -1 / TWO_PI_I, xk: 1 / TWO_PI_I}
        return max(abs(self.residues[p] - w) for p, w in want.items())

    def period_imag(self) -> float:
        return max((abs(v.imag) for v in self.periods.values()), default=0.0)

    def certify(self, tol: float = 1e-9) -> bool:
        return self.residue_error() < tol and self.period_imag() < tol


def _square_loop(center: complex, r: float):
    from .chen import Path
    c = complex(center)
    return Path([c + r * (1 - 1j), c + r * (1 + 1j), c + r * (-1 + 1j), c + r * (-1 - 1j), c + r * (1 - 1j)])


def _loop_radius(s: Surface, pole: complex) -> float:
    others = [p for p in s.finite_punctures if p != pole]
    if s.lattice is not None:
        gap = min([float(s.lattice.distance_to_lattice(pole - p)) for p in others]
                  + [1.0, s.tau.imag, abs(1 + s.tau), abs(1 - s.tau)])
    else:
        gap = min([abs(pole - p) for p in others], default=1.0)
    return min(0.25, 0.3 * gap)


def _torus_cycle_base(s: Surface) -> complex:
    """Base point for the straight a/b cycles, far from all punctures."""
    lat = s.lattice
    cand = [(i + 0.5) / 8 + (j + 0.5) / 8 * lat.tau for i in range(8) for j in range(8)]
    t = np.linspace(0, 1, 65)

    def clearance(b):
        pts = np.concatenate([b + t, b + t * lat.tau])
        return float(np.min(s.puncture_distance(pts))) if s.finite_punctures else 1.0

    return max(cand, key=clearance)


def _torus_zeta_form(s: Surface, x0: complex, xk: complex, name: str) -> ZetaForm:
    lat = s.lattice
    p1 = lat.eta1 * (x0 - xk) / TWO_PI_I
    pt = lat.eta_tau * (x0 - xk) / TWO_PI_I
    # Im(p1 + c) = 0 and Im(pt + c tau) = 0
    A = np.array([[0.0, 1.0], [lat.tau.imag, lat.tau.real]])
    assert abs(np.linalg.det(A)) > 0
    cr, ci = np.linalg.solve(A, [-p1.imag, -pt.imag])
    return ZetaForm(lat, {xk: 1 / TWO_PI_I, x0: -1 / TWO_PI_I}, const=complex(cr, ci), name=name)


def certify_form(s: Surface, form: OneForm, pole_pair) -> tuple[dict, dict]:
    """Residues at every pole and loop/lattice periods, all by contour quadrature."""
    from .chen import Path, line_integral
    residues, periods = {}, {}
    for p in s.finite_punctures:
        period = line_integral(form, _square_loop(p, _loop_radius(s, p)))
        residues[p] = period / TWO_PI_I
        periods[f"loop({p})"] = period
    if s.kind == "sphere":
        R = 2.0 * max([abs(p) for p in s.finite_punctures], default=0.0) + 2.0
        residues[INF] = -line_integral(form, _square_loop(0.0, R)) / TWO_PI_I
    else:
        b = _torus_cycle_base(s)
        periods["a"] = line_integral(form, Path([b, b + 1]))
        periods["b"] = line_integral(form, Path([b, b + s.tau]))
    return residues, periods


def third_kind_basis(s: Surface, certify: bool = True) -> list[ThirdKindDifferential]:
    """``ζ_k`` for ``k = 1..m``: residues ``∓(2πi)^{-1}`` at ``(x_0, x_k)``, all periods real."""
    if s.m < 1:
        raise SurfaceError("third-kind basis needs at least two punctures")
    x0 = s.x0
    out = []
    for k, xk in enumerate(s.punctures[1:], start=1):
        name = f"zeta:{k}"
        if s.kind == "sphere":
            # a pole at ∞ contributes no finite term
            res = {}
            if not is_infinite(xk):
                res[xk] = 1 / TWO_PI_I
            if not is_infinite(x0):
                res[x0] = -1 / TWO_PI_I
            form = RationalForm(res, name=name)
        else:
            form = _torus_zeta_form(s, x0, xk, name)
        if certify:
            residues, periods = certify_form(s, form, (x0, xk))
        else:
            residues, periods = {}, {}
        out.append(ThirdKindDifferential(form, (x0, xk), residues, periods))
    return out


# -- K space -----------------------------------------------------------------

@dataclass(frozen=True)
class KBasis:
    """Skew-hermitian ``h`` over the holomorphic basis spanning ``ker(Λ²H¹ → H²(X))``."""

    surface: Surface
    forms: tuple
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def omega(self, h, z):
        """Coefficient of ``dz∧dz̄`` in ``Ω = Σ h_jk ω_j∧ω̄_k``."""
        return omega_coefficient(self.forms, h, z)

    def mass(self, h) -> float:
        return omega_mass(self.surface, h)


def omega_coefficient(forms, h, z):
    z = np.asarray(z, dtype=complex)
    h = np.asarray(h, dtype=complex)
    a = [f.coeffs(z)[0] for f in forms]
    out = np.zeros(z.shape, dtype=complex)
    for j in range(len(forms)):
        for k in range(len(forms)):
            out = out + h[j, k] * a[j] * np.conj(a[k])
    return out


def omega_mass(s: Surface, h) -> float:
    """``∫_X̄ Ω`` in closed form: ``∫ dz∧dz̄ = -2i Im τ`` on the torus."""
    h = np.asarray(h, dtype=complex)
    if s.kind != "torus" or h.size == 0:
        return 0.0
    return float((h[0, 0] * (-2j) * s.tau.imag).real)


def skew_hermitian_basis(g: int) -> list[np.ndarray]:
    """Real basis of ``{h : h = -h^*}`` (``i·h`` hermitian)."""
    out = []
    for j in range(g):
        e = np.zeros((g, g), dtype=complex)
        e[j, j] = 1j
        out.append(e)
    for j in range(g):
        for k in range(j + 1, g):
            e = np.zeros((g, g), dtype=complex)
            e[j, k], e[k, j] = 1.0, -1.0
            out.append(e)
            e = np.zeros((g, g), dtype=complex)
            e[j, k], e[k, j] = 1j, 1j
            out.append(e)
    return out


def k_space_basis(s: Surface) -> KBasis:
    forms = tuple(holomorphic_basis(s))
    cands = skew_hermitian_basis(len(forms))
    if not cands:
        return KBasis(s, forms, ())
    if s.punctures:
        # H²(X) = 0 for an affine curve: the whole Λ² part is in the kernel
        return KBasis(s, forms, tuple(cands))
    # compact: kernel of h ↦ ∫_X̄ Ω
    cup = np.array([[omega_mass(s, h) for h in cands]])
    _, sv, vt = np.linalg.svd(cup)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max(initial=0.0))))
    kernel = vt[rank:]
    elems = tuple(sum(c * h for c, h in zip(row, cands)) for row in kernel)
    return KBasis(s, forms, elems)
