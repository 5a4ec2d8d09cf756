"""Length ≤ 2 iterated integrals along polygonal paths.

Each straight segment is integrated with 16-point Gauss–Legendre panels and
adaptive bisection.  A panel carries the line integrals ``L_j = ∫φ_j`` and the
simplex integrals ``S_jk = ∫φ_jφ_k`` (``t₁ ≤ t₂``, ``φ_j`` first) of every form
involved, and panels are glued by the composition rule
``S(αβ) = S(α) + S(β) + L(α)ᵀL(β)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .forms import OneForm, PoleProximityError, wedge, wedge_vanishes_by_type

GL_ORDER = 16
TOL = 1e-11
MAX_DEPTH = 40
PATH_MARGIN = 1e-6

_x, _w = np.polynomial.legendre.leggauss(GL_ORDER)
NODES = 0.5 * (_x + 1.0)
WEIGHTS = 0.5 * _w


class ConvergenceError(RuntimeError):
    pass


class PathError(ValueError):
    pass


def _segment_point_distance(a: complex, b: complex, p) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    d = b - a
    if d == 0:
        return np.abs(p - a)
    t = np.clip(((p - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(a + t * d - p)


def _translates(lattice, p: complex, a: complex, b: complex) -> np.ndarray:
    """Lattice translates of ``p`` near the segment ``[a, b]``."""
    if lattice is None:
        return np.array([p])
    (sa, ta), (sb, tb) = (tuple(float(x) for x in lattice.coords(z)) for z in (a, b))
    sp, tp = (float(x) for x in lattice.coords(p))
    n = np.arange(math.floor(min(ta, tb) - tp) - 1, math.ceil(max(ta, tb) - tp) + 2)
    pts = []
    for nn in n:
        lo = min(sa, sb) - abs(lattice.tau.real) * 2 - sp - 2
        hi = max(sa, sb) + abs(lattice.tau.real) * 2 - sp + 2
        for mm in range(math.floor(lo), math.ceil(hi) + 1):
            pts.append(p + mm + nn * lattice.tau)
    return np.array(pts)


def segment_clearance(a: complex, b: complex, poles, lattice=None) -> tuple[float, complex | None]:
    best, arg = math.inf, None
    for p in poles:
        if not np.isfinite(p):
            continue
        pts = _translates(lattice, p, a, b)
        d = _segment_point_distance(a, b, pts)
        i = int(np.argmin(d))
        if d[i] < best:
            best, arg = float(d[i]), complex(pts[i])
    return best, arg


@dataclass(frozen=True)
class Path:
    """Polygonal path; on a torus the vertices are a lift to the plane."""

    vertices: tuple
    surface: object = None
    margin: float = PATH_MARGIN

    def __init__(self, vertices, surface=None, margin: float = PATH_MARGIN):
        vs = tuple(complex(v) for v in vertices)
        if len(vs) < 2:
            raise PathError("a path needs at least two vertices")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "surface", surface)
        object.__setattr__(self, "margin", margin)
        if surface is not None:
            for a, b in self.segments():
                d, pole = segment_clearance(a, b, surface.finite_punctures, surface.lattice)
                if d <= margin:
                    raise PathError(f"segment {a}->{b} passes within {d:.3g} of puncture {pole}")

    @property
    def start(self) -> complex:
        return self.vertices[0]

    @property
    def end(self) -> complex:
        return self.vertices[-1]

    def segments(self):
        return list(zip(self.vertices[:-1], self.vertices[1:]))

    def reversed(self) -> "Path":
        return Path(self.vertices[::-1], self.surface, self.margin)

    def __add__(self, other: "Path") -> "Path":
        if abs(self.end - other.start) > 1e-12:
            raise PathError("paths do not compose: end and start differ")
        return Path(self.vertices + other.vertices[1:], self.surface, self.margin)

    def split(self, t: float) -> tuple["Path", "Path"]:
        """Split at arclength fraction ``t`` (inserting a vertex)."""
        lens = np.array([abs(b - a) for a, b in self.segments()])
        target = t * lens.sum()
        acc = 0.0
        for i, (a, b) in enumerate(self.segments()):
            if acc + lens[i] >= target or i == len(lens) - 1:
                frac = (target - acc) / lens[i] if lens[i] else 0.0
                mid = a + frac * (b - a)
                head = self.vertices[: i + 1] + (mid,)
                tail = (mid,) + self.vertices[i + 1:]
                return Path(head, self.surface, self.margin), Path(tail, self.surface, self.margin)
            acc += lens[i]
        raise AssertionError("unreachable")

    @classmethod
    def straight(cls, surface, p, q, margin: float = 0.05) -> "Path":
        """Segment ``p → q`` with rectangular detours around punctures closer than ``margin``."""
        p, q = complex(p), complex(q)
        if surface is None or not surface.finite_punctures or p == q:
            return cls([p, q], surface)
        L = abs(q - p)
        u = (q - p) / L
        n = 1j * u
        hits = []
        for x in surface.finite_punctures:
            for a in _translates(surface.lattice, x, p, q):
                t = ((a - p) * np.conj(u)).real
                off = ((a - p) * np.conj(n)).real
                if 0.0 < t < L and abs(off) < margin:
                    hits.append((t, off))
        verts = [p]
        r = d = 3 * margin
        for t, off in sorted(hits):
            side = -1.0 if off > 0 else 1.0
            t0, t1 = max(t - d, 0.0), min(t + d, L)
            for tt, rr in ((t0, 0.0), (t0, r), (t1, r), (t1, 0.0)):
                z = p + tt * u + side * rr * n
                if abs(z - verts[-1]) > 1e-15:
                    verts.append(z)
        if abs(q - verts[-1]) > 1e-15:
            verts.append(q)
        return cls(verts, surface)


# -- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class IteratedIntegralExpr:
    """``c·ε + Σ a_i ∫ξ_i + Σ c_jk ∫φ_jφ_k``."""

    constant: complex = 0.0
    length1: tuple = ()
    length2: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "constant", complex(self.constant))
        object.__setattr__(self, "length1", tuple((complex(c), f) for c, f in self.length1))
        object.__setattr__(self, "length2", tuple((complex(c), f, g) for c, f, g in self.length2))

    @classmethod
    def line(cls, form: OneForm, coef=1.0) -> "IteratedIntegralExpr":
        return cls(length1=((coef, form),))

    @classmethod
    def double(cls, f: OneForm, g: OneForm, coef=1.0) -> "IteratedIntegralExpr":
        return cls(length2=((coef, f, g),))

    def __add__(self, other: "IteratedIntegralExpr") -> "IteratedIntegralExpr":
        return IteratedIntegralExpr(self.constant + other.constant, self.length1 + other.length1,
                                     self.length2 + other.length2)

    def __mul__(self, c) -> "IteratedIntegralExpr":
        c = complex(c)
        return IteratedIntegralExpr(c * self.constant, tuple((c * a, f) for a, f in self.length1),
                                     tuple((c * a, f, g) for a, f, g in self.length2))

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other

    def forms(self) -> list[OneForm]:
        seen: list[OneForm] = []
        for f in [f for _, f in self.length1] + [h for _, f, g in self.length2 for h in (f, g)]:
            if not any(f is s for s in seen):
                seen.append(f)
        return seen


# -- quadrature ----------------------------------------------------------------

@dataclass
class PanelData:
    L: np.ndarray
    S: np.ndarray | None
    panels: int = 1

    def __matmul__(self, other: "PanelData") -> "PanelData":
        """Chen composition: ``self`` traversed first."""
        S = None if self.S is None else self.S + other.S + np.outer(self.L, other.L)
        return PanelData(self.L + other.L, S, self.panels + other.panels)


def _pullback_values(forms, a: complex, b: complex, t):
    delta = b - a
    z = a + t * delta
    out = np.empty((len(forms),) + np.shape(t), dtype=complex)
    for i, f in enumerate(forms):
        out[i] = f.pullback(z, delta)
    return out


def _panel(forms, a: complex, b: complex, need_s: bool) -> PanelData:
    g = _pullback_values(forms, a, b, NODES)
    L = g @ WEIGHTS
    if not need_s:
        return PanelData(L, None)
    inner_t = np.multiply.outer(NODES, NODES)  # (outer i, inner l): t_i * x_l
    gi = _pullback_values(forms, a, b, inner_t)
    I = NODES * (gi @ WEIGHTS)  # ∫_0^{t_i} φ_j, shape (nforms, 16)
    S = (I * WEIGHTS) @ g.T
    return PanelData(L, S)


def _close(x: PanelData, y: PanelData, tol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(y.L), initial=0.0)))
    err = float(np.max(np.abs(x.L - y.L), initial=0.0))
    if y.S is not None:
        scale = max(scale, float(np.max(np.abs(y.S), initial=0.0)))
        err = max(err, float(np.max(np.abs(x.S - y.S), initial=0.0)))
    return err < tol * scale


def _adaptive(forms, a, b, est: PanelData, tol, need_s, depth) -> PanelData:
    mid = 0.5 * (a + b)
    left = _panel(forms, a, mid, need_s)
    right = _panel(forms, mid, b, need_s)
    both = left @ right
    if _close(both, est, tol):
        return both
    if depth >= MAX_DEPTH:
        raise ConvergenceError(f"quadrature did not converge on segment {a}->{b} after {depth} bisections")
    return (_adaptive(forms, a, mid, left, tol, need_s, depth + 1)
            @ _adaptive(forms, mid, b, right, tol, need_s, depth + 1))


def _check_poles(forms, a, b, margin):
    for f in forms:
        if not f.poles:
            continue
        d, pole = segment_clearance(a, b, f.poles, f.lattice)
        if d <= margin:
            raise PoleProximityError(pole, d, margin)


def path_integrals(forms, path: Path, tol: float = TOL, need_s: bool = True) -> PanelData:
    """All ``∫φ_j`` and ``∫φ_jφ_k`` over ``path`` for the listed forms."""
    forms = list(forms)
    n = len(forms)
    total = PanelData(np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex) if need_s else None, 0)
    for a, b in path.segments():
        if a == b:
            continue
        _check_poles(forms, a, b, path.margin)
        est = _panel(forms, a, b, need_s)
        total = total @ _adaptive(forms, a, b, est, tol, need_s, 0)
    return total


def line_integral(form: OneForm, path: Path, tol: float = TOL) -> complex:
    return complex(path_integrals([form], path, tol, need_s=False).L[0])


def double_integral(f: OneForm, g: OneForm, path: Path, tol: float = TOL) -> complex:
    data = path_integrals([f, g], path, tol)
    return complex(data.S[0, 1])


def iterated_integral(expr: IteratedIntegralExpr, path: Path, tol: float = TOL) -> complex:
    forms = expr.forms()
    idx = {id(f): i for i, f in enumerate(forms)}
    data = path_integrals(forms, path, tol, need_s=bool(expr.length2)) if forms else None
    val = expr.constant
    for c, f in expr.length1:
        val += c * data.L[idx[id(f)]]
    for c, f, g in expr.length2:
        val += c * data.S[idx[id(f)], idx[id(g)]]
    return complex(val)


# -- closedness ------------------------------------------------------------------

class NonClosedFormError(ValueError):
    pass


@dataclass(frozen=True)
class ClosednessReport:
    closed: bool
    residual: float
    symbolic: bool
    samples: int = 0
    worst_point: complex | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.closed


def default_samples(forms, n: int = 7, clearance: float = 0.15) -> np.ndarray:
    lattices = {f.lattice for f in forms if f.lattice is not None}
    if lattices:
        lat = lattices.pop()
        s, t = np.meshgrid((np.arange(n) + 0.37) / n, (np.arange(n) + 0.61) / n)
        pts = (s + t * lat.tau).ravel()
    else:
        x = np.linspace(-1.9, 2.1, n)
        X, Y = np.meshgrid(x, x + 0.03)
        pts = (X + 1j * Y).ravel()
    keep = np.ones(pts.shape, dtype=bool)
    for f in forms:
        if f.poles:
            keep &= f.pole_distance(pts) > clearance
    return pts[keep]


def integrability_residual(expr: IteratedIntegralExpr, z) -> np.ndarray:
    """``dξ + Σ c_jk φ_j∧φ_k`` as a ``dz∧dz̄`` coefficient at ``z``."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for c, f in expr.length1:
        if not f.closed:
            out = out + c * f.d(z)
    for c, f, g in expr.length2:
        if not wedge_vanishes_by_type(f, g):
            out = out + c * wedge(f, g, z)
    return out


def is_relatively_closed(expr: IteratedIntegralExpr, samples=None, tol: float = 1e-9) -> ClosednessReport:
    """Decide ``dξ + Σ c_jk φ_j∧φ_k = 0`` (the φ_j must be closed)."""
    for _, f, g in expr.length2:
        for h in (f, g):
            if not h.closed:
                raise NonClosedFormError(f"{h.name} is not closed")
    trivially = all(f.closed for _, f in expr.length1) and all(
        wedge_vanishes_by_type(f, g) for _, f, g in expr.length2)
    if trivially:
        return ClosednessReport(True, 0.0, True)
    pts = default_samples(expr.forms()) if samples is None else np.asarray(samples, dtype=complex).ravel()
    res = np.abs(integrability_residual(expr, pts))
    i = int(np.argmax(res))
    worst = float(res[i])
    return ClosednessReport(worst < tol, worst, False, len(pts), complex(pts[i]))


def homotopy_defect(expr: IteratedIntegralExpr, path1: Path, path2: Path, tol: float = TOL) -> complex:
    """``F(path1) - F(path2)`` for paths with common endpoints."""
    if abs(path1.start - path2.start) > 1e-12 or abs(path1.end - path2.end) > 1e-12:
        raise PathError("paths do not share endpoints")
    return iterated_integral(expr, path1, tol) - iterated_integral(expr, path2, tol)
