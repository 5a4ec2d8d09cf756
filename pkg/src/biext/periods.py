"""The period map ``Ψ_p(q)`` in coordinates ``(h_1..h_m, f_{Ω_1}..)`` and grid scans.

``h_k(q) = Im ∫_p^q ζ_k`` and ``f_Ω`` is the Green current normalised at
``p``; coordinate ``r`` stands for ``i·r`` in the real ``(-1,-1)`` part.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chen import Path, line_integral
from .greens import GreenFunction, solve_green
from .surfaces import Surface, SurfaceError, is_infinite, k_space_basis, third_kind_basis

DETOUR_MARGIN = 0.05
POINT_MARGIN = 1e-9


class DegenerateFiberError(ValueError):
    """``Gr^W_{-2}`` of the Lie algebra vanishes, so the period map is constant."""


@dataclass(frozen=True)
class GradedFiber:
    surface: Surface
    e_labels: tuple
    kappa_labels: tuple

    @property
    def dimension(self) -> int:
        return len(self.e_labels) + len(self.kappa_labels)

    @property
    def labels(self) -> tuple:
        return self.e_labels + self.kappa_labels

    def split(self, vec):
        vec = np.asarray(vec, dtype=float)
        m = len(self.e_labels)
        return vec[..., :m], vec[..., m:]


@lru_cache(maxsize=None)
def graded_fiber(s: Surface) -> GradedFiber:
    m = s.m
    kappa = len(k_space_basis(s))
    return GradedFiber(s, tuple(f"e{k}" for k in range(1, m + 1)), tuple(f"kappa{a}" for a in range(1, kappa + 1)))


@lru_cache(maxsize=None)
def _third_kind(s: Surface):
    return tuple(third_kind_basis(s, certify=False)) if s.m >= 1 else ()


@lru_cache(maxsize=256)
def _greens(s: Surface, p: complex) -> tuple[GreenFunction, ...]:
    return tuple(solve_green(s, h, s.x0, p) for h in k_space_basis(s).elements)


def _check(s: Surface, z, what):
    try:
        s.check_point(z, POINT_MARGIN, what)
    except SurfaceError as exc:
        raise SurfaceError(f"{exc}; the period coordinates diverge there") from None


def h_closed_form(s: Surface, p: complex, q) -> np.ndarray:
    """``h_k(q)`` from logarithms of moduli, shape ``q.shape + (m,)``."""
    q = np.asarray(q, dtype=complex)
    x0 = s.x0
    out = np.empty(q.shape + (s.m,))
    if s.kind == "sphere":
        def L(z, x):
            return np.zeros(np.shape(z)) if is_infinite(x) else np.log(np.abs(z - x))
    else:
        lat = s.lattice

        def L(z, x):
            return lat.log_abs_sigma(np.asarray(z, dtype=complex) - x)
    for k, (zk, xk) in enumerate(zip(_third_kind(s), s.punctures[1:])):
        val = L(q, xk) - L(p, xk) - L(q, x0) + L(p, x0)
        val = -val / (2 * math.pi)
        if s.kind == "torus":
            # Im(c (q - p)) from the normalising multiple of dz
            val = val + np.imag(zk.form.const * (q - p))
        out[..., k] = val
    return out


def h_quadrature(s: Surface, p: complex, q: complex, margin: float = DETOUR_MARGIN) -> np.ndarray:
    path = Path.straight(s, p, q, margin)
    return np.array([line_integral(z.form, path).imag for z in _third_kind(s)])


def psi_p(s: Surface, p, q, method: str = "quadrature") -> np.ndarray:
    """``Ψ_p(q)`` as a real vector in the coordinates of :func:`graded_fiber`."""
    p, q = complex(p), complex(q)
    _check(s, p, "base point")
    _check(s, q, "point")
    if q == p:
        return np.zeros(graded_fiber(s).dimension)
    if method == "quadrature":
        h = h_quadrature(s, p, q)
    elif method == "closed_form":
        h = h_closed_form(s, p, q)
    else:
        raise ValueError(f"unknown method {method!r}")
    f = [float(g(q)) for g in _greens(s, p)]
    return np.concatenate([np.asarray(h, dtype=float), np.asarray(f, dtype=float)])


def psi(s: Surface, p, q, method: str = "quadrature") -> np.ndarray:
    """``Ψ(p, q) = Ψ_p(q)``."""
    return psi_p(s, p, q, method)


def psi_p_grid(s: Surface, p, q) -> np.ndarray:
    """Vectorised closed-form ``Ψ_p`` over an array of points; shape ``q.shape + (dim,)``."""
    p = complex(p)
    q = np.asarray(q, dtype=complex)
    parts = [h_closed_form(s, p, q)] if s.m else []
    for g in _greens(s, p):
        parts.append(np.asarray(g(q), dtype=float)[..., None])
    if not parts:
        return np.zeros(q.shape + (0,))
    return np.concatenate(parts, axis=-1)


# -- scans ---------------------------------------------------------------------

def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("BIEXT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ScanResult:
    region: tuple
    n: int
    tol: float
    centers: np.ndarray  # [iy, ix]
    values: np.ndarray  # [iy, ix, dim]
    norm: np.ndarray
    flagged: np.ndarray
    excluded: np.ndarray
    labels: tuple = ()
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def cell_diagonal(self) -> float:
        x0, x1, y0, y1 = self.region
        return math.hypot((x1 - x0) / self.n, (y1 - y0) / self.n)

    @property
    def interior(self) -> np.ndarray:
        """Flagged cells whose 8 neighbours are all flagged (outside cells count as unflagged)."""
        f = np.pad(self.flagged, 1, constant_values=False)
        out = f[1:-1, 1:-1].copy()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx or dy:
                    out &= f[1 + dy: f.shape[0] - 1 + dy, 1 + dx: f.shape[1] - 1 + dx]
        return out

    @property
    def nowhere_dense(self) -> bool:
        return not bool(self.interior.any())

    def flagged_cells(self):
        iy, ix = np.nonzero(self.flagged)
        return [(int(i), int(j), complex(self.centers[i, j]), float(self.norm[i, j])) for i, j in zip(iy, ix)]


def cell_centers(region, n: int) -> np.ndarray:
    x0, x1, y0, y1 = region
    if not (x1 > x0 and y1 > y0):
        raise ValueError("region must satisfy x0 < x1 and y0 < y1")
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys)
    return X + 1j * Y


def scan_grid(func, s: Surface, region, n: int, tol: float, margin: float | None = None,
              threads: int | None = None, labels: tuple = ()) -> ScanResult:
    """Evaluate ``func`` (vectorised, returns ``shape + (dim,)``) on cell centres and flag small norms."""
    if n < 2:
        raise ValueError("grid size must be at least 2")
    centers = cell_centers(region, n)
    diag = math.hypot((region[1] - region[0]) / n, (region[3] - region[2]) / n)
    margin = diag if margin is None else margin
    excluded = s.puncture_distance(centers) <= margin
    threads = thread_count() if threads is None else threads
    free = centers[~excluded]
    filler = complex(free[0]) if free.size else None

    def rows(ix):
        ok = ~excluded[ix]
        if filler is None:
            return np.full(ok.shape + (len(labels),), np.nan)
        vals = func(np.where(ok, centers[ix], filler))
        return np.where(ok[..., None], vals, np.nan)

    chunks = np.array_split(np.arange(n), max(1, min(threads, n)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(rows, chunks))
    else:
        parts = [rows(c) for c in chunks]
    values = np.concatenate(parts, axis=0)
    norm = np.linalg.norm(values, axis=-1) if values.shape[-1] else np.zeros(centers.shape)
    norm = np.where(excluded, np.nan, norm)
    flagged = (~excluded) & (np.nan_to_num(norm, nan=np.inf) < tol)
    return ScanResult(tuple(float(r) for r in region), n, tol, centers, values, norm, flagged, excluded, labels)


def zero_locus_scan(s: Surface, p, region, n: int, tol: float, margin: float | None = None,
                    threads: int | None = None) -> ScanResult:
    """Cells where ``|Ψ_p| < tol`` with a nowhere-density verdict."""
    p = complex(p)
    _check(s, p, "base point")
    fib = graded_fiber(s)
    res = scan_grid(lambda q: psi_p_grid(s, p, q), s, region, n, tol, margin, threads, fib.labels)
    res.degenerate = fib.dimension == 0
    res.meta["base"] = p
    return res


def nondegeneracy_rank(s: Surface, p, samples, rel_tol: float = 1e-10, method: str = "closed_form",
                       abs_tol: float = 1e-12) -> int:
    """Rank of the matrix with rows ``Ψ_p(q_i)``."""
    dim = graded_fiber(s).dimension
    if dim == 0:
        raise DegenerateFiberError("Gr^W_-2 of the Lie algebra is zero: the period map is constant")
    samples = list(samples)
    if len(samples) < dim:
        raise ValueError(f"need at least {dim} samples, got {len(samples)}")
    if method == "closed_form":
        rows = psi_p_grid(s, complex(p), np.asarray(samples, dtype=complex))
    else:
        rows = np.array([psi_p(s, p, q, method) for q in samples])
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv.size == 0 or sv[0] <= abs_tol:
        return 0
    return int(np.sum(sv > max(rel_tol * sv[0], abs_tol)))


def sample_points(s: Surface, count: int, rng: np.random.Generator, clearance: float = 0.1,
                  box=(-2.0, 2.0, -2.0, 2.0)) -> np.ndarray:
    """Random chart points at distance ``> clearance`` from every puncture."""
    out = []
    while len(out) < count:
        if s.kind == "torus":
            a, b = rng.random(2)
            z = a + b * s.tau
        else:
            z = complex(rng.uniform(box[0], box[1]), rng.uniform(box[2], box[3]))
        if float(s.puncture_distance(z)) > clearance:
            out.append(z)
    return np.array(out)
