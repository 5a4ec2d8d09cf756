"""Invariant suites run by ``biext verify``; each returns measured residuals against thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import exact as ex
from .chen import IteratedIntegralExpr, Path, homotopy_defect, is_relatively_closed, path_integrals, segment_clearance
from .forms import DZ, DZBAR, ConstantForm, RationalForm, wirtinger
from .greens import (current_equation_residual, green_oracle, log_coefficient_estimates, oracle_distance,
                     solve_green, xi_phi_from_f)
from .hodge import PeriodValue, RealHodgeStructure, biextension_period, split_biextension, twist
from .periods import graded_fiber, nondegeneracy_rank, psi, psi_p, sample_points, zero_locus_scan
from .pushforward import MonodromyHodgeMap, pushforward_period, splitting_locus_scan
from .series import TruncatedSeries, combination, extract_dependence, restriction_vanishing
from .surfaces import Surface, third_kind_basis

IDENTITY_TOL = 1e-9
FD_TOL = 1e-4


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" {self.detail}" if self.detail else ""
        return f"{status} {self.name} residual={self.residual:.3e} threshold={self.threshold:.1e}{extra}"


def _check(name, residual, threshold, detail="", below=True) -> Check:
    ok = residual < threshold if below else residual > threshold
    return Check(name, bool(ok), float(residual), float(threshold), detail)


def default_surfaces() -> list[Surface]:
    return [
        Surface.sphere("inf", 0),
        Surface.sphere("inf", 0, 1),
        Surface.sphere(0.3, -1 + 0.5j, 1j),
        Surface.torus(1j, 0, 0.5),
        Surface.torus(0.3 + 1.1j, 0, 0.4 + 0.3j),
        Surface.torus(2j, 0.1 + 0.2j),
    ]


# -- random data -------------------------------------------------------------------

def random_sphere(rng) -> Surface:
    k = int(rng.integers(1, 4))
    pts = [complex(*rng.uniform(-1.5, 1.5, 2)) for _ in range(k)]
    first = ["inf"] if rng.random() < 0.5 else []
    while True:
        if min((abs(a - b) for i, a in enumerate(pts) for b in pts[:i]), default=1.0) > 0.3:
            return Surface.sphere(*(first + pts))
        pts = [complex(*rng.uniform(-1.5, 1.5, 2)) for _ in range(k)]


def random_torus(rng) -> Surface:
    tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.0))
    k = int(rng.integers(1, 4))
    while True:
        pts = [a + b * tau for a, b in rng.random((k, 2))]
        s = Surface.torus(tau, *pts)
        if all(float(s.lattice.distance_to_lattice(a - b)) > 0.25 for i, a in enumerate(pts) for b in pts[:i]):
            return s


def random_surface(rng) -> Surface:
    return random_sphere(rng) if rng.random() < 0.5 else random_torus(rng)


def random_closed_form(rng, poles):
    """A closed form: constant a dz + b dz̄ or a rational differential with simple poles."""
    kind = rng.integers(0, 3)
    if kind == 0:
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        return ConstantForm(a, b)
    if kind == 1:
        return ConstantForm(complex(*rng.normal(size=2)), 0.0)
    res = {p: complex(*rng.normal(size=2)) for p in poles}
    return RationalForm(res, const=complex(*rng.normal(size=2)))


def random_polyline(rng, poles, clearance=0.3, nverts=None) -> Path:
    nverts = nverts or int(rng.integers(2, 6))
    while True:
        verts = [complex(*rng.uniform(-2, 2, 2)) for _ in range(nverts)]
        path = Path(verts)
        if all(segment_clearance(a, b, poles)[0] > clearance for a, b in path.segments()):
            return path


# -- suites -------------------------------------------------------------------------------

def suite_diagonal(rng, n=100, tol=None) -> list[Check]:
    worst = 0.0
    for _ in range(n):
        s = random_surface(rng)
        p = sample_points(s, 1, rng, 0.1)[0]
        for method in ("quadrature", "closed_form"):
            worst = max(worst, float(np.max(np.abs(psi_p(s, p, p, method)), initial=0.0)))
    return [Check("diagonal: Ψ_p(p) = 0 exactly", worst == 0.0, worst, 0.0)]


def suite_antisymmetry(rng, n=100, tol=1e-8) -> list[Check]:
    worst = 0.0
    for _ in range(n):
        s = random_surface(rng)
        p, q = sample_points(s, 2, rng, 0.1)
        worst = max(worst, float(np.max(np.abs(psi(s, p, q) + psi(s, q, p)), initial=0.0)))
    return [_check("antisymmetry: |Ψ(p,q) + Ψ(q,p)|", worst, tol)]


def suite_closed_form(rng, tol=IDENTITY_TOL) -> list[Check]:
    s = Surface.sphere("inf", 0)
    h = psi_p(s, 1, 2, "quadrature")[0]
    want = -math.log(2) / (2 * math.pi)
    return [_check("closed-form: h_1 on C-{0}, p=1, q=2", abs(h - want), tol, f"h_1={h:.12f}")]


def suite_certificates(rng, tol=IDENTITY_TOL) -> list[Check]:
    out = []
    for s in default_surfaces():
        if s.m < 1:
            continue
        for z in third_kind_basis(s):
            worst = max(z.residue_error(), z.period_imag())
            out.append(_check(f"certificate: {z.form.name} on {s.describe()}", worst, tol))
    return out


def _shuffle_cases(rng, n):
    for _ in range(n):
        poles = [complex(*rng.uniform(-1.5, 1.5, 2)) for _ in range(int(rng.integers(1, 3)))]
        f = random_closed_form(rng, poles)
        g = random_closed_form(rng, poles)
        yield f, g, random_polyline(rng, poles)


def suite_shuffle(rng, n=50, tol=IDENTITY_TOL) -> list[Check]:
    worst = 0.0
    for f, g, path in _shuffle_cases(rng, n):
        d = path_integrals([f, g], path)
        L, S = d.L, d.S
        worst = max(worst, abs(S[0, 1] + S[1, 0] - L[0] * L[1]))
    return [_check(f"shuffle: |∫φψ + ∫ψφ - ∫φ∫ψ| over {n} cases", worst, tol)]


def suite_chen(rng, n=50, tol=IDENTITY_TOL) -> list[Check]:
    worst = 0.0
    for f, g, path in _shuffle_cases(rng, n):
        a, b = path.split(float(rng.uniform(0.2, 0.8)))
        whole = path_integrals([f, g], path).S[0, 1]
        da, db = path_integrals([f, g], a), path_integrals([f, g], b)
        glued = da.S[0, 1] + db.S[0, 1] + da.L[0] * db.L[1]
        worst = max(worst, abs(whole - glued))
    return [_check(f"chen: composition over {n} split paths", worst, tol)]


def torus_closed_expression(s: Surface, p=None):
    """``2∫ξ + h∫(dz dz̄ - dz̄ dz)`` for the K-space element ``h``."""
    g = solve_green(s, [[1j]], s.x0, p)
    xi, _ = xi_phi_from_f(g)
    h = complex(g.h[0, 0])
    expr = IteratedIntegralExpr(length1=((2.0, xi),), length2=((h, DZ, DZBAR), (-h, DZBAR, DZ)))
    return expr, g


def suite_closedness(rng, tol=IDENTITY_TOL) -> list[Check]:
    out = []
    sphere_expr = IteratedIntegralExpr.double(RationalForm({0.0: 1.0}), RationalForm({-1.0: 1.0}))
    rep = is_relatively_closed(sphere_expr)
    out.append(Check("closedness: sphere ∫φ1φ2 accepted", rep.closed, rep.residual, tol))
    plane = IteratedIntegralExpr.double(DZ, DZBAR)
    rep = is_relatively_closed(plane)
    out.append(Check("closedness: ∫dz dz̄ rejected", not rep.closed, rep.residual, tol, "(expects large residual)"))
    ts = Surface.torus(1j, 0, 0.5)
    texpr, _ = torus_closed_expression(ts)
    rep = is_relatively_closed(texpr)
    out.append(_check("closedness: torus 2∫ξ + h∫(ωω̄ - ω̄ω) accepted", rep.residual, tol))
    # homotopic pairs
    log_expr = IteratedIntegralExpr.line(RationalForm({0.0: 1 / (2j * math.pi)})) + sphere_expr
    d1 = homotopy_defect(log_expr, Path([1, 2]), Path([1, 1.5 + 0.6j, 2]))
    out.append(_check("homotopy: sphere expression, homotopic pair 1→2", abs(d1), 1e-8))
    d2 = homotopy_defect(texpr, Path([0.2 + 0.3j, 0.8 + 0.3j]), Path([0.2 + 0.3j, 0.5 + 0.2j, 0.8 + 0.3j]))
    out.append(_check("homotopy: torus expression, homotopic pair", abs(d2), 1e-8))
    d3 = homotopy_defect(plane, Path([0, 1]), Path([0, 1j, 1]))
    out.append(_check("homotopy: ∫dz dz̄ detour defect", abs(d3), 1e-3, f"defect={d3:.6g}", below=False))
    loop = homotopy_defect(IteratedIntegralExpr.line(RationalForm({0.0: 1 / (2j * math.pi)})),
                           Path([1, 1j, -1, -1j, 1]), Path([1, 1]))
    out.append(_check("homotopy: loop around 0 gives winding number 1", abs(loop - 1), tol))
    return out


def greens_checks(tau, grid_n=256, fd_tol=FD_TOL) -> list[Check]:
    s = Surface.torus(tau, 0)
    g = solve_green(s, [[1j]], 0, 0.5 + 0.5j)
    grid = green_oracle(s, [[1j]], 0, grid_n, p=0.5 + 0.5j)
    out = [_check(f"greens τ={tau}: closed form vs oracle (grid {grid_n})", oracle_distance(g, grid), 1e-6)]
    far = grid.nodes[g.distance_to_singularity(grid.nodes) > 4 * grid.cell]
    res = float(np.max(current_equation_residual(g, far)))
    out.append(_check(f"greens τ={tau}: current equation residual / max|Ω|", res / abs(g.omega_dxdy), fd_tol))
    est = log_coefficient_estimates(g)
    err = max(abs(e - g.log_coefficient) for e in est)
    out.append(_check(f"greens τ={tau}: log coefficient vs -∫Ω/2π", err, 1e-3))
    return out


def suite_greens(rng, fd_tol=FD_TOL) -> list[Check]:
    out = []
    for tau in (1j, 2j, 0.3 + 1.1j):
        out.extend(greens_checks(tau, 256, fd_tol))
    return out


def relation_residuals(g, pts) -> tuple[float, float]:
    xi, phi = xi_phi_from_f(g)
    h = 1e-4
    fz, fzb = wirtinger(g, pts, h)
    xa, _ = xi.coeffs(pts)
    pa, pb = phi.coeffs(pts)
    r1 = max(float(np.max(np.abs(2 * xa - pa - 1j * fz))), float(np.max(np.abs(-pb - 1j * fzb))))
    r2 = float(np.max(np.abs(phi.d(pts) + 2 * g.h[0, 0])))
    return r1, r2


def suite_relations(rng, fd_tol=FD_TOL) -> list[Check]:
    out = []
    for tau in (1j, 2j, 0.3 + 1.1j):
        s = Surface.torus(tau, 0)
        g = solve_green(s, [[1j]], 0, 0.5 + 0.5j)
        n = 12
        a, b = np.meshgrid((np.arange(n) + 0.5) / n, (np.arange(n) + 0.5) / n)
        pts = (a + b * tau).ravel()
        pts = pts[g.distance_to_singularity(pts) > 0.1]
        r1, r2 = relation_residuals(g, pts)
        out.append(_check(f"relations τ={tau}: 2ξ - φ = i df", r1, fd_tol))
        out.append(_check(f"relations τ={tau}: 2Ω + dφ = 0", r2, fd_tol))
    return out


def suite_nondegeneracy(rng, grid=128) -> list[Check]:
    out = []
    for s, p in ((Surface.torus(1j, 0, 0.5), 0.25 + 0.3j), (Surface.sphere("inf", 0, 1), 2.0)):
        dim = graded_fiber(s).dimension
        r = nondegeneracy_rank(s, p, sample_points(s, 10 * dim, rng, 0.1))
        out.append(Check(f"nondegeneracy: rank on {s.describe()}", r == dim, float(dim - r), 1.0,
                         f"rank={r} dim={dim}"))
    s = Surface.torus(1j, 0, 0.5)
    res = zero_locus_scan(s, 0.25 + 0.3j, (0, 1, 0, 1), grid, 1e-3)
    out.append(Check(f"nondegeneracy: torus zero locus nowhere dense ({grid}²)", res.nowhere_dense,
                     float(res.interior.sum()), 1.0, f"flagged={int(res.flagged.sum())}"))
    s = Surface.sphere("inf", 0)
    res = zero_locus_scan(s, 1.0, (-2, 2, -2, 2), grid, 1e-3)
    dev = max((abs(abs(z) - 1) for _, _, z, _ in res.flagged_cells()), default=math.inf)
    out.append(Check(f"nondegeneracy: sphere zero locus nowhere dense ({grid}²)", res.nowhere_dense,
                     float(res.interior.sum()), 1.0))
    out.append(_check("nondegeneracy: sphere flagged cells on |q| = 1", dev, res.cell_diagonal))
    return out


def random_pure_structure(rng, weight: int, dim: int) -> RealHodgeStructure:
    """Exact random real Hodge structure of odd weight -1 (pairs) or weight -2 (Tate pieces)."""
    half = weight // 2 if weight % 2 == 0 else None
    J = ex.eye(dim, True)
    pieces = {}
    if half is not None:
        # weight -2: real basis of type (-1,-1) plus conjugate pairs of types (0,-2), (-2,0)
        pairs = int(rng.integers(0, (dim - 1) // 2 + 1))
        tate = dim - 2 * pairs
        P = _random_invertible(rng, dim)
        cols_t = [P[:, [i]] for i in range(tate)]
        cols_a, cols_b = [], []
        for k in range(pairs):
            u = P[:, [tate + 2 * k]]
            w = P[:, [tate + 2 * k + 1]]
            cols_a.append(u + ex.I * w)
            cols_b.append(u - ex.I * w)
        if tate:
            pieces[(-1, -1)] = ex.hstack(*cols_t)
        if pairs:
            pieces[(0, -2)] = ex.hstack(*cols_a)
            pieces[(-2, 0)] = ex.hstack(*cols_b)
    else:
        if dim % 2:
            raise ValueError("odd weight needs even rank")
        P = _random_invertible(rng, dim)
        g = dim // 2
        cols_a = [P[:, [2 * k]] + ex.I * P[:, [2 * k + 1]] for k in range(g)]
        cols_b = [P[:, [2 * k]] - ex.I * P[:, [2 * k + 1]] for k in range(g)]
        pieces[(0, -1)] = ex.hstack(*cols_a)
        pieces[(-1, 0)] = ex.hstack(*cols_b)
    return RealHodgeStructure(weight, J, pieces)


def _random_invertible(rng, n: int) -> np.ndarray:
    while True:
        A = ex.gaussian_array(rng.integers(-3, 4, size=(n, n)).tolist())
        if ex.rank(A) == n:
            return A


def random_rational(rng) -> Fraction:
    return Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 30)))


def suite_recipe(rng, n=20) -> list[Check]:
    worst = 0
    for _ in range(n):
        b = int(rng.choice([0, 2]))
        c = int(rng.integers(1, 4))
        B = random_pure_structure(rng, -1, b) if b else RealHodgeStructure(-1, ex.eye(0, True), {})
        C = random_pure_structure(rng, -2, c)
        v0 = split_biextension(B, C)
        k = C.real_basis(-1).shape[1]
        if k == 0:
            continue
        t = tuple(random_rational(rng) for _ in range(k))
        got = biextension_period(twist(v0, PeriodValue(t)))
        err = max(abs(Fraction(a) - b_) for a, b_ in zip(got.coords, t))
        worst = max(worst, err)
    return [Check(f"recipe: period(twist(V0, t)) = t exactly over {n} cases", worst == 0, float(worst), 0.0)]


def suite_cocycle(rng, n=50, tol=1e-8) -> list[Check]:
    worst = 0.0
    for _ in range(n):
        s = random_surface(rng)
        fib = graded_fiber(s)
        if fib.dimension == 0:
            continue
        rows = int(rng.integers(1, 4))
        phi = MonodromyHodgeMap(fib, rng.normal(size=(rows, fib.dimension)))
        base = rng.normal(size=rows)
        p, p2, q = sample_points(s, 3, rng, 0.1)
        direct = pushforward_period(phi, base, s, p, q).as_array()
        base2 = pushforward_period(phi, base, s, p, p2)
        again = pushforward_period(phi, base2, s, p2, q).as_array()
        worst = max(worst, float(np.max(np.abs(direct - again))))
    out = [_check(f"cocycle: two evaluation orders over {n} cases", worst, tol)]
    s = Surface.sphere("inf", 0)
    res = splitting_locus_scan(MonodromyHodgeMap.identity(s), [0.0], s, 1.0, (-2, 2, -2, 2), 128, 1e-3)
    dev = max((abs(abs(z) - 1) for _, _, z, _ in res.flagged_cells()), default=math.inf)
    out.append(_check("cocycle: splitting locus is |q| = 1 within a cell diagonal", dev, res.cell_diagonal))
    return out


def suite_series(rng, n=30) -> list[Check]:
    worst = 0.0
    for i in range(n):
        fs, hs = random_dependent_family(rng, sqrt2=(i == 0))
        res = extract_dependence(fs, hs)
        if not res.identity_holds:
            worst = math.inf
            continue
        worst = max(worst, float(np.max(np.abs(combination(res.vector, fs + hs)))))
    out = [_check(f"series: dependence vectors annihilate over {n} cases", worst, 1e-10)]
    ok = True
    s = Surface.torus(1j, 0)
    pts = sample_points(s, 5, rng)
    for i in range(50):
        c = 0.0 if i % 5 == 0 else float(rng.normal())
        h = np.array([[1j * c]])
        res = restriction_vanishing(h, pts, s)
        ok &= res.vanishes == (abs(c) < 1e-12)
    out.append(Check("series: Ω|_X = 0 iff h = 0 over 50 cases", ok, 0.0 if ok else 1.0, 1.0))
    return out


def random_dependent_family(rng, sqrt2: bool = False):
    """``fs = U·hs`` for a random isometry ``U`` (so ``Σ|f|² = Σ|h|²``), padded with zero rows."""
    if sqrt2:
        r = 1 / math.sqrt(2)
        R = 4
        pad = [0] * (R - 1)
        return ([TruncatedSeries([r, r] + pad), TruncatedSeries([r, -r] + pad)],
                [TruncatedSeries([1, 0] + pad), TruncatedSeries([0, 1] + pad)])
    m = int(rng.integers(1, 4))
    n = m + int(rng.integers(0, 2))
    R = n + m + int(rng.integers(0, 3))
    H = rng.normal(size=(m, R + 1)) + 1j * rng.normal(size=(m, R + 1))
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    U = Q[:, :m]  # n x m with orthonormal columns: U^*U = 1
    Fm = U @ H
    return [TruncatedSeries(r) for r in Fm], [TruncatedSeries(r) for r in H]


SUITES: dict[str, Callable] = {
    "diagonal": suite_diagonal,
    "antisymmetry": suite_antisymmetry,
    "closed-form": suite_closed_form,
    "certificates": suite_certificates,
    "shuffle": suite_shuffle,
    "chen": suite_chen,
    "closedness": suite_closedness,
    "greens": suite_greens,
    "relations": suite_relations,
    "nondegeneracy": suite_nondegeneracy,
    "recipe": suite_recipe,
    "cocycle": suite_cocycle,
    "series": suite_series,
}


def run_suite(name: str, seed: int = 0, tol: float | None = None, fd_tol: float | None = None) -> list[Check]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for nm in names:
        if nm not in SUITES:
            raise KeyError(nm)
        rng = np.random.default_rng(seed)
        fn = SUITES[nm]
        kwargs = {}
        code = fn.__code__.co_varnames[: fn.__code__.co_argcount]
        if tol is not None and "tol" in code:
            kwargs["tol"] = tol
        if fd_tol is not None and "fd_tol" in code:
            kwargs["fd_tol"] = fd_tol
        out.extend(fn(rng, **kwargs))
    return out
