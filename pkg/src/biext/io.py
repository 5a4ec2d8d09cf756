"""JSON readers/writers for surfaces, paths, expressions, Φ, series and biextensions.

Complex numbers are ``[re, im]`` pairs or plain reals; inside biextension
files each part may also be a fraction string such as ``"3/7"``, and a file
whose entries are all integers or strings is read in exact arithmetic.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from . import exact as ex
from .chen import IteratedIntegralExpr, Path
from .exact import GaussianRational
from .forms import DZ, DZBAR, OneForm
from .greens import solve_green, xi_phi_from_f
from .hodge import PeriodValue, RealBiextension, RealHodgeStructure
from .periods import graded_fiber
from .pushforward import MonodromyHodgeMap
from .series import TruncatedSeries
from .surfaces import INF, Surface, holomorphic_basis, is_infinite, k_space_basis, third_kind_basis


class FormatError(ValueError):
    """Malformed input file or argument."""


def _read(source) -> Any:
    if isinstance(source, (dict, list)):
        return source
    try:
        text = FsPath(source).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {source}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: invalid JSON ({exc})") from None


def parse_complex(x) -> complex:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        parts = x.split(",")
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        return complex(x.replace("i", "j"))
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise FormatError(f"complex value must be [re, im], got {x!r}")
        return complex(float(Fraction(str(x[0]))), float(Fraction(str(x[1]))))
    if isinstance(x, (int, float)):
        return complex(x)
    raise FormatError(f"cannot read a complex number from {x!r}")


def complex_to_json(z: complex):
    z = complex(z)
    if is_infinite(z):
        return "inf"
    return [z.real, z.imag]


def parse_point(text: str) -> complex:
    """``"re,im"`` (or a Python complex literal) to a finite complex number."""
    try:
        z = parse_complex(text)
    except (ValueError, FormatError):
        raise FormatError(f"cannot parse point {text!r}; expected 're,im'") from None
    if is_infinite(z):
        raise FormatError("points must be finite")
    return z


def parse_region(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise FormatError(f"cannot parse region {text!r}; expected 'x0,x1,y0,y1'") from None
    if len(vals) != 4 or not (vals[1] > vals[0] and vals[3] > vals[2]):
        raise FormatError("region must be 'x0,x1,y0,y1' with x0 < x1 and y0 < y1")
    return vals


# -- surfaces & paths ------------------------------------------------------------

def load_surface(source) -> Surface:
    data = _read(source)
    try:
        kind = data["kind"]
        punctures = [parse_complex(p) for p in data.get("punctures", [])]
        tau = parse_complex(data["tau"]) if "tau" in data and data["tau"] is not None else None
    except (KeyError, TypeError) as exc:
        raise FormatError(f"surface file: missing or bad field ({exc})") from None
    try:
        return Surface(kind, tuple(punctures), tau)
    except ValueError as exc:
        raise FormatError(f"surface file: {exc}") from None


def surface_to_json(s: Surface) -> dict:
    out = {"kind": s.kind, "punctures": [complex_to_json(p) for p in s.punctures]}
    if s.tau is not None:
        out["tau"] = complex_to_json(s.tau)
    return out


def load_path(source, surface: Surface | None = None) -> Path:
    data = _read(source)
    try:
        verts = [parse_complex(v) for v in data["vertices"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"path file: missing or bad field ({exc})") from None
    try:
        return Path(verts, surface)
    except ValueError as exc:
        raise FormatError(f"path file: {exc}") from None


# -- form registry -----------------------------------------------------------------

def form_registry(s: Surface, green_point: complex | None = None) -> dict[str, OneForm]:
    """Named forms for expression files.

    ``dz``, ``dzbar``; ``zeta:k`` (k = 1..m); ``omega:j`` and ``omegabar:j``
    (holomorphic basis, j = 1..g); ``xi:aN`` and ``phi:aN`` for the N-th
    K-space element (N from 0) on a punctured torus.
    """
    reg: dict[str, OneForm] = {"dz": DZ, "dzbar": DZBAR}
    for j, w in enumerate(holomorphic_basis(s), start=1):
        reg[f"omega:{j}"] = w
        reg[f"omegabar:{j}"] = w.conj()
    if s.m >= 1:
        for k, z in enumerate(third_kind_basis(s, certify=False), start=1):
            reg[f"zeta:{k}"] = z.form
    if s.kind == "torus" and s.punctures:
        for a, h in enumerate(k_space_basis(s).elements):
            p = green_point if green_point is not None else s.x0 + 0.5 + 0.5 * s.tau
            xi, phi = xi_phi_from_f(solve_green(s, h, s.x0, p))
            reg[f"xi:a{a}"] = xi
            reg[f"phi:a{a}"] = phi
    return reg


def load_expr(source, s: Surface) -> IteratedIntegralExpr:
    data = _read(source)
    reg = form_registry(s)

    def form(key):
        if key not in reg:
            raise FormatError(f"unknown form {key!r}; available: {', '.join(sorted(reg))}")
        return reg[key]

    try:
        const = parse_complex(data.get("constant", 0))
        l1 = tuple((parse_complex(t.get("coef", 1)), form(t["form"])) for t in data.get("length1", []))
        l2 = tuple((parse_complex(t.get("coef", 1)), form(t["forms"][0]), form(t["forms"][1]))
                   for t in data.get("length2", []))
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"expression file: bad term ({exc})") from None
    return IteratedIntegralExpr(const, l1, l2)


# -- Φ and series ------------------------------------------------------------------

def load_phi(source, s: Surface) -> tuple[MonodromyHodgeMap, PeriodValue]:
    data = _read(source)
    fib = graded_fiber(s)
    try:
        rows = np.array(data["rows"], dtype=float)
        e_dim = int(data["e_dim"])
        kappa_dim = int(data["kappa_dim"])
        base = [float(x) for x in data.get("base_period", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"phi file: missing or bad field ({exc})") from None
    if (e_dim, kappa_dim) != (len(fib.e_labels), len(fib.kappa_labels)):
        raise FormatError(f"phi file declares e_dim={e_dim}, kappa_dim={kappa_dim}; "
                          f"surface has {len(fib.e_labels)}, {len(fib.kappa_labels)}")
    rows = rows.reshape(-1, fib.dimension) if rows.size else np.zeros((len(base), fib.dimension))
    if not base:
        base = [0.0] * rows.shape[0]
    labels = tuple(data.get("labels", ())) or tuple(f"c{i}" for i in range(rows.shape[0]))
    try:
        phi = MonodromyHodgeMap(fib, rows, labels)
        return phi, PeriodValue(tuple(base), phi.target_labels)
    except ValueError as exc:
        raise FormatError(f"phi file: {exc}") from None


def _series(entries) -> TruncatedSeries:
    return TruncatedSeries([parse_complex(c) for c in entries])


def load_series(source) -> tuple[list[TruncatedSeries], list[TruncatedSeries]]:
    data = _read(source)
    try:
        return [_series(c) for c in data["fs"]], [_series(c) for c in data.get("hs", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"series file: {exc}") from None


# -- biextensions --------------------------------------------------------------------

def _all_exact(x) -> bool:
    if isinstance(x, (list, tuple)):
        return all(_all_exact(y) for y in x)
    if isinstance(x, dict):
        return all(_all_exact(y) for y in x.values())
    return isinstance(x, (int, str)) and not isinstance(x, bool)


def _entry(x, exact: bool):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise FormatError(f"bad complex entry {x!r}")
        re, im = x
    else:
        re, im = x, 0
    if exact:
        return GaussianRational(Fraction(str(re)), Fraction(str(im)))
    return complex(float(Fraction(str(re))), float(Fraction(str(im))))


def _matrix(rows, n: int, exact: bool) -> np.ndarray:
    out = ex.zeros((n, n), exact)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            out[i, j] = _entry(x, exact)
    return out


def _columns(vectors, n: int, exact: bool) -> np.ndarray:
    vectors = list(vectors)
    out = ex.zeros((n, len(vectors)), exact)
    for j, v in enumerate(vectors):
        if len(v) != n:
            raise FormatError(f"vector of length {len(v)} in a space of dimension {n}")
        for i, x in enumerate(v):
            out[i, j] = _entry(x, exact)
    return out


def _hodge_structure(data, weight: int, exact: bool) -> RealHodgeStructure:
    n = int(data["dim"]) if "dim" in data else len(data["conjugation"])
    if n == 0:
        return RealHodgeStructure(weight, ex.eye(0, exact), {}, tuple(data.get("labels", ())))
    J = _matrix(data["conjugation"], n, exact)
    F = {int(p): _columns(v, n, exact) for p, v in data["F"].items()}
    return RealHodgeStructure.from_filtration(weight, F, J, tuple(data.get("labels", ())))


def load_biextension(source) -> RealBiextension:
    data = _read(source)
    exact = data.get("exact", _all_exact({k: v for k, v in data.items() if k not in ("labels", "exact")}))
    try:
        n = int(data["dim"])
        J = _matrix(data["conjugation"], n, exact)
        F = {int(p): _columns(v, n, exact) for p, v in data["F"].items()}
        unit = _columns([data["unit"]], n, exact)
        Bf = _columns(data.get("b_frame", []), n, exact)
        Cf = _columns(data.get("c_frame", []), n, exact)
        B = _hodge_structure(data["B"], -1, exact)
        C = _hodge_structure(data["C"], -2, exact)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"biextension file: {exc}") from None
    try:
        v = RealBiextension(J, F, unit, Bf, Cf, B, C)
    except ValueError as exc:
        raise FormatError(f"biextension file: {exc}") from None
    for m, gens in data.get("W", {}).items():
        Wm = _columns(gens, n, exact)
        if not (ex.rank(Wm) == ex.rank(ex.hstack(Wm, v.mhs.weight(int(m)))) == ex.rank(v.mhs.weight(int(m)))):
            raise FormatError(f"W_{m} in the file disagrees with the framing")
    return v


def _entry_json(x):
    if isinstance(x, GaussianRational):
        return [str(x.re), str(x.im)]
    x = complex(x)
    return [x.real, x.imag]


def _cols_json(A) -> list:
    A = np.asarray(A)
    return [[_entry_json(A[i, j]) for i in range(A.shape[0])] for j in range(A.shape[1])]


def _mat_json(A) -> list:
    A = np.asarray(A)
    return [[_entry_json(x) for x in row] for row in A]


def _hs_json(h: RealHodgeStructure) -> dict:
    return {"dim": h.dim, "conjugation": _mat_json(h.conjugation), "labels": list(h.labels),
            "F": {str(p): _cols_json(Fp) for p, Fp in h.hodge_filtration().items()}}


def biextension_to_json(v: RealBiextension) -> dict:
    n = v.dim
    return {
        "dim": n,
        "exact": v.exact,
        "conjugation": _mat_json(v.conjugation),
        "F": {str(p): _cols_json(np.asarray(Fp).reshape(n, -1)) for p, Fp in v.F.items()},
        "W": {str(m): _cols_json(v.mhs.weight(m)) for m in (-2, -1, 0)},
        "unit": _cols_json(np.asarray(v.unit).reshape(n, 1))[0],
        "b_frame": _cols_json(np.asarray(v.b_frame).reshape(n, -1)),
        "c_frame": _cols_json(np.asarray(v.c_frame).reshape(n, -1)),
        "B": _hs_json(v.B),
        "C": _hs_json(v.C),
    }


def period_to_json(pv: PeriodValue) -> dict:
    coords = [str(c) if isinstance(c, Fraction) else float(c) for c in pv.coords]
    return {"labels": list(pv.labels), "period": coords, "period_float": [float(c) for c in pv.coords]}
