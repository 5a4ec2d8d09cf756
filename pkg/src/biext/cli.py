"""``biext`` command line.

Exit status: 0 on success, 1 if a ``verify`` check fails, 2 for unreadable
input, 3 when a quadrature does not converge.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import io as bio
from .chen import ConvergenceError, PathError, is_relatively_closed, iterated_integral
from .forms import PoleProximityError
from .greens import GreenError, solve_green
from .hodge import HodgeError, biextension_period
from .periods import DegenerateFiberError, ScanResult, graded_fiber, psi_p, zero_locus_scan
from .pushforward import DimensionError, pushforward_period, splitting_locus_scan
from .series import extract_dependence
from .surfaces import Surface, SurfaceError

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_CONVERGENCE = 0, 1, 2, 3
DEFAULT_SCAN_TOL = 1e-3
MIN_GRID = 8

COMMANDS = ("compute-period", "scan-zero-locus", "splitting-locus", "pushforward", "greens-table",
            "integrate", "verify", "biextension-period", "series-dependence")


@dataclass
class RunConfig:
    subcommand: str
    surface: str | None = None
    base: str | None = None
    point: str | None = None
    grid: int | None = None
    region: str | None = None
    tol: float | None = None
    fd_tol: float | None = None
    out: str | None = None
    format: str | None = None
    suite: str = "all"
    seed: int = 0
    figure: str | None = None
    phi: str | None = None
    expr: str | None = None
    path: str | None = None
    biext: str | None = None
    series: str | None = None
    method: str = "quadrature"
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.subcommand not in COMMANDS:
            raise bio.FormatError(f"unknown subcommand {self.subcommand!r}")
        for name in ("tol", "fd_tol"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise bio.FormatError(f"--{name.replace('_', '-')} must be positive")
        if self.grid is not None and self.grid < MIN_GRID:
            raise bio.FormatError(f"--grid must be at least {MIN_GRID}")
        if self.format not in (None, "json", "csv"):
            raise bio.FormatError("--format must be json or csv")
        if self.method not in ("quadrature", "closed_form"):
            raise bio.FormatError("--method must be quadrature or closed_form")


# -- output helpers ----------------------------------------------------------------

def _num(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        FsPath(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows, trailer=()) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    for line in trailer:
        buf.write(line + "\n")
    return buf.getvalue()


def _need(cfg: RunConfig, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise bio.FormatError(f"{cfg.subcommand} needs --{n.replace('_', '-')}")


def _surface(cfg: RunConfig) -> Surface:
    _need(cfg, "surface")
    return bio.load_surface(cfg.surface)


def default_region(s: Surface) -> tuple[float, float, float, float]:
    if s.kind == "sphere":
        return (-2.0, 2.0, -2.0, 2.0)
    t = s.tau
    return (min(0.0, t.real), max(1.0, 1.0 + t.real), 0.0, t.imag)


def _region(cfg: RunConfig, s: Surface):
    return bio.parse_region(cfg.region) if cfg.region else default_region(s)


def _vector_json(s: Surface, vec) -> dict:
    fib = graded_fiber(s)
    e, k = fib.split(vec)
    return {"e": [_num(x) for x in e], "kappa": [_num(x) for x in k], "labels": list(fib.labels)}


def verdict_line(res: ScanResult) -> str:
    if res.degenerate:
        head = "degenerate (period map is constant)"
    else:
        head = "nowhere dense" if res.nowhere_dense else "not nowhere dense"
    return (f"# verdict: {head}; flagged={int(res.flagged.sum())} interior={int(res.interior.sum())} "
            f"excluded={int(res.excluded.sum())} grid={res.n} tol={res.tol:g} cell_diagonal={res.cell_diagonal:.6g}")


def scan_output(res: ScanResult, fmt: str) -> str:
    labels = list(res.labels)
    rows = []
    for iy, ix, z, nrm in res.flagged_cells():
        rows.append([ix, iy, z.real, z.imag, nrm] + [float(v) for v in res.values[iy, ix]])
    if fmt == "json":
        return _dump_json({
            "region": list(res.region), "grid": res.n, "tol": res.tol, "labels": labels,
            "cells": [dict(zip(["ix", "iy", "q_re", "q_im", "norm"] + labels, r)) for r in rows],
            "nowhere_dense": res.nowhere_dense, "degenerate": res.degenerate,
            "flagged": int(res.flagged.sum()), "interior": int(res.interior.sum()),
            "excluded": int(res.excluded.sum()), "cell_diagonal": res.cell_diagonal,
        })
    return _csv_text(["ix", "iy", "q_re", "q_im", "norm"] + labels, rows, [verdict_line(res)])


# -- subcommands ---------------------------------------------------------------------

def cmd_compute_period(cfg: RunConfig) -> int:
    s = _surface(cfg)
    _need(cfg, "base", "point")
    p, q = bio.parse_point(cfg.base), bio.parse_point(cfg.point)
    out = _vector_json(s, psi_p(s, p, q, cfg.method))
    out.update(base=bio.complex_to_json(p), point=bio.complex_to_json(q), method=cfg.method)
    _emit(_dump_json(out), cfg.out)
    return EXIT_OK


def _scan_common(cfg: RunConfig, res: ScanResult, s: Surface) -> int:
    _emit(scan_output(res, cfg.format or "csv"), cfg.out)
    if cfg.figure:
        from .plotting import scan_figure
        scan_figure(res, s, cfg.figure)
    return EXIT_OK


def cmd_scan_zero_locus(cfg: RunConfig) -> int:
    s = _surface(cfg)
    _need(cfg, "base")
    res = zero_locus_scan(s, bio.parse_point(cfg.base), _region(cfg, s), cfg.grid or 128,
                          cfg.tol or DEFAULT_SCAN_TOL)
    return _scan_common(cfg, res, s)


def cmd_splitting_locus(cfg: RunConfig) -> int:
    s = _surface(cfg)
    _need(cfg, "base", "phi")
    phi, base = bio.load_phi(cfg.phi, s)
    res = splitting_locus_scan(phi, base, s, bio.parse_point(cfg.base), _region(cfg, s), cfg.grid or 128,
                               cfg.tol or DEFAULT_SCAN_TOL)
    return _scan_common(cfg, res, s)


def cmd_pushforward(cfg: RunConfig) -> int:
    s = _surface(cfg)
    _need(cfg, "base", "point", "phi")
    phi, base = bio.load_phi(cfg.phi, s)
    p, q = bio.parse_point(cfg.base), bio.parse_point(cfg.point)
    pv = pushforward_period(phi, base, s, p, q, cfg.method)
    out = bio.period_to_json(pv)
    out.update(base=bio.complex_to_json(p), point=bio.complex_to_json(q), rank=phi.rank, method=cfg.method)
    _emit(_dump_json(out), cfg.out)
    return EXIT_OK


def cmd_greens_table(cfg: RunConfig) -> int:
    s = _surface(cfg)
    if s.kind != "torus":
        raise SurfaceError("Green currents exist only on the torus backend")
    x0 = s.x0 if s.punctures else 0j
    p = bio.parse_point(cfg.base) if cfg.base else None
    g = solve_green(s, None, x0, p)
    n = cfg.grid or 32
    x_lo, x_hi, y_lo, y_hi = _region(cfg, s)
    xs = x_lo + (np.arange(n) + 0.5) * (x_hi - x_lo) / n
    ys = y_lo + (np.arange(n) + 0.5) * (y_hi - y_lo) / n
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    keep = g.distance_to_singularity(Z) > 1e-9
    Z = Z[keep]
    F = np.asarray(g(Z), dtype=float)
    if (cfg.format or "csv") == "json":
        text = _dump_json({"h": bio.complex_to_json(complex(g.h[0, 0])), "x0": bio.complex_to_json(x0),
                           "normalization_point": bio.complex_to_json(g.normalization_point),
                           "log_coefficient": g.log_coefficient,
                           "rows": [[z.real, z.imag, f] for z, f in zip(Z, F)]})
    else:
        text = _csv_text(["z_re", "z_im", "f"], [[z.real, z.imag, f] for z, f in zip(Z, F)])
    _emit(text, cfg.out)
    if cfg.figure:
        from .plotting import greens_figure
        greens_figure(Z, F, s, cfg.figure)
    return EXIT_OK


def cmd_integrate(cfg: RunConfig) -> int:
    s = _surface(cfg)
    _need(cfg, "expr", "path")
    expr = bio.load_expr(cfg.expr, s)
    path = bio.load_path(cfg.path, s)
    kw = {"tol": cfg.tol} if cfg.tol else {}
    val = iterated_integral(expr, path, **kw)
    rep = is_relatively_closed(expr)
    out = {"value": bio.complex_to_json(val), "relatively_closed": bool(rep.closed),
           "closedness_residual": _num(rep.residual)}
    _emit(_dump_json(out), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import SUITES, run_suite
    names = [n.strip() for n in cfg.suite.split(",")] if cfg.suite else ["all"]
    for n in names:
        if n != "all" and n not in SUITES:
            raise bio.FormatError(f"unknown suite {n!r}; available: all, {', '.join(SUITES)}")
    checks = []
    for n in names:
        checks.extend(run_suite(n, cfg.seed, cfg.tol, cfg.fd_tol))
    text = "".join(c.line() + "\n" for c in checks)
    failed = sum(not c.passed for c in checks)
    text += f"{len(checks) - failed}/{len(checks)} checks passed\n"
    _emit(text, cfg.out)
    return EXIT_OK if failed == 0 else EXIT_CHECK


def cmd_biextension_period(cfg: RunConfig) -> int:
    _need(cfg, "biext")
    v = bio.load_biextension(cfg.biext)
    _emit(_dump_json(bio.period_to_json(biextension_period(v))), cfg.out)
    return EXIT_OK


def cmd_series_dependence(cfg: RunConfig) -> int:
    _need(cfg, "series")
    fs, hs = bio.load_series(cfg.series)
    res = extract_dependence(fs, hs, **({"tol": cfg.tol} if cfg.tol else {}))
    out = {"identity_holds": res.identity_holds, "identity_residual": res.identity_residual,
           "order": res.order, "verdict": res.verdict, "degenerate": res.degenerate,
           "vector": None if res.vector is None else [bio.complex_to_json(x) for x in res.vector]}
    _emit(_dump_json(out), cfg.out)
    return EXIT_OK


HANDLERS = {
    "compute-period": cmd_compute_period,
    "scan-zero-locus": cmd_scan_zero_locus,
    "splitting-locus": cmd_splitting_locus,
    "pushforward": cmd_pushforward,
    "greens-table": cmd_greens_table,
    "integrate": cmd_integrate,
    "verify": cmd_verify,
    "biextension-period": cmd_biextension_period,
    "series-dependence": cmd_series_dependence,
}

PARSE_ERRORS = (bio.FormatError, SurfaceError, PathError, PoleProximityError, DimensionError, GreenError,
                HodgeError, DegenerateFiberError, ValueError, KeyError)


def run(cfg: RunConfig) -> int:
    """Execute one subcommand and return its exit status."""
    try:
        cfg.validate()
        return HANDLERS[cfg.subcommand](cfg)
    except ConvergenceError as exc:
        print(f"biext: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PARSE_ERRORS as exc:
        print(f"biext: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biext", description="Periods of real biextensions from path torsors.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name, help_, *flags):
        sp = sub.add_parser(name, help=help_)
        for f in flags:
            f(sp)
        sp.add_argument("--out", help="output file (default: stdout)")
        return sp

    surface = lambda sp: sp.add_argument("--surface", help="surface JSON file")  # noqa: E731
    base = lambda sp: sp.add_argument("--base", help="base point p as 're,im'")  # noqa: E731
    point = lambda sp: sp.add_argument("--point", help="point q as 're,im'")  # noqa: E731
    grid = lambda sp: sp.add_argument("--grid", type=int, help="cells per side")  # noqa: E731
    region = lambda sp: sp.add_argument("--region", help="'x0,x1,y0,y1'")  # noqa: E731
    tol = lambda sp: sp.add_argument("--tol", type=float, help="tolerance override")  # noqa: E731
    fmt = lambda sp: sp.add_argument("--format", choices=("json", "csv"))  # noqa: E731
    figure = lambda sp: sp.add_argument("--figure", help="also write a PNG figure here")  # noqa: E731
    phi = lambda sp: sp.add_argument("--phi", help="Φ JSON file")  # noqa: E731
    method = lambda sp: sp.add_argument("--method", default="quadrature",  # noqa: E731
                                        choices=("quadrature", "closed_form"))

    add("compute-period", "Ψ_p(q) as JSON", surface, base, point, method)
    add("scan-zero-locus", "grid scan of |Ψ_p| < tol", surface, base, grid, region, tol, fmt, figure)
    add("splitting-locus", "grid scan of the pushed-forward period", surface, base, phi, grid, region, tol,
        fmt, figure)
    add("pushforward", "base + Φ·Ψ_p(q)", surface, base, point, phi, method)
    add("greens-table", "Green current samples", surface, base, grid, region, fmt, figure)
    add("integrate", "iterated integral of an expression along a path", surface, tol,
        lambda sp: sp.add_argument("--expr", help="expression JSON file"),
        lambda sp: sp.add_argument("--path", help="path JSON file"))
    add("verify", "run invariant suites", tol,
        lambda sp: sp.add_argument("--suite", default="all", help="suite name(s), comma separated"),
        lambda sp: sp.add_argument("--seed", type=int, default=0),
        lambda sp: sp.add_argument("--fd-tol", type=float, dest="fd_tol"))
    add("biextension-period", "period of a real biextension file",
        lambda sp: sp.add_argument("--biext", help="biextension JSON file"))
    add("series-dependence", "linear dependence from Σ|f|² = Σ|h|²", tol,
        lambda sp: sp.add_argument("--series", help="series JSON file"))
    return ap


VALUE_FLAGS = ("--region", "--base", "--point")


def _glue_negative_values(argv):
    """Let ``--region -2,2,-1,1`` through argparse, which reads ``-2,...`` as a flag."""
    out, it = [], iter(argv)
    for a in it:
        if a in VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
