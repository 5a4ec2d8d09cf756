"""Pushing the universal period through a monodromy Hodge map ``Φ``.

``Ψ_V(q) = Ψ_V(p) + Φ·Ψ_p(q)``; the splitting locus is where ``Ψ_V`` vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .hodge import PeriodValue
from .periods import GradedFiber, ScanResult, graded_fiber, psi_p, psi_p_grid, scan_grid
from .surfaces import Surface


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class MonodromyHodgeMap:
    """Real matrix from the graded fiber coordinates to the target period coordinates."""

    source: GradedFiber
    matrix: np.ndarray
    target_labels: tuple = ()

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if self.source.dimension == 0:
            M = M.reshape(M.shape[0] if M.size else len(self.target_labels), 0)
        if M.shape[1] != self.source.dimension:
            raise DimensionError(f"matrix has {M.shape[1]} columns, fiber has dimension {self.source.dimension}")
        if not np.all(np.isfinite(M)):
            raise DimensionError("matrix entries must be finite")
        object.__setattr__(self, "matrix", M)
        labels = tuple(self.target_labels) or tuple(f"c{i}" for i in range(M.shape[0]))
        if len(labels) != M.shape[0]:
            raise DimensionError("target labels do not match the matrix rows")
        object.__setattr__(self, "target_labels", labels)

    @classmethod
    def identity(cls, s: Surface) -> "MonodromyHodgeMap":
        fib = graded_fiber(s)
        return cls(fib, np.eye(fib.dimension), fib.labels)

    @property
    def rank(self) -> int:
        if self.matrix.size == 0:
            return 0
        return int(np.linalg.matrix_rank(self.matrix))

    def apply(self, vec) -> np.ndarray:
        return np.asarray(vec, dtype=float) @ self.matrix.T


def _base(phi: MonodromyHodgeMap, base_period) -> PeriodValue:
    if isinstance(base_period, PeriodValue):
        bp = base_period
    else:
        coords = tuple(float(x) for x in np.ravel(base_period))
        if len(coords) != len(phi.target_labels):
            raise DimensionError("base period and target dimension differ")
        bp = PeriodValue(coords, phi.target_labels)
    if len(bp.coords) != len(phi.target_labels):
        raise DimensionError("base period and target dimension differ")
    return bp


def pushforward_period(phi: MonodromyHodgeMap, base_period, s: Surface, p, q,
                       method: str = "quadrature") -> PeriodValue:
    """``base + Φ·Ψ_p(q)``.

    The sum is formed in rational arithmetic on the binary64 values, so the
    result is exactly additive in ``base_period``.
    """
    if phi.source.surface != s:
        raise DimensionError("Φ was built for a different surface")
    bp = _base(phi, base_period)
    vec = phi.apply(psi_p(s, p, q, method))
    base = PeriodValue(tuple(Fraction(c) for c in bp.coords), bp.labels)
    return base + PeriodValue(tuple(Fraction(float(x)) for x in vec), bp.labels)


def splitting_locus_scan(phi: MonodromyHodgeMap, base_period, s: Surface, p, region, n: int, tol: float,
                         margin: float | None = None, threads: int | None = None) -> ScanResult:
    """Cells where the pushed-forward period is below ``tol``."""
    bp = np.asarray(_base(phi, base_period).as_array(), dtype=float)
    p = complex(p)

    def func(q):
        return bp + phi.apply(psi_p_grid(s, p, q))

    res = scan_grid(func, s, region, n, tol, margin, threads, phi.target_labels)
    res.degenerate = phi.rank == 0 and not np.any(bp)
    res.meta.update(base=p, rank=phi.rank)
    return res


def gr2_vanishing_check(s: Surface) -> bool:
    """Whether ``Gr^W_{-2}`` vanishes: ``ℙ¹``, ``ℂ`` and compact elliptic curves."""
    if s.kind == "sphere":
        return len(s.punctures) <= 1
    return len(s.punctures) == 0
