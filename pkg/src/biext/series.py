"""Truncated power-series checks for sums of squared moduli and for ``Σ h_jk ω_j∧ω̄_k``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .surfaces import Surface, holomorphic_basis

IDENTITY_TOL = 1e-12
KERNEL_RTOL = 1e-10
VANISH_TOL = 1e-10


@dataclass(frozen=True)
class TruncatedSeries:
    """``Σ_{r≤R} a_r t^r``."""

    coeffs: tuple

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a series needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("series coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(complex(x) for x in c))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=complex), self.array())

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return TruncatedSeries(self.array() + other.array())

    def __mul__(self, c) -> "TruncatedSeries":
        return TruncatedSeries(complex(c) * self.array())

    __rmul__ = __mul__


@dataclass(frozen=True)
class DependenceResult:
    identity_holds: bool
    identity_residual: float
    order: int
    vector: np.ndarray | None = None  # coefficients on (f_1..f_n, h_1..h_m)
    kernel: np.ndarray | None = None  # columns spanning all dependences
    degenerate: bool = False

    @property
    def verdict(self) -> str:
        head = "dependent" if self.identity_holds else "identity fails"
        return f"{head} (truncated at order {self.order})"


def mixed_coefficients(fs: Sequence[TruncatedSeries], hs: Sequence[TruncatedSeries]) -> np.ndarray:
    """Coefficient of ``t^r t̄^s`` in ``Σ|f_j|² - Σ|h_k|²``."""
    size = len((list(fs) + list(hs))[0].coeffs)
    out = np.zeros((size, size), dtype=complex)
    for f in fs:
        out += np.outer(f.array(), np.conj(f.array()))
    for h in hs:
        out -= np.outer(h.array(), np.conj(h.array()))
    return out


def extract_dependence(fs: Sequence[TruncatedSeries], hs: Sequence[TruncatedSeries],
                       tol: float = IDENTITY_TOL) -> DependenceResult:
    """If ``Σ|f_j|² = Σ|h_k|²`` up to order R, a nontrivial linear relation among all series."""
    fs, hs = list(fs), list(hs)
    allseries = fs + hs
    if not allseries:
        raise ValueError("no series given")
    orders = {s.order for s in allseries}
    if len(orders) != 1:
        raise ValueError(f"mismatched truncation orders {sorted(orders)}")
    R = orders.pop()
    n_tot = len(allseries)
    if R < n_tot:
        raise ValueError(f"truncation order {R} is below the number of series {n_tot}")
    resid = float(np.max(np.abs(mixed_coefficients(fs, hs))))
    if resid >= tol:
        return DependenceResult(False, resid, R)
    Z = np.array([s.array() for s in allseries]).T  # (R+1, n_tot)
    _, sv, vh = np.linalg.svd(Z)
    if sv.size == 0 or sv[0] == 0:
        e1 = np.zeros(n_tot, dtype=complex)
        e1[0] = 1.0
        return DependenceResult(True, resid, R, e1, np.eye(n_tot, dtype=complex), degenerate=True)
    rank = int(np.sum(sv > KERNEL_RTOL * sv[0]))
    kernel = np.conj(vh[rank:]).T
    # relations read off coefficientwise: Σ a_r conj(f_j) - Σ b_r conj(h_k) = 0
    n = len(fs)
    vector = None
    for row in Z:
        v = np.conj(np.concatenate([row[:n], -row[n:]]))
        if np.max(np.abs(v)) > KERNEL_RTOL * sv[0]:
            vector = v / v[np.argmax(np.abs(v))]
            break
    if vector is None or np.max(np.abs(Z @ vector)) > 1e-10 * max(1.0, sv[0]):
        vector = kernel[:, 0] / kernel[np.argmax(np.abs(kernel[:, 0])), 0]
    return DependenceResult(True, resid, R, vector, kernel)


def combination(result_vector, series: Sequence[TruncatedSeries]) -> np.ndarray:
    """Coefficients of ``Σ v_i·series_i``."""
    Z = np.array([s.array() for s in series]).T
    return Z @ np.asarray(result_vector, dtype=complex)


# -- Ω restricted to X --------------------------------------------------------

@dataclass(frozen=True)
class RestrictionResult:
    vanishes: bool
    values: np.ndarray  # dx∧dy densities at the samples
    max_abs: float
    witness: complex | None
    signature: tuple  # (positive, negative, zero) eigenvalue counts of i·h


def _basis_values(basis, z) -> np.ndarray:
    vals = []
    for b in basis:
        if callable(b) and not hasattr(b, "coeffs"):
            vals.append(np.asarray(b(z), dtype=complex))
        else:
            vals.append(np.asarray(b.coeffs(z)[0], dtype=complex))
    return np.array(vals)


def restriction_vanishing(h, samples, s: Surface | None = None, basis: Sequence[Callable] | None = None,
                          tol: float = VANISH_TOL) -> RestrictionResult:
    """Evaluate ``Ω = Σ h_jk ω_j∧ω̄_k`` (as ``dx∧dy`` density) at ``samples``."""
    if basis is None:
        if s is None:
            raise ValueError("give a surface or an explicit basis")
        basis = holomorphic_basis(s)
    h = np.atleast_2d(np.asarray(h, dtype=complex)) if len(basis) else np.zeros((0, 0), dtype=complex)
    if h.shape != (len(basis), len(basis)):
        raise ValueError(f"h must be {len(basis)}x{len(basis)}")
    if h.size and np.max(np.abs(h + h.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
        raise ValueError("h must be skew-hermitian")
    z = np.asarray(samples, dtype=complex).ravel()
    if h.size:
        F = _basis_values(basis, z)  # (g, N)
        coef = np.einsum("jk,jn,kn->n", h, F, np.conj(F))
        values = (-2j * coef).real  # dz∧dz̄ = -2i dx∧dy
        eig = np.linalg.eigvalsh(1j * h)
        scale = max(1.0, float(np.max(np.abs(eig))))
        sig = (int(np.sum(eig > 1e-12 * scale)), int(np.sum(eig < -1e-12 * scale)),
               int(np.sum(np.abs(eig) <= 1e-12 * scale)))
    else:
        values = np.zeros(z.shape)
        sig = (0, 0, 0)
    max_abs = float(np.max(np.abs(values), initial=0.0))
    vanishes = max_abs < tol
    witness = None if vanishes else complex(z[int(np.argmax(np.abs(values)))])
    return RestrictionResult(vanishes, values, max_abs, witness, sig)
