"""Green currents ``i∂∂̄f = Ω - (∫Ω) δ_{x₀}`` on a torus.

With ``Ω = h dz∧dz̄`` and ``h = ic`` the closed form is

    f(z) = -(M/π) [log|θ₁(π(z-x₀))| - π (Im(z-x₀))² / Im τ],   M = ∫Ω = 2c Im τ,

normalised by ``f_Ω = f - f(p)``.  :func:`green_oracle` solves the same
equation spectrally on a lattice grid, independently of theta functions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .forms import HOLO, MIXED, CallableForm, SmoothFunction
from .surfaces import Surface, SurfaceError, k_space_basis, omega_mass

TAIL_EXP = 37.0  # exp(-37) < 1e-16


class GreenError(ValueError):
    pass


def _as_h(omega) -> np.ndarray:
    h = np.atleast_2d(np.asarray(omega, dtype=complex))
    if h.shape != (1, 1):
        raise GreenError("torus K-space elements are 1x1 skew-hermitian matrices")
    if abs(h[0, 0].real) > 1e-12:
        raise GreenError("h must be skew-hermitian (purely imaginary for 1x1)")
    return h


@dataclass(frozen=True)
class GreenFunction:
    surface: Surface
    h: np.ndarray
    singular_point: complex
    normalization_point: complex

    def __hash__(self):
        return hash((self.surface, complex(self.h[0, 0]), self.singular_point, self.normalization_point))

    @property
    def c(self) -> float:
        """``Ω = ic dz∧dz̄ = 2c dx∧dy``."""
        return float(self.h[0, 0].imag)

    @property
    def omega_mass(self) -> float:
        return omega_mass(self.surface, self.h)

    @property
    def log_coefficient(self) -> float:
        """Coefficient of ``log|z - x₀|²`` in the singular part."""
        return -self.omega_mass / (2 * math.pi)

    @property
    def omega_dxdy(self) -> float:
        return 2 * self.c

    @property
    def _amp(self) -> float:
        return -self.omega_mass / math.pi

    def raw(self, z):
        """Unnormalised solution (zero lattice-average is not imposed)."""
        lat = self.surface.lattice
        return self._amp * lat.green(np.asarray(z, dtype=complex) - self.singular_point)

    @cached_property
    def offset(self) -> float:
        return float(self.raw(self.normalization_point))

    def __call__(self, z):
        return self.raw(z) - self.offset

    def dz(self, z):
        """``∂f/∂z``."""
        return self._amp * self.surface.lattice.green_dz(np.asarray(z, dtype=complex) - self.singular_point)

    def dzbar(self, z):
        return np.conj(self.dz(z))

    def distance_to_singularity(self, z):
        return self.surface.lattice.distance_to_lattice(np.asarray(z, dtype=complex) - self.singular_point)

    def as_function(self) -> SmoothFunction:
        return SmoothFunction(self.__call__, self.dz, self.dzbar, poles=(self.singular_point,),
                              lattice=self.surface.lattice, name="f")


def solve_green(s: Surface, omega=None, x0=None, p=None) -> GreenFunction:
    """Closed-form Green current for ``Ω = Σ h ω∧ω̄`` singular at ``x0`` and vanishing at ``p``."""
    if s.kind != "torus":
        raise SurfaceError("Green currents are only available on the torus backend")
    if omega is None:
        elems = k_space_basis(s).elements
        omega = elems[0] if elems else np.array([[1j]])
    h = _as_h(omega)
    if abs(h[0, 0]) == 0:
        raise GreenError("omega must be nonzero")
    x0 = complex(s.x0 if x0 is None else x0)
    p = complex(x0 + 0.5 + 0.5 * s.tau if p is None else p)
    if s.lattice.distance_to_lattice(p - x0) < 1e-9:
        raise GreenError("normalisation point coincides with the singular point")
    return GreenFunction(s, h, x0, p)


# -- forms --------------------------------------------------------------------

def xi_phi_from_f(g: GreenFunction) -> tuple[CallableForm, CallableForm]:
    """``ξ = i∂f`` and ``φ = ξ + ξ̄ = i(∂f - ∂̄f)``."""
    lat = g.surface.lattice
    poles = (g.singular_point,)

    def xi(z):
        return 1j * g.dz(z), 0.0

    def phi(z):
        fz = g.dz(z)
        return 1j * fz, -1j * np.conj(fz)

    return (CallableForm(xi, bidegree=HOLO, poles=poles, lattice=lat, name="xi"),
            CallableForm(phi, bidegree=MIXED, poles=poles, lattice=lat, name="phi"))


# -- residual checks ----------------------------------------------------------

def laplacian(func, z, h):
    """Fourth-order centred Laplacian (5 points per axis)."""
    z = np.asarray(z, dtype=complex)
    f0 = func(z)
    out = 0.0
    for e in (1.0, 1j):
        out = out + (-func(z + 2 * h * e) + 16 * func(z + h * e) - 30 * f0
                     + 16 * func(z - h * e) - func(z - 2 * h * e)) / (12 * h * h)
    return out


def current_equation_residual(g: GreenFunction, z) -> np.ndarray:
    """``|i∂∂̄f - Ω|`` as a ``dx∧dy`` density (``i∂∂̄f = (Δf/2) dx∧dy``)."""
    r = g.distance_to_singularity(z)
    step = np.minimum(2e-3, 0.01 * r)
    return np.abs(0.5 * laplacian(g, z, step) - g.omega_dxdy)


def log_coefficient_estimates(g: GreenFunction, radii=(1e-2, 5e-3, 2.5e-3, 1.25e-3), n_theta: int = 64):
    """Slopes of circle means of ``f`` against ``log r²`` between consecutive radii."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    means = [float(np.mean(g(g.singular_point + r * np.exp(1j * theta)))) for r in radii]
    logs = [math.log(r * r) for r in radii]
    return [(means[i] - means[i + 1]) / (logs[i] - logs[i + 1]) for i in range(len(radii) - 1)]


def log_singularity_oscillation(g: GreenFunction, radii=(1e-2, 5e-3, 2.5e-3), n_theta: int = 64):
    """Oscillation over θ of ``f + (M/2π) log r²`` on each circle (bounded, shrinking with r)."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    out = []
    for r in radii:
        vals = g(g.singular_point + r * np.exp(1j * theta)) - g.log_coefficient * math.log(r * r)
        out.append(float(np.ptp(vals)))
    return out


# -- spectral oracle -----------------------------------------------------------

@dataclass(frozen=True)
class OracleGrid:
    values: np.ndarray  # (n, n) real; node (j, k) at p + j/n + k τ/n
    nodes: np.ndarray
    offset: float  # subtracted so values vanish at p; values + offset has zero mean
    sigma: float  # width of the regularised point mass (0 for a grid impulse)
    exclusion_radius: float
    cell: float
    x0: complex


def _symbol(tau: complex, n: int):
    """Frequencies and ``-Δ`` symbol, each mode taken at its shortest alias (Brillouin zone)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    K, L = np.meshgrid(k, k, indexing="ij")

    def lam_at(a, b):
        return 4 * np.pi ** 2 * (a ** 2 + (b - a * tau.real) ** 2 / tau.imag ** 2)

    lam = np.full(K.shape, np.inf)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            lam = np.minimum(lam, lam_at(K + a * n, L + b * n))
    return K, L, lam


def green_oracle(s: Surface, omega, x0=None, grid_n: int = 256, p=None, impulse: str = "gaussian") -> OracleGrid:
    """Spectral solve of ``Δf = 2ω_xy - 2M δ_{x₀}`` (zero mean), normalised at ``p``.

    ``impulse="grid"`` places a unit impulse on the grid node nearest ``x₀``;
    ``"gaussian"`` uses a Gaussian of width ``σ`` whose spectrum is below
    ``1e-16`` at the Nyquist band, so the solve is exact (to rounding) outside
    a few ``σ`` of ``x₀``.
    """
    if s.kind != "torus":
        raise SurfaceError("the grid oracle needs a torus")
    if grid_n < 64 or grid_n & (grid_n - 1):
        raise GreenError("grid_n must be a power of two >= 64")
    h = _as_h(omega)
    tau = s.tau
    n = grid_n
    x0 = complex(s.x0 if x0 is None else x0)
    p = complex(x0 + 0.5 + 0.5 * tau if p is None else p)
    lat = s.lattice
    j = np.arange(n) / n
    J, K_ = np.meshgrid(j, j, indexing="ij")
    nodes = p + J + K_ * tau
    cell = min(1.0, abs(tau)) / n

    K, L, lam = _symbol(tau, n)
    on_band = (np.abs(K) == n // 2) | (np.abs(L) == n // 2)
    if impulse == "gaussian":
        sigma = math.sqrt(2 * TAIL_EXP / float(lam[on_band].min()))
        damp = np.exp(-0.5 * sigma ** 2 * lam)
        excl = max(7 * sigma, 4 * cell)
    elif impulse == "grid":
        snapped = _snap(lat, x0, p, n)
        if abs(snapped - x0) > 1e-9:
            warnings.warn(f"x0={x0} is off-grid; snapped to {snapped}", stacklevel=2)
        x0 = snapped
        sigma = 0.0
        damp = np.ones_like(lam)
        excl = 4 * cell
    else:
        raise GreenError(f"unknown impulse {impulse!r}")

    c = float(h[0, 0].imag)
    mass = 2 * c * tau.imag
    if mass == 0.0:
        return OracleGrid(np.zeros((n, n)), nodes, 0.0, sigma, excl, cell, x0)
    ds, dt = lat.coords(p - x0)
    phase = np.exp(2j * np.pi * (K * float(ds) + L * float(dt)))
    # Fourier coefficients of the source per unit area; the constant mode cancels
    src = -2 * mass / tau.imag * damp * phase
    lam0 = lam.copy()
    lam0[0, 0] = 1.0
    F = -src / lam0
    F[0, 0] = 0.0
    vals = (np.fft.ifft2(F) * n * n).real
    offset = float(vals[0, 0])
    return OracleGrid(vals - offset, nodes, offset, sigma, excl, cell, x0)


def _snap(lat, x0: complex, p: complex, n: int) -> complex:
    ds, dt = lat.coords(x0 - p)
    js = round(float(ds) * n)
    jt = round(float(dt) * n)
    return p + js / n + jt * lat.tau / n


def oracle_distance(g: GreenFunction, grid: OracleGrid) -> float:
    """Sup ``|f_Ω - oracle|`` over nodes outside the oracle's exclusion disc."""
    d = g.surface.lattice.distance_to_lattice(grid.nodes - grid.x0)
    mask = d > grid.exclusion_radius
    vals = g(grid.nodes[mask])
    return float(np.max(np.abs(vals - grid.values[mask])))
