"""Weierstrass zeta and Jacobi theta functions for the lattice ``ℤ + τℤ``.

Two independent evaluation routes are provided for ``ζ``:

* ``"theta"``: ``ζ(z) = η₁ z + π θ₁'(πz)/θ₁(πz)`` with ``θ₁`` and its
  derivatives summed as q-series and ``η₁ = -π² θ₁'''(0) / (3 θ₁'(0))``;
* ``"eisenstein"``: ``ζ(z) = G₂ z + Σ_n π cot(π(z + nτ))`` (symmetric in ``n``)
  with ``G₂ = π²/3 + Σ_{n≠0} π²/sin²(πnτ)``.

Arguments are reduced to the fundamental parallelogram centred at 0 and the
quasi-periods are added back, so lifted points far from the origin are fine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TAIL = 1e-16


@dataclass(frozen=True)
class Lattice:
    tau: complex
    n_theta: int = field(init=False, repr=False)
    n_cot: int = field(init=False, repr=False)
    eta1: complex = field(init=False, repr=False)

    def __post_init__(self):
        tau = complex(self.tau)
        if tau.imag <= 0:
            raise ValueError("Im tau must be positive")
        object.__setattr__(self, "tau", tau)
        # |q|^(N^2 - 1/4) < TAIL on the reduced strip |Im z| <= Im tau / 2
        log_tail = -math.log(TAIL)
        n_theta = math.ceil(math.sqrt(log_tail / (math.pi * tau.imag) + 0.25)) + 2
        n_cot = math.ceil(log_tail / (2 * math.pi * tau.imag) + 0.5) + 2
        object.__setattr__(self, "n_theta", max(n_theta, 4))
        object.__setattr__(self, "n_cot", max(n_cot, 4))
        object.__setattr__(self, "eta1", self._eta1_theta())

    @property
    def eta_tau(self) -> complex:
        """Quasi-period for ``τ`` (Legendre relation ``η₁ τ - η_τ = 2πi``)."""
        return self.eta1 * self.tau - 2j * math.pi

    # -- reduction ---------------------------------------------------------
    def coords(self, z):
        """Lattice coordinates ``(s, t)`` with ``z = s + tτ``."""
        z = np.asarray(z, dtype=complex)
        t = z.imag / self.tau.imag
        return z.real - t * self.tau.real, t

    def reduce(self, z):
        """``z = z0 + m + nτ`` with ``z0`` in the centred fundamental parallelogram."""
        z = np.asarray(z, dtype=complex)
        s, t = self.coords(z)
        n = np.floor(t + 0.5)
        m = np.floor(s + 0.5)
        return z - m - n * self.tau, m, n

    def distance_to_lattice(self, z):
        """Distance from ``z`` to the nearest lattice point."""
        z0, _, _ = self.reduce(z)
        best = np.full(np.shape(z0), np.inf)
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                best = np.minimum(best, np.abs(z0 - a - b * self.tau))
        return best

    # -- theta route -------------------------------------------------------
    def _theta_terms(self):
        n = np.arange(self.n_theta)
        k = 2 * n + 1
        coef = 2.0 * (-1.0) ** n * np.exp(1j * math.pi * self.tau * (n + 0.5) ** 2)
        return k, coef

    def theta1(self, v, deriv: int = 0):
        """``θ₁(v|τ) = 2 Σ (-1)^n q^{(n+1/2)²} sin((2n+1)v)`` and derivatives in ``v``."""
        v = np.asarray(v, dtype=complex)
        k, coef = self._theta_terms()
        arg = np.multiply.outer(v, k)
        if deriv == 0:
            return np.sum(coef * np.sin(arg), axis=-1)
        if deriv == 1:
            return np.sum(coef * k * np.cos(arg), axis=-1)
        raise ValueError("deriv must be 0 or 1")

    def _eta1_theta(self) -> complex:
        k, coef = self._theta_terms()
        d1 = np.sum(coef * k)
        d3 = -np.sum(coef * k ** 3)
        return complex(-math.pi ** 2 * d3 / (3 * d1))

    def log_abs_theta1(self, u):
        """``log|θ₁(πu)|`` for arbitrary (lifted) ``u``."""
        u = np.asarray(u, dtype=complex)
        u0, _, n = self.reduce(u)
        val = np.log(np.abs(self.theta1(math.pi * u0)))
        return val + math.pi * self.tau.imag * n ** 2 + 2 * math.pi * n * u0.imag

    def zeta(self, z, method: str = "theta"):
        z = np.asarray(z, dtype=complex)
        z0, m, n = self.reduce(z)
        if method == "theta":
            v = math.pi * z0
            core = self.eta1 * z0 + math.pi * self.theta1(v, 1) / self.theta1(v)
        elif method == "eisenstein":
            core = self.g2_eisenstein() * z0 + self._cot_sum(z0)
        else:
            raise ValueError(f"unknown method {method!r}")
        return core + m * self.eta1 + n * self.eta_tau

    # -- eisenstein route --------------------------------------------------
    def g2_eisenstein(self) -> complex:
        n = np.arange(1, self.n_cot + 1)
        return complex(math.pi ** 2 / 3 + 2 * np.sum(math.pi ** 2 / np.sin(math.pi * n * self.tau) ** 2))

    def _cot_sum(self, z0):
        out = math.pi / np.tan(math.pi * z0)
        for n in range(1, self.n_cot + 1):
            w = n * self.tau
            out = out + math.pi / np.tan(math.pi * (z0 + w)) + math.pi / np.tan(math.pi * (z0 - w))
        return out

    # -- derived real functions -------------------------------------------
    def log_abs_sigma(self, u):
        """``log|σ(u)|`` up to an additive constant: ``log|θ₁(πu)| + Re(η₁ u²)/2``."""
        u = np.asarray(u, dtype=complex)
        return self.log_abs_theta1(u) + 0.5 * np.real(self.eta1 * u * u)

    def green(self, u):
        """Doubly periodic ``log|θ₁(πu)| - π (Im u)²/Im τ``; Laplacian ``2π(δ - 1/Im τ)``."""
        u0, _, _ = self.reduce(u)
        return np.log(np.abs(self.theta1(math.pi * u0))) - math.pi * u0.imag ** 2 / self.tau.imag

    def green_dz(self, u):
        """``∂/∂z`` of :meth:`green`: ``(ζ(u) - η₁u)/2 + iπ Im(u)/Im τ``."""
        u0, _, _ = self.reduce(u)
        v = math.pi * u0
        return 0.5 * math.pi * self.theta1(v, 1) / self.theta1(v) + 1j * math.pi * u0.imag / self.tau.imag
