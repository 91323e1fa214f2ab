"""Structural pressure families P(Z) of the degeneracy parameter Z = rho/theta^(3/2).

A family must satisfy, for the gas model to be thermodynamically admissible:

* ``P(0) = 0`` and ``P'(Z) > 0`` for all ``Z >= 0``,
* ``0 < (5/3 P(Z) - P'(Z) Z)/Z < c`` for ``Z > 0`` (some finite c),
* ``P(Z)/Z^(5/3)`` decreasing with positive limit ``p_infty``,
* the entropy integrand ``S'(Z) = -(3/2)(5/3 P - P' Z)/Z^2 < 0`` with
  ``S(Z) -> 0`` as ``Z -> oo`` (third-law normalization).

Subclasses provide ``P`` and ``dP``; the base class derives ``dS`` from the
third-law relation and falls back to finite differences / quadrature for the
remaining pieces.  ``stability_audit`` is the gatekeeper for custom families.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .errors import ThermoDomainError

_SQRT3 = math.sqrt(3.0)


class StructuralFamily:
    """Base class; custom families override at least ``P`` and ``dP``."""

    name = "custom"

    @property
    def p_infty(self) -> float:
        """Limit of P(Z)/Z^(5/3); estimated at large Z unless overridden."""
        big = 1.0e10
        return float(self.P(big) / big ** (5.0 / 3.0))

    def P(self, Z):
        raise NotImplementedError

    def dP(self, Z):
        raise NotImplementedError

    def d2P(self, Z):
        # relative central difference; adequate for audits of custom families
        Z = np.asarray(Z, dtype=float)
        h = 1.0e-6 * np.maximum(1.0, np.abs(Z))
        lo = np.maximum(Z - h, 0.0)
        return (self.dP(Z + h) - self.dP(lo)) / (Z + h - lo)

    def dS(self, Z):
        """S'(Z) from the third-law relation; negative on Z > 0."""
        Z = np.asarray(Z, dtype=float)
        return -1.5 * (5.0 / 3.0 * self.P(Z) - self.dP(Z) * Z) / Z**2

    def d2S(self, Z):
        """Derivative of the third-law S'(Z); chain rule through P, P', P''."""
        Z = np.asarray(Z, dtype=float)
        return 5.0 * self.P(Z) / Z**3 - 4.0 * self.dP(Z) / Z**2 + 1.5 * self.d2P(Z) / Z

    # beyond this point the third-law combination 5/3 P - P'Z loses too many
    # digits to cancellation in doubles; the tail is extrapolated instead
    _S_CUTOFF = 1.0e6

    def S(self, Z):
        """Entropy integral S(Z) = int_Z^oo -S'(z) dz, normalized so S(oo) = 0.

        Generic fallback: adaptive quadrature in log coordinates up to a
        cutoff, plus a fitted power-law tail.  Accuracy is limited to roughly
        1e-6 by cancellation in the third-law combination; families that
        override dS (or S) with closed forms avoid that limit.
        """
        scalar = np.isscalar(Z) or np.ndim(Z) == 0
        Zs = np.atleast_1d(np.asarray(Z, dtype=float))
        out = np.empty_like(Zs)
        for i, z in enumerate(Zs):
            out[i] = self._S_scalar(float(z))
        return float(out[0]) if scalar else out

    def _tail_integral(self, A: float) -> float:
        """int_A^oo -S'(z) dz assuming -S' ~ C z^(-1-beta) beyond A."""
        g1 = -float(self.dS(A))
        g2 = -float(self.dS(2.0 * A))
        if not (g1 > 0.0 and g2 > 0.0):
            raise ThermoDomainError(f"entropy integrand not positive near Z = {A:.3g}")
        beta = -1.0 - math.log(g2 / g1) / math.log(2.0)
        if beta <= 0.0:
            raise ThermoDomainError(
                f"entropy integrand decays too slowly near Z = {A:.3g}; S(oo) = 0 fails"
            )
        return g1 * A / beta

    def _S_scalar(self, z: float) -> float:
        if z < 0.0:
            raise ThermoDomainError(f"Z must be >= 0, got {z}")
        if z == 0.0:
            return math.inf
        if z >= self._S_CUTOFF:
            return self._tail_integral(z)
        val, _ = quad(
            lambda v: -float(self.dS(math.exp(v))) * math.exp(v),
            math.log(z),
            math.log(self._S_CUTOFF),
            epsabs=1.0e-12,
            epsrel=1.0e-12,
            limit=200,
        )
        return val + self._tail_integral(self._S_CUTOFF)


class DefaultFamily(StructuralFamily):
    """P(Z) = c1 * Z * (1 + c2*Z)^(2/3), closed forms throughout.

    Bridges the Boltzmann branch P ~ c1*Z at small Z to the degenerate branch
    P ~ c1*c2^(2/3)*Z^(5/3), with (5/3 P - P' Z)/Z = (2/3) c1 (1+c2 Z)^(-1/3)
    (so the admissibility constant is 2/3*c1) and a closed-form entropy
    integral built from the antiderivative of 1/(u(u^3-1)), u = (1+c2 Z)^(1/3).
    The plain default is c1 = c2 = 1.
    """

    name = "default"

    def __init__(self, c1: float = 1.0, c2: float = 1.0):
        if not (c1 > 0.0 and c2 > 0.0):
            raise ThermoDomainError(f"family parameters must be positive, got {c1}, {c2}")
        self.c1 = float(c1)
        self.c2 = float(c2)

    @property
    def p_infty(self) -> float:
        return self.c1 * self.c2 ** (2.0 / 3.0)

    def _w(self, Z):
        return np.cbrt(1.0 + self.c2 * np.asarray(Z, dtype=float))

    def P(self, Z):
        Z = np.asarray(Z, dtype=float)
        return self.c1 * Z * self._w(Z) ** 2

    def dP(self, Z):
        Z = np.asarray(Z, dtype=float)
        w = self._w(Z)
        return self.c1 * w**2 + (2.0 / 3.0) * self.c1 * self.c2 * Z / w

    def d2P(self, Z):
        Z = np.asarray(Z, dtype=float)
        w = self._w(Z)
        return (4.0 / 3.0) * self.c1 * self.c2 / w - (2.0 / 9.0) * self.c1 * self.c2**2 * Z / w**4

    def dS(self, Z):
        Z = np.asarray(Z, dtype=float)
        with np.errstate(divide="ignore"):
            return -self.c1 / (Z * self._w(Z))

    def d2S(self, Z):
        Z = np.asarray(Z, dtype=float)
        w = self._w(Z)
        return self.c1 / (Z**2 * w) + self.c1 * self.c2 / (3.0 * Z * w**4)

    def S(self, Z):
        Z = np.asarray(Z, dtype=float)
        if np.any(Z < 0.0):
            raise ThermoDomainError("Z must be >= 0")
        u = self._w(Z)
        with np.errstate(divide="ignore"):
            bracket = (
                np.log(u - 1.0)
                - 0.5 * np.log(u * u + u + 1.0)
                + _SQRT3 * np.arctan((2.0 * u + 1.0) / _SQRT3)
            )
        out = self.c1 * (_SQRT3 * math.pi / 2.0 - bracket)
        # log(u-1) -> -inf at Z = 0: the integral diverges logarithmically there
        out = np.where(Z == 0.0, np.inf, out)
        return float(out) if out.ndim == 0 else out


def make_family(name: str, params: tuple[float, ...] = ()) -> StructuralFamily:
    """Construct a registered family by name; params are family specific."""
    if name == "default":
        if len(params) == 0:
            return DefaultFamily()
        if len(params) == 2:
            return DefaultFamily(*params)
        raise ThermoDomainError(
            f"family 'default' takes 0 or 2 parameters (c1, c2), got {len(params)}"
        )
    raise ThermoDomainError(f"unknown structural family {name!r}")
