"""Manufactured smooth reference solutions on a periodic interval.

Each field (density r, temperature T, velocity U) is a constant offset plus a
finite sum of travelling trigonometric modes

    amp * sin(2*pi*k*x/L + phase + omega*t),

so every derivative needed of a classical solution (first time, first and
second space) is available in closed form -- no symbolic or numerical
differentiation anywhere.  `mms_sources` returns the residuals of the forced
1-D system for this triple; injecting them into the solver makes the triple an
exact solution of the forced equations, which is what lets the relative
entropy machinery compare a numerical run against a genuinely smooth strong
solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import thermo
from .errors import ThermoDomainError
from .thermo import GasModel

__all__ = [
    "WaveMode",
    "FieldProfile",
    "ReferenceSolution",
    "RefEval",
    "eval_reference",
    "mms_sources",
    "make_source_fn",
]


@dataclass(frozen=True)
class WaveMode:
    amplitude: float
    wavenumber: int  # integral multiples of 2*pi/L keep the field periodic
    phase: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class FieldProfile:
    """offset + sum of WaveModes; closed-form derivatives to second order in x."""

    offset: float
    modes: tuple[WaveMode, ...] = ()

    @property
    def amplitude_sum(self) -> float:
        return float(sum(abs(m.amplitude) for m in self.modes))

    def value(self, t, x, L):
        out = np.full_like(np.asarray(x, dtype=float), self.offset)
        for m in self.modes:
            out = out + m.amplitude * np.sin(2.0 * pi * m.wavenumber * np.asarray(x) / L + m.phase + m.omega * t)
        return out

    def d_t(self, t, x, L):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for m in self.modes:
            out = out + m.amplitude * m.omega * np.cos(2.0 * pi * m.wavenumber * np.asarray(x) / L + m.phase + m.omega * t)
        return out

    def d_x(self, t, x, L):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for m in self.modes:
            k = 2.0 * pi * m.wavenumber / L
            out = out + m.amplitude * k * np.cos(k * np.asarray(x) + m.phase + m.omega * t)
        return out

    def d_xx(self, t, x, L):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for m in self.modes:
            k = 2.0 * pi * m.wavenumber / L
            out = out - m.amplitude * k * k * np.sin(k * np.asarray(x) + m.phase + m.omega * t)
        return out


@dataclass(frozen=True)
class ReferenceSolution:
    """Smooth (r, T, U) triple; r and T bounded away from zero by construction."""

    L: float
    rho: FieldProfile
    theta: FieldProfile
    u: FieldProfile

    def __post_init__(self):
        if not (self.L > 0.0):
            raise ThermoDomainError(f"domain length must be > 0, got {self.L}")
        for name in ("rho", "theta"):
            prof = getattr(self, name)
            if prof.amplitude_sum >= prof.offset:
                raise ThermoDomainError(
                    f"reference {name}: sum of mode amplitudes {prof.amplitude_sum:.6g} must "
                    f"stay below the offset {prof.offset:.6g} to keep the field positive"
                )

    @property
    def rho_floor(self) -> float:
        return self.rho.offset - self.rho.amplitude_sum

    @property
    def theta_floor(self) -> float:
        return self.theta.offset - self.theta.amplitude_sum


@dataclass(frozen=True)
class RefEval:
    """All reference fields and derivatives at one (t, x) batch."""

    r: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    r_t: np.ndarray
    r_x: np.ndarray
    r_xx: np.ndarray
    theta_t: np.ndarray
    theta_x: np.ndarray
    theta_xx: np.ndarray
    u_t: np.ndarray
    u_x: np.ndarray
    u_xx: np.ndarray


def eval_reference(ref: ReferenceSolution, t: float, x) -> RefEval:
    """Exact trigonometric evaluation of the triple and its derivatives."""
    x = np.asarray(x, dtype=float)
    L = ref.L
    return RefEval(
        r=ref.rho.value(t, x, L),
        theta=ref.theta.value(t, x, L),
        u=ref.u.value(t, x, L),
        r_t=ref.rho.d_t(t, x, L),
        r_x=ref.rho.d_x(t, x, L),
        r_xx=ref.rho.d_xx(t, x, L),
        theta_t=ref.theta.d_t(t, x, L),
        theta_x=ref.theta.d_x(t, x, L),
        theta_xx=ref.theta.d_xx(t, x, L),
        u_t=ref.u.d_t(t, x, L),
        u_x=ref.u.d_x(t, x, L),
        u_xx=ref.u.d_xx(t, x, L),
    )


def mms_sources(model: GasModel, ref: ReferenceSolution, t: float, x):
    """Residuals (f_mass, f_momentum, f_energy) of the 1-D system at the triple.

    f_mass = d_t r + d_x(r U)
    f_mom  = d_t(r U) + d_x(r U^2) + d_x p(r, T) - d_x[(4/3) mu(T) U_x]
    f_E    = d_t E + d_x[(E + p) U] + d_x q - d_x[(4/3) mu(T) U U_x]

    with E = r U^2/2 + r e(r, T) and q = -kappa(T) T_x, assembled by chain rule
    from the analytic thermodynamic partials and the exact profile derivatives.
    """
    g = eval_reference(ref, t, x)
    ev = thermo.thermo_eval(model, g.r, g.theta)

    mu = model.mu0 + model.mu1 * g.theta
    dmu = model.mu1
    kappa = model.kappa0 + model.kappa2 * g.theta**2 + model.kappa3 * g.theta**3
    dkappa = 2.0 * model.kappa2 * g.theta + 3.0 * model.kappa3 * g.theta**2

    p_x = ev.dp_drho * g.r_x + ev.dp_dtheta * g.theta_x

    f_mass = g.r_t + g.r_x * g.u + g.r * g.u_x

    visc = (4.0 / 3.0) * mu * g.u_x
    visc_x = (4.0 / 3.0) * (dmu * g.theta_x * g.u_x + mu * g.u_xx)
    f_mom = (
        g.r_t * g.u
        + g.r * g.u_t
        + g.r_x * g.u**2
        + 2.0 * g.r * g.u * g.u_x
        + p_x
        - visc_x
    )

    # density-weighted internal energy partials: d(rho e)/drho = e + rho de/drho
    dre_drho = ev.e + g.r * ev.de_drho
    dre_dtheta = g.r * ev.de_dtheta
    re_t = dre_drho * g.r_t + dre_dtheta * g.theta_t
    re_x = dre_drho * g.r_x + dre_dtheta * g.theta_x

    E = 0.5 * g.r * g.u**2 + g.r * ev.e
    E_t = 0.5 * g.r_t * g.u**2 + g.r * g.u * g.u_t + re_t
    E_x = 0.5 * g.r_x * g.u**2 + g.r * g.u * g.u_x + re_x

    q_x = -(dkappa * g.theta_x**2 + kappa * g.theta_xx)
    work_x = visc_x * g.u + visc * g.u_x
    f_energy = E_t + (E_x + p_x) * g.u + (E + ev.p) * g.u_x + q_x - work_x

    return f_mass, f_mom, f_energy


def make_source_fn(model: GasModel, ref: ReferenceSolution):
    """Bind model and reference into a (t, x) -> sources callable for the solver."""

    def sources(t, x):
        return mms_sources(model, ref, t, x)

    return sources
