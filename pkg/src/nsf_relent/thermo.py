"""Pointwise thermodynamics of a monatomic gas with thermal radiation.

All quantities derive from a structural family P(Z), Z = rho/theta^(3/2):

    p(rho, theta) = theta^(5/2) P(Z) + (a/3) theta^4
    e(rho, theta) = (3/2) (theta^(5/2)/rho) P(Z) + a theta^4 / rho
    s(rho, theta) = S(Z) + (4a/3) theta^3 / rho

with Gibbs' relation theta*Ds = De + p*D(1/rho) holding identically because
S'(Z) is tied to P by the third-law relation.  The ballistic free energy
H_T(rho, theta) = rho e - T rho s generates the relative entropy, a
Bregman-type distance that is nonnegative by thermodynamic stability
(dp/drho > 0, de/dtheta > 0).

Everything here is a pure function of its arguments and accepts scalars or
numpy arrays; GasModel is immutable, so concurrent use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InversionError, ThermoDomainError
from .structural import DefaultFamily, StructuralFamily

__all__ = [
    "GasModel",
    "ThermoEval",
    "EssResBands",
    "eval_structural_P",
    "degeneracy",
    "pressure",
    "internal_energy",
    "entropy",
    "rho_internal_energy",
    "rho_entropy",
    "thermo_eval",
    "sound_speed",
    "ballistic_free_energy",
    "dH_drho",
    "d2H_drho2",
    "d2H_drhodtheta",
    "relative_entropy",
    "temperature_from_internal_energy",
    "transport",
]


@dataclass(frozen=True)
class GasModel:
    """Radiation constant, transport coefficients, and the structural family.

    Attributes
    ----------
    a : radiation constant (> 0), pressure units per theta^4.
    mu0, mu1 : shear viscosity mu(theta) = mu0 + mu1*theta, both > 0.
    kappa0, kappa2, kappa3 : conductivity kappa(theta) = kappa0 + kappa2*theta^2
        + kappa3*theta^3, all > 0.  Bulk viscosity is identically zero.
    family : structural P(Z) family; defaults to P(Z) = Z(1+Z)^(2/3).
    """

    a: float = 1.0
    mu0: float = 0.01
    mu1: float = 0.01
    kappa0: float = 0.01
    kappa2: float = 0.01
    kappa3: float = 0.01
    family: StructuralFamily = field(default_factory=DefaultFamily)

    def __post_init__(self):
        for name in ("a", "mu0", "mu1", "kappa0", "kappa2", "kappa3"):
            v = getattr(self, name)
            if not (v > 0.0):
                raise ThermoDomainError(f"GasModel.{name} must be > 0, got {v}")

    @property
    def p_infty(self) -> float:
        """Limit of P(Z)/Z^(5/3): the degenerate-branch pressure coefficient."""
        return self.family.p_infty


@dataclass(frozen=True)
class ThermoEval:
    """Pressure, internal energy, entropy, and their first partials at (rho, theta)."""

    rho: np.ndarray
    theta: np.ndarray
    Z: np.ndarray
    p: np.ndarray
    e: np.ndarray
    s: np.ndarray
    dp_drho: np.ndarray
    dp_dtheta: np.ndarray
    de_drho: np.ndarray
    de_dtheta: np.ndarray
    ds_drho: np.ndarray
    ds_dtheta: np.ndarray


@dataclass(frozen=True)
class EssResBands:
    """Positivity band [rho_lo, rho_hi] x [theta_lo, theta_hi] for the essential set."""

    rho_lo: float
    rho_hi: float
    theta_lo: float
    theta_hi: float

    def __post_init__(self):
        if not (0.0 < self.rho_lo < self.rho_hi):
            raise ThermoDomainError(f"need 0 < rho_lo < rho_hi, got [{self.rho_lo}, {self.rho_hi}]")
        if not (0.0 < self.theta_lo < self.theta_hi):
            raise ThermoDomainError(
                f"need 0 < theta_lo < theta_hi, got [{self.theta_lo}, {self.theta_hi}]"
            )


def _check_positive(name, value):
    if np.any(np.asarray(value) <= 0.0):
        raise ThermoDomainError(f"{name} must be > 0")


def _check_nonnegative(name, value):
    if np.any(np.asarray(value) < 0.0):
        raise ThermoDomainError(f"{name} must be >= 0")


def degeneracy(rho, theta):
    """Degeneracy parameter Z = rho * theta^(-3/2)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return rho * theta**-1.5


def eval_structural_P(model: GasModel, Z):
    """Evaluate (P, P', S, S') of the structural family at Z >= 0.

    S(0) is +inf and S'(0) is -inf: the entropy integral diverges
    logarithmically as Z -> 0+, which is how vanishing degeneracy signals
    itself; P and P' remain finite there.
    """
    Z = np.asarray(Z, dtype=float)
    _check_nonnegative("Z", Z)
    fam = model.family
    P = fam.P(Z)
    dP = fam.dP(Z)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = fam.S(Z)
        dS = np.where(Z == 0.0, -np.inf, fam.dS(np.where(Z == 0.0, 1.0, Z)))
    if np.ndim(Z) == 0:
        return float(P), float(dP), float(S), float(dS)
    return P, dP, S, dS


def pressure(model: GasModel, rho, theta):
    """p = theta^(5/2) P(Z) + (a/3) theta^4; rho >= 0, theta > 0."""
    rho = np.asarray(rho, dtype=float)
    _check_nonnegative("rho", rho)
    _check_positive("theta", theta)
    theta = np.asarray(theta, dtype=float)
    Z = rho * theta**-1.5
    return theta**2.5 * model.family.P(Z) + (model.a / 3.0) * theta**4


def internal_energy(model: GasModel, rho, theta):
    """Specific internal energy e = (3/2)(theta^(5/2)/rho) P(Z) + a theta^4/rho."""
    _check_positive("rho", rho)
    _check_positive("theta", theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Z = rho * theta**-1.5
    return 1.5 * theta**2.5 * model.family.P(Z) / rho + model.a * theta**4 / rho


def entropy(model: GasModel, rho, theta):
    """Specific entropy s = S(Z) + (4a/3) theta^3/rho."""
    _check_positive("rho", rho)
    _check_positive("theta", theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Z = rho * theta**-1.5
    return model.family.S(Z) + (4.0 * model.a / 3.0) * theta**3 / rho


def rho_internal_energy(model: GasModel, rho, theta):
    """Density-weighted internal energy rho*e, continuous down to rho = 0."""
    _check_nonnegative("rho", rho)
    _check_positive("theta", theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Z = rho * theta**-1.5
    return 1.5 * theta**2.5 * model.family.P(Z) + model.a * theta**4


def rho_entropy(model: GasModel, rho, theta):
    """Density-weighted entropy rho*s; rho*S(Z) extends by 0 at vacuum."""
    _check_nonnegative("rho", rho)
    _check_positive("theta", theta)
    rho, theta = np.broadcast_arrays(
        np.asarray(rho, dtype=float), np.asarray(theta, dtype=float)
    )
    rad = (4.0 * model.a / 3.0) * theta**3
    positive = rho > 0.0
    rho_safe = np.where(positive, rho, 1.0)
    rs = np.where(positive, rho * model.family.S(rho_safe * theta**-1.5), 0.0)
    out = rs + rad
    return float(out) if out.ndim == 0 else out


def thermo_eval(model: GasModel, rho, theta) -> ThermoEval:
    """Full thermodynamic bundle with analytic first partials (chain rule).

    The partials satisfy Gibbs consistency (ds_dtheta = de_dtheta/theta and
    ds_drho = (de_drho - p/rho^2)/theta) identically, because S' carries the
    third-law relation to P.
    """
    _check_positive("rho", rho)
    _check_positive("theta", theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    rho, theta = np.broadcast_arrays(rho, theta)
    fam = model.family
    a = model.a
    Z = rho * theta**-1.5
    P = fam.P(Z)
    dP = fam.dP(Z)
    S = fam.S(Z)
    dS = fam.dS(Z)

    th32 = theta**1.5
    th52 = theta * th32
    p = th52 * P + (a / 3.0) * theta**4
    e = 1.5 * th52 * P / rho + a * theta**4 / rho
    s = S + (4.0 * a / 3.0) * theta**3 / rho

    m4 = 5.0 / 3.0 * P - dP * Z  # positive by thermodynamic stability
    dp_drho = theta * dP
    dp_dtheta = 1.5 * th32 * m4 + (4.0 * a / 3.0) * theta**3
    de_drho = 1.5 * th52 * (dP * Z - P) / rho**2 - a * theta**4 / rho**2
    de_dtheta = 1.5 * th32 * (2.5 * P - 1.5 * dP * Z) / rho + 4.0 * a * theta**3 / rho
    ds_drho = dS * theta**-1.5 - (4.0 * a / 3.0) * theta**3 / rho**2
    ds_dtheta = -1.5 * dS * Z / theta + 4.0 * a * theta**2 / rho

    return ThermoEval(
        rho=rho, theta=theta, Z=Z, p=p, e=e, s=s,
        dp_drho=dp_drho, dp_dtheta=dp_dtheta,
        de_drho=de_drho, de_dtheta=de_dtheta,
        ds_drho=ds_drho, ds_dtheta=ds_dtheta,
    )


def sound_speed(model: GasModel, rho, theta):
    """Full-EOS sound speed: c^2 = dp/drho + theta*(dp/dtheta)^2/(rho^2 de/dtheta)."""
    ev = thermo_eval(model, rho, theta)
    c2 = ev.dp_drho + ev.theta * ev.dp_dtheta**2 / (ev.rho**2 * ev.de_dtheta)
    return np.sqrt(c2)


def ballistic_free_energy(model: GasModel, rho, theta, Theta):
    """H_T(rho, theta) = rho e - T rho s in density-weighted (vacuum-safe) form."""
    _check_positive("Theta", Theta)
    Theta = np.asarray(Theta, dtype=float)
    return rho_internal_energy(model, rho, theta) - Theta * rho_entropy(model, rho, theta)


def dH_drho(model: GasModel, rho, theta, Theta):
    """d/drho of the ballistic free energy: e + rho de/drho - T (s + rho ds/drho)."""
    ev = thermo_eval(model, rho, theta)
    Theta = np.asarray(Theta, dtype=float)
    return ev.e + ev.rho * ev.de_drho - Theta * (ev.s + ev.rho * ev.ds_drho)


def d2H_drho2(model: GasModel, rho, theta, Theta):
    """Second rho-derivative of H_T, via P'' and S'' of the family.

    At theta = Theta this equals (1/rho) dp/drho, one of the Maxwell-type
    consistency identities used by the audits.
    """
    _check_positive("rho", rho)
    _check_positive("theta", theta)
    _check_positive("Theta", Theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    fam = model.family
    Z = rho * theta**-1.5
    return 1.5 * theta**-0.5 * fam.d2P(Z) - Theta * theta**-1.5 * (
        2.0 * fam.dS(Z) + Z * fam.d2S(Z)
    )


def d2H_drhodtheta(model: GasModel, rho, theta, Theta):
    """Mixed partial of H_T; vanishes identically on the diagonal theta = Theta."""
    _check_positive("rho", rho)
    _check_positive("theta", theta)
    _check_positive("Theta", Theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    fam = model.family
    Z = rho * theta**-1.5
    dP = fam.dP(Z)
    d2P = fam.d2P(Z)
    dS = fam.dS(Z)
    d2S = fam.d2S(Z)
    return 1.5 * (dP - 1.5 * Z * d2P) + 1.5 * Theta * (Z / theta) * (2.0 * dS + Z * d2S)


def relative_entropy(model: GasModel, rho, theta, r, Theta):
    """Bregman distance generated by the ballistic free energy.

    E(rho, theta | r, T) = H_T(rho, theta) - dH_T/drho(r, T)*(rho - r)
    - H_T(r, T).  Nonnegative with equality iff (rho, theta) = (r, T);
    evaluated in density-weighted form so rho = 0 is admissible.
    """
    _check_positive("r", r)
    _check_positive("Theta", Theta)
    r = np.asarray(r, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    rho = np.asarray(rho, dtype=float)
    H = ballistic_free_energy(model, rho, theta, Theta)
    H_ref = ballistic_free_energy(model, r, Theta, Theta)
    # at (r, T): dH/drho = e - T s + p/r  (Maxwell-type identity)
    ev = thermo_eval(model, r, Theta)
    slope = ev.e - Theta * ev.s + ev.p / r
    return H - slope * (rho - r) - H_ref


def transport(model: GasModel, theta):
    """(mu, kappa) at temperature theta; bulk viscosity is identically zero."""
    _check_positive("theta", theta)
    theta = np.asarray(theta, dtype=float)
    mu = model.mu0 + model.mu1 * theta
    kappa = model.kappa0 + model.kappa2 * theta**2 + model.kappa3 * theta**3
    return mu, kappa


# temperature inversion: safeguarded Newton with a bisection bracket.  de/dtheta > 0
# guarantees a unique root, but the theta^4 radiation tail makes plain Newton
# overshoot, hence the bracket.
_THETA_LO = 1.0e-8
_THETA_HI = 1.0e8
_MAX_ITER = 100


def temperature_from_internal_energy(model: GasModel, rho, eps, theta_guess=None):
    """Invert e(rho, theta) = eps for theta.

    Converges to |e - eps| <= 1e-12 * max(1, eps) per entry.  Raises
    InversionError if eps is at or below the degenerate-branch floor
    (3/2) p_infty rho^(2/3) (no solution) or if the iteration cap is hit.
    """
    _check_positive("rho", rho)
    scalar = np.isscalar(rho) and np.isscalar(eps)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    rho, eps = np.broadcast_arrays(rho, eps)

    floor = 1.5 * model.p_infty * rho ** (2.0 / 3.0)
    bad = eps <= floor
    if np.any(bad):
        cells = np.nonzero(bad)[0]
        raise InversionError(
            f"internal energy {eps[cells[0]]:.6g} at rho={rho[cells[0]]:.6g} is at or "
            f"below the degenerate floor {floor[cells[0]]:.6g}; no temperature solves it",
            cells=cells,
        )

    lo = np.full(rho.shape, _THETA_LO)
    hi = np.full(rho.shape, _THETA_HI)
    if theta_guess is not None:
        theta = np.clip(np.asarray(theta_guess, dtype=float), _THETA_LO, _THETA_HI).copy()
        theta = np.broadcast_to(theta, rho.shape).copy()
    else:
        theta = np.ones_like(rho)

    tol = 1.0e-12 * np.maximum(1.0, np.abs(eps))
    for _ in range(_MAX_ITER):
        ev = thermo_eval(model, rho, theta)
        resid = ev.e - eps
        done = np.abs(resid) <= tol
        if np.all(done):
            break
        # maintain the bracket: e is strictly increasing in theta
        lo = np.where(resid < 0.0, theta, lo)
        hi = np.where(resid > 0.0, theta, hi)
        step = resid / ev.de_dtheta
        cand = theta - step
        outside = (cand <= lo) | (cand >= hi)
        theta = np.where(done, theta, np.where(outside, 0.5 * (lo + hi), cand))
    else:
        stuck = np.nonzero(~done)[0]
        raise InversionError(
            f"temperature inversion did not converge in {_MAX_ITER} iterations "
            f"for {stuck.size} entries (first at index {stuck[0]})",
            cells=stuck,
            bracket=(lo[stuck], hi[stuck]),
        )
    return float(theta[0]) if scalar else theta
