"""Structural and thermodynamic-stability audits of a gas model.

The audit is the gatekeeper for user-supplied structural families: it checks
the qualitative hypotheses (monotone P, decreasing P/Z^(5/3) with positive
limit, negative S' with vanishing tail, positive dp/drho and de/dtheta,
convexity of rho -> H_T, the temperature-minimum property) by sampling, and
reports empirical constants for the quantitative bounds used by the relative
entropy machinery.  Constants are empirical suprema/infima over the samples,
not certified bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import thermo
from .thermo import EssResBands, GasModel

__all__ = ["AuditReport", "stability_audit"]

# Z schedule for the structural checks: the admissibility ratio
# (5/3 P - P'Z)/Z typically attains its supremum as Z -> 0+, so the schedule
# reaches far below any (rho, theta) box.
_Z_SCHEDULE = np.logspace(-8, 6, 400)
_Z_TAIL = 1.0e8


@dataclass
class AuditReport:
    """Outcome of a stability audit; `passed` with a witness list on failure."""

    passed: bool
    failures: list[str] = field(default_factory=list)
    min_dp_drho: float = np.nan
    min_de_dtheta: float = np.nan
    constants: dict[str, float] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"passed={self.passed}"]
        out.append(f"min_dp_drho={self.min_dp_drho:.17g}")
        out.append(f"min_de_dtheta={self.min_de_dtheta:.17g}")
        for key in sorted(self.constants):
            out.append(f"{key}={self.constants[key]:.17g}")
        for f in self.failures:
            out.append(f"failure={f}")
        return out


def _halton_box(box, samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    (rho_lo, rho_hi), (theta_lo, theta_hi) = box
    engine = qmc.Halton(d=2, seed=seed)
    pts = engine.random(samples)
    rho = rho_lo + (rho_hi - rho_lo) * pts[:, 0]
    theta = theta_lo + (theta_hi - theta_lo) * pts[:, 1]
    return rho, theta


def _structural_checks(model: GasModel, report: AuditReport) -> None:
    fam = model.family
    Z = _Z_SCHEDULE
    P = fam.P(Z)
    dP = fam.dP(Z)
    dS = fam.dS(Z)

    P0 = float(fam.P(0.0))
    if abs(P0) > 1.0e-12:
        report.failures.append(f"P(0) = {P0:.6g}, must be 0")
    if float(fam.dP(0.0)) <= 0.0:
        report.failures.append(f"P'(0) = {float(fam.dP(0.0)):.6g}, must be > 0")
    if np.any(dP <= 0.0):
        z = Z[np.argmax(dP <= 0.0)]
        report.failures.append(f"P'(Z) <= 0 at Z = {z:.6g}")

    ratio = (5.0 / 3.0 * P - dP * Z) / Z
    if np.any(ratio <= 0.0):
        z = Z[np.argmax(ratio <= 0.0)]
        report.failures.append(f"(5/3 P - P'Z)/Z <= 0 at Z = {z:.6g}")
    report.constants["m4_c"] = float(np.max(ratio))

    # P/Z^(5/3) decreasing with limit p_infty
    q = P / Z ** (5.0 / 3.0)
    if np.any(np.diff(q) > 1.0e-12 * np.abs(q[:-1])):
        i = int(np.argmax(np.diff(q) > 1.0e-12 * np.abs(q[:-1])))
        report.failures.append(f"P(Z)/Z^(5/3) increases between Z = {Z[i]:.6g} and {Z[i+1]:.6g}")
    tail = float(fam.P(_Z_TAIL) / _Z_TAIL ** (5.0 / 3.0))
    report.constants["p_infty_est"] = tail
    if not (tail > 0.0):
        report.failures.append(f"P(Z)/Z^(5/3) tail {tail:.6g} not positive")

    if np.any(dS >= 0.0):
        z = Z[np.argmax(dS >= 0.0)]
        report.failures.append(f"S'(Z) >= 0 at Z = {z:.6g}")
    S_tail = float(fam.S(_Z_TAIL))
    report.constants["S_tail"] = S_tail
    # scale-free vanishing check: the tail must be far below the unit-Z value
    if not (0.0 <= S_tail <= 0.05 * abs(float(fam.S(1.0)))):
        report.failures.append(f"S(Z) at Z = {_Z_TAIL:.1g} is {S_tail:.6g}, not near 0")


def _pointwise_checks(model: GasModel, rho, theta, report: AuditReport) -> None:
    ev = thermo.thermo_eval(model, rho, theta)
    report.min_dp_drho = float(np.min(ev.dp_drho))
    report.min_de_dtheta = float(np.min(ev.de_dtheta))
    if report.min_dp_drho <= 0.0:
        i = int(np.argmin(ev.dp_drho))
        report.failures.append(
            f"dp/drho = {report.min_dp_drho:.6g} at (rho, theta) = ({rho[i]:.6g}, {theta[i]:.6g})"
        )
    if report.min_de_dtheta <= 0.0:
        i = int(np.argmin(ev.de_dtheta))
        report.failures.append(
            f"de/dtheta = {report.min_de_dtheta:.6g} at (rho, theta) = ({rho[i]:.6g}, {theta[i]:.6g})"
        )

    # density-weighted coercivity rho*e >= c (rho^(5/3) + theta^4)
    re = thermo.rho_internal_energy(model, rho, theta)
    w5 = re / (rho ** (5.0 / 3.0) + theta**4)
    report.constants["w5_c"] = float(np.min(w5))
    if report.constants["w5_c"] <= 0.0:
        report.failures.append("rho*e lost coercivity against rho^(5/3) + theta^4")

    # 0 <= rho*s <= c (theta^3 + rho S(Z))
    rs = thermo.rho_entropy(model, rho, theta)
    if np.any(rs < 0.0):
        i = int(np.argmin(rs))
        report.failures.append(
            f"rho*s = {float(rs[i]):.6g} < 0 at (rho, theta) = ({rho[i]:.6g}, {theta[i]:.6g})"
        )
    SZ = model.family.S(thermo.degeneracy(rho, theta))
    report.constants["rs_bound_c"] = float(np.max(rs / (theta**3 + rho * SZ)))

    # rho S(Z) <= c (rho + rho [log theta]^+ + rho |log rho|)
    denom = rho * (1.0 + np.maximum(np.log(theta), 0.0) + np.abs(np.log(rho)))
    report.constants["rslog_bound_c"] = float(np.max(rho * SZ / denom))


def _convexity_checks(model: GasModel, box, report: AuditReport) -> None:
    (rho_lo, rho_hi), (theta_lo, theta_hi) = box
    rho_grid = np.linspace(rho_lo, rho_hi, 101)
    theta_grid = np.linspace(theta_lo, theta_hi, 101)

    # rho -> H_T(rho, T) strictly convex: sampled second differences positive
    for Theta in np.linspace(theta_lo, theta_hi, 7):
        H = thermo.ballistic_free_energy(model, rho_grid, Theta, Theta)
        d2 = H[2:] - 2.0 * H[1:-1] + H[:-2]
        if np.any(d2 <= 0.0):
            i = int(np.argmax(d2 <= 0.0))
            report.failures.append(
                f"H_T(., T={Theta:.6g}) not convex near rho = {rho_grid[i + 1]:.6g}"
            )
            break

    # theta -> H_T(rho, theta) attains its minimum at theta = T
    for rho in (rho_lo, 0.5 * (rho_lo + rho_hi), rho_hi):
        for Theta in (theta_lo, 0.5 * (theta_lo + theta_hi), theta_hi):
            H = thermo.ballistic_free_energy(model, rho, theta_grid, Theta)
            k = int(np.argmin(H))
            k_ref = int(np.argmin(np.abs(theta_grid - Theta)))
            if abs(k - k_ref) > 1:
                report.failures.append(
                    f"theta-minimum of H_T off the diagonal: rho={rho:.6g}, T={Theta:.6g}, "
                    f"argmin at theta={theta_grid[k]:.6g}"
                )


def fit_coercivity(model: GasModel, bands: EssResBands, samples: int = 4000, seed: int = 0) -> float:
    """Empirical constant c with E(rho, theta | r, T) >= c (|rho-r|^2 + |theta-T|^2)
    over the essential band; the reference point ranges over the same band."""
    engine = qmc.Halton(d=4, seed=seed)
    pts = engine.random(samples)
    rho = bands.rho_lo + (bands.rho_hi - bands.rho_lo) * pts[:, 0]
    theta = bands.theta_lo + (bands.theta_hi - bands.theta_lo) * pts[:, 1]
    r = bands.rho_lo + (bands.rho_hi - bands.rho_lo) * pts[:, 2]
    Theta = bands.theta_lo + (bands.theta_hi - bands.theta_lo) * pts[:, 3]
    dist2 = (rho - r) ** 2 + (theta - Theta) ** 2
    keep = dist2 > 1.0e-14
    E = thermo.relative_entropy(model, rho[keep], theta[keep], r[keep], Theta[keep])
    return float(np.min(E / dist2[keep]))


def stability_audit(
    model: GasModel,
    box=((0.1, 10.0), (0.1, 10.0)),
    samples: int = 10_000,
    seed: int = 0,
    bands: EssResBands | None = None,
) -> AuditReport:
    """Run every structural and stability check; failures carry witness points.

    The report's constants are empirical: `m4_c` is the sampled supremum of the
    admissibility ratio, `w1_c` the fitted coercivity constant on the bands
    (the box halved/doubled when no bands are given), `w5_c`, `rs_bound_c`,
    `rslog_bound_c` the energy/entropy growth constants, and `p_infty_est` the
    degenerate-branch limit.
    """
    report = AuditReport(passed=True)
    _structural_checks(model, report)

    rho, theta = _halton_box(box, samples, seed)
    _pointwise_checks(model, rho, theta, report)
    _convexity_checks(model, box, report)

    # relative entropy nonnegative, zero only on the diagonal
    r, Theta = _halton_box(box, samples // 2, seed + 1)
    E = thermo.relative_entropy(model, rho[: samples // 2], theta[: samples // 2], r, Theta)
    if np.any(E < 0.0):
        i = int(np.argmin(E))
        report.failures.append(
            f"relative entropy {float(E[i]):.6g} < 0 at rho={rho[i]:.6g}, theta={theta[i]:.6g}, "
            f"r={r[i]:.6g}, T={Theta[i]:.6g}"
        )

    if bands is None:
        (rho_lo, rho_hi), (theta_lo, theta_hi) = box
        bands = EssResBands(0.5 * rho_lo, 2.0 * rho_hi, 0.5 * theta_lo, 2.0 * theta_hi)
    report.constants["w1_c"] = fit_coercivity(model, bands, seed=seed)
    if report.constants["w1_c"] <= 0.0:
        report.failures.append("coercivity constant on the essential band is not positive")

    report.passed = not report.failures
    return report
