"""Distance functional, inequality ledger, essential/residual split, Gronwall."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import nsf_relent.thermo as th
from nsf_relent.audit import fit_coercivity
from nsf_relent.errors import ThermoDomainError
from nsf_relent.reference import FieldProfile, ReferenceSolution, eval_reference
from nsf_relent.relent import (
    RHS_TERMS,
    bands_from_reference,
    d8_ledger,
    distance,
    ess_res_mask,
    gronwall_fit,
    split_ess_res,
)
from nsf_relent.solver1d import Grid1D, simulate, state_from_primitives
from nsf_relent.thermo import EssResBands, GasModel

from conftest import order_fit

M = GasModel()


# -- essential/residual ------------------------------------------------------


def test_mask_all_essential():
    bands = EssResBands(0.5, 2.0, 0.5, 2.0)
    rho = np.array([0.5, 1.0, 2.0])
    theta = np.array([0.6, 1.0, 1.9])
    mask = ess_res_mask(rho, theta, bands)
    assert np.all(mask)
    h_ess, h_res = split_ess_res(rho, mask)
    assert np.all(h_res == 0.0)
    assert_allclose(h_ess, rho)


def test_mask_boundary_semantics_closed_band():
    bands = EssResBands(0.5, 2.0, 0.5, 2.0)
    rho = np.array([2.0, 2.0 * 1.01, 1.0])
    theta = np.array([1.0, 1.0, 1.0])
    mask = ess_res_mask(rho, theta, bands)
    assert mask[0]  # the band edge itself is essential
    assert not mask[1]  # 1% above the edge is residual
    assert mask[2]


def test_bands_from_reference_rule(standard_ref):
    x = np.linspace(0.0, 1.0, 257)
    bands = bands_from_reference(standard_ref, np.linspace(0.0, 1.0, 64), x)
    # profile extrema are offset +- amplitude: r in [0.85, 1.15], T in [0.9, 1.1]
    assert_allclose(bands.rho_lo, 0.5 * 0.85, rtol=1.0e-3)
    assert_allclose(bands.rho_hi, 2.0 * 1.15, rtol=1.0e-3)
    assert_allclose(bands.theta_lo, 0.5 * 0.9, rtol=1.0e-3)
    assert_allclose(bands.theta_hi, 2.0 * 1.1, rtol=1.0e-3)


# -- instantaneous distance --------------------------------------------------


def uniform_refvals(grid, r=1.0, T=1.0, U=0.0):
    ref = ReferenceSolution(
        L=grid.L, rho=FieldProfile(r), theta=FieldProfile(T), u=FieldProfile(U)
    )
    return eval_reference(ref, 0.0, grid.x)


def test_distance_zero_for_identical_fields():
    grid = Grid1D(n=32, L=1.0)
    g = uniform_refvals(grid)
    sample = distance(M, grid, g.r, g.u, g.theta, g)
    assert sample.I == 0.0
    assert sample.kinetic == 0.0
    assert sample.entropy_part == 0.0


def test_distance_uniform_velocity_shift_exact():
    grid = Grid1D(n=64, L=1.0)
    g = uniform_refvals(grid, r=1.3)
    delta = 0.05
    sample = distance(M, grid, g.r, g.u + delta, g.theta, g)
    assert_allclose(sample.I, 0.5 * delta**2 * 1.3 * grid.L, rtol=1.0e-12)
    assert sample.entropy_part <= 1.0e-15


def test_distance_density_perturbation_taylor():
    grid = Grid1D(n=256, L=1.0)
    g = uniform_refvals(grid)
    rho = g.r * (1.0 + 0.01 * np.sin(2.0 * np.pi * grid.x))
    sample = distance(M, grid, rho, g.u, g.theta, g)
    hess = float(th.d2H_drho2(M, 1.0, 1.0, 1.0))
    taylor = float(0.5 * hess * np.sum((rho - g.r) ** 2) * grid.dx)
    assert abs(sample.I - taylor) <= 0.05 * taylor


def test_distance_requires_positive_reference():
    grid = Grid1D(n=16, L=1.0)
    g = uniform_refvals(grid)
    bad = type(g)(**{**g.__dict__, "r": np.zeros(grid.n)})
    with pytest.raises(ThermoDomainError):
        distance(M, grid, g.r, g.u, g.theta, bad)


# -- ledger ------------------------------------------------------------------


def test_ledger_identically_zero_for_constant_twin():
    grid = Grid1D(n=32, L=1.0)
    ref = ReferenceSolution(
        L=1.0, rho=FieldProfile(1.0), theta=FieldProfile(1.0), u=FieldProfile(0.0)
    )
    g = eval_reference(ref, 0.0, grid.x)
    st0 = state_from_primitives(M, grid, 0.0, g.r, g.u, g.theta)
    traj = simulate(M, grid, st0, t_end=0.05, cfl=0.4, n_outputs=5)
    report = d8_ledger(M, grid, traj, ref)
    assert_allclose(report.I, 0.0, atol=1.0e-15)
    assert_allclose(report.margin, 0.0, atol=1.0e-14)
    assert_allclose(report.dissipation_acc, 0.0, atol=1.0e-15)
    for name in RHS_TERMS:
        assert_allclose(report.rhs_acc[name], 0.0, atol=1.0e-14), name


def test_ledger_forcing_entry_vanishes_at_coincidence(model, standard_ref):
    # the forcing coupling integrand cancels identically when the numeric
    # fields equal the reference, whatever the sources are
    from nsf_relent.reference import make_source_fn
    from nsf_relent.solver1d import Trajectory, recover_primitives

    grid = Grid1D(n=64, L=1.0)
    g = eval_reference(standard_ref, 0.3, grid.x)
    st = state_from_primitives(model, grid, 0.3, g.r, g.u, g.theta)
    prim = recover_primitives(model, grid, st)
    traj = Trajectory(grid=grid, times=[0.3], states=[st], prims=[prim])
    report = d8_ledger(model, grid, traj, standard_ref, sources=make_source_fn(model, standard_ref))
    # inversion tolerance leaves ~1e-12-level residue in s and theta
    assert abs(report.rhs_acc["forcing"][-1]) <= 1.0e-10


def test_ledger_margin_shrinks_under_refinement(twin_sweep):
    ns = sorted(twin_sweep)
    margins = [float(np.min(twin_sweep[n][2].margin)) for n in ns]
    finals = [float(np.abs(twin_sweep[n][2].margin[-1])) for n in ns]
    # the inequality may leak only by an amount vanishing at the scheme order
    for n, m in zip(ns, margins):
        assert m >= -1.0e-6 * (64.0 / n) ** 1.8
    # and the ledger itself converges to the continuous identity at order ~2
    order = order_fit(ns, finals)
    assert 1.6 <= order <= 2.4, (finals, order)


def test_ledger_pressure_term_zero_when_density_matches(model, standard_ref):
    from nsf_relent.solver1d import Trajectory, recover_primitives

    grid = Grid1D(n=64, L=1.0)
    g = eval_reference(standard_ref, 0.0, grid.x)
    # rho = r exactly, but velocity off: the (1 - rho/r) factor kills the
    # pressure_time entry
    st = state_from_primitives(model, grid, 0.0, g.r, g.u + 0.05, g.theta)
    prim = recover_primitives(model, grid, st)
    traj = Trajectory(grid=grid, times=[0.0], states=[st], prims=[prim])
    report = d8_ledger(model, grid, traj, standard_ref)
    # instantaneous value sits in the accumulated series at index 0 (zero by
    # trapezoid convention); check the integrand through a two-sample ledger
    assert report.rhs_acc["pressure_time"][-1] == 0.0


def test_ledger_integrand_nonneg_and_residual_fraction(twin_sweep):
    for n, (grid, traj, report) in twin_sweep.items():
        assert report.integrand_min >= -1.0e-12
        assert float(np.max(report.res_fraction)) <= 1.0e-12


# -- coercivity against the audit constant -----------------------------------


def test_distance_integrand_dominates_fitted_coercivity(model, standard_ref, twin_sweep):
    grid, traj, report = twin_sweep[64]
    bands = bands_from_reference(standard_ref, traj.times, grid.x)
    c_fit = fit_coercivity(model, bands, samples=4000, seed=0)
    st, pr = traj.states[-1], traj.prims[-1]
    g = eval_reference(standard_ref, traj.times[-1], grid.x)
    sample = distance(model, grid, st.rho, pr.u, pr.theta, g, bands=bands)
    quad_form = c_fit * ((st.rho - g.r) ** 2 + (pr.theta - g.theta) ** 2) + 0.5 * st.rho * (
        pr.u - g.u
    ) ** 2
    # integrand >= c (|rho-r|^2 + |theta-T|^2) + kinetic on essential cells
    slack = 1.0e-18
    assert np.all(sample.integrand + slack >= quad_form - 1.0e-15)


# -- gronwall ----------------------------------------------------------------


def test_gronwall_synthetic_exponential():
    t = np.linspace(0.0, 1.0, 50)
    I = 2.0e-4 * np.exp(2.0 * t)
    fit = gronwall_fit(t, I, floor=1.0e-30)
    assert abs(fit.c3 - 2.0) <= 1.0e-6
    assert abs(fit.c3_fit - 2.0) <= 1.0e-6
    assert fit.bound_satisfied
    assert fit.verdict == "gronwall"


def test_gronwall_degenerate_series():
    t = np.linspace(0.0, 1.0, 20)
    I = np.full(20, 1.0e-14)
    fit = gronwall_fit(t, I, floor=1.0e-13)
    assert fit.verdict == fit.ZERO_VERDICT
    assert fit.bound_satisfied
    assert fit.window_points == 0


def test_gronwall_zero_perturbation_run(twin_sweep):
    grid, traj, report = twin_sweep[128]
    floor = float(np.max(report.I))
    fit = gronwall_fit(report.t, report.I, floor)
    assert fit.verdict == fit.ZERO_VERDICT
    assert fit.bound_satisfied


def test_gronwall_perturbed_runs_bound_and_scaling(perturb_family):
    eps0, runs = perturb_family
    floor = float(np.max(runs[0.0][2].I))
    fits = {}
    for eps in (eps0, eps0 / 2.0, eps0 / 4.0):
        report = runs[eps][2]
        fit = gronwall_fit(report.t, report.I, floor)
        assert fit.verdict == "gronwall"
        assert np.isfinite(fit.c3)
        assert fit.bound_satisfied, (eps, fit.c3)
        fits[eps] = fit
    # relative entropy is quadratic near the reference: halving eps
    # quarters the distance curve
    I_hi = runs[eps0][2].I
    I_lo = runs[eps0 / 2.0][2].I
    window = (I_hi > 10 * floor) & (I_lo > 10 * floor)
    window[0] = False
    ratio = float(np.mean(I_hi[window] / I_lo[window]))
    assert 3.0 <= ratio <= 5.0


def test_gronwall_input_validation():
    with pytest.raises(ThermoDomainError):
        gronwall_fit([0.0, 1.0], [1.0, -1.0], 1.0e-12)
    with pytest.raises(ThermoDomainError):
        gronwall_fit([0.0, 0.0], [1.0, 1.0], 1.0e-12)


def test_monotone_refinement_of_floor(twin_sweep):
    ns = sorted(twin_sweep)
    floors = [float(np.max(twin_sweep[n][2].I)) for n in ns]
    for a, b in zip(floors, floors[1:]):
        assert b <= 1.1 * a  # monotone within 10%
