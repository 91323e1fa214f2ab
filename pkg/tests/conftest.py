"""Shared fixtures: the default gas model, standard references, cached runs."""

import numpy as np
import pytest

from nsf_relent import GasModel, Grid1D, ReferenceSolution, WaveMode, simulate
from nsf_relent.reference import FieldProfile, eval_reference, make_source_fn
from nsf_relent.relent import d8_ledger
from nsf_relent.solver1d import state_from_primitives


def central_diff(f, x, scale=1.0e-5):
    """Relative central difference with h = scale * max(1, |x|)."""
    h = scale * max(1.0, abs(x))
    return (f(x + h) - f(x - h)) / (2.0 * h)


def l2_norm(err, dx):
    return float(np.sqrt(np.sum(np.asarray(err) ** 2) * dx))


def order_fit(ns, vals):
    """Least-squares convergence order against dx ~ 1/n."""
    return float(np.polyfit(np.log(1.0 / np.asarray(ns, float)), np.log(vals), 1)[0])


@pytest.fixture(scope="session")
def model():
    return GasModel()


@pytest.fixture(scope="session")
def standard_ref():
    """Smooth travelling-wave triple used by most solver-level tests."""
    return ReferenceSolution(
        L=1.0,
        rho=FieldProfile(1.0, (WaveMode(0.15, 1, 0.0, 1.0),)),
        theta=FieldProfile(1.0, (WaveMode(0.1, 1, 0.7, 1.3),)),
        u=FieldProfile(0.2, (WaveMode(0.1, 1, 2.1, 0.9),)),
    )


@pytest.fixture(scope="session")
def fast_ref():
    """High temporal frequencies: exposes the time-integration error cleanly."""
    return ReferenceSolution(
        L=1.0,
        rho=FieldProfile(1.0, (WaveMode(0.15, 1, 0.3, 9.0),)),
        theta=FieldProfile(1.0, (WaveMode(0.1, 1, 1.1, 7.5),)),
        u=FieldProfile(0.2, (WaveMode(0.25, 1, 2.0, 11.0),)),
    )


def run_twin(model, ref, n, eps=0.0, t_end=0.25, n_outputs=None, wavenumber=2, cfl=0.4):
    """Forced twin run from (possibly density-perturbed) reference initial data."""
    grid = Grid1D(n=n, L=ref.L)
    g = eval_reference(ref, 0.0, grid.x)
    rho0 = g.r * (1.0 + eps * np.sin(2.0 * np.pi * wavenumber * grid.x / ref.L))
    state0 = state_from_primitives(model, grid, 0.0, rho0, g.u, g.theta)
    sources = make_source_fn(model, ref)
    if n_outputs is None:
        n_outputs = max(16, n // 4)
    traj = simulate(model, grid, state0, t_end=t_end, cfl=cfl, n_outputs=n_outputs, sources=sources)
    return grid, traj, sources


@pytest.fixture(scope="session")
def twin_sweep(model, standard_ref):
    """Zero-perturbation twin runs at n = 64, 128, 256 with their ledgers."""
    out = {}
    for n in (64, 128, 256):
        grid, traj, sources = run_twin(model, standard_ref, n)
        report = d8_ledger(model, grid, traj, standard_ref, sources=sources)
        out[n] = (grid, traj, report)
    return out


@pytest.fixture(scope="session")
def perturb_family(model, standard_ref):
    """Perturbed twin runs (eps, eps/2, eps/4) plus the zero run, n = 96."""
    eps0 = 0.004
    runs = {}
    for eps in (eps0, eps0 / 2.0, eps0 / 4.0, 0.0):
        grid, traj, sources = run_twin(model, standard_ref, 96, eps=eps, n_outputs=25)
        report = d8_ledger(model, grid, traj, standard_ref, sources=sources)
        runs[eps] = (grid, traj, report)
    return eps0, runs
