"""Pointwise thermodynamics: frozen values, Gibbs consistency, stability."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import nsf_relent.thermo as th
from nsf_relent.errors import InversionError, ThermoDomainError
from nsf_relent.thermo import GasModel

from conftest import central_diff

M = GasModel()  # a = 1, default family

# frozen oracle values at (rho, theta) = (1, 1), a = 1
#   p = 2^(2/3) + 1/3,  e = 1.5 * 2^(2/3) + 1,  s = S(1) + 4/3
P_11 = 1.9207343853015328
E_11 = 3.3811015779522995
S_11 = 4.14645430505935
DE_DTHETA_11 = 5.190550788976149
H_111 = -0.7653527271070502


def test_eval_structural_P_at_zero():
    P, dP, S, dS = th.eval_structural_P(M, 0.0)
    assert P == 0.0
    assert dP == 1.0
    assert S == np.inf and dS == -np.inf
    with pytest.raises(ThermoDomainError):
        th.eval_structural_P(M, -0.5)


def test_eval_structural_P_at_one():
    P, dP, S, dS = th.eval_structural_P(M, 1.0)
    assert_allclose(P, 1.5874010519681994, rtol=1.0e-14)
    assert_allclose(dP, 2.1165347359575994, rtol=1.0e-14)
    assert_allclose(S, 2.813120971726016, rtol=1.0e-13)
    assert_allclose(dS, -0.7937005259840997, rtol=1.0e-14)


def test_pressure_radiation_only_at_vacuum():
    assert_allclose(th.pressure(M, 0.0, 2.0), 16.0 / 3.0, rtol=1.0e-14)


def test_pressure_frozen_value():
    assert_allclose(th.pressure(M, 1.0, 1.0), P_11, rtol=1.0e-14)


def test_pressure_structural_scaling():
    # for fixed Z the material part scales as theta^(5/2)
    rho0, theta0 = 0.8, 1.0
    Z0 = rho0 * theta0**-1.5
    for lam in (0.5, 2.0, 3.7):
        theta = lam * theta0
        rho = Z0 * theta**1.5
        mat = th.pressure(M, rho, theta) - (M.a / 3.0) * theta**4
        mat0 = th.pressure(M, rho0, theta0) - (M.a / 3.0) * theta0**4
        assert_allclose(mat, mat0 * lam**2.5, rtol=1.0e-12)


def test_energy_entropy_frozen_values():
    assert_allclose(th.internal_energy(M, 1.0, 1.0), E_11, rtol=1.0e-14)
    assert_allclose(th.entropy(M, 1.0, 1.0), S_11, rtol=1.0e-13)
    with pytest.raises(ThermoDomainError):
        th.internal_energy(M, 0.0, 1.0)
    with pytest.raises(ThermoDomainError):
        th.entropy(M, -1.0, 1.0)


def test_rho_energy_coercivity_sampled():
    rng = np.random.default_rng(7)
    rho = rng.uniform(0.1, 10.0, 500)
    theta = rng.uniform(0.1, 10.0, 500)
    ratio = th.rho_internal_energy(M, rho, theta) / (rho ** (5.0 / 3.0) + theta**4)
    assert float(np.min(ratio)) > 0.0


def test_vacuum_density_weighted_forms():
    assert_allclose(th.rho_internal_energy(M, 0.0, 2.0), 16.0, rtol=1.0e-14)
    assert_allclose(th.rho_entropy(M, 0.0, 2.0), 32.0 / 3.0, rtol=1.0e-14)
    # rho S(Z) -> 0 continuously as rho -> 0
    small = th.rho_entropy(M, 1.0e-12, 2.0) - th.rho_entropy(M, 0.0, 2.0)
    assert abs(small) < 1.0e-9


def test_thermo_eval_de_dtheta_frozen():
    ev = th.thermo_eval(M, 1.0, 1.0)
    assert_allclose(ev.de_dtheta, DE_DTHETA_11, rtol=1.0e-13)


def test_gibbs_consistency_finite_differences():
    # both partial-derivative identities, 1e-6 relative against central
    # differences with h = 1e-5 max(1, |x|), at 1000 random points
    rng = np.random.default_rng(42)
    pts = rng.uniform(0.1, 10.0, size=(1000, 2))
    worst = 0.0
    for rho, theta in pts:
        ev = th.thermo_eval(M, rho, theta)
        ds_dth_fd = central_diff(lambda t: float(th.entropy(M, rho, t)), theta)
        ds_drho_fd = central_diff(lambda r: float(th.entropy(M, r, theta)), rho)
        de_dth_fd = central_diff(lambda t: float(th.internal_energy(M, rho, t)), theta)
        de_drho_fd = central_diff(lambda r: float(th.internal_energy(M, r, theta)), rho)
        # theta ds/dtheta = de/dtheta
        lhs1 = float(ev.theta * ev.ds_dtheta)
        rel1 = abs(lhs1 - de_dth_fd) / max(1.0, abs(lhs1))
        # theta ds/drho = de/drho - p/rho^2
        lhs2 = float(ev.theta * ev.ds_drho)
        rhs2 = de_drho_fd - float(ev.p) / rho**2
        rel2 = abs(lhs2 - rhs2) / max(1.0, abs(lhs2))
        # and the analytic partials match their own finite differences
        rel3 = abs(float(ev.ds_dtheta) - ds_dth_fd) / max(1.0, abs(ds_dth_fd))
        rel4 = abs(float(ev.ds_drho) - ds_drho_fd) / max(1.0, abs(ds_drho_fd))
        worst = max(worst, rel1, rel2, rel3, rel4)
    assert worst <= 1.0e-6


def test_maxwell_identities_analytic():
    # all four consistency identities at 1000 random reference points
    rng = np.random.default_rng(3)
    r = rng.uniform(0.1, 10.0, 1000)
    T = rng.uniform(0.1, 10.0, 1000)
    ev = th.thermo_eval(M, r, T)

    lhs = th.d2H_drho2(M, r, T, T)
    rhs = ev.dp_drho / r
    assert np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))) <= 1.0e-8

    lhs = r * ev.ds_drho
    rhs = -ev.dp_dtheta / r
    assert np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))) <= 1.0e-8

    mixed = th.d2H_drhodtheta(M, r, T, T)
    scale = 1.0 + np.abs(M.family.dP(ev.Z))
    assert np.max(np.abs(mixed) / scale) <= 1.0e-8

    lhs = r * th.dH_drho(M, r, T, T) - th.ballistic_free_energy(M, r, T, T)
    assert np.max(np.abs(lhs - ev.p) / (1.0 + np.abs(ev.p))) <= 1.0e-8


def test_ballistic_free_energy_frozen_and_classical_limit():
    assert_allclose(th.ballistic_free_energy(M, 1.0, 1.0, 1.0), H_111, rtol=1.0e-12)
    # Theta = theta reduces to the classical free energy density rho (e - theta s)
    rho, theta = 2.3, 0.7
    ev = th.thermo_eval(M, rho, theta)
    assert_allclose(
        th.ballistic_free_energy(M, rho, theta, theta),
        float(rho * (ev.e - theta * ev.s)),
        rtol=1.0e-12,
    )


def test_temperature_minimum_of_ballistic_free_energy():
    # theta -> H_T(rho, theta) attains its minimum at theta = T
    thetas = np.linspace(0.2, 3.0, 1401)
    for rho in (0.3, 1.0, 4.0):
        for Theta in (0.5, 1.0, 2.0):
            H = th.ballistic_free_energy(M, rho, thetas, Theta)
            k = int(np.argmin(H))
            assert abs(thetas[k] - Theta) <= thetas[1] - thetas[0]


def test_relative_entropy_zero_at_reference():
    assert th.relative_entropy(M, 1.3, 0.8, 1.3, 0.8) == 0.0


def test_relative_entropy_second_order_taylor():
    # E((1.1, 1) | (1, 1)) ~ 0.5 d2H/drho2 * 0.01 to leading order
    E = th.relative_entropy(M, 1.1, 1.0, 1.0, 1.0)
    taylor = 0.5 * float(th.d2H_drho2(M, 1.0, 1.0, 1.0)) * 0.01
    assert abs(E - taylor) <= 0.05 * taylor
    # smaller displacement: relative gap shrinks linearly
    E2 = th.relative_entropy(M, 1.01, 1.0, 1.0, 1.0)
    taylor2 = 0.5 * float(th.d2H_drho2(M, 1.0, 1.0, 1.0)) * 1.0e-4
    assert abs(E2 - taylor2) <= 0.005 * taylor2


def test_relative_entropy_nonnegative_sampled():
    rng = np.random.default_rng(11)
    rho = rng.uniform(0.0, 10.0, 2000)  # includes vacuum
    theta = rng.uniform(0.1, 10.0, 2000)
    r = rng.uniform(0.1, 10.0, 2000)
    T = rng.uniform(0.1, 10.0, 2000)
    E = th.relative_entropy(M, rho, theta, r, T)
    assert float(np.min(E)) >= 0.0


def test_relative_entropy_reference_must_be_positive():
    with pytest.raises(ThermoDomainError):
        th.relative_entropy(M, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ThermoDomainError):
        th.relative_entropy(M, 1.0, 1.0, 1.0, -2.0)


def test_temperature_inversion_roundtrip():
    eps = float(th.internal_energy(M, 0.7, 1.3))
    theta = th.temperature_from_internal_energy(M, 0.7, eps)
    assert abs(theta - 1.3) <= 1.0e-10


def test_temperature_inversion_monotone():
    t1 = th.temperature_from_internal_energy(M, 1.0, 2.8)
    t2 = th.temperature_from_internal_energy(M, 1.0, 3.4)
    assert t1 < t2


def test_temperature_inversion_frozen_value():
    theta = th.temperature_from_internal_energy(M, 1.0, E_11)
    assert_allclose(theta, 1.0, atol=1.0e-10)


def test_temperature_inversion_vectorized_and_guess():
    rng = np.random.default_rng(5)
    rho = rng.uniform(0.2, 5.0, 64)
    theta_true = rng.uniform(0.2, 5.0, 64)
    eps = th.internal_energy(M, rho, theta_true)
    theta = th.temperature_from_internal_energy(M, rho, eps, theta_guess=theta_true * 1.1)
    assert_allclose(theta, theta_true, rtol=1.0e-9)


def test_temperature_inversion_below_floor_errors():
    # infimum of e(rho, .) is (3/2) p_infty rho^(2/3); below it no root exists
    floor = 1.5 * M.p_infty * 1.0 ** (2.0 / 3.0)
    with pytest.raises(InversionError) as exc:
        th.temperature_from_internal_energy(M, 1.0, 0.9 * floor)
    assert exc.value.cells is not None


def test_transport_values():
    model = GasModel(mu0=1.0, mu1=1.0, kappa0=1.0, kappa2=1.0, kappa3=1.0)
    mu, kappa = th.transport(model, 2.0)
    assert_allclose(mu, 3.0, rtol=0)
    assert_allclose(kappa, 13.0, rtol=0)
    mu0, kappa0 = th.transport(model, 1.0e-12)
    assert_allclose(mu0, model.mu0, rtol=1.0e-9)
    assert_allclose(kappa0, model.kappa0, rtol=1.0e-9)


def test_sound_speed_positive_and_supersonic_to_isothermal():
    cs = th.sound_speed(M, 1.0, 1.0)
    ev = th.thermo_eval(M, 1.0, 1.0)
    assert float(cs) > np.sqrt(float(ev.dp_drho))


def test_gas_model_validation():
    with pytest.raises(ThermoDomainError):
        GasModel(a=0.0)
    with pytest.raises(ThermoDomainError):
        GasModel(mu1=-0.1)


def test_ess_res_bands_validation():
    with pytest.raises(ThermoDomainError):
        th.EssResBands(1.0, 0.5, 0.1, 1.0)
    bands = th.EssResBands(0.5, 2.0, 0.4, 2.5)
    assert bands.rho_lo == 0.5
