"""Radial potential solver: closed-form oracles and an independent
quadrature cross-check.

The solver integrates u'(r) = C / (r^{n-1} sqrt(f)) on Gauss-Legendre
panels; the oracle for the profile without a closed form (RN) is a direct
scipy.integrate.quad of the same integrand with its own error control.
"""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from substatic import (
    DomainError,
    asymptotic_expansion_check,
    capacity,
    flat_profile,
    reissner_nordstrom_profile,
    schwarzschild_profile,
    solve_radial_potential,
)


def test_schwarzschild_closed_form_and_runtime():
    # u = sqrt(1 - 2/r) for n = 3, m = 1; tolerance 1e-8 over [r0, 1e3],
    # and the whole construction in under a second
    t0 = time.perf_counter()
    tr = solve_radial_potential(schwarzschild_profile(3, 1.0), 3)
    r = np.geomspace(2.0, 1e3, 2000)
    err = np.abs(tr.u(r) - np.sqrt(1.0 - 2.0 / r)).max()
    elapsed = time.perf_counter() - t0
    assert err < 1e-8
    assert elapsed < 1.0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_capacity_equals_mass(n):
    tr = solve_radial_potential(schwarzschild_profile(n, 1.0), n)
    cap = capacity(tr)
    # three-way agreement within 1e-4 (the infinity flux carries the 1/r_max
    # truncation tail); the agreed value hits m to 1e-6
    assert cap.max_rel_spread < 1e-4
    for val in (cap.flux_at_boundary, cap.flux_at_infinity, cap.dirichlet_energy):
        assert val == pytest.approx(1.0, rel=1e-4)
    assert cap.agreed_value == pytest.approx(1.0, rel=1e-6)


def test_rn_potential_against_quad_oracle(rn3):
    # independent evaluation: u(r) = 1 - C int_r^oo dt / (t^2 sqrt(f));
    # the tail integral avoids accumulating error from the r0 endpoint
    prof = rn3.profile
    C = rn3.flux_constant

    def tail(r):
        val, err = quad(
            lambda t: 1.0 / (t**2 * np.sqrt(prof.f(t))),
            r, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200,
        )
        assert err < 1e-11
        return val

    for r in (prof.r0 * 1.005, 2.2, 3.0, 5.0, 17.0, 140.0):
        assert rn3.u(r) == pytest.approx(1.0 - C * tail(r), abs=1e-10)


def test_rn_capacity_below_mass(rn3):
    # the q != 0 profile has capacity strictly under m (frozen regression)
    cap = capacity(rn3)
    assert cap.max_rel_spread < 1e-4
    assert cap.agreed_value < 1.0
    assert cap.agreed_value == pytest.approx(0.9692439377900304, rel=1e-9)


def test_flat_exterior_closed_form(flat3):
    # u = 1 - 1/r exactly, capacity = r0 = 1
    r = np.geomspace(1.0, 1e4, 500)
    np.testing.assert_allclose(flat3.u(r), 1.0 - 1.0 / r, atol=1e-12)
    assert capacity(flat3).agreed_value == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("name", ["schw", "rn", "flat"])
def test_asymptotic_expansion(fixtures, name):
    rep = asymptotic_expansion_check(fixtures[name])
    assert rep.decays
    assert rep.max_residual_value < 5e-3
    assert rep.max_residual_derivative < 1e-2


def test_radius_at_v_roundtrip(schw3):
    # v = 1 - u; stay above v(r_max) ~ 5e-6 where the table ends
    v = np.geomspace(2e-5, 1.0, 60)
    r = schw3.radius_at_v(v)
    np.testing.assert_allclose(schw3.one_minus_u(r), v, rtol=1e-10)


def test_radius_at_v_scalar_input(schw3):
    # regression: 0-d input used to crash the panel lookup
    r = schw3.radius_at_v(0.5)
    assert np.shape(r) in ((), (1,))
    assert schw3.one_minus_u(float(np.asarray(r).ravel()[0])) == pytest.approx(
        0.5, rel=1e-10
    )


def test_radius_at_level(schw3):
    for t in (0.0, 0.1, 0.5, 0.9, 0.999):
        r = float(np.asarray(schw3.radius_at_level(t)).ravel()[0])
        assert schw3.u(r) == pytest.approx(t, abs=1e-10)


@pytest.mark.parametrize("n", [4, 5])
def test_roundtrip_higher_dimension(n):
    tr = solve_radial_potential(schwarzschild_profile(n, 1.0), n)
    v = np.geomspace(1e-4, 1.0, 30)
    r = tr.radius_at_v(v)
    np.testing.assert_allclose(tr.one_minus_u(r), v, rtol=1e-9)


def test_horizon_endpoint(schw3):
    # u(r0) = 0 exactly and |Du|(r0) = C r0^{1-n} = 1/4
    assert schw3.u(2.0) == 0.0
    assert schw3.grad_norm(2.0) == pytest.approx(0.25, rel=1e-10)


def test_domain_errors(schw3):
    with pytest.raises(DomainError):
        schw3.u(1.5)  # below r0
    with pytest.raises(DomainError):
        schw3.radius_at_v(1e-7)  # beyond the table (v < v(r_max))
    with pytest.raises(DomainError):
        schw3.radius_at_level(1.0)  # t must be < 1


def test_solver_argument_validation():
    prof = schwarzschild_profile(3, 1.0)
    with pytest.raises(ValueError):
        solve_radial_potential(prof, 2)
    with pytest.raises(ValueError):
        solve_radial_potential(prof, 3, tol=1e-20)
    with pytest.raises(ValueError):
        solve_radial_potential(prof, 3, r_max=10.0)


@given(x=st.floats(min_value=1e-4, max_value=0.999))
@settings(max_examples=40, deadline=None)
def test_u_monotone_property(schw3, x):
    # u strictly increases in r: compare each sample against a 5% larger
    # radius
    r = 2.0 * (1.0 + 100.0 * x)
    assert schw3.u(1.05 * r) > schw3.u(r)
