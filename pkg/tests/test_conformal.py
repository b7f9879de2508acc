"""Conformal cylinder picture: pointwise identities, divergence identities
in integral form, and the boundary-derivative representation of Phi_beta.

Schwarzschild maps to an exact round cylinder (|grad phi| = 1/(2C)^{1/(n-2)}
... = 1/2 for n = 3, m = 1; Hess phi = 0; Q = 0), so every cylinder
quantity there has a closed-form oracle.  The Reissner-Nordstrom fixture
exercises the identities away from rigidity.
"""

import math
import time

import numpy as np
import pytest

from substatic import (
    BoundaryPointError,
    DomainError,
    Phi_beta,
    Phi_beta_prime,
    Psi_beta,
    conformal_state,
    cylinder_limit_check,
    divY_integrand,
    integral_identity_residual,
    kato_check,
)


def _samples(triple, rng, count=10000, u_min=None):
    lo = math.log(1.0 + 1e-10)
    hi = math.log(triple.r_max / triple.r0 * 0.5)
    r = triple.r0 * np.exp(rng.uniform(lo, hi, count))
    if u_min is not None:
        st = conformal_state(triple, r)
        r = r[st.u >= u_min]
    return r


@pytest.mark.parametrize("name", ["schw", "rn", "flat"])
def test_grad_phi_collapse(fixtures, rng, name):
    # (*): |grad phi|_g = 2 |Du| (1 - u^2)^{-(n-1)/(n-2)} pointwise
    tr = fixtures[name]
    st = conformal_state(tr, _samples(tr, rng))
    q = (tr.n - 1.0) / (tr.n - 2.0)
    star = 2.0 * st.du_norm * st.one_minus_u2 ** (-q)
    assert np.abs(st.grad_phi_norm / star - 1.0).max() < 1e-10


@pytest.mark.parametrize("name", ["schw", "rn", "flat"])
def test_kato_margin(fixtures, rng, name):
    # refined Kato |Hess phi|^2 >= (n/(n-1)) |grad|grad phi||^2 is an
    # equality for radial harmonic phi, so the margin is a pure roundoff
    # quantity; criterion: >= -1e-10
    tr = fixtures[name]
    st = conformal_state(tr, _samples(tr, rng))
    margin = kato_check(st)
    assert margin.min() >= -1e-10


def test_schwarzschild_cylinder_constants(schw3, rng):
    st = conformal_state(schw3, _samples(schw3, rng))
    # |grad phi| = 1/2 everywhere (n = 3, m = 1)
    assert np.abs(st.grad_phi_norm - 0.5).max() < 1e-8
    # Hess phi = 0: norm below 1e-9
    assert np.sqrt(np.abs(st.hess_phi_norm2)).max() < 1e-9


def test_Q_vanishes_on_schwarzschild(schw3, rng):
    # Q(grad phi, grad phi) = 0 on the round cylinder; the residual is the
    # u-quadrature error entering the u Ric - D^2u cancellation
    st = conformal_state(schw3, _samples(schw3, rng, u_min=0.05))
    assert np.abs(st.Q_phi_phi).max() < 1e-10


def test_Q_nan_at_boundary(schw3):
    st = conformal_state(schw3, np.array([2.0, 3.0]))
    assert np.isnan(st.Q_phi_phi[0])
    assert np.isfinite(st.Q_phi_phi[1])
    # boundary limits of the regular fields
    assert st.grad_phi_norm[0] == pytest.approx(0.5, rel=1e-10)
    assert st.hess_phi_norm2[0] == 0.0


def test_divY_integrand_nonnegative_schwarzschild(schw3):
    # the sign claim behind monotonicity, on the resolvable window
    # u >= 0.05 (below it the exact zero is a 0/0 of roundoff)
    r_in = float(np.asarray(schw3.radius_at_v(0.95)).ravel()[0])
    r = np.geomspace(r_in, schw3.r0 * 1e3, 4000)
    st = conformal_state(schw3, r)
    for beta in (0.5 + 1e-9, 1.0, 2.0):
        assert divY_integrand(st, beta).min() >= -1e-9


def test_divY_boundary_error(schw3):
    st = conformal_state(schw3, np.array([2.0]))
    with pytest.raises(BoundaryPointError):
        divY_integrand(st, 1.0)


@pytest.mark.parametrize("kind", ["divY", "divX"])
def test_integral_identity_rn(rn3, kind):
    # residual at default quadrature < 1e-5 relative and halving (or at
    # the roundoff floor) under panel refinement; < 5 s per window
    t0 = time.perf_counter()
    res = integral_identity_residual(rn3, 1.5, 0.5, 2.5, kind=kind)
    res2 = integral_identity_residual(rn3, 1.5, 0.5, 2.5, kind=kind, n_panels=32)
    elapsed = time.perf_counter() - t0
    assert res.relative_residual < 1e-5
    assert res2.relative_residual <= max(res.relative_residual / 2.0, 1e-12)
    assert elapsed < 5.0


def test_integral_identity_rn_frozen(rn3):
    res = integral_identity_residual(rn3, 1.5, 0.5, 2.5, kind="divX")
    # frozen: truncation-dominated residual of the divX identity
    assert res.relative_residual == pytest.approx(9.53e-10, rel=0.05)
    assert abs(res.lhs_boundary) > 1.0  # a genuinely nontrivial identity


def test_integral_identity_schwarzschild(schw3):
    # divY: every term of both sides vanishes (round cylinder) -- absolute
    # residual at roundoff; divX: H_g = 0 kills the volume side's Psi term
    # but the boundary flux is nonzero, so the identity is nontrivial and
    # the *relative* residual is the meaningful number
    sy = integral_identity_residual(schw3, 1.5, 0.5, 2.5, kind="divY")
    assert abs(sy.residual) < 1e-12
    sx = integral_identity_residual(schw3, 1.5, 0.5, 2.5, kind="divX")
    assert abs(sx.lhs_boundary) > 1.0
    assert sx.relative_residual < 1e-8


def test_divY_identity_beta_threshold(rn3):
    # the divY route needs beta > (n-2)/(n-1)
    with pytest.raises(ValueError):
        integral_identity_residual(rn3, 0.4, 0.5, 2.5, kind="divY")


@pytest.mark.parametrize("name", ["schw", "rn"])
@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_phi_prime_representation(fixtures, name, beta):
    # Phi'_beta(s) = -beta sinh(s) Psi_beta(s) against central differences
    tr = fixtures[name]
    s = np.linspace(0.3, 3.0, 12)
    rep = Phi_beta_prime(tr, beta, s)
    h = 1e-5
    fd = (Phi_beta(tr, beta, s + h) - Phi_beta(tr, beta, s - h)) / (2.0 * h)
    tol = np.maximum(1e-6, 1e-3 * np.abs(Phi_beta(tr, beta, s)))
    assert np.all(np.abs(rep - fd) <= tol)


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_monotone_quotient(schw3, beta):
    # Phi'(s)/sinh(s) nondecreasing on sub-static fixtures; on the rigidity
    # fixture the quotient is the zero function, checked at the noise floor
    s = np.linspace(0.2, 4.0, 25)
    quot = Phi_beta_prime(schw3, beta, s) / np.sinh(s)
    assert np.all(np.diff(quot) >= -1e-8)
    assert np.abs(quot).max() < 1e-8


def test_phi_at_zero(schw3):
    # Phi_beta(0) = 2^{1-beta/(n-2)} F_beta(1) = 2^{1-beta} 4 pi at n = 3,
    # m = 1; the beta = n - 2 = 1 member is exactly 4 pi
    assert Phi_beta(schw3, 1.0, 0.0) == pytest.approx(4.0 * math.pi, rel=1e-10)
    assert Phi_beta(schw3, 2.0, 0.0) == pytest.approx(2.0 * math.pi, rel=1e-10)


def test_psi_boundary_point_error(schw3):
    with pytest.raises(BoundaryPointError):
        Psi_beta(schw3, 1.0, 0.0)
    with pytest.raises(DomainError):
        Phi_beta(schw3, 1.0, -0.5)


def test_cylinder_limits_all_fixtures(fixtures, schw4, schw5):
    combos = list(fixtures.values()) + [schw4, schw5]
    for tr in combos:
        rep = cylinder_limit_check(tr)
        assert rep.grad2_ok
        assert rep.area_ok
        assert rep.hess2_approaches_zero
        assert rep.d2u_coeff_match == "n(n-1)(n-2)^2 C^2"


def test_cylinder_limit_values(schw3):
    rep = cylinder_limit_check(schw3)
    # |grad phi|^2 -> (n-2)^2 (2C)^{-2/(n-2)} = 1/4 and the cross-section
    # area -> (2C)^{(n-1)/(n-2)} |S^{n-1}| = 16 pi for n = 3, m = 1
    # both closed forms carry the numerical capacity (~1e-12 off m)
    assert rep.grad2_limit_closed_form == pytest.approx(0.25, rel=1e-10)
    assert rep.area_limit_closed_form == pytest.approx(16.0 * math.pi, rel=1e-10)
    assert rep.grad2_rel_dev < 1e-10
    assert rep.area_rel_dev < 1e-10


def test_conformal_state_domain_errors(schw3):
    with pytest.raises(DomainError):
        conformal_state(schw3, 1.0)  # below r0
    with pytest.raises(DomainError):
        conformal_state(schw3, schw3.r_max * 10.0)  # beyond the table
