"""Curvature formulas against a coordinate-level symbolic oracle.

The warped-product Ricci formulas in geometry.py are derived in an
orthonormal frame; the oracle below recomputes the Ricci tensor from the
coordinate metric diag(1/f, r^2, r^2 sin^2(theta), ...) through Christoffel
symbols with sympy and compares numerically.  Everything else in the module
(profiles, sub-static verdicts) is checked against closed forms and frozen
regression values.
"""

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from substatic import (
    DegenerateHorizonError,
    DomainError,
    ProfileError,
    curvature_at,
    flat_profile,
    reissner_nordstrom_profile,
    schwarzschild_profile,
    solve_radial_potential,
    sphere_area,
    substatic_check,
)


def _symbolic_ricci_diag(coords, gdiag):
    """Ricci tensor of a diagonal metric, straight from the Christoffels.

    R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik
    """
    dim = len(coords)
    g = sp.diag(*gdiag)
    ginv = sp.diag(*[1 / d for d in gdiag])
    gam = [[[sp.S(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for k in range(dim):
        for i in range(dim):
            for j in range(dim):
                s = sum(
                    ginv[k, l] * (sp.diff(g[l, i], coords[j])
                                  + sp.diff(g[l, j], coords[i])
                                  - sp.diff(g[i, j], coords[l]))
                    for l in range(dim)
                )
                gam[k][i][j] = sp.together(s / 2)
    ric = sp.zeros(dim)
    for i in range(dim):
        for j in range(dim):
            term = sum(sp.diff(gam[k][i][j], coords[k]) for k in range(dim))
            term -= sum(sp.diff(gam[k][i][k], coords[j]) for k in range(dim))
            term += sum(gam[k][k][l] * gam[l][i][j]
                        for k in range(dim) for l in range(dim))
            term -= sum(gam[k][j][l] * gam[l][i][k]
                        for k in range(dim) for l in range(dim))
            ric[i, j] = term
    return ric


@pytest.mark.parametrize("n", [3, 4])
def test_ricci_matches_symbolic_oracle(n):
    # generic two-parameter profile f = 1 - 2M/r^{n-2} + Q^2/r^{2(n-2)};
    # M, Q numeric so that no simplification is needed, only evalf
    r = sp.symbols("r", positive=True)
    angles = sp.symbols(f"x1:{n}", positive=True)  # theta_1 .. theta_{n-1}
    M, Qc = sp.Rational(11, 10), sp.Rational(3, 10)
    f = 1 - 2 * M / r ** (n - 2) + Qc**2 / r ** (2 * (n - 2))

    # round-sphere factors: g_S = d(x1)^2 + sin^2(x1) d(x2)^2 + ...
    gdiag = [1 / f]
    sphere = sp.S(1)
    for k, ang in enumerate(angles):
        gdiag.append(r**2 * sphere)
        sphere = sphere * sp.sin(ang) ** 2
    coords = (r,) + angles

    ric = _symbolic_ricci_diag(coords, gdiag)

    prof = reissner_nordstrom_profile(n, float(M), float(Qc))
    subs0 = {ang: sp.Rational(2, 5) + sp.Rational(k, 7)
             for k, ang in enumerate(angles)}
    for rv in (prof.r0 * 1.01, prof.r0 * 2.0, prof.r0 * 7.5):
        subs = dict(subs0)
        subs[r] = sp.Float(rv, 30)
        # orthonormal components: divide by the metric diagonal
        ric_rr = float((ric[0, 0] * f).subs(subs).evalf(30))
        ric_tt = float((ric[1, 1] / r**2).subs(subs).evalf(30))
        scal = float(
            sum(ric[i, i] / gdiag[i] for i in range(n)).subs(subs).evalf(30)
        )
        cp = curvature_at(prof, n, rv)
        assert cp.ricci_radial[0] == pytest.approx(ric_rr, rel=1e-12, abs=1e-12)
        assert cp.ricci_tangential[0] == pytest.approx(ric_tt, rel=1e-12, abs=1e-12)
        assert cp.scalar[0] == pytest.approx(scal, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_schwarzschild_scalar_flat(n):
    prof = schwarzschild_profile(n, 1.0)
    r = np.geomspace(prof.r0, prof.r0 * 1e4, 200)
    cp = curvature_at(prof, n, r)
    scale = np.abs(cp.ricci_radial) + 1e-30
    assert np.all(np.abs(cp.scalar) <= 1e-12 * np.maximum(scale, 1.0))


def test_trace_identity_and_harmonic_hessian():
    prof = reissner_nordstrom_profile(3, 1.0, 0.3)
    r = np.geomspace(prof.r0, prof.r0 * 1e3, 400)
    cp = curvature_at(prof, 3, r)
    np.testing.assert_allclose(
        cp.scalar, cp.ricci_radial + 2.0 * cp.ricci_tangential, rtol=1e-13
    )
    # unit-flux harmonic Hessian is trace-free
    np.testing.assert_allclose(
        cp.hessian_radial + 2.0 * cp.hessian_tangential, 0.0, atol=1e-16
    )


def test_flat_exterior_is_flat():
    prof = flat_profile(1.0)
    r = np.linspace(1.0, 50.0, 100)
    cp = curvature_at(prof, 3, r)
    assert np.abs(cp.ricci_radial).max() == 0.0
    assert np.abs(cp.ricci_tangential).max() == 0.0
    assert np.abs(cp.scalar).max() == 0.0


def test_rn_outer_root():
    prof = reissner_nordstrom_profile(3, 1.0, 0.3)
    assert prof.r0 == pytest.approx(1.0 + math.sqrt(1.0 - 0.09), rel=1e-14)
    assert prof.f(prof.r0) == pytest.approx(0.0, abs=1e-14)
    assert prof.f_prime(prof.r0) > 0.0


def test_degenerate_and_invalid_profiles():
    with pytest.raises(DegenerateHorizonError):
        reissner_nordstrom_profile(3, 1.0, 1.0)  # extremal: double root
    with pytest.raises(ProfileError):
        reissner_nordstrom_profile(3, 1.0, 1.5)  # naked: no root
    with pytest.raises(ProfileError):
        schwarzschild_profile(3, -1.0)
    with pytest.raises(ProfileError):
        schwarzschild_profile(3, 0.0)
    with pytest.raises(ProfileError):
        flat_profile(0.0)


def test_curvature_domain_error():
    prof = schwarzschild_profile(3, 1.0)
    with pytest.raises(DomainError):
        curvature_at(prof, 3, 1.5)


@given(
    n=st.integers(min_value=3, max_value=6),
    m=st.floats(min_value=0.1, max_value=10.0),
    x=st.floats(min_value=1.0 + 1e-6, max_value=100.0),
)
@settings(max_examples=60, deadline=None)
def test_trace_identity_property(n, m, x):
    prof = schwarzschild_profile(n, m)
    cp = curvature_at(prof, n, prof.r0 * x)
    lhs = float(cp.scalar[0])
    rhs = float(cp.ricci_radial[0] + (n - 1) * cp.ricci_tangential[0])
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_substatic_schwarzschild(n):
    tr = solve_radial_potential(schwarzschild_profile(n, 1.0), n)
    rep = substatic_check(tr)
    # rigidity: u Ric - D^2u == 0 identically, so the sampled minimum is
    # pure quadrature roundoff
    assert rep.is_substatic
    assert abs(rep.min_eigenvalue) < 1e-8


def test_substatic_rn_baseline(rn3):
    rep = substatic_check(rn3)
    assert not rep.is_substatic
    # frozen: default 400-point sweep, m = 1, q = 0.3
    assert rep.min_eigenvalue == pytest.approx(-4.709389897901e-4, rel=1e-6)
    assert rep.argmin_radius == pytest.approx(2.9315346398295139, rel=1e-6)


def test_substatic_flat(flat3):
    rep = substatic_check(flat3)
    # S_tt = -f u'/r = -1/r^3 at r0 = 1: the condition fails right at the
    # boundary with eigenvalue -1
    assert not rep.is_substatic
    assert rep.min_eigenvalue == pytest.approx(-1.0, rel=1e-6)
    assert rep.argmin_radius == pytest.approx(1.0, rel=1e-6)


def test_sphere_area_values():
    assert sphere_area(2) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2.0 * math.pi**2, rel=1e-15)
