r"""Warped-product exterior geometry and the sub-static tensor.

Model
-----
An exterior region is the warped product

    M = [r0, oo) x S^{n-1},      g0 = f(r)^{-1} dr^2 + r^2 g_{S^{n-1}},

with a profile f that is positive beyond r0 and tends to 1 at infinity.
Two boundary kinds are supported:

  * ``horizon``      -- f(r0) = 0, f'(r0) > 0 (Schwarzschild-like throat);
  * ``mean_convex``  -- f(r0) > 0 (a plain round boundary, e.g. the flat
                        exterior f == 1 on [1, oo)).

Curvature (derivation)
----------------------
Pass to the arclength variable rho, d(rho) = f^{-1/2} dr, so that
g0 = d(rho)^2 + R(rho)^2 g_S with R = r and

    R' = dR/d(rho) = sqrt(f),      R'' = d(sqrt f)/d(rho) = f'/2.

The standard warped-product formulas, in the orthonormal frame
e_r = sqrt(f) d/dr, e_a = r^{-1} (unit frame on S^{n-1}), give

    Ric(e_r, e_r) = -(n-1) R''/R                  = -(n-1) f'/(2r)
    Ric(e_a, e_a) = -R''/R + (n-2)(1 - R'^2)/R^2  = -f'/(2r) + (n-2)(1-f)/r^2
    Scal          = -2(n-1) R''/R + (n-1)(n-2)(1 - R'^2)/R^2
                  = -(n-1) f'/r + (n-1)(n-2)(1-f)/r^2

(trace identity Scal = Ric_rr + (n-1) Ric_tan holds by construction).
For a radial function u(r),

    D^2u(e_r, e_r) = u''(rho)        = f u'' + f' u'/2
    D^2u(e_a, e_a) = (R'/R) u'(rho)  = f u'/r .

The *unit-flux* radial harmonic potential has u'(r) = f^{-1/2} r^{1-n}
(so |Du| = sqrt(f) u' = r^{1-n}); its Hessian reduces to

    D^2u(e_r, e_r) = -(n-1) sqrt(f) r^{-n},
    D^2u(e_a, e_a) =        sqrt(f) r^{-n},

which is trace-free (harmonic) on the nose.  ``CurvaturePoint`` reports the
unit-flux Hessian; an actual triple's Hessian is the same times its flux
constant (the Hessian is linear in it), which is how ``substatic_check``
uses it.

Sub-static tensor
-----------------
A triple (M, g0, u) is sub-static when  u Ric - D^2u >= 0.  Radially the
tensor is diagonal in the frame above with two distinct eigenvalues

    S_rr = u Ric(e_r,e_r) + (n-1) f u'/r        (radial)
    S_tt = u Ric(e_a,e_a) -       f u'/r        (tangential, multiplicity n-1)

using D^2u(e_r,e_r) = -(n-1) f u'/r for the harmonic potential.  On
Schwarzschild (u = sqrt(f)) both vanish identically: the static case.

These formulas are validated against a coordinate-level symbolic Ricci
computation in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ProfileError",
    "DegenerateHorizonError",
    "DomainError",
    "WarpProfile",
    "CurvaturePoint",
    "SubStaticReport",
    "sphere_area",
    "schwarzschild_profile",
    "reissner_nordstrom_profile",
    "flat_profile",
    "curvature_at",
    "substatic_check",
]


class ProfileError(ValueError):
    """A warp profile violates its invariants."""


class DegenerateHorizonError(ProfileError):
    """The requested profile has no simple zero (extremal or horizonless)."""


class DomainError(ValueError):
    """A radius or level outside the domain of definition."""


def sphere_area(n):
    """Area |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2) of the unit (n-1)-sphere."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class WarpProfile:
    """Profile f of a warped exterior g0 = f^{-1} dr^2 + r^2 g_S.

    f, f_prime, f_second are vectorized callables of the radius.  r0 is the
    inner boundary radius.  boundary_kind selects which invariants apply
    (see module docstring).  Instances are validated on construction.
    """

    f: Callable
    f_prime: Callable
    f_second: Callable
    r0: float
    label: str = "profile"
    boundary_kind: str = "horizon"

    def __post_init__(self):
        _validate_profile(self)


def _validate_profile(p: WarpProfile, n_samples: int = 400) -> None:
    if p.boundary_kind not in ("horizon", "mean_convex"):
        raise ProfileError(f"unknown boundary_kind {p.boundary_kind!r}")
    r0 = float(p.r0)
    if not (r0 > 0.0) or not np.isfinite(r0):
        raise ProfileError(f"r0 must be positive and finite, got {r0}")

    f0 = float(p.f(np.array([r0]))[0])
    if p.boundary_kind == "horizon":
        if abs(f0) > 1e-12:
            raise ProfileError(
                f"{p.label}: horizon profile needs f(r0) = 0, got {f0:.3e}"
            )
        fp0 = float(p.f_prime(np.array([r0]))[0])
        if not fp0 > 0.0:
            raise DegenerateHorizonError(
                f"{p.label}: horizon needs f'(r0) > 0, got {fp0:.3e}"
            )
    else:
        if not f0 > 0.0:
            raise ProfileError(
                f"{p.label}: mean_convex boundary needs f(r0) > 0, got {f0:.3e}"
            )

    # positivity on (r0, oo) and asymptotic flatness, sampled geometrically
    rs = r0 * (1.0 + np.logspace(-8.0, 6.0, n_samples))
    fv = np.asarray(p.f(rs), dtype=float)
    if not np.all(fv > 0.0):
        bad = rs[np.argmin(fv)]
        raise ProfileError(f"{p.label}: f <= 0 at r = {bad:.6g}")
    f_far = float(p.f(np.array([1e6 * r0]))[0])
    if abs(f_far - 1.0) >= 1e-3:
        raise ProfileError(
            f"{p.label}: |f(1e6 r0) - 1| = {abs(f_far - 1.0):.3e} >= 1e-3"
        )

    # light consistency of the supplied derivatives (loose fd tolerance)
    for rc in (r0 * 1.5, r0 * 20.0):
        h = 1e-6 * rc
        fd1 = (float(p.f(np.array([rc + h]))[0]) - float(p.f(np.array([rc - h]))[0])) / (2 * h)
        an1 = float(p.f_prime(np.array([rc]))[0])
        if abs(fd1 - an1) > 1e-4 * (1.0 + abs(an1)):
            raise ProfileError(
                f"{p.label}: f_prime inconsistent with f near r = {rc:.4g} "
                f"(fd {fd1:.6g} vs analytic {an1:.6g})"
            )
        fd2 = (
            float(p.f_prime(np.array([rc + h]))[0])
            - float(p.f_prime(np.array([rc - h]))[0])
        ) / (2 * h)
        an2 = float(p.f_second(np.array([rc]))[0])
        if abs(fd2 - an2) > 1e-4 * (1.0 + abs(an2)):
            raise ProfileError(
                f"{p.label}: f_second inconsistent with f_prime near r = {rc:.4g}"
            )


def schwarzschild_profile(n: int, m: float) -> WarpProfile:
    """Schwarzschild profile f = 1 - 2m r^{2-n}, horizon at r0 = (2m)^{1/(n-2)}."""
    if n < 3:
        raise ValueError("dimension n must be >= 3")
    if m <= 0:
        raise ProfileError("mass m must be positive")
    a = 2.0 - n

    def f(r):
        r = np.asarray(r, dtype=float)
        return 1.0 - 2.0 * m * r ** a

    def f_prime(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * m * a * r ** (a - 1.0)

    def f_second(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * m * a * (a - 1.0) * r ** (a - 2.0)

    r0 = (2.0 * m) ** (1.0 / (n - 2.0))
    return WarpProfile(f, f_prime, f_second, r0, label=f"schwarzschild(n={n}, m={m})")


def reissner_nordstrom_profile(n: int, m: float, q: float) -> WarpProfile:
    """Reissner-Nordstrom profile f = 1 - 2m r^{2-n} + q^2 r^{2(2-n)}.

    The outer root r0 (largest zero of f) is located by bisection on
    [m^{1/(n-2)}, 10 (2m)^{1/(n-2)}] followed by a Newton polish; the closed
    form r0^{n-2} = m + sqrt(m^2 - q^2) is reserved for the tests.  Raises
    DegenerateHorizonError when q^2 >= m^2 (no simple outer root).
    """
    if n < 3:
        raise ValueError("dimension n must be >= 3")
    if m <= 0:
        raise ProfileError("mass m must be positive")
    if q * q >= m * m:
        raise DegenerateHorizonError(
            f"reissner-nordstrom: q^2 = {q*q:.6g} >= m^2 = {m*m:.6g}, "
            "horizon degenerate or absent"
        )
    a = 2.0 - n

    def f(r):
        r = np.asarray(r, dtype=float)
        return 1.0 - 2.0 * m * r ** a + (q * q) * r ** (2.0 * a)

    def f_prime(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * m * a * r ** (a - 1.0) + 2.0 * a * (q * q) * r ** (2.0 * a - 1.0)

    def f_second(r):
        r = np.asarray(r, dtype=float)
        return (
            -2.0 * m * a * (a - 1.0) * r ** (a - 2.0)
            + 2.0 * a * (2.0 * a - 1.0) * (q * q) * r ** (2.0 * a - 2.0)
        )

    # bracket: f < 0 at y = r^{n-2} = m, f > 0 well past the Schwarzschild radius
    lo = m ** (1.0 / (n - 2.0))
    hi = 10.0 * (2.0 * m) ** (1.0 / (n - 2.0))
    flo = float(f(np.array([lo]))[0])
    fhi = float(f(np.array([hi]))[0])
    if not (flo < 0.0 < fhi):  # pragma: no cover - q^2 < m^2 guarantees this
        raise DegenerateHorizonError("reissner-nordstrom: failed to bracket outer root")
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if float(f(np.array([mid]))[0]) < 0.0:
            lo = mid
        else:
            hi = mid
    r0 = 0.5 * (lo + hi)
    for _ in range(4):  # Newton polish to machine precision
        r0 = r0 - float(f(np.array([r0]))[0]) / float(f_prime(np.array([r0]))[0])
    return WarpProfile(
        f, f_prime, f_second, r0, label=f"reissner-nordstrom(n={n}, m={m}, q={q})"
    )


def flat_profile(r0: float = 1.0) -> WarpProfile:
    """Flat exterior f == 1 on [r0, oo): Euclidean space minus a round ball.

    Not a horizon (f(r0) = 1), hence boundary_kind = "mean_convex".  The
    associated harmonic triple is the classical capacitary potential; it is
    *not* sub-static and serves as the strict-inequality fixture.
    """

    def f(r):
        return np.ones_like(np.asarray(r, dtype=float))

    def zero(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return WarpProfile(f, zero, zero, r0, label=f"flat-exterior(r0={r0})",
                       boundary_kind="mean_convex")


@dataclass(frozen=True)
class CurvaturePoint:
    """Orthonormal-frame curvature of g0 at radius r, plus the unit-flux
    potential Hessian (see module docstring; multiply the hessian fields by a
    triple's flux constant to get its actual D^2u)."""

    r: np.ndarray
    ricci_radial: np.ndarray
    ricci_tangential: np.ndarray
    scalar: np.ndarray
    hessian_radial: np.ndarray
    hessian_tangential: np.ndarray


def curvature_at(profile: WarpProfile, n: int, r) -> CurvaturePoint:
    """Evaluate the closed-form curvature of the warped metric at radius r.

    r may be a scalar or an array; every r must satisfy r >= r0.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < profile.r0 * (1.0 - 1e-14)):
        raise DomainError(f"radius below r0 = {profile.r0}")
    f = np.asarray(profile.f(r), dtype=float)
    fp = np.asarray(profile.f_prime(r), dtype=float)
    ric_r = -(n - 1) * fp / (2.0 * r)
    ric_t = -fp / (2.0 * r) + (n - 2) * (1.0 - f) / r ** 2
    scal = ric_r + (n - 1) * ric_t
    sqf = np.sqrt(np.maximum(f, 0.0))
    hess_r = -(n - 1) * sqf * r ** (-float(n))
    hess_t = sqf * r ** (-float(n))
    return CurvaturePoint(r, ric_r, ric_t, scal, hess_r, hess_t)


@dataclass(frozen=True)
class SubStaticReport:
    """Result of sampling the eigenvalues of u Ric - D^2u along a triple."""

    is_substatic: bool
    min_eigenvalue: float
    argmin_radius: float
    tolerance: float
    r_samples: np.ndarray = field(repr=False)
    eigen_radial: np.ndarray = field(repr=False)
    eigen_tangential: np.ndarray = field(repr=False)


def substatic_check(triple, r_samples=None) -> SubStaticReport:
    """Sample the sub-static tensor S = u Ric - D^2u of a radial triple.

    Radially S is diagonal with eigenvalues S_rr, S_tt given in the module
    docstring.  The verdict tolerance follows the scale of |u Ric|:
    min eigenvalue >= -1e-9 * (1 + scale) passes.  r_samples defaults to a
    geometric grid of 400 points on [r0 (1 + 1e-8), 1e4 r0].
    """
    prof = triple.profile
    n = triple.n
    if r_samples is None:
        r_samples = prof.r0 * (1.0 + np.logspace(-8.0, 4.0, 400))
    r = np.asarray(r_samples, dtype=float)
    cp = curvature_at(prof, n, r)
    u = triple.u(r)
    c = triple.flux_constant
    # S_rr = u Ric_rr - c * hess_rr,   S_tt = u Ric_tan - c * hess_tan
    s_rr = u * cp.ricci_radial - c * cp.hessian_radial
    s_tt = u * cp.ricci_tangential - c * cp.hessian_tangential
    scale = float(np.max(np.abs(u * cp.ricci_radial))) + float(
        np.max(np.abs(u * cp.ricci_tangential))
    )
    tol = 1e-9 * (1.0 + scale)
    both = np.concatenate([s_rr, s_tt])
    k = int(np.argmin(both))
    min_eig = float(both[k])
    argmin_r = float(np.concatenate([r, r])[k])
    return SubStaticReport(
        is_substatic=bool(min_eig >= -tol),
        min_eigenvalue=min_eig,
        argmin_radius=argmin_r,
        tolerance=tol,
        r_samples=r,
        eigen_radial=s_rr,
        eigen_tangential=s_tt,
    )
