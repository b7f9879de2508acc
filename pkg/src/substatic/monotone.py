r"""Level-set monotone quantities F_beta along radial harmonic triples.

For a triple (M, g0, u) and beta > 0, levels are parameterized three ways:

    t in [0,1)   the potential value,       u = t
    tau >= 1     tau = (1 + t^2)/(1 - t^2)  (so t = sqrt((tau-1)/(tau+1)))
    s >= 0       tau = cosh(s), t = tanh(s/2)   (cylinder arclength)

and the monotone quantity is

    F_beta(tau) = (1 + tau)^{beta (n-1)/(n-2)} int_{u=t} |Du|^{beta+1} dsigma .

On the rotationally symmetric triples of this module the level {u = t} is
the sphere r = r(t), |Du| = c r^{1-n} is constant on it, and the integral
is |Du|^{beta+1} |S^{n-1}| r^{n-1}.

Derivatives (per unit tau), with q = (n-1)/(n-2), p = beta q,
B = H - q (2u/(1-u^2)) |Du|,  H = (n-1) sqrt(f)/r:

    F'  = -beta (tau+1)^{p - 3/2} (tau-1)^{-1/2} int |Du|^beta B dsigma

    F'' = beta (tau+1)^{p-3} (tau-1)^{-1} *
          [ (beta - (n-2)/(n-1)) int |Du|^{beta-1} B^2
            + beta int |Du|^{beta-3} |D^T|Du||^2            (== 0 radially)
            + int |Du|^{beta-1} (|h|^2 - H^2/(n-1))         (== 0 radially)
            + int |Du|^{beta-1} (Ric(nu,nu) - D^2u(nu,nu)/u) ] dsigma

The |D^T|Du||^2 and umbilicity terms vanish identically on round levels
(|Du| constant, spheres umbilic); they are kept in the formula as exact
zeros so the expression stays the full one.  The last bracket is
Ric_rr + (n-1) f u'/(r u), which stays finite at a horizon
(f u'/u -> f'(r0)/2).  On Schwarzschild B == 0 and the last bracket
vanishes: F_beta is constant, the rigidity case.

Stability note: all level quantities are computed from v = 1 - t, never
from t itself, so large-tau levels keep full relative precision
(v = (2/(tau+1))/(1 + t)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import DomainError, curvature_at, sphere_area
from .radial import RadialTriple

__all__ = [
    "MonotoneCurve",
    "PenroseReport",
    "LimitReport",
    "TruncationDomainError",
    "tau_to_t",
    "t_to_tau",
    "tau_to_s",
    "s_to_tau",
    "v_of_tau",
    "v_of_s",
    "F_beta",
    "F_beta_prime_analytic",
    "F_beta_second_analytic",
    "monotone_curve",
    "limit_F",
    "penrose_check",
]


class TruncationDomainError(DomainError):
    """A requested level lies too close to the truncation radius r_max."""


# ---------------------------------------------------------------------------
# parameter maps
# ---------------------------------------------------------------------------

def tau_to_t(tau):
    tau = np.asarray(tau, dtype=float)
    return np.sqrt((tau - 1.0) / (tau + 1.0))


def t_to_tau(t):
    t = np.asarray(t, dtype=float)
    return (1.0 + t * t) / ((1.0 - t) * (1.0 + t))


def tau_to_s(tau):
    tau = np.asarray(tau, dtype=float)
    return np.arccosh(tau)


def s_to_tau(s):
    s = np.asarray(s, dtype=float)
    return np.cosh(s)


def v_of_tau(tau):
    """v = 1 - t computed without cancellation: v = (2/(tau+1))/(1+t)."""
    tau = np.asarray(tau, dtype=float)
    t = tau_to_t(tau)
    return (2.0 / (tau + 1.0)) / (1.0 + t)


def v_of_s(s):
    """v = 1 - tanh(s/2) = 2 e^{-s} / (1 + e^{-s}), stable for large s."""
    s = np.asarray(s, dtype=float)
    e = np.exp(-s)
    return 2.0 * e / (1.0 + e)


# ---------------------------------------------------------------------------
# level-set data on a radial triple
# ---------------------------------------------------------------------------

class _Level:
    """Geometry of the level u = 1 - v on a radial triple."""

    def __init__(self, triple: RadialTriple, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        n = triple.n
        r = triple.radius_at_v(v)
        f = np.asarray(triple.profile.f(r), dtype=float)
        self.triple = triple
        self.n = n
        self.v = v
        self.r = r
        self.f = f
        self.u = 1.0 - v
        self.one_minus_u2 = v * (2.0 - v)          # 1 - u^2, no cancellation
        self.du = triple.flux_constant * r ** (1.0 - n)   # |Du|
        with np.errstate(divide="ignore"):                # u' = du/sqrt(f) -> inf at a horizon
            self.uprime = self.du / np.sqrt(f)
        self.H = (n - 1.0) * np.sqrt(f) / r
        q = (n - 1.0) / (n - 2.0)
        self.B = self.H - q * (2.0 * self.u / self.one_minus_u2) * self.du
        self.area0 = sphere_area(n) * r ** (n - 1.0)


def _as_tau_v(triple, tau):
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 1.0 - 1e-12):
        raise DomainError("tau must be >= 1")
    tau = np.maximum(tau, 1.0)
    return tau, v_of_tau(tau)


def F_beta(triple: RadialTriple, beta: float, tau):
    """F_beta at level(s) tau; scalar in -> scalar out, array in -> array."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    scalar = np.isscalar(tau) or np.ndim(tau) == 0
    tau, v = _as_tau_v(triple, tau)
    lv = _Level(triple, v)
    n = triple.n
    p = beta * (n - 1.0) / (n - 2.0)
    one_plus_tau = 2.0 / lv.one_minus_u2
    out = one_plus_tau ** p * lv.du ** (beta + 1.0) * lv.area0
    return float(out[0]) if scalar else out


def F_beta_prime_analytic(triple: RadialTriple, beta: float, tau):
    """dF_beta/dtau from the closed formula (requires tau > 1)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    scalar = np.isscalar(tau) or np.ndim(tau) == 0
    tau, v = _as_tau_v(triple, tau)
    if np.any(tau <= 1.0):
        raise DomainError("the derivative parameterization degenerates at tau = 1")
    lv = _Level(triple, v)
    n = triple.n
    p = beta * (n - 1.0) / (n - 2.0)
    one_plus_tau = 2.0 / lv.one_minus_u2
    tau_minus_1 = 2.0 * lv.u ** 2 / lv.one_minus_u2    # = tau - 1, stable
    out = (
        -beta
        * one_plus_tau ** (p - 1.5)
        * tau_minus_1 ** (-0.5)
        * lv.du ** beta
        * lv.B
        * lv.area0
    )
    return float(out[0]) if scalar else out


def F_beta_second_analytic(triple: RadialTriple, beta: float, tau):
    """d^2F_beta/dtau^2 from the closed formula (requires tau > 1)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    scalar = np.isscalar(tau) or np.ndim(tau) == 0
    tau, v = _as_tau_v(triple, tau)
    if np.any(tau <= 1.0):
        raise DomainError("the derivative parameterization degenerates at tau = 1")
    lv = _Level(triple, v)
    n = triple.n
    p = beta * (n - 1.0) / (n - 2.0)
    one_plus_tau = 2.0 / lv.one_minus_u2
    tau_minus_1 = 2.0 * lv.u ** 2 / lv.one_minus_u2
    cp = curvature_at(triple.profile, n, lv.r)
    # Ric(nu,nu) - D^2u(nu,nu)/u  with D^2u_rr = -(n-1) f u'/r
    bracket = cp.ricci_radial + (n - 1.0) * lv.f * lv.uprime / (lv.r * lv.u)
    term_sharp = (beta - (n - 2.0) / (n - 1.0)) * lv.du ** (beta - 1.0) * lv.B ** 2
    term_grad = 0.0 * lv.du     # beta |Du|^{beta-3} |D^T|Du||^2: zero radially
    term_umb = 0.0 * lv.du      # |Du|^{beta-1} (|h|^2 - H^2/(n-1)): zero radially
    term_ric = lv.du ** (beta - 1.0) * bracket
    out = (
        beta
        * one_plus_tau ** (p - 3.0)
        / tau_minus_1
        * (term_sharp + term_grad + term_umb + term_ric)
        * lv.area0
    )
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# curves and verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotoneCurve:
    """Sampled F_beta curve with derivative columns and verdicts.

    parameterization is "tau" or "s"; for "s" the value column is
    Phi_beta(s) = 2^{1 - beta/(n-2)} F_beta(cosh s) and the derivative
    columns are d/ds.  Verdicts: nonincreasing means every fd derivative
    is <= tol_verdict; convex means every second divided difference
    (an estimate of value''/2) clears -(tol_verdict + noise floor), the
    noise floor being the 4 eps_F/(h_- h_+) amplification of roundoff in
    the value column; the floors are recorded in dd_noise.
    """

    beta: float
    parameterization: str
    grid: np.ndarray
    t: np.ndarray
    value: np.ndarray
    analytic_derivative: np.ndarray
    fd_derivative: np.ndarray
    fd_step: np.ndarray
    nonincreasing: bool
    convex: bool
    tol_verdict: float
    dd_noise: np.ndarray = field(repr=False)
    metadata: dict = field(default_factory=dict, repr=False)


def _phi_scale(n, beta):
    return 2.0 ** (1.0 - beta / (n - 2.0))


def monotone_curve(
    triple: RadialTriple,
    beta: float,
    taus=None,
    parameterization: str = "tau",
    tol_verdict: Optional[float] = None,
) -> MonotoneCurve:
    """Sample F_beta (or Phi_beta over s) and render monotonicity verdicts.

    Default grid: tau = 1 + g, g geometric on [1e-3, 1e3], 200 points (for
    parameterization "s", the image of that grid under arccosh).  The fd
    step is 1e-4, shrunk near tau = 1 to stay inside the domain.
    """
    if parameterization not in ("tau", "s"):
        raise ValueError("parameterization must be 'tau' or 's'")
    n = triple.n
    if taus is None:
        grid = 1.0 + np.geomspace(1e-3, 1e3, 200)
        if parameterization == "s":
            grid = tau_to_s(grid)
    else:
        grid = np.asarray(taus, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")

    if parameterization == "tau":
        if np.any(grid <= 1.0):
            raise DomainError("tau grid must satisfy tau > 1 for derivatives")
        evaluate = lambda g: F_beta(triple, beta, g)
        derivative = lambda g: F_beta_prime_analytic(triple, beta, g)
        h = np.minimum(1e-4, 0.49 * (grid - 1.0))
        tvals = tau_to_t(grid)
    else:
        if np.any(grid <= 0.0):
            raise DomainError("s grid must be positive")
        scale = _phi_scale(n, beta)
        evaluate = lambda g: scale * F_beta(triple, beta, s_to_tau(g))
        derivative = lambda g: (
            scale * F_beta_prime_analytic(triple, beta, s_to_tau(g)) * np.sinh(g)
        )
        h = np.minimum(1e-4, 0.49 * grid)
        tvals = tau_to_t(s_to_tau(grid))

    value = evaluate(grid)
    dana = derivative(grid)
    dfd = (evaluate(grid + h) - evaluate(grid - h)) / (2.0 * h)

    if tol_verdict is None:
        v1 = float(evaluate(grid[:1])[0])
        tol_verdict = 10.0 * triple.tol * abs(v1)
    fd_floor = 1e-13 * np.max(np.abs(value)) / h
    tol_mono = np.maximum(tol_verdict, fd_floor)
    nonincreasing = bool(np.all(dfd <= tol_mono))

    hm = np.diff(grid)[:-1]
    hp = np.diff(grid)[1:]
    dd = 2.0 * (
        (value[2:] - value[1:-1]) / hp - (value[1:-1] - value[:-2]) / hm
    ) / (hm + hp)
    eps_f = 1e-14 * np.max(np.abs(value))
    dd_noise = 8.0 * eps_f / (hm * hp)
    convex = bool(np.all(dd >= -(tol_verdict + dd_noise)))

    return MonotoneCurve(
        beta=beta,
        parameterization=parameterization,
        grid=grid,
        t=tvals,
        value=value,
        analytic_derivative=dana,
        fd_derivative=dfd,
        fd_step=h,
        nonincreasing=nonincreasing,
        convex=convex,
        tol_verdict=float(tol_verdict),
        dd_noise=dd_noise,
        metadata={
            "n": n,
            "profile": triple.profile.label,
            "flux_constant": triple.flux_constant,
        },
    )


@dataclass(frozen=True)
class LimitReport:
    """Closed-form limit of F_beta at the cylinder end, with a truncation check."""

    value: float
    F_at_probe: float
    probe_tau: float
    rel_deviation: float
    within_one_percent: bool


def limit_F(triple: RadialTriple, beta: float, probe_tau: float = 1e3) -> LimitReport:
    """lim_{tau->oo} F_beta = (n-2)^{beta+1} C^{1 - beta/(n-2)} |S^{n-1}|.

    Probes F at probe_tau; deviation beyond 5% raises TruncationDomainError
    (the triple's r_max does not resolve the cylinder end), beyond 1% is
    reported as within_one_percent = False.
    """
    n = triple.n
    C = triple.capacity
    value = (n - 2.0) ** (beta + 1.0) * C ** (1.0 - beta / (n - 2.0)) * sphere_area(n)
    Fp = F_beta(triple, beta, probe_tau)
    rel = abs(Fp - value) / abs(value)
    if rel > 0.05:
        raise TruncationDomainError(
            f"F_beta({probe_tau:g}) deviates {rel:.2%} from the closed-form limit; "
            "increase r_max"
        )
    return LimitReport(
        value=value,
        F_at_probe=Fp,
        probe_tau=probe_tau,
        rel_deviation=rel,
        within_one_percent=bool(rel <= 0.01),
    )


# ---------------------------------------------------------------------------
# capacitary Penrose inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PenroseReport:
    """Capacity vs boundary-area comparison: margin = C - rhs >= 0 expected
    for sub-static triples, with equality exactly on Schwarzschild."""

    capacity: float
    boundary_area: float
    rhs: float
    margin: float
    equality_flag: bool
    tol: float


def penrose_check(obj, tol: float = 1e-8) -> PenroseReport:
    """Capacitary Penrose check: C >= (1/2) (|bd M|/|S^{n-1}|)^{(n-2)/(n-1)}.

    Accepts a RadialTriple or a solved 3d field (dispatched lazily to the
    grid implementation).  equality_flag marks |margin| <= tol * max(1, C).
    """
    if hasattr(obj, "values") and hasattr(obj, "spec"):
        from .field3d import penrose_check_field

        return penrose_check_field(obj, tol=tol)
    triple: RadialTriple = obj
    n = triple.n
    C = triple.capacity
    area = sphere_area(n) * triple.r0 ** (n - 1.0)
    rhs = 0.5 * (area / sphere_area(n)) ** ((n - 2.0) / (n - 1.0))
    margin = C - rhs
    return PenroseReport(
        capacity=C,
        boundary_area=area,
        rhs=rhs,
        margin=margin,
        equality_flag=bool(abs(margin) <= tol * max(1.0, abs(C))),
        tol=tol,
    )
