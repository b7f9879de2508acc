"""Numerical laboratory for sub-static harmonic triples.

A triple (M, g0, u) is an exterior Riemannian manifold with a harmonic
potential u (u = 0 on the inner boundary, u -> 1 at infinity) such that
u Ric - D^2u >= 0.  This package constructs such triples exactly (warped
products) and numerically (multi-center 3d solves), evaluates the level-set
quantities F_beta / Phi_beta whose monotonicity encodes the capacitary
Penrose inequality, and cross-checks every identity the framework rests on.

Modules
-------
geometry   warped-product curvature, profiles, sub-static tensor
radial     high-precision radial potential, capacity, asymptotics
monotone   F_beta and derivatives along level sets, Penrose check
conformal  cylinder picture: phi = log((1+u)/(1-u)), Kato, identities
field3d    multi-center conformally flat solver on a Cartesian grid
cli        command-line front end (`substatic <subcommand>`)
"""

from .geometry import (
    WarpProfile,
    CurvaturePoint,
    SubStaticReport,
    ProfileError,
    DegenerateHorizonError,
    DomainError,
    sphere_area,
    schwarzschild_profile,
    reissner_nordstrom_profile,
    flat_profile,
    curvature_at,
    substatic_check,
)
from .radial import (
    RadialTriple,
    CapacityEstimate,
    AsymptoticReport,
    solve_radial_potential,
    capacity,
    asymptotic_expansion_check,
)
from .monotone import (
    MonotoneCurve,
    PenroseReport,
    LimitReport,
    F_beta,
    F_beta_prime_analytic,
    F_beta_second_analytic,
    monotone_curve,
    limit_F,
    penrose_check,
    tau_to_t,
    t_to_tau,
    s_to_tau,
    tau_to_s,
    v_of_tau,
    v_of_s,
)
from .conformal import (
    ConformalState,
    IdentityResidual,
    CylinderLimitReport,
    BoundaryPointError,
    conformal_state,
    kato_check,
    divY_integrand,
    Phi_beta,
    Phi_beta_prime,
    Psi_beta,
    integral_identity_residual,
    cylinder_limit_check,
)
from .field3d import (
    ConformalFactorSpec,
    ScalarField3D,
    LevelSurface,
    MassEstimate,
    MassExtrapolation,
    CriticalPoint,
    Field3DScan,
    solve_field,
    extract_level,
    surface_integral_F,
    coarea_integral_F,
    monotonicity_scan,
    find_critical_points,
    adm_mass,
    extrapolate_mass,
    penrose_check_field,
)

__version__ = "0.1.0"
