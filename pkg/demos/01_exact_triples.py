#!/usr/bin/env python3
"""
Exact warped-product triples and the sub-static verdict
=======================================================

Builds the three shipped radial fixtures

    schwarzschild  f = 1 - 2m/r          (sub-static: u Ric - D^2u == 0)
    rn q=0.3       f = 1 - 2m/r + q^2/r^2 (fails in a thin annulus)
    flat exterior  f = 1 on [1, oo)       (fails right at the boundary)

solves the harmonic potential on each, and prints the capacity values and
the sampled eigenvalues of the sub-static tensor.
"""

import sys

import numpy as np

from substatic import (
    capacity,
    curvature_at,
    flat_profile,
    reissner_nordstrom_profile,
    schwarzschild_profile,
    solve_radial_potential,
    substatic_check,
)


def hr(title=""):
    print("-" * 72 if not title else f"--- {title} ".ljust(72, "-"))


def main():
    failures = 0
    triples = {
        "schwarzschild": solve_radial_potential(schwarzschild_profile(3, 1.0), 3),
        "rn q=0.3": solve_radial_potential(
            reissner_nordstrom_profile(3, 1.0, 0.3), 3
        ),
        "flat exterior": solve_radial_potential(flat_profile(1.0), 3),
    }

    hr("capacity: flux at r0 / flux at infinity / Dirichlet energy")
    for name, tr in triples.items():
        cap = capacity(tr)
        print(
            f"{name:16s} {cap.flux_at_boundary:.10f}  {cap.flux_at_infinity:.10f}"
            f"  {cap.dirichlet_energy:.10f}   spread {cap.max_rel_spread:.2e}"
        )

    hr("curvature spot check at 2 r0 (orthonormal frame)")
    for name, tr in triples.items():
        cp = curvature_at(tr.profile, 3, 2.0 * tr.r0)
        print(
            f"{name:16s} Ric_rr {float(cp.ricci_radial[0]):+.6f}"
            f"  Ric_tt {float(cp.ricci_tangential[0]):+.6f}"
            f"  Scal {float(cp.scalar[0]):+.2e}"
        )

    hr("sub-static tensor u Ric - D^2u (minimum sampled eigenvalue)")
    expected = {"schwarzschild": True, "rn q=0.3": False, "flat exterior": False}
    for name, tr in triples.items():
        rep = substatic_check(tr)
        tag = "[PASS]" if rep.is_substatic == expected[name] else "[FAIL]"
        if rep.is_substatic != expected[name]:
            failures += 1
        print(
            f"{tag} {name:16s} substatic={rep.is_substatic!s:5s} "
            f"min eig {rep.min_eigenvalue:+.3e} at r = {rep.argmin_radius:.4f}"
        )

    hr()
    print(f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
