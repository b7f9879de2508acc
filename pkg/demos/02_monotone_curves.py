#!/usr/bin/env python3
"""
The level-set functional F_beta: constancy, monotonicity, Penrose margin
========================================================================

F_beta(tau) integrates |Du|^{beta+1} / u-weights over the level set
{1/(1-u) = tau}.  The theory predicts, for sub-static triples:

  * F_beta is nonincreasing and convex in tau,
  * equality (F constant) characterises the Schwarzschild fixture,
  * the tau -> infinity limit encodes capacity, giving the capacitary
    Penrose inequality  cap >= (|\partial M| / |S^{n-1}|)^{(n-2)/(n-1)}
    (up to normalisation).

The RN fixture is NOT sub-static, and its curves visibly break convexity;
the flat exterior sits strictly inside the Penrose bound.
"""

import sys

import numpy as np

from substatic import (
    F_beta,
    flat_profile,
    limit_F,
    monotone_curve,
    penrose_check,
    reissner_nordstrom_profile,
    schwarzschild_profile,
    solve_radial_potential,
)


def hr(title=""):
    print("-" * 72 if not title else f"--- {title} ".ljust(72, "-"))


def main():
    failures = 0
    schw = solve_radial_potential(schwarzschild_profile(3, 1.0), 3)
    rn = solve_radial_potential(reissner_nordstrom_profile(3, 1.0, 0.3), 3)
    flat = solve_radial_potential(flat_profile(1.0), 3)
    tau = np.geomspace(1.0, 1.0e3, 200)

    hr("constancy on the rigidity fixture (expect 4*pi for every beta)")
    for beta in (0.5, 1.0, 2.0, 3.0):
        curve = monotone_curve(schw, beta, tau)
        dev = float(np.max(np.abs(curve.F / (4.0 * np.pi) - 1.0)))
        tag = "[PASS]" if dev < 1e-6 else "[FAIL]"
        if dev >= 1e-6:
            failures += 1
        print(f"{tag} beta={beta:3.1f}  max |F/4pi - 1| = {dev:.3e}")

    hr("monotonicity verdicts (fd derivative <= 1e-6, 2nd diff >= -1e-6)")
    for name, tr, want in (("schwarzschild", schw, True), ("rn q=0.3", rn, False)):
        for beta in (0.5, 1.0, 2.0):
            curve = monotone_curve(tr, beta, tau)
            ok = (curve.nonincreasing and curve.convex) == want
            tag = "[PASS]" if ok else "[FAIL]"
            if not ok:
                failures += 1
            print(
                f"{tag} {name:14s} beta={beta:3.1f}  nonincreasing="
                f"{curve.nonincreasing!s:5s} convex={curve.convex!s:5s}"
            )

    hr("analytic derivative vs centred differences (beta = 1)")
    for name, tr in (("schwarzschild", schw), ("rn q=0.3", rn)):
        curve = monotone_curve(tr, 1.0, tau)
        interior = slice(2, -2)
        scale = np.maximum(np.abs(curve.analytic_derivative[interior]), 1e-12)
        err = float(
            np.max(
                np.abs(
                    curve.fd_derivative[interior]
                    - curve.analytic_derivative[interior]
                )
                / scale
            )
        )
        tag = "[PASS]" if err < 1e-6 else "[FAIL]"
        if err >= 1e-6:
            failures += 1
        print(f"{tag} {name:14s} max rel |F'_fd - F'_analytic| = {err:.3e}")

    hr("limit F_beta(tau -> oo) against the closed form")
    rep = limit_F(schw, 2.0)
    tag = "[PASS]" if rep.within_one_percent else "[FAIL]"
    if not rep.within_one_percent:
        failures += 1
    print(
        f"{tag} schwarzschild beta=2.0  limit {rep.value:.8f}  "
        f"probe F({rep.probe_tau:.0f}) = {rep.F_at_probe:.8f}  "
        f"rel dev {rep.rel_deviation:.2e}"
    )

    hr("capacitary Penrose margin  cap - (area ratio)^{(n-2)/(n-1)}")
    for name, tr, lo, hi in (
        ("schwarzschild", schw, -1e-8, 1e-8),
        ("flat exterior", flat, 0.5 - 1e-6, 0.5 + 1e-6),
        ("rn q=0.3", rn, None, None),
    ):
        rep = penrose_check(tr)
        if lo is None:
            print(
                f"       {name:14s} margin {rep.margin:+.6e}"
                "  (not sub-static: inequality not asserted)"
            )
            continue
        ok = lo <= rep.margin <= hi
        tag = "[PASS]" if ok else "[FAIL]"
        if not ok:
            failures += 1
        print(
            f"{tag} {name:14s} margin {rep.margin:+.6e}"
            f"  equality={rep.equality_flag}"
        )

    hr()
    print(f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
