r"""Configuration-driven experiment runner.

    substatic <subcommand> [--config PATH] [--out DIR] [flags]

Subcommands: schwarzschild, radial, monotone, penrose, conformal-check,
identity, field3d, adm, selftest.  Flags --beta/--n/--m/--q/--tol/--grid/
--seed override the matching config keys; the config file is flat
structured text (INI sections of key = value pairs) and unknown sections
or keys are rejected with a named diagnostic.

Outputs: one or more CSV files (numbers with 17 significant digits, so a
rerun of the same config reproduces them byte for byte) and a structured
text summary with a provenance block (config hash, code version,
timestamp -- the timestamp lives only in the summary, never in the CSV).

Exit codes: 0 all verdicts pass; 2 a theorem-backed verdict fails
(monotonicity on a verified sub-static triple, a Penrose margin, an
integral identity, a rigidity constancy); 3 computational or usage error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import hashlib
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import (
    DomainError,
    ProfileError,
    curvature_at,
    flat_profile,
    reissner_nordstrom_profile,
    schwarzschild_profile,
    sphere_area,
    substatic_check,
)
from .radial import asymptotic_expansion_check, capacity, solve_radial_potential
from .monotone import (
    F_beta,
    limit_F,
    monotone_curve,
    penrose_check,
    s_to_tau,
    t_to_tau,
    tau_to_s,
    tau_to_t,
)
from .conformal import (
    Phi_beta,
    Phi_beta_prime,
    Psi_beta,
    conformal_state,
    cylinder_limit_check,
    divY_integrand,
    integral_identity_residual,
    kato_check,
)
from . import field3d as f3


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

_SCHEMA = {
    "triple": {"kind", "n", "m", "q", "r0", "r_max", "tol"},
    "monotone": {"beta", "parameterization", "points", "tau_max"},
    "penrose": {"tol"},
    "conformal": {"samples", "seed", "beta"},
    "identity": {"beta", "kind", "s_low", "s_high", "n_panels", "tol"},
    "field3d": {
        "centers",
        "masses",
        "excision_radii",
        "nx",
        "extent",
        "tol",
        "levels",
        "beta",
    },
    "adm": {"radii"},
    "output": {"dir"},
}

_TRIPLE_DEFAULTS = {
    "kind": "schwarzschild",
    "n": "3",
    "m": "1.0",
    "q": "0.0",
    "r0": "1.0",
    "r_max": "",
    "tol": "1e-12",
}


class ConfigError(ValueError):
    pass


def _load_config(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"unknown config section [{section}] "
                f"(known: {', '.join(sorted(_SCHEMA))})"
            )
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown key '{key}' in section [{section}] "
                    f"(known: {', '.join(sorted(_SCHEMA[section]))})"
                )
        cfg[section] = dict(cp[section])
    return cfg


def _effective_config(args):
    """Merge file config with flag overrides into {section: {key: str}}."""
    cfg = _load_config(args.config) if args.config else {}
    tri = dict(_TRIPLE_DEFAULTS)
    tri.update(cfg.get("triple", {}))
    if args.n is not None:
        tri["n"] = str(args.n)
    if args.m is not None:
        tri["m"] = repr(args.m)
    if args.q is not None:
        tri["q"] = repr(args.q)
        # a charge only makes sense on the RN profile; q = 0 recovers
        # schwarzschild exactly, so the switch is unambiguous
        if args.q != 0.0 and tri["kind"] == "schwarzschild":
            tri["kind"] = "rn"
    if args.tol is not None:
        tri["tol"] = repr(args.tol)
    cfg["triple"] = tri
    if args.beta is not None:
        cfg.setdefault("monotone", {})["beta"] = args.beta
        cfg.setdefault("identity", {})["beta"] = args.beta
        cfg.setdefault("field3d", {})["beta"] = args.beta
    if args.seed is not None:
        cfg.setdefault("conformal", {})["seed"] = str(args.seed)
    if args.grid is not None:
        cfg.setdefault("field3d", {})["nx"] = str(args.grid)
        cfg.setdefault("monotone", {})["points"] = str(args.grid)
    if args.out is not None:
        cfg.setdefault("output", {})["dir"] = args.out
    return cfg


def _config_hash(cfg):
    # the output directory is not part of the scientific configuration
    canon = "\n".join(
        f"{s}.{k}={cfg[s][k]}"
        for s in sorted(cfg)
        if s != "output"
        for k in sorted(cfg[s])
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _beta_list(cfg, section, default):
    raw = cfg.get(section, {}).get("beta", "")
    if not raw:
        return list(default)
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _build_triple(cfg):
    tri = cfg["triple"]
    n = int(tri["n"])
    tol = float(tri["tol"])
    kind = tri["kind"].strip().lower()
    if kind == "schwarzschild":
        profile = schwarzschild_profile(n, float(tri["m"]))
    elif kind in ("reissner-nordstrom", "rn"):
        profile = reissner_nordstrom_profile(n, float(tri["m"]), float(tri["q"]))
    elif kind == "flat":
        profile = flat_profile(float(tri["r0"]))
    else:
        raise ConfigError(f"unknown triple kind '{tri['kind']}'")
    r_max = float(tri["r_max"]) if tri.get("r_max") else None
    return solve_radial_potential(profile, n, r_max=r_max, tol=tol)


# ---------------------------------------------------------------------------
# emitters
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _write_summary(path: Path, cfg, lines, verdicts):
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(path, "w", newline="\n") as fh:
        fh.write("provenance:\n")
        fh.write(f"  config_hash: {_config_hash(cfg)}\n")
        fh.write(f"  code_version: {__version__}\n")
        fh.write(f"  timestamp: {stamp}\n")
        for line in lines:
            fh.write(line.rstrip() + "\n")
        fh.write("verdicts:\n")
        for name, ok, detail in verdicts:
            fh.write(f"  {name}: {'PASS' if ok else 'FAIL'} ({detail})\n")
    return path


def _out_dir(cfg) -> Path:
    return Path(cfg.get("output", {}).get("dir", "."))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_schwarzschild(cfg) -> int:
    cfg["triple"]["kind"] = "schwarzschild"
    triple = _build_triple(cfg)
    n, m = triple.n, float(cfg["triple"]["m"])
    rs = triple.r0 * np.geomspace(1.0, 1e3 / max(1.0, triple.r0), 400)
    u = triple.u(rs)
    exact = np.sqrt(np.maximum(1.0 - 2.0 * m * rs ** (2.0 - n), 0.0))
    err = np.abs(u - exact)
    cap = capacity(triple)
    pen = penrose_check(triple)
    verdicts = [
        (
            "potential_matches_closed_form",
            bool(err.max() < 1e-8),
            f"max |u - sqrt(f)| = {err.max():.3g}, tol 1e-8",
        ),
        (
            "capacity_equals_mass",
            bool(abs(cap.agreed_value - m) < 1e-6 * max(1.0, m)),
            f"C = {cap.agreed_value!r}, m = {m!r}",
        ),
        (
            "penrose_equality",
            bool(abs(pen.margin) <= 1e-8 * max(1.0, cap.agreed_value)),
            f"margin = {pen.margin!r}",
        ),
    ]
    out = _out_dir(cfg)
    _write_csv(
        out / "schwarzschild.csv",
        ["r", "u", "u_exact", "abs_err", "grad_norm"],
        zip(rs, u, exact, err, triple.grad_norm(rs)),
    )
    _write_summary(
        out / "schwarzschild_summary.txt",
        cfg,
        [
            f"n: {n}",
            f"mass: {_fmt(m)}",
            f"capacity_flux: {_fmt(cap.flux_at_boundary)}",
            f"capacity_infinity: {_fmt(cap.flux_at_infinity)}",
            f"capacity_energy: {_fmt(cap.dirichlet_energy)}",
            f"penrose_margin: {_fmt(pen.margin)}",
        ],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


def _cmd_radial(cfg) -> int:
    triple = _build_triple(cfg)
    cap = capacity(triple)
    asym = asymptotic_expansion_check(triple)
    sub = substatic_check(triple)
    rs = triple.r0 * np.geomspace(1.0, triple.r_max / triple.r0, 400)
    verdicts = [
        (
            "capacity_three_way_agreement",
            bool(cap.max_rel_spread < 1e-4),
            f"spread = {cap.max_rel_spread:.3g}, tol 1e-4",
        ),
        (
            "asymptotic_expansion_decays",
            bool(asym.decays),
            f"residuals {asym.residual_value[-1]:.3g}, {asym.residual_derivative[-1]:.3g}",
        ),
    ]
    out = _out_dir(cfg)
    _write_csv(
        out / "radial.csv",
        ["r", "u", "one_minus_u", "grad_norm"],
        zip(rs, triple.u(rs), triple.one_minus_u(rs), triple.grad_norm(rs)),
    )
    _write_summary(
        out / "radial_summary.txt",
        cfg,
        [
            f"profile: {triple.profile.label}",
            f"n: {triple.n}",
            f"capacity: {_fmt(cap.agreed_value)}",
            f"flux_constant: {_fmt(triple.flux_constant)}",
            f"substatic: {sub.is_substatic} (min eigenvalue {_fmt(sub.min_eigenvalue)} "
            f"at r = {_fmt(sub.argmin_radius)})",
            f"tail_leading: {_fmt(triple.tail_leading)}",
        ],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


def _cmd_monotone(cfg) -> int:
    triple = _build_triple(cfg)
    betas = _beta_list(cfg, "monotone", (0.5, 1.0, 2.0))
    mono = cfg.get("monotone", {})
    points = int(mono.get("points", "200"))
    tau_max = float(mono.get("tau_max", "1e3"))
    param = mono.get("parameterization", "tau")
    grid = 1.0 + np.geomspace(1e-3, tau_max - 1.0, points)
    if param == "s":
        grid = tau_to_s(grid)
    sub = substatic_check(triple)
    rows = []
    verdicts = []
    for beta in betas:
        curve = monotone_curve(triple, beta, taus=grid, parameterization=param)
        taus = curve.grid if param == "tau" else s_to_tau(curve.grid)
        for i in range(curve.grid.size):
            flag = "ok"
            if curve.fd_derivative[i] > max(curve.tol_verdict, 1e-13):
                flag = "fd_positive"
            rows.append(
                (
                    beta,
                    taus[i],
                    curve.t[i],
                    curve.value[i],
                    curve.analytic_derivative[i],
                    curve.fd_derivative[i],
                    flag,
                )
            )
        if sub.is_substatic:
            verdicts.append(
                (
                    f"nonincreasing_beta_{beta:g}",
                    curve.nonincreasing,
                    f"tol {curve.tol_verdict:.3g}",
                )
            )
            verdicts.append(
                (f"convex_beta_{beta:g}", curve.convex, "second differences")
            )
        else:
            verdicts.append(
                (
                    f"informational_beta_{beta:g}",
                    True,
                    f"substatic_check failed; nonincreasing={curve.nonincreasing}",
                )
            )
    out = _out_dir(cfg)
    _write_csv(
        out / "monotone.csv",
        ["beta", "tau", "t", "F", "dF_analytic", "dF_fd", "flags"],
        rows,
    )
    _write_summary(
        out / "monotone_summary.txt",
        cfg,
        [
            f"profile: {triple.profile.label}",
            f"n: {triple.n}",
            f"substatic: {sub.is_substatic}",
            f"parameterization: {param}",
        ],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


def _cmd_penrose(cfg) -> int:
    triple = _build_triple(cfg)
    tol = float(cfg.get("penrose", {}).get("tol", "1e-8"))
    rep = penrose_check(triple, tol=tol)
    sub = substatic_check(triple)
    ok = (rep.margin >= -tol) if sub.is_substatic else True
    verdicts = [
        (
            "penrose_margin_nonnegative" if sub.is_substatic else "penrose_informational",
            bool(ok),
            f"margin = {rep.margin!r}, substatic = {sub.is_substatic}",
        )
    ]
    out = _out_dir(cfg)
    _write_csv(
        out / "penrose.csv",
        ["capacity", "area", "rhs", "margin"],
        [(rep.capacity, rep.boundary_area, rep.rhs, rep.margin)],
    )
    _write_summary(
        out / "penrose_summary.txt",
        cfg,
        [f"profile: {triple.profile.label}", f"equality: {rep.equality_flag}"],
        verdicts,
    )
    return 0 if ok else 2


def _cmd_conformal_check(cfg) -> int:
    triple = _build_triple(cfg)
    con = cfg.get("conformal", {})
    n_samples = int(con.get("samples", "10000"))
    seed = int(con.get("seed", "0"))
    rng = np.random.default_rng(seed)
    # sample radii log-uniformly, biased to include the near-boundary zone
    lo, hi = math.log(1.0 + 1e-10), math.log(triple.r_max / triple.r0 * 0.5)
    r = triple.r0 * np.exp(rng.uniform(lo, hi, n_samples))
    st = conformal_state(triple, r)
    n = triple.n
    q = (n - 1.0) / (n - 2.0)
    star = 2.0 * st.du_norm * st.one_minus_u2 ** (-q)
    star_resid = np.abs(st.grad_phi_norm / star - 1.0)
    kato = kato_check(st)
    kato_scale = np.maximum(st.hess_phi_norm2, st.grad_of_grad_norm2)
    sub = substatic_check(triple)
    verdicts = [
        (
            "grad_identity_star",
            bool(star_resid.max() <= 1e-10),
            f"max rel residual {star_resid.max():.3g}, tol 1e-10",
        ),
        (
            "kato_margin_nonnegative",
            bool(np.all(kato >= -1e-10 * np.maximum(kato_scale, 1.0))),
            f"min margin {kato.min():.3g}",
        ),
    ]
    if sub.is_substatic:
        # below u ~ 0.05 the integrand is a 0/0 of roundoff (the exact value
        # is identically zero on this profile and sinh(phi) -> 0), so the
        # sign check is restricted to the resolvable window
        stw = conformal_state(triple, r[st.u >= 0.05])
        betas = [(n - 2.0) / (n - 1.0) + 1e-12, 1.0, 2.0]
        worst = 0.0
        for beta in betas:
            div = divY_integrand(stw, beta)
            worst = min(worst, float(div.min()))
        verdicts.append(
            (
                "divY_integrand_nonnegative",
                bool(worst >= -1e-9),
                f"min value {worst:.3g}",
            )
        )
    cyl = cylinder_limit_check(triple)
    verdicts.append(
        (
            "cylinder_grad_limit",
            cyl.grad2_ok,
            f"rel dev {cyl.grad2_rel_dev:.3g}",
        )
    )
    verdicts.append(
        ("cylinder_area_limit", cyl.area_ok, f"rel dev {cyl.area_rel_dev:.3g}")
    )
    out = _out_dir(cfg)
    order = np.argsort(r)
    _write_csv(
        out / "conformal_check.csv",
        ["r", "u", "grad_phi", "star_residual", "kato_margin"],
        zip(r[order], st.u[order], st.grad_phi_norm[order],
            star_resid[order], kato[order]),
    )
    _write_summary(
        out / "conformal_check_summary.txt",
        cfg,
        [
            f"profile: {triple.profile.label}",
            f"samples: {n_samples}  seed: {seed}",
            f"substatic: {sub.is_substatic}",
            f"hess2_tail_observed: {_fmt(cyl.hess2_tail)}",
            f"hess2_alt_candidate: {_fmt(cyl.hess2_alt_candidate)}",
            f"hess2_decay_exponent: {_fmt(cyl.hess2_decay_exponent)}",
            f"d2u_coeff_fitted: {_fmt(cyl.d2u_coeff_fitted)}",
            f"d2u_coeff_match: {cyl.d2u_coeff_match}",
        ],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


def _cmd_identity(cfg) -> int:
    triple = _build_triple(cfg)
    ide = cfg.get("identity", {})
    n = triple.n
    betas = _beta_list(cfg, "identity", (1.0, 2.0))
    kind = ide.get("kind", "divY")
    s_low = float(ide.get("s_low", "0.5"))
    s_high = float(ide.get("s_high", "2.5"))
    n_panels = int(ide.get("n_panels", "16"))
    tol = float(ide.get("tol", "1e-5"))
    rows = []
    verdicts = []
    for beta in betas:
        if kind == "divY" and beta <= (n - 2.0) / (n - 1.0):
            continue
        res = integral_identity_residual(
            triple, beta, s_low, s_high, kind=kind, n_panels=n_panels
        )
        res2 = integral_identity_residual(
            triple, beta, s_low, s_high, kind=kind, n_panels=2 * n_panels
        )
        rows.append(
            (res.s_low, res.s_high, res.lhs_boundary, res.rhs_volume,
             res.residual, res.relative_residual)
        )
        scale = max(abs(res.lhs_boundary), abs(res.rhs_volume))
        if scale > 1e-9:
            ok = res.relative_residual < tol and (
                res2.relative_residual <= max(res.relative_residual / 2.0, 1e-12)
            )
            detail = (
                f"rel {res.relative_residual:.3g} -> {res2.relative_residual:.3g} "
                f"under refinement"
            )
        else:
            ok = abs(res.residual) < 1e-9
            detail = f"abs residual {res.residual:.3g} (degenerate lhs=rhs=0)"
        verdicts.append((f"identity_{kind}_beta_{beta:g}", bool(ok), detail))
    out = _out_dir(cfg)
    _write_csv(
        out / f"identity_{kind}.csv",
        ["s_low", "s_high", "lhs", "rhs", "residual", "relative_residual"],
        rows,
    )
    _write_summary(
        out / f"identity_{kind}_summary.txt",
        cfg,
        [f"profile: {triple.profile.label}", f"kind: {kind}",
         f"betas: {betas}", f"n_panels: {n_panels}"],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


def _parse_field_spec(cfg):
    fd = cfg.get("field3d", {})
    centers_raw = fd.get("centers", "0 0 0")
    centers = [
        [float(t) for t in chunk.split()]
        for chunk in centers_raw.split(";")
        if chunk.strip()
    ]
    masses = [float(t) for t in fd.get("masses", "1.0").replace(",", " ").split()]
    exc = fd.get("excision_radii", "").replace(",", " ").split()
    radii = [float(t) for t in exc] if exc else None
    return f3.ConformalFactorSpec(centers, masses, radii)


def _cmd_field3d(cfg) -> int:
    spec = _parse_field_spec(cfg)
    fd = cfg.get("field3d", {})
    nx = int(fd.get("nx", "81"))
    L = float(fd["extent"]) if fd.get("extent") else None
    tol = float(fd.get("tol", "1e-8"))
    beta = _beta_list(cfg, "field3d", (1.0,))[0]
    levels = [
        float(t) for t in fd.get("levels", "0.3 0.5 0.7").replace(",", " ").split()
    ]
    field = f3.solve_field(spec, L=L, nx=nx, tol=tol)
    scan = f3.monotonicity_scan(field, beta, levels)
    crit = f3.find_critical_points(field)
    pen = f3.penrose_check_field(field)
    single = spec.centers.shape[0] == 1
    verdicts = []
    if single:
        kept = scan.F_surface[~scan.skipped & np.isfinite(scan.F_surface)]
        spread = float(kept.max() / kept.min() - 1.0) if kept.size >= 2 else 0.0
        verdicts.append(
            (
                "rigidity_constancy_3pct",
                bool(spread <= 0.03),
                f"spread {spread:.3g} across levels",
            )
        )
        verdicts.append(
            (
                "penrose_margin_small",
                bool(abs(pen.margin) <= 0.05 * max(1.0, pen.capacity)),
                f"margin {pen.margin:.3g}",
            )
        )
    else:
        verdicts.append(
            (
                "informational_scan",
                True,
                f"nonincreasing={scan.nonincreasing_within_tol}, "
                f"{len(crit)} critical point(s)",
            )
        )
    out = _out_dir(cfg)
    rows = [
        (
            beta,
            t_to_tau(scan.levels[i]),
            scan.levels[i],
            scan.F_surface[i],
            scan.F_coarea[i],
            scan.n_components[i],
            "skipped" if scan.skipped[i] else "ok",
        )
        for i in range(scan.levels.size)
    ]
    _write_csv(
        out / "field3d_scan.csv",
        ["beta", "tau", "t", "F_surface", "F_coarea", "components", "flags"],
        rows,
    )
    field.save(out / "field3d_snapshot.bin")
    crit_lines = [
        f"critical_point: x=({cp.position[0]:.6g},{cp.position[1]:.6g},"
        f"{cp.position[2]:.6g}) u={cp.u_value:.6g} |Du|={cp.grad_norm_g0:.3g}"
        for cp in crit
    ]
    _write_summary(
        out / "field3d_summary.txt",
        cfg,
        [
            f"spec: {spec!r}",
            f"nx: {nx}  L: {field.meta['L']}",
            f"capacity: {_fmt(field.capacity)}",
            f"capacity_samples: {' '.join(_fmt(c) for c in field.capacity_samples)}",
            f"residual_norm: {_fmt(field.residual_norm)}",
            f"penrose_margin: {_fmt(pen.margin)}",
            *crit_lines,
        ],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


def _cmd_adm(cfg) -> int:
    spec = _parse_field_spec(cfg)
    adm_cfg = cfg.get("adm", {})
    radii_raw = adm_cfg.get("radii", "").replace(",", " ").split()
    radii = [float(t) for t in radii_raw] if radii_raw else None
    ests = f3.adm_mass(spec, radii)
    extrap = f3.extrapolate_mass(ests)
    two = sorted(ests, key=lambda e: e.radius)[-2:]
    mutual = all(
        abs(e.m_flux - e.m_ricci) <= 2.0 * e.error_estimate for e in two
    )
    verdicts = [
        (
            "flux_ricci_agree_within_error_bars",
            bool(mutual),
            f"at r = {two[0].radius:g}, {two[1].radius:g}",
        ),
        (
            "extrapolation_near_total_mass",
            bool(
                abs(extrap.mass - spec.total_mass)
                <= 0.02 * max(1.0, spec.total_mass)
            ),
            f"extrapolated {extrap.mass!r} vs sum of masses {spec.total_mass!r}",
        ),
    ]
    out = _out_dir(cfg)
    _write_csv(
        out / "adm.csv",
        ["radius", "m_flux", "m_ricci", "error_estimate"],
        [(e.radius, e.m_flux, e.m_ricci, e.error_estimate) for e in ests],
    )
    _write_summary(
        out / "adm_summary.txt",
        cfg,
        [
            f"spec: {spec!r}",
            f"extrapolated_mass: {_fmt(extrap.mass)}",
            f"fit_residual: {_fmt(extrap.fit_residual)}",
        ],
        verdicts,
    )
    return 0 if all(v[1] for v in verdicts) else 2


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def _hr():
    print("-" * 72)


def _selftest_checks():
    """Yield (name, callable) pairs; each callable returns (ok, detail)."""
    sqrt = math.sqrt

    def mk_triples():
        fixtures = {}
        fixtures["schw3"] = solve_radial_potential(schwarzschild_profile(3, 1.0), 3)
        fixtures["rn3"] = solve_radial_potential(
            reissner_nordstrom_profile(3, 1.0, 0.3), 3
        )
        fixtures["flat"] = solve_radial_potential(flat_profile(1.0), 3)
        return fixtures

    fixtures = mk_triples()
    schw, rn, flat = fixtures["schw3"], fixtures["rn3"], fixtures["flat"]

    # -- geometry ---------------------------------------------------------
    def g_schw_rigidity():
        worst = 0.0
        for n in (3, 4, 5):
            tri = solve_radial_potential(schwarzschild_profile(n, 1.0), n)
            rep = substatic_check(tri)
            worst = max(
                worst,
                float(np.abs(rep.eigen_radial).max()),
                float(np.abs(rep.eigen_tangential).max()),
            )
            if not rep.is_substatic:
                return False, f"substatic_check failed at n={n}"
        return worst < 1e-8, f"max |S| component {worst:.3g} (rigidity zero)"

    def g_rn_substatic():
        # empirical regression: the RN harmonic triple is NOT sub-static
        # (radial eigenvalue dips negative); baseline from the default grid
        rep = substatic_check(rn)
        base = -4.709389897901e-04
        ok = (not rep.is_substatic) and abs(rep.min_eigenvalue / base - 1.0) < 1e-6
        return ok, (
            f"min eigenvalue {rep.min_eigenvalue:.6e} at r = {rep.argmin_radius:.4g} "
            f"(baseline {base:.6e})"
        )

    def g_trace_identities():
        r = np.geomspace(1.01, 50.0, 64) * rn.r0
        cp = curvature_at(rn.profile, 3, r)
        scal = np.abs(cp.ricci_radial + 2.0 * cp.ricci_tangential - cp.scalar)
        harm = np.abs(cp.hessian_radial + 2.0 * cp.hessian_tangential)
        scale = np.abs(cp.scalar).max() + np.abs(cp.hessian_radial).max()
        worst = max(scal.max(), harm.max()) / scale
        return worst < 1e-12, f"worst trace residual {worst:.3g} (relative)"

    def g_flat_curvature():
        cp = curvature_at(flat.profile, 3, np.array([1.5, 4.0]))
        worst = max(
            abs(cp.ricci_radial).max(),
            abs(cp.ricci_tangential).max(),
            abs(cp.scalar).max(),
        )
        return worst == 0.0, f"flat profile curvature {worst:.3g}"

    def g_degenerate_raises():
        try:
            reissner_nordstrom_profile(3, 1.0, 1.0)
        except ProfileError:
            return True, "extremal |q| = m rejected"
        return False, "extremal profile accepted"

    # -- radial -----------------------------------------------------------
    def r_schw_oracle():
        t0 = time.perf_counter()
        triple = solve_radial_potential(schwarzschild_profile(3, 1.0), 3)
        rs = np.geomspace(triple.r0, 1e3, 2000)
        err = np.abs(triple.u(rs) - np.sqrt(1.0 - 2.0 / rs)).max()
        dt = time.perf_counter() - t0
        return err < 1e-8 and dt < 1.0, f"max err {err:.3g}, {dt:.2f} s"

    def r_capacity_mass():
        worst = 0.0
        spread = 0.0
        for n in (3, 4, 5):
            tri = solve_radial_potential(schwarzschild_profile(n, 1.0), n)
            cap = capacity(tri)
            worst = max(worst, abs(cap.agreed_value - 1.0))
            spread = max(spread, cap.max_rel_spread)
        return (
            worst < 1e-6 and spread < 1e-4,
            f"max |C - m| = {worst:.3g}, spread {spread:.3g}",
        )

    def r_asymptotics():
        ok = True
        for tri in (schw, rn):
            rep = asymptotic_expansion_check(tri)
            ok = ok and rep.decays
        return ok, "residuals decay toward infinity"

    def r_roundtrip():
        # stay above v(r_max) = C/r_max ~ 5e-6 for the default table reach
        v = np.geomspace(2e-5, 1.0, 40)
        rr = schw.radius_at_v(v)
        u2, v2 = schw._quad.u_and_v(rr)
        worst = np.abs(v2 / v - 1.0).max()
        return worst < 1e-9, f"v -> r -> v worst rel {worst:.3g}"

    def r_monotone_bounds():
        rs = np.geomspace(schw.r0, schw.r_max, 500)
        u = schw.u(rs)
        ok = bool(np.all(np.diff(u) > 0) and u[0] == 0.0 and u[-1] < 1.0)
        return ok, "u strictly increasing in [0, 1)"

    # -- monotone ---------------------------------------------------------
    def m_constancy():
        taus = np.concatenate([[1.0], 1.0 + np.geomspace(1e-3, 999.0, 60)])
        worst = 0.0
        for beta in (0.5, 1.0, 2.0, 3.0):
            F = F_beta(schw, beta, taus)
            cf = 4.0 * math.pi  # (n-2)^{beta+1} m^{1-beta} |S^2| at n=3, m=1
            worst = max(worst, float(np.abs(F / cf - 1.0).max()))
        return worst < 1e-6, f"max rel dev from 4*pi {worst:.3g}"

    def m_fd_agreement():
        from .monotone import F_beta_prime_analytic, F_beta_second_analytic

        worst1 = worst2 = 0.0
        taus = 1.0 + np.geomspace(1e-2, 500.0, 40)
        for tri in (schw, rn):
            for beta in (0.5, 1.0, 2.0):
                F = F_beta(tri, beta, taus)
                h = np.minimum(1e-4, 0.4 * (taus - 1.0))
                fd1 = (
                    F_beta(tri, beta, taus + h) - F_beta(tri, beta, taus - h)
                ) / (2 * h)
                d1 = F_beta_prime_analytic(tri, beta, taus)
                tol1 = np.maximum(1e-6, 1e-4 * np.abs(F))
                worst1 = max(worst1, float((np.abs(d1 - fd1) / tol1).max()))
                hh = np.minimum(1e-3, 0.4 * (taus - 1.0))
                fd2 = (
                    F_beta(tri, beta, taus + hh)
                    - 2 * F
                    + F_beta(tri, beta, taus - hh)
                ) / hh**2
                d2 = F_beta_second_analytic(tri, beta, taus)
                tol2 = np.maximum(1e-5, 1e-3 * np.abs(F))
                worst2 = max(worst2, float((np.abs(d2 - fd2) / tol2).max()))
        return (
            worst1 < 1.0 and worst2 < 1.0,
            f"F' worst tol-ratio {worst1:.3g}, F'' {worst2:.3g}",
        )

    def m_verdicts():
        # theorem-backed on the sub-static fixture (Schwarzschild), closed-form
        # monotone on flat; RN is not sub-static and its recorded verdict is
        # "not monotone" (empirical regression)
        ok = True
        detail = []
        for name, tri, expect in (
            ("schw", schw, True),
            ("flat", flat, True),
            ("rn", rn, False),
        ):
            for beta in (0.5, 1.0, 2.0):
                cur = monotone_curve(tri, beta)
                got = cur.nonincreasing and cur.convex
                if bool(got) != expect:
                    ok = False
                    detail.append(f"{name} beta={beta}: {got} (expected {expect})")
        return ok, "verdicts match baselines" if ok else "; ".join(detail)

    def m_flat_closed_form():
        ts = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
        worst = 0.0
        for beta in (0.5, 1.0, 2.0):
            F = F_beta(flat, beta, t_to_tau(ts))
            cf = 4.0 * math.pi * (2.0 / (1.0 + ts)) ** (2.0 * beta)
            worst = max(worst, float(np.abs(F / cf - 1.0).max()))
        return worst < 1e-10, f"max rel dev {worst:.3g}"

    def m_limits():
        ok = True
        for tri in (schw, rn, flat):
            rep = limit_F(tri, 1.5)
            ok = ok and rep.within_one_percent
        return ok, "F(probe) within 1% of closed-form limit"

    def m_penrose():
        # margin = capacity - (1/2)(area/|S^{n-1}|)^{(n-2)/(n-1)}: equality on
        # Schwarzschild, +1/2 on flat; RN violates (not sub-static), recorded
        # against its empirical baseline
        p1 = penrose_check(schw)
        p2 = penrose_check(flat)
        p3 = penrose_check(rn)
        rn_base = -7.725662918442566e-03
        ok = (
            abs(p1.margin) <= 1e-8
            and abs(p2.margin - 0.5) <= 1e-6
            and abs(p3.margin / rn_base - 1.0) <= 1e-6
        )
        return ok, (
            f"schw {p1.margin:.2e}, flat {p2.margin - 0.5:+.2e} vs 0.5, "
            f"rn {p3.margin:.6g} (baseline {rn_base:.6g})"
        )

    def m_maps():
        tau = 1.0 + np.geomspace(1e-8, 1e3, 50)
        r1 = np.abs(t_to_tau(tau_to_t(tau)) / tau - 1.0).max()
        r2 = np.abs(s_to_tau(tau_to_s(tau)) / tau - 1.0).max()
        worst = max(float(r1), float(r2))
        return worst < 1e-12, f"roundtrip worst {worst:.3g}"

    # -- conformal --------------------------------------------------------
    def c_star_kato():
        worst_star = 0.0
        worst_kato = 0.0
        for tri in (schw, rn, flat):
            r = tri.r0 * np.exp(
                np.linspace(math.log(1 + 1e-10), math.log(1e4), 10000)
            )
            st = conformal_state(tri, r)
            q = 2.0
            star = 2.0 * st.du_norm * st.one_minus_u2 ** (-q)
            worst_star = max(
                worst_star, float(np.abs(st.grad_phi_norm / star - 1.0).max())
            )
            kato = kato_check(st)
            scale = np.maximum(st.hess_phi_norm2, 1.0)
            worst_kato = min(worst_kato, float((kato / scale).min()))
        return (
            worst_star <= 1e-10 and worst_kato >= -1e-10,
            f"star {worst_star:.3g}, kato min {worst_kato:.3g}",
        )

    def c_schw_cylinder():
        r = schw.r0 * np.exp(np.linspace(math.log(1 + 1e-8), math.log(1e4), 10000))
        st = conformal_state(schw, r)
        dev = np.abs(st.grad_phi_norm - 0.5).max()
        h2 = np.abs(st.hess_phi_norm2).max()
        return (
            dev <= 1e-8 and h2 < 1e-9,
            f"|grad phi - 1/2| max {dev:.3g}, |hess|^2 max {h2:.3g}",
        )

    def c_divY_nonneg():
        # on the sub-static fixture (Schwarzschild) every bracket term
        # vanishes by rigidity, so the sweep tests cancellation noise;
        # below u ~ 0.05 the integrand is a 0/0 of roundoff (sinh phi -> 0)
        r_in = float(schw.radius_at_v(1.0 - 0.05)[0])
        r = np.geomspace(r_in, schw.r0 * 1e3, 4000)
        st = conformal_state(schw, r)
        worst = 0.0
        for beta in (0.5 + 1e-9, 1.0, 2.0):
            div = divY_integrand(st, beta)
            worst = min(worst, float(div.min()))
        return worst >= -1e-9, f"min divY integrand {worst:.3g} (rigidity zero)"

    def c_identities():
        ok = True
        detail = []
        for kind in ("divY", "divX"):
            res = integral_identity_residual(rn, 1.5, 0.5, 2.5, kind=kind)
            res2 = integral_identity_residual(
                rn, 1.5, 0.5, 2.5, kind=kind, n_panels=32
            )
            good = res.relative_residual < 1e-5 and res2.relative_residual <= max(
                res.relative_residual / 2.0, 1e-12
            )
            ok = ok and good
            detail.append(f"{kind} {res.relative_residual:.2g}")
        # Schwarzschild: every divY integrand vanishes (abs ~ 0); the divX
        # identity is non-trivial there, so only its relative residual is small
        sy = integral_identity_residual(schw, 1.5, 0.5, 2.5, kind="divY")
        sx = integral_identity_residual(schw, 1.5, 0.5, 2.5, kind="divX")
        ok = ok and abs(sy.residual) < 1e-9 and sx.relative_residual < 1e-8
        return ok, ", ".join(detail) + " (halve under refinement; schw ~ exact)"

    def c_phi_prime():
        s = np.linspace(0.3, 3.0, 12)
        worst = 0.0
        for beta in (1.0, 2.0):
            rep = Phi_beta_prime(rn, beta, s)
            h = 1e-5
            fd = (Phi_beta(rn, beta, s + h) - Phi_beta(rn, beta, s - h)) / (2 * h)
            tol = np.maximum(1e-6, 1e-3 * np.abs(Phi_beta(rn, beta, s)))
            worst = max(worst, float((np.abs(rep - fd) / tol).max()))
        return worst < 1.0, f"worst tol-ratio {worst:.3g}"

    def c_eq52_quotient():
        # sub-static fixture: Schwarzschild, where the quotient is the zero
        # function (rigidity); checked against absolute noise floor
        s = np.linspace(0.2, 4.0, 25)
        ok = True
        worst = 0.0
        for beta in (1.0, 2.0):
            quot = Phi_beta_prime(schw, beta, s) / np.sinh(s)
            ok = ok and bool(np.all(np.diff(quot) >= -1e-8))
            worst = max(worst, float(np.abs(quot).max()))
        return ok, f"Phi'/sinh nondecreasing; |quotient| <= {worst:.3g}"

    def c_cylinder_limits():
        rep = cylinder_limit_check(schw)
        rep2 = cylinder_limit_check(rn)
        ok = rep.grad2_ok and rep.area_ok and rep2.grad2_ok and rep2.area_ok
        return ok, (
            f"grad2 dev {rep.grad2_rel_dev:.2g}/{rep2.grad2_rel_dev:.2g}, "
            f"area dev {rep.area_rel_dev:.2g}/{rep2.area_rel_dev:.2g}"
        )

    def c_psi_boundary():
        try:
            Psi_beta(schw, 1.0, 0.0)
        except DomainError:
            return True, "Psi at s=0 rejected (boundary point)"
        return False, "Psi at s=0 accepted"

    # -- field3d (single-center) -------------------------------------------
    state = {}

    def f_solve():
        spec = f3.ConformalFactorSpec([[0.0, 0.0, 0.0]], [1.0])
        field = f3.solve_field(spec, L=2.0, nx=61, tol=1e-9)
        state["field"] = field
        err = abs(field.capacity - 1.0)
        return err < 0.05, f"capacity {field.capacity:.4f} vs 1 (61^3, h=1/15)"

    def f_residual_monotone():
        field = state["field"]
        ok = all(
            bool(np.all(np.diff(h) <= h[:-1] * 1e-8 + 1e-300))
            for h in field.residual_history
            if h.size >= 2
        )
        return ok, "MINRES residual history nonincreasing"

    def f_flux_conservation():
        # exact by the discrete divergence theorem up to the algebraic
        # residual; orders below the ~1e-2 discretization error either way
        field = state["field"]
        spread = float(
            field.capacity_samples.max() - field.capacity_samples.min()
        )
        return spread < 1e-5, f"3-box flux spread {spread:.3g} (solver-limited)"

    def f_level_mesh():
        field = state["field"]
        surf = f3.extract_level(field, 0.5)
        # isotropic oracle: u = (1 - m/2rho)/(1 + m/2rho) = t at rho = (m/2)(1+t)/(1-t)
        rho = 0.5 * 1.5 / 0.5
        area_oracle = 4.0 * math.pi * rho**2 * (1.0 + 0.5 / rho) ** 4
        ok = (
            surf.closed
            and surf.n_components == 1
            and surf.euler_characteristics == (2,)
            and abs(surf.area_g0 / area_oracle - 1.0) < 0.05
        )
        return ok, (
            f"closed={surf.closed} chi={surf.euler_characteristics} "
            f"area dev {surf.area_g0 / area_oracle - 1.0:+.3%}"
        )

    def f_constancy():
        # levels whose spheres fit the L=2 box: rho(t) = (1+t)/(2(1-t)) < 1.8
        field = state["field"]
        scan = f3.monotonicity_scan(field, 1.0, [0.25, 0.4, 0.55])
        kept = scan.F_surface[np.isfinite(scan.F_surface)]
        spread = float(kept.max() / kept.min() - 1.0)
        dev4pi = float(np.abs(kept / (4 * math.pi) - 1.0).max())
        return (
            kept.size == 3 and spread < 0.05 and dev4pi < 0.05,
            f"spread {spread:.3g}, dev from 4*pi {dev4pi:.3g}",
        )

    def f_estimator_agreement():
        field = state["field"]
        Fs = f3.surface_integral_F(field, 0.5, 1.0)
        Fc = f3.coarea_integral_F(field, 0.5, 1.0)
        dev = abs(Fs / Fc - 1.0)
        return dev < 0.05, f"mesh vs coarea dev {dev:.3g}"

    def f_adm():
        spec = state["field"].spec
        ests = f3.adm_mass(spec)
        extrap = f3.extrapolate_mass(ests)
        ricci_dev = max(abs(e.m_ricci - 1.0) for e in ests)
        two = ests[-2:]
        mutual = all(
            abs(e.m_flux - e.m_ricci) <= 2.0 * e.error_estimate for e in two
        )
        ok = abs(extrap.mass - 1.0) < 0.02 and ricci_dev < 1e-10 and mutual
        return ok, (
            f"extrapolated {extrap.mass:.6f}, m_ricci exact to {ricci_dev:.2g}"
        )

    def f_penrose():
        field = state["field"]
        rep = f3.penrose_check_field(field)
        return abs(rep.margin) < 0.05, f"margin {rep.margin:.3g} (grid accuracy)"

    def f_bounds_maxprinciple():
        field = state["field"]
        act = field.mask == f3.MASK_ACTIVE
        u = field.values
        ok = bool(np.all(u[act] >= -1e-9) and np.all(u[act] < 1.0))
        mid = u.shape[1] // 2
        ray = u[mid:, mid, mid]
        ok = ok and bool(np.all(np.diff(ray) > -1e-12))
        return ok, "0 <= u < 1 and radially nondecreasing from the excision"

    def f_no_false_critical():
        field = state["field"]
        crit = f3.find_critical_points(field)
        return len(crit) == 0, f"{len(crit)} critical points on radial data"

    def f_save_load(tmpdir="/tmp"):
        import os
        import tempfile

        field = state["field"]
        with tempfile.TemporaryDirectory() as td:
            p = os.path.join(td, "snap.bin")
            field.save(p)
            back = f3.ScalarField3D.load(p)
            same = np.array_equal(back.values, field.values)
            cap = back.capacity == field.capacity
        return bool(same and cap), "snapshot roundtrip bit-exact"

    def f_flat_ball():
        # the closure is exact for w = 1, so a thin shell at high a/h is
        # legitimate; a/h = 64 puts the staircase error inside 1%
        spec = f3.ConformalFactorSpec([[0.0, 0.0, 0.0]], [0.0], [1.0])
        field = f3.solve_field(spec, L=1.25, nx=129, tol=1e-9)
        err = abs(field.capacity - 1.0)
        return err < 0.01, f"w=1 unit ball capacity {field.capacity:.6f}"

    checks = [
        ("geometry: Schwarzschild rigidity S = 0 (n=3,4,5)", g_schw_rigidity),
        ("geometry: RN q=0.3 substatic eigenvalue baseline", g_rn_substatic),
        ("geometry: trace identities (scalar, harmonic)", g_trace_identities),
        ("geometry: flat profile is flat", g_flat_curvature),
        ("geometry: degenerate horizon rejected", g_degenerate_raises),
        ("radial: Schwarzschild closed-form oracle (<1e-8, <1s)", r_schw_oracle),
        ("radial: capacity = m three ways (n=3,4,5)", r_capacity_mass),
        ("radial: asymptotic expansion decays", r_asymptotics),
        ("radial: level inversion roundtrip", r_roundtrip),
        ("radial: u monotone in [0,1)", r_monotone_bounds),
        ("monotone: F_beta constant 4*pi on Schwarzschild", m_constancy),
        ("monotone: F', F'' match finite differences", m_fd_agreement),
        ("monotone: nonincreasing + convex verdicts", m_verdicts),
        ("monotone: flat-exterior closed form", m_flat_closed_form),
        ("monotone: cylinder-end limit of F", m_limits),
        ("monotone: Penrose margins (0, 0.5, >=0)", m_penrose),
        ("monotone: parameter maps roundtrip", m_maps),
        ("conformal: (*) identity and Kato margin", c_star_kato),
        ("conformal: Schwarzschild cylinder (|grad phi|=1/2)", c_schw_cylinder),
        ("conformal: divY integrand nonnegative (sub-static)", c_divY_nonneg),
        ("conformal: divergence identities + refinement", c_identities),
        ("conformal: Phi' = -beta sinh(s) Psi vs fd", c_phi_prime),
        ("conformal: monotone quotient Phi'/sinh", c_eq52_quotient),
        ("conformal: cylinder limits (grad^2, area)", c_cylinder_limits),
        ("conformal: Psi boundary-point error", c_psi_boundary),
        ("field3d: single-center solve + capacity", f_solve),
        ("field3d: solver residual monotone", f_residual_monotone),
        ("field3d: discrete flux conservation", f_flux_conservation),
        ("field3d: level mesh closed, chi = 2, area", f_level_mesh),
        ("field3d: F constancy across levels", f_constancy),
        ("field3d: mesh vs coarea estimators", f_estimator_agreement),
        ("field3d: ADM flux + Ricci estimators", f_adm),
        ("field3d: Penrose margin at grid accuracy", f_penrose),
        ("field3d: bounds and maximum principle", f_bounds_maxprinciple),
        ("field3d: no spurious critical points", f_no_false_critical),
        ("field3d: snapshot save/load", f_save_load),
        ("field3d: w = 1 unit-ball capacity", f_flat_ball),
    ]
    return checks


def _cmd_selftest(cfg) -> int:
    t_start = time.perf_counter()
    _hr()
    print("substatic selftest")
    _hr()
    failures = 0
    for name, fn in _selftest_checks():
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a check crashing is a failure, not exit 3
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name:<52s} {dt:6.2f}s  {detail}")
    _hr()
    total = time.perf_counter() - t_start
    print(f"{'OK' if failures == 0 else 'FAILED'}: {failures} failure(s), {total:.1f} s total")
    return 0 if failures == 0 else 2


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _make_parser():
    p = argparse.ArgumentParser(
        prog="substatic",
        description="Numerical laboratory for sub-static harmonic triples.",
    )
    p.add_argument("subcommand", choices=[
        "schwarzschild", "radial", "monotone", "penrose", "conformal-check",
        "identity", "field3d", "adm", "selftest",
    ])
    p.add_argument("--config", help="INI config file (key = value sections)")
    p.add_argument("--out", help="output directory for CSV/summary files")
    p.add_argument("--beta", help="comma-separated beta values")
    p.add_argument("--n", type=int, help="dimension (>= 3)")
    p.add_argument("--m", type=float, help="mass parameter")
    p.add_argument("--q", type=float,
                   help="charge parameter (nonzero selects the RN profile)")
    p.add_argument("--tol", type=float, help="solver tolerance")
    p.add_argument("--grid", type=int, help="grid size (nx or curve points)")
    p.add_argument("--seed", type=int, help="RNG seed for sampled checks")
    return p


_DISPATCH = {
    "schwarzschild": _cmd_schwarzschild,
    "radial": _cmd_radial,
    "monotone": _cmd_monotone,
    "penrose": _cmd_penrose,
    "conformal-check": _cmd_conformal_check,
    "identity": _cmd_identity,
    "field3d": _cmd_field3d,
    "adm": _cmd_adm,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 3
    try:
        cfg = _effective_config(args)
        return _DISPATCH[args.subcommand](cfg)
    except (ConfigError, ProfileError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
