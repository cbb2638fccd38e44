"""Command-line surface: runs the toolkit's experiments and writes artifacts.

Every subcommand echoes its full configuration (and the --seed) into the
artifacts it writes, so identical invocations produce byte-identical output.
Figures are rendered alongside the delimited output unless --no-figures.

Exit codes: 0 success, 1 solver failure, 2 usage error.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import conjugate as conjugate_mod
from . import contrast as contrast_mod
from . import geometry, model, report, synthesis
from . import extremal_flow as flow
from .model import DEFAULT_BOUND, DEFAULT_OMEGA_MAX, TWO_PI


class CliError(RuntimeError):
    pass


def _add_species_args(p, prefix="", required=False):
    g = p.add_argument_group(f"spin{prefix or '1'} parameters")
    g.add_argument(f"--preset{prefix}", help="named species preset")
    g.add_argument(f"--t1-ms{prefix}", type=float, help="longitudinal time, ms")
    g.add_argument(f"--t2-ms{prefix}", type=float, help="transverse time, ms")


def _species(args, prefix="", omega_max=None, cfg_entry=None):
    omega = omega_max or DEFAULT_OMEGA_MAX
    preset = getattr(args, f"preset{prefix}".replace("-", "_"), None)
    t1 = getattr(args, f"t1_ms{prefix}".replace("-", "_"), None)
    t2 = getattr(args, f"t2_ms{prefix}".replace("-", "_"), None)
    if preset:
        return model.RelaxationParams.preset(preset, omega)
    if t1 is not None and t2 is not None:
        return model.RelaxationParams.from_ms(t1, t2, omega)
    if cfg_entry is not None:
        return cfg_entry
    raise CliError(f"spin{prefix or '1'}: give --preset{prefix} or --t1-ms{prefix}/--t2-ms{prefix}")


def _pair(args, cfg):
    omega = DEFAULT_OMEGA_MAX
    cfg1 = cfg2 = None
    if cfg is not None:
        cfg1, cfg2, omega = cfg
    if args.pair:
        names = args.pair.split(",")
        if len(names) != 2:
            raise CliError("--pair wants two comma-separated preset names")
        return (model.RelaxationParams.preset(names[0].strip(), omega),
                model.RelaxationParams.preset(names[1].strip(), omega))
    if cfg1 is not None and cfg2 is not None:
        return (cfg1, cfg2)
    raise CliError("give --pair spin1,spin2 or a --config with spin1 and spin2")


def _out(args, name):
    os.makedirs(args.output_dir, exist_ok=True)
    return os.path.join(args.output_dir, name)


def _run_config(args, **extra):
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func",) and v is not None and not callable(v)}
    cfg.update(extra)
    return cfg


def _law_from_name(name, lam, m):
    if name in ("bang+", "bang"):
        return flow.bang(+1, m)
    if name == "bang-":
        return flow.bang(-1, m)
    if name == "singular":
        return flow.singular_affine()
    if name in ("reg-quadratic", "reg-power"):
        return flow.regularized(name.split("-")[1], lam, m)
    raise CliError(f"unknown control law {name!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_normalize(args, cfg):
    big, small = model.normalize_params(args.t1_ms / 1000.0, args.t2_ms / 1000.0,
                                        TWO_PI * args.omega_max_hz)
    payload = {"big_gamma": big, "gamma": small}
    print(json.dumps(payload, sort_keys=True))
    report.write_json(_out(args, "normalize.json"), payload, _run_config(args))
    return 0


def cmd_geometry_probe(args, cfg):
    params = _species(args, cfg_entry=cfg[0] if cfg else None)
    state = (args.y, args.z)
    locus = geometry.singular_locus(state, params)
    pair = geometry.determinant_pair(state, params)
    payload = {
        "state": [args.y, args.z],
        "det_f1_ad1": locus.det_value,
        "on_vertical": locus.on_vertical,
        "on_horizontal": locus.on_horizontal,
        "z0": None if not np.isfinite(locus.z0) else locus.z0,
        "d": pair.d, "d_prime": pair.d_prime, "d_second": pair.d_second,
        "rates": {"big_gamma": params.big_gamma, "gamma": params.gamma},
    }
    try:
        payload["singular_control"] = geometry.singular_control_2d(state, params)
    except geometry.GeometryError as exc:
        payload["singular_control"] = None
        payload["singular_control_note"] = str(exc)
    try:
        payload["classification"] = geometry.classify_singular_line(state, params)
    except geometry.GeometryError:
        payload["classification"] = None
    try:
        payload["clock_form_sign"] = geometry.clock_form_sign(state, params)
    except geometry.GeometryError:
        payload["clock_form_sign"] = None
    try:
        payload["saturation_y"] = geometry.saturation_point(params, args.m)
    except geometry.GeometryError:
        payload["saturation_y"] = None
    print(json.dumps(payload, sort_keys=True, default=report._jsonable))
    report.write_json(_out(args, "geometry_probe.json"), payload, _run_config(args))
    return 0


def _arc_rows(arc, n_spins):
    rows = []
    for i in range(len(arc.t)):
        row = [arc.t[i]]
        row += list(arc.x[i])
        row += list(arc.p[i])
        row.append(arc.u[i])
        rows.append(row)
    if n_spins == 1:
        cols = ["t", "y1", "z1", "p_y1", "p_z1", "u"]
    else:
        cols = ["t", "y1", "z1", "y2", "z2", "p_y1", "p_z1", "p_y2", "p_z2", "u"]
    return cols, rows


def cmd_flow(args, cfg):
    state = [float(v) for v in args.state.split(",")]
    if len(state) == 2:
        params = _species(args, cfg_entry=cfg[0] if cfg else None)
        n_spins = 1
    elif len(state) == 4:
        params = _pair(args, cfg)
        n_spins = 2
    else:
        raise CliError("--state wants y,z or y1,z1,y2,z2")
    costate = [float(v) for v in args.costate.split(",")] if args.costate \
        else [0.0] * len(state)
    if len(costate) != len(state):
        raise CliError("--costate must match --state in length")
    law = _law_from_name(args.law, args.lam, args.m)
    arc = flow.integrate_arc((state, costate), law, args.duration, params,
                             dense_min_dt=abs(args.duration) / 2000.0)
    run_cfg = _run_config(args)
    cols, rows = _arc_rows(arc, n_spins)
    report.write_csv(_out(args, "flow.csv"), cols, rows, run_cfg)
    report.write_json(_out(args, "flow_events.json"), {
        "termination": arc.termination,
        "duration": arc.duration,
        "hamiltonian_drift": arc.hamiltonian_drift(),
        "events": [{"name": e.name, "kind": e.kind, "time": e.time,
                    "state": e.w.tolist()} for e in arc.events],
    }, run_cfg)
    if not args.no_figures:
        curves = [("spin 1", arc.x[:, 0], arc.x[:, 1])]
        if n_spins == 2:
            curves.append(("spin 2", arc.x[:, 2], arc.x[:, 3]))
        z0 = None
        p0 = params if n_spins == 1 else params[0]
        if abs(p0.delta) > 1e-12:
            z0 = p0.gamma / (2.0 * p0.delta)
        report.fig_disk(_out(args, "flow_disk.png"), curves, z0=z0)
        report.fig_series(_out(args, "flow_control.png"), arc.t, arc.u, "u")
    print(f"termination: {arc.termination} after t = {arc.duration:.6g}")
    return 0


def _singular_flow_start(pair):
    spin1 = pair[0]
    z0v, admissible = geometry.horizontal_line(spin1)
    if not admissible:
        raise CliError("first species has no admissible horizontal singular line")
    y0 = -math.sqrt(1.0 - z0v * z0v)
    return np.array([y0, z0v, y0, z0v]), z0v


def _costate_circle_basis(pair, q0):
    """Orthonormal basis of unit costates with H1 = H10 = 0 at q0."""
    rows = np.vstack([
        model.eval_field("F1", q0, pair),
        model.eval_bracket("ad1", q0, pair),
    ])
    _, s, vt = np.linalg.svd(rows)
    rank = int((s > 1e-12 * s[0]).sum())
    basis = vt[rank:].T
    if basis.shape[1] != 2:
        raise CliError("degenerate costate circle at the singular-flow start")
    return basis


def run_singular_rays(pair, n_rays, duration, saturation_radius=0.05,
                      rtol=flow.RTOL, atol=flow.ATOL):
    """Integrate the two-spin singular flow for angles on the costate circle.

    Rays are parameterized by angle in [0, pi) (opposite costates trace the
    same states).  Each ray stops at control explosion, at |q1| reaching the
    saturation radius, or at the duration cap.
    """
    q0, z0v = _singular_flow_start(pair)
    basis = _costate_circle_basis(pair, q0)
    law = flow.singular_affine()
    rays = []
    for k in range(n_rays):
        alpha = math.pi * k / n_rays
        p0 = basis @ np.array([math.cos(alpha), math.sin(alpha)])
        system = flow.ExtremalSystem(tuple(pair), law)
        events = [flow.radius_event(0, saturation_radius, "spin1_saturation",
                                    direction=-1, kind="target")]
        arc = flow.integrate_arc((q0, p0), law, duration, tuple(pair),
                                 events=events, rtol=rtol, atol=atol,
                                 dense_min_dt=duration / 1500.0)
        rays.append({"angle": alpha, "p0": p0, "arc": arc})
    return rays, z0v


def cmd_singular_flow(args, cfg):
    pair = _pair(args, cfg)
    rays, z0v = run_singular_rays(pair, args.rays, args.duration,
                                  args.saturation_radius)
    run_cfg = _run_config(args)
    summary = []
    fig_rays = []
    for k, ray in enumerate(rays):
        arc = ray["arc"]
        cols, rows = _arc_rows(arc, 2)
        report.write_csv(_out(args, f"singular_flow_ray{k:02d}.csv"), cols, rows,
                         run_cfg)
        exploded = arc.termination == "explosion"
        summary.append({
            "ray": k, "angle": ray["angle"], "p0": ray["p0"].tolist(),
            "termination": arc.termination, "final_time": arc.duration,
            "exploded": exploded,
            "spin1_final_radius": float(np.hypot(arc.x[-1, 0], arc.x[-1, 1])),
        })
        fig_rays.append((f"ray {k}" + ("!" if exploded else ""), arc.x))
    report.write_json(_out(args, "singular_flow.json"), {"rays": summary}, run_cfg)
    if not args.no_figures:
        report.fig_projections(_out(args, "singular_flow_projections.png"),
                               fig_rays, z0=z0v)
    n_exploded = sum(r["exploded"] for r in summary)
    print(f"{len(rays)} rays: {n_exploded} diverged, "
          f"{sum(r['termination'] == 'target' for r in summary)} reached saturation radius")
    return 0


def cmd_conjugate(args, cfg):
    pair = _pair(args, cfg)
    rays, _ = run_singular_rays(pair, args.rays, args.duration,
                                args.saturation_radius)
    run_cfg = _run_config(args)
    rows = []
    results = []
    for k, ray in enumerate(rays):
        arc = ray["arc"]
        try:
            rep = conjugate_mod.first_conjugate_time(arc, mode="singular")
            tc = rep.first_conjugate_time
            for t, ind, sig in zip(rep.times, rep.indicator, rep.sigma):
                rows.append([k, t, ind, sig])
        except conjugate_mod.ConjugateError as exc:
            tc = None
            results.append({"ray": k, "error": str(exc)})
            continue
        sat = [e.time for e in arc.events if e.name == "spin1_saturation"]
        results.append({
            "ray": k, "angle": ray["angle"], "conjugate_time": tc,
            "termination": arc.termination,
            "saturation_time": sat[0] if sat else None,
        })
    report.write_csv(_out(args, "conjugate_indicator.csv"),
                     ["ray", "t", "indicator", "sigma_min"], rows, run_cfg)
    report.write_json(_out(args, "conjugate.json"), {"rays": results}, run_cfg)
    if not args.no_figures and rows:
        arr = np.asarray([r for r in rows if r[0] == 0], dtype=float)
        if len(arr):
            report.fig_series(_out(args, "conjugate_indicator.png"),
                              arr[:, 1], arr[:, 2], "rank indicator (ray 0)")
    found = [r for r in results if r.get("conjugate_time") is not None]
    print(f"conjugate times found on {len(found)} of {len(rays)} rays")
    return 0


def cmd_synthesis(args, cfg):
    params = _species(args, cfg_entry=cfg[0] if cfg else None)
    policy = synthesis.tmin_synthesis(params, args.m)
    run_cfg = _run_config(args)
    payload = policy.to_dict()
    samples = policy.spin_samples()
    if args.compare_ir:
        ir = synthesis.inversion_recovery(params, args.m)
        payload["inversion_recovery"] = ir.to_dict()
        payload["time_gain"] = ir.total_time - policy.total_time
    report.write_json(_out(args, "synthesis_policy.json"), payload, run_cfg)
    report.write_csv(_out(args, "synthesis_trajectory.csv"),
                     ["t", "y", "z", "u", "arc"],
                     [list(r) for r in samples], run_cfg)
    if not args.no_figures:
        report.fig_disk(_out(args, "synthesis_disk.png"),
                        [("policy", samples[:, 1], samples[:, 2])], z0=policy.z0)
        report.fig_series(_out(args, "synthesis_control.png"),
                          samples[:, 0], samples[:, 3], "u")
    print(f"total time: {policy.total_time:.6f} "
          f"(target error {policy.target_error:.2e})")
    if args.compare_ir:
        print(f"inversion recovery: {payload['inversion_recovery']['total_time']:.6f}")
    return 0


def cmd_contrast_solve(args, cfg):
    pair = _pair(args, cfg)
    tmin = synthesis.tmin_time(pair[0], args.m)
    T = args.transfer_time if args.transfer_time else args.t_factor * tmin
    base = contrast_mod.ShootingProblem(pair=pair, transfer_time=T, lam=0.0,
                                        kind=args.kind, m=args.m)
    log = []
    ramp = contrast_mod.continue_path(
        contrast_mod.lambda_schedule(base, args.lam) if args.lam > 0 else [base],
        contrast_mod.decoupled_seed(base), log=log)
    sol = ramp.nodes[-1].solution if ramp.nodes else None
    run_cfg = _run_config(args, tmin=tmin, transfer_time=T)
    ok = sol is not None and abs(ramp.nodes[-1].lam - args.lam) < 1e-9 and sol.accepted
    payload = {
        "accepted": bool(ok),
        "transfer_time": T,
        "tmin": tmin,
        "lambda": args.lam,
        "kind": args.kind,
        "log": log,
    }
    if sol is not None:
        payload.update({
            "p0": sol.p0.tolist(),
            "residual": sol.residual.tolist(),
            "residual_norm": sol.residual_norm,
            "contrast": sol.contrast,
            "spin1_final_radius": float(np.hypot(*sol.terminal_w[:2])),
        })
    report.write_json(_out(args, "contrast_solution.json"), payload, run_cfg)
    if ok:
        arc = contrast_mod.solution_trajectory(sol)
        cols, rows = _arc_rows(arc, 2)
        report.write_csv(_out(args, "contrast_trajectory.csv"), cols, rows, run_cfg)
        if not args.no_figures:
            report.fig_disk(_out(args, "contrast_disk.png"),
                            [("spin 1", arc.x[:, 0], arc.x[:, 1]),
                             ("spin 2", arc.x[:, 2], arc.x[:, 3])])
            report.fig_series(_out(args, "contrast_control.png"), arc.t, arc.u, "u")
        print(f"contrast: {sol.contrast:.4f} (residual {sol.residual_norm:.2e})")
        return 0
    print("contrast solve failed", file=sys.stderr)
    return 1


def cmd_contrast_path(args, cfg):
    pair = _pair(args, cfg)
    factors = np.linspace(args.t_lo, args.t_hi, args.nodes)
    path, tmin = contrast_mod.contrast_vs_time(
        pair, factors, lam_target=args.lam, kind=args.kind, m=args.m,
        rng=args.seed)
    run_cfg = _run_config(args, tmin=tmin)
    rows = []
    for n in path.nodes:
        s = n.solution
        rows.append([n.transfer_time, n.transfer_time / tmin, s.contrast,
                     s.residual_norm, int(s.accepted)] + list(s.p0))
    report.write_csv(_out(args, "contrast_path.csv"),
                     ["T", "T_over_tmin", "contrast", "residual_norm",
                      "accepted", "p_y1", "p_z1", "p_y2", "p_z2"],
                     rows, run_cfg)
    best = path.best_contrast()
    payload = {
        "tmin": tmin,
        "nodes": len(path.nodes),
        "accepted": sum(n.solution.accepted for n in path.nodes),
        "max_contrast": best.solution.contrast if best else None,
        "argmax_T": best.transfer_time if best else None,
        "log": path.log,
    }
    report.write_json(_out(args, "contrast_path.json"), payload, run_cfg)
    if not args.no_figures:
        acc = [(n.transfer_time, n.solution.contrast)
               for n in path.nodes if n.solution.accepted]
        if acc:
            arr = np.asarray(acc)
            report.fig_contrast_vs_time(_out(args, "contrast_path.png"),
                                        arr[:, 0], arr[:, 1], tmin=tmin)
    if best is None:
        print("no node converged", file=sys.stderr)
        return 1
    print(f"max contrast {best.solution.contrast:.4f} at T = {best.transfer_time:.4f} "
          f"({best.transfer_time / tmin:.3f} T_min)")
    return 0


def cmd_contrast_sweep(args, cfg):
    spin1 = _species(args, cfg_entry=cfg[0] if cfg else None)
    polytope = tuple(float(v) for v in args.polytope.split(","))
    if len(polytope) != 4:
        raise CliError("--polytope wants x_min,x_max,y_min,y_max in ms")
    probes = []
    for probe in args.probe or []:
        vals = tuple(float(v) for v in probe.split(","))
        if len(vals) != 2:
            raise CliError("--probe wants T1_ms,T2_ms")
        probes.append(vals)
    workers = args.workers or int(os.environ.get("SPINCONTRAST_WORKERS", "1"))
    result = contrast_mod.sweep_contrast_map(
        spin1, polytope, n_rays=args.rays, samples_per_ray=args.samples,
        t_factor=args.t_factor, lam=args.lam, kind=args.kind, m=args.m,
        probes=probes, rng=args.seed, workers=workers)
    run_cfg = _run_config(args)
    rows = [[r["ray"], r["s"], r["t1_ms"], r["t2_ms"], r["contrast"],
             int(r["accepted"])] for r in result.samples]
    report.write_csv(_out(args, "sweep_samples.csv"),
                     ["ray", "s", "T1_ms", "T2_ms", "contrast", "accepted"],
                     rows, run_cfg)
    grid_rows = _sweep_grid(result)
    report.write_csv(_out(args, "sweep_grid.csv"),
                     ["T1_ms", "T2_ms", "contrast"], grid_rows, run_cfg)
    payload = {
        "spin1_ms": list(result.spin1_ms),
        "transfer_time": result.transfer_time,
        "tmin": result.tmin,
        "probes": {f"{k[0]:g},{k[1]:g}": v for k, v in result.probes.items()},
        "log": result.log,
    }
    report.write_json(_out(args, "sweep.json"), payload, run_cfg)
    if not args.no_figures:
        arr = np.asarray([[r["t1_ms"], r["t2_ms"], r["contrast"]]
                          for r in result.samples if r["accepted"]])
        report.fig_sweep(_out(args, "sweep_map.png"), arr[:, 0], arr[:, 1],
                         arr[:, 2], spin1_ms=result.spin1_ms, probes=probes)
    for probe, value in result.probes.items():
        shown = "unconverged" if value is None else f"{value:.4f}"
        print(f"contrast at ({probe[0]:g}, {probe[1]:g}) ms: {shown}")
    return 0 if all(v is not None for v in result.probes.values()) else 1


def _sweep_grid(result, resolution=41):
    """Linear interpolation of the ray samples onto a regular (T1, T2) grid."""
    from scipy.interpolate import griddata

    pts = np.asarray([[r["t1_ms"], r["t2_ms"]] for r in result.samples
                      if r["accepted"]])
    vals = np.asarray([r["contrast"] for r in result.samples if r["accepted"]])
    poly = result.polygon
    gx = np.linspace(poly[:, 0].min(), poly[:, 0].max(), resolution)
    gy = np.linspace(poly[:, 1].min(), poly[:, 1].max(), resolution)
    GX, GY = np.meshgrid(gx, gy)
    GC = griddata(pts, vals, (GX, GY), method="linear")
    rows = []
    for i in range(resolution):
        for j in range(resolution):
            c = GC[i, j]
            rows.append([GX[i, j], GY[i, j], float(c) if np.isfinite(c) else "nan"])
    return rows


def cmd_phantom(args, cfg):
    with open(args.solution) as fh:
        sol = json.load(fh)
    if args.levels:
        inner, ring = (float(v) for v in args.levels.split(","))
    else:
        inner = sol.get("spin1_final_radius", 0.0)
        ring = sol["contrast"]
    run_cfg = _run_config(args, inner=inner, ring=ring)
    img = report.render_phantom(inner, ring, resolution=args.resolution,
                                disk_radius=args.disk_radius,
                                ring_outer=args.ring_outer)
    ref = report.render_phantom(1.0, 1.0, resolution=args.resolution,
                                disk_radius=args.disk_radius,
                                ring_outer=args.ring_outer)
    report.write_pgm(_out(args, "phantom_contrast.pgm"), img, run_cfg)
    report.write_pgm(_out(args, "phantom_reference.pgm"), ref, run_cfg)
    if not args.no_figures:
        report.fig_phantom(_out(args, "phantom_contrast.png"), img)
        report.fig_phantom(_out(args, "phantom_reference.png"), ref)
    print(f"phantom levels: inner {inner:.4f}, ring {ring:.4f}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="spincontrast",
        description="Spin saturation and two-species contrast toolkit.")
    p.add_argument("--output-dir", default="out", help="artifact directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized initialization")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")
    p.add_argument("--config", help="JSON file with spin1/spin2/omega_max_hz")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("normalize", help="physical times to normalized rates")
    q.add_argument("--t1-ms", type=float, required=True)
    q.add_argument("--t2-ms", type=float, required=True)
    q.add_argument("--omega-max-hz", type=float, default=32.3)
    q.set_defaults(func=cmd_normalize)

    g = sub.add_parser("geometry", help="singular-structure diagnostics")
    gsub = g.add_subparsers(dest="geometry_command", required=True)
    q = gsub.add_parser("probe", help="evaluate loci and controls at a state")
    _add_species_args(q)
    q.add_argument("--y", type=float, required=True)
    q.add_argument("--z", type=float, required=True)
    q.add_argument("--m", type=float, default=DEFAULT_BOUND)
    q.set_defaults(func=cmd_geometry_probe)

    q = sub.add_parser("flow", help="integrate one extremal arc")
    _add_species_args(q)
    q.add_argument("--pair", help="two comma-separated presets (4D state)")
    q.add_argument("--law", default="bang+",
                   help="bang+ | bang- | singular | reg-quadratic | reg-power")
    q.add_argument("--lam", type=float, default=0.0)
    q.add_argument("--m", type=float, default=DEFAULT_BOUND)
    q.add_argument("--duration", type=float, required=True)
    q.add_argument("--state", required=True, help="y,z or y1,z1,y2,z2")
    q.add_argument("--costate", help="matching costate components")
    q.set_defaults(func=cmd_flow)

    q = sub.add_parser("singular-flow",
                       help="two-spin singular flow over the costate circle")
    q.add_argument("--pair", help="two comma-separated presets")
    q.add_argument("--rays", type=int, default=16)
    q.add_argument("--duration", type=float, default=60.0)
    q.add_argument("--saturation-radius", type=float, default=0.05)
    q.set_defaults(func=cmd_singular_flow)

    q = sub.add_parser("conjugate",
                       help="first conjugate times along singular rays")
    q.add_argument("--pair", help="two comma-separated presets")
    q.add_argument("--rays", type=int, default=8)
    q.add_argument("--duration", type=float, default=60.0)
    q.add_argument("--saturation-radius", type=float, default=0.05)
    q.set_defaults(func=cmd_conjugate)

    q = sub.add_parser("synthesis", help="time-minimal saturation policy")
    _add_species_args(q)
    q.add_argument("--m", type=float, default=DEFAULT_BOUND)
    q.add_argument("--compare-ir", action="store_true",
                   help="add the inversion-recovery baseline")
    q.set_defaults(func=cmd_synthesis)

    c = sub.add_parser("contrast", help="two-species contrast solver")
    csub = c.add_subparsers(dest="contrast_command", required=True)

    q = csub.add_parser("solve", help="solve one instance (lambda ramp inside)")
    q.add_argument("--pair", help="two comma-separated presets")
    q.add_argument("--t-factor", type=float, default=1.5)
    q.add_argument("--transfer-time", type=float)
    q.add_argument("--lam", type=float, default=0.9)
    q.add_argument("--kind", choices=("quadratic", "power"), default="quadratic")
    q.add_argument("--m", type=float, default=DEFAULT_BOUND)
    q.set_defaults(func=cmd_contrast_solve)

    q = csub.add_parser("path", help="contrast across a transfer-time grid")
    q.add_argument("--pair", help="two comma-separated presets")
    q.add_argument("--lam", type=float, default=0.9)
    q.add_argument("--kind", choices=("quadratic", "power"), default="quadratic")
    q.add_argument("--m", type=float, default=DEFAULT_BOUND)
    q.add_argument("--t-lo", type=float, default=1.01)
    q.add_argument("--t-hi", type=float, default=2.0)
    q.add_argument("--nodes", type=int, default=13)
    q.set_defaults(func=cmd_contrast_path)

    q = csub.add_parser("sweep", help="contrast map over spin-2 times")
    _add_species_args(q)
    q.add_argument("--polytope", required=True,
                   help="x_min,x_max,y_min,y_max in ms")
    q.add_argument("--rays", type=int, default=8)
    q.add_argument("--samples", type=int, default=8)
    q.add_argument("--t-factor", type=float, default=1.5)
    q.add_argument("--lam", type=float, default=0.9)
    q.add_argument("--kind", choices=("quadratic", "power"), default="power")
    q.add_argument("--m", type=float, default=DEFAULT_BOUND)
    q.add_argument("--probe", action="append",
                   help="T1_ms,T2_ms diagnostic point (repeatable)")
    q.add_argument("--workers", type=int,
                   help="ray workers (default env SPINCONTRAST_WORKERS)")
    q.set_defaults(func=cmd_contrast_sweep)

    q = sub.add_parser("phantom", help="render disk-in-ring phantom images")
    q.add_argument("--solution", required=True,
                   help="contrast_solution.json from `contrast solve`")
    q.add_argument("--levels", help="inner,ring gray levels override")
    q.add_argument("--resolution", type=int, default=256)
    q.add_argument("--disk-radius", type=float, default=0.55)
    q.add_argument("--ring-outer", type=float, default=0.95)
    q.set_defaults(func=cmd_phantom)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = model.load_config(args.config) if args.config else None
    try:
        return args.func(args, cfg)
    except (CliError, model.DomainError, geometry.GeometryError,
            flow.FlowError, synthesis.SynthesisError,
            contrast_mod.ContrastError, conjugate_mod.ConjugateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
