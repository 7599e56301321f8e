"""Command-line driver: steady states, sweeps, phase diagrams, scaling runs.

Subcommands: steady, evolve, phase-diagram, scan-order-parameter, scaling,
meanfield, cumulant.  Parameters come either from dimensionless flags
(--eta --lam-m --lam-p --kappa-ratio) or a JSON --config with one of the two
recognized key sets.  Every command writes its outputs plus a manifest.json
(config hash, tolerances, per-point status and wall time) into --out.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import cumulant, effective, lindblad, meanfield, scaling, sweep
from .hilbert import DensityMatrix, FockCutoff
from .model import (DimlessParams, ModelParams, ParameterError, canonicalize,
                    params_from_json, to_dimensionless)

LAYERS_ALL = ("exact", "meanfield", "effective", "cumulant")


class UsageError(Exception):
    """Malformed invocation (missing flags, bad ranges): exit code 2."""


def _parse_range(text: str, name: str) -> sweep.AxisSpec:
    try:
        a, b, n = text.split(":")
        return sweep.AxisSpec(name=name, min=float(a), max=float(b), steps=int(n))
    except ValueError as e:
        raise UsageError(f"bad range {text!r} for {name}: {e} "
                         "(expected MIN:MAX:STEPS)")


def _parse_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _add_param_flags(sp):
    sp.add_argument("--eta", type=float)
    sp.add_argument("--lam-m", type=float)
    sp.add_argument("--lam-p", type=float)
    sp.add_argument("--kappa-ratio", type=float)
    sp.add_argument("--config", help="JSON parameter file (physical or dimensionless keys)")


def _add_common_flags(sp, layers_default):
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--cutoff", type=int, default=0, help="Fock cutoff hint (0 = automatic)")
    sp.add_argument("--tol", type=float, default=1e-10, help="steady-state residual tolerance")
    sp.add_argument("--tail-tol", type=float, default=1e-8)
    sp.add_argument("--layers", default=layers_default,
                    help=f"comma list from {{{','.join(LAYERS_ALL)}}}")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--max-mem", type=float, default=None, help="memory budget in GB")


def _resolve_params(args) -> ModelParams:
    if args.config:
        return params_from_json(Path(args.config).read_text())
    missing = [f for f in ("eta", "lam_m", "lam_p", "kappa_ratio")
               if getattr(args, f) is None]
    if missing:
        flags = ", ".join("--" + f.replace("_", "-") for f in missing)
        raise UsageError(f"missing required flags: {flags} (or use --config)")
    d = DimlessParams.from_couplings(args.eta, args.lam_m, args.lam_p, args.kappa_ratio)
    return d.to_model_params()


def _layers(args) -> tuple:
    layers = tuple(s.strip() for s in args.layers.split(",") if s.strip())
    bad = [l for l in layers if l not in LAYERS_ALL]
    if bad:
        raise UsageError(f"unknown layers {bad}, choose from {LAYERS_ALL}")
    return layers


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dimless_record(p: ModelParams) -> dict:
    q, tr = canonicalize(p)
    d = to_dimensionless(q)
    return {"eta": d.eta, "lam_m": d.lam_m, "lam_p": d.lam_p,
            "kappa_ratio": d.kappa_ratio,
            "sigma_z_sign_flip": tr.sigma_z_sign_flip}


# ---------------------------------------------------------------------------
# sweep point workers (module level so process pools can pickle them)

def _exact_point(pt: dict) -> dict:
    d = DimlessParams.from_couplings(pt["eta"], pt["lam_m"], pt["lam_p"],
                                     pt["kappa_ratio"])
    p = d.to_model_params()
    n0 = lindblad.auto_cutoff(p, hint=int(pt.get("cutoff_hint", 0)))
    res = lindblad.steady_state(p, FockCutoff(n0, pt.get("tail_tol", 1e-8)),
                                tol=pt.get("tol", 1e-10))
    o = res.observables
    return {"n_photon": o.n_photon, "sigma_z": o.sigma_z, "x2": o.x2,
            "re_a_mean": o.a_mean.real, "im_a_mean": o.a_mean.imag,
            "p_up": o.p_up, "cutoff_used": res.cutoff_used,
            "residual": res.residual, "tail_population": res.tail_population}


def _meanfield_point(pt: dict) -> dict:
    d = DimlessParams.from_couplings(pt["eta"], pt["lam_m"], pt["lam_p"],
                                     pt["kappa_ratio"])
    phase = meanfield.classify_mf(d)
    sp_stable = [f for f in phase.fixed_points
                 if f.kind in (meanfield.SP_DOWN_PLUS, meanfield.SP_DOWN_MINUS)]
    out = {"region": phase.region, "n_stable": len(phase.stable_points),
           "abs_c_sq_SP": math.nan, "cos_theta_SP": math.nan}
    if sp_stable:
        out["abs_c_sq_SP"] = sp_stable[0].abs_c_sq
        out["cos_theta_SP"] = -sp_stable[0].state.s_z
    return out


def _effective_point(pt: dict) -> dict:
    d = DimlessParams.from_couplings(pt["eta"], pt["lam_m"], pt["lam_p"],
                                     pt["kappa_ratio"])
    pred = effective.steady_phase(d)
    return {"phase": pred.phase,
            "P_NP_up": pred.populations.get("NP_up", 0.0),
            "P_NP_down": pred.populations.get("NP_down", 0.0),
            "P_SP_down": pred.populations.get("SP_down", 0.0),
            "n_over_eta": pred.n_photon_over_eta,
            "sigma_z": pred.sigma_z}


def _scaling_point(pt: dict) -> dict:
    r, kr, eta, dlam = pt["r"], pt["kappa_ratio"], pt["eta"], pt["dlam"]
    lc_minus, _ = meanfield.boundary_lambda_c(r, kr)
    lam_m = lc_minus + dlam
    lam_p = r * lam_m
    d = DimlessParams.from_couplings(eta, lam_m, lam_p, kr)
    out = {"lam_m": lam_m, "lam_p": lam_p,
           "x2_theory": scaling.x2_stationary(d, eta),
           "x2_form": scaling.x2_scaling_form(r, kr, eta, dlam)}
    # dashed reference of the collapse plots: same theory without the P- weight
    out["x2_dicke_ref"] = out["x2_theory"] * (1.0 + r ** 2)
    co = scaling.scaling_coeffs(r, kr)
    out["x_scaled"] = co.c1 ** 2 * eta * dlam ** 2
    # analytic collapse value s Q(s) with the signed argument s = c1 dlam sqrt(eta)
    s = co.c1 * dlam * math.sqrt(eta)
    out["F_analytic"] = s * scaling.q_function(s)
    out["y_theory"] = co.c2 * dlam * out["x2_form"]
    if pt.get("with_exact"):
        ex = _exact_point({"eta": eta, "lam_m": lam_m, "lam_p": lam_p,
                           "kappa_ratio": kr, "cutoff_hint": pt.get("cutoff_hint", 0),
                           "tol": pt.get("tol", 1e-10),
                           "tail_tol": pt.get("tail_tol", 1e-8)})
        out["x2_exact"] = ex["x2"]
        out["cutoff_used"] = ex["cutoff_used"]
        out["y_scaled"] = co.c2 * dlam * ex["x2"]
    else:
        out["x2_exact"] = math.nan
        out["cutoff_used"] = 0
        out["y_scaled"] = out["y_theory"]
    return out


def _scan_point(pt: dict) -> dict:
    out = {}
    if "meanfield" in pt["layers"]:
        mf = _meanfield_point(pt)
        n_mf = mf["abs_c_sq_SP"]
        out["n_meanfield_over_eta"] = n_mf if not math.isnan(n_mf) else 0.0
    if "effective" in pt["layers"]:
        out["n_effective_over_eta"] = _effective_point(pt)["n_over_eta"]
    if "exact" in pt["layers"]:
        ex = _exact_point(pt)
        out["n_exact_over_eta"] = ex["n_photon"] / pt["eta"]
        out["sigma_z_exact"] = ex["sigma_z"]
        out["cutoff_used"] = ex["cutoff_used"]
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_steady(args) -> int:
    p = _resolve_params(args)
    layers = _layers(args)
    out = _out_dir(args)
    record = dict(_dimless_record(p))
    tolerances = {"tol": args.tol, "tail_tol": args.tail_tol}
    outputs = []

    if "exact" in layers:
        n0 = lindblad.auto_cutoff(p, hint=args.cutoff)
        res = lindblad.steady_state(p, FockCutoff(n0, args.tail_tol), tol=args.tol)
        o = res.observables
        record.update(o.to_record())
        record.update({"cutoff_used": res.cutoff_used, "residual": res.residual,
                       "tail_population": res.tail_population})
        dist_path = out / "photon_dist.csv"
        rows = [(n, o.photon_dist[n], o.p_n_up[n], o.p_n_down[n])
                for n in range(len(o.photon_dist))]
        sweep.write_csv(dist_path, ["n", "P", "P_up", "P_down"], rows)
        outputs.append({"file": dist_path.name, "columns": ["n", "P", "P_up", "P_down"]})

    q, tr = canonicalize(p)
    d = to_dimensionless(q)
    sign = -1.0 if tr.sigma_z_sign_flip else 1.0
    if "meanfield" in layers:
        phase = meanfield.classify_mf(d)
        record["mf_region"] = phase.region
        record["mf_n_stable"] = len(phase.stable_points)
    if "effective" in layers:
        pred = effective.steady_phase(d)
        record.update({"prediction_phase": pred.phase,
                       "prediction_n_over_eta": pred.n_photon_over_eta,
                       "prediction_sigma_z": sign * pred.sigma_z})
    if "cumulant" in layers:
        record["cumulant_sigma_z"] = sign * cumulant.stationary_normal(q)
        try:
            record["cumulant_sigma_z_numeric"] = \
                sign * cumulant.stationary_normal_numeric(q).sz_mean
        except RuntimeError as e:
            record["cumulant_sigma_z_numeric"] = math.nan
            record["cumulant_error"] = str(e)

    obs_path = out / "observables.json"
    with open(obs_path, "w") as f:
        json.dump(record, f, indent=2, sort_keys=True, default=float)
        f.write("\n")
    outputs.append({"file": obs_path.name})
    sweep.write_manifest(out / "manifest.json", "steady",
                         {"params": _dimless_record(p), "layers": list(layers),
                          "cutoff_hint": args.cutoff},
                         tolerances, outputs)
    print(f"steady: wrote {obs_path}")
    return 0


def cmd_evolve(args) -> int:
    p = _resolve_params(args)
    out = _out_dir(args)
    n0 = lindblad.auto_cutoff(p, hint=args.cutoff)
    rho0 = DensityMatrix.fock(0, n0, spin=args.initial)
    res = lindblad.evolve(rho0, p, args.tau_final, rtol=args.rtol, atol=args.atol,
                          n_samples=args.n_samples)
    rows = []
    for t, o in zip(res.times, res.observables):
        rows.append((t, o.n_photon, o.sigma_z, o.x2,
                     o.a_mean.real, o.a_mean.imag, o.p_up))
    cols = ["tau", "n_photon", "sigma_z", "x2", "re_a", "im_a", "p_up"]
    sweep.write_csv(out / "trajectory.csv", cols, rows)
    sweep.write_manifest(out / "manifest.json", "evolve",
                         {"params": _dimless_record(p), "initial": args.initial,
                          "tau_final": args.tau_final, "cutoff": n0},
                         {"rtol": args.rtol, "atol": args.atol,
                          "tail_tol": args.tail_tol},
                         [{"file": "trajectory.csv", "columns": cols}])
    print(f"evolve: wrote {out / 'trajectory.csv'}")
    return 0


def _run_layer_sweep(spec, worker, results_key_cols, out, name, workers,
                     est_gb=None, max_mem_gb=None):
    points = sweep.grid_points(spec)
    results = sweep.run_points(worker, points, workers=workers,
                               est_gb=est_gb, max_mem_gb=max_mem_gb)
    rows = []
    for res in results:
        lead = [res.params[spec.axis1.name]]
        if spec.axis2 is not None:
            lead.append(res.params[spec.axis2.name])
        if res.status == "ok":
            rows.append(tuple(lead)
                        + tuple(res.values.get(c) for c in results_key_cols)
                        + (None,))
        else:
            rows.append(tuple(lead) + tuple(None for _ in results_key_cols)
                        + (res.error,))
    header = [spec.axis1.name] + ([spec.axis2.name] if spec.axis2 else []) \
        + list(results_key_cols) + ["error"]
    path = out / name
    sweep.write_csv(path, header, rows)
    return results, {"file": name, "columns": header}


def cmd_phase_diagram(args) -> int:
    layers = _layers(args)
    out = _out_dir(args)
    fixed = {"eta": args.eta, "kappa_ratio": args.kappa_ratio}
    spec = sweep.SweepSpec(axis1=_parse_range(args.lam_m_range, "lam_m"),
                           axis2=_parse_range(args.lam_p_range, "lam_p"),
                           fixed=fixed, layers=layers, out_dir=str(out))
    tolerances = {"tol": args.tol, "tail_tol": args.tail_tol}
    outputs = []
    all_results = []
    if "meanfield" in layers:
        res, entry = _run_layer_sweep(
            spec, _meanfield_point,
            ["region", "n_stable", "abs_c_sq_SP", "cos_theta_SP"],
            out, "meanfield_grid.csv", args.workers)
        outputs.append(entry)
        all_results = res
    if "effective" in layers:
        res, entry = _run_layer_sweep(
            spec, _effective_point,
            ["phase", "P_NP_up", "P_NP_down", "P_SP_down", "n_over_eta", "sigma_z"],
            out, "effective_grid.csv", args.workers)
        outputs.append(entry)
        all_results = all_results or res
    sweep.write_manifest(out / "manifest.json", "phase-diagram", spec.to_dict(),
                         tolerances, outputs, results=all_results)
    print(f"phase-diagram: wrote {', '.join(e['file'] for e in outputs)}")
    return 0


def cmd_scan_order_parameter(args) -> int:
    layers = _layers(args)
    out = _out_dir(args)
    etas = _parse_list(args.eta_list)
    axis = _parse_range(args.lam_m_range, "lam_m")
    tolerances = {"tol": args.tol, "tail_tol": args.tail_tol}
    cols = ["lam_m", "eta", "n_exact_over_eta", "n_effective_over_eta",
            "n_meanfield_over_eta", "sigma_z_exact", "lam_p", "cutoff_used",
            "error"]
    rows = []
    all_results = []
    inflections = []
    for eta in etas:
        points = []
        for lam_m in axis.values():
            points.append({"eta": eta, "lam_m": float(lam_m),
                           "lam_p": args.r * float(lam_m),
                           "kappa_ratio": args.kappa_ratio, "layers": layers,
                           "cutoff_hint": args.cutoff, "tol": args.tol,
                           "tail_tol": args.tail_tol})
        est = sweep.memory_estimate_gb(max(
            lindblad.auto_cutoff(DimlessParams.from_couplings(
                eta, pt["lam_m"], pt["lam_p"], args.kappa_ratio).to_model_params(),
                hint=args.cutoff)
            for pt in points)) if "exact" in layers else None
        results = sweep.run_points(_scan_point, points, workers=args.workers,
                                   est_gb=est, max_mem_gb=args.max_mem)
        all_results.extend(results)
        lam_ok, n_ok = [], []
        for res in results:
            v = res.values or {}
            rows.append((res.params["lam_m"], eta, v.get("n_exact_over_eta"),
                         v.get("n_effective_over_eta"),
                         v.get("n_meanfield_over_eta"), v.get("sigma_z_exact"),
                         res.params["lam_p"], v.get("cutoff_used"),
                         res.error or None))
            if res.status == "ok" and "n_exact_over_eta" in v:
                lam_ok.append(res.params["lam_m"])
                n_ok.append(v["n_exact_over_eta"])
        star = sweep.second_difference_inflection(lam_ok, n_ok) if len(lam_ok) >= 4 else None
        inflections.append((eta, star))
    sweep.write_csv(out / "order_parameter.csv", cols, rows)
    sweep.write_csv(out / "inflection_points.csv", ["eta", "lam_minus_star"], inflections)
    sweep.write_manifest(out / "manifest.json", "scan-order-parameter",
                         {"r": args.r, "etas": etas, "lam_m_range": args.lam_m_range,
                          "kappa_ratio": args.kappa_ratio, "layers": list(layers)},
                         tolerances,
                         [{"file": "order_parameter.csv", "columns": cols},
                          {"file": "inflection_points.csv",
                           "columns": ["eta", "lam_minus_star"]}],
                         results=all_results)
    print(f"scan-order-parameter: wrote {out / 'order_parameter.csv'}")
    return 0


def cmd_scaling(args) -> int:
    layers = _layers(args)
    out = _out_dir(args)
    rs = _parse_list(args.r_list)
    etas = _parse_list(args.eta_list)
    dlams = _parse_list(args.dlam_list)
    with_exact = "exact" in layers
    points = []
    for r in rs:
        for eta in etas:
            for dlam in dlams:
                points.append({"r": r, "eta": eta, "dlam": dlam,
                               "kappa_ratio": args.kappa_ratio,
                               "with_exact": with_exact,
                               "cutoff_hint": args.cutoff,
                               "tol": args.tol, "tail_tol": args.tail_tol})
    results = sweep.run_points(_scaling_point, points, workers=args.workers,
                               max_mem_gb=args.max_mem)
    cols = ["r", "eta", "dlam", "x_scaled", "y_scaled", "F_analytic",
            "lam_m", "lam_p", "x2_exact", "x2_theory", "x2_form",
            "x2_dicke_ref", "y_theory", "cutoff_used", "error"]
    rows = []
    for res in results:
        v = res.values or {}
        rows.append((res.params["r"], res.params["eta"], res.params["dlam"],
                     v.get("x_scaled"), v.get("y_scaled"), v.get("F_analytic"),
                     v.get("lam_m"), v.get("lam_p"), v.get("x2_exact"),
                     v.get("x2_theory"), v.get("x2_form"), v.get("x2_dicke_ref"),
                     v.get("y_theory"), v.get("cutoff_used"),
                     res.error or None))
    sweep.write_csv(out / "scaling.csv", cols, rows)
    sweep.write_manifest(out / "manifest.json", "scaling",
                         {"r_list": rs, "eta_list": etas, "dlam_list": dlams,
                          "kappa_ratio": args.kappa_ratio, "layers": list(layers)},
                         {"tol": args.tol, "tail_tol": args.tail_tol},
                         [{"file": "scaling.csv", "columns": cols}],
                         results=results)
    print(f"scaling: wrote {out / 'scaling.csv'}")
    return 0


def cmd_meanfield(args) -> int:
    p = _resolve_params(args)
    out = _out_dir(args)
    q, _ = canonicalize(p)
    d = to_dimensionless(q)
    phase = meanfield.classify_mf(d)
    points = []
    for f in phase.fixed_points:
        points.append({"kind": f.kind, "stable": f.stable,
                       "re_c": f.state.c.real, "im_c": f.state.c.imag,
                       "re_s_plus": f.state.s_plus.real,
                       "im_s_plus": f.state.s_plus.imag,
                       "s_z": f.state.s_z,
                       "jacobian_eigs": [[e.real, e.imag] for e in f.jacobian_eigs]})
    doc = {"params": _dimless_record(p), "region": phase.region,
           "n_stable": len(phase.stable_points), "fixed_points": points}
    with open(out / "meanfield.json", "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    sweep.write_manifest(out / "manifest.json", "meanfield",
                         {"params": _dimless_record(p)}, {},
                         [{"file": "meanfield.json"}])
    print(f"meanfield: region {phase.region}, wrote {out / 'meanfield.json'}")
    return 0


def cmd_cumulant(args) -> int:
    p = _resolve_params(args)
    out = _out_dir(args)
    state0 = (cumulant.CumulantState.spin_up_vacuum() if args.initial == "up"
              else cumulant.CumulantState.spin_down_vacuum())
    ts, ys = cumulant.integrate(state0, p, args.tau_final, rtol=args.rtol,
                                atol=args.atol, n_samples=args.n_samples)
    cols = ["tau", "sz", "n", "re_a_sp", "im_a_sp", "re_a", "im_a",
            "re_sp", "im_sp", "re_a2", "im_a2", "re_a_sm", "im_a_sm",
            "re_a_sz", "im_a_sz"]
    order = [4, 5, 8, 9, 0, 1, 2, 3, 6, 7, 10, 11, 12, 13]
    rows = [tuple([t] + [float(row[j]) for j in order]) for t, row in zip(ts, ys)]
    sweep.write_csv(out / "cumulant_trajectory.csv", cols, rows)
    record = {"params": _dimless_record(p),
              "sigma_z_closed_form": cumulant.stationary_normal(p)}
    try:
        st = cumulant.stationary_normal_numeric(p)
        record["sigma_z_numeric"] = st.sz_mean
        record["n_numeric"] = st.n
    except RuntimeError as e:
        record["stationary_error"] = str(e)
    with open(out / "cumulant_stationary.json", "w") as f:
        json.dump(record, f, indent=2, sort_keys=True, default=float)
        f.write("\n")
    sweep.write_manifest(out / "manifest.json", "cumulant",
                         {"params": _dimless_record(p), "initial": args.initial,
                          "tau_final": args.tau_final},
                         {"rtol": args.rtol, "atol": args.atol},
                         [{"file": "cumulant_trajectory.csv", "columns": cols},
                          {"file": "cumulant_stationary.json"}])
    print(f"cumulant: wrote {out / 'cumulant_trajectory.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabi-dpt",
                                 description="dissipative anisotropic Rabi model toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("steady", help="single-point steady state")
    _add_param_flags(sp)
    _add_common_flags(sp, "exact,effective")
    sp.set_defaults(func=cmd_steady)

    sp = sub.add_parser("evolve", help="time evolution from a vacuum product state")
    _add_param_flags(sp)
    _add_common_flags(sp, "exact")
    sp.add_argument("--initial", choices=("up", "down"), default="up")
    sp.add_argument("--tau-final", type=float, required=True)
    sp.add_argument("--n-samples", type=int, default=201)
    sp.add_argument("--rtol", type=float, default=1e-8)
    sp.add_argument("--atol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("phase-diagram", help="2-D sweep over the coupling plane")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--kappa-ratio", type=float, required=True)
    sp.add_argument("--lam-m-range", required=True, metavar="START:STOP:STEPS")
    sp.add_argument("--lam-p-range", required=True, metavar="START:STOP:STEPS")
    _add_common_flags(sp, "meanfield,effective")
    sp.set_defaults(func=cmd_phase_diagram)

    sp = sub.add_parser("scan-order-parameter",
                        help="1-D scan of the photon number across the transition")
    sp.add_argument("--r", type=float, required=True, help="lam_p / lam_m ratio")
    sp.add_argument("--eta-list", required=True, help="comma list of eta values")
    sp.add_argument("--lam-m-range", required=True, metavar="START:STOP:STEPS")
    sp.add_argument("--kappa-ratio", type=float, required=True)
    _add_common_flags(sp, "exact,effective,meanfield")
    sp.set_defaults(func=cmd_scan_order_parameter)

    sp = sub.add_parser("scaling", help="collapse data along fixed-r rays")
    sp.add_argument("--r-list", required=True)
    sp.add_argument("--eta-list", required=True)
    sp.add_argument("--dlam-list", required=True,
                    help="offsets lam_m - lam_c_minus along each ray")
    sp.add_argument("--kappa-ratio", type=float, required=True)
    _add_common_flags(sp, "exact")
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("meanfield", help="fixed-point inventory at one point")
    _add_param_flags(sp)
    _add_common_flags(sp, "meanfield")
    sp.set_defaults(func=cmd_meanfield)

    sp = sub.add_parser("cumulant", help="cumulant trajectory and stationary state")
    _add_param_flags(sp)
    _add_common_flags(sp, "cumulant")
    sp.add_argument("--initial", choices=("up", "down"), default="up")
    sp.add_argument("--tau-final", type=float, required=True)
    sp.add_argument("--n-samples", type=int, default=401)
    sp.add_argument("--rtol", type=float, default=1e-9)
    sp.add_argument("--atol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_cumulant)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(ap.format_usage(), end="", file=sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ParameterError, lindblad.SolverError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
