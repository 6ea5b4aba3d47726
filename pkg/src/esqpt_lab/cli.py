"""Command-line front end.

Each subcommand writes a deterministic CSV bundle plus a JSON manifest
into --outdir.  Every option can be defaulted through the environment
as ESQPT_<OPTION> (dashes become underscores, e.g. ESQPT_OUTDIR);
explicit flags win over the environment.  Data files carry a sha256 of
the run configuration, so identical configurations produce
byte-identical files and a renderer can verify a bundle is coherent.

Exit codes: 0 on success, 1 when a computation or validation fails,
2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import __version__, analysis, csvio, dicke, dos, landscape, tc, validation
from .params import (ConfigError, ModelParams, coupling_ratio,
                     critical_coupling, load_config, resolve_params)
from .records import IncompleteSpectrum

_ENV_PREFIX = "ESQPT_"
_MODEL_DELTA = {"tc": 0, "dicke": 1}

# defaults that depend on the model: (certified range, averaging window)
_EPS_REF_DEFAULT = {0: 3.3, 1: 1.2}
_WINDOW_DEFAULT = {0: 600, 1: 20}


def _add(parser, flag: str, **kw):
    """add_argument with an ESQPT_* environment default."""
    env = _ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()
    raw = os.environ.get(env)
    if raw is not None:
        if kw.get("action") == "store_true":
            kw["default"] = raw.strip().lower() in ("1", "true", "yes", "on")
        else:
            caster = kw.get("type", str)
            try:
                value = caster(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{env}={raw!r}: {exc}") from exc
            choices = kw.get("choices")
            if choices is not None and value not in choices:
                raise ConfigError(f"{env}={raw!r}: not one of {choices}")
            kw["default"] = value
    parser.add_argument(flag, **kw)


def _parse_grid(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from exc
    if n < 2 or hi <= lo:
        raise ConfigError(f"grid {text!r} is empty or reversed")
    return lo, hi, n


def _parse_pair(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"expected n_theta:n_phi, got {text!r}")
    return int(parts[0]), int(parts[1])


def _model_arguments(sp):
    _add(sp, "--model", choices=tuple(_MODEL_DELTA))
    _add(sp, "--delta", type=int, choices=(0, 1))
    _add(sp, "--omega", type=float)
    _add(sp, "--omega0", type=float)
    _add(sp, "--gamma", type=float)
    _add(sp, "--gamma-over-gc", type=float)
    _add(sp, "--j2", type=int)
    _add(sp, "--config", metavar="FILE",
         help="key=value parameter file; explicit flags override it")


def _output_arguments(sp):
    _add(sp, "--outdir", default="runs")
    _add(sp, "--threads", type=int, default=1)


def _resolve(args) -> ModelParams:
    mapping = dict(load_config(args.config)) if args.config else {}
    if args.model is not None:
        want = _MODEL_DELTA[args.model]
        if args.delta is not None and args.delta != want:
            raise ConfigError(f"--model {args.model} contradicts "
                              f"--delta {args.delta}")
        mapping["delta"] = want
    elif args.delta is not None:
        mapping["delta"] = args.delta
    for key in ("omega", "omega0", "j2"):
        value = getattr(args, key)
        if value is not None:
            mapping[key] = value
    if args.gamma is not None and args.gamma_over_gc is not None:
        raise ConfigError("give either --gamma or --gamma-over-gc, not both")
    if args.gamma is not None:
        mapping.pop("gamma_over_gc", None)
        mapping["gamma"] = args.gamma
    if args.gamma_over_gc is not None:
        mapping.pop("gamma", None)
        mapping["gamma_over_gc"] = args.gamma_over_gc
    return resolve_params(mapping)


def _config_hash(command: str, params: ModelParams, **extras) -> str:
    payload = {
        "command": command,
        "omega": params.omega,
        "omega0": params.omega0,
        "gamma": params.gamma,
        "j2": params.j2,
        "delta": params.delta,
    }
    payload.update({k: v for k, v in sorted(extras.items())
                    if v is not None})
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _write_manifest(outdir: str, command: str, params: ModelParams,
                    extras: dict, outputs: list, cfg_hash: str,
                    t0: float) -> None:
    config = {
        "omega": params.omega, "omega0": params.omega0,
        "gamma": params.gamma, "j2": params.j2, "delta": params.delta,
    }
    config.update({k: v for k, v in sorted(extras.items())
                   if v is not None})
    payload = {
        "format": csvio.FORMAT_TAG,
        "command": command,
        "config": config,
        "config_sha256": cfg_hash,
        "outputs": sorted(outputs),
        "versions": {
            "esqpt-lab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": round(time.time() - t0, 3),
    }
    csvio.write_manifest(os.path.join(outdir, "run_manifest.json"), payload)


def _default_grid(params: ModelParams, args):
    if args.grid is not None:
        return _parse_grid(args.grid)
    return landscape.ground_energy(params) + 1e-9, 2.0, 601


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_fixed_points(args) -> int:
    t0 = time.time()
    params = _resolve(args)
    points = landscape.fixed_points(params)
    cfg = _config_hash("fixed-points", params)
    columns = {
        "q": np.array([f.point.q for f in points]),
        "p": np.array([f.point.p for f in points]),
        "phi": np.array([f.point.phi for f in points]),
        "jz": np.array([f.point.jz for f in points]),
        "epsilon": np.array([f.epsilon for f in points]),
        "stability": np.array([f.stability for f in points]),
        "continuous_ring": np.array([int(f.continuous_ring)
                                     for f in points]),
    }
    path = os.path.join(args.outdir, "fixed_points.csv")
    csvio.write_csv(path, columns, cfg)
    for f in points:
        ring = " (continuous ring)" if f.continuous_ring else ""
        print(f"{f.stability:9s} eps={f.epsilon:+.9f} "
              f"jz={f.point.jz:+.6f} phi={f.point.phi:.6f}{ring}")
    print(f"coupling ratio gamma/gamma_c = {coupling_ratio(params):.6f}")
    _write_manifest(args.outdir, "fixed-points", params, {},
                    ["fixed_points.csv"], cfg, t0)
    return 0


def cmd_energy_surface(args) -> int:
    t0 = time.time()
    params = _resolve(args)
    n_theta, n_phi = _parse_pair(args.surface_grid)
    u, v, eps = landscape.surface_grid(params, n_theta, n_phi)
    cfg = _config_hash("energy-surface", params,
                       n_theta=n_theta, n_phi=n_phi)
    path = os.path.join(args.outdir, "surface.csv")
    csvio.write_csv(path, {"u": u, "v": v, "epsilon": eps}, cfg)
    print(f"surface: {eps.size} samples, min eps {eps.min():.9f} "
          f"(flow ground value {landscape.ground_energy(params):.9f})")
    _write_manifest(args.outdir, "energy-surface", params,
                    {"n_theta": n_theta, "n_phi": n_phi},
                    ["surface.csv"], cfg, t0)
    return 0


def _quantum_record(params: ModelParams, args, eps_ref: float):
    """Spectrum certified complete below eps_ref, whichever solver fits."""
    if params.delta == 0:
        return tc.assemble_spectrum(params, lambda_max=args.lambda_max,
                                    epsilon_ref=eps_ref,
                                    threads=args.threads), None
    record, report = dicke.converge_spectrum(
        params, eps_ref, tol=args.tolerance, n_max_start=args.nmax_start,
        keep_states=getattr(args, "dump_states", False))
    return record, report


def cmd_dos(args) -> int:
    t0 = time.time()
    params = _resolve(args)
    lo, hi, n = _default_grid(params, args)
    outputs = []

    if args.mc:
        edges = np.linspace(lo, hi, n + 1)
        result = dos.dos_monte_carlo(params, edges, n_samples=args.samples,
                                     seed=args.seed, threads=args.threads)
        cfg = _config_hash("dos-mc", params, lo=lo, hi=hi, bins=n,
                           samples=args.samples, seed=args.seed)
        columns = {
            "epsilon_lo": edges[:-1], "epsilon_hi": edges[1:],
            "nu_mc": result.nu, "std_err": result.std_err,
        }
        csvio.write_csv(os.path.join(args.outdir, "dos_mc.csv"),
                        columns, cfg)
        outputs.append("dos_mc.csv")
        print(f"mc: {args.samples} samples over {n} bins, "
              f"disc radius {result.disc_radius:.4f}")
        _write_manifest(args.outdir, "dos-mc", params,
                        {"lo": lo, "hi": hi, "bins": n,
                         "samples": args.samples, "seed": args.seed},
                        outputs, cfg, t0)
        return 0

    if args.quantum:
        eps_ref = args.eps_ref if args.eps_ref is not None \
            else _EPS_REF_DEFAULT[params.delta]
        window = args.window if args.window is not None \
            else _WINDOW_DEFAULT[params.delta]
        record, report = _quantum_record(params, args, eps_ref)
        binned = analysis.averaged_dos(record, window)
        cfg = _config_hash("dos-quantum", params, eps_ref=eps_ref,
                           window=window, lambda_max=args.lambda_max,
                           tolerance=args.tolerance)
        csvio.write_csv(os.path.join(args.outdir, "dos_quantum.csv"),
                        {"epsilon": binned.epsilon,
                         "nu_scaled": binned.nu_scaled}, cfg)
        steps_eps, steps_n = analysis.staircase(record)
        csvio.write_csv(os.path.join(args.outdir, "staircase.csv"),
                        {"epsilon": steps_eps, "n_over_2j": steps_n}, cfg)
        outputs += ["dos_quantum.csv", "staircase.csv"]
        print(f"quantum: {len(record)} states below eps={eps_ref}, "
              f"window {window} -> {binned.epsilon.size} density samples")
        if report is not None:
            for n_max, kept, worst in report.iterations:
                print(f"  cutoff {n_max}: {kept} states, "
                      f"max leak {worst:.2e}")
        _write_manifest(args.outdir, "dos-quantum", params,
                        {"eps_ref": eps_ref, "window": window,
                         "lambda_max": args.lambda_max,
                         "tolerance": args.tolerance},
                        outputs, cfg, t0)
        return 0

    eps_grid = np.linspace(lo, hi, n)
    curve = dos.dos_curve(params, eps_grid)
    cfg = _config_hash("dos-semiclassical", params, lo=lo, hi=hi, n=n)
    csvio.write_csv(os.path.join(args.outdir, "dos.csv"),
                    {"epsilon": curve.epsilon,
                     "nu_scaled": curve.nu_scaled,
                     "nu_prime_scaled": curve.nu_prime_scaled,
                     "regime": np.array(curve.regime)},
                    cfg)
    marks = dos.singularity_markers(params)
    csvio.write_csv(os.path.join(args.outdir, "singularities.csv"),
                    {"epsilon": np.array([m.epsilon for m in marks]),
                     "kind": np.array([m.kind for m in marks])}, cfg)
    outputs += ["dos.csv", "singularities.csv"]
    print(f"semiclassical: {n} samples on [{lo:.4f}, {hi:.4f}]; "
          "markers: " + ", ".join(f"{m.kind}@{m.epsilon:+g}" for m in marks))
    _write_manifest(args.outdir, "dos-semiclassical", params,
                    {"lo": lo, "hi": hi, "n": n}, outputs, cfg, t0)
    return 0


def cmd_spectrum(args) -> int:
    t0 = time.time()
    params = _resolve(args)
    eps_ref = args.eps_ref if args.eps_ref is not None \
        else _EPS_REF_DEFAULT[params.delta]
    record, report = _quantum_record(params, args, eps_ref)
    cfg = _config_hash("spectrum", params, eps_ref=eps_ref,
                       lambda_max=args.lambda_max,
                       tolerance=args.tolerance)
    columns = {
        "index": np.arange(len(record)),
        "energy": record.energies,
        "epsilon": record.epsilons,
    }
    if record.lam is not None:
        columns["lam"] = record.lam
    if record.parity is not None:
        columns["parity"] = record.parity
    if record.delta_p is not None:
        columns["delta_p"] = record.delta_p
    csvio.write_csv(os.path.join(args.outdir, "spectrum.csv"), columns, cfg)
    outputs = ["spectrum.csv"]
    if args.dump_states and report is not None and report.states is not None:
        np.save(os.path.join(args.outdir, "states.npy"), report.states)
        outputs.append("states.npy")
    print(f"{len(record)} states certified below eps={eps_ref}; "
          f"ground eps = {record.epsilons[0]:.9f}")
    if report is not None:
        print(f"photon cutoff {report.n_max}, "
              f"worst leak {report.iterations[-1][2]:.2e}")
    _write_manifest(args.outdir, "spectrum", params,
                    {"eps_ref": eps_ref, "lambda_max": args.lambda_max,
                     "tolerance": args.tolerance}, outputs, cfg, t0)
    return 0


def cmd_compare(args) -> int:
    t0 = time.time()
    params = _resolve(args)
    eps_ref = args.eps_ref if args.eps_ref is not None \
        else _EPS_REF_DEFAULT[params.delta]
    window = args.window if args.window is not None \
        else _WINDOW_DEFAULT[params.delta]
    record, _ = _quantum_record(params, args, eps_ref)
    binned = analysis.averaged_dos(record, window)
    comp = analysis.compare_to_semiclassical(binned,
                                             exclude_half_width=args.exclude)
    cfg = _config_hash("compare", params, eps_ref=eps_ref, window=window,
                       exclude=args.exclude, lambda_max=args.lambda_max,
                       tolerance=args.tolerance)
    csvio.write_csv(os.path.join(args.outdir, "compare.csv"),
                    {"epsilon": comp.epsilon,
                     "nu_quantum": comp.quantum,
                     "nu_classical": comp.classical,
                     "rel_dev": comp.rel_dev}, cfg)
    print(f"{comp.epsilon.size} samples compared "
          f"({comp.excluded} excluded near eps = -/+1)")
    print(f"mean |rel dev| = {comp.mean_rel:.4%},  "
          f"max |rel dev| = {comp.max_rel:.4%}")
    _write_manifest(args.outdir, "compare", params,
                    {"eps_ref": eps_ref, "window": window,
                     "exclude": args.exclude}, ["compare.csv"], cfg, t0)
    return 0


def cmd_validate(args) -> int:
    results = validation.run_all()
    width = max(len(name) for name, _, _ in results)
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    try:
        parser = _build_parser()
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if hasattr(args, "outdir"):
            os.makedirs(args.outdir, exist_ok=True)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (dos.ForbiddenEnergy, IncompleteSpectrum, FloatingPointError,
            ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esqpt-lab",
        description="Spectral structure of collective atom-field models: "
                    "flow-based level densities, exact spectra, and their "
                    "comparison.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fixed-points",
                        help="stationary points of the reduced flow")
    _model_arguments(sp)
    _output_arguments(sp)
    sp.set_defaults(func=cmd_fixed_points)

    sp = sub.add_parser("energy-surface",
                        help="scaled energy over the reduced phase sphere")
    _model_arguments(sp)
    _output_arguments(sp)
    _add(sp, "--surface-grid", default="121:144", metavar="NTH:NPHI")
    sp.set_defaults(func=cmd_energy_surface)

    sp = sub.add_parser("dos", help="scaled density of states")
    _model_arguments(sp)
    _output_arguments(sp)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--semiclassical", action="store_true",
                       help="flow prediction on a grid (default)")
    group.add_argument("--mc", action="store_true",
                       help="phase-space sampling estimate")
    group.add_argument("--quantum", action="store_true",
                       help="window-averaged exact spectrum")
    _add(sp, "--grid", metavar="LO:HI:N",
         help="epsilon grid (MC reads N as the bin count)")
    _add(sp, "--samples", type=int, default=1_000_000)
    _add(sp, "--seed", type=int, default=0)
    _add(sp, "--window", type=int)
    _add(sp, "--eps-ref", type=float)
    _add(sp, "--lambda-max", type=int)
    _add(sp, "--tolerance", type=float, default=1e-6)
    _add(sp, "--nmax-start", type=int, default=60)
    sp.set_defaults(func=cmd_dos)

    sp = sub.add_parser("spectrum", help="exact low-energy spectrum")
    _model_arguments(sp)
    _output_arguments(sp)
    _add(sp, "--eps-ref", type=float)
    _add(sp, "--lambda-max", type=int)
    _add(sp, "--tolerance", type=float, default=1e-6)
    _add(sp, "--nmax-start", type=int, default=60)
    _add(sp, "--dump-states", action="store_true", default=False)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("compare",
                        help="quantum level density against the flow result")
    _model_arguments(sp)
    _output_arguments(sp)
    _add(sp, "--eps-ref", type=float)
    _add(sp, "--window", type=int)
    _add(sp, "--exclude", type=float, default=0.05,
         help="half-width skipped around eps = -/+1")
    _add(sp, "--lambda-max", type=int)
    _add(sp, "--tolerance", type=float, default=1e-6)
    _add(sp, "--nmax-start", type=int, default=60)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("validate", help="fast internal cross-checks")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("reproduce-all",
                        help="write the full figure-data bundle")
    _output_arguments(sp)
    _add(sp, "--scale", choices=("paper", "desk"), default="paper",
         help="desk shrinks every run to laptop-sized checks")
    _add(sp, "--seed", type=int, default=0)
    sp.set_defaults(func=cmd_reproduce_all)

    return parser


# --------------------------------------------------------------------------
# reproduce-all: the figure-data bundle
# --------------------------------------------------------------------------

def _bundle_write(outdir, rel, columns, cfg, bundle):
    path = os.path.join(outdir, rel)
    csvio.write_csv(path, columns, cfg)
    bundle.append({"file": rel, "config_sha256": cfg})
    return rel


def cmd_reproduce_all(args) -> int:
    t0 = time.time()
    desk = args.scale == "desk"
    tc_j2 = 60 if desk else 200
    tc_lmax = 500 if desk else 2000
    tc_window = 60 if desk else 600
    dk_j2 = 24 if desk else 80
    dk_window = 10 if desk else 20
    dk_tol = 1e-5 if desk else 1e-6
    dk_nmax = 40 if desk else 120
    mc_samples = 200_000 if desk else 1_000_000
    surface_n = (61, 72) if desk else (121, 144)

    bundle = []
    summary = {"scale": args.scale, "ratios": {}, "figures": {}}
    outdir = args.outdir

    # fig1: scaled energy over the reduced sphere, both models
    fig1 = []
    for delta in (0, 1):
        for ratio in (0.2, 1.0, 2.0):
            p = _ratio_params(delta, ratio, tc_j2 if delta == 0 else dk_j2)
            u, v, eps = landscape.surface_grid(p, *surface_n)
            cfg = _config_hash("energy-surface", p,
                               n_theta=surface_n[0], n_phi=surface_n[1])
            rel = f"fig1/surface_delta{delta}_r{_rtag(ratio)}.csv"
            _bundle_write(outdir, rel, {"u": u, "v": v, "epsilon": eps},
                          cfg, bundle)
            fig1.append(rel)
    summary["figures"]["fig1"] = fig1

    # fig2: ground energy against the coupling ratio (model-independent)
    ratios = np.linspace(0.0, 2.5, 126)
    p0 = ModelParams(gamma=1.0, j2=tc_j2, delta=0)
    eps_min = np.array([landscape.ground_energy(
        p0.with_gamma(r * critical_coupling(p0))) for r in ratios])
    cfg = _config_hash("ground-energy", p0, n=int(ratios.size),
                       hi=float(ratios[-1]))
    rel = "fig2/ground_energy.csv"
    _bundle_write(outdir, rel,
                  {"gamma_over_gc": ratios, "epsilon_min": eps_min},
                  cfg, bundle)
    summary["figures"]["fig2"] = [rel]

    # fig3: admissible azimuth fraction over the spin range
    p3 = _ratio_params(1, 2.0, dk_j2)
    eps_rows, y_rows, frac_rows = [], [], []
    y_grid = np.linspace(-1.0, 1.0, 241)
    for eps in (-2.0, -1.5, -1.1, -1.0, -0.9, -0.5, 0.0, 0.5):
        for y in y_grid:
            eps_rows.append(eps)
            y_rows.append(y)
            frac_rows.append(dos.phi_admissible_fraction(float(y), eps, p3))
    cfg = _config_hash("admissible-fraction", p3, n_y=int(y_grid.size))
    rel = "fig3/admissible_fraction.csv"
    _bundle_write(outdir, rel,
                  {"epsilon": np.array(eps_rows), "y": np.array(y_rows),
                   "frac": np.array(frac_rows)}, cfg, bundle)
    summary["figures"]["fig3"] = [rel]

    # fig4: delta=0 exact level density against the flow prediction
    fig4 = []
    for ratio, eps_ref in ((1.0, 6.4), (2.0, 3.3)):
        p = _ratio_params(0, ratio, tc_j2)
        record = tc.assemble_spectrum(p, lambda_max=tc_lmax,
                                      epsilon_ref=eps_ref,
                                      threads=args.threads)
        binned = analysis.averaged_dos(record, tc_window)
        comp = analysis.compare_to_semiclassical(binned)
        cfg = _config_hash("dos-quantum", p, eps_ref=eps_ref,
                           window=tc_window, lambda_max=tc_lmax)
        rel = f"fig4/dos_tc_r{_rtag(ratio)}.csv"
        _bundle_write(outdir, rel, {"epsilon": binned.epsilon,
                                    "nu_scaled": binned.nu_scaled},
                      cfg, bundle)
        fig4.append(rel)
        grid = np.linspace(landscape.ground_energy(p) + 1e-9, eps_ref, 801)
        curve = dos.dos_curve(p, grid)
        cfg_c = _config_hash("dos-semiclassical", p,
                             lo=float(grid[0]), hi=float(grid[-1]), n=801)
        rel_c = f"fig4/dos_tc_r{_rtag(ratio)}_classical.csv"
        _bundle_write(outdir, rel_c, {"epsilon": curve.epsilon,
                                      "nu_scaled": curve.nu_scaled},
                      cfg_c, bundle)
        fig4.append(rel_c)
        steps_eps, steps_n = analysis.staircase(record)
        cfg_s = _config_hash("staircase", p, eps_ref=eps_ref,
                             lambda_max=tc_lmax)
        rel_s = f"fig4/staircase_tc_r{_rtag(ratio)}.csv"
        _bundle_write(outdir, rel_s, {"epsilon": steps_eps,
                                      "n_over_2j": steps_n}, cfg_s, bundle)
        fig4.append(rel_s)
        summary["ratios"][f"tc_r{_rtag(ratio)}"] = {
            "states": len(record),
            "count_below_ref": record.count_below(eps_ref),
            "mean_rel_dev": comp.mean_rel,
            "max_rel_dev": comp.max_rel,
        }
    summary["figures"]["fig4"] = fig4

    # fig5: delta=1 density overlays, sampling, and the derivative blow-up
    fig5 = []
    for ratio, eps_ref in ((1.0, 1.2), (2.0, 1.2)):
        p = _ratio_params(1, ratio, dk_j2)
        record, report = dicke.converge_spectrum(
            p, eps_ref, tol=dk_tol, n_max_start=dk_nmax)
        binned = analysis.averaged_dos(record, dk_window)
        comp = analysis.compare_to_semiclassical(binned)
        cfg = _config_hash("dos-quantum", p, eps_ref=eps_ref,
                           window=dk_window, tolerance=dk_tol)
        rel = f"fig5/dos_dicke_r{_rtag(ratio)}.csv"
        _bundle_write(outdir, rel, {"epsilon": binned.epsilon,
                                    "nu_scaled": binned.nu_scaled},
                      cfg, bundle)
        fig5.append(rel)
        grid = np.linspace(landscape.ground_energy(p) + 1e-9, eps_ref, 801)
        curve = dos.dos_curve(p, grid)
        cfg_c = _config_hash("dos-semiclassical", p,
                             lo=float(grid[0]), hi=float(grid[-1]), n=801)
        rel_c = f"fig5/dos_dicke_r{_rtag(ratio)}_classical.csv"
        _bundle_write(outdir, rel_c, {"epsilon": curve.epsilon,
                                      "nu_scaled": curve.nu_scaled},
                      cfg_c, bundle)
        fig5.append(rel_c)
        summary["ratios"][f"dicke_r{_rtag(ratio)}"] = {
            "states": len(record),
            "count_below_ref": record.count_below(eps_ref),
            "mean_rel_dev": comp.mean_rel,
            "max_rel_dev": comp.max_rel,
            "photon_cutoff": report.n_max,
        }

    p5 = _ratio_params(1, 2.0, dk_j2)
    edges = np.linspace(landscape.ground_energy(p5) + 1e-6, 1.2, 41)
    mc = dos.dos_monte_carlo(p5, edges, n_samples=mc_samples,
                             seed=args.seed, threads=args.threads)
    cfg_m = _config_hash("dos-mc", p5, lo=float(edges[0]),
                         hi=float(edges[-1]), bins=40,
                         samples=mc_samples, seed=args.seed)
    rel_m = "fig5/dos_dicke_mc_r2.csv"
    _bundle_write(outdir, rel_m,
                  {"epsilon_lo": edges[:-1], "epsilon_hi": edges[1:],
                   "nu_mc": mc.nu, "std_err": mc.std_err}, cfg_m, bundle)
    fig5.append(rel_m)

    samples = np.array([-1.0 + 10.0 ** -k for k in (2, 3, 4, 5)])
    for delta, name in ((0, "derivative_tc.csv"),
                        (1, "derivative_dicke.csv")):
        p = _ratio_params(delta, 2.0, tc_j2 if delta == 0 else dk_j2)
        grads = np.array([dos.dos_derivative(float(e), p,
                                             h=abs(e + 1.0) / 8.0)[0]
                          for e in samples])
        cfg_d = _config_hash("derivative-samples", p, n=int(samples.size))
        rel_d = f"fig5/{name}"
        _bundle_write(outdir, rel_d,
                      {"epsilon": samples, "nu_prime_scaled": grads},
                      cfg_d, bundle)
        fig5.append(rel_d)
        if delta == 1:
            a, b, r2 = analysis.fit_log_divergence(samples, grads)
            summary["log_divergence_fit"] = {"a": a, "b": b,
                                             "r_squared": r2}
    summary["figures"]["fig5"] = fig5

    summary["files"] = bundle
    summary["versions"] = {
        "esqpt-lab": __version__, "numpy": np.__version__,
        "scipy": scipy.__version__, "python": platform.python_version(),
    }
    summary["wall_time_s"] = round(time.time() - t0, 3)
    csvio.write_manifest(os.path.join(outdir, "summary.json"), summary)
    print(f"bundle of {len(bundle)} files written to {outdir} "
          f"({summary['wall_time_s']}s)")
    return 0


def _ratio_params(delta: int, ratio: float, j2: int) -> ModelParams:
    base = ModelParams(gamma=1.0, j2=j2, delta=delta)
    return base.with_gamma(ratio * critical_coupling(base))


def _rtag(ratio: float) -> str:
    text = f"{ratio:g}"
    return text.replace(".", "p")
