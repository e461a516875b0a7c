"""Command-line front end: sweeps, single-point classification, curve
emission, orbits and phase portraits, and the two application pipelines.

One config grammar (`key = value` lines) is shared by all subcommands; flags
override file values, and every run writes a manifest listing its outputs.
Exit codes: 0 success, 1 runtime failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import backend, __version__
from .classify import ClassifierConfig, classify, count_components, find_attractors
from .config import load_config, merge_options, write_manifest
from .core import NormalFormParams, orbit, solve_cycle
from .curves import (
    CurveSample,
    EXPLICIT_LINES,
    eta_n_homoclinic,
    explicit_line,
    gamma_bcb_curve,
    kappa_curve,
    stability_triangle,
    theta_curve,
    trace_boundary,
    trace_curve,
    superstable_residual,
    xi_curve,
)
from .errors import BcnfError
from .filippov import (
    FrictionParams,
    extract_normal_form,
    integrate,
    linear_osc_params,
    ode_bif_diagram,
)
from .flu import find_period_doubling, flu_bif_diagram, normal_form_window_scan
from .sweep import SweepConfig, encode_raster, run_sweep


class UsageError(Exception):
    pass


def _parse_window(text: str) -> tuple[float, float, float, float]:
    try:
        a, b = text.split(",")
        tr_lo, tr_hi = (float(v) for v in a.split(":"))
        dr_lo, dr_hi = (float(v) for v in b.split(":"))
        return (tr_lo, tr_hi, dr_lo, dr_hi)
    except ValueError as exc:
        raise UsageError(f"bad window {text!r}, expected 'lo:hi,lo:hi'") from exc


def _parse_res(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
        return nx, ny
    except ValueError as exc:
        raise UsageError(f"bad resolution {text!r}, expected 'NXxNY'") from exc


def _parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        if len(parts) == 2:
            return np.linspace(float(parts[0]), float(parts[1]), 41)
        if len(parts) == 3:
            return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise UsageError(f"bad range {text!r}, expected 'lo:hi' or 'lo:hi:n'")


def _default_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("BCNF_SEED", "0"))


def _file_cfg(args) -> dict[str, str]:
    if getattr(args, "config", None):
        return load_config(args.config)
    return {}


def _resolve(args, keys: dict[str, object]) -> dict[str, object]:
    merged = merge_options(_file_cfg(args), keys)
    missing = [k for k in keys if merged.get(k) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")
    return merged


# ---------------------------------------------------------------------------
# subcommands

def cmd_sweep(args) -> int:
    started = time.monotonic()
    seed = _default_seed(args)
    opts = _resolve(args, {
        "tau_l": args.tau_l, "mu": args.mu, "window": args.window, "res": args.res,
    })
    window = _parse_window(str(opts["window"]))
    nx, ny = _parse_res(str(opts["res"]))
    cc = ClassifierConfig(burn_in=args.burn_in, seed=seed)
    cfg = SweepConfig(float(opts["tau_l"]), float(opts["mu"]), window, (nx, ny), cc)
    raster = run_sweep(cfg, workers=args.workers)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    outputs = []
    for fmt in args.formats.split(","):
        fmt = fmt.strip()
        path = prefix.with_suffix("." + fmt)
        path.write_bytes(encode_raster(raster, fmt))
        outputs.append(path)
    manifest = prefix.with_suffix(".manifest.json")
    write_manifest(manifest, "sweep", {**opts, "burn_in": args.burn_in,
                                       "workers": args.workers, "version": __version__},
                   [str(p) for p in outputs], seed, started)
    print(f"sweep {nx}x{ny} done: " + ", ".join(str(p) for p in outputs))
    return 0


def cmd_classify(args) -> int:
    seed = _default_seed(args)
    prm = NormalFormParams(args.tau_l, args.tau_r, args.delta_r, args.mu)
    cc = ClassifierConfig(seed=seed)
    cls = classify(prm, cc)
    print(f"{cls}")
    if args.components and cls.kind == "chaotic":
        cnt = count_components(prm, cc)
        print(f"components: {cnt.count} (slice cross-check {cnt.slice_count},"
              f" reliable={cnt.reliable})")
    return 0


_TRACED_CURVES = ("alpha", "beta", "gamma", "gammap", "xi", "eta", "theta",
                  "kappa", "superstable", "triangle")


def cmd_curve(args) -> int:
    started = time.monotonic()
    name = args.name
    window = _parse_window(args.window)
    tau_l = args.tau_l
    mu = args.mu

    if name in EXPLICIT_LINES or name in ("beta-lpr", "gammap-lpr"):
        if tau_l is None:
            raise UsageError(f"curve {name!r} needs --tau-l")
        key = name.replace("-", "_")
        trs = np.linspace(window[0], window[1], args.cols)
        pts = []
        for tr in trs:
            try:
                dr = explicit_line(key, tau_l, tr, p=args.p)
            except BcnfError as exc:
                raise UsageError(str(exc)) from exc
            if window[2] <= dr <= window[3]:
                pts.append((tr, dr))
        sample = CurveSample(name, tau_l, mu if mu is not None else math.nan,
                             np.array(pts) if pts else np.empty((0, 2)))
    elif name in ("alpha", "beta"):
        if tau_l is None or args.p is None:
            raise UsageError(f"curve {name!r} needs --tau-l and --p")
        sign = +1 if name == "alpha" else -1
        sample = trace_boundary(args.regime, sign, args.p, tau_l, window, n_cols=args.cols)
    elif name in ("gamma", "gammap"):
        if tau_l is None or args.p is None:
            raise UsageError(f"curve {name!r} needs --tau-l and --p")
        kind = "gamma" if name == "gamma" else "gamma_prime"
        sample = gamma_bcb_curve(args.regime, args.p, tau_l, window, kind=kind,
                                 n_cols=args.cols)
    elif name == "xi":
        if tau_l is None or args.k is None:
            raise UsageError("curve 'xi' needs --tau-l and --k")
        sample = xi_curve(args.k, tau_l, window, mu=mu if mu is not None else -1.0,
                          n_cols=args.cols if (mu or -1.0) < 0 else min(args.cols, 9))
    elif name == "eta":
        if tau_l is None or args.n is None:
            raise UsageError("curve 'eta' needs --tau-l and --n")
        sample = eta_n_homoclinic(args.n, tau_l, window, n_cols=args.cols)
    elif name == "theta":
        if args.i is None:
            raise UsageError("curve 'theta' needs --i")
        sample = theta_curve(args.i, window, n_cols=args.cols)
    elif name == "kappa":
        if args.n is None:
            raise UsageError("curve 'kappa' needs --n")
        sample = kappa_curve(args.n, window, n_cols=args.cols)
    elif name == "superstable":
        if tau_l is None:
            raise UsageError("curve 'superstable' needs --tau-l")
        sample = trace_curve(lambda tr, dr: superstable_residual(tau_l, tr, dr),
                             window, "superstable", tau_l, mu if mu is not None else 1.0,
                             n_cols=args.cols)
    elif name == "triangle":
        samples = stability_triangle(window)
        text = "".join(s.to_csv() for s in samples)
        _emit(args.out, text)
        return 0
    else:
        raise UsageError(f"unknown curve {name!r}; traced families: "
                         + ", ".join(_TRACED_CURVES))
    _emit(args.out, sample.to_csv())
    if args.out:
        write_manifest(Path(args.out).with_suffix(".manifest.json"), "curve",
                       {"name": name, "tau_l": tau_l, "mu": mu, "window": args.window,
                        "points": len(sample.points)},
                       [args.out], _default_seed(args), started)
    return 0


def _emit(out: str | None, text: str) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def cmd_orbit(args) -> int:
    prm = NormalFormParams(args.tau_l, args.tau_r, args.delta_r, args.mu)
    orb = orbit((args.x0, args.y0), prm, args.n, bound=args.bound)
    lines = ["i,x,y"]
    for i, (x, y) in enumerate(orb.points):
        lines.append(f"{i},{x:.17g},{y:.17g}")
    _emit(args.out, "\n".join(lines) + "\n")
    if orb.escaped_at is not None:
        print(f"orbit diverged at iterate {orb.escaped_at}", file=sys.stderr)
    return 0


def cmd_phase(args) -> int:
    seed = _default_seed(args)
    prm = NormalFormParams(args.tau_l, args.tau_r, args.delta_r, args.mu)
    cc = ClassifierConfig(seed=seed)
    atts = find_attractors(prm, cc, n_seeds=args.n_seeds, n_samples=args.n_samples)
    lines = ["attractor,kind,x,y"]
    for idx, att in enumerate(atts):
        for x, y in att.samples:
            lines.append(f"{idx},{att.kind},{x:.17g},{y:.17g}")
    _emit(args.out, "\n".join(lines) + "\n")
    if args.cycles:
        rows = ["word,i,x,y,admissible,stable,m1_abs,m2_abs"]
        for word in args.cycles.split(","):
            try:
                sol = solve_cycle(word.strip(), prm)
            except BcnfError as exc:
                print(f"cycle {word}: {exc}", file=sys.stderr)
                continue
            m1, m2 = sol.multipliers
            for i, (x, y) in enumerate(sol.points):
                rows.append(f"{word},{i},{x:.17g},{y:.17g},{sol.admissible},"
                            f"{sol.stable},{abs(m1):.17g},{abs(m2):.17g}")
        out2 = (Path(args.out).with_name(Path(args.out).stem + "_cycles.csv")
                if args.out else None)
        _emit(str(out2) if out2 else None, "\n".join(rows) + "\n")
    return 0


def cmd_friction(args) -> int:
    started = time.monotonic()
    prm = FrictionParams(alpha0=args.alpha0, alpha1=args.alpha1, alpha2=args.alpha2,
                         F=args.f, nu=args.nu)
    if args.mode == "extract":
        ex = extract_normal_form(prm, nu_bracket=(args.nu_lo, args.nu_hi))
        print(f"nu_graz = {ex.nu_graz:.6f}")
        print(f"tau_L = {ex.tau_L:.6f}  tau_R = {ex.tau_R:.6f}  delta_R = {ex.delta_R:.6f}")
        print(f"sliding-side determinant = {ex.delta_L_raw:.2e}"
              f"  conditioning_ok = {ex.conditioning_ok}")
        if args.out:
            write_manifest(args.out, "friction-extract",
                           {"F": prm.F, "nu_graz": ex.nu_graz, "tau_L": ex.tau_L,
                            "tau_R": ex.tau_R, "delta_R": ex.delta_R},
                           [], _default_seed(args), started)
        return 0
    if args.mode == "linear":
        if args.beta is None:
            raise UsageError("--mode=linear needs --beta")
        nus = _parse_range(args.nu_range)
        lines = ["nu,alpha1,tau_L,tau_R,delta_R"]
        for nu in nus:
            alpha1 = args.beta * nu / math.pi
            p = linear_osc_params(alpha1, nu)
            lines.append(f"{nu:.17g},{alpha1:.17g},{p.tau_L:.17g},{p.tau_R:.17g},"
                         f"{p.delta_R:.17g}")
        _emit(args.out, "\n".join(lines) + "\n")
        return 0
    if args.mode == "diagram":
        nus = _parse_range(args.nu_range)
        data = ode_bif_diagram(prm, nus, transient_periods=args.transient,
                               record_periods=args.record)
        lines = ["nu,time_mod"]
        for nu, times in data:
            for t in times:
                lines.append(f"{nu:.17g},{t:.17g}")
        _emit(args.out, "\n".join(lines) + "\n")
        return 0
    if args.mode == "trajectory":
        traj = integrate((args.u0, args.v0), prm, (0.0, args.t1),
                         record_sections=True, keep_dense=True)
        _emit(args.out, traj.to_csv())
        return 0
    raise UsageError(f"unknown friction mode {args.mode!r}")


def cmd_flu(args) -> int:
    if args.mode == "diagram":
        ks = _parse_range(args.k)
        _, recs = flu_bif_diagram(args.c, args.r0, ks, transient=args.transient,
                                  record=args.record)
        lines = ["k,S"]
        for j, k in enumerate(ks):
            for s in recs[:, j]:
                lines.append(f"{k:.17g},{s:.17g}")
        _emit(args.out, "\n".join(lines) + "\n")
        return 0
    if args.mode == "window":
        ks = _parse_range(args.k)
        k1, k2 = normal_form_window_scan(args.c, float(ks[0]), float(ks[-1]),
                                         dk=float(ks[1] - ks[0]))
        print(f"Periodic(1) window of the reduced map: k in [{k1:.6f}, {k2:.6f}]")
        return 0
    if args.mode == "pd":
        ks = _parse_range(args.k)
        kpd = find_period_doubling(args.c, args.r0, float(ks[0]), float(ks[-1]))
        print(f"period doubling at k = {kpd:.6f}")
        return 0
    raise UsageError(f"unknown flu mode {args.mode!r}")


def cmd_bench(args) -> int:
    nx, ny = _parse_res(args.res)
    cfg = SweepConfig(-1.2, -1.0, (-1.0, 3.0, -2.0, 8.0), (nx, ny),
                      ClassifierConfig(burn_in=args.burn_in, seed=1))
    results = {}
    kernels = [("python", backend.get_kernel(compiled=False))]
    if backend.HAVE_COMPILED:
        kernels.append(("compiled", backend.get_kernel(compiled=True)))
    for name, kern in kernels:
        t0 = time.monotonic()
        run_sweep(cfg, workers=args.workers, kernel=kern)
        dt = time.monotonic() - t0
        results[name] = dt
        print(f"{name:>9}: {dt:8.3f} s  ({nx * ny / dt:,.0f} cells/s)")
    if len(results) == 2:
        print(f"speedup: {results['python'] / results['compiled']:.1f}x")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bcnf",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"bcnf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="two-parameter classification raster")
    p.add_argument("--config")
    p.add_argument("--tau-l", type=float, dest="tau_l")
    p.add_argument("--mu", type=float)
    p.add_argument("--window")
    p.add_argument("--res")
    p.add_argument("--seed", type=int)
    p.add_argument("--burn-in", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--formats", default="csv,pgm,ppm")
    p.add_argument("--out", default="bcnf_sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="classify one parameter point")
    for flag in ("--tau-l", "--tau-r", "--delta-r", "--mu"):
        p.add_argument(flag, type=float, required=True, dest=flag[2:].replace("-", "_"))
    p.add_argument("--seed", type=int)
    p.add_argument("--components", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("curve", help="emit a named bifurcation curve as csv")
    p.add_argument("name")
    p.add_argument("--tau-l", type=float, dest="tau_l")
    p.add_argument("--mu", type=float)
    p.add_argument("--window", default="-2.5:2.5,-2:8")
    p.add_argument("--p", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--regime", default="lr", choices=("lr", "l2r", "lpr"))
    p.add_argument("--cols", type=int, default=400)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("orbit", help="iterate the map and emit the orbit")
    for flag in ("--tau-l", "--tau-r", "--delta-r", "--mu"):
        p.add_argument(flag, type=float, required=True, dest=flag[2:].replace("-", "_"))
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--bound", type=float, default=1e5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("phase", help="attractor samples and cycle annotations")
    for flag in ("--tau-l", "--tau-r", "--delta-r", "--mu"):
        p.add_argument(flag, type=float, required=True, dest=flag[2:].replace("-", "_"))
    p.add_argument("--n-seeds", type=int, default=16)
    p.add_argument("--n-samples", type=int, default=4096)
    p.add_argument("--cycles", help="comma-separated words, e.g. LRR,LLR")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("friction", help="stick-slip oscillator pipelines")
    p.add_argument("--mode", default="extract",
                   choices=("extract", "linear", "diagram", "trajectory"))
    p.add_argument("--alpha0", type=float, default=1.5)
    p.add_argument("--alpha1", type=float, default=1.5)
    p.add_argument("--alpha2", type=float, default=0.45)
    p.add_argument("--f", type=float, default=0.1)
    p.add_argument("--nu", type=float, default=1.7)
    p.add_argument("--nu-lo", type=float, default=1.69, dest="nu_lo")
    p.add_argument("--nu-hi", type=float, default=1.72, dest="nu_hi")
    p.add_argument("--nu-range", default="1.66:1.72:31", dest="nu_range")
    p.add_argument("--beta", type=float)
    p.add_argument("--transient", type=int, default=200)
    p.add_argument("--record", type=int, default=200)
    p.add_argument("--u0", type=float, default=0.0)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=50.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_friction)

    p = sub.add_parser("flu", help="seasonal influenza map pipelines")
    p.add_argument("--mode", default="diagram", choices=("diagram", "window", "pd"))
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--r0", type=float, default=2.0)
    p.add_argument("--k", default="0.3:0.7:81")
    p.add_argument("--transient", type=int, default=2000)
    p.add_argument("--record", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flu)

    p = sub.add_parser("bench", help="compare the compiled and Python kernels")
    p.add_argument("--res", default="40x40")
    p.add_argument("--burn-in", type=int, default=20_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BcnfError, ValueError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
