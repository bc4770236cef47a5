"""Command-line entry point: ``mixbath <command> ...``.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical
failure, 3 failed verification.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import io
from .analysis import classify, scan
from .bathintegrals import BathIntegralTable, QuadratureSpec
from .errors import MixbathError, VerificationFailure
from .evolution import (DEFAULT_DT, DEFAULT_T_MAX, Method, asymptotics, evolve_closed_form,
                        evolve_diffusion, time_grid)
from .oracle import discrete_bath_solve, evolve_volterra
from .polyroots import solve_roots
from .transport import mixed_transport
from .verify import format_report, verify


def _add_common(p: argparse.ArgumentParser, grid: bool = True) -> None:
    p.add_argument("--config", required=True,
                   help="config file, or the name of a bundled config")
    p.add_argument("--out", default="runs", help="output directory (default: runs)")
    p.add_argument("--rel-tol", type=float, default=1e-8, help="quadrature relative tolerance")
    if grid:
        p.add_argument("--t-max", type=float, default=DEFAULT_T_MAX)
        p.add_argument("--dt", type=float, default=DEFAULT_DT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixbath",
        description="Occupation dynamics of an oscillator coupled to fermionic and bosonic baths.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transport", help="friction and diffusion coefficients")
    _add_common(p)

    p = sub.add_parser("evolve", help="occupation trajectory")
    _add_common(p)
    p.add_argument("--method", choices=[m.value for m in Method] + ["auto"], default="auto")
    p.add_argument("--grid-tol", type=float, default=1e-3)
    p.add_argument("--modes", type=int, default=400, help="modes per bath for --method discrete")

    p = sub.add_parser("asymptote", help="asymptotic occupation and stationarity")
    _add_common(p, grid=False)
    p.add_argument("--tol", type=float, default=1e-6, help="stationarity residual tolerance")

    p = sub.add_parser("scan", help="late-time oscillation versus one parameter")
    _add_common(p)
    p.add_argument("--parameter", required=True,
                   help="Omega, n0, alpha.K, gamma.K or T.K (K = bath index after reordering)")
    p.add_argument("--values", required=True,
                   help="comma list, or start:stop:count for evenly spaced values")
    p.add_argument("--window", type=float, default=0.4, help="analysis window fraction")
    p.add_argument("--threshold", type=float, default=1e-4, help="stationarity threshold")

    p = sub.add_parser("verify", help="randomized invariant suite")
    p.add_argument("--quick", action="store_true", help="10 scenarios instead of 50")
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--out", default="runs")
    return parser


def parse_values(text: str) -> np.ndarray:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("range must be start:stop:count")
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    return np.array([float(x) for x in text.split(",") if x.strip()])


def _stem(args) -> str:
    return Path(args.config).stem


def _grid_info(args) -> dict:
    return {"t_max": args.t_max, "dt": args.dt}


def cmd_transport(args, manifest: io.RunManifest) -> int:
    sc = io.parse_config(args.config)
    spec = QuadratureSpec(rel_tol=args.rel_tol)
    roots = solve_roots(sc)
    manifest.set_scenario(sc, roots)
    manifest.grid = _grid_info(args)
    manifest.quadrature = vars(spec)
    times = time_grid(args.t_max, args.dt)
    ts = mixed_transport(sc, times, roots, None, spec)
    header = ["t", "lambda", "D", "lambda_fermi", "lambda_bose"]
    header += [f"D_{k + 1}" for k in range(sc.N)] + ["den_plus", "den_minus", "flagged"]
    cols = [ts.t, ts.lam, ts.D, ts.lambda_pure[:, 0], ts.lambda_pure[:, 1]]
    cols += [ts.D_partials[:, k] for k in range(sc.N)]
    cols += [ts.denominators[:, 0], ts.denominators[:, 1], ts.flags]
    if np.any(ts.flags):
        manifest.warnings.append(f"{int(ts.flags.sum())} samples hit the denominator floor")
    _write(args, manifest, f"transport_{_stem(args)}.csv", header, cols)
    print(f"lambda({ts.t[-1]:g}) = {ts.lam[-1]:.10g}   D({ts.t[-1]:g}) = {ts.D[-1]:.10g}")
    return 0


def cmd_evolve(args, manifest: io.RunManifest) -> int:
    sc = io.parse_config(args.config)
    spec = QuadratureSpec(rel_tol=args.rel_tol)
    roots = solve_roots(sc)
    manifest.set_scenario(sc, roots)
    manifest.grid = _grid_info(args) | {"grid_tol": args.grid_tol}
    manifest.quadrature = vars(spec)
    method = args.method
    if method == "auto":
        method = "closed-form" if sc.is_pure else "diffusion"
    manifest.results["method"] = method
    times = time_grid(args.t_max, args.dt)
    if method == "closed-form":
        traj = evolve_closed_form(sc, times, roots, None, spec)
    elif method == "diffusion":
        table = BathIntegralTable(roots, sc, float(times[-1]), spec)
        traj = evolve_diffusion(sc, times, roots, table, grid_tol=args.grid_tol)
    elif method == "volterra":
        traj = evolve_volterra(sc, times, spec, args.grid_tol)
    else:
        manifest.results["modes"] = args.modes
        traj = discrete_bath_solve(sc, args.modes, times)
    manifest.results["info"] = traj.info
    _write(args, manifest, f"evolve_{_stem(args)}_{method}.csv", ["t", "n"],
           [traj.times, traj.n])
    info = classify(traj)
    manifest.results["classification"] = info.as_dict()
    if info.low_confidence:
        manifest.warnings.append("late-window fit covers fewer than three periods")
    state = "stationary" if info.stationary else "oscillating"
    print(f"n({traj.times[-1]:g}) = {traj.n[-1]:.10g}   late window: {state}, "
          f"mean {info.mean:.8g}, amplitude {info.amplitude:.3e}, frequency {info.frequency:.6g}")
    return 0


def cmd_asymptote(args, manifest: io.RunManifest) -> int:
    sc = io.parse_config(args.config)
    spec = QuadratureSpec(rel_tol=args.rel_tol)
    roots = solve_roots(sc)
    manifest.set_scenario(sc, roots)
    manifest.quadrature = vars(spec)
    report = asymptotics(sc, roots, spec, args.tol)
    manifest.results = report.as_dict()
    lines = [f"omega = {sc.omega:.10g}", f"Omega = {sc.Omega:.10g}", f"p = {sc.p:.10g}",
             f"g0 = {sc.g0:.10g}"]
    for k, v in enumerate(report.I_inf, start=1):
        lines.append(f"I_inf[{k}] = {v:.10g}")
    for key in ("n_inf_pure", "n_inf_opposite"):
        value = getattr(report, key)
        lines.append(f"{key} = {'none' if value is None else format(value, '.10g')}")
    lines.append(f"markov_limit = {report.markov_limit:.6f}")
    lines.append(f"stationarity_residual = {report.stationarity_residual:.6e}")
    lines.append(f"stationary = {str(report.is_stationary_predicted).lower()}")
    print("\n".join(lines))
    return 0


def cmd_scan(args, manifest: io.RunManifest) -> int:
    sc = io.parse_config(args.config)
    values = parse_values(args.values)
    manifest.set_scenario(sc)
    manifest.grid = _grid_info(args) | {"window": args.window, "threshold": args.threshold}
    manifest.results["parameter"] = args.parameter
    result = scan(sc, args.parameter, values, args.t_max, args.dt, args.window, args.threshold)
    header = ["value", "stationary", "mean", "amplitude", "frequency", "cyclic_frequency",
              "fit_residual", "low_confidence", "hash", "error"]
    rows = {h: [] for h in header}
    for v, info, h, err in zip(result.values, result.infos, result.hashes, result.errors):
        d = info.as_dict() if info is not None else {}
        rows["value"].append(v)
        for key in header[1:8]:
            rows[key].append(d.get(key, np.nan))
        rows["hash"].append(h or "-")
        rows["error"].append((err or "").replace(",", ";"))
        if err:
            manifest.warnings.append(f"{args.parameter}={v:g}: {err}")
        elif info.low_confidence:
            manifest.warnings.append(f"{args.parameter}={v:g}: low-confidence fit")
    _write(args, manifest, f"scan_{_stem(args)}_{args.parameter}.csv", header,
           [np.array(rows[h], dtype=object) for h in header])
    for v, info, err in zip(result.values, result.infos, result.errors):
        if err:
            print(f"{args.parameter} = {v:.6g}: {err}")
        else:
            print(f"{args.parameter} = {v:.6g}: frequency {info.frequency:.6g}, "
                  f"amplitude {info.amplitude:.3e}")
    return 0


def cmd_verify(args, manifest: io.RunManifest) -> int:
    ok, results, elapsed = verify(args.quick, args.seed)
    manifest.results = {"quick": args.quick, "seed": args.seed, "passed": ok,
                        "checks": [{"name": r.name, "passed": r.passed, "failed": r.failed,
                                    "worst": r.worst, "details": r.details} for r in results]}
    print(format_report(results, elapsed))
    if not ok:
        raise VerificationFailure("invariant suite reported failures")
    return 0


def _write(args, manifest, name, header, cols) -> None:
    out = Path(args.out)
    path = out / name
    manifest_path = out / (Path(name).stem + ".manifest.json")
    io.write_csv(path, header, cols, manifest_path.name)
    manifest.outputs[path.name] = header
    manifest.results.setdefault("manifest_path", str(manifest_path))


COMMANDS = {"transport": cmd_transport, "evolve": cmd_evolve, "asymptote": cmd_asymptote,
            "scan": cmd_scan, "verify": cmd_verify}


def _manifest_path(args, manifest: io.RunManifest) -> Path:
    stored = manifest.results.pop("manifest_path", None)
    if stored:
        return Path(stored)
    stem = _stem(args) if hasattr(args, "config") else "suite"
    return Path(args.out) / f"{args.command}_{stem}.manifest.json"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    manifest = io.RunManifest(command=args.command, argv=argv)
    start = time.perf_counter()
    code = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = COMMANDS[args.command](args, manifest)
        except MixbathError as exc:
            print(f"error: {exc}", file=sys.stderr)
            manifest.results["error"] = f"{type(exc).__name__}: {exc}"
            code = exc.exit_code
        except (ValueError, argparse.ArgumentTypeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            manifest.results["error"] = str(exc)
            code = 1
    manifest.warnings += [f"{w.category.__name__}: {w.message}" for w in caught]
    manifest.timings["wall_seconds"] = time.perf_counter() - start
    manifest.results["exit_code"] = code
    manifest.write(_manifest_path(args, manifest))
    return code


if __name__ == "__main__":
    sys.exit(main())
