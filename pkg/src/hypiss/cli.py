"""Command-line front end: certify, run, table and sweep.

Exit codes: ``certify`` is nonzero exactly when the certificate fails;
``run`` is nonzero when the solver aborts on a non-finite state or when
the certificate fails and ``--force`` was not given.  ``HYPISS_THREADS``
caps the worker threads used for table rows and sweep points.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import certifier, lyapunov, reports, solver
from .models import Scenario
from .scenario import ScenarioError, ScenarioSpec, load_scenario

__all__ = ["main"]


def _worker_count() -> int:
    env = os.environ.get("HYPISS_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SystemExit(f"HYPISS_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise SystemExit("HYPISS_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _out_dir(spec: argparse.Namespace) -> Path:
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_scenario(scenario: Scenario, report, stride: Optional[int]):
    sim = solver.SimulationRun(grid=scenario.grid, coefficients=scenario.coefficients,
                               initial=scenario.initial, weights=scenario.weights,
                               stride=stride)
    result = solver.run(sim)
    eta = report.eta if report.eta is not None and report.eta > 0 else (
        report.c1.eta_ratio if report.c1.eta_ratio > 0 else None)
    trace = lyapunov.build_trace(result.times, result.lyapunov, result.sup_b_sq_before,
                                 scenario.grid, eta, report.nu, scenario.xi)
    return result, trace


def cmd_certify(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    scenario = load_scenario(args.scenario).build()
    report = certifier.certify(scenario)
    reports.write_certificate(out / "certificate.json", out / "certificate.txt", report)
    sys.stdout.write(report.to_text())
    return 0 if report.overall else 1


def cmd_run(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    scenario = load_scenario(args.scenario).build()
    report = certifier.certify(scenario)
    reports.write_certificate(out / "certificate.json", out / "certificate.txt", report)
    sys.stdout.write(report.to_text())
    if not report.overall and not args.force:
        print("certificate failed; rerun with --force to simulate anyway")
        return 1
    try:
        result, trace = _run_scenario(scenario, report, args.stride)
    except solver.BlowupError as exc:
        print(f"solver aborted: {exc}")
        return 2
    reports.write_trace_csv(out / "trace.csv", trace)
    if result.history is not None:
        reports.write_trajectory_csv(out / "trajectory.csv", result,
                                     scenario.grid.centers)
    max_violation = None
    if trace.envelope is not None:
        max_violation = float(np.max(trace.L - trace.envelope))
    measured = None
    try:
        measured = lyapunov.fit_decay_rate(trace, t_start=0.7 * scenario.grid.T)
    except ValueError:
        pass
    summary = {
        "scenario": scenario.name,
        "certified": bool(report.overall),
        "eta": report.eta,
        "nu": report.nu,
        "xi": scenario.xi,
        "L0": float(trace.L[0]),
        "final_L": float(trace.L[-1]),
        "final_t": float(trace.times[-1]),
        "measured_decay_rate": measured,
        "max_envelope_violation": max_violation,
        "steps": int(result.steps),
    }
    reports.write_summary(out / "summary.json", summary)
    print(f"final L = {summary['final_L']:.6g} at t = {summary['final_t']:.6g}"
          + (f", max envelope violation = {max_violation:.3g}"
             if max_violation is not None else ""))
    return 0


def _table_row(spec: ScenarioSpec, J: int, cfl: Optional[float]) -> dict:
    try:
        scenario = spec.build(J=J, cfl=cfl)
        report = certifier.certify(scenario)
        if not report.overall:
            cond = report.first_failure.condition if report.first_failure else "eta*dt"
            return {"J": J, "error": f"certificate failed at {cond}"}
        _, trace = _run_scenario(scenario, report, stride=None)
        sup_gap, l2_gap = lyapunov.envelope_gap_norms(trace)
        return {"J": J, "sup_gap": sup_gap, "l2_gap": l2_gap,
                "mu": scenario.weights.mu, "eta": report.eta}
    except (ValueError, ScenarioError, solver.BlowupError) as exc:
        return {"J": J, "error": str(exc)}


def cmd_table(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    spec = load_scenario(args.scenario)
    j_list = _parse_j_list(args.J_list)
    with ThreadPoolExecutor(max_workers=min(_worker_count(), len(j_list))) as pool:
        rows = list(pool.map(lambda J: _table_row(spec, J, args.cfl), j_list))
    reference = None
    if reports.is_reference_benchmark(spec.raw):
        cfl = args.cfl if args.cfl is not None else spec.raw["grid"]["cfl"]
        gaps = {J: reports.REFERENCE_GAP_NORMS.get((cfl, J)) for J in j_list}
        reference = {J: (g[0], g[1], reports.REFERENCE_ETA[J])
                     for J, g in gaps.items()
                     if g is not None and J in reports.REFERENCE_ETA}
    text = reports.write_table(out / "table.csv", out / "table.txt", rows, reference)
    sys.stdout.write(text)
    return 0 if all("error" not in r for r in rows) else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    scenario = load_scenario(args.scenario).build()
    xi_values = _parse_xi_range(args.xi_range)
    with ThreadPoolExecutor(max_workers=min(_worker_count(), len(xi_values))) as pool:
        rows = list(pool.map(
            lambda xi: certifier.sweep_xi(scenario, [xi])[0], xi_values))
    text = reports.write_sweep(out / "sweep.csv", out / "sweep.txt", rows)
    sys.stdout.write(text)
    return 0


def _parse_j_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise SystemExit(f"--J-list must be comma-separated integers, got {text!r}")
    if not values or any(v < 2 for v in values):
        raise SystemExit("--J-list entries must be >= 2")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise SystemExit("--J-list must be strictly increasing")
    return values


def _parse_xi_range(text: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise SystemExit("--xi-range must be a:b:steps")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SystemExit("--xi-range must be a:b:steps with numeric a, b")
    if a <= 0 or b <= 0 or steps < 1:
        raise SystemExit("--xi-range needs positive endpoints and steps >= 1")
    return [float(x) for x in np.linspace(a, b, steps)]


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hypiss",
        description="Certify and simulate 1-D linear hyperbolic balance laws "
                    "with boundary feedback and boundary disturbances.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file (JSON or TOML)")
        p.add_argument("--out", required=True, help="output directory")

    p_cert = sub.add_parser("certify", help="run the static checks and write the report")
    common(p_cert)
    p_cert.set_defaults(fn=cmd_certify)

    p_run = sub.add_parser("run", help="certify, simulate and dump the Lyapunov trace")
    common(p_run)
    p_run.add_argument("--force", action="store_true",
                       help="simulate even if the certificate fails")
    p_run.add_argument("--stride", type=int, default=None,
                       help="record interior snapshots every STRIDE steps")
    p_run.set_defaults(fn=cmd_run)

    p_table = sub.add_parser("table", help="envelope-gap convergence table over J")
    common(p_table)
    p_table.add_argument("--J-list", dest="J_list", default="200,400,800,1600",
                         help="comma-separated strictly increasing cell counts")
    p_table.add_argument("--cfl", type=float, default=None,
                         help="override the scenario Courant number")
    p_table.set_defaults(fn=cmd_table)

    p_sweep = sub.add_parser("sweep", help="gain bounds and envelope constant over xi")
    common(p_sweep)
    p_sweep.add_argument("--xi-range", dest="xi_range", default="0.05:1.0:20",
                         help="xi grid as a:b:steps")
    p_sweep.set_defaults(fn=cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
