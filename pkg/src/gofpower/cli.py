"""Command-line interface.

Commands: spectrum | cdf | power | simulate | examples.  Exit codes:
0 on success, 2 for input/parse problems, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .model import (
    ModelError,
    builtin_examples,
    model_from_spec,
    perturbation_from_spec,
    zero_perturbation,
)
from .montecarlo import empirical_power, simulate_statistics
from .power import default_grid, power_curve
from .quadform import NumericalFailureError, QuadratureConfig, cdf
from .spectrum import DegenerateModelError, EigensolverError, compute_spectrum
from .svgplot import power_overlay_svg

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_MC_ALPHA_GRID = np.arange(1, 200) / 200.0


def _add_quad_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--abs-tol", type=float, default=1e-9)
    p.add_argument("--rel-tol", type=float, default=1e-9)
    p.add_argument("--stability-threshold", type=float, default=1e8)
    p.add_argument("--max-subdivisions", type=int, default=200)


def _add_model_args(p: argparse.ArgumentParser, pert_default=None) -> None:
    p.add_argument("--model", required=True,
                   help="uniform:m | poisson:lambda[:tol] | file:path")
    p.add_argument("--pert", default=pert_default,
                   help="alternating:amp | zero | file:path")


def _quad_config(args) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                            max_subdivisions=args.max_subdivisions,
                            stability_threshold=args.stability_threshold)


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("GOFPOWER_THREADS")
    return int(env) if env else None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gofpower",
        description="Asymptotic power of the Euclidean-distance goodness-of-fit test")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="print the limit-law parameters as JSON")
    _add_model_args(sp, pert_default="zero")
    sp.add_argument("--out", help="write JSON here instead of stdout")

    sc = sub.add_parser("cdf", help="evaluate the limiting CDF at given points")
    _add_model_args(sc, pert_default="zero")
    sc.add_argument("--x", type=float, nargs="+", required=True)
    _add_quad_args(sc)

    pw = sub.add_parser("power", help="write a power curve as CSV")
    _add_model_args(pw)
    pw.add_argument("--grid-step", type=float, default=1.0 / 2000.0)
    pw.add_argument("--grid-max", type=float, default=5.0)
    pw.add_argument("--out", required=True, help="CSV output path")
    pw.add_argument("--svg", help="optional SVG plot path")
    _add_quad_args(pw)

    sim = sub.add_parser("simulate", help="Monte-Carlo statistics at finite n")
    _add_model_args(sim, pert_default="zero")
    sim.add_argument("--n", type=int, default=10 ** 6)
    sim.add_argument("--trials", type=int, default=40_000)
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--out", required=True, help="statistics dump path")
    sim.add_argument("--dump-format", choices=("csv", "npy"), default="csv")

    ex = sub.add_parser("examples", help="reproduce the four built-in benchmark cases")
    ex.add_argument("--out-dir", default=".", help="output directory")
    ex.add_argument("--n", type=int, default=10 ** 6)
    ex.add_argument("--trials", type=int, default=40_000)
    ex.add_argument("--seed", type=int, default=1)
    ex.add_argument("--threads", type=int, default=None)
    ex.add_argument("--grid-step", type=float, default=1.0 / 2000.0)
    ex.add_argument("--grid-max", type=float, default=5.0)
    _add_quad_args(ex)
    return p


def _resolve_case(args):
    model = model_from_spec(args.model)
    pert = perturbation_from_spec(args.pert, model.m)
    return model, pert


def cmd_spectrum(args) -> int:
    model, pert = _resolve_case(args)
    spec = compute_spectrum(model, pert)
    text = spec.to_json(indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def cmd_cdf(args) -> int:
    model, pert = _resolve_case(args)
    spec = compute_spectrum(model, pert)
    cfg = _quad_config(args)
    for x in args.x:
        ev = cdf(x, spec, cfg)
        flag = "" if ev.converged else " converged=False"
        print(f"x={x:.12g} cdf={ev.value:.12g} err={ev.abs_error_estimate:.3e} "
              f"nodes={ev.nodes_used} method={ev.method}{flag}")
    return EXIT_OK


def cmd_power(args) -> int:
    model, pert = _resolve_case(args)
    grid = default_grid(args.grid_step, args.grid_max)
    curve = power_curve(model, pert, grid, _quad_config(args))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        curve.write_csv(fh)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            power_overlay_svg(fh, curve.alpha, curve.power)
    print(f"wrote {args.out}: {curve.x.size} points, "
          f"q0={curve.meta.max_nodes_null} qa={curve.meta.max_nodes_alt}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model, pert = _resolve_case(args)
    sim = simulate_statistics(model, pert, args.n, args.trials, args.seed,
                              threads=_threads(args))
    if args.dump_format == "npy":
        np.save(args.out, sim.statistics)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write("statistic\n")
            for v in sim.statistics:
                fh.write(f"{v:.17g}\n")
    print(f"wrote {args.out}: {sim.trials} trials at n={sim.n}, seed={sim.seed}")
    return EXIT_OK


def cmd_examples(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = _quad_config(args)
    grid = default_grid(args.grid_step, args.grid_max)
    threads = _threads(args)
    costs_path = out_dir / "costs.csv"
    written: list[Path] = [costs_path]
    try:
        with open(costs_path, "w", encoding="utf-8", newline="") as costs:
            writer = csv.writer(costs)
            writer.writerow(["example", "m", "q0", "qa", "t"])
            for name, model, pert in builtin_examples():
                t0 = time.perf_counter()
                curve = power_curve(model, pert, grid, cfg)
                curve_path = out_dir / f"{name}_curve.csv"
                written.append(curve_path)
                with open(curve_path, "w", encoding="utf-8", newline="") as fh:
                    curve.write_csv(fh)

                sim_null = simulate_statistics(
                    model, zero_perturbation(model.m), args.n, args.trials,
                    args.seed, threads=threads)
                sim_alt = simulate_statistics(
                    model, pert, args.n, args.trials, args.seed + 1,
                    threads=threads)
                points = empirical_power(sim_null, sim_alt, _MC_ALPHA_GRID)
                mc_path = out_dir / f"{name}_mc.csv"
                written.append(mc_path)
                with open(mc_path, "w", encoding="utf-8", newline="") as fh:
                    fh.write("alpha,power,std_error\n")
                    for pt in points:
                        fh.write(f"{pt.alpha:.17g},{pt.power:.17g},{pt.std_error:.17g}\n")

                svg_path = out_dir / f"{name}.svg"
                written.append(svg_path)
                with open(svg_path, "w", encoding="utf-8") as fh:
                    power_overlay_svg(
                        fh, curve.alpha, curve.power,
                        [pt.alpha for pt in points], [pt.power for pt in points],
                        title=name)

                alt_spec = compute_spectrum(model, pert)
                method = cdf(1.0, alt_spec, cfg).method
                writer.writerow([name, model.m, curve.meta.max_nodes_null,
                                 curve.meta.max_nodes_alt,
                                 f"{curve.meta.seconds_per_point:.6g}"])
                print(f"{name}: m={model.m} q0={curve.meta.max_nodes_null} "
                      f"qa={curve.meta.max_nodes_alt} "
                      f"t={curve.meta.seconds_per_point:.3g}s method={method}")
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return EXIT_OK


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "cdf": cmd_cdf,
    "power": cmd_power,
    "simulate": cmd_simulate,
    "examples": cmd_examples,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (DegenerateModelError, EigensolverError, NumericalFailureError,
            ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
