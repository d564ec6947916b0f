"""Command-line interface: ``boxes-sim {probability,snapshot,sample,verify}``.

Exit codes: 0 success, 1 validation failure, 2 check failure, 3 IO failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as configmod
from .errors import BoxesError, InvalidConfig
from .experiment import build_scenario, run_ensemble, snapshot_sequence
from .fieldio import time_label, write_field, write_heatmap
from .optics import Box
from .transitions import Formulation, probability
from .verify import CHECKS, PROBABILITY_TOL, run_checks

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_scenario(args, overrides=None):
    raw = {}
    if args.config:
        try:
            raw = configmod.load(args.config)
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc.strerror or exc}", EXIT_IO) from None
    for (sec, key), value in (overrides or {}).items():
        raw.setdefault(sec, {})[key] = value
    return build_scenario(raw)


def _fmt(x: float, full: bool) -> str:
    return repr(x) if full else f"{x:.4g}"


def _fmt_c(z: complex, full: bool) -> str:
    if full:
        return f"{z.real!r}{z.imag:+r}j"
    return f"{z.real:+.4g}{z.imag:+.4g}j"


def cmd_probability(args, out) -> int:
    scenario = _load_scenario(args)
    forms = [Formulation.parse(args.formulation)] if args.formulation else list(Formulation)
    boxes = [Box.parse(args.box)] if args.box else list(Box)
    results = [probability(scenario, f, b) for f in forms for b in boxes]
    g = scenario.grid
    if args.json:
        doc = {
            "grid": {"nx": g.nx, "ny": g.ny, "dx": g.dx, "dy": g.dy},
            "tolerance": PROBABILITY_TOL,
            "results": [
                {
                    "formulation": r.formulation.value,
                    "box": r.box.value,
                    "amplitude": [r.amplitude.real, r.amplitude.imag],
                    "prefactor": r.prefactor,
                    "probability": r.probability,
                    "eval_time": r.eval_time,
                }
                for r in results
            ],
        }
        out.write(json.dumps(doc) + "\n")
        return EXIT_OK
    if len(results) == 1 and args.formulation and args.box:
        out.write(_fmt(results[0].probability, args.full_precision) + "\n")
        return EXIT_OK
    out.write(
        f"grid {g.nx}x{g.ny}, dx={g.dx:g}, dy={g.dy:g}, co-moving; "
        f"quadrature tolerance +/-{PROBABILITY_TOL:g}\n"
    )
    out.write(f"{'form':<5} {'box':<4} {'t':>8} {'amplitude':>24} {'factor':>7} {'probability':>12}\n")
    for r in results:
        name = "P_c" if r.formulation is Formulation.CF else "P_t"
        out.write(
            f"{r.formulation.value:<5} {r.box.value:<4} {r.eval_time:>8g} "
            f"{_fmt_c(r.amplitude, args.full_precision):>24} {r.prefactor:>7.4g} "
            f"{name}={_fmt(r.probability, args.full_precision)}\n"
        )
    return EXIT_OK


def cmd_snapshot(args, out) -> int:
    form = Formulation.parse(args.formulation)
    scenario = _load_scenario(args)
    box = Box.parse(args.final_box) if args.final_box else None
    panels = snapshot_sequence(scenario, form, box)
    outdir = Path(args.out)
    quantity = "psi_density" if form is Formulation.CF else "transition_density"
    prefix = form.value.lower()
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        for t, f in panels:
            stem = outdir / f"{prefix}_{time_label(t)}"
            gp = write_field(stem.with_suffix(".grid"), f, quantity)
            hp = write_heatmap(stem.with_suffix(".pgm"), f)
            out.write(f"{gp}\n{hp}\n")
    except OSError as exc:
        raise CliError(f"cannot write snapshot to {exc.filename or outdir}: {exc.strerror or exc}", EXIT_IO) from None
    return EXIT_OK


def cmd_sample(args, out, err=sys.stderr) -> int:
    overrides = {}
    if args.renormalize_outcomes:
        overrides[("run", "renormalize_outcomes")] = True
    scenario = _load_scenario(args, overrides)
    n = args.n if args.n is not None else scenario.n_runs
    if n < 1:
        raise InvalidConfig([("-n", f"must be >= 1, got {n}")])
    seed = args.seed if args.seed is not None else scenario.seed
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        err.write(f"seed {seed}\n")
    if not 0 <= seed < 2**64:
        raise InvalidConfig([("--seed", f"must be in [0, 2^64), got {seed}")])
    form = Formulation.parse(args.formulation or "cf")

    log = None
    try:
        if args.log:
            log = open(args.log, "w", encoding="utf-8")
        sink = log if log is not None else out
        summary = run_ensemble(
            scenario, form, n, seed, on_record=lambda r: sink.write(json.dumps(r.to_dict()) + "\n")
        )
    except OSError as exc:
        raise CliError(f"cannot write run log {args.log}: {exc.strerror or exc}", EXIT_IO) from None
    finally:
        if log is not None:
            log.close()

    if args.json:
        out.write(json.dumps({"summary": summary}) + "\n")
    else:
        out.write(
            f"# {summary['formulation']} n={n} seed={seed} outcomes={summary['outcome_model']}\n"
            f"# {'outcome':<12} {'count':>8} {'frequency':>10} {'probability':>12} {'band':>9}  ok\n"
        )
        conf = summary["confidence"]
        for k, c in summary["counts"].items():
            out.write(
                f"# {k:<12} {c:>8d} {summary['frequencies'][k]:>10.4f} "
                f"{summary['probabilities'][k]:>12.4f} {conf['half_widths'][k]:>9.4f}  "
                f"{'pass' if conf['pass'][k] else 'FAIL'}\n"
            )
    return EXIT_OK


def cmd_verify(args, out) -> int:
    scenario = _load_scenario(args)
    results = run_checks(scenario, args.check or None, grid_n=args.grid, dt=args.dt)
    if args.json:
        out.write(json.dumps([r.__dict__ for r in results]) + "\n")
    else:
        out.write(f"{'check':<22} {'value':>11} {'tolerance':>10}  result  detail\n")
        for r in results:
            out.write(
                f"{r.name:<22} {r.value:>11.3e} {r.tolerance:>10.1e}  "
                f"{'pass' if r.passed else 'FAIL':<6}  {r.detail}\n"
            )
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxes-sim", description="two-box splitter simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML scenario file")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probability", parents=[common], help="CF collapse and TSF transition probabilities")
    p.add_argument("--formulation", choices=["cf", "tsf"], type=str.lower)
    p.add_argument("--box", "--final-box", dest="box", choices=["b1", "b2"], type=str.lower)
    p.add_argument("--full-precision", action="store_true")
    p.set_defaults(func=cmd_probability)

    p = sub.add_parser("snapshot", parents=[common], help="write panel density fields and heatmaps")
    p.add_argument("--formulation", choices=["cf", "tsf"], type=str.lower, required=True)
    p.add_argument("--final-box", "--box", dest="final_box", choices=["b1", "b2"], type=str.lower)
    p.add_argument("--out", default="snapshots")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo outcome sampling")
    p.add_argument("--formulation", choices=["cf", "tsf"], type=str.lower)
    p.add_argument("-n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--renormalize-outcomes", action="store_true")
    p.add_argument("--log", help="write run records here instead of stdout")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", parents=[common], help="run numerical self-checks")
    p.add_argument("--grid", type=int, help="samples per axis over the configured window")
    p.add_argument("--dt", type=float, default=4000.0)
    p.add_argument("--check", action="append", choices=sorted(CHECKS))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.func is cmd_sample:
            return cmd_sample(args, out, err)
        return args.func(args, out)
    except InvalidConfig as exc:
        for where, msg in exc.problems:
            err.write(f"error: {where}: {msg}\n")
        return EXIT_INVALID
    except CliError as exc:
        err.write(f"error: {exc}\n")
        return exc.code
    except BoxesError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
