"""Command-line entry point: ``qkrylov sweep|model|bounds|pencil``.

Exit codes: 0 success, 2 configuration error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .bounds import BoundInputs, evaluate_bounds
from .errors import CapacityError, ConfigError, PreconditionError
from .experiments.config import SweepConfig
from .experiments.output import emit_outputs
from .experiments.sweep import prepare_model, run_sweep, summarize
from .pencil import build_exact_pencil

log = logging.getLogger("qkrylov")


def _sigma_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}") from exc


def _dt(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"dt must be 'auto' or a number, got {text!r}") from exc


def _config_from_args(args) -> SweepConfig:
    cfg = SweepConfig.load(args.config) if args.config else SweepConfig()
    return cfg.with_overrides(
        sigmas=args.sigma,
        d_max=args.d_max,
        trials=args.trials,
        master_seed=args.seed,
        out_dir=args.out,
        epsilon_rule=args.epsilon_rule,
        dt=args.dt,
        sector=False if args.no_sector else None,
        workers=args.workers,
    )


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    model = prepare_model(cfg)
    t0 = time.perf_counter()
    rows = run_sweep(cfg, model)
    stats, fits = summarize(rows, cfg.converged_window)
    paths = emit_outputs(rows, stats, fits, cfg, model)
    log.info("sweep finished in %.1fs", time.perf_counter() - t0)
    for s in stats:
        print(f"sigma={s.sigma:.1e}  pos={s.posMedian:.3e}  neg={s.negMedian:.3e}  "
              f"chi={s.chiMedian:.3e}  upper={s.upperBound:.3e}  |lower|={s.lowerMagnitude:.1f}")
    if "positive" in fits:
        print(f"positive-error fit exponent: {fits['positive']['exponent']:.3f}")
    viol = sum(r.upperViolations + r.lowerViolations for r in rows)
    print(f"bound violations: {viol}")
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_model(args) -> int:
    cfg = _config_from_args(args)
    model = prepare_model(cfg)
    out = model.quantities.as_dict()
    out["dt"] = model.dt
    out["dim"] = model.spec.dim
    print(json.dumps(out, indent=2))
    return 0


def cmd_pencil(args) -> int:
    cfg = _config_from_args(args)
    model = prepare_model(cfg)
    p = build_exact_pencil(model.spec, model.state, args.d, model.dt)
    text = "\n".join(p.to_csv_rows()) + "\n" if args.format == "csv" else p.to_json() + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bounds(args) -> int:
    inp = BoundInputs(
        dH=args.dH, dS=args.dS, hNorm=args.h_norm, epsilon=args.epsilon, d=args.d,
        gamma0sq=args.gamma0sq, Delta=args.gap, R=args.range if args.range is not None else 2 * args.h_norm,
    )
    print(json.dumps(evaluate_bounds(inp).to_dict(), indent=2))
    return 0


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="sweep configuration JSON")
    p.add_argument("--sigma", type=_sigma_list, help="comma-separated noise widths")
    p.add_argument("--d-max", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--epsilon-rule", help="standard (0.1*D*sigma) | fixed:<value> | scaled:<c> (epsilon = c*D*sigma)")
    p.add_argument("--dt", type=_dt, help="timestep or 'auto' (pi/R)")
    p.add_argument("--no-sector", action="store_true", help="use the full Hilbert space")
    p.add_argument("--workers", type=int, help="worker processes for (sigma, d) cells")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkrylov", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a noise/dimension sweep and write CSV, JSON and SVG")
    _add_config_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("model", help="print spectral quantities of the configured model")
    _add_config_args(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("pencil", help="dump the exact pencil for one d")
    _add_config_args(p)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pencil)

    p = sub.add_parser("bounds", help="evaluate bounds from user-supplied norm estimates")
    p.add_argument("--dH", type=float, required=True, help="||H' - H||")
    p.add_argument("--dS", type=float, required=True, help="||S' - S||")
    p.add_argument("--h-norm", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--gamma0sq", type=float, required=True)
    p.add_argument("--gap", type=float, required=True)
    p.add_argument("--range", type=float)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
