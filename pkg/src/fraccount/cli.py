"""Command-line front end emitting CSV/JSON tables for the library.

Exit codes: 0 success, 2 argument or constraint problem, 3 numeric
failure.  CSV uses 17 significant digits so values round-trip exactly;
JSON numbers round-trip by construction.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import combinatorics, counting, montecarlo, verify
from .config import DEFAULT_CONFIG, SeriesConfig
from .errors import ConstraintError, FraccountError, NumericError
from .params import FractalityParams, make_spec

_ENV_OUTPUT_DIR = "FRACCOUNT_OUTPUT_DIR"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _resolve_output(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    directory = os.environ.get(_ENV_OUTPUT_DIR)
    if directory and not os.path.dirname(path):
        path = os.path.join(directory, path)
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(args, params: dict, inputs: dict, columns, rows, footer=None):
    """Write one result table in the selected format."""
    stream, close = _resolve_output(args.output)
    try:
        if args.format == "json":
            doc = {
                "params": params,
                "inputs": inputs,
                "values": {"columns": list(columns), "rows": [list(r) for r in rows]},
                "meta": {
                    "tolerances": {
                        "rel_tol": args.cfg.rel_tol,
                        "abs_tol": args.cfg.abs_tol,
                        "max_terms": args.cfg.max_terms,
                        "z_abs_max": args.cfg.z_abs_max,
                    },
                    "seed": getattr(args, "seed", None),
                },
            }
            if footer:
                doc["values"].update(footer)
            json.dump(doc, stream, indent=2)
            stream.write("\n")
        else:
            stream.write(",".join(columns) + "\n")
            for row in rows:
                stream.write(",".join(_fmt(v) for v in row) + "\n")
            if footer:
                for key, value in footer.items():
                    stream.write(f"{key},{_fmt(value)}\n")
    finally:
        if close:
            stream.close()


def _add_common(parser, with_rate=True, with_seed=False):
    parser.add_argument("--mu", type=float, required=True)
    parser.add_argument("--beta", type=float, required=True)
    if with_rate:
        parser.add_argument("--rate", type=float, default=1.0)
    if with_seed:
        parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--output", default=None, help="file path or - for stdout")
    parser.add_argument("--rel-tol", type=float, default=DEFAULT_CONFIG.rel_tol)
    parser.add_argument("--abs-tol", type=float, default=DEFAULT_CONFIG.abs_tol)
    parser.add_argument("--max-terms", type=int, default=DEFAULT_CONFIG.max_terms)
    parser.add_argument("--z-abs-max", type=float, default=DEFAULT_CONFIG.z_abs_max)


def _time_grid(args) -> list[float]:
    if args.time is not None:
        return [args.time]
    if args.time_start is None or args.time_stop is None:
        raise ConstraintError("provide --time or --time-start/--time-stop")
    return list(np.linspace(args.time_start, args.time_stop, args.time_steps))


def _cfg_from(args) -> SeriesConfig:
    return SeriesConfig(
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        max_terms=args.max_terms,
        z_abs_max=args.z_abs_max,
    )


def _cmd_pmf(args):
    spec = make_spec(args.mu, args.beta, args.rate)
    table = counting.pmf_table(spec, args.time, args.nmax, args.cfg)
    rows = [(n, float(p)) for n, p in enumerate(table.probs)]
    _emit(
        args,
        {"mu": args.mu, "beta": args.beta, "rate": args.rate},
        {"time": args.time, "n_max": table.n_max},
        ("n", "probability"),
        rows,
        footer={"tail_mass": table.tail_mass},
    )


def _cmd_moments(args):
    spec = make_spec(args.mu, args.beta, args.rate)
    columns = (
        "time",
        "mean",
        "raw2",
        "raw3",
        "raw4",
        "variance",
        "central3",
        "central4",
        "skewness",
        "kurtosis_excess",
    )
    rows = []
    for t in _time_grid(args):
        ms = counting.moment_set(spec, t)
        rows.append(
            (
                t,
                ms.raw[0],
                ms.raw[1],
                ms.raw[2],
                ms.raw[3],
                ms.variance,
                ms.central[2],
                ms.central[3],
                ms.skewness,
                ms.kurtosis_excess,
            )
        )
    _emit(
        args,
        {"mu": args.mu, "beta": args.beta, "rate": args.rate},
        {"times": _time_grid(args)},
        columns,
        rows,
    )


def _cmd_interarrival(args):
    spec = make_spec(args.mu, args.beta, args.rate)
    if args.u is not None:
        info = counting.interarrival_laplace_series_info(spec, args.u, args.terms)
        quad = counting.interarrival_laplace_quadrature(spec, args.u, args.cfg)
        _emit(
            args,
            {"mu": args.mu, "beta": args.beta, "rate": args.rate},
            {"u": args.u, "terms": args.terms},
            (
                "u",
                "laplace_series",
                "series_error_estimate",
                "series_terms_used",
                "laplace_quadrature",
            ),
            [(args.u, info.value, info.error_estimate, info.terms_used, quad)],
        )
        return
    if args.tau is not None:
        taus = [args.tau]
    elif args.tau_start is not None and args.tau_stop is not None:
        taus = list(np.linspace(args.tau_start, args.tau_stop, args.tau_steps))
    else:
        raise ConstraintError("provide --tau, --tau-start/--tau-stop, or --u")
    rows = [
        (tau, counting.interarrival_pdf(spec, tau, args.cfg),
         counting.survival_zero(spec, tau, args.cfg))
        for tau in taus
    ]
    _emit(
        args,
        {"mu": args.mu, "beta": args.beta, "rate": args.rate},
        {"taus": taus},
        ("tau", "density", "survival"),
        rows,
    )


def _cmd_bell(args):
    params = FractalityParams(args.mu, args.beta)
    cap = max(args.max, combinatorics.DEFAULT_CAP)
    rows = [
        (m, combinatorics.frac_polynomial(params, args.x, m, cap))
        for m in range(args.max + 1)
    ]
    _emit(
        args,
        {"mu": args.mu, "beta": args.beta},
        {"x": args.x, "max": args.max},
        ("m", "value"),
        rows,
    )


def _cmd_stirling(args):
    rows = []
    cap = max(args.max, combinatorics.DEFAULT_CAP)
    if args.kind == "frac":
        if args.mu is None or args.beta is None:
            raise ConstraintError("--kind frac requires --mu and --beta")
        params = FractalityParams(args.mu, args.beta)
        for m in range(args.max + 1):
            for l in range(m + 1):
                rows.append((m, l, combinatorics.frac_comb_number(params, m, l, cap)))
    else:
        fn = combinatorics.stirling2 if args.kind == "second" else combinatorics.stirling1_signed
        for m in range(args.max + 1):
            for l in range(m + 1):
                rows.append((m, l, fn(m, l, cap)))
    _emit(
        args,
        {"mu": args.mu, "beta": args.beta},
        {"kind": args.kind, "max": args.max},
        ("m", "l", "value"),
        rows,
    )


def _parse_jump(text: str) -> montecarlo.JumpDistribution:
    kind, _, rest = text.partition(":")
    try:
        if kind == "degenerate":
            return montecarlo.degenerate_jump(float(rest))
        if kind == "exponential":
            return montecarlo.exponential_jump(float(rest))
        if kind == "normal":
            loc, scale = (float(v) for v in rest.split(","))
            return montecarlo.normal_jump(loc, scale)
    except ValueError as exc:
        raise ConstraintError(f"bad jump spec {text!r}") from exc
    raise ConstraintError(
        "jump must be degenerate:VALUE, exponential:MEAN, or normal:MEAN,STD"
    )


def _cmd_simulate(args):
    spec = make_spec(args.mu, args.beta, args.rate)
    rng = montecarlo.make_rng(montecarlo.RngSpec(args.seed))
    if args.what == "counts":
        samples = montecarlo.sample_counts(spec, args.time, rng, args.samples, args.cfg)
    elif args.what == "first-arrival":
        samples = montecarlo.sample_first_arrivals(spec, args.samples, rng, args.cfg)
        samples = samples[np.isfinite(samples)]
    elif args.what == "compound":
        jump = _parse_jump(args.jump)
        samples = montecarlo.sample_compounds(
            spec, args.time, jump, rng, args.samples, args.cfg
        )
    else:
        counts = montecarlo.simulate_counts_classical(
            spec, args.time, args.samples, rng, args.cfg
        )
        samples = counts
    summ = montecarlo.summarize(samples)
    columns = (
        "n_samples",
        "mean",
        "variance",
        "skewness",
        "kurtosis_excess",
        "se_mean",
        "se_variance",
    )
    rows = [
        (
            summ.n_samples,
            summ.mean,
            summ.variance,
            summ.skewness,
            summ.kurtosis_excess,
            summ.se_mean,
            summ.se_variance,
        )
    ]
    if args.raw:
        columns = ("sample",)
        rows = [(float(s),) for s in samples]
    _emit(
        args,
        {"mu": args.mu, "beta": args.beta, "rate": args.rate},
        {
            "what": args.what,
            "time": args.time,
            "samples": args.samples,
            "jump": args.jump,
        },
        columns,
        rows,
    )


def _cmd_verify(args):
    results = verify.run_acceptance(
        n_counts=args.samples,
        n_ks=args.ks_samples,
        seed=args.seed,
        fast=args.fast,
    )
    print(verify.format_results(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraccount",
        description="Fractional non-homogeneous counting process numerics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="probability table at a fixed time")
    _add_common(p)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--nmax", type=int, default=None)
    p.set_defaults(func=_cmd_pmf)

    p = sub.add_parser("moments", help="raw/central moments and shape statistics")
    _add_common(p)
    p.add_argument("--time", type=float, default=None)
    p.add_argument("--time-start", type=float, default=None)
    p.add_argument("--time-stop", type=float, default=None)
    p.add_argument("--time-steps", type=int, default=21)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("interarrival", help="waiting-time density and transforms")
    _add_common(p)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--tau-start", type=float, default=None)
    p.add_argument("--tau-stop", type=float, default=None)
    p.add_argument("--tau-steps", type=int, default=21)
    p.add_argument("--u", type=float, default=None, help="Laplace argument")
    p.add_argument("--terms", type=int, default=64)
    p.set_defaults(func=_cmd_interarrival)

    p = sub.add_parser("bell", help="moment polynomials / generalized Bell numbers")
    _add_common(p, with_rate=False)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--x", type=float, default=1.0)
    p.set_defaults(func=_cmd_bell)

    p = sub.add_parser("stirling", help="Stirling triangles, exact or fractional")
    p.add_argument("--kind", choices=("second", "first", "frac"), default="second")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.add_argument("--rel-tol", type=float, default=DEFAULT_CONFIG.rel_tol)
    p.add_argument("--abs-tol", type=float, default=DEFAULT_CONFIG.abs_tol)
    p.add_argument("--max-terms", type=int, default=DEFAULT_CONFIG.max_terms)
    p.add_argument("--z-abs-max", type=float, default=DEFAULT_CONFIG.z_abs_max)
    p.set_defaults(func=_cmd_stirling)

    p = sub.add_parser("simulate", help="seeded sampling with a moment summary")
    _add_common(p, with_seed=True)
    p.add_argument(
        "--what",
        choices=("counts", "first-arrival", "path", "compound"),
        default="counts",
    )
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--jump", default="degenerate:1")
    p.add_argument("--raw", action="store_true", help="emit raw samples")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run the full oracle/property suite")
    p.add_argument("--grid", choices=("default",), default="default")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--ks-samples", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=20250811)
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=_cmd_verify, cfg=DEFAULT_CONFIG)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "cfg"):
        try:
            args.cfg = _cfg_from(args)
        except FraccountError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        result = args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except FraccountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return result or 0


if __name__ == "__main__":
    sys.exit(main())
