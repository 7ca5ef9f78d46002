"""Command line entry point: ``tristep run | verify-lemmas | check-map``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import oracles
from .config import ConfigError, parse_config
from .mappings import (
    PROBLEM_CATALOG,
    catalog_map,
    catalog_problem,
    check_condition_c,
    check_condition_ii,
    check_nonexpansive,
    check_quasi_nonexpansive,
    grid_points,
    linear_gauge,
)
from .report import Report
from .runner import run_experiment
from .schedules import HypothesisViolation

log = logging.getLogger("tristep")


def verify_lemmas(tol: float = 1e-9, seed: int = 0) -> list[Report]:
    """The oracle battery behind ``verify-lemmas``."""
    reports = []
    half = catalog_map("half_interval", divisor=2)
    reports.append(oracles.lemma25_check(half, tol=tol, grid=grid_points(half.domain, 101)))
    suz = catalog_map("suzuki_map")
    reports.append(oracles.lemma25_check(suz, tol=tol, grid=grid_points(suz.domain, 3001)))

    seq = oracles.SequenceTriple(1.0, lambda n: 1.0 / n ** 2, lambda n: 1.0 / n ** 2)
    _, rep = oracles.tan_xu_limit(seq, 100_000, 1e-4)
    reports.append(rep)
    harmonic = oracles.SequenceTriple(1.0, lambda n: 0.0, lambda n: 1.0 / n)
    try:
        oracles.tan_xu_limit(harmonic, 10_000, 1e-4)
        reports.append(Report("non-summable b_n = 1/n is rejected", False, [], 1))
    except HypothesisViolation:
        reports.append(Report("non-summable b_n = 1/n is rejected", True, [], 1))

    for dim in (1, 2, 3):
        pts, w = oracles.random_convexity_cases(1000, dim, seed + dim)
        rep = oracles.convexity_identity_check(pts, w, tol=1e-10)
        rep.name += f" (d={dim})"
        reports.append(rep)
        rep = oracles.four_point_identity_check(pts, w, tol=1e-10)
        rep.name += f" (d={dim})"
        reports.append(rep)
    return reports


def check_map_suite(label: str, grid: int | None = None, tol: float = 1e-9,
                    gauge_slope: float = 0.5) -> list[Report]:
    """Condition (C), nonexpansiveness, quasi-nonexpansiveness and condition
    (II) for a catalog problem. Nonexpansiveness is informational."""
    problem = catalog_problem(label)
    n = grid or (1001 if problem.dim == 1 else 41)
    X = grid_points(problem.domain, n)
    reports = []
    seen = set()
    for T in problem.maps:
        if T.label in seen:
            continue
        seen.add(T.label)
        reports.append(check_condition_c(T, X, tol))
        rep = check_nonexpansive(T, X, tol)
        rep.details["informational"] = True
        reports.append(rep)
        reports.append(check_quasi_nonexpansive(T, problem.fixed_points, X, tol))
    reports.append(check_condition_ii(problem.maps, linear_gauge(gauge_slope),
                                      problem.fixed_points, X, tol))
    return reports


def _print_table(reports, out=None):
    out = out or sys.stdout
    for r in reports:
        tag = "  (info)" if r.details.get("informational") else ""
        print(r.line() + tag, file=out)


def _cmd_run(args) -> int:
    with open(args.config) as fh:
        text = fh.read()
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else None
    result = run_experiment(config, out_dir=args.out, strict=True if args.strict else None,
                            seeds=seeds, plots=True if args.plot else None)
    for s in result.summaries:
        res = "-" if s.final_residuals is None else f"{max(s.final_residuals):.3e}"
        fej = "-" if not s.fejer else ("pass" if all(v["passed"] for v in s.fejer.values())
                                       else "FAIL")
        print(f"seed={s.seed} stop={s.stop_reason} iterations={s.iterations} "
              f"max_residual={res} fejer={fej}" + (f" error={s.error}" if s.error else ""))
    print(f"wrote {len(result.summaries)} run(s) to {result.out_dir}; exit {result.exit_code}")
    return result.exit_code


def _cmd_verify(args) -> int:
    reports = verify_lemmas(args.tol)
    _print_table(reports)
    return 0 if all(reports) else 1


def _cmd_check_map(args) -> int:
    reports = check_map_suite(args.label, args.grid, args.tol, args.gauge_slope)
    _print_table(reports)
    required = [r for r in reports if not r.details.get("informational")]
    return 0 if all(required) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tristep",
                                description="Three-step iterations for multivalued maps.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    r.add_argument("--strict", action="store_true", help="treat hypothesis violations as errors")
    r.add_argument("--seeds", default=None, help="comma-separated seeds (overrides config)")
    r.add_argument("--plot", action="store_true", help="also write residual plots (PNG)")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify-lemmas", help="run the numeric lemma oracles")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=_cmd_verify)

    c = sub.add_parser("check-map", help="grid-check the mapping conditions of a catalog problem")
    c.add_argument("--label", required=True, choices=sorted(PROBLEM_CATALOG))
    c.add_argument("--grid", type=int, default=None, help="grid points per axis")
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--gauge-slope", type=float, default=0.5)
    c.set_defaults(func=_cmd_check_map)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
