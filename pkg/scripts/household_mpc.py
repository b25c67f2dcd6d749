#!/usr/bin/env python3
"""CLI entry point for the household economic MPC.

Exit codes: 0 success; 1 failed solve or validation suite, or an I/O
failure; 2 configuration or input-file error, or bad usage.
"""

import argparse
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from lib.config import ConfigDocument, load_config
from lib.errors import (
    ConfigError, HouseholdMpcError, LpFormatError, ModelError, ScenarioFormatError,
)
from lib.log import log
from lib.lp_writer import write_lp
from lib.metrics import compute_metrics, flexibility_savings
from lib.mpc import HorizonProblem, assemble_lp, solve_horizon
from lib.results_writer import TABLE_COLUMNS, write_grid_results, write_results
from lib.scenario import generate_synthetic_scenario
from lib.scenario_io import load_scenario, write_scenario
from lib.sim import build_grid, run_case_grid, run_receding_horizon, segment_loads
from lib.table_format import GRID_COLUMNS, PLAN_COLUMNS, plan_summary_records, print_table
from lib.validation import run_all

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document (default: shipped defaults)")
    common.add_argument("--out", default=None, help="Output directory (default: ./results)")
    common.add_argument("--seed", type=int, default=None,
                        help="Seed of the synthetic scenario and the validation suites")
    common.add_argument("--threads", type=int, default=None, help="Parallel grid cells")
    common.add_argument("--days", type=int, default=None,
                        help="Scenario length in days (synthetic) or days kept (from files)")

    parser = argparse.ArgumentParser(
        description="Economic MPC of a single-zone household: horizon solves, "
        "receding-horizon runs, case grids and oracle validation.",
        epilog="Examples:\n"
        "  %(prog)s simulate-day --day 2\n"
        "  %(prog)s simulate-year --config house.json --out results\n"
        "  %(prog)s case-grid --grid ua-cost --threads 4\n"
        "  %(prog)s validate --seed 7\n"
        "  %(prog)s export-lp --day 0 --out lp",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    day = sub.add_parser("simulate-day", parents=[common], help="Solve one horizon and print its plan")
    day.add_argument("--day", type=int, default=0, help="Day index of the horizon start")

    sub.add_parser("simulate-year", parents=[common],
                   help="Receding-horizon run over the whole scenario")

    grid = sub.add_parser("case-grid", parents=[common], help="Metrics over a grid of cases")
    grid.add_argument("--grid", default=None,
                      help="Preset: comfort, ua-cost, ua-share or lighting (default: from config)")

    val = sub.add_parser("validate", parents=[common], help="Run the oracle suites")
    val.add_argument("--scale", type=float, default=1.0,
                     help="Fraction of the default case counts to run")

    lp = sub.add_parser("export-lp", parents=[common], help="Write the LP of one horizon")
    lp.add_argument("--day", type=int, default=0, help="Day index of the horizon start")
    return parser


def _load_document(args):
    # type: (argparse.Namespace) -> ConfigDocument
    doc = load_config(args.config) if args.config else ConfigDocument()
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if args.days is not None and args.days < 1:
        raise ConfigError("--days must be >= 1")
    return doc


def _scenario(doc, args):
    sim = doc.simulation
    seed = sim.seed if args.seed is None else args.seed
    if doc.series:
        scenario = load_scenario(doc.series_paths, sim.dt, doc.building)
        log("read scenario: %d periods from %s" % (
            scenario.n_periods, os.path.dirname(str(next(iter(doc.series_paths.values()))))))
        if args.days is not None:
            scenario = scenario.window(0, min(scenario.n_periods, args.days * scenario.periods_per_day))
        return scenario
    days = sim.days if args.days is None else args.days
    return generate_synthetic_scenario(days, sim.dt, seed, building=doc.building)


def _out_dir(args):
    return Path(args.out or "results")


def _day_problem(doc, args):
    scenario = _scenario(doc, args)
    config = doc.simulation_config()
    ppd = scenario.periods_per_day
    start = args.day * ppd
    if not 0 <= start < scenario.n_periods:
        raise ConfigError("--day %d is outside the %d-day scenario" % (args.day, scenario.n_periods // ppd))
    stop = min(scenario.n_periods, start + config.commit_len + config.lookahead_len)
    building = doc.building.with_ua_factor(config.ua_ra_factor)
    return HorizonProblem.create(
        building, config.heater, config.initial_state,
        prices=scenario.prices[start:stop],
        disturbances=scenario.disturbances(start, stop, config.windowless),
        comfort=doc.comfort(),
        loads=segment_loads(doc.appliances, scenario, start, min(config.commit_len, stop - start)),
        dt=scenario.dt,
        lighting_enabled=config.lighting_enabled,
        day_offset=scenario.day_offset(start),
    )


def _simulate_day(doc, args):
    plan = solve_horizon(_day_problem(doc, args))
    print_table(plan_summary_records(plan), PLAN_COLUMNS)
    return EXIT_OK


def _simulate_year(doc, args):
    scenario = _scenario(doc, args)
    sim = doc.simulation
    result = run_receding_horizon(scenario, doc.building, doc.simulation_config(), doc.comfort(),
                                  doc.appliances)
    metrics = compute_metrics(result, scenario, sim.low_price_threshold, sim.setpoint_band)
    out_dir = _out_dir(args)
    paths = write_results(result, metrics, out_dir)
    if not doc.series:
        write_scenario(scenario, out_dir / "scenario")
    for kind, path in sorted(paths.items()):
        log("wrote %s: %s" % (kind, path))
    record = dict(metrics.to_dict(), label=result.config.label)
    print_table([record], [c for c in TABLE_COLUMNS if c[0] in record])
    print("Solved %d segments in %.1fs" % (len(result.lp_iterations), result.solve_seconds))
    return EXIT_OK


def _case_grid(doc, args):
    scenario = _scenario(doc, args)
    sim = doc.simulation
    configs = build_grid(args.grid or sim.grid, doc.simulation_config())
    rows = run_case_grid(
        scenario, doc.building, configs,
        comfort_overrides=doc.comfort_field_overrides(),
        appliances=doc.appliances,
        threads=sim.threads if args.threads is None else args.threads,
        low_price_threshold=sim.low_price_threshold,
        setpoint_band=sim.setpoint_band,
    )
    records = [row.to_record() for row in rows]
    paths = write_grid_results(rows, _out_dir(args))
    for kind, path in sorted(paths.items()):
        log("wrote %s: %s" % (kind, path))
    print_table(records, GRID_COLUMNS)
    savings = flexibility_savings(records)
    if savings:
        print()
        print_table(savings, [("saving_pct", "SAVING %"), ("annual_cost", "COST EUR"),
                              ("noflex_cost", "NOFLEX EUR"), ("label", "CASE")])
    failed = [r for r in rows if r.error]
    return EXIT_FAILED if failed else EXIT_OK


def _validate(doc, args):
    seed = doc.simulation.seed if args.seed is None else args.seed
    if not args.scale > 0:
        raise ConfigError("--scale must be > 0")
    results = run_all(seed, args.scale)
    for res in results:
        print(res.summary())
        for failure in res.failures[:5]:
            print("  " + failure)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def _export_lp(doc, args):
    lp, _ = assemble_lp(_day_problem(doc, args))
    path = write_lp(lp, _out_dir(args) / ("day%03d.lp" % args.day), name="day%d" % args.day)
    log("wrote LP: %s" % path)
    print("%s: %d variables, %d equality rows, %d inequality rows"
          % (path, lp.n_vars, len(lp.eq_rows), len(lp.ineq_rows)))
    return EXIT_OK


_COMMANDS = {
    "simulate-day": _simulate_day,
    "simulate-year": _simulate_year,
    "case-grid": _case_grid,
    "validate": _validate,
    "export-lp": _export_lp,
}


def cli(argv=None):
    # type: (list) -> int
    """Run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        doc = _load_document(args)
        return _COMMANDS[args.command](doc, args)
    except (ConfigError, ModelError, LpFormatError, ScenarioFormatError) as exc:
        print("Error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except HouseholdMpcError as exc:
        print("Error: %s" % exc, file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print("Error: %s" % exc, file=sys.stderr)
        return EXIT_FAILED


def main():
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
