#!/usr/bin/env python3
"""
ppkit runner — permutation polynomials of F_{q^2} from the command line
=======================================================================
Check whether members of the family

    f(x) = (ax^q + bx + c)^r φ((ax^q + bx + c)^((q^2-1)/d)) + ux^q + vx

permute F_{q^2}, by rule and by brute force.

Usage:
    python ppkit_runner.py verify --field 13 --rule Cor2 --params '{"a":"1","b":"1","u":"1","v":"-1","d":6,"phi":"1:1"}'
    python ppkit_runner.py verify --preset example4
    python ppkit_runner.py verify --field 2 --poly "2:1, 1:1, 2:1, 1:xi"
    python ppkit_runner.py crossval --field 5 --rule Thm3,Cor3 --budget 500 --seed 1
    python ppkit_runner.py search --field 2^2 --rule Cor5 --cpp --limit 10
    python ppkit_runner.py tables --field 11 unity --n 5

Exit codes: 0 all agree, 1 a rule disagreed with brute force, 2 bad input.
"""

import argparse
import csv
import json
import logging
import os
import sys

from grid_spec import load_grid
from rules import RULE_IDS
from sweep_interface import MODE_BOTH, MODES, PRESETS, CSV_COLUMNS, SweepRunnerInterface, load_config

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_INPUT = 2

ICONS = {"success": "✅", "error": "❌", "warning": "⚠️", "info": "📋", "progress": "🔍"}


def get_env(name, default=None):
    """Get environment variable with optional default."""
    return os.getenv(name, default)


def say(message, severity="info"):
    print(f"{ICONS.get(severity, '')} {message}", file=sys.stderr)


def print_env_help():
    """Print environment variables help."""
    print("""
╔══════════════════════════════════════════════════════════════╗
║         ENVIRONMENT VARIABLES                                ║
╠══════════════════════════════════════════════════════════════╣
║    PPKIT_CONFIG        Config file (ppkit_config.json)       ║
║    PPKIT_TABLE_BOUND   Largest q^2 tabulated (65536)         ║
║    PPKIT_WORKERS       Sweep worker count (1)                ║
║    PPKIT_SEED          Sampling seed (0)                     ║
║    PPKIT_LOG_LEVEL     DEBUG / INFO / WARNING (INFO)         ║
╚══════════════════════════════════════════════════════════════╝

Command-line flags override the environment, which overrides the config file.
""")


# ─── Settings ─────────────────────────────────────────

def effective_config(args):
    cfg = load_config(getattr(args, "config", None))
    env = {
        "table_bound": get_env("PPKIT_TABLE_BOUND"),
        "workers": get_env("PPKIT_WORKERS"),
        "seed": get_env("PPKIT_SEED"),
        "log_level": get_env("PPKIT_LOG_LEVEL"),
    }
    for key, value in env.items():
        if value is not None:
            cfg[key] = value if key == "log_level" else int(value)
    for key in ("workers", "seed", "budget"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "progress", False):
        cfg["progress"] = True
    return cfg


def read_json_arg(value):
    """Inline JSON or @path."""
    if value is None:
        return {}
    if value.startswith("@"):
        with open(value[1:], "r") as f:
            return json.load(f)
    return json.loads(value)


def write_reports(reports, args):
    if getattr(args, "json", None):
        with open(args.json, "w") as f:
            for report in reports:
                f.write(report.to_json() + "\n")
    if getattr(args, "csv", None):
        with open(args.csv, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for report in reports:
                writer.writerow(report.csv_row())


# ─── Subcommands ──────────────────────────────────────

def cmd_verify(runner, args):
    if args.preset:
        if args.preset not in PRESETS:
            raise KeyError(f"unknown preset {args.preset!r}; known: {', '.join(PRESETS)}")
        report = runner.verify_preset(args.preset, args.mode, args.cpp)
    elif args.poly:
        report = runner.verify_poly(args.field, args.poly, args.cpp)
    else:
        report = runner.verify(args.field, read_json_arg(args.params), args.rule, args.mode, args.cpp)
    print(report.to_json())
    write_reports([report], args)
    if not report.agree:
        say(f"{report.rule}: predicted {report.predicted}, brute force {report.brute_force}", "error")
        return EXIT_DISAGREE
    say(f"{report.rule}: predicted {report.predicted}, brute force {report.brute_force}", "success")
    return EXIT_OK


def _rule_list(text):
    if text in (None, "all"):
        return list(RULE_IDS)
    return [item.strip() for item in text.split(",") if item.strip()]


def cmd_crossval(runner, args):
    budget = None if args.exhaustive else runner.config.get("budget")
    summary = runner.crossval(args.field, _rule_list(args.rule), load_grid(args.grid),
                              budget=budget, check_cpp=args.cpp, keep_reports=bool(args.json or args.csv))
    write_reports(summary.reports, args)
    for report in summary.disagreements:
        print(report.to_json())
    print(json.dumps({k: v for k, v in summary.to_dict().items() if k != "disagreements"}))
    return EXIT_DISAGREE if summary.disagreements else EXIT_OK


def cmd_search(runner, args):
    found = runner.search(args.field, args.rule, load_grid(args.grid), cpp=args.cpp,
                          limit=args.limit, shift_v=args.shift_v)
    for report in found:
        print(json.dumps({**report.params, "rule": report.rule, "cpp": report.cpp}, sort_keys=True))
    write_reports(found, args)
    say(f"{len(found)} {'CPPs' if args.cpp else 'PPs'} found", "success")
    return EXIT_OK


def cmd_tables(runner, args):
    for line in runner.tables(args.field, args.what, args.n, read_json_arg(args.params)):
        print(line)
    return EXIT_OK


# ─── Main ─────────────────────────────────────────────

def build_parser():
    parser = argparse.ArgumentParser(description="Permutation polynomials of F_{q^2}: rules vs brute force")
    parser.add_argument("--env-help", action="store_true", help="Show environment variables help")
    parser.add_argument("--config", default=None, help="Config file (default: ppkit_config.json)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="3", help="Field spec p or p^m (q = p^m)")
    common.add_argument("--json", default=None, help="Write reports as JSON lines to this file")
    common.add_argument("--csv", default=None, help="Write reports as CSV to this file")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--grid", default=None, help="Grid JSON file or inline JSON")
    sweep.add_argument("--budget", type=int, default=None, help="Sample at most N tuples")
    sweep.add_argument("--seed", type=int, default=None, help="Sampling seed")
    sweep.add_argument("--workers", type=int, default=None, help="Worker count")
    sweep.add_argument("--progress", action="store_true", help="Show a progress bar")
    sweep.add_argument("--cpp", action="store_true", help="Also check f(x) + x")

    sub = parser.add_subparsers(dest="command")

    verify = sub.add_parser("verify", parents=[common], help="Check one parameter tuple")
    verify.add_argument("--rule", default=None, choices=RULE_IDS, help="Rule to evaluate")
    verify.add_argument("--params", default=None, help="Parameters as JSON or @file")
    verify.add_argument("--mode", default=MODE_BOTH, choices=MODES)
    verify.add_argument("--poly", default=None, help="Check an explicit polynomial instead")
    verify.add_argument("--preset", default=None, help=f"One of: {', '.join(PRESETS)}")
    verify.add_argument("--cpp", action="store_true", help="Also check f(x) + x")

    crossval = sub.add_parser("crossval", parents=[common, sweep], help="Rules against brute force over a grid")
    crossval.add_argument("--rule", default="all", help="Comma-separated rule ids or 'all'")
    crossval.add_argument("--exhaustive", action="store_true", help="Ignore any budget")

    search = sub.add_parser("search", parents=[common, sweep], help="List confirmed PPs (or CPPs)")
    search.add_argument("--rule", required=True, choices=RULE_IDS)
    search.add_argument("--limit", type=int, default=None, help="Stop after K results")
    search.add_argument("--shift-v", action="store_true",
                        help="Also require the rule to predict PP after v -> v + 1")

    tables = sub.add_parser("tables", parents=[common], help="Print structural subsets")
    tables.add_argument("what", choices=["subfield", "unity", "S", "primitive"])
    tables.add_argument("--n", type=int, default=None, help="n for U_n")
    tables.add_argument("--params", default=None, help='{"a":..,"b":..,"c":..} for S')
    return parser


COMMANDS = {"verify": cmd_verify, "crossval": cmd_crossval, "search": cmd_search, "tables": cmd_tables}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.env_help:
        print_env_help()
        return EXIT_OK
    if not args.command:
        parser.print_help()
        print_env_help()
        return EXIT_OK

    try:
        cfg = effective_config(args)
        logging.basicConfig(level=str(cfg.get("log_level", "INFO")).upper(),
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        runner = SweepRunnerInterface(cfg)
        runner.on_log = say
        if args.command == "tables" and args.what == "unity" and args.n is None:
            raise ValueError("tables unity needs --n")
        return COMMANDS[args.command](runner, args)
    except (ValueError, KeyError, OSError) as e:
        say(str(e).strip("'\""), "error")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
