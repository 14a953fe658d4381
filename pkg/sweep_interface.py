"""
sweep_interface.py — Verification and sweep backend
===================================================
Runs rule predictions against the brute-force permutation check, one tuple
at a time (verify) or over whole parameter grids (crossval, search).

Sweeps split the grid's tuple indices into chunks and hand them to a worker
pool; chunks come back in submission order, so reports are always ordered
by (rule, tuple index) whatever the worker count.

Callbacks (set by a front end):
  on_log(message, severity)   severity: info/success/warning/error/progress
  on_progress(done, total)    chunk counter during sweeps
"""

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from tqdm import tqdm

from families import (
    ELEMENT_FIELDS, NOT_APPLICABLE, PP, NOT_PP,
    FamilyParams, ParamsError, build_f, compute_S,
)
from field import field_from_spec, roots_of_unity, subfield
from grid_spec import build_plan
from poly import FuncTable, format_poly, func_table, is_permutation, parse_poly
from rules import RULE_IDS, SUFFICIENT, evaluate_rule, get_rule

logger = logging.getLogger(__name__)

# ─── Config ───────────────────────────────────────────
CONFIG_FILE = os.getenv("PPKIT_CONFIG", "ppkit_config.json")

DEFAULT_CONFIG = {
    "table_bound": 65536,
    "workers": 1,
    "seed": 0,
    "budget": None,
    "progress": False,
    "log_level": "INFO",
    "executor": "process",
}

MODE_BRUTE = "brute"
MODE_RULE = "rule"
MODE_BOTH = "both"
MODES = (MODE_BRUTE, MODE_RULE, MODE_BOTH)

RAW_RULE = "raw"
CHUNKS_PER_WORKER = 4

SEVERITY_LEVELS = {
    "info": logging.INFO,
    "success": logging.INFO,
    "progress": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}

CSV_COLUMNS = ("key", "field", "rule", *ELEMENT_FIELDS, "r", "d", "phi",
               "hypotheses_ok", "failed_clause", "reduced_condition",
               "predicted", "brute_force", "cpp", "shifted", "agree")

# Instances worked out by hand in the literature, runnable with `verify --preset`.
PRESETS = {
    "example1-f1": {"field": "13", "rule": "Cor2",
                    "params": {"a": "1", "b": "1", "c": "0", "u": "1", "v": "-1",
                               "r": 1, "d": 6, "phi": "1:1"}},
    "example1-f2": {"field": "13", "rule": "Cor2",
                    "params": {"a": "1", "b": "-1", "c": "0", "u": "1", "v": "1",
                               "r": 1, "d": 6, "phi": "1:1"}},
    "example2": {"field": "5", "rule": "Cor8",
                 "params": {"a": "1", "b": "-1", "c": "0", "u": "0", "v": "1",
                            "r": 1, "d": 3, "phi": "1:1"}},
    "example3": {"field": "5", "rule": "Thm5",
                 "params": {"a": "1", "b": "1", "c": "0", "u": "0", "v": "-1",
                            "r": 1, "d": 4, "phi": "3:1, 1:1"}},
    "example4": {"field": "11", "rule": "Thm9",
                 "params": {"a": "1", "b": "-1", "c": "0", "u": "1", "v": "1",
                            "r": 3, "d": 15, "phi": "0:1"}},
    "f4-counterexample": {"field": "2", "rule": "Cor7",
                          "params": {"a": "1", "b": "1", "c": "0", "u": "1", "v": "xi",
                                     "r": 1, "d": 1, "phi": "0:1"}},
}


def load_config(path=None):
    path = path or CONFIG_FILE
    cfg = dict(DEFAULT_CONFIG)
    if os.path.exists(path):
        try:
            with open(path, "r") as f:
                cfg.update(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("ignoring unreadable config %s: %s", path, e)
    return cfg


# ─── Reports ──────────────────────────────────────────

@dataclass
class CheckReport:
    field: str
    params: dict
    rule: str
    hypotheses_ok: bool = None
    failed_clause: str = None
    reduced_condition: bool = None
    predicted: str = None
    brute_force: str = None
    agree: bool = True
    elapsed_us: int = 0
    cpp: bool = None
    shifted: str = None
    key: int = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self):
        flat = {**self.to_dict(), **{k: v for k, v in self.params.items() if k != "field"}}
        return ["" if flat.get(col) is None else flat.get(col) for col in CSV_COLUMNS]


@dataclass
class SweepSummary:
    enumerated: int = 0
    hypotheses_ok: int = 0
    agreements: int = 0
    disagreements: list = field(default_factory=list)
    wall_time: float = 0.0
    reports: list = field(default_factory=list)

    def add(self, report, keep=False):
        self.enumerated += 1
        if keep:
            self.reports.append(report)
        if not report.hypotheses_ok:
            return
        self.hypotheses_ok += 1
        if report.agree:
            self.agreements += 1
        else:
            self.disagreements.append(report)

    def to_dict(self):
        return {
            "enumerated": self.enumerated,
            "hypotheses_ok": self.hypotheses_ok,
            "agreements": self.agreements,
            "disagreements": [r.to_dict() for r in self.disagreements],
            "wall_time": round(self.wall_time, 3),
        }


def verdicts_agree(rule, predicted, brute, cpp=None):
    """Only a definite prediction can disagree; sufficient rules are checked in one direction."""
    if predicted in (None, NOT_APPLICABLE) or brute is None:
        return True
    if rule.semantics == SUFFICIENT:
        if predicted != PP:
            return True
        return brute == PP and (not rule.asserts_cpp or cpp is not False)
    return predicted == brute


def _brute(P, want_cpp):
    f = build_f(P)
    brute = PP if is_permutation(f) else NOT_PP
    cpp = None
    if want_cpp:
        shifted = FuncTable(f.domain, P.ctx.vadd(f.values, f.domain), P.ctx)
        cpp = brute == PP and is_permutation(shifted)
    return brute, cpp


def check_params(P, rule_id=None, mode=MODE_BOTH, check_cpp=False, shift_v=False, key=None):
    """Prediction and/or brute-force verdict for one tuple."""
    start = time.perf_counter()
    report = CheckReport(field=P.ctx.label, params=P.to_dict(), rule=rule_id or "-", key=key)
    rule = get_rule(rule_id) if rule_id else None
    if rule and mode != MODE_BRUTE:
        outcome = evaluate_rule(rule_id, P)
        report.hypotheses_ok = outcome.hypotheses_ok
        report.failed_clause = outcome.failed_clause
        report.reduced_condition = outcome.reduced_condition
        report.predicted = outcome.verdict
        if shift_v:
            report.shifted = evaluate_rule(rule_id, P.with_changes(v=P.ctx.add(P.v, 1))).verdict
    if mode != MODE_RULE:
        want_cpp = check_cpp or (rule is not None and rule.asserts_cpp)
        report.brute_force, report.cpp = _brute(P, want_cpp)
    if rule:
        report.agree = verdicts_agree(rule, report.predicted, report.brute_force, report.cpp)
    report.elapsed_us = int((time.perf_counter() - start) * 1e6)
    return report


def check_poly(ctx, P, check_cpp=False):
    """Brute-force verdict for an explicit polynomial."""
    start = time.perf_counter()
    table = func_table(P)
    brute = PP if is_permutation(table) else NOT_PP
    cpp = None
    if check_cpp:
        cpp = brute == PP and is_permutation(FuncTable(table.domain, ctx.vadd(table.values, table.domain), ctx))
    return CheckReport(field=ctx.label, params={"field": ctx.label, "poly": format_poly(P)},
                       rule=RAW_RULE, brute_force=brute, cpp=cpp,
                       elapsed_us=int((time.perf_counter() - start) * 1e6))


def _skipped_report(ctx, rule_id, key, values, error):
    params = {"field": ctx.label, **{k: str(v) for k, v in values.items()}}
    return CheckReport(field=ctx.label, params=params, rule=rule_id, hypotheses_ok=False,
                       failed_clause=str(error), predicted=NOT_APPLICABLE, key=key)


def _run_chunk(job):
    """Worker entry point: check the given tuple indices of one rule's grid."""
    ctx = field_from_spec(job["field"], job["table_bound"])
    plan = build_plan(ctx, job["rule"], job["grid"])
    reports = []
    for key in job["indices"]:
        try:
            P = plan.params_at(int(key))
        except ParamsError as e:
            reports.append(_skipped_report(ctx, job["rule"], int(key), plan.values_at(int(key)), e))
            continue
        reports.append(check_params(P, job["rule"], MODE_BOTH, job["cpp"], job["shift_v"], key=int(key)))
    return reports


class SweepRunnerInterface:
    """Backend for the ppkit command line: single checks, sweeps, searches and tables."""

    def __init__(self, config=None):
        self.config = load_config() if config is None else {**DEFAULT_CONFIG, **config}
        self.on_log = None        # (message, severity)
        self.on_progress = None   # (done, total)

    # ─── Config ─────────────────────────────────────

    def save_config(self, cfg_dict, path=None):
        with open(path or CONFIG_FILE, "w") as f:
            json.dump(cfg_dict, f, indent=2)
        self.config = {**DEFAULT_CONFIG, **cfg_dict}
        self.log("Config saved.", "success")

    def field(self, spec):
        return field_from_spec(spec, int(self.config["table_bound"]))

    # ─── Logging ────────────────────────────────────

    def log(self, message, severity="info"):
        """Send a log entry to the front end, or to the module logger."""
        if self.on_log:
            self.on_log(message, severity)
        else:
            logger.log(SEVERITY_LEVELS.get(severity, logging.INFO), message)

    # ─── Single checks ──────────────────────────────

    def params(self, field_spec, data):
        return FamilyParams.from_dict(self.field(field_spec), data)

    def verify(self, field_spec, data, rule_id=None, mode=MODE_BOTH, check_cpp=False):
        P = self.params(field_spec, data)
        report = check_params(P, rule_id, mode, check_cpp)
        if not report.agree:
            self.log(f"{rule_id} predicts {report.predicted}, brute force says {report.brute_force}", "error")
        return report

    def verify_poly(self, field_spec, text, check_cpp=False):
        ctx = self.field(field_spec)
        return check_poly(ctx, parse_poly(ctx, text), check_cpp)

    def verify_preset(self, name, mode=MODE_BOTH, check_cpp=False):
        preset = PRESETS[name]
        return self.verify(preset["field"], preset["params"], preset["rule"], mode, check_cpp)

    # ─── Sweeps ─────────────────────────────────────

    def _jobs(self, field_spec, rule_id, grid, budget, seed, workers, cpp, shift_v):
        ctx = self.field(field_spec)
        plan = build_plan(ctx, rule_id, grid)
        indices = plan.indices(budget, seed)
        self.log(f"{rule_id}: {len(indices)} of {plan.size} tuples over F_{ctx.q}^2", "info")
        n_chunks = max(1, min(len(indices), workers * CHUNKS_PER_WORKER))
        return [
            {"field": field_spec, "table_bound": int(self.config["table_bound"]), "rule": rule_id,
             "grid": grid, "indices": [int(i) for i in chunk], "cpp": cpp, "shift_v": shift_v}
            for chunk in np.array_split(indices, n_chunks) if len(chunk)
        ]

    def _map(self, jobs, workers):
        """Run jobs, yielding each chunk's reports in submission order."""
        bar = tqdm(total=len(jobs), unit="chunk", disable=not self.config.get("progress"))
        executor = None
        try:
            if workers <= 1:
                results = map(_run_chunk, jobs)
            else:
                pool = ProcessPoolExecutor if self.config.get("executor") == "process" else ThreadPoolExecutor
                executor = pool(max_workers=workers)
                results = executor.map(_run_chunk, jobs)
            for done, reports in enumerate(results, start=1):
                bar.update(1)
                if self.on_progress:
                    self.on_progress(done, len(jobs))
                yield reports
        finally:
            bar.close()
            if executor is not None:
                executor.shutdown(wait=True, cancel_futures=True)

    def _grid_for(self, grid, rule_id):
        """A grid keyed by rule id gives each rule its own variables."""
        grid = grid or {}
        if grid and all(key in RULE_IDS for key in grid):
            return grid.get(rule_id, {})
        return grid

    def crossval(self, field_spec, rule_ids, grid=None, budget=None, seed=None, workers=None,
                 check_cpp=False, keep_reports=False):
        budget = self.config.get("budget") if budget is None else budget
        seed = int(self.config.get("seed", 0) if seed is None else seed)
        workers = int(self.config.get("workers", 1) if workers is None else workers)
        summary = SweepSummary()
        start = time.perf_counter()
        for rule_id in rule_ids:
            get_rule(rule_id)
            jobs = self._jobs(field_spec, rule_id, self._grid_for(grid, rule_id), budget, seed,
                              workers, check_cpp, False)
            for reports in self._map(jobs, workers):
                for report in reports:
                    summary.add(report, keep_reports)
        summary.wall_time = time.perf_counter() - start
        severity = "success" if not summary.disagreements else "error"
        self.log(f"{summary.enumerated} tuples, {summary.hypotheses_ok} in hypotheses, "
                 f"{len(summary.disagreements)} disagreements", severity)
        return summary

    def search(self, field_spec, rule_id, grid=None, budget=None, seed=None, workers=None,
               cpp=False, limit=None, shift_v=False):
        """Tuples predicted PP and confirmed by brute force (CPP when asked), in tuple order."""
        found = []
        if limit == 0:
            return found
        budget = self.config.get("budget") if budget is None else budget
        seed = int(self.config.get("seed", 0) if seed is None else seed)
        workers = int(self.config.get("workers", 1) if workers is None else workers)
        jobs = self._jobs(field_spec, rule_id, grid, budget, seed, workers, cpp, shift_v)
        for reports in self._map(jobs, workers):
            for report in reports:
                if report.predicted != PP or report.brute_force != PP:
                    continue
                if cpp and not report.cpp:
                    continue
                if shift_v and report.shifted != PP:
                    continue
                found.append(report)
                if limit is not None and len(found) >= limit:
                    return found
        self.log(f"{len(found)} tuples found for {rule_id}", "success")
        return found

    # ─── Tables ─────────────────────────────────────

    def tables(self, field_spec, what, n=None, data=None):
        ctx = self.field(field_spec)
        if what == "subfield":
            elems = subfield(ctx)
        elif what == "unity":
            elems = sorted(roots_of_unity(ctx, int(n)))
        elif what == "S":
            P = FamilyParams.from_dict(ctx, {"a": "1", "b": "1", **(data or {})})
            elems = compute_S(P).tolist()
        elif what == "primitive":
            return [f"modulus: {list(ctx.modulus)}",
                    f"xi: {ctx.format(ctx.xi)}"]
        else:
            raise ValueError(f"unknown table {what!r}")
        return [ctx.format(x) for x in elems]
