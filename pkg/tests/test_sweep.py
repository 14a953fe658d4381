"""
test_sweep.py — Unit tests for the verification and sweep backend
=================================================================
Single checks, agreement bookkeeping, worker-count determinism, searches,
structural tables and the config file.
"""

import sys
import os
import json
import tempfile

import pytest

# Add parent dir to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from families import NOT_APPLICABLE, NOT_PP, PP, FamilyParams
from field import field_from_spec
from rules import get_rule
from sweep_interface import (
    DEFAULT_CONFIG, MODE_BRUTE, MODE_RULE, PRESETS, CheckReport, SweepRunnerInterface,
    SweepSummary, check_params, load_config, verdicts_agree,
)


def _runner(**cfg):
    return SweepRunnerInterface({"executor": "thread", **cfg})


def _verdicts(summary):
    return [(r.rule, r.key, r.hypotheses_ok, r.predicted, r.brute_force) for r in summary.reports]


def test_verdicts_agree():
    thm1, cor5 = get_rule("Thm1"), get_rule("Cor5")
    assert verdicts_agree(thm1, PP, PP)
    assert not verdicts_agree(thm1, PP, NOT_PP)
    assert verdicts_agree(thm1, NOT_APPLICABLE, NOT_PP)
    assert verdicts_agree(thm1, PP, None)
    assert verdicts_agree(cor5, NOT_PP, PP)
    assert verdicts_agree(cor5, PP, PP, cpp=True)
    assert not verdicts_agree(cor5, PP, PP, cpp=False)
    assert not verdicts_agree(cor5, PP, NOT_PP)
    print("✅ verdict agreement: PASS")


def test_check_params_modes():
    ctx = field_from_spec("7")
    P = FamilyParams.from_dict(ctx, {"a": "1", "b": "1", "c": "3", "u": "1", "v": "-1", "r": 5})
    both = check_params(P, "Cor3", key=11)
    assert (both.hypotheses_ok, both.predicted, both.brute_force, both.agree) == (True, PP, PP, True)
    assert both.key == 11 and both.field == "7" and both.rule == "Cor3"
    rule_only = check_params(P, "Cor3", MODE_RULE)
    assert rule_only.predicted == PP and rule_only.brute_force is None
    brute_only = check_params(P, None, MODE_BRUTE)
    assert brute_only.rule == "-" and brute_only.predicted is None and brute_only.brute_force == PP
    shifted = check_params(P, "Cor3", shift_v=True)
    assert shifted.shifted in (PP, NOT_PP, NOT_APPLICABLE)
    print("✅ check_params modes: PASS")


def test_report_serialisation():
    ctx = field_from_spec("3")
    P = FamilyParams.from_dict(ctx, {"a": "1", "b": "1", "u": "1", "v": "xi"})
    report = check_params(P, "Thm1")
    data = json.loads(report.to_json())
    assert data["rule"] == "Thm1" and data["field"] == "3"
    assert data["params"] == report.params
    row = report.csv_row()
    assert row[1] == "3" and row[2] == "Thm1"
    print("✅ report serialisation: PASS")


def test_summary_counts():
    summary = SweepSummary()
    summary.add(CheckReport(field="3", params={}, rule="Thm1", hypotheses_ok=False), keep=True)
    summary.add(CheckReport(field="3", params={}, rule="Thm1", hypotheses_ok=True, agree=True))
    bad = CheckReport(field="3", params={}, rule="Thm1", hypotheses_ok=True, agree=False)
    summary.add(bad, keep=True)
    assert (summary.enumerated, summary.hypotheses_ok, summary.agreements) == (3, 2, 1)
    assert summary.disagreements == [bad]
    assert len(summary.reports) == 2
    out = summary.to_dict()
    assert out["enumerated"] == 3 and len(out["disagreements"]) == 1
    print("✅ sweep summary: PASS")


def test_verify_presets():
    runner = _runner()
    for name in PRESETS:
        report = runner.verify_preset(name)
        assert report.agree, name
    assert runner.verify_preset("example2").predicted == PP
    assert runner.verify_preset("example3").predicted == NOT_PP
    assert runner.verify_preset("example4").predicted == PP
    assert runner.verify_preset("f4-counterexample").brute_force == PP
    print("✅ presets: PASS")


def test_verify_poly():
    runner = _runner()
    report = runner.verify_poly("2", "2:1, 1:1, 2:1, 1:xi", check_cpp=True)
    assert report.rule == "raw"
    assert report.brute_force == PP and report.cpp is True
    assert runner.verify_poly("3", "2:1").brute_force == NOT_PP
    print("✅ explicit polynomial: PASS")


def test_crossval_independent_of_worker_count():
    runner = _runner()
    one = runner.crossval("3", ["Cor3", "Cor6"], workers=1, keep_reports=True)
    three = runner.crossval("3", ["Cor3", "Cor6"], workers=3, keep_reports=True)
    assert _verdicts(one) == _verdicts(three)
    assert one.enumerated == three.enumerated > 0
    assert not one.disagreements
    assert [r.key for r in one.reports if r.rule == "Cor3"] == sorted(r.key for r in one.reports if r.rule == "Cor3")
    print("✅ worker-count determinism: PASS")


@pytest.mark.slow
def test_crossval_process_pool():
    threads = _runner().crossval("5", ["Cor4"], budget=200, seed=2, workers=2, keep_reports=True)
    procs = _runner(executor="process").crossval("5", ["Cor4"], budget=200, seed=2, workers=2,
                                                 keep_reports=True)
    assert _verdicts(threads) == _verdicts(procs)
    assert not procs.disagreements


def test_budget_sampling_is_seeded():
    runner = _runner()
    first = runner.crossval("5", ["Thm3"], budget=40, seed=7, keep_reports=True)
    again = runner.crossval("5", ["Thm3"], budget=40, seed=7, keep_reports=True)
    assert _verdicts(first) == _verdicts(again)
    assert 0 < first.enumerated <= 40
    print("✅ seeded sampling: PASS")


def test_empty_hypothesis_region():
    summary = _runner().crossval("13", ["Thm5"], grid={"d": [8]}, budget=30, seed=0)
    assert summary.enumerated > 0
    assert summary.hypotheses_ok == 0 and summary.agreements == 0
    print("✅ empty hypothesis region: PASS")


def test_rule_keyed_grid():
    runner = _runner()
    summary = runner.crossval("3", ["Cor3", "Cor6"], grid={"Cor3": {"r": [1]}}, keep_reports=True)
    assert {r.params["r"] for r in summary.reports if r.rule == "Cor3"} == {1}
    print("✅ rule-keyed grid: PASS")


def test_search_cpp():
    found = _runner().search("2^2", "Cor5", cpp=True)
    assert found
    assert all(r.predicted == PP and r.brute_force == PP and r.cpp for r in found)
    assert len(_runner().search("2^2", "Cor5", cpp=True, limit=1)) == 1
    assert _runner().search("2^2", "Cor5", limit=0) == []
    print("✅ CPP search: PASS")


def test_search_with_no_hits():
    runner = _runner()
    # (1 - 3)^16 = 2 in F_7, so every tuple in the region is predicted NotPP
    assert runner.search("7", "Cor12", budget=120, seed=4) == []
    assert not runner.crossval("7", ["Cor12"], budget=120, seed=4).disagreements
    print("✅ search without hits: PASS")


def test_tables():
    runner = _runner()
    assert runner.tables("13", "unity", n=3) == ["1", "3", "9"]
    assert runner.tables("2", "subfield") == ["0", "1"]
    assert runner.tables("3", "S", data={"c": "0"}) == ["0", "1", "2"]
    assert runner.tables("3", "primitive") == ["modulus: [1, 0, 1]", "xi: [1,1]"]
    with pytest.raises(ValueError):
        runner.tables("3", "cosets")
    print("✅ structural tables: PASS")


def test_config_round_trip():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "ppkit_config.json")
        assert load_config(path) == DEFAULT_CONFIG
        messages = []
        runner = _runner()
        runner.on_log = lambda message, severity: messages.append((message, severity))
        runner.save_config({"workers": 3, "seed": 9}, path)
        assert ("Config saved.", "success") in messages
        cfg = load_config(path)
        assert cfg["workers"] == 3 and cfg["seed"] == 9
        assert cfg["table_bound"] == DEFAULT_CONFIG["table_bound"]
        with open(path, "w") as f:
            f.write("{not json")
        assert load_config(path) == DEFAULT_CONFIG
    print("✅ config file: PASS")


def test_table_bound_is_enforced():
    runner = _runner(table_bound=100)
    with pytest.raises(ValueError):
        runner.field("11")
    assert runner.field("7").q == 7
    print("✅ table bound: PASS")


if __name__ == "__main__":
    print("=" * 50)
    print("Sweep Backend Unit Tests")
    print("=" * 50 + "\n")

    test_verdicts_agree()
    test_check_params_modes()
    test_report_serialisation()
    test_summary_counts()
    test_verify_presets()
    test_verify_poly()
    test_crossval_independent_of_worker_count()
    test_budget_sampling_is_seeded()
    test_empty_hypothesis_region()
    test_rule_keyed_grid()
    test_search_cpp()
    test_search_with_no_hits()
    test_tables()
    test_config_round_trip()
    test_table_bound_is_enforced()

    print("\n" + "=" * 50)
    print("ALL TESTS PASSED ✅")
    print("=" * 50)
