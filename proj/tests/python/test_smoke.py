# SPDX-License-Identifier: Apache-2.0
import json

import pytest

import ssv


def program(fixtures, name):
    return ssv.Program.parse((fixtures / "programs" / name).read_text())


def test_round_trip(fixtures):
    p = program(fixtures, "technicians.ssv")
    assert p.num_constraints == 6
    assert p.option_labels == ["A", "B", "C", "D", "E"]
    assert ssv.Program.parse(str(p)) == p
    assert p.constraint_code(1).startswith("assert And(repairs(Yolanda")
    with pytest.raises(IndexError):
        p.constraint_code(6)


def test_solver_and_oracle_agree(fixtures):
    p = program(fixtures, "technicians.ssv")
    z3 = ssv.execute(p)
    oracle = ssv.execute(p, solver="oracle")
    assert z3["answer"] == oracle["answer"] == "C"
    assert z3["passing"] == ["C"]
    assert ssv.count_models(p) > 0


def test_stacy_yolanda_instantiations(fixtures):
    insts = (fixtures / "instantiations" / "stacy_yolanda.json").read_text()
    bad = ssv.verify(program(fixtures, "technicians_exists.ssv"), insts)
    assert not bad["pass"] and bad["reason"] == "NegSat"
    good = ssv.verify(program(fixtures, "technicians.ssv"), insts)
    assert good["pass"] and good["reason"] is None
    assert [c["polarity"] for c in good["checks"]] == ["positive", "negative"]


def test_well_formed(fixtures):
    report = ssv.well_formed(program(fixtures, "technicians.ssv"))
    assert report["ok"] and report["passing"] == ["C"]


def test_errors():
    with pytest.raises(ssv.DslError):
        ssv.Program.parse("#INIT\nenum s { a }\nassert g(a)\n#OPTION A: x\ncheck True\n")
    with pytest.raises(ssv.SsvError):
        ssv.normalize_label("Z")
    with pytest.raises(ssv.ConfigError):
        ssv._core.config_from_json('{"maxRepair": 1}')


def test_metrics():
    assert ssv.format_percent(164, 230) == "71.3"
    assert ssv.format_percent(0, 0) == "-"
    m = ssv.metrics(230, 164, 50, 50)
    assert m["generalAccuracy"] == "71.3"
    assert ssv.default_config()["maxRepairs"] == 2


def test_replay_task(fixtures):
    line = (fixtures / "dataset" / "tasks.jsonl").read_text().splitlines()
    task = next(json.loads(l) for l in line if '"tech-pairs"' in l)
    r = ssv.run_task(task, fixtures / "dataset" / "config.json")
    assert r["answer"] == "C" and r["verified"]
    assert r["trace"]["repairsUsed"] == 1


def test_replay_dataset_matches_golden(fixtures):
    report = ssv.evaluate_dataset(fixtures / "dataset" / "tasks.jsonl", fixtures / "dataset" / "config.json")
    golden = json.loads((fixtures / "dataset" / "expected_report.json").read_text())
    assert report == golden
