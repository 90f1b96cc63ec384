import csv
import io
import json

import pytest

from bestapprox.errors import ConfigError
from bestapprox.scenarios import (BUILTINS, KNOWN_CHECKS, RunReport, ScenarioConfig,
                                  builtin_config, check_seed, emit_table, list_scenarios,
                                  run_scenario)

SMALL_FAMILY = {"name": "fam", "norm": {"kind": "lp", "p": 1},
                "set": {"type": "l1_hull_family", "sizes": [2, 4, 8]}, "x": "origin",
                "checks": ["distance"], "expect_witness": ["distance"]}
SQUARE = {"name": "square", "norm": {"kind": "lp", "p": 2},
          "set": {"type": "polytope", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
          "x": [2.0, 0.5], "checks": ["distance", "best_approximations",
                                      {"name": "lipschitz", "params": {"pairs": 40}}]}


def test_round_trip_yaml():
    for name in BUILTINS:
        cfg = builtin_config(name)
        again = ScenarioConfig.loads(cfg.dumps())
        assert again == cfg


def test_config_errors_name_the_field():
    cases = [
        ({"norm": {"kind": "lp", "p": 2}, "set": {"type": "points", "points": [[0]]}}, "name"),
        ({**SQUARE, "checks": ["telepathy"]}, "checks[0]"),
        ({**SQUARE, "tolerances": {"wobble": 1}}, "tolerances"),
        ({**SQUARE, "expect_witness": ["nope"]}, "expect_witness"),
        ({**SQUARE, "colour": "red"}, "colour"),
        ({**SQUARE, "version": 7}, "version"),
    ]
    for data, fld in cases:
        with pytest.raises(ConfigError) as info:
            ScenarioConfig.from_mapping(data)
        assert info.value.field == fld
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.loads("name: [unclosed")
    assert info.value.field == "<file>"


@pytest.mark.parametrize("patch,fld", [
    ({"norm": {"kind": "lp", "p": 0.3}}, "norm"),
    ({"set": {"type": "polytope", "vertices": []}}, "set"),
    ({"x": [1.0, 2.0, 3.0]}, "x"),
    ({"tolerances": {"solver": -1.0}}, "tolerances"),
])
def test_run_rejects_bad_inputs(patch, fld):
    cfg = ScenarioConfig.from_mapping({**SQUARE, **patch})
    with pytest.raises(ConfigError) as info:
        run_scenario(cfg)
    assert info.value.field == fld


def test_prerequisites_are_inserted():
    cfg = ScenarioConfig.from_mapping({**SQUARE, "checks": ["theorem2"]})
    assert [c["name"] for c in cfg.checks] == ["frechet", "exposure", "theorem2"]
    cfg = ScenarioConfig.from_mapping({**SQUARE, "checks": ["theorem2", "exposure"]})
    assert [c["name"] for c in cfg.checks] == ["frechet", "exposure", "theorem2"]


def test_check_forms_normalize():
    cfg = ScenarioConfig.from_mapping({**SQUARE, "checks": [
        "distance", {"lipschitz": {"pairs": 5}}, {"name": "grid", "params": {"cells": 50}}]})
    assert cfg.checks == [{"name": "distance", "params": {}},
                          {"name": "lipschitz", "params": {"pairs": 5}},
                          {"name": "grid", "params": {"cells": 50}}]


def test_list_scenarios_order_and_contents():
    names = [n for n, _ in list_scenarios()]
    assert names == list(BUILTINS)
    assert names[:3] == ["l1_hull_family", "circle_center", "theorem2_l2_polytope"]
    assert "supnorm_flat_face" in names
    assert all(desc for _, desc in list_scenarios())
    for cfg in map(builtin_config, names):
        assert {c["name"] for c in cfg.checks} <= set(KNOWN_CHECKS)


def test_check_seed_is_counter_based():
    assert check_seed(0, 0) == check_seed(0, 0)
    assert len({check_seed(s, i) for s in range(4) for i in range(4)}) == 16
    assert 0 <= check_seed(2**64 - 1, 3) < 2**32


def test_small_family_report(tmp_path):
    rep = run_scenario(ScenarioConfig.from_mapping(SMALL_FAMILY), out=tmp_path / "r.json")
    assert rep.exit_code == 0
    d = rep.checks["distance"]
    assert d["verdict"] == "NotProximinalEvidence" and d["witness"]
    assert RunReport.load(tmp_path / "r.json").checks == rep.checks


def test_emit_family_rows():
    rep = run_scenario(ScenarioConfig.from_mapping(SMALL_FAMILY))
    text = emit_table(rep, "csv")
    assert "\r" not in text
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    assert rows[0] == ["check", "series", "key", "value", "aux"]
    sizes = [int(r[2]) for r in rows[1:]]
    assert sizes == [2, 4, 8]
    assert [float(r[3]) for r in rows[1:]] == pytest.approx([1.5, 1.25, 1.125], abs=1e-12)
    assert rows[1][4] == "" and float(rows[2][4]) > 2


def test_emit_empty_check_list_is_header_only():
    rep = run_scenario(ScenarioConfig.from_mapping({**SQUARE, "checks": []}))
    lines = [ln for ln in emit_table(rep).splitlines() if not ln.startswith("#")]
    assert lines == ["check,series,key,value,aux"]


def test_emit_json_and_unknown_format(tmp_path):
    rep = run_scenario(ScenarioConfig.from_mapping(SQUARE))
    doc = json.loads(emit_table(rep, "structured-text"))
    assert doc["scenario"] == "square" and doc["summary"]["exit_code"] == 0
    assert emit_table(rep.to_dict(), "json") == emit_table(rep, "json")
    emit_table(rep, "delimited-text", tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().startswith("# columns")
    with pytest.raises(ValueError):
        emit_table(rep, "xlsx")


def test_unexpected_and_missing_witnesses():
    rep = run_scenario(ScenarioConfig.from_mapping({**SMALL_FAMILY, "expect_witness": []}))
    assert rep.unexpected_witnesses == ["distance"] and rep.exit_code == 1
    rep = run_scenario(ScenarioConfig.from_mapping({**SQUARE, "expect_witness": ["chebyshev"]}))
    assert rep.missing_witnesses == ["chebyshev"] and rep.exit_code == 1


def test_check_errors_are_recorded_not_raised():
    cfg = ScenarioConfig.from_mapping({**SQUARE, "checks": [
        {"name": "continuity", "params": {"radius": -1.0}}, "distance"]})
    rep = run_scenario(cfg)
    assert rep.checks["continuity"]["status"] == "error"
    assert rep.checks["distance"]["status"] == "ok"
    assert rep.failed_checks == ["continuity"] and rep.exit_code == 1


def test_grid_outside_the_plane_is_not_applicable():
    cfg = ScenarioConfig.from_mapping({"name": "hull3", "norm": {"kind": "lp", "p": 1},
                                       "set": {"type": "l1_hull", "n": 3}, "x": [0, 0, 0],
                                       "checks": ["grid"]})
    rep = run_scenario(cfg)
    assert rep.checks["grid"]["status"] == "not_applicable"
    assert rep.exit_code == 0


def test_report_keeps_check_order(tmp_path):
    cfg = ScenarioConfig.from_mapping({**SQUARE, "checks": ["lipschitz", "distance"]})
    run_scenario(cfg, out=tmp_path / "r.json")
    assert list(RunReport.load(tmp_path / "r.json").checks) == ["lipschitz", "distance"]


def test_report_determinism_and_budget_scale():
    cfg = ScenarioConfig.from_mapping(SQUARE)
    a = run_scenario(cfg, seed=5).to_json(include_clock=False)
    b = run_scenario(cfg, seed=5).to_json(include_clock=False)
    assert a == b
    with pytest.raises(ConfigError):
        run_scenario(cfg, budget_scale=0)
