import json

import pytest

from poslog.config import settings
from poslog.exceptions import ConfigError
from poslog.frontend.parser import parse_formula
from poslog.services.check_suite import CheckSuiteService, is_quantifier_free


def _write_config(tmp_path, suites):
    path = tmp_path / "suites.json"
    path.write_text(json.dumps({"suites": suites}), encoding="utf-8")
    return str(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        CheckSuiteService(str(tmp_path / "absent.json"))


def test_config_without_suites_table(tmp_path):
    path = tmp_path / "suites.json"
    path.write_text(json.dumps({"checks": {}}), encoding="utf-8")
    with pytest.raises(ConfigError):
        CheckSuiteService(str(path))


def test_malformed_config(tmp_path):
    path = tmp_path / "suites.json"
    path.write_text("{suites:", encoding="utf-8")
    with pytest.raises(ConfigError, match="Failed to load"):
        CheckSuiteService(str(path))


def test_unknown_suite_in_config(tmp_path):
    with pytest.raises(ConfigError, match="Unknown suites"):
        CheckSuiteService(_write_config(tmp_path, {"telepathy": {"enabled": True}}))


def test_shipped_config_enables_every_suite():
    service = CheckSuiteService()
    assert service.enabled_suites() == sorted(CheckSuiteService.SUITES)


def test_enabled_flag_selects_suites(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {
        "karp": {"enabled": True, "theory": "graph.plt", "class": "graphs3.pls"},
        "pmc": {"enabled": False},
    }))
    assert service.enabled_suites() == ["karp"]


def test_unknown_suite_on_run(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {}))
    with pytest.raises(ConfigError):
        service.run(["telepathy"])


def test_run_assembles_a_versioned_report(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {
        "karp": {"enabled": True, "theory": "graph.plt", "class": "graphs3.pls", "depth": 0},
        "morley_roundtrip": {"enabled": True, "theory": "graph.plt", "class": "graphs3.pls",
                             "fragment": "graph_fragment.plt"},
    }))
    result = service.run()
    assert result["report_v"] == 1
    assert result["kind"] == "check-suite"
    assert result["passed"]
    assert sorted(result["suites"]) == ["karp", "morley_roundtrip"]
    assert result["suites"]["karp"]["pairs"] == 28
    roundtrip = result["suites"]["morley_roundtrip"]
    assert roundtrip["structures"] == 7
    assert roundtrip["mutations"] > 0
    assert roundtrip["missed_mutations"] == []


def test_pmc_suite_finds_the_expected_complement(tmp_path, order_theory):
    service = CheckSuiteService(_write_config(tmp_path, {
        "pmc": {"enabled": True, "theory": "t_lo.plt", "class": "chains3.pls",
                "variables": 2, "depth": 1, "expected": {"x<y": "Or[x=y, y<x]"}},
    }))
    result = service.run_suite("pmc")
    assert result["mismatched"] == []
    sig = order_theory.signature
    found = parse_formula(result["assignment"]["x<y"], sig)
    assert found == parse_formula("Or[x=y, y<x]", sig)
    assert result["required"] == "quantifier-free supply"
    assert result["quantified_gaps"] == len(result["without_complement"])


def test_failing_suite_is_reported_not_raised(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {
        "pmc": {"enabled": True, "theory": "t_lo.plt", "class": "chains3.pls",
                "variables": 2, "depth": 1, "expected": {"x<<y": "true"}},
    }))
    result = service.run_suite("pmc")
    assert not result["passed"]
    assert "error" in result


def test_quantifier_free(graph_theory):
    sig = graph_theory.signature
    assert is_quantifier_free(parse_formula("E(x,y) | x=y", sig))
    assert not is_quantifier_free(parse_formula("exists z: E(x,z)", sig))


def test_spectral_complement_gaps_are_quantified(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {
        "spectral_complement": {"enabled": True, "theory": "t_lo.plt", "class": "chains3.pls",
                                "variables": 2, "depth": 1},
    }))
    result = service.run_suite("spectral_complement")
    assert result["passed"]
    assert result["required"] == "quantifier-free supply"
    assert result["quantified_gaps"] == len(result["uncovered"])
    assert not any(u["quantifier_free"] for u in result["uncovered"])


def test_forcing_suite_compares_verdicts_at_one_depth(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {
        "forcing": {"enabled": True, "theory": "graph.plt", "class": "graphs3.pls",
                    "variables": 2, "depth": 2, "check_depth": 1},
    }))
    result = service.run_suite("forcing")
    assert result["depth"] == 2
    assert result["width_cap"] == settings.POSLOG_WIDTH_CAP
    assert result["boolean_failures"] == []
    assert all(m["existential"] == m["generic"] for m in result["members"])
    assert [m["structure"] for m in result["members"] if m["existential"]] == ["K3"]
    assert result["passed"]


def test_topology_suite_counts_projection_shortfalls(tmp_path):
    service = CheckSuiteService(_write_config(tmp_path, {
        "topology": {"enabled": True, "theory": "t_lo.plt", "class": "chains3.pls",
                     "variables": 2, "depth": 1},
    }))
    result = service.run_suite("topology")
    assert result["projection_shortfalls"] == []
    assert result["algebra_failures"] == []
    assert result["passed"]
