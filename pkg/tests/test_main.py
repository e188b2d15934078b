import json

import pytest

from poslog.config import settings
from poslog.main import EXIT_CEILING, EXIT_FAILED, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(autouse=True)
def restore_bounds(monkeypatch):
    # every run installs its bounds into the settings module
    for name in ("POSLOG_DEPTH", "POSLOG_WIDTH_CAP", "POSLOG_CEILING", "POSLOG_DNF_CEILING"):
        monkeypatch.setattr(settings, name, getattr(settings, name))
    for name in ("POSLOG_DEPTH", "POSLOG_WIDTH_CAP", "POSLOG_CEILING", "POSLOG_DNF_CEILING"):
        monkeypatch.delenv(name, raising=False)


def test_classify_prints_the_headline(capsys):
    assert main(["classify", "forall x: E(x,x) -> false"]) == EXIT_OK
    assert capsys.readouterr().out == "h-universal-basic\n"


def test_classify_json_report(capsys):
    assert main(["classify", "exists y: E(x,y)", "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["report_v"] == 1
    assert data["kind"] == "classify"
    assert data["formula"] == "exists y: E(x,y)"
    assert data["headline"] == "normal-geometric"
    assert "constructible" in data["fragments"]


def test_parse_error_exits_with_usage_code(capsys):
    assert main(["classify", "E(x,y) & F(x)"]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("1:10: error:")


def test_missing_argument_is_a_usage_error():
    assert main(["classify"]) == EXIT_USAGE


def test_missing_file_is_a_usage_error():
    assert main(["pec", "--class", "no-such-class.pls"]) == EXIT_USAGE


def test_command_needing_a_class():
    assert main(["typespace"]) == EXIT_USAGE


def test_ceiling_exit_code():
    assert main(["typespace", "--class", "graphs3.pls", "--ceiling", "5"]) == EXIT_CEILING


def test_dnf_command(capsys):
    assert main(["dnf", "E(x,y) & (E(y,x) | x=y)"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("Or[")


def test_pec_report(capsys):
    assert main(["pec", "--class", "graphs3.pls", "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    pec = {m["structure"]: m["pec"] for m in data["members"]}
    assert [name for name, flag in pec.items() if flag] == ["K3"]
    assert all(m["continuation"] == "K3" for m in data["members"])


def test_typespace_output_is_deterministic(capsys):
    argv = ["typespace", "--class", "chains3.pls", "--format", "json"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    assert json.loads(first)["nested"] == [[0, 1], [2, 1]]


def test_typespace_dot(capsys):
    assert main(["typespace", "--class", "chains3.pls", "--format", "dot"]) == EXIT_OK
    assert "digraph" in capsys.readouterr().out


def test_karp_exit_codes(capsys):
    assert main(["karp", "--class", "graphs3.pls", "K2", "K2"]) == EXIT_OK
    assert main(["karp", "--class", "graphs3.pls", "K2", "E2"]) == EXIT_FAILED
    assert main(["forcing", "karp", "--class", "graphs3.pls", "K3", "K3"]) == EXIT_OK


def test_forcing_check(capsys):
    argv = ["forcing", "check", "--class", "graphs3.pls", "K2", "!E(x,y)", "a", "a"]
    assert main(argv + ["--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["existential_member"] == "K3"
    assert main(["forcing", "check", "--class", "graphs3.pls", "K2", "!E(x,y)", "a", "b"]) \
        == EXIT_FAILED


def test_forcing_existential(capsys):
    argv = ["forcing", "existential", "--class", "graphs3.pls", "--format", "json", "K3"]
    assert main(argv) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["members"][0]["existential"]
    assert main(["forcing", "existential", "--class", "graphs3.pls", "K2"]) == EXIT_FAILED


def test_morleyize_writes_a_theory(tmp_path, capsys):
    output = tmp_path / "graph_g.plt"
    argv = ["morleyize", "--theory", "graph.plt", "--fragment", "graph_fragment.plt",
            "--output", str(output)]
    assert main(argv) == EXIT_OK
    assert output.read_text(encoding="utf-8").startswith("#poslog v1 theory")


def test_morleyize_needs_a_fragment():
    assert main(["morleyize", "--theory", "graph.plt"]) == EXIT_USAGE


def test_verify_morley_on_a_member(capsys):
    argv = ["verify-morley", "--theory", "graph.plt", "--class", "graphs3.pls",
            "--fragment", "graph_fragment.plt", "P2"]
    assert main(argv) == EXIT_OK


def test_unknown_member_fails():
    assert main(["karp", "--class", "graphs3.pls", "K2", "K9"]) == EXIT_FAILED


def test_negative_depth_is_rejected():
    assert main(["typespace", "--class", "graphs3.pls", "--depth", "-1"]) == EXIT_USAGE
