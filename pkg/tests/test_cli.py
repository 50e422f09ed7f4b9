import json

import pytest

from cli import EXIT_COUNTEREXAMPLE, EXIT_PASS, EXIT_USAGE, build_parser, main

STATE = "set s : int = {1, 2}\nset t : int = {2}\nrel r : int * int = {(1, 10), (2, 20)}\n"


@pytest.fixture
def state_file(tmp_path):
    path = tmp_path / "state.txt"
    path.write_text(STATE)
    return path


def test_translate_expression(state_file, capsys):
    assert main(["translate", "--expr", "dom(r)", "--env", str(state_file)]) == EXIT_PASS
    assert capsys.readouterr().out.strip() == (
        "select distinct rtmp1.id from (select rtmp0.id, rtmp0.value from r rtmp0) rtmp1"
    )


def test_translate_actions_lists_primed_definitions(state_file, tmp_path, capsys):
    actions = tmp_path / "grow.eb"
    actions.write_text("s := s \\/ t")
    assert main(["translate", "--actions", str(actions), "--state", str(state_file), "--dialect", "sqlite"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "-- s := s \\/ t" in out
    assert "-- s__prime := select" in out
    assert "insert or ignore into s" in out


def test_translate_rejects_bad_syntax(state_file, capsys):
    assert main(["translate", "--expr", "s +", "--env", str(state_file)]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_translate_rejects_ill_typed_terms(state_file):
    assert main(["translate", "--expr", "s \\/ r", "--env", str(state_file)]) == EXIT_USAGE


def test_eval_commands(state_file, capsys):
    assert main(["eval-eb", "--state", str(state_file), "--expr", "card(s)"]) == EXIT_PASS
    assert capsys.readouterr().out.strip() == "2"
    assert main(["eval-sql", "--state", str(state_file), "--expr", "s /\\ t"]) == EXIT_PASS
    assert capsys.readouterr().out.strip() == "{2}"
    assert main(["eval-sql", "--state", str(state_file), "--expr", "1 : s"]) == EXIT_PASS
    assert capsys.readouterr().out.strip() == "true"


def test_exec_writes_the_new_state(state_file, tmp_path):
    actions = tmp_path / "swap.eb"
    actions.write_text("s := t || t := s")
    out = tmp_path / "next.txt"
    assert main(["exec", "--db", str(state_file), "--actions", str(actions), "--out", str(out)]) == EXIT_PASS
    text = out.read_text()
    assert "set s : int = {2}" in text
    assert "set t : int = {1, 2}" in text


def test_missing_state_file_is_a_usage_error(tmp_path, capsys):
    assert main(["eval-eb", "--state", str(tmp_path / "nope.txt"), "--expr", "s"]) == EXIT_USAGE
    assert "cannot read" in capsys.readouterr().err


def test_undecodable_files_are_usage_errors(state_file, tmp_path, capsys):
    garbled = tmp_path / "garbled.txt"
    garbled.write_bytes(b"\xff\xfe s := t")
    assert main(["eval-eb", "--state", str(garbled), "--expr", "s"]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error: cannot read")
    assert main(["exec", "--db", str(state_file), "--actions", str(garbled)]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error: cannot read")


def test_exec_overrides_with_repeated_keys(tmp_path):
    state = tmp_path / "state.txt"
    state.write_text("rel r : int * int = {(1, 1)}\nrel q : int * int = {(2, 1), (2, 2)}\n")
    actions = tmp_path / "ovl.eb"
    actions.write_text("r := r <+ q")
    out = tmp_path / "next.txt"
    assert main(["exec", "--db", str(state), "--actions", str(actions), "--out", str(out)]) == EXIT_PASS
    assert "rel r : int * int = {(1, 1), (2, 1), (2, 2)}" in out.read_text()


def test_check_passes(state_file, capsys):
    assert main(["check", "--db", str(state_file), "--expr", "s /\\ t"]) == EXIT_PASS
    assert json.loads(capsys.readouterr().out) == {"verdict": "pass"}


def test_check_reports_a_counterexample(state_file, capsys):
    code = main(["check", "--db", str(state_file), "--expr", "s /\\ t", "--mutation", "inter_as_diff"])
    assert code == EXIT_COUNTEREXAMPLE
    record = json.loads(capsys.readouterr().out)
    assert record["verdict"] == "fail"
    assert record["shrunk"] is True


def test_fuzz_with_zero_cases(capsys):
    assert main(["fuzz", "--cases", "0"]) == EXIT_PASS
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["cases_run"] == 0


def test_fuzz_is_deterministic(capsys):
    argv = ["fuzz", "--seed", "7", "--cases", "20", "--mode", "actions", "--all-cases"]
    assert main(argv) == EXIT_PASS
    first = capsys.readouterr().out
    assert main(argv) == EXIT_PASS
    assert capsys.readouterr().out == first
    assert len(first.strip().splitlines()) == 21


def test_identities_single_name(capsys):
    assert main(["identities", "--name", "difference_of_intersection"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "difference_of_intersection: 64 states" in out
    assert out.strip().endswith("pass")


@pytest.mark.parametrize("argv", [
    [],
    ["translate", "--env", "x"],
    ["fuzz", "--mode", "nonsense"],
    ["fuzz", "--cases", "-1"],
    ["fuzz", "--workers", "0"],
    ["translate", "--expr", "s", "--dialect", "postgres"],
])
def test_usage_errors_exit_with_two(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == EXIT_USAGE


def test_parser_defaults_follow_environment(monkeypatch):
    monkeypatch.setenv("EBSQL_SEED", "99")
    monkeypatch.setenv("EBSQL_DIALECT", "sqlite")
    args = build_parser().parse_args(["fuzz"])
    assert args.seed == 99
    assert args.dialect == "sqlite"
