import json

import pytest

from models import eb_ast as eb
from models.core import BoolV, Database, IntV, Relation, SetV
from services.checker import (
    ACTIONS_MODE, EXPR_MODE, IDENTITIES, Counterexample, check_case, check_permutations, check_theorem1,
    check_theorem2, generate_case, identity_states, identity_suite, run_case, run_fuzz, shrink, sql_value,
)
from services.eb_parser import parse_actions, parse_expr
from services.generator import GenConfig
from services.translator import TranslatorOptions, eb2sql_res, options_for


def test_sql_value(db, env):
    assert sql_value(parse_expr("card(s /\\ t)"), db, env) == IntV(2)
    assert sql_value(parse_expr("2 : s"), db, env) == BoolV(True)
    assert sql_value(parse_expr("s \\ t"), db, env) == SetV.of(1)


@pytest.mark.parametrize("source", [
    "s \\/ t", "s /\\ t", "s \\ t", "s ** t", "dom(r)", "ran(r)", "r~", "r ; q", "q circ r", "r <+ q",
    "r[s]", "s <| r", "s <<| r", "r |> {30}", "r |>> {30}", "card(r)", "{}", "{1, 1, 2}",
    "r /\\ q", "r \\ q", "r \\/ q", "u \\/ s",
    "s = t", "s <: t", "s /\\ t <<: t", "4 : t", "4 : s", "true : b", "not (card(s) = 3)",
    "s = s & (u = {} or 1 : u)", "r~~ = r",
])
def test_theorem1_holds_on_fixture(db, env, source):
    assert check_theorem1(parse_expr(source), db, env) is None


@pytest.mark.parametrize("source", [
    "s := s \\/ t", "s := s \\ t", "s := s /\\ t", "r := r <+ q", "r := {1, 3} <<| r",
    "r := {1, 3} <| r", "r := r |>> {30}", "r := r |> {30}", "s := t", "r := q ; r",
    "s := t || t := s", "s := s \\/ t || t := s /\\ t || r := r <+ q",
])
def test_theorem2_holds_on_fixture(db, env, source):
    actions = parse_actions(source)
    assert check_theorem2(actions, db, env) is None
    assert check_theorem2(actions, db, env, TranslatorOptions(force_general=True)) is None
    assert check_permutations(actions, db, env) is None


def test_overriding_with_repeated_keys():
    db = Database({"r": Relation.of_pairs((1, 1)), "q": Relation.of_pairs((2, 1), (2, 2))})
    actions = parse_actions("r := r <+ q")
    assert check_theorem2(actions, db) is None
    after = eb2sql_res(actions, db)
    assert after.lookup("r") == Relation.of_pairs((1, 1), (2, 1), (2, 2))


@pytest.mark.parametrize("source", ["r := {}", "r := r <+ {}", "r := r \\/ {}", "s := {}", "r := {} <<| r"])
def test_empty_literal_assignments(db, env, source):
    actions = parse_actions(source)
    assert check_theorem2(actions, db, env) is None
    assert check_theorem2(actions, db, env, TranslatorOptions(force_general=True)) is None


@pytest.mark.parametrize("source", ["r = {}", "r <+ {}", "{} \\/ r", "card(r /\\ {})", "{} <: q", "(r \\ r) = {}"])
def test_empty_literal_in_relation_context(db, env, source):
    assert check_theorem1(parse_expr(source), db, env) is None


def test_swap_program_exchanges_state():
    db = Database({"s": Relation.of_set(1), "t": Relation.of_set(2)})
    assert check_case(parse_actions("s := t || t := s"), db) is None


# each mutation caught on a hand-picked case

def test_inter_as_diff_is_caught():
    db = Database({"s": Relation.of_set(1, 2), "t": Relation.of_set(2)})
    failure = check_theorem1(parse_expr("s /\\ t"), db, options=options_for(mutation="inter_as_diff"))
    assert failure is not None
    assert failure.eb_result == "{2}" and failure.sql_result == "{1}"


def test_swap_domres_domsub_is_caught(db):
    options = options_for(mutation="swap_domres_domsub")
    assert check_theorem1(parse_expr("{1} <| r"), db, options=options) is not None
    assert check_theorem2(parse_actions("r := {1} <<| r"), db, options=options) is not None


def test_ovl_insert_first_is_caught():
    db = Database({"r": Relation.of_pairs((1, 1)), "q": Relation.of_pairs((1, 2))})
    failure = check_theorem2(parse_actions("r := r <+ q"), db, options=options_for(mutation="ovl_insert_first"))
    assert failure is not None
    assert failure.sql_result == "{q = {1 |-> 2}, r = {}}"


def test_dom_no_distinct_is_caught(db):
    failure = check_theorem1(parse_expr("dom(r)"), db, options=options_for(mutation="dom_no_distinct"))
    assert failure is not None
    assert "DuplicateRowError" in failure.error


def test_drop_ignore_is_caught(db):
    failure = check_theorem2(parse_actions("s := s \\/ t"), db, options=options_for(mutation="drop_ignore"))
    assert failure is not None
    assert failure.error.startswith("sql: AssignmentError")


def test_counterexample_record(db, env):
    failure = check_theorem1(parse_expr("s /\\ t"), db, env, options_for(mutation="inter_as_diff"))
    record = failure.to_record()
    assert record["verdict"] == "fail"
    assert record["mode"] == EXPR_MODE
    assert record["program"] == "s /\\ t"
    assert "set s : int = {1, 2, 3}" in record["db"]


# shrinking

def test_shrink_reduces_program_and_database(db, env):
    options = options_for(mutation="inter_as_diff")
    program = parse_expr("(s \\/ {4}) /\\ (t \\/ u)")
    failure = check_theorem1(program, db, env, options)
    small = shrink(failure, options)
    assert small.shrunk
    assert check_theorem1(small.program, small.db, env, options) is not None
    size = sum(len(small.db.lookup(name)) for name in small.db.names())
    assert size < sum(len(db.lookup(name)) for name in db.names())
    assert len(str(small.program)) <= len(str(program))


def test_shrink_refuses_a_passing_case(db, env):
    case = Counterexample(mode=EXPR_MODE, program=parse_expr("s"), db=db, env=env)
    with pytest.raises(ValueError):
        shrink(case)


def test_shrink_keeps_action_sets_well_formed(db, env):
    options = options_for(mutation="drop_ignore")
    failure = check_case(parse_actions("s := s \\/ t || t := t \\ s"), db, env, options)
    small = shrink(failure, options)
    assert isinstance(small.program, eb.ActionSet)
    assert small.program.targets == ("s",)


# fuzzing

def test_generate_case_is_reproducible():
    cfg = GenConfig(seed=42)
    one = generate_case(cfg, 3, ACTIONS_MODE)
    two = generate_case(cfg, 3, ACTIONS_MODE)
    assert one[0] == two[0] and one[1] == two[1]


def test_fuzz_expressions_pass():
    report = run_fuzz(GenConfig(seed=42), 150, EXPR_MODE)
    assert report.cases_run == 150
    assert report.verdict == "pass"


def test_fuzz_actions_pass_with_and_without_special_rules():
    assert run_fuzz(GenConfig(seed=42), 100, ACTIONS_MODE).verdict == "pass"
    assert run_fuzz(GenConfig(seed=42), 60, ACTIONS_MODE, TranslatorOptions(force_general=True)).verdict == "pass"


def test_fuzz_report_is_deterministic():
    first = run_fuzz(GenConfig(seed=7), 40, EXPR_MODE).to_lines(all_cases=True)
    second = run_fuzz(GenConfig(seed=7), 40, EXPR_MODE).to_lines(all_cases=True)
    assert first == second
    assert len(first) == 41


def test_fuzz_with_workers_matches_serial_run():
    serial = run_fuzz(GenConfig(seed=9), 24, EXPR_MODE).to_lines(all_cases=True)
    parallel = run_fuzz(GenConfig(seed=9), 24, EXPR_MODE, workers=2).to_lines(all_cases=True)
    assert serial == parallel


def test_zero_cases_gives_an_empty_passing_report():
    report = run_fuzz(GenConfig(seed=42), 0)
    lines = report.to_lines()
    assert len(lines) == 1
    assert json.loads(lines[0]) == {"cases_run": 0, "failures": 0, "mode": "expr", "seed": 42, "verdict": "pass"}


def test_unknown_mode():
    with pytest.raises(ValueError):
        run_fuzz(GenConfig(), 1, "nonsense")


def test_fuzz_finds_the_intersection_mutation():
    options = options_for(mutation="inter_as_diff")
    cfg = GenConfig(seed=42)
    report = run_fuzz(cfg, 500, EXPR_MODE, options, shrink_failures=False)
    assert report.verdict == "fail"
    first = report.failures[0]
    shrunk = run_case(cfg, first.case, EXPR_MODE, options).counterexample
    assert shrunk.shrunk and shrunk.seed == 42
    assert json.loads(json.dumps(shrunk.to_record()))["case"] == first.case


@pytest.mark.parametrize("mutation, mode", [
    ("inter_as_diff", EXPR_MODE),
    ("swap_domres_domsub", EXPR_MODE),
    ("swap_domres_domsub", ACTIONS_MODE),
    ("ovl_insert_first", ACTIONS_MODE),
    ("dom_no_distinct", EXPR_MODE),
    ("drop_ignore", ACTIONS_MODE),
])
def test_fuzz_catches_each_mutation_within_a_thousand_cases(mutation, mode):
    options = options_for(mutation=mutation)
    cfg = GenConfig(seed=42)
    report = run_fuzz(cfg, 1000, mode, options, shrink_failures=False)
    assert report.verdict == "fail"
    first = report.failures[0].case
    # the same prefix of cases fails at the same index
    again = run_fuzz(cfg, first + 1, mode, options, shrink_failures=False)
    assert [cx.case for cx in again.failures][:1] == [first]
    assert run_case(cfg, first, mode, options).counterexample is not None


# full-size runs at the default seed

@pytest.mark.slow
@pytest.mark.parametrize("mode, cases", [(EXPR_MODE, 10000), (ACTIONS_MODE, 5000)])
@pytest.mark.parametrize("force_general", [False, True])
def test_full_fuzz_run_passes(mode, cases, force_general):
    report = run_fuzz(GenConfig(seed=42), cases, mode, TranslatorOptions(force_general=force_general), workers=4)
    assert report.cases_run == cases
    assert report.verdict == "pass", report.to_lines()[:3]


# identities

def test_identity_universe_sizes():
    assert sum(1 for _ in identity_states("difference_of_intersection")) == 64
    assert sum(1 for _ in identity_states("difference_of_domain_restriction")) == 512 * 8


def test_identity_suite_passes():
    report = identity_suite()
    assert report.verdict == "pass"
    assert set(report.checked) == set(IDENTITIES)


def test_identity_suite_through_sql():
    report = identity_suite(["difference_of_intersection"], through_sql=True)
    assert report.verdict == "pass"
    assert report.checked == {"difference_of_intersection": 64}
