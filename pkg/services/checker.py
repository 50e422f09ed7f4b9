"""
Differential checks: the Event-B interpreter is the oracle, the translated SQL
run by services.sql_eval is the implementation under test.

  check_theorem1   expression/predicate against a database
  check_theorem2   action set against a database
  check_permutations  every ordering of an action set gives one result
  shrink           greedy reduction of a failing case
  run_fuzz         seeded generation plus checking, optionally on worker processes
  identity_suite   exhaustive check of the set identities the proofs lean on
"""

import dataclasses
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union as AnyOf

from models import eb_ast as eb
from models import sql_ast as sql
from models.core import BoolV, Database, MachineState, Relation, REL_SCHEMA, SET_SCHEMA, SetV, RelV
from models.errors import EbSqlError
from services.eb_eval import eval_actions, eval_expr
from services.eb_parser import parse_expr
from services.generator import ExprGenerator, GenConfig, gen_database
from services.rep import rep_db, rep_value
from services.sql_eval import eval_predicate, eval_query
from services.state_file import write_state
from services.translator import DEFAULT_OPTIONS, TranslatorOptions, eb2sql_expr, eb2sql_res, env_of
from services.typecheck import TypeEnv, typecheck

logger = logging.getLogger(__name__)

Program = AnyOf[eb.EbExpr, eb.EbPred, eb.ActionSet]

EXPR_MODE = "expr"
ACTIONS_MODE = "actions"
MODES = (EXPR_MODE, ACTIONS_MODE)


@dataclass
class Counterexample:
    mode: str
    program: Program
    db: Database
    env: TypeEnv
    eb_result: Optional[str] = None
    sql_result: Optional[str] = None
    error: Optional[str] = None
    shrunk: bool = False
    seed: Optional[int] = None
    case: Optional[int] = None
    # "theorem" for a plain mismatch, "permutation" when only an ordering of the actions disagrees
    kind: str = "theorem"

    def to_record(self) -> dict:
        return {
            "case": self.case,
            "db": write_state(self.db, self.env),
            "eb_result": self.eb_result,
            "error": self.error,
            "mode": self.mode,
            "program": str(self.program),
            "seed": self.seed,
            "shrunk": self.shrunk,
            "sql_result": self.sql_result,
            "verdict": "fail",
        }


@dataclass
class CaseResult:
    case: int
    program: str
    counterexample: Optional[Counterexample] = None


@dataclass
class CheckReport:
    seed: int
    mode: str
    cases_run: int = 0
    failures: List[Counterexample] = field(default_factory=list)
    passed: List[CaseResult] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "fail" if self.failures else "pass"

    def summary(self) -> dict:
        return {
            "cases_run": self.cases_run,
            "failures": len(self.failures),
            "mode": self.mode,
            "seed": self.seed,
            "verdict": self.verdict,
        }

    def to_lines(self, all_cases: bool = False) -> List[str]:
        records = [cx.to_record() for cx in self.failures]
        if all_cases:
            for result in self.passed:
                records.append({
                    "case": result.case, "db": None, "eb_result": None, "error": None, "mode": self.mode,
                    "program": result.program, "seed": self.seed, "shrunk": False, "sql_result": None,
                    "verdict": "pass",
                })
            records.sort(key=lambda r: r["case"] if r["case"] is not None else -1)
        lines = [json.dumps(r, sort_keys=True) for r in records]
        lines.append(json.dumps(self.summary(), sort_keys=True))
        return lines


def _describe(error: Exception) -> str:
    return f"{type(error).__name__}: {error}"



# single checks

def sql_value(node, db: Database, env: Optional[TypeEnv] = None, options: TranslatorOptions = DEFAULT_OPTIONS):
    """Value of the translated term: BoolV for predicates, rep of the query result otherwise"""
    translated = eb2sql_expr(node, env if env is not None else env_of(db), options)
    if isinstance(translated, sql.SqlPred):
        return BoolV(eval_predicate(translated, db))
    return rep_value(eval_query(translated, db))


def check_theorem1(node, db: Database, env: Optional[TypeEnv] = None,
                   options: TranslatorOptions = DEFAULT_OPTIONS) -> Optional[Counterexample]:
    """rep(result of the translated query) must equal the Event-B value of the term."""
    env = env if env is not None else env_of(db)
    expected = actual = None
    errors = []
    try:
        expected = eval_expr(node, rep_db(db))
    except EbSqlError as e:
        errors.append(f"event-b: {_describe(e)}")
    try:
        actual = sql_value(node, db, env, options)
    except EbSqlError as e:
        errors.append(f"sql: {_describe(e)}")
    if not errors and expected == actual:
        return None
    return Counterexample(
        mode=EXPR_MODE, program=node, db=db, env=env,
        eb_result=None if expected is None else str(expected),
        sql_result=None if actual is None else str(actual),
        error="; ".join(errors) or None,
    )


def _run_actions(actions: eb.ActionSet, db: Database, options: TranslatorOptions) -> Tuple[Optional[MachineState], Optional[str]]:
    try:
        return rep_db(eb2sql_res(actions, db, options)), None
    except EbSqlError as e:
        return None, f"sql: {_describe(e)}"


def check_theorem2(actions: eb.ActionSet, db: Database, env: Optional[TypeEnv] = None,
                   options: TranslatorOptions = DEFAULT_OPTIONS) -> Optional[Counterexample]:
    """rep of the database after the translated statements must equal the Event-B successor state."""
    env = env if env is not None else env_of(db)
    expected = None
    errors = []
    try:
        expected = eval_actions(actions, rep_db(db))
    except EbSqlError as e:
        errors.append(f"event-b: {_describe(e)}")
    actual, sql_error = _run_actions(actions, db, options)
    if sql_error:
        errors.append(sql_error)
    if not errors and expected == actual:
        return None
    return Counterexample(
        mode=ACTIONS_MODE, program=actions, db=db, env=env,
        eb_result=None if expected is None else str(expected),
        sql_result=None if actual is None else str(actual),
        error="; ".join(errors) or None,
    )


def check_permutations(actions: eb.ActionSet, db: Database, env: Optional[TypeEnv] = None,
                       options: TranslatorOptions = DEFAULT_OPTIONS) -> Optional[Counterexample]:
    """Every ordering of the assignments must produce the same final database."""
    env = env if env is not None else env_of(db)
    baseline, error = _run_actions(actions, db, options)
    if error:
        return Counterexample(mode=ACTIONS_MODE, program=actions, db=db, env=env, error=error, kind="permutation")
    for order in itertools.permutations(actions.assignments):
        permuted = eb.ActionSet(order)
        result, error = _run_actions(permuted, db, options)
        if error or result != baseline:
            return Counterexample(
                mode=ACTIONS_MODE, program=permuted, db=db, env=env,
                eb_result=str(baseline), sql_result=None if result is None else str(result),
                error=error or f"ordering '{permuted}' disagrees with '{actions}'", kind="permutation",
            )
    return None


def check_case(program: Program, db: Database, env: Optional[TypeEnv] = None,
               options: TranslatorOptions = DEFAULT_OPTIONS, permutations: bool = True) -> Optional[Counterexample]:
    if isinstance(program, eb.ActionSet):
        failure = check_theorem2(program, db, env, options)
        if failure is None and permutations and len(program) > 1:
            failure = check_permutations(program, db, env, options)
        return failure
    return check_theorem1(program, db, env, options)


# shrinking

_FIELDS = ("operand", "left", "right")


def _same_category(parent, child) -> bool:
    return (isinstance(parent, eb.EbPred) and isinstance(child, eb.EbPred)) or \
        (isinstance(parent, eb.EbExpr) and isinstance(child, eb.EbExpr))


def _node_reductions(node) -> Iterator:
    for child in eb.children(node):
        if _same_category(node, child):
            yield child
    if isinstance(node, eb.SetLit):
        for i in range(len(node.elems)):
            yield eb.SetLit(node.elems[:i] + node.elems[i + 1:])
    if isinstance(node, eb.RelLit):
        for i in range(len(node.pairs)):
            yield eb.RelLit(node.pairs[:i] + node.pairs[i + 1:])
    for name in _FIELDS:
        if hasattr(node, name):
            for smaller in _node_reductions(getattr(node, name)):
                yield dataclasses.replace(node, **{name: smaller})


def _program_reductions(program: Program) -> Iterator[Program]:
    if isinstance(program, eb.ActionSet):
        items = program.assignments
        for i in range(len(items)):
            yield eb.ActionSet(items[:i] + items[i + 1:])
        for i, assignment in enumerate(items):
            for rhs in _node_reductions(assignment.rhs):
                yield eb.ActionSet(items[:i] + (eb.Assignment(assignment.target, rhs),) + items[i + 1:])
        return
    yield from _node_reductions(program)


def _db_reductions(db: Database) -> Iterator[Database]:
    for name in db.names():
        rel = db.lookup(name)
        if not rel.rows:
            continue
        yield db.update(name, rel.empty())
        for row in sorted(rel.rows, key=repr):
            yield db.update(name, Relation(rel.schema, rel.rows - {row}))


def _well_typed(program: Program, env: TypeEnv) -> bool:
    try:
        typecheck(program, env)
        return True
    except EbSqlError:
        return False


def shrink(counterexample: Counterexample, options: TranslatorOptions = DEFAULT_OPTIONS,
           max_steps: int = 1000) -> Counterexample:
    """Greedy: accept the first smaller program or database that still fails, until none does."""
    env = counterexample.env
    permutations = counterexample.kind == "permutation"

    def failing(program: Program, db: Database) -> Optional[Counterexample]:
        return check_case(program, db, env, options, permutations=permutations)

    current = failing(counterexample.program, counterexample.db)
    if current is None:
        raise ValueError("cannot shrink a case that passes")

    steps = 0
    progress = True
    while progress and steps < max_steps:
        progress = False
        for program in _program_reductions(current.program):
            if not _well_typed(program, env):
                continue
            steps += 1
            smaller = failing(program, current.db)
            if smaller is not None:
                current, progress = smaller, True
                logger.debug(f"shrunk program to {program}")
                break
        if progress:
            continue
        for db in _db_reductions(current.db):
            steps += 1
            smaller = failing(current.program, db)
            if smaller is not None:
                current, progress = smaller, True
                logger.debug(f"shrunk database to {rep_db(db)}")
                break

    current.shrunk = True
    current.seed, current.case = counterexample.seed, counterexample.case
    return current


# fuzzing

def generate_case(cfg: GenConfig, index: int, mode: str) -> Tuple[Program, Database, TypeEnv]:
    rng = cfg.rng(index)
    db, env = gen_database(cfg, rng)
    generator = ExprGenerator(cfg, env, rng)
    program = generator.actions() if mode == ACTIONS_MODE else generator.program()
    return program, db, env


def run_case(cfg: GenConfig, index: int, mode: str, options: TranslatorOptions = DEFAULT_OPTIONS,
             shrink_failures: bool = True) -> CaseResult:
    program, db, env = generate_case(cfg, index, mode)
    failure = check_case(program, db, env, options)
    if failure is not None:
        failure.seed, failure.case = cfg.seed, index
        if shrink_failures:
            try:
                failure = shrink(failure, options)
            except ValueError:
                # flaky failures cannot happen with pure evaluators; keep the raw case if one does
                logger.error(f"case {index} failed once but passes on re-check")
        logger.warning(f"counterexample at case {index}: {failure.program}")
    return CaseResult(case=index, program=str(program), counterexample=failure)


def _run_chunk(args) -> List[CaseResult]:
    cfg, indices, mode, options, shrink_failures = args
    return [run_case(cfg, i, mode, options, shrink_failures) for i in indices]


def run_fuzz(cfg: GenConfig, cases: int, mode: str = EXPR_MODE, options: TranslatorOptions = DEFAULT_OPTIONS,
             workers: int = 1, shrink_failures: bool = True,
             progress: Optional[Callable[[int], None]] = None) -> CheckReport:
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}' (expected one of {', '.join(MODES)})")
    logger.info(f"fuzzing {cases} {mode} cases from seed {cfg.seed} with {workers} worker(s)")
    results: List[CaseResult] = []
    if workers > 1 and cases > 1:
        size = max(1, cases // (workers * 4))
        chunks = [range(start, min(start + size, cases)) for start in range(0, cases, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_chunk, [(cfg, list(c), mode, options, shrink_failures) for c in chunks]):
                results.extend(chunk)
                if progress:
                    progress(len(results))
    else:
        for index in range(cases):
            results.append(run_case(cfg, index, mode, options, shrink_failures))
            if progress and (index + 1) % 100 == 0:
                progress(index + 1)

    report = CheckReport(seed=cfg.seed, mode=mode, cases_run=len(results))
    for result in sorted(results, key=lambda r: r.case):
        if result.counterexample is not None:
            report.failures.append(result.counterexample)
        else:
            report.passed.append(result)
    logger.info(f"fuzzing finished: {report.cases_run} cases, {len(report.failures)} failures")
    return report


# identities

SMALL = (0, 1, 2)

IDENTITIES: Dict[str, Tuple[str, str]] = {
    "difference_of_domain_restriction": ("r \\ (s <| r)", "s <<| r"),
    "difference_of_domain_subtraction": ("r \\ (s <<| r)", "s <| r"),
    "range_restriction_to_complement": ("r |> (ran(r) \\ s)", "r |>> s"),
    "difference_of_range_subtraction": ("r \\ (r |>> s)", "r |> s"),
    "difference_of_intersection": ("s \\ (s /\\ t)", "s \\ t"),
    "overriding_definition": ("r <+ q", "q \\/ (dom(q) <<| r)"),
    "backward_composition_definition": ("r circ q", "q ; r"),
}


def _all_sets() -> List[SetV]:
    return [SetV.of(*combo) for n in range(len(SMALL) + 1) for combo in itertools.combinations(SMALL, n)]


def _all_relations() -> List[RelV]:
    pairs = list(itertools.product(SMALL, SMALL))
    return [RelV.of(*combo) for n in range(len(pairs) + 1) for combo in itertools.combinations(pairs, n)]


def _small_relations() -> List[RelV]:
    """Relations with at most two pairs: the right operand range for two-relation identities"""
    pairs = list(itertools.product(SMALL, SMALL))
    return [RelV.of(*combo) for n in range(3) for combo in itertools.combinations(pairs, n)]


def identity_states(name: str) -> Iterator[MachineState]:
    lhs, rhs = IDENTITIES[name]
    names = eb.variables(parse_expr(lhs)) | eb.variables(parse_expr(rhs))
    if names == {"s", "t"}:
        for s, t in itertools.product(_all_sets(), repeat=2):
            yield MachineState({"s": s, "t": t})
    elif names == {"r", "q"}:
        for r, q in itertools.product(_all_relations(), _small_relations()):
            yield MachineState({"r": r, "q": q})
    else:
        for r, s in itertools.product(_all_relations(), _all_sets()):
            yield MachineState({"r": r, "s": s})


@dataclass
class IdentityReport:
    checked: Dict[str, int] = field(default_factory=dict)
    failures: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "fail" if self.failures else "pass"


def _as_db(m: MachineState) -> Database:
    tables = {}
    for name in m.names():
        value = m.lookup(name)
        if isinstance(value, SetV):
            tables[name] = Relation.from_values(SET_SCHEMA, [(e,) for e in value.elems])
        else:
            tables[name] = Relation.from_values(REL_SCHEMA, list(value.pairs))
    return Database(tables)


def identity_suite(names: Optional[List[str]] = None, through_sql: bool = False) -> IdentityReport:
    """Both sides of each identity must agree on every state; with ``through_sql`` the
    translated queries are compared as well."""
    report = IdentityReport()
    for name in names or list(IDENTITIES):
        lhs, rhs = (parse_expr(text) for text in IDENTITIES[name])
        count = 0
        for m in identity_states(name):
            count += 1
            left, right = eval_expr(lhs, m), eval_expr(rhs, m)
            if left != right:
                report.failures.append((name, str(m)))
                continue
            if through_sql:
                db = _as_db(m)
                if sql_value(lhs, db) != left or sql_value(rhs, db) != right:
                    report.failures.append((name, str(m)))
        report.checked[name] = count
        logger.info(f"identity {name}: {count} states checked")
    return report
