#!/usr/bin/env python3
"""
Command-line entry point.

    python cli.py translate --expr "dom(r)" --env state.txt
    python cli.py exec --db state.txt --actions swap.eb --out next.txt
    python cli.py fuzz --seed 42 --cases 1000 --mode actions

Exit codes: 0 pass, 1 counterexample, 2 usage/parse/type/input errors.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from models import sql_ast as sql
from models.core import primed
from models.errors import EbSqlError
from services.checker import EXPR_MODE, IDENTITIES, MODES, check_case, identity_suite, run_fuzz, shrink
from services.eb_eval import eval_expr
from services.eb_parser import parse_actions, parse_expr
from services.generator import GenConfig
from services.rep import rep_db, rep_value
from services.sql_emit import Dialect, emit_sql
from services.sql_eval import eval_predicate, eval_query
from services.state_file import load_state, read_state, write_state
from services.translator import Mutation, eb2sql_expr, eb2sql_res, options_for, translate_actions
from services.typecheck import typecheck

logger = logging.getLogger("ebsql")

EXIT_PASS = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read {path}: {getattr(e, 'strerror', None) or e}") from e


def _load(path: Optional[str]):
    if path is None:
        return read_state("")
    try:
        return load_state(path)
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read {path}: {getattr(e, 'strerror', None) or e}") from e


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        logger.info(f"wrote {args.out}")
    else:
        print(text.rstrip("\n"))


def _program(args):
    if getattr(args, "expr", None) is not None:
        return parse_expr(args.expr)
    return parse_actions(_read_text(args.actions))


# subcommands

def cmd_translate(args) -> int:
    _, env = _load(args.env or args.state)
    options = options_for(args.force_general, args.mutation)
    program = _program(args)
    typecheck(program, env)
    if args.expr is not None:
        _write(args, emit_sql(eb2sql_expr(program, env, options), args.dialect, args.explicit_columns))
        return EXIT_PASS

    lines: List[str] = []
    for assignment, statements, primed_def in translate_actions(program, env, options):
        query = emit_sql(eb2sql_expr(primed_def, env, options), args.dialect, args.explicit_columns)
        lines.append(f"-- {assignment}")
        lines.append(f"-- {primed(assignment.target)} := {query}")
        lines.append(emit_sql(statements, args.dialect, args.explicit_columns))
    _write(args, "\n".join(lines))
    return EXIT_PASS


def cmd_eval_eb(args) -> int:
    db, env = _load(args.state)
    node = parse_expr(args.expr)
    typecheck(node, env)
    _write(args, str(eval_expr(node, rep_db(db))))
    return EXIT_PASS


def cmd_eval_sql(args) -> int:
    db, env = _load(args.state)
    node = parse_expr(args.expr)
    typecheck(node, env)
    translated = eb2sql_expr(node, env, options_for(args.force_general))
    if isinstance(translated, sql.SqlPred):
        _write(args, "true" if eval_predicate(translated, db) else "false")
    else:
        _write(args, str(rep_value(eval_query(translated, db))))
    return EXIT_PASS


def cmd_exec(args) -> int:
    db, env = _load(args.db)
    actions = parse_actions(_read_text(args.actions))
    typecheck(actions, env)
    result = eb2sql_res(actions, db, options_for(args.force_general, args.mutation))
    _write(args, write_state(result, env))
    return EXIT_PASS


def cmd_check(args) -> int:
    db, env = _load(args.db)
    program = _program(args)
    typecheck(program, env)
    options = options_for(args.force_general, args.mutation)
    failure = check_case(program, db, env, options)
    if failure is None:
        _write(args, json.dumps({"verdict": "pass"}, sort_keys=True))
        return EXIT_PASS
    _write(args, json.dumps(shrink(failure, options).to_record(), sort_keys=True))
    return EXIT_COUNTEREXAMPLE


def cmd_fuzz(args) -> int:
    cfg = GenConfig(seed=args.seed, max_depth=args.max_depth)
    options = options_for(args.force_general, args.mutation)
    report = run_fuzz(
        cfg, args.cases, args.mode, options,
        workers=args.workers, shrink_failures=not args.no_shrink,
        progress=lambda done: logger.info(f"{done}/{args.cases} cases"),
    )
    _write(args, "\n".join(report.to_lines(all_cases=args.all_cases)))
    return EXIT_COUNTEREXAMPLE if report.failures else EXIT_PASS


def cmd_identities(args) -> int:
    report = identity_suite(args.name or None, through_sql=args.through_sql)
    lines = [f"{name}: {count} states" for name, count in report.checked.items()]
    lines.extend(f"FAIL {name}: {state}" for name, state in report.failures)
    lines.append(report.verdict)
    _write(args, "\n".join(lines))
    return EXIT_COUNTEREXAMPLE if report.failures else EXIT_PASS


# argument parsing

def _env_int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, str(default)))
    except ValueError:
        return default


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dialect", choices=[d.value for d in Dialect],
                        default=os.getenv("EBSQL_DIALECT", "mysql"), help="SQL dialect (default mysql)")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--force-general", action="store_true", help="translate every assignment with rules 9/10")
    common.add_argument("--mutation", choices=[m.value for m in Mutation], help="enable one broken translation rule")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="ebsql", description="Event-B to SQL translator and checker")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("translate", parents=[common], help="print the SQL for an expression or action set")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--expr", help="expression or predicate text")
    source.add_argument("--actions", metavar="FILE", help="file holding 'v := E || ...'")
    types = p.add_mutually_exclusive_group()
    types.add_argument("--env", metavar="FILE", help="state file declaring the variables")
    types.add_argument("--state", metavar="FILE", help="state file; only its declarations are used")
    p.add_argument("--explicit-columns", action="store_true", help="alias projected columns to their output names")
    p.set_defaults(handler=cmd_translate)

    p = commands.add_parser("eval-eb", parents=[common], help="evaluate with the Event-B interpreter")
    p.add_argument("--state", metavar="FILE", required=True)
    p.add_argument("--expr", required=True)
    p.set_defaults(handler=cmd_eval_eb)

    p = commands.add_parser("eval-sql", parents=[common], help="evaluate the translated query")
    p.add_argument("--state", metavar="FILE", required=True)
    p.add_argument("--expr", required=True)
    p.set_defaults(handler=cmd_eval_sql)

    p = commands.add_parser("exec", parents=[common], help="run the translated actions and write the new state")
    p.add_argument("--db", metavar="FILE", required=True)
    p.add_argument("--actions", metavar="FILE", required=True)
    p.set_defaults(handler=cmd_exec)

    p = commands.add_parser("check", parents=[common], help="compare SQL and Event-B results on one case")
    p.add_argument("--db", metavar="FILE", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--actions", metavar="FILE")
    source.add_argument("--expr")
    p.set_defaults(handler=cmd_check)

    p = commands.add_parser("fuzz", parents=[common], help="generate and check random cases")
    p.add_argument("--seed", type=int, default=_env_int("EBSQL_SEED", 42))
    p.add_argument("--cases", type=int, default=_env_int("EBSQL_CASES", 1000))
    p.add_argument("--max-depth", type=int, default=_env_int("EBSQL_MAX_DEPTH", 5))
    p.add_argument("--mode", choices=MODES, default=EXPR_MODE)
    p.add_argument("--workers", type=int, default=_env_int("EBSQL_WORKERS", 1))
    p.add_argument("--all-cases", action="store_true", help="report passing cases as well")
    p.add_argument("--no-shrink", action="store_true", help="report counterexamples unshrunk")
    p.set_defaults(handler=cmd_fuzz)

    p = commands.add_parser("identities", parents=[common], help="exhaustively check the set identities")
    p.add_argument("--name", action="append", choices=list(IDENTITIES), help="check only this identity (repeatable)")
    p.add_argument("--through-sql", action="store_true", help="also compare the translated queries")
    p.set_defaults(handler=cmd_identities)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.INFO if args.verbose else os.getenv("LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    if getattr(args, "cases", 0) < 0 or getattr(args, "workers", 1) < 1:
        parser.error("--cases must be >= 0 and --workers >= 1")

    try:
        return args.handler(args)
    except (EbSqlError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
