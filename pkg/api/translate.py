from fastapi import APIRouter, HTTPException
from typing import List, Optional, Union
from pydantic import BaseModel, Field, model_validator
import logging
import os

from models import sql_ast as sql
from models.core import Relation, ScalarKind
from models.errors import EbSqlError, EbTypeError, ParseError, UnboundVariable
from services.eb_eval import eval_expr
from services.eb_parser import parse_actions, parse_expr
from services.rep import rep_db, rep_value
from services.sql_emit import Dialect, emit_sql
from services.sql_eval import eval_predicate, eval_query
from services.state_file import read_state, write_state
from services.translator import (
    TranslatorOptions, eb2sql_expr, eb2sql_res, matched_rule, translate_actions,
)
from services.typecheck import typecheck

router = APIRouter(prefix="/api", tags=["translation"])
logger = logging.getLogger(__name__)


def default_dialect() -> Dialect:
    return Dialect(os.getenv("EBSQL_DIALECT", "mysql"))


def http_error(e: EbSqlError) -> HTTPException:
    """Input problems are 422, evaluation/translation failures 400"""
    if isinstance(e, (ParseError, EbTypeError, UnboundVariable)):
        return HTTPException(status_code=422, detail=str(e))
    return HTTPException(status_code=400, detail=str(e))


# Request/Response Models
class TranslateRequest(BaseModel):
    """Exactly one of expr or actions"""
    expr: Optional[str] = Field(None, example="dom(r) \\/ s", description="Expression or predicate")
    actions: Optional[str] = Field(None, example="s := s \\/ t || r := r <+ q", description="Action set")
    env: str = Field(
        "",
        example="set s : int\nset t : int\nrel r : int * int\nrel q : int * int",
        description="State-file text declaring the variables; values are ignored"
    )
    dialect: Optional[Dialect] = Field(None, description="mysql (default) or sqlite")
    force_general: bool = Field(False, description="Use only the two general assignment rules")
    explicit_columns: bool = Field(False, description="Alias projected columns to their output names")

    @model_validator(mode="after")
    def one_input(self):
        if (self.expr is None) == (self.actions is None):
            raise ValueError("provide exactly one of 'expr' or 'actions'")
        return self


class AssignmentSql(BaseModel):
    assignment: str
    rule: int
    statements: List[str]
    primed_definition: str
    primed_query: str


class TranslateResponse(BaseModel):
    kind: str  # query | predicate | actions
    sql: str
    assignments: Optional[List[AssignmentSql]] = None


class EvalRequest(BaseModel):
    state: str = Field(..., example="set s : int = {1, 2}", description="State-file text")
    expr: str = Field(..., example="card(s)")


class EvalResponse(BaseModel):
    value: str


class SqlEvalResponse(BaseModel):
    value: str
    columns: List[str] = []
    rows: List[List[Union[bool, int]]] = []


class ExecRequest(BaseModel):
    state: str = Field(..., example="set s : int = {1}\nset t : int = {2}")
    actions: str = Field(..., example="s := t || t := s")
    force_general: bool = False


class ExecResponse(BaseModel):
    state: str


def _rows(rel: Relation) -> List[List[Union[bool, int]]]:
    return [[bool(v.value) if v.kind is ScalarKind.BOOL else v.value for v in values] for values in rel.value_tuples()]


@router.post("/translate", response_model=TranslateResponse)
async def translate(request: TranslateRequest):
    """
    Translate an expression, predicate or action set to SQL text
    """
    dialect = request.dialect or default_dialect()
    options = TranslatorOptions(force_general=request.force_general)
    try:
        _, env = read_state(request.env)
        if request.expr is not None:
            node = parse_expr(request.expr)
            typecheck(node, env)
            translated = eb2sql_expr(node, env, options)
            kind = "predicate" if isinstance(translated, sql.SqlPred) else "query"
            return TranslateResponse(kind=kind, sql=emit_sql(translated, dialect, request.explicit_columns))

        actions = parse_actions(request.actions)
        typecheck(actions, env)
        assignments = []
        everything = []
        for assignment, statements, primed_def in translate_actions(actions, env, options):
            everything.extend(statements)
            assignments.append(AssignmentSql(
                assignment=str(assignment),
                rule=matched_rule(assignment, env, options),
                statements=[emit_sql(s, dialect, request.explicit_columns) for s in statements],
                primed_definition=str(primed_def),
                primed_query=emit_sql(eb2sql_expr(primed_def, env, options), dialect, request.explicit_columns),
            ))
        return TranslateResponse(
            kind="actions",
            sql=emit_sql(everything, dialect, request.explicit_columns),
            assignments=assignments,
        )
    except EbSqlError as e:
        logger.info(f"translate rejected input: {e}")
        raise http_error(e)


@router.post("/eval/eb", response_model=EvalResponse)
async def evaluate_event_b(request: EvalRequest):
    """
    Evaluate an expression with the Event-B interpreter
    """
    try:
        db, env = read_state(request.state)
        node = parse_expr(request.expr)
        typecheck(node, env)
        return EvalResponse(value=str(eval_expr(node, rep_db(db))))
    except EbSqlError as e:
        raise http_error(e)


@router.post("/eval/sql", response_model=SqlEvalResponse)
async def evaluate_sql(request: EvalRequest):
    """
    Translate an expression and evaluate the query with the SQL interpreter
    """
    try:
        db, env = read_state(request.state)
        node = parse_expr(request.expr)
        typecheck(node, env)
        translated = eb2sql_expr(node, env)
        if isinstance(translated, sql.SqlPred):
            holds = eval_predicate(translated, db)
            return SqlEvalResponse(value="true" if holds else "false")
        result = eval_query(translated, db)
        return SqlEvalResponse(value=str(rep_value(result)), columns=list(result.schema), rows=_rows(result))
    except EbSqlError as e:
        raise http_error(e)


@router.post("/exec", response_model=ExecResponse)
async def execute(request: ExecRequest):
    """
    Run the translated action set against the state and return the new state
    """
    try:
        db, env = read_state(request.state)
        actions = parse_actions(request.actions)
        typecheck(actions, env)
        result = eb2sql_res(actions, db, TranslatorOptions(force_general=request.force_general))
        return ExecResponse(state=write_state(result, env))
    except EbSqlError as e:
        raise http_error(e)
