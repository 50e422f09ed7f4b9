"""
Semantic evaluator for the SQL fragment over in-memory databases.

Queries are evaluated by nested-loop enumeration of from-clause bindings,
filtered by the where predicate, exactly as the tuple-calculus reading of a
select describes them. Deliberately independent of services.eb_eval.
"""

import itertools
import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from models import sql_ast as sql
from models.core import COUNT_SCHEMA, Database, Relation, Scalar, TupleRow
from models.errors import (
    DuplicateRowError, EbSqlError, KindMismatch, SchemaError, SchemaMismatch, StatementError,
)

logger = logging.getLogger(__name__)

Bindings = Mapping[str, TupleRow]

_EMPTY: Dict[str, TupleRow] = {}


# terms and predicates

def eval_term(term: sql.SqlTerm, db: Database, env: Bindings) -> Scalar:
    if isinstance(term, sql.ColRef):
        if term.alias not in env:
            raise SchemaError(f"tuple variable '{term.alias}' is not in scope")
        try:
            return env[term.alias][term.attr]
        except SchemaMismatch as e:
            raise SchemaError(str(e)) from None
    if isinstance(term, sql.LitScalar):
        return term.value
    if isinstance(term, sql.SubqueryTerm):
        return atomic_value(eval_query(term.query, db, env))
    raise SchemaError(f"unknown term {term!r}")


def atomic_value(rel: Relation) -> Scalar:
    """A single-row, single-attribute relation read as a primitive value"""
    if len(rel.schema) != 1 or len(rel.rows) != 1:
        raise SchemaError(f"expected one row with one attribute, got {len(rel.rows)} rows of {rel.schema}")
    (row,) = rel.rows
    return row[rel.schema[0]]


def _compare(left: Scalar, op: sql.CompareOp, right: Scalar) -> bool:
    left.same_kind(right)
    a, b = int(left.value), int(right.value)
    if op is sql.CompareOp.EQ:
        return a == b
    if op is sql.CompareOp.NE:
        return a != b
    if op is sql.CompareOp.LT:
        return a < b
    if op is sql.CompareOp.LE:
        return a <= b
    if op is sql.CompareOp.GT:
        return a > b
    return a >= b


def eval_predicate(pred: sql.SqlPred, db: Database, env: Bindings = _EMPTY) -> bool:
    if isinstance(pred, sql.TrueP):
        return True
    if isinstance(pred, sql.Not):
        return not eval_predicate(pred.operand, db, env)
    if isinstance(pred, sql.And):
        return eval_predicate(pred.left, db, env) and eval_predicate(pred.right, db, env)
    if isinstance(pred, sql.Or):
        return eval_predicate(pred.left, db, env) or eval_predicate(pred.right, db, env)
    if isinstance(pred, sql.Compare):
        return _compare(eval_term(pred.left, db, env), pred.op, eval_term(pred.right, db, env))
    if isinstance(pred, sql.InSubquery):
        found = _member(pred, db, env)
        return not found if isinstance(pred, sql.NotInSubquery) else found
    raise SchemaError(f"unknown predicate {pred!r}")


def _member(pred: sql.InSubquery, db: Database, env: Bindings) -> bool:
    """Existence test; the subquery may repeat rows"""
    values = tuple(eval_term(t, db, env) for t in pred.terms)
    schema, rows = _bag(pred.query, db, env)
    if len(schema) != len(values):
        raise SchemaError(f"{len(values)} terms tested against a {len(schema)}-column subquery")
    for row in rows:
        candidate = row.values_in(schema)
        for value, other in zip(values, candidate):
            value.same_kind(other)
        if candidate == values:
            return True
    return False


# queries

def _source(source: sql.TableSource, db: Database, env: Bindings) -> Relation:
    if isinstance(source, sql.Named):
        return db.lookup(source.table)
    return eval_query(source.query, db, env)


def _rename(rows: Sequence[TupleRow], schema: Tuple[str, ...]) -> List[TupleRow]:
    return [TupleRow(tuple(zip(schema, (value for _, value in row.items)))) for row in rows]


def _bag(query: sql.SqlQuery, db: Database, env: Bindings) -> Tuple[Tuple[str, ...], List[TupleRow]]:
    if isinstance(query, sql.Select):
        aliases = [s.alias for s in query.sources]
        if len(set(aliases)) != len(aliases):
            raise SchemaError(f"tuple variables must be unique within a query: {aliases}")
        schema = sql.output_schema(query)
        if len(set(schema)) != len(schema):
            raise SchemaError(f"duplicate output columns {schema}")
        relations = [_source(s, db, env) for s in query.sources]
        rows: List[TupleRow] = []
        # no sources: a single empty binding, i.e. a one-row values select
        for combo in itertools.product(*(rel.rows for rel in relations)):
            binding = dict(env)
            binding.update(zip(aliases, combo))
            if eval_predicate(query.where, db, binding):
                rows.append(TupleRow(tuple((name, eval_term(term, db, binding)) for term, name in query.columns)))
        if query.distinct:
            rows = list(dict.fromkeys(rows))
        return schema, rows

    if isinstance(query, sql.UnionQ):
        left_schema, left_rows = _bag(query.left, db, env)
        right_schema, right_rows = _bag(query.right, db, env)
        if len(left_schema) != len(right_schema):
            raise SchemaError(f"union of {left_schema} with {right_schema}")
        # union removes duplicates
        return left_schema, list(dict.fromkeys(left_rows + _rename(right_rows, left_schema)))

    if isinstance(query, sql.CountQ):
        rel = _source(query.source, db, env)
        count = 0
        for row in rel.rows:
            binding = dict(env)
            binding[query.source.alias] = row
            eval_term(query.column, db, binding)
            count += 1
        return COUNT_SCHEMA, [TupleRow.from_values(COUNT_SCHEMA, (count,))]

    raise SchemaError(f"unknown query {query!r}")


def eval_query_rows(query: sql.SqlQuery, db: Database, env: Bindings = _EMPTY) -> Tuple[Tuple[str, ...], List[TupleRow]]:
    """Raw result with duplicates preserved"""
    return _bag(query, db, env)


def eval_query(query: sql.SqlQuery, db: Database, env: Bindings = _EMPTY) -> Relation:
    """Evaluate to a relation; a result with duplicate rows is an error."""
    schema, rows = _bag(query, db, env)
    distinct = set(rows)
    if len(distinct) != len(rows):
        raise DuplicateRowError(f"query produced {len(rows)} rows but only {len(distinct)} are distinct")
    return Relation(schema, frozenset(distinct))


# statements

def _rename_term(term: sql.SqlTerm, old: str, new: str) -> sql.SqlTerm:
    if isinstance(term, sql.ColRef) and term.alias == old:
        return sql.ColRef(new, term.attr)
    if isinstance(term, sql.SubqueryTerm):
        return sql.SubqueryTerm(_rename_query(term.query, old, new))
    return term


def _rename_query(query: sql.SqlQuery, old: str, new: str) -> sql.SqlQuery:
    if isinstance(query, sql.UnionQ):
        return sql.UnionQ(_rename_query(query.left, old, new), _rename_query(query.right, old, new))
    sources = query.sources if isinstance(query, sql.Select) else (query.source,)
    if any(s.alias == old for s in sources):
        # rebinding the name shadows it
        return query
    renamed_sources = tuple(
        sql.Derived(_rename_query(s.query, old, new), s.alias) if isinstance(s, sql.Derived) else s
        for s in sources
    )
    if isinstance(query, sql.CountQ):
        return sql.CountQ(_rename_term(query.column, old, new), renamed_sources[0])
    return sql.Select(
        tuple((_rename_term(t, old, new), name) for t, name in query.columns),
        renamed_sources,
        rename_pred(query.where, old, new),
        query.distinct,
    )


def rename_pred(pred: sql.SqlPred, old: str, new: str) -> sql.SqlPred:
    """[new/old]pred: replace free occurrences of tuple variable ``old``"""
    if isinstance(pred, sql.Not):
        return sql.Not(rename_pred(pred.operand, old, new))
    if isinstance(pred, (sql.And, sql.Or)):
        return type(pred)(rename_pred(pred.left, old, new), rename_pred(pred.right, old, new))
    if isinstance(pred, sql.Compare):
        return sql.Compare(_rename_term(pred.left, old, new), pred.op, _rename_term(pred.right, old, new))
    if isinstance(pred, sql.InSubquery):
        return type(pred)(
            tuple(_rename_term(t, old, new) for t in pred.terms),
            _rename_query(pred.query, old, new),
        )
    return pred


def _fresh_alias(table: str, pred: sql.SqlPred) -> str:
    alias = "rtmp"
    while alias == table or f"{alias}." in repr(pred) or f"'{alias}'" in repr(pred):
        alias += "_"
    return alias


def _check_insert_kinds(target: Relation, incoming: Relation) -> None:
    if not target.rows or not incoming.rows:
        return
    existing = next(iter(target.rows)).values_in(target.schema)
    for row in incoming.rows:
        for a, b in zip(existing, row.values_in(incoming.schema)):
            try:
                a.same_kind(b)
            except KindMismatch as e:
                raise SchemaError(f"insert into incompatible table: {e}") from None


def exec_statement(statement: sql.SqlStatement, db: Database) -> Database:
    if isinstance(statement, sql.InsertIgnoreSelect):
        target = db.lookup(statement.table)
        result = eval_query(statement.query, db)
        if len(result.schema) != len(target.schema):
            raise SchemaError(
                f"cannot insert {len(result.schema)}-column rows into '{statement.table}' {target.schema}"
            )
        _check_insert_kinds(target, result)
        incoming = frozenset(_rename(list(result.rows), target.schema))
        if not statement.ignore:
            clash = incoming & target.rows
            if clash:
                raise DuplicateRowError(f"insert into '{statement.table}' duplicates {len(clash)} existing rows")
        return db.update(statement.table, target.with_rows(target.rows | incoming))

    if isinstance(statement, sql.DeleteAll):
        target = db.lookup(statement.table)
        return db.update(statement.table, target.empty())

    if isinstance(statement, sql.DeleteWhere):
        target = db.lookup(statement.table)
        alias = _fresh_alias(statement.table, statement.where)
        doomed = sql.Select(
            tuple((sql.ColRef(alias, attr), attr) for attr in target.schema),
            (sql.Named(statement.table, alias),),
            rename_pred(statement.where, statement.table, alias),
        )
        removed = eval_query(doomed, db)
        return db.update(statement.table, target.with_rows(target.rows - removed.rows))

    raise SchemaError(f"unknown statement {statement!r}")


def exec_sequence(statements: Sequence[sql.SqlStatement], db: Database) -> Database:
    """Thread the database through the statements left to right."""
    for index, statement in enumerate(statements):
        try:
            db = exec_statement(statement, db)
        except EbSqlError as e:
            raise StatementError(index, e) from e
    return db
