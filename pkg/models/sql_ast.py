"""
Abstract syntax for the SQL fragment: select/union/count queries and
insert-ignore-select, delete and delete-where statements.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

from .core import COUNT_SCHEMA, Scalar


class CompareOp(enum.Enum):
    EQ = "="
    NE = "<>"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="


# Terms

class SqlTerm:
    pass


@dataclass(frozen=True)
class ColRef(SqlTerm):
    alias: str
    attr: str


@dataclass(frozen=True)
class LitScalar(SqlTerm):
    value: Scalar


@dataclass(frozen=True)
class SubqueryTerm(SqlTerm):
    """A one-row, one-column query used as an atomic value (count results)"""

    query: "SqlQuery"


# Predicates

class SqlPred:
    pass


@dataclass(frozen=True)
class TrueP(SqlPred):
    pass


@dataclass(frozen=True)
class Not(SqlPred):
    operand: SqlPred


@dataclass(frozen=True)
class And(SqlPred):
    left: SqlPred
    right: SqlPred


@dataclass(frozen=True)
class Or(SqlPred):
    left: SqlPred
    right: SqlPred


@dataclass(frozen=True)
class Compare(SqlPred):
    left: SqlTerm
    op: CompareOp
    right: SqlTerm


@dataclass(frozen=True)
class InSubquery(SqlPred):
    """``t in (select ...)``; several terms form a row value ``(a, b) in (...)``"""

    terms: Tuple[SqlTerm, ...]
    query: "SqlQuery"


@dataclass(frozen=True)
class NotInSubquery(InSubquery):
    pass


# Sources and queries

class TableSource:
    alias: str


@dataclass(frozen=True)
class Named(TableSource):
    table: str
    alias: str


@dataclass(frozen=True)
class Derived(TableSource):
    query: "SqlQuery"
    alias: str


class SqlQuery:
    pass


@dataclass(frozen=True)
class Select(SqlQuery):
    columns: Tuple[Tuple[SqlTerm, str], ...]
    sources: Tuple[TableSource, ...] = ()
    where: SqlPred = TrueP()
    distinct: bool = False


@dataclass(frozen=True)
class UnionQ(SqlQuery):
    left: SqlQuery
    right: SqlQuery


@dataclass(frozen=True)
class CountQ(SqlQuery):
    column: SqlTerm
    source: TableSource


def output_schema(query: SqlQuery) -> Tuple[str, ...]:
    if isinstance(query, Select):
        return tuple(name for _, name in query.columns)
    if isinstance(query, UnionQ):
        return output_schema(query.left)
    if isinstance(query, CountQ):
        return COUNT_SCHEMA
    raise TypeError(f"not a query: {query!r}")


# Statements

class SqlStatement:
    table: str


@dataclass(frozen=True)
class InsertIgnoreSelect(SqlStatement):
    table: str
    query: SqlQuery
    # False only under the drop_ignore mutation: a plain insert rejects existing rows
    ignore: bool = True


@dataclass(frozen=True)
class DeleteAll(SqlStatement):
    table: str


@dataclass(frozen=True)
class DeleteWhere(SqlStatement):
    table: str
    where: SqlPred
