"""
SQL text emission.

Lower-case keywords, single spaces, parenthesised subqueries. The default
output spells queries the way the translation rules write them; pass
``explicit_columns=True`` to add ``as`` aliases wherever a projected attribute
differs from the output column name, which real engines need once results
are nested.
"""

import enum
from typing import Iterable, Union as AnyOf

from models import sql_ast as sql
from models.core import ScalarKind


class Dialect(str, enum.Enum):
    MYSQL = "mysql"
    SQLITE = "sqlite"


class SqlEmitter:
    def __init__(self, dialect: Dialect = Dialect.MYSQL, explicit_columns: bool = False):
        self.dialect = Dialect(dialect)
        self.explicit_columns = explicit_columns

    # terms

    def term(self, term: sql.SqlTerm) -> str:
        if isinstance(term, sql.ColRef):
            return f"{term.alias}.{term.attr}"
        if isinstance(term, sql.LitScalar):
            scalar = term.value
            if scalar.kind is ScalarKind.BOOL:
                return "1" if scalar.value else "0"
            return str(scalar.value)
        if isinstance(term, sql.SubqueryTerm):
            return f"({self.query(term.query)})"
        raise TypeError(f"unknown term {term!r}")

    def column(self, term: sql.SqlTerm, name: str) -> str:
        text = self.term(term)
        if isinstance(term, sql.ColRef):
            if self.explicit_columns and term.attr != name:
                return f"{text} as {name}"
            return text
        return f"{text} as {name}"

    # predicates

    def pred(self, pred: sql.SqlPred) -> str:
        if isinstance(pred, sql.TrueP):
            return "1 = 1"
        if isinstance(pred, sql.Not):
            return f"not {self._grouped(pred.operand)}"
        if isinstance(pred, sql.And):
            return f"{self._grouped(pred.left)} and {self._grouped(pred.right)}"
        if isinstance(pred, sql.Or):
            return f"{self._grouped(pred.left)} or {self._grouped(pred.right)}"
        if isinstance(pred, sql.Compare):
            return f"{self.term(pred.left)} {pred.op.value} {self.term(pred.right)}"
        if isinstance(pred, sql.InSubquery):
            keyword = "not in" if isinstance(pred, sql.NotInSubquery) else "in"
            if len(pred.terms) == 1:
                subject = self.term(pred.terms[0])
            else:
                subject = "(" + ", ".join(self.term(t) for t in pred.terms) + ")"
            return f"{subject} {keyword} ({self.query(pred.query)})"
        raise TypeError(f"unknown predicate {pred!r}")

    def _grouped(self, pred: sql.SqlPred) -> str:
        text = self.pred(pred)
        if isinstance(pred, (sql.And, sql.Or, sql.Not)):
            return f"({text})"
        return text

    # queries

    def source(self, source: sql.TableSource) -> str:
        if isinstance(source, sql.Named):
            return f"{source.table} {source.alias}"
        return f"({self.query(source.query)}) {source.alias}"

    def query(self, query: sql.SqlQuery) -> str:
        if isinstance(query, sql.Select):
            head = "select distinct " if query.distinct else "select "
            text = head + ", ".join(self.column(term, name) for term, name in query.columns)
            has_where = not isinstance(query.where, sql.TrueP)
            if query.sources:
                text += " from " + ", ".join(self.source(s) for s in query.sources)
            elif has_where and self.dialect is Dialect.MYSQL:
                text += " from dual"
            if has_where:
                text += f" where {self.pred(query.where)}"
            return text
        if isinstance(query, sql.UnionQ):
            # union is associative on sets, so nested unions flatten
            return f"{self.query(query.left)} union {self.query(query.right)}"
        if isinstance(query, sql.CountQ):
            return f"select count({self.term(query.column)}) from {self.source(query.source)}"
        raise TypeError(f"unknown query {query!r}")

    # statements

    def statement(self, statement: sql.SqlStatement) -> str:
        if isinstance(statement, sql.InsertIgnoreSelect):
            if not statement.ignore:
                verb = "insert into"
            elif self.dialect is Dialect.SQLITE:
                verb = "insert or ignore into"
            else:
                verb = "insert ignore into"
            return f"{verb} {statement.table} {self.query(statement.query)}"
        if isinstance(statement, sql.DeleteAll):
            return f"delete from {statement.table}"
        if isinstance(statement, sql.DeleteWhere):
            return f"delete from {statement.table} where {self.pred(statement.where)}"
        raise TypeError(f"unknown statement {statement!r}")

    def sequence(self, statements: Iterable[sql.SqlStatement]) -> str:
        return "\n".join(f"{self.statement(s)};" for s in statements)


Emittable = AnyOf[sql.SqlQuery, sql.SqlPred, sql.SqlStatement, list, tuple]


def emit_sql(node: Emittable, dialect: AnyOf[Dialect, str] = Dialect.MYSQL, explicit_columns: bool = False) -> str:
    """Render a query, predicate, statement, or ``;``-terminated statement list."""
    emitter = SqlEmitter(dialect, explicit_columns)
    if isinstance(node, (list, tuple)):
        return emitter.sequence(node)
    if isinstance(node, sql.SqlQuery):
        return emitter.query(node)
    if isinstance(node, sql.SqlPred):
        return emitter.pred(node)
    if isinstance(node, sql.SqlStatement):
        return emitter.statement(node)
    raise TypeError(f"cannot emit {node!r}")
