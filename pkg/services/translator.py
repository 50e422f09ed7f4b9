"""
EB2SQL: syntactic translation of Event-B expressions, predicates and
assignments into the SQL fragment, plus the drivers that execute a
translated action set against a database.

Every rule translates its operands first and then allocates its own tuple
variables from one counter per call, so ``Inter(s, t)`` yields
``stmp0``/``stmp1`` for the operands and ``s1tmp2``/``s2tmp3`` for the join.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple, Union as AnyOf

from models import eb_ast as eb
from models import sql_ast as sql
from models.core import (
    REL_SCHEMA, SCALAR_SCHEMA, SET_SCHEMA, Database, Scalar, ScalarKind, is_primed, primed,
)
from models.errors import AssignmentError, EbSqlError, PrimedNamePresent, Untranslatable
from services.sql_eval import eval_query, exec_sequence
from services.typecheck import TypeEnv, resolve_empty_literals, typecheck_expr

logger = logging.getLogger(__name__)


class Mutation(str, enum.Enum):
    """Deliberately broken rules, used to show the differential checks have teeth."""

    INTER_AS_DIFF = "inter_as_diff"
    SWAP_DOMRES_DOMSUB = "swap_domres_domsub"
    OVL_INSERT_FIRST = "ovl_insert_first"
    DOM_NO_DISTINCT = "dom_no_distinct"
    DROP_IGNORE = "drop_ignore"


@dataclass(frozen=True)
class TranslatorOptions:
    # skip the eight special-case assignment rules
    force_general: bool = False
    mutations: FrozenSet[Mutation] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "mutations", frozenset(Mutation(m) for m in self.mutations))

    def has(self, mutation: Mutation) -> bool:
        return mutation in self.mutations


DEFAULT_OPTIONS = TranslatorOptions()

SqlResult = AnyOf[sql.SqlQuery, sql.SqlPred]


def _col(alias: str, attr: str, name: Optional[str] = None) -> Tuple[sql.SqlTerm, str]:
    return (sql.ColRef(alias, attr), name or attr)


def _eq(a: sql.SqlTerm, b: sql.SqlTerm) -> sql.Compare:
    return sql.Compare(a, sql.CompareOp.EQ, b)


def _literal_row(values: Tuple[Scalar, ...], schema: Tuple[str, ...]) -> sql.Select:
    return sql.Select(tuple((sql.LitScalar(v), name) for v, name in zip(values, schema)))


def _literal_rows(rows, schema: Tuple[str, ...]) -> sql.SqlQuery:
    if not rows:
        never = sql.Compare(sql.LitScalar(Scalar.of(1)), sql.CompareOp.EQ, sql.LitScalar(Scalar.of(0)))
        filler = tuple(sql.LitScalar(Scalar.of(0)) for _ in schema)
        return sql.Select(tuple(zip(filler, schema)), (), never)
    query: sql.SqlQuery = _literal_row(rows[0], schema)
    for values in rows[1:]:
        query = sql.UnionQ(query, _literal_row(values, schema))
    return query


class Eb2SqlTranslator:
    """Single-use translator; the alias counter lives as long as the instance."""

    def __init__(self, env: TypeEnv, options: TranslatorOptions = DEFAULT_OPTIONS):
        self.env = env
        self.options = options
        self._counter = 0

    def fresh(self, base: str) -> str:
        alias = f"{base}{self._counter}"
        self._counter += 1
        return alias

    def _type(self, node) -> eb.EbType:
        return typecheck_expr(node, self.env)

    def _is_rel(self, node) -> bool:
        return isinstance(self._type(node), eb.TRel)

    # expressions

    def expr(self, node) -> SqlResult:
        if isinstance(node, eb.EbPred):
            return self.pred(node)
        if isinstance(node, eb.Var):
            if self._is_rel(node):
                alias = self.fresh("rtmp")
                return sql.Select((_col(alias, "id"), _col(alias, "value")), (sql.Named(node.name, alias),))
            alias = self.fresh("stmp")
            return sql.Select((_col(alias, "refkey"),), (sql.Named(node.name, alias),))
        if isinstance(node, (eb.IntLit, eb.BoolLit)):
            return _literal_row((Scalar.of(node.value),), SCALAR_SCHEMA)
        if isinstance(node, eb.SetLit):
            elems = list(dict.fromkeys(node.elems))
            return _literal_rows([(e,) for e in elems], SET_SCHEMA)
        if isinstance(node, eb.RelLit):
            return _literal_rows(list(dict.fromkeys(node.pairs)), REL_SCHEMA)

        if isinstance(node, eb.Card):
            rel = self._is_rel(node.operand)
            return self._count(self.expr(node.operand), rel)
        if isinstance(node, (eb.Dom, eb.Ran)):
            inner = self.expr(node.operand)
            alias = self.fresh("rtmp")
            attr = "id" if isinstance(node, eb.Dom) else "value"
            distinct = not (isinstance(node, eb.Dom) and self.options.has(Mutation.DOM_NO_DISTINCT))
            return sql.Select((_col(alias, attr, "refkey"),), (sql.Derived(inner, alias),), distinct=distinct)
        if isinstance(node, eb.Inverse):
            inner = self.expr(node.operand)
            alias = self.fresh("rtmp")
            return sql.Select((_col(alias, "value", "id"), _col(alias, "id", "value")), (sql.Derived(inner, alias),))

        if isinstance(node, eb.Union):
            return self._union(self.expr(node.left), self.expr(node.right), self._is_rel(node))
        if isinstance(node, eb.Inter):
            return self._meet(self.expr(node.left), self.expr(node.right), self._is_rel(node))
        if isinstance(node, eb.SetMinus):
            return self._difference(self.expr(node.left), self.expr(node.right), self._is_rel(node))
        if isinstance(node, eb.CProd):
            left, right = self.expr(node.left), self.expr(node.right)
            a, b = self.fresh("s1tmp"), self.fresh("s2tmp")
            return sql.Select(
                (_col(a, "refkey", "id"), _col(b, "refkey", "value")),
                (sql.Derived(left, a), sql.Derived(right, b)),
            )
        if isinstance(node, (eb.DomRes, eb.DomSub)):
            restrict = isinstance(node, eb.DomRes)
            if self.options.has(Mutation.SWAP_DOMRES_DOMSUB):
                restrict = not restrict
            # the relation is the first from-clause source
            r, s = self.expr(node.right), self.expr(node.left)
            return self._restrict(r, s, "id", restrict)
        if isinstance(node, (eb.RanRes, eb.RanSub)):
            r, s = self.expr(node.left), self.expr(node.right)
            return self._restrict(r, s, "value", isinstance(node, eb.RanRes))
        if isinstance(node, eb.FComp):
            left, right = self.expr(node.left), self.expr(node.right)
            a, b = self.fresh("r1tmp"), self.fresh("r2tmp")
            return sql.Select(
                (_col(a, "id"), _col(b, "value")),
                (sql.Derived(left, a), sql.Derived(right, b)),
                _eq(sql.ColRef(a, "value"), sql.ColRef(b, "id")),
                distinct=True,
            )
        if isinstance(node, eb.BComp):
            return self.expr(eb.FComp(node.right, node.left))
        if isinstance(node, eb.Ovl):
            r1, r2 = node.left, node.right
            return self.expr(eb.Union(r2, eb.DomSub(eb.Dom(r2), r1)))
        if isinstance(node, eb.Image):
            r, s = self.expr(node.left), self.expr(node.right)
            a, b = self.fresh("rtmp"), self.fresh("stmp")
            return sql.Select(
                (_col(a, "value", "refkey"),),
                (sql.Derived(r, a), sql.Derived(s, b)),
                _eq(sql.ColRef(a, "id"), sql.ColRef(b, "refkey")),
                distinct=True,
            )

        raise Untranslatable(node)

    def _count(self, inner: sql.SqlQuery, rel: bool) -> sql.CountQ:
        if rel:
            alias = self.fresh("rtmp")
            return sql.CountQ(sql.ColRef(alias, "id"), sql.Derived(inner, alias))
        alias = self.fresh("stmp")
        return sql.CountQ(sql.ColRef(alias, "refkey"), sql.Derived(inner, alias))

    def _names(self, rel: bool) -> Tuple[str, str]:
        return (self.fresh("r1tmp"), self.fresh("r2tmp")) if rel else (self.fresh("s1tmp"), self.fresh("s2tmp"))

    def _union(self, left: sql.SqlQuery, right: sql.SqlQuery, rel: bool) -> sql.UnionQ:
        a, b = self._names(rel)
        schema = REL_SCHEMA if rel else SET_SCHEMA
        return sql.UnionQ(
            sql.Select(tuple(_col(a, attr) for attr in schema), (sql.Derived(left, a),)),
            sql.Select(tuple(_col(b, attr) for attr in schema), (sql.Derived(right, b),)),
        )

    def _intersect(self, left: sql.SqlQuery, right: sql.SqlQuery, rel: bool) -> sql.Select:
        a, b = self._names(rel)
        schema = REL_SCHEMA if rel else SET_SCHEMA
        where: sql.SqlPred = _eq(sql.ColRef(a, schema[0]), sql.ColRef(b, schema[0]))
        for attr in schema[1:]:
            where = sql.And(where, _eq(sql.ColRef(a, attr), sql.ColRef(b, attr)))
        return sql.Select(
            tuple(_col(a, attr) for attr in schema),
            (sql.Derived(left, a), sql.Derived(right, b)),
            where,
        )

    def _meet(self, left: sql.SqlQuery, right: sql.SqlQuery, rel: bool) -> sql.Select:
        if self.options.has(Mutation.INTER_AS_DIFF):
            return self._difference(left, right, rel)
        return self._intersect(left, right, rel)

    def _difference(self, left: sql.SqlQuery, right: sql.SqlQuery, rel: bool) -> sql.Select:
        a, b = self._names(rel)
        schema = REL_SCHEMA if rel else SET_SCHEMA
        excluded = sql.Select(tuple(_col(b, attr) for attr in schema), (sql.Derived(right, b),))
        return sql.Select(
            tuple(_col(a, attr) for attr in schema),
            (sql.Derived(left, a),),
            sql.NotInSubquery(tuple(sql.ColRef(a, attr) for attr in schema), excluded),
        )

    def _restrict(self, r: sql.SqlQuery, s: sql.SqlQuery, attr: str, keep: bool) -> sql.Select:
        a, b = self.fresh("rtmp"), self.fresh("stmp")
        columns = (_col(a, "id"), _col(a, "value"))
        if keep:
            return sql.Select(
                columns,
                (sql.Derived(r, a), sql.Derived(s, b)),
                _eq(sql.ColRef(a, attr), sql.ColRef(b, "refkey")),
            )
        keys = sql.Select((_col(b, "refkey"),), (sql.Derived(s, b),))
        return sql.Select(columns, (sql.Derived(r, a),), sql.NotInSubquery((sql.ColRef(a, attr),), keys))

    # predicates

    def _scalar_term(self, node) -> sql.SqlTerm:
        if isinstance(node, (eb.IntLit, eb.BoolLit)):
            return sql.LitScalar(Scalar.of(node.value))
        if isinstance(node, eb.Card):
            return sql.SubqueryTerm(self.expr(node))
        raise Untranslatable(node, "not a scalar term")

    def _singleton(self, node) -> sql.SqlQuery:
        """{x} as a one-row select"""
        return sql.Select(((self._scalar_term(node), "refkey"),))

    def _card_term(self, query: sql.SqlQuery, rel: bool) -> sql.SubqueryTerm:
        return sql.SubqueryTerm(self._count(query, rel))

    def _included(self, left_node, right_node, rel: bool) -> sql.Compare:
        """|a /\\ b| = |a|"""
        inter = self._meet(self.expr(left_node), self.expr(right_node), rel)
        whole = self._card_term(self.expr(left_node), rel)
        return _eq(self._card_term(inter, rel), whole)

    def _same_size(self, left_node, right_node, rel: bool, op: sql.CompareOp) -> sql.Compare:
        return sql.Compare(
            self._card_term(self.expr(left_node), rel), op, self._card_term(self.expr(right_node), rel)
        )

    def pred(self, node: eb.EbPred) -> sql.SqlPred:
        if isinstance(node, eb.Not):
            return sql.Not(self.pred(node.operand))
        if isinstance(node, eb.And):
            return sql.And(self.pred(node.left), self.pred(node.right))
        if isinstance(node, eb.Or):
            return sql.Or(self.pred(node.left), self.pred(node.right))
        if isinstance(node, eb.Eq):
            t = self._type(node.left)
            if isinstance(t, (eb.TInt, eb.TBool)):
                return _eq(self._scalar_term(node.left), self._scalar_term(node.right))
            rel = isinstance(t, eb.TRel)
            return sql.And(
                self._included(node.left, node.right, rel),
                self._same_size(node.left, node.right, rel, sql.CompareOp.EQ),
            )
        if isinstance(node, eb.SubsetEq):
            return self._included(node.left, node.right, self._is_rel(node.left))
        if isinstance(node, eb.Subset):
            rel = self._is_rel(node.left)
            return sql.And(
                self._included(node.left, node.right, rel),
                self._same_size(node.left, node.right, rel, sql.CompareOp.NE),
            )
        if isinstance(node, eb.In):
            # {x} <: s
            inter = self._meet(self._singleton(node.left), self.expr(node.right), False)
            return _eq(self._card_term(inter, False), self._card_term(self._singleton(node.left), False))
        raise Untranslatable(node)

    # assignments

    def _prime_select(self, target: str, base: str, schema: Tuple[str, ...]) -> sql.Select:
        alias = self.fresh(base)
        return sql.Select(tuple(_col(alias, attr) for attr in schema), (sql.Named(primed(target), alias),))

    def _delete_matching(self, target: str, attr: str, base: str, key: str) -> sql.DeleteWhere:
        keys = self._prime_select(target, base, (key,))
        return sql.DeleteWhere(target, sql.InSubquery((sql.ColRef(target, attr),), keys))

    def _insert(self, target: str, query: sql.SqlQuery) -> sql.InsertIgnoreSelect:
        return sql.InsertIgnoreSelect(target, query, ignore=not self.options.has(Mutation.DROP_IGNORE))

    def match_rule(self, assignment: eb.Assignment) -> Tuple[int, eb.EbExpr]:
        """First applicable assignment rule and the expression its primed table holds."""
        assignment = resolve_empty_literals(assignment, self.env)
        target, rhs = assignment.target, assignment.rhs
        me = eb.Var(target)
        rel = isinstance(self.env.get(target), eb.TRel)
        swap = self.options.has(Mutation.SWAP_DOMRES_DOMSUB)
        if not self.options.force_general:
            if not rel:
                if isinstance(rhs, eb.Union) and rhs.left == me:
                    return 1, rhs.right
                if isinstance(rhs, eb.SetMinus) and rhs.left == me:
                    return 2, rhs.right
                if isinstance(rhs, eb.Inter) and rhs.left == me:
                    return 3, eb.SetMinus(me, rhs.right)
            else:
                if isinstance(rhs, eb.Ovl) and rhs.left == me:
                    return 4, rhs.right
                if isinstance(rhs, eb.DomSub) and rhs.right == me:
                    return 5, eb.SetMinus(eb.Dom(me), rhs.left) if swap else rhs.left
                if isinstance(rhs, eb.DomRes) and rhs.right == me:
                    return 6, rhs.left if swap else eb.SetMinus(eb.Dom(me), rhs.left)
                if isinstance(rhs, eb.RanSub) and rhs.left == me:
                    return 7, rhs.right
                if isinstance(rhs, eb.RanRes) and rhs.left == me:
                    return 8, eb.SetMinus(eb.Ran(me), rhs.right)
        return (10 if rel else 9), rhs

    def assignment(self, assignment: eb.Assignment) -> Tuple[List[sql.SqlStatement], eb.EbExpr]:
        rule, primed_def = self.match_rule(assignment)
        s = assignment.target
        if rule == 1:
            return [self._insert(s, self._prime_select(s, "stmp", SET_SCHEMA))], primed_def
        if rule in (2, 3):
            return [self._delete_matching(s, "refkey", "s1tmp", "refkey")], primed_def
        if rule == 4:
            delete = self._delete_matching(s, "id", "r1tmp", "id")
            insert = self._insert(s, self._prime_select(s, "r2tmp", REL_SCHEMA))
            if self.options.has(Mutation.OVL_INSERT_FIRST):
                return [insert, delete], primed_def
            return [delete, insert], primed_def
        if rule in (5, 6):
            return [self._delete_matching(s, "id", "stmp", "refkey")], primed_def
        if rule in (7, 8):
            return [self._delete_matching(s, "value", "stmp", "refkey")], primed_def
        if rule == 9:
            return [sql.DeleteAll(s), self._insert(s, self._prime_select(s, "s1tmp", SET_SCHEMA))], primed_def
        return [sql.DeleteAll(s), self._insert(s, self._prime_select(s, "r1tmp", REL_SCHEMA))], primed_def


# Public operations

def env_of(db: Database) -> TypeEnv:
    """Type environment read off the tables: shape from the schema, kinds from the rows."""
    env = {}
    for name in db.names():
        if is_primed(name):
            continue
        rel = db.lookup(name)
        kinds: List[Optional[ScalarKind]] = [None] * len(rel.schema)
        for row in rel.rows:
            kinds = [value.kind for value in row.values_in(rel.schema)]
            break
        env[name] = eb.TRel(*kinds) if rel.schema == REL_SCHEMA else eb.TSet(kinds[0] if kinds else None)
    return env


def eb2sql_expr(node, env: TypeEnv, options: TranslatorOptions = DEFAULT_OPTIONS) -> SqlResult:
    """Translate an expression to a query, or a predicate to a where-clause predicate."""
    return Eb2SqlTranslator(env, options).expr(resolve_empty_literals(node, env))


def eb2sql_assignment(
    assignment: eb.Assignment, env: TypeEnv, options: TranslatorOptions = DEFAULT_OPTIONS
) -> Tuple[List[sql.SqlStatement], eb.EbExpr]:
    return Eb2SqlTranslator(env, options).assignment(assignment)


def matched_rule(assignment: eb.Assignment, env: TypeEnv, options: TranslatorOptions = DEFAULT_OPTIONS) -> int:
    return Eb2SqlTranslator(env, options).match_rule(assignment)[0]


def _check_unprimed(assignment: eb.Assignment) -> None:
    for name in eb.variables(assignment.rhs) | {assignment.target}:
        if is_primed(name):
            raise PrimedNamePresent(name)


def eb2sql_o(assignment: eb.Assignment, db: Database, options: TranslatorOptions = DEFAULT_OPTIONS) -> Database:
    """Bind the target's primed table to the value of its primed definition."""
    _check_unprimed(assignment)
    env = env_of(db)
    _, primed_def = eb2sql_assignment(assignment, env, options)
    value = eval_query(eb2sql_expr(primed_def, env, options), db)
    return db.update(primed(assignment.target), value)


def eb2sql_os(actions: eb.ActionSet, db: Database, options: TranslatorOptions = DEFAULT_OPTIONS) -> Database:
    for assignment in actions:
        # every primed definition reads the initial tables only
        _check_unprimed(assignment)
        if primed(assignment.target) in db:
            raise PrimedNamePresent(primed(assignment.target))
        db = eb2sql_o(assignment, db, options)
    return db


def eb2sql_as(actions: eb.ActionSet, db: Database, options: TranslatorOptions = DEFAULT_OPTIONS) -> Database:
    """Run each assignment's statements, then drop its primed table."""
    env = env_of(db)
    for index, assignment in enumerate(actions):
        try:
            statements, _ = eb2sql_assignment(assignment, env, options)
            db = exec_sequence(statements, db)
        except EbSqlError as e:
            raise AssignmentError(index, e) from e
        db = db.remove(primed(assignment.target))
    return db


def eb2sql_res(actions: eb.ActionSet, db: Database, options: TranslatorOptions = DEFAULT_OPTIONS) -> Database:
    return eb2sql_as(actions, eb2sql_os(actions, db, options), options)


def translate_actions(
    actions: eb.ActionSet, env: TypeEnv, options: TranslatorOptions = DEFAULT_OPTIONS
) -> List[Tuple[eb.Assignment, List[sql.SqlStatement], eb.EbExpr]]:
    """Statements and primed definitions for every assignment, in order"""
    translated = []
    for assignment in actions:
        statements, primed_def = eb2sql_assignment(assignment, env, options)
        translated.append((assignment, statements, primed_def))
    return translated


def options_for(force_general: bool = False, mutation: Optional[str] = None) -> TranslatorOptions:
    return TranslatorOptions(force_general=force_general, mutations=frozenset({Mutation(mutation)} if mutation else ()))
