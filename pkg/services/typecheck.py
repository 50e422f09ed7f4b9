"""
Type checker for the Event-B fragment.

The literal ``{}`` has type ``TEmpty`` and unifies with any set or relation
type. ``resolve_empty_literals`` rewrites it to an empty ``RelLit`` wherever
the context is a relation, so evaluation and translation see the shape.
Scalar machine variables have no translation rule and are rejected here.
"""

import dataclasses
import logging
from typing import Mapping, Optional, Union as AnyOf

from models import eb_ast as eb
from models.core import ScalarKind
from models.errors import EbSqlError, EbTypeError, UnboundVariable

logger = logging.getLogger(__name__)

TypeEnv = Mapping[str, eb.EbType]

BOOL = eb.TBool()
INT = eb.TInt()


def _unify_kind(node, a: Optional[ScalarKind], b: Optional[ScalarKind]) -> Optional[ScalarKind]:
    if a is None:
        return b
    if b is None or a is b:
        return a
    raise EbTypeError(node, a.value, b.value)


def unify(node, a: eb.EbType, b: eb.EbType) -> eb.EbType:
    if isinstance(a, eb.TEmpty) and isinstance(b, (eb.TEmpty, eb.TSet, eb.TRel)):
        return b
    if isinstance(b, eb.TEmpty) and isinstance(a, (eb.TSet, eb.TRel)):
        return a
    if isinstance(a, eb.TSet) and isinstance(b, eb.TSet):
        return eb.TSet(_unify_kind(node, a.elem, b.elem))
    if isinstance(a, eb.TRel) and isinstance(b, eb.TRel):
        return eb.TRel(_unify_kind(node, a.dom, b.dom), _unify_kind(node, a.ran, b.ran))
    if type(a) is type(b) and isinstance(a, (eb.TInt, eb.TBool)):
        return a
    raise EbTypeError(node, str(a), str(b))


def _expect_set(node, t: eb.EbType) -> eb.TSet:
    if isinstance(t, eb.TEmpty):
        return eb.TSet()
    if not isinstance(t, eb.TSet):
        raise EbTypeError(node, "set", str(t))
    return t


def _expect_rel(node, t: eb.EbType) -> eb.TRel:
    if isinstance(t, eb.TEmpty):
        return eb.TRel()
    if not isinstance(t, eb.TRel):
        raise EbTypeError(node, "relation", str(t))
    return t


def _expect_collection(node, t: eb.EbType) -> eb.EbType:
    if not isinstance(t, (eb.TEmpty, eb.TSet, eb.TRel)):
        raise EbTypeError(node, "set or relation", str(t))
    return t


def _literal_kind(node, scalars) -> Optional[ScalarKind]:
    kind = None
    for scalar in scalars:
        kind = _unify_kind(node, kind, scalar.kind)
    return kind


def _scalar_kind(node, t: eb.EbType) -> ScalarKind:
    if isinstance(t, eb.TInt):
        return ScalarKind.INT
    if isinstance(t, eb.TBool):
        return ScalarKind.BOOL
    raise EbTypeError(node, "int or bool", str(t))


def typecheck_expr(node: AnyOf[eb.EbExpr, eb.EbPred], env: TypeEnv) -> eb.EbType:
    """Derive the type of an expression; predicates have type bool."""
    if isinstance(node, eb.Var):
        if node.name not in env:
            raise UnboundVariable(node.name)
        t = env[node.name]
        if not isinstance(t, (eb.TSet, eb.TRel)):
            # no translation rule exists for scalar machine variables
            raise EbTypeError(node, "set or relation variable", str(t))
        return t
    if isinstance(node, eb.IntLit):
        return INT
    if isinstance(node, eb.BoolLit):
        return BOOL
    if isinstance(node, eb.SetLit):
        if not node.elems:
            return eb.TEmpty()
        return eb.TSet(_literal_kind(node, node.elems))
    if isinstance(node, eb.RelLit):
        return eb.TRel(
            _literal_kind(node, (x for x, _ in node.pairs)),
            _literal_kind(node, (y for _, y in node.pairs)),
        )

    if isinstance(node, eb.Card):
        _expect_collection(node, typecheck_expr(node.operand, env))
        return INT
    if isinstance(node, eb.Dom):
        return eb.TSet(_expect_rel(node, typecheck_expr(node.operand, env)).dom)
    if isinstance(node, eb.Ran):
        return eb.TSet(_expect_rel(node, typecheck_expr(node.operand, env)).ran)
    if isinstance(node, eb.Inverse):
        r = _expect_rel(node, typecheck_expr(node.operand, env))
        return eb.TRel(r.ran, r.dom)

    if isinstance(node, eb.BinaryExpr):
        left = typecheck_expr(node.left, env)
        right = typecheck_expr(node.right, env)
        if isinstance(node, (eb.Union, eb.Inter, eb.SetMinus)):
            return unify(node, _expect_collection(node, left), right)
        if isinstance(node, eb.Ovl):
            return unify(node, _expect_rel(node, left), _expect_rel(node, right))
        if isinstance(node, eb.CProd):
            return eb.TRel(_expect_set(node, left).elem, _expect_set(node, right).elem)
        if isinstance(node, (eb.DomRes, eb.DomSub)):
            s = _expect_set(node, left)
            r = _expect_rel(node, right)
            return eb.TRel(_unify_kind(node, s.elem, r.dom), r.ran)
        if isinstance(node, (eb.RanRes, eb.RanSub)):
            r = _expect_rel(node, left)
            s = _expect_set(node, right)
            return eb.TRel(r.dom, _unify_kind(node, r.ran, s.elem))
        if isinstance(node, eb.FComp):
            r1 = _expect_rel(node, left)
            r2 = _expect_rel(node, right)
            _unify_kind(node, r1.ran, r2.dom)
            return eb.TRel(r1.dom, r2.ran)
        if isinstance(node, eb.BComp):
            r1 = _expect_rel(node, left)
            r2 = _expect_rel(node, right)
            _unify_kind(node, r2.ran, r1.dom)
            return eb.TRel(r2.dom, r1.ran)
        if isinstance(node, eb.Image):
            r = _expect_rel(node, left)
            s = _expect_set(node, right)
            _unify_kind(node, r.dom, s.elem)
            return eb.TSet(r.ran)

    if isinstance(node, eb.Not):
        _expect_pred(node.operand, env)
        return BOOL
    if isinstance(node, (eb.And, eb.Or)):
        _expect_pred(node.left, env)
        _expect_pred(node.right, env)
        return BOOL
    if isinstance(node, eb.Eq):
        unify(node, typecheck_expr(node.left, env), typecheck_expr(node.right, env))
        return BOOL
    if isinstance(node, eb.In):
        kind = _scalar_kind(node, typecheck_expr(node.left, env))
        s = _expect_set(node, typecheck_expr(node.right, env))
        _unify_kind(node, kind, s.elem)
        return BOOL
    if isinstance(node, (eb.Subset, eb.SubsetEq)):
        left = _expect_collection(node, typecheck_expr(node.left, env))
        unify(node, left, typecheck_expr(node.right, env))
        return BOOL

    raise EbTypeError(node, "expression or predicate", type(node).__name__)


def _expect_pred(node, env: TypeEnv) -> None:
    if not isinstance(node, eb.EbPred):
        raise EbTypeError(node, "predicate", "expression")
    typecheck_expr(node, env)


def typecheck_assignment(assignment: eb.Assignment, env: TypeEnv) -> None:
    if assignment.target not in env:
        raise UnboundVariable(assignment.target)
    target = env[assignment.target]
    if not isinstance(target, (eb.TSet, eb.TRel)):
        raise EbTypeError(assignment, "set or relation target", str(target))
    unify(assignment, target, typecheck_expr(assignment.rhs, env))


def typecheck_actions(actions: eb.ActionSet, env: TypeEnv) -> None:
    for assignment in actions:
        typecheck_assignment(assignment, env)


def typecheck(node, env: TypeEnv):
    """Type of an expression/predicate, or None once an action set checks out."""
    if isinstance(node, eb.ActionSet):
        typecheck_actions(node, env)
        return None
    if isinstance(node, eb.Assignment):
        typecheck_assignment(node, env)
        return None
    return typecheck_expr(node, env)


def is_predicate(node) -> bool:
    return isinstance(node, eb.EbPred)


# empty literals

SET_SHAPE = eb.TSet()
REL_SHAPE = eb.TRel()

_SET_OPS = (eb.Union, eb.Inter, eb.SetMinus)
_COMPARISONS = (eb.Eq, eb.Subset, eb.SubsetEq)
_OPERAND_SHAPES = {
    eb.CProd: (SET_SHAPE, SET_SHAPE),
    eb.DomRes: (SET_SHAPE, REL_SHAPE),
    eb.DomSub: (SET_SHAPE, REL_SHAPE),
    eb.RanRes: (REL_SHAPE, SET_SHAPE),
    eb.RanSub: (REL_SHAPE, SET_SHAPE),
    eb.Image: (REL_SHAPE, SET_SHAPE),
    eb.FComp: (REL_SHAPE, REL_SHAPE),
    eb.BComp: (REL_SHAPE, REL_SHAPE),
    eb.Ovl: (REL_SHAPE, REL_SHAPE),
    eb.In: (None, SET_SHAPE),
}


def _has_empty_literal(node) -> bool:
    if isinstance(node, eb.SetLit):
        return not node.elems
    return any(_has_empty_literal(child) for child in eb.children(node))


def _shape_of(node, env: TypeEnv) -> Optional[eb.EbType]:
    try:
        t = typecheck_expr(node, env)
    except EbSqlError:
        return None
    return t if isinstance(t, (eb.TSet, eb.TRel)) else None


def _resolve(node, env: TypeEnv, want: Optional[eb.EbType]):
    if isinstance(node, eb.SetLit):
        return eb.RelLit() if not node.elems and isinstance(want, eb.TRel) else node
    if not _has_empty_literal(node):
        return node
    if isinstance(node, (eb.Dom, eb.Ran, eb.Inverse)):
        return dataclasses.replace(node, operand=_resolve(node.operand, env, REL_SHAPE))
    if isinstance(node, (eb.Card, eb.Not)):
        return dataclasses.replace(node, operand=_resolve(node.operand, env, None))
    if isinstance(node, (eb.And, eb.Or)):
        return dataclasses.replace(node, left=_resolve(node.left, env, None), right=_resolve(node.right, env, None))
    if isinstance(node, _SET_OPS + _COMPARISONS):
        shape = want if isinstance(node, _SET_OPS) else None
        shape = shape or _shape_of(node.left, env) or _shape_of(node.right, env)
        return dataclasses.replace(node, left=_resolve(node.left, env, shape), right=_resolve(node.right, env, shape))
    if type(node) in _OPERAND_SHAPES:
        left, right = _OPERAND_SHAPES[type(node)]
        return dataclasses.replace(node, left=_resolve(node.left, env, left), right=_resolve(node.right, env, right))
    return node


def resolve_empty_literals(node, env: TypeEnv):
    """Rewrite every {} whose context is a relation into an empty RelLit"""
    if isinstance(node, eb.ActionSet):
        return eb.ActionSet(tuple(resolve_empty_literals(a, env) for a in node))
    if isinstance(node, eb.Assignment):
        return eb.Assignment(node.target, _resolve(node.rhs, env, env.get(node.target)))
    return _resolve(node, env, None)
