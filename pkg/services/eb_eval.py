"""
Reference interpreter for Event-B expressions, predicates and simultaneous
assignments. This is the oracle side of every differential check, so it works
on EbValues only and never touches SQL.
"""

import logging
from typing import Dict, FrozenSet, Union as AnyOf

from models import eb_ast as eb
from models.core import BoolV, EbValue, IntV, MachineState, RelV, Scalar, SetV
from models.errors import EbTypeError, KindMismatch
from services.typecheck import TypeEnv, resolve_empty_literals

logger = logging.getLogger(__name__)


def _as_scalar(value: EbValue) -> Scalar:
    if isinstance(value, (IntV, BoolV)):
        return Scalar.of(value.value)
    raise EbTypeError(value, "scalar", type(value).__name__)


def _as_set(value: EbValue) -> FrozenSet[Scalar]:
    if not isinstance(value, SetV):
        raise EbTypeError(value, "set", type(value).__name__)
    return value.elems


def _as_rel(value: EbValue) -> FrozenSet:
    if not isinstance(value, RelV):
        raise EbTypeError(value, "relation", type(value).__name__)
    return value.pairs


def _check_compatible(left: EbValue, right: EbValue) -> None:
    """Raise KindMismatch instead of letting int/bool comparisons quietly fail"""
    if type(left) is not type(right):
        raise KindMismatch(left, right)
    if isinstance(left, (IntV, BoolV)):
        return
    if isinstance(left, SetV):
        if left.elems and right.elems:
            next(iter(left.elems)).same_kind(next(iter(right.elems)))
        return
    if left.pairs and right.pairs:
        lx, ly = next(iter(left.pairs))
        rx, ry = next(iter(right.pairs))
        lx.same_kind(rx)
        ly.same_kind(ry)


def _collection(like: EbValue, elements) -> EbValue:
    if isinstance(like, SetV):
        return SetV(frozenset(elements))
    return RelV(frozenset(elements))


def _elements(value: EbValue) -> FrozenSet:
    if isinstance(value, SetV):
        return value.elems
    if isinstance(value, RelV):
        return value.pairs
    raise EbTypeError(value, "set or relation", type(value).__name__)


def _domain_subtract(keys: FrozenSet[Scalar], pairs: FrozenSet) -> FrozenSet:
    return frozenset((x, y) for x, y in pairs if x not in keys)


def _compose(first: FrozenSet, second: FrozenSet) -> FrozenSet:
    return frozenset((x, y) for x, z in first for w, y in second if z == w)


def _eval(node: AnyOf[eb.EbExpr, eb.EbPred], m: MachineState) -> EbValue:
    if isinstance(node, eb.Var):
        return m.lookup(node.name)
    if isinstance(node, eb.IntLit):
        return IntV(node.value)
    if isinstance(node, eb.BoolLit):
        return BoolV(node.value)
    if isinstance(node, eb.SetLit):
        return SetV(frozenset(node.elems))
    if isinstance(node, eb.RelLit):
        return RelV(frozenset(node.pairs))

    # predicates
    if isinstance(node, eb.Not):
        return BoolV(not _eval_pred(node.operand, m))
    if isinstance(node, eb.And):
        return BoolV(_eval_pred(node.left, m) and _eval_pred(node.right, m))
    if isinstance(node, eb.Or):
        return BoolV(_eval_pred(node.left, m) or _eval_pred(node.right, m))
    if isinstance(node, eb.Eq):
        left, right = _eval(node.left, m), _eval(node.right, m)
        _check_compatible(left, right)
        return BoolV(left == right)
    if isinstance(node, eb.In):
        element = _as_scalar(_eval(node.left, m))
        elems = _as_set(_eval(node.right, m))
        for member in elems:
            element.same_kind(member)
            break
        return BoolV(element in elems)
    if isinstance(node, (eb.Subset, eb.SubsetEq)):
        left, right = _eval(node.left, m), _eval(node.right, m)
        _check_compatible(left, right)
        a, b = _elements(left), _elements(right)
        return BoolV(a < b if isinstance(node, eb.Subset) else a <= b)

    # unary
    if isinstance(node, eb.Card):
        return IntV(len(_elements(_eval(node.operand, m))))
    if isinstance(node, eb.Dom):
        return SetV(frozenset(x for x, _ in _as_rel(_eval(node.operand, m))))
    if isinstance(node, eb.Ran):
        return SetV(frozenset(y for _, y in _as_rel(_eval(node.operand, m))))
    if isinstance(node, eb.Inverse):
        return RelV(frozenset((y, x) for x, y in _as_rel(_eval(node.operand, m))))

    # binary
    if isinstance(node, (eb.Union, eb.Inter, eb.SetMinus)):
        left, right = _eval(node.left, m), _eval(node.right, m)
        _check_compatible(left, right)
        a, b = _elements(left), _elements(right)
        if isinstance(node, eb.Union):
            return _collection(left, a | b)
        if isinstance(node, eb.Inter):
            return _collection(left, a & b)
        return _collection(left, a - b)
    if isinstance(node, eb.CProd):
        a = _as_set(_eval(node.left, m))
        b = _as_set(_eval(node.right, m))
        return RelV(frozenset((x, y) for x in a for y in b))
    if isinstance(node, (eb.DomRes, eb.DomSub)):
        keys = _as_set(_eval(node.left, m))
        pairs = _as_rel(_eval(node.right, m))
        if isinstance(node, eb.DomRes):
            return RelV(frozenset((x, y) for x, y in pairs if x in keys))
        return RelV(_domain_subtract(keys, pairs))
    if isinstance(node, (eb.RanRes, eb.RanSub)):
        pairs = _as_rel(_eval(node.left, m))
        values = _as_set(_eval(node.right, m))
        keep = isinstance(node, eb.RanRes)
        return RelV(frozenset((x, y) for x, y in pairs if (y in values) == keep))
    if isinstance(node, eb.FComp):
        return RelV(_compose(_as_rel(_eval(node.left, m)), _as_rel(_eval(node.right, m))))
    if isinstance(node, eb.BComp):
        # r1 circ r2 = r2 ; r1
        return RelV(_compose(_as_rel(_eval(node.right, m)), _as_rel(_eval(node.left, m))))
    if isinstance(node, eb.Ovl):
        # r1 <+ r2 = r2 \/ (dom(r2) <<| r1)
        r1 = _as_rel(_eval(node.left, m))
        r2 = _as_rel(_eval(node.right, m))
        return RelV(r2 | _domain_subtract(frozenset(x for x, _ in r2), r1))
    if isinstance(node, eb.Image):
        pairs = _as_rel(_eval(node.left, m))
        keys = _as_set(_eval(node.right, m))
        return SetV(frozenset(y for x, y in pairs if x in keys))

    raise EbTypeError(node, "expression or predicate", type(node).__name__)


def _eval_pred(node: eb.EbPred, m: MachineState) -> bool:
    value = _eval(node, m)
    if not isinstance(value, BoolV):
        raise EbTypeError(node, "predicate", type(value).__name__)
    return value.value


def _state_env(m: MachineState) -> TypeEnv:
    env = {}
    for name in m.names():
        value = m.lookup(name)
        if isinstance(value, SetV):
            env[name] = eb.TSet(next(iter(value.elems)).kind if value.elems else None)
        elif isinstance(value, RelV):
            if value.pairs:
                x, y = next(iter(value.pairs))
                env[name] = eb.TRel(x.kind, y.kind)
            else:
                env[name] = eb.TRel()
    return env


def eval_expr(node: AnyOf[eb.EbExpr, eb.EbPred], m: MachineState) -> EbValue:
    return _eval(resolve_empty_literals(node, _state_env(m)), m)


def eval_pred(node: eb.EbPred, m: MachineState) -> bool:
    return _eval_pred(resolve_empty_literals(node, _state_env(m)), m)


def apply_assignment(assignment: eb.Assignment, m: MachineState) -> MachineState:
    """[v -> eb(E, m)]m"""
    resolved = resolve_empty_literals(assignment, _state_env(m))
    return m.rebind(assignment.target, _eval(resolved.rhs, m))


def eval_actions(actions: eb.ActionSet, m: MachineState) -> MachineState:
    """Simultaneous assignment: every right-hand side sees the initial state."""
    rebinds: Dict[str, EbValue] = {}
    for assignment in actions:
        rebinds[assignment.target] = apply_assignment(assignment, m).lookup(assignment.target)
    result = m
    for name, value in rebinds.items():
        result = result.rebind(name, value)
    return result
