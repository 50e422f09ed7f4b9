"""
Abstract syntax and types for the Event-B expression/assignment fragment.

Nodes are frozen dataclasses, so structural equality is plain ``==``.
``pretty`` renders any node back to the ASCII surface syntax accepted by
services.eb_parser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .core import Scalar, ScalarKind
from .errors import DuplicateTarget


# Types

class EbType:
    pass


@dataclass(frozen=True)
class TInt(EbType):
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class TBool(EbType):
    def __str__(self):
        return "bool"


def _kind(kind: Optional[ScalarKind]) -> str:
    return kind.value if kind else "?"


@dataclass(frozen=True)
class TEmpty(EbType):
    """Type of the literal {} until its context says set or relation"""

    def __str__(self):
        return "set(?)"


@dataclass(frozen=True)
class TSet(EbType):
    # None for empty tables and for {} once it has met a set operand without elements
    elem: Optional[ScalarKind] = None

    def __str__(self):
        return f"set({_kind(self.elem)})"


@dataclass(frozen=True)
class TRel(EbType):
    dom: Optional[ScalarKind] = None
    ran: Optional[ScalarKind] = None

    def __str__(self):
        return f"rel({_kind(self.dom)}, {_kind(self.ran)})"


def scalar_type(kind: ScalarKind) -> EbType:
    return TInt() if kind is ScalarKind.INT else TBool()


# Expressions

class EbNode:
    def __str__(self):
        return pretty(self)


class EbExpr(EbNode):
    pass


class EbPred(EbNode):
    pass


@dataclass(frozen=True)
class Var(EbExpr):
    name: str


@dataclass(frozen=True)
class SetLit(EbExpr):
    elems: Tuple[Scalar, ...] = ()

    @classmethod
    def of(cls, *elements) -> "SetLit":
        return cls(tuple(Scalar.of(e) for e in elements))


@dataclass(frozen=True)
class RelLit(EbExpr):
    # empty only after typecheck.resolve_empty_literals placed {} in a relation context
    pairs: Tuple[Tuple[Scalar, Scalar], ...] = ()

    @classmethod
    def of(cls, *pairs) -> "RelLit":
        return cls(tuple((Scalar.of(x), Scalar.of(y)) for x, y in pairs))


@dataclass(frozen=True)
class IntLit(EbExpr):
    value: int


@dataclass(frozen=True)
class BoolLit(EbExpr):
    value: bool


@dataclass(frozen=True)
class UnaryExpr(EbExpr):
    operand: EbExpr


@dataclass(frozen=True)
class Card(UnaryExpr):
    pass


@dataclass(frozen=True)
class Dom(UnaryExpr):
    pass


@dataclass(frozen=True)
class Ran(UnaryExpr):
    pass


@dataclass(frozen=True)
class Inverse(UnaryExpr):
    pass


@dataclass(frozen=True)
class BinaryExpr(EbExpr):
    left: EbExpr
    right: EbExpr


@dataclass(frozen=True)
class Union(BinaryExpr):
    pass


@dataclass(frozen=True)
class Inter(BinaryExpr):
    pass


@dataclass(frozen=True)
class SetMinus(BinaryExpr):
    pass


@dataclass(frozen=True)
class CProd(BinaryExpr):
    pass


@dataclass(frozen=True)
class DomRes(BinaryExpr):
    """left <| right: left is the set, right the relation"""


@dataclass(frozen=True)
class DomSub(BinaryExpr):
    """left <<| right"""


@dataclass(frozen=True)
class RanRes(BinaryExpr):
    """left |> right: left is the relation, right the set"""


@dataclass(frozen=True)
class RanSub(BinaryExpr):
    """left |>> right"""


@dataclass(frozen=True)
class FComp(BinaryExpr):
    pass


@dataclass(frozen=True)
class BComp(BinaryExpr):
    pass


@dataclass(frozen=True)
class Ovl(BinaryExpr):
    pass


@dataclass(frozen=True)
class Image(BinaryExpr):
    """left[right]"""


# Predicates

@dataclass(frozen=True)
class Not(EbPred):
    operand: EbPred


@dataclass(frozen=True)
class And(EbPred):
    left: EbPred
    right: EbPred


@dataclass(frozen=True)
class Or(EbPred):
    left: EbPred
    right: EbPred


@dataclass(frozen=True)
class Comparison(EbPred):
    left: EbExpr
    right: EbExpr


@dataclass(frozen=True)
class Eq(Comparison):
    pass


@dataclass(frozen=True)
class In(Comparison):
    pass


@dataclass(frozen=True)
class Subset(Comparison):
    pass


@dataclass(frozen=True)
class SubsetEq(Comparison):
    pass


# Assignments

@dataclass(frozen=True)
class Assignment:
    target: str
    rhs: EbExpr

    def __str__(self):
        return f"{self.target} := {pretty(self.rhs)}"


@dataclass(frozen=True)
class ActionSet:
    """Simultaneous assignments; the empty tuple is the empty action set"""

    assignments: Tuple[Assignment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "assignments", tuple(self.assignments))
        seen = set()
        for assignment in self.assignments:
            if assignment.target in seen:
                raise DuplicateTarget(assignment.target)
            seen.add(assignment.target)

    @property
    def targets(self) -> Tuple[str, ...]:
        return tuple(a.target for a in self.assignments)

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    def __str__(self):
        return " || ".join(str(a) for a in self.assignments)


# Surface syntax

# binding strength, loosest first
PRECEDENCE = {
    Or: 1,
    And: 2,
    Not: 3,
    Eq: 4, In: 4, Subset: 4, SubsetEq: 4,
    Union: 5, SetMinus: 5,
    Inter: 6,
    CProd: 7,
    DomRes: 8, DomSub: 8, RanRes: 8, RanSub: 8,
    FComp: 9, BComp: 9, Ovl: 9,
}

SYMBOLS = {
    Or: "or", And: "&",
    Eq: "=", In: ":", Subset: "<<:", SubsetEq: "<:",
    Union: "\\/", SetMinus: "\\", Inter: "/\\", CProd: "**",
    DomRes: "<|", DomSub: "<<|", RanRes: "|>", RanSub: "|>>",
    FComp: ";", BComp: "circ", Ovl: "<+",
}

FUNCTIONS = {Card: "card", Dom: "dom", Ran: "ran"}


def _wrapped(node: EbNode) -> str:
    text = pretty(node)
    if type(node) in PRECEDENCE:
        return f"({text})"
    return text


def pretty(node) -> str:
    """ASCII rendering; compound operands are always parenthesised."""
    if isinstance(node, ActionSet) or isinstance(node, Assignment):
        return str(node)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, IntLit):
        return str(node.value)
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, SetLit):
        return "{" + ", ".join(str(e) for e in node.elems) + "}"
    if isinstance(node, RelLit):
        return "{" + ", ".join(f"{x} |-> {y}" for x, y in node.pairs) + "}"
    if type(node) in FUNCTIONS:
        return f"{FUNCTIONS[type(node)]}({pretty(node.operand)})"
    if isinstance(node, Inverse):
        return f"{_wrapped(node.operand)}~"
    if isinstance(node, Image):
        return f"{_wrapped(node.left)}[{pretty(node.right)}]"
    if isinstance(node, Not):
        return f"not {_wrapped(node.operand)}"
    if type(node) in SYMBOLS:
        return f"{_wrapped(node.left)} {SYMBOLS[type(node)]} {_wrapped(node.right)}"
    raise TypeError(f"cannot render {node!r}")


def children(node: EbNode) -> Tuple[EbNode, ...]:
    if isinstance(node, (UnaryExpr, Not)):
        return (node.operand,)
    if isinstance(node, (BinaryExpr, And, Or, Comparison)):
        return (node.left, node.right)
    return ()


def variables(node: EbNode) -> frozenset:
    if isinstance(node, Var):
        return frozenset({node.name})
    names = frozenset()
    for child in children(node):
        names |= variables(child)
    return names
