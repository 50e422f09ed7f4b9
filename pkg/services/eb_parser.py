"""
Parser for the Rodin-style ASCII surface syntax of Event-B expressions,
predicates and action sets.

Expressions and predicates share one precedence-climbing loop; operand
categories are checked when each node is built, so ``s & t`` is rejected
with the position of the offending operator.
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Union as AnyOf

from models import eb_ast as eb
from models.core import Scalar
from models.errors import DuplicateTarget, ParseError

# Rodin's mathematical symbols, accepted as synonyms
UNICODE_SYNONYMS = {
    "∪": "\\/", "∩": "/\\", "∖": "\\", "×": "**",
    "◁": "<|", "⩤": "<<|", "▷": "|>", "⩥": "|>>",
    "∘": "circ", "⊕": "<+", "∼": "~", "↦": "|->",
    "∈": ":", "⊂": "<<:", "⊆": "<:", "∧": "&", "∨": "or", "¬": "not",
    "≔": ":=", "‖": "||",
}

SYMBOL_TOKENS = [
    ":=", "||", "|->", "|>>", "|>", "<<|", "<<:", "<|", "<:", "<+",
    "\\/", "/\\", "\\", "**", ";", "~", "[", "]", "(", ")", "{", "}", ",", ":", "=", "&",
]

KEYWORDS = {"or", "not", "card", "dom", "ran", "circ", "true", "false"}

TOKEN_RE = re.compile(
    r"(?P<ws>\s+|#[^\n]*)"
    r"|(?P<int>-?\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in SYMBOL_TOKENS) + r")"
    r"|(?P<uni>[" + "".join(UNICODE_SYNONYMS) + r"])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "eof", or the symbol/keyword text itself
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position = 0
    while position < len(text):
        match = TOKEN_RE.match(text, position)
        if not match:
            raise ParseError(f"unexpected character {text[position]!r}", position)
        group = match.lastgroup
        value = match.group()
        if group == "int":
            tokens.append(Token("int", value, position))
        elif group == "ident":
            kind = value if value in KEYWORDS else "ident"
            tokens.append(Token(kind, value, position))
        elif group == "sym":
            tokens.append(Token(value, value, position))
        elif group == "uni":
            spelled = UNICODE_SYNONYMS[value]
            tokens.append(Token(spelled, spelled, position))
        position = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


INFIX = {
    "or": eb.Or, "&": eb.And,
    "=": eb.Eq, ":": eb.In, "<<:": eb.Subset, "<:": eb.SubsetEq,
    "\\/": eb.Union, "\\": eb.SetMinus, "/\\": eb.Inter, "**": eb.CProd,
    "<|": eb.DomRes, "<<|": eb.DomSub, "|>": eb.RanRes, "|>>": eb.RanSub,
    ";": eb.FComp, "circ": eb.BComp, "<+": eb.Ovl,
}

COMPARISON_LEVEL = eb.PRECEDENCE[eb.Eq]
NOT_LEVEL = eb.PRECEDENCE[eb.Not]

FUNCTIONS = {"card": eb.Card, "dom": eb.Dom, "ran": eb.Ran}

Formula = AnyOf[eb.EbExpr, eb.EbPred]


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, kind: str, description: Optional[str] = None) -> Token:
        if self.current.kind != kind:
            found = self.current.text or "end of input"
            raise ParseError(f"unexpected {found!r}", self.current.position, [description or kind])
        return self.advance()

    def at_end(self) -> bool:
        return self.current.kind == "eof"

    # formulas

    def formula(self, min_level: int = 1) -> Formula:
        left = self.prefix()
        while True:
            token = self.current
            cls = INFIX.get(token.kind)
            if cls is None:
                break
            level = eb.PRECEDENCE[cls]
            if level < min_level:
                break
            self.advance()
            right = self.formula(level + 1)
            left = self.build_binary(cls, left, right, token)
            if level == COMPARISON_LEVEL and INFIX.get(self.current.kind) in (eb.Eq, eb.In, eb.Subset, eb.SubsetEq):
                raise ParseError("comparisons do not chain", self.current.position, ["&", "or", ")"])
        return left

    def prefix(self) -> Formula:
        if self.current.kind == "not":
            token = self.advance()
            operand = self.formula(NOT_LEVEL)
            self.require_pred(operand, token)
            return eb.Not(operand)
        return self.postfix()

    def postfix(self) -> Formula:
        node = self.atom()
        while self.current.kind in ("~", "["):
            token = self.advance()
            self.require_expr(node, token)
            if token.kind == "~":
                node = eb.Inverse(node)
            else:
                inner = self.formula()
                self.require_expr(inner, token)
                self.expect("]")
                node = eb.Image(node, inner)
        return node

    def atom(self) -> Formula:
        token = self.current
        if token.kind == "int":
            self.advance()
            return eb.IntLit(int(token.text))
        if token.kind in ("true", "false"):
            self.advance()
            return eb.BoolLit(token.kind == "true")
        if token.kind == "ident":
            self.advance()
            return eb.Var(token.text)
        if token.kind in FUNCTIONS:
            self.advance()
            self.expect("(")
            operand = self.formula()
            self.require_expr(operand, token)
            self.expect(")")
            return FUNCTIONS[token.kind](operand)
        if token.kind == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        if token.kind == "{":
            return self.literal()
        raise ParseError(
            f"unexpected {token.text or 'end of input'!r}",
            token.position,
            ["identifier", "integer", "true", "false", "(", "{", "card", "dom", "ran", "not"],
        )

    def scalar(self) -> Scalar:
        token = self.current
        if token.kind == "int":
            self.advance()
            return Scalar.of(int(token.text))
        if token.kind in ("true", "false"):
            self.advance()
            return Scalar.of(token.kind == "true")
        raise ParseError(f"unexpected {token.text or 'end of input'!r}", token.position, ["integer", "true", "false"])

    def literal(self) -> eb.EbExpr:
        self.expect("{")
        if self.current.kind == "}":
            self.advance()
            return eb.SetLit(())
        first = self.scalar()
        if self.current.kind == "|->":
            self.advance()
            pairs = [(first, self.scalar())]
            while self.current.kind == ",":
                self.advance()
                key = self.scalar()
                self.expect("|->")
                pairs.append((key, self.scalar()))
            self.expect("}", "} or ,")
            return eb.RelLit(tuple(pairs))
        elems = [first]
        while self.current.kind == ",":
            self.advance()
            elems.append(self.scalar())
        self.expect("}", "} or ,")
        return eb.SetLit(tuple(elems))

    # category checks

    def require_expr(self, node: Formula, token: Token) -> None:
        if not isinstance(node, eb.EbExpr):
            raise ParseError(f"operator {token.text!r} needs an expression operand", token.position, ["expression"])

    def require_pred(self, node: Formula, token: Token) -> None:
        if not isinstance(node, eb.EbPred):
            raise ParseError(f"operator {token.text!r} needs a predicate operand", token.position, ["predicate"])

    def build_binary(self, cls, left: Formula, right: Formula, token: Token) -> Formula:
        if cls in (eb.And, eb.Or):
            self.require_pred(left, token)
            self.require_pred(right, token)
        else:
            self.require_expr(left, token)
            self.require_expr(right, token)
        return cls(left, right)

    # action sets

    def actions(self) -> eb.ActionSet:
        if self.at_end():
            return eb.ActionSet(())
        assignments = []
        seen = set()
        while True:
            target = self.expect("ident", "identifier")
            assign = self.expect(":=")
            rhs = self.formula()
            self.require_expr(rhs, assign)
            if target.text in seen:
                raise DuplicateTarget(target.text, target.position)
            seen.add(target.text)
            assignments.append(eb.Assignment(target.text, rhs))
            if self.current.kind != "||":
                break
            self.advance()
        self.expect("eof", "|| or end of input")
        return eb.ActionSet(tuple(assignments))


def parse_expr(text: str) -> Formula:
    """Parse an expression or predicate."""
    parser = _Parser(text)
    node = parser.formula()
    parser.expect("eof", "operator or end of input")
    return node


def parse_actions(text: str) -> eb.ActionSet:
    """Parse ``v := E || ...``; empty text is the empty action set."""
    return _Parser(text).actions()
