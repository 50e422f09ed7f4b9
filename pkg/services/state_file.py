"""
Reader and writer for the line-based state file format.

    # comment
    set s : int = {1, 2}
    rel r : int * bool = {(1, true), (2, false)}
    set t : int            # no value: an empty table

Kinds may be omitted when the contents fix them. The writer sorts names and
elements and always writes kinds, so its output reads back to the same database.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from models import eb_ast as eb
from models.core import REL_SCHEMA, SET_SCHEMA, Database, Relation, Scalar, ScalarKind, is_primed
from models.errors import ParseError
from services.typecheck import TypeEnv

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(?P<int>-?\d+)|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[{}(),:=*]))")

_KINDS = {"int": ScalarKind.INT, "bool": ScalarKind.BOOL}

AnyPath = Union[str, Path]


class _Line:
    def __init__(self, text: str, offset: int):
        self.text = text
        self.offset = offset
        self.tokens: List[Tuple[str, str, int]] = []
        position = 0
        stripped = text.rstrip()
        while position < len(stripped):
            match = _TOKEN.match(stripped, position)
            if not match or match.end() == position:
                raise ParseError(f"unexpected character {stripped[position]!r}", offset + position)
            kind = match.lastgroup
            self.tokens.append((kind, match.group(kind), offset + match.start(kind)))
            position = match.end()
        self.index = 0

    def peek(self) -> Optional[str]:
        if self.index < len(self.tokens):
            return self.tokens[self.index][1]
        return None

    def position(self) -> int:
        if self.index < len(self.tokens):
            return self.tokens[self.index][2]
        return self.offset + len(self.text.rstrip())

    def take(self, expected: Optional[str] = None, kind: Optional[str] = None) -> str:
        if self.index >= len(self.tokens):
            raise ParseError("unexpected end of line", self.position(), [expected or kind or "token"])
        token_kind, value, position = self.tokens[self.index]
        if (expected and value != expected) or (kind and token_kind != kind):
            raise ParseError(f"unexpected {value!r}", position, [expected or kind])
        self.index += 1
        return value

    def scalar(self) -> Scalar:
        position = self.position()
        value = self.take()
        if value in ("true", "false"):
            return Scalar.of(value == "true")
        try:
            return Scalar.of(int(value))
        except ValueError:
            raise ParseError(f"unexpected {value!r}", position, ["integer", "true", "false"]) from None

    def kind(self) -> ScalarKind:
        position = self.position()
        value = self.take(kind="word")
        if value not in _KINDS:
            raise ParseError(f"unknown kind {value!r}", position, list(_KINDS))
        return _KINDS[value]


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def _unify(kind: Optional[ScalarKind], value: Scalar, position: int) -> ScalarKind:
    if kind is not None and kind is not value.kind:
        raise ParseError(f"element {value} is not of kind {kind.value}", position)
    return value.kind


def read_state(text: str) -> Tuple[Database, TypeEnv]:
    """Parse state-file text into a database and the type environment it declares."""
    tables: Dict[str, Relation] = {}
    env: Dict[str, eb.EbType] = {}
    offset = 0
    for raw in text.splitlines(keepends=True):
        line = _Line(_strip_comment(raw), offset)
        offset += len(raw)
        if not line.tokens:
            continue
        keyword_at = line.position()
        keyword = line.take(kind="word")
        if keyword not in ("set", "rel"):
            raise ParseError(f"unexpected {keyword!r}", keyword_at, ["set", "rel"])
        name_at = line.position()
        name = line.take(kind="word")
        if name in tables:
            raise ParseError(f"table '{name}' declared twice", name_at)
        if is_primed(name):
            raise ParseError(f"table name '{name}' is reserved", name_at)

        kinds: List[Optional[ScalarKind]] = [None] if keyword == "set" else [None, None]
        if line.peek() == ":":
            line.take(":")
            kinds[0] = line.kind()
            if keyword == "rel":
                line.take("*")
                kinds[1] = line.kind()

        rows = []
        if line.peek() == "=":
            line.take("=")
            line.take("{")
            while line.peek() != "}":
                if rows:
                    line.take(",")
                if keyword == "set":
                    at = line.position()
                    value = line.scalar()
                    kinds[0] = _unify(kinds[0], value, at)
                    rows.append((value,))
                else:
                    line.take("(")
                    at = line.position()
                    key = line.scalar()
                    kinds[0] = _unify(kinds[0], key, at)
                    line.take(",")
                    at = line.position()
                    value = line.scalar()
                    kinds[1] = _unify(kinds[1], value, at)
                    line.take(")")
                    rows.append((key, value))
            line.take("}")
        if line.peek() is not None:
            raise ParseError(f"unexpected {line.peek()!r}", line.position(), ["end of line"])
        if None in kinds:
            raise ParseError(f"empty {keyword} '{name}' needs a kind annotation", name_at, [":"])

        if keyword == "set":
            tables[name] = Relation.from_values(SET_SCHEMA, rows)
            env[name] = eb.TSet(kinds[0])
        else:
            tables[name] = Relation.from_values(REL_SCHEMA, rows)
            env[name] = eb.TRel(kinds[0], kinds[1])
    return Database(tables), env


def _kinds_of(name: str, rel: Relation, env: Optional[TypeEnv]) -> List[ScalarKind]:
    declared = env.get(name) if env else None
    if isinstance(declared, eb.TSet) and declared.elem:
        return [declared.elem]
    if isinstance(declared, eb.TRel) and declared.dom and declared.ran:
        return [declared.dom, declared.ran]
    for row in rel.rows:
        return [value.kind for value in row.values_in(rel.schema)]
    return [ScalarKind.INT] * len(rel.schema)


def write_state(db: Database, env: Optional[TypeEnv] = None) -> str:
    lines = []
    for name in db.names():
        rel = db.lookup(name)
        kinds = _kinds_of(name, rel, env)
        if rel.schema == SET_SCHEMA:
            body = ", ".join(str(values[0]) for values in rel.value_tuples())
            lines.append(f"set {name} : {kinds[0].value} = {{{body}}}")
        elif rel.schema == REL_SCHEMA:
            body = ", ".join(f"({k}, {v})" for k, v in rel.value_tuples())
            lines.append(f"rel {name} : {kinds[0].value} * {kinds[1].value} = {{{body}}}")
        else:
            raise ValueError(f"table '{name}' has schema {rel.schema}, which the state format cannot hold")
    return "\n".join(lines) + ("\n" if lines else "")


def load_state(path: AnyPath) -> Tuple[Database, TypeEnv]:
    return read_state(Path(path).read_text(encoding="utf-8"))


def save_state(path: AnyPath, db: Database, env: Optional[TypeEnv] = None) -> None:
    Path(path).write_text(write_state(db, env), encoding="utf-8")
    logger.info(f"wrote {len(db.names())} tables to {path}")
