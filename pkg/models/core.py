"""
Shared value model for both interpreters.

Scalars, named-attribute rows, duplicate-free relations and databases on the
SQL side; EbValue and MachineState on the Event-B side. Every type here is an
immutable value: "updates" return new objects.
"""

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Tuple, Union

from .errors import KindMismatch, PrimedNamePresent, SchemaMismatch, UnboundTable, UnboundVariable

# s' is spelled s__prime: apostrophes are not legal SQL identifiers
PRIME_SUFFIX = "__prime"

SET_SCHEMA: Tuple[str, ...] = ("refkey",)
REL_SCHEMA: Tuple[str, ...] = ("id", "value")
COUNT_SCHEMA: Tuple[str, ...] = ("count",)
SCALAR_SCHEMA: Tuple[str, ...] = ("scalar",)


def primed(name: str) -> str:
    return f"{name}{PRIME_SUFFIX}"


def is_primed(name: str) -> bool:
    return name.endswith(PRIME_SUFFIX)


class ScalarKind(enum.Enum):
    INT = "int"
    BOOL = "bool"


@dataclass(frozen=True)
class Scalar:
    """An integer or a boolean. Python's True == 1 is kept apart by the kind tag."""

    kind: ScalarKind
    value: int

    @classmethod
    def of(cls, value: Union[int, bool, "Scalar"]) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, bool):
            return cls(ScalarKind.BOOL, value)
        if isinstance(value, int):
            return cls(ScalarKind.INT, value)
        raise TypeError(f"not a scalar: {value!r}")

    def sort_key(self) -> Tuple[int, int]:
        return (0 if self.kind is ScalarKind.INT else 1, int(self.value))

    def same_kind(self, other: "Scalar") -> None:
        if self.kind is not other.kind:
            raise KindMismatch(self, other)

    def __str__(self) -> str:
        if self.kind is ScalarKind.BOOL:
            return "true" if self.value else "false"
        return str(self.value)


def _homogeneous(scalars: Iterable[Scalar]) -> None:
    first = None
    for scalar in scalars:
        if first is None:
            first = scalar
        else:
            first.same_kind(scalar)


@dataclass(frozen=True, eq=False)
class TupleRow:
    """A tuple with named attributes; equality ignores attribute order."""

    items: Tuple[Tuple[str, Scalar], ...]

    def __post_init__(self):
        names = [name for name, _ in self.items]
        if len(set(names)) != len(names):
            raise SchemaMismatch(f"duplicate attribute names in row: {names}")

    @classmethod
    def from_values(cls, schema: Iterable[str], values: Iterable) -> "TupleRow":
        schema = tuple(schema)
        values = tuple(Scalar.of(v) for v in values)
        if len(schema) != len(values):
            raise SchemaMismatch(f"row arity {len(values)} does not match schema {schema}")
        return cls(tuple(zip(schema, values)))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.items)

    def __getitem__(self, name: str) -> Scalar:
        for attr, value in self.items:
            if attr == name:
                return value
        raise SchemaMismatch(f"row has no attribute '{name}' (attributes: {self.names})")

    def values_in(self, schema: Iterable[str]) -> Tuple[Scalar, ...]:
        return tuple(self[name] for name in schema)

    def __eq__(self, other):
        if not isinstance(other, TupleRow):
            return NotImplemented
        return frozenset(self.items) == frozenset(other.items)

    def __hash__(self):
        return hash(frozenset(self.items))

    def __repr__(self):
        inner = ", ".join(f"{name}: {value}" for name, value in self.items)
        return f"({inner})"


@dataclass(frozen=True)
class Relation:
    """A duplicate-free table. Schema order matters for emission, not for row equality."""

    schema: Tuple[str, ...]
    rows: FrozenSet[TupleRow] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "rows", frozenset(self.rows))
        expected = set(self.schema)
        if len(expected) != len(self.schema):
            raise SchemaMismatch(f"duplicate attribute in schema {self.schema}")
        for row in self.rows:
            if len(row.items) != len(self.schema) or set(row.names) != expected:
                raise SchemaMismatch(f"row {row!r} does not match schema {self.schema}")

    @classmethod
    def from_values(cls, schema: Iterable[str], rows: Iterable[Iterable]) -> "Relation":
        schema = tuple(schema)
        return cls(schema, frozenset(TupleRow.from_values(schema, values) for values in rows))

    @classmethod
    def of_set(cls, *elements) -> "Relation":
        return cls.from_values(SET_SCHEMA, [(e,) for e in elements])

    @classmethod
    def of_pairs(cls, *pairs) -> "Relation":
        return cls.from_values(REL_SCHEMA, pairs)

    def empty(self) -> "Relation":
        return Relation(self.schema, frozenset())

    def with_rows(self, rows: Iterable[TupleRow]) -> "Relation":
        return Relation(self.schema, frozenset(rows))

    def insert(self, row: TupleRow) -> "Relation":
        return Relation(self.schema, self.rows | {row})

    def value_tuples(self) -> list:
        """Rows as value tuples in schema order, canonically sorted"""
        return sorted(
            (row.values_in(self.schema) for row in self.rows),
            key=lambda values: tuple(v.sort_key() for v in values),
        )

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True, eq=False)
class Database:
    """Function from table names to relations; lookup of an unbound name fails."""

    tables: Mapping[str, Relation] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tables", MappingProxyType(dict(self.tables)))

    def lookup(self, name: str) -> Relation:
        try:
            return self.tables[name]
        except KeyError:
            raise UnboundTable(name) from None

    def update(self, name: str, rel: Relation) -> "Database":
        tables = dict(self.tables)
        tables[name] = rel
        return Database(tables)

    def remove(self, name: str) -> "Database":
        tables = dict(self.tables)
        tables.pop(name, None)
        return Database(tables)

    def names(self) -> Tuple[str, ...]:
        return tuple(sorted(self.tables))

    def __contains__(self, name: str) -> bool:
        return name in self.tables

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())

    def __eq__(self, other):
        if not isinstance(other, Database):
            return NotImplemented
        return dict(self.tables) == dict(other.tables)

    def __reduce__(self):
        # mappingproxy does not pickle; fuzz workers ship databases between processes
        return (Database, (dict(self.tables),))

    def __repr__(self):
        return f"Database({dict(self.tables)!r})"


def db_update(db: Database, name: str, rel: Relation) -> Database:
    return db.update(name, rel)


def db_remove(db: Database, name: str) -> Database:
    return db.remove(name)


def relation_as_set(rel: Relation) -> FrozenSet[Scalar]:
    if rel.schema != SET_SCHEMA:
        raise SchemaMismatch(f"expected schema {SET_SCHEMA}, found {rel.schema}")
    return frozenset(row["refkey"] for row in rel.rows)


def relation_as_pairs(rel: Relation) -> FrozenSet[Tuple[Scalar, Scalar]]:
    if rel.schema != REL_SCHEMA:
        raise SchemaMismatch(f"expected schema {REL_SCHEMA}, found {rel.schema}")
    return frozenset((row["id"], row["value"]) for row in rel.rows)


# Event-B values

@dataclass(frozen=True)
class IntV:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class BoolV:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class SetV:
    elems: FrozenSet[Scalar] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "elems", frozenset(Scalar.of(e) for e in self.elems))
        _homogeneous(self.elems)

    @classmethod
    def of(cls, *elements) -> "SetV":
        return cls(frozenset(Scalar.of(e) for e in elements))

    def sorted(self) -> list:
        return sorted(self.elems, key=Scalar.sort_key)

    def __str__(self):
        return "{" + ", ".join(str(e) for e in self.sorted()) + "}"


@dataclass(frozen=True)
class RelV:
    pairs: FrozenSet[Tuple[Scalar, Scalar]] = frozenset()

    def __post_init__(self):
        pairs = frozenset((Scalar.of(x), Scalar.of(y)) for x, y in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        _homogeneous(x for x, _ in pairs)
        _homogeneous(y for _, y in pairs)

    @classmethod
    def of(cls, *pairs) -> "RelV":
        return cls(frozenset(pairs))

    def sorted(self) -> list:
        return sorted(self.pairs, key=lambda p: (p[0].sort_key(), p[1].sort_key()))

    def __str__(self):
        return "{" + ", ".join(f"{x} |-> {y}" for x, y in self.sorted()) + "}"


EbValue = Union[IntV, BoolV, SetV, RelV]


@dataclass(frozen=True, eq=False)
class MachineState:
    """Event-B state: variable names to values. Primed names never appear here."""

    bindings: Mapping[str, EbValue] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.bindings:
            if is_primed(name):
                raise PrimedNamePresent(name)
        object.__setattr__(self, "bindings", MappingProxyType(dict(self.bindings)))

    def lookup(self, name: str) -> EbValue:
        try:
            return self.bindings[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def rebind(self, name: str, value: EbValue) -> "MachineState":
        bindings: Dict[str, EbValue] = dict(self.bindings)
        bindings[name] = value
        return MachineState(bindings)

    def names(self) -> Tuple[str, ...]:
        return tuple(sorted(self.bindings))

    def __eq__(self, other):
        if not isinstance(other, MachineState):
            return NotImplemented
        return dict(self.bindings) == dict(other.bindings)

    def __str__(self):
        return "{" + ", ".join(f"{name} = {self.bindings[name]}" for name in self.names()) + "}"

    def __reduce__(self):
        return (MachineState, (dict(self.bindings),))

    def __repr__(self):
        return f"MachineState({self})"
