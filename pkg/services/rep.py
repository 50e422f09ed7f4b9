"""
Abstraction from database values and states to Event-B values and states.
"""

from typing import Union as AnyOf

from models.core import (
    REL_SCHEMA, SET_SCHEMA, BoolV, Database, EbValue, IntV, MachineState, Relation, RelV, Scalar,
    ScalarKind, SetV, is_primed, relation_as_pairs, relation_as_set,
)
from models.errors import PrimedNamePresent, SchemaMismatch


def rep_scalar(value: Scalar) -> EbValue:
    if value.kind is ScalarKind.BOOL:
        return BoolV(bool(value.value))
    return IntV(value.value)


def rep_value(value: AnyOf[Relation, Scalar]) -> EbValue:
    """Strip attribute names; a one-row, one-attribute result that is not a set reads as its scalar."""
    if isinstance(value, Scalar):
        return rep_scalar(value)
    if value.schema == SET_SCHEMA:
        return SetV(relation_as_set(value))
    if value.schema == REL_SCHEMA:
        return RelV(relation_as_pairs(value))
    if len(value.schema) == 1 and len(value.rows) == 1:
        (row,) = value.rows
        return rep_scalar(row[value.schema[0]])
    raise SchemaMismatch(f"no Event-B reading for a relation with schema {value.schema}")


def rep_db(db: Database) -> MachineState:
    bindings = {}
    for name in db.names():
        if is_primed(name):
            raise PrimedNamePresent(name)
        bindings[name] = rep_value(db.lookup(name))
    return MachineState(bindings)
