import pickle

import pytest

from models.core import (
    REL_SCHEMA, SET_SCHEMA, BoolV, Database, IntV, MachineState, Relation, RelV, Scalar, ScalarKind,
    SetV, TupleRow, is_primed, primed, relation_as_pairs, relation_as_set,
)
from models.errors import KindMismatch, PrimedNamePresent, SchemaMismatch, UnboundTable, UnboundVariable


def test_bool_and_int_scalars_are_distinct():
    assert Scalar.of(True) != Scalar.of(1)
    assert Scalar.of(False) != Scalar.of(0)
    assert Scalar.of(True).kind is ScalarKind.BOOL
    assert str(Scalar.of(False)) == "false"


def test_same_kind_raises_on_mixed_kinds():
    with pytest.raises(KindMismatch):
        Scalar.of(1).same_kind(Scalar.of(True))


def test_tuple_row_equality_ignores_attribute_order():
    a = TupleRow.from_values(("id", "value"), (1, 2))
    b = TupleRow(((("value", Scalar.of(2)), ("id", Scalar.of(1)))))
    assert a == b
    assert hash(a) == hash(b)
    assert a["value"] == Scalar.of(2)


def test_tuple_row_rejects_duplicate_attributes():
    with pytest.raises(SchemaMismatch):
        TupleRow((("id", Scalar.of(1)), ("id", Scalar.of(2))))


def test_relation_is_duplicate_free():
    rel = Relation.of_set(1, 1, 2)
    assert len(rel) == 2


def test_relation_rejects_rows_of_another_schema():
    with pytest.raises(SchemaMismatch):
        Relation(SET_SCHEMA, frozenset({TupleRow.from_values(REL_SCHEMA, (1, 2))}))


def test_value_tuples_sorted_in_schema_order():
    rel = Relation.of_pairs((2, 1), (1, 5))
    assert rel.value_tuples() == [(Scalar.of(1), Scalar.of(5)), (Scalar.of(2), Scalar.of(1))]


def test_database_lookup_update_remove():
    db = Database({"s": Relation.of_set(1)})
    with pytest.raises(UnboundTable):
        db.lookup("t")
    db2 = db.update("t", Relation.of_set(2))
    assert "t" in db2 and "t" not in db
    assert db2.remove("t") == db
    assert db.remove("missing") == db
    assert db2.names() == ("s", "t")


def test_database_pickles_for_worker_processes():
    db = Database({"s": Relation.of_set(1, 2), "r": Relation.of_pairs((1, True))})
    assert pickle.loads(pickle.dumps(db)) == db
    m = MachineState({"s": SetV.of(1)})
    assert pickle.loads(pickle.dumps(m)) == m


def test_relation_projections():
    assert relation_as_set(Relation.of_set(1, 2)) == frozenset({Scalar.of(1), Scalar.of(2)})
    assert relation_as_pairs(Relation.of_pairs((1, 2))) == frozenset({(Scalar.of(1), Scalar.of(2))})
    with pytest.raises(SchemaMismatch):
        relation_as_set(Relation.of_pairs((1, 2)))


def test_primed_names():
    assert primed("s") == "s__prime"
    assert is_primed("s__prime")
    assert not is_primed("s")


def test_machine_state_rejects_primed_names():
    with pytest.raises(PrimedNamePresent):
        MachineState({"s__prime": SetV.of(1)})


def test_machine_state_lookup_and_rebind():
    m = MachineState({"s": SetV.of(1)})
    with pytest.raises(UnboundVariable):
        m.lookup("t")
    m2 = m.rebind("s", SetV.of(2))
    assert m.lookup("s") == SetV.of(1)
    assert m2.lookup("s") == SetV.of(2)


def test_event_b_values():
    assert SetV.of(2, 1) == SetV.of(1, 2)
    assert str(SetV.of(2, 1)) == "{1, 2}"
    assert str(RelV.of((1, True))) == "{1 |-> true}"
    assert IntV(1) != BoolV(True)
    assert SetV() != RelV()
    with pytest.raises(KindMismatch):
        SetV.of(1, True)
