import pytest
from hypothesis import given, strategies as st

from models import eb_ast as eb
from models.core import Database, Relation, ScalarKind
from models.errors import ParseError
from services.state_file import load_state, read_state, save_state, write_state

SAMPLE = """
# two sets and a relation
set s = {1, 2}
set e : bool = {}
rel r : int * bool = {(1, true), (2, false)}
"""


def test_read_state():
    db, env = read_state(SAMPLE)
    assert db.lookup("s") == Relation.of_set(1, 2)
    assert db.lookup("e") == Relation.of_set()
    assert db.lookup("r") == Relation.of_pairs((1, True), (2, False))
    assert env == {
        "s": eb.TSet(ScalarKind.INT),
        "e": eb.TSet(ScalarKind.BOOL),
        "r": eb.TRel(ScalarKind.INT, ScalarKind.BOOL),
    }


def test_declaration_without_value_is_empty():
    db, env = read_state("set s : int\nrel r : int * int")
    assert len(db.lookup("s")) == 0
    assert env["r"] == eb.TRel(ScalarKind.INT, ScalarKind.INT)


def test_write_state_is_sorted_and_annotated():
    db, env = read_state(SAMPLE)
    assert write_state(db, env) == (
        "set e : bool = {}\n"
        "rel r : int * bool = {(1, true), (2, false)}\n"
        "set s : int = {1, 2}\n"
    )


def test_written_text_is_a_fixed_point():
    db, env = read_state(SAMPLE)
    once = write_state(db, env)
    assert write_state(*read_state(once)) == once


@pytest.mark.parametrize("text", [
    "set s = {}",
    "set s = {1, true}",
    "set s : bool = {1}",
    "bag s = {1}",
    "set s = {1}\nset s = {2}",
    "set s__prime = {1}",
    "set s = {1,",
    "rel r = {(1 2)}",
    "set s = {1} extra",
    "set s = {x}",
])
def test_malformed_state_files(text):
    with pytest.raises(ParseError):
        read_state(text)


def test_error_position_counts_earlier_lines():
    with pytest.raises(ParseError) as info:
        read_state("set s = {1}\nset t = {true, 2}")
    assert info.value.position == len("set s = {1}\nset t = {true, ")


def test_save_and_load(tmp_path):
    db, env = read_state(SAMPLE)
    path = tmp_path / "state.txt"
    save_state(path, db, env)
    assert load_state(path) == (db, env)


@given(
    st.frozensets(st.integers(-100, 100), max_size=8),
    st.frozensets(st.tuples(st.integers(-3, 3), st.booleans()), max_size=8),
)
def test_read_after_write_restores_the_database(elems, pairs):
    db = Database({"s": Relation.of_set(*elems), "r": Relation.of_pairs(*pairs)})
    env = {"s": eb.TSet(ScalarKind.INT), "r": eb.TRel(ScalarKind.INT, ScalarKind.BOOL)}
    assert read_state(write_state(db, env)) == (db, env)
