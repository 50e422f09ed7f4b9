from models import sql_ast as sql
from models.core import Scalar
from services.sql_emit import Dialect, emit_sql


def col(alias, attr):
    return sql.ColRef(alias, attr)


def lit(value):
    return sql.LitScalar(Scalar.of(value))


def test_select_from_named_table():
    query = sql.Select(((col("stmp0", "refkey"), "refkey"),), (sql.Named("s", "stmp0"),))
    assert emit_sql(query) == "select stmp0.refkey from s stmp0"


def test_renamed_column_is_implicit_by_default():
    inner = sql.Select(((col("rtmp0", "id"), "id"), (col("rtmp0", "value"), "value")), (sql.Named("r", "rtmp0"),))
    query = sql.Select(((col("rtmp1", "id"), "refkey"),), (sql.Derived(inner, "rtmp1"),), distinct=True)
    assert emit_sql(query) == "select distinct rtmp1.id from (select rtmp0.id, rtmp0.value from r rtmp0) rtmp1"
    assert emit_sql(query, explicit_columns=True) == (
        "select distinct rtmp1.id as refkey from (select rtmp0.id, rtmp0.value from r rtmp0) rtmp1"
    )


def test_literal_columns_are_always_named():
    assert emit_sql(sql.Select(((lit(3), "scalar"),))) == "select 3 as scalar"
    assert emit_sql(sql.Select(((lit(True), "refkey"),))) == "select 1 as refkey"


def test_where_without_sources_uses_dual_on_mysql_only():
    never = sql.Compare(lit(1), sql.CompareOp.EQ, lit(0))
    query = sql.Select(((lit(0), "refkey"),), (), never)
    assert emit_sql(query, Dialect.MYSQL) == "select 0 as refkey from dual where 1 = 0"
    assert emit_sql(query, "sqlite") == "select 0 as refkey where 1 = 0"


def test_union_and_count():
    a = sql.Select(((lit(1), "refkey"),))
    b = sql.Select(((lit(2), "refkey"),))
    assert emit_sql(sql.UnionQ(a, b)) == "select 1 as refkey union select 2 as refkey"
    count = sql.CountQ(col("stmp1", "refkey"), sql.Derived(sql.UnionQ(a, b), "stmp1"))
    assert emit_sql(count) == "select count(stmp1.refkey) from (select 1 as refkey union select 2 as refkey) stmp1"


def test_predicates():
    inner = sql.Select(((col("b", "id"), "id"), (col("b", "value"), "value")), (sql.Named("q", "b"),))
    row_in = sql.NotInSubquery((col("a", "id"), col("a", "value")), inner)
    assert emit_sql(row_in) == "(a.id, a.value) not in (select b.id, b.value from q b)"
    nested = sql.Not(sql.And(sql.TrueP(), sql.Or(sql.TrueP(), sql.TrueP())))
    assert emit_sql(nested) == "not (1 = 1 and (1 = 1 or 1 = 1))"
    size = sql.SubqueryTerm(sql.CountQ(col("x", "refkey"), sql.Named("s", "x")))
    assert emit_sql(sql.Compare(size, sql.CompareOp.NE, lit(0))) == "(select count(x.refkey) from s x) <> 0"


def test_statements_per_dialect():
    select = sql.Select(((col("stmp0", "refkey"), "refkey"),), (sql.Named("s__prime", "stmp0"),))
    insert = sql.InsertIgnoreSelect("s", select)
    assert emit_sql(insert) == "insert ignore into s select stmp0.refkey from s__prime stmp0"
    assert emit_sql(insert, Dialect.SQLITE) == "insert or ignore into s select stmp0.refkey from s__prime stmp0"
    assert emit_sql(sql.InsertIgnoreSelect("s", select, ignore=False)).startswith("insert into s select")
    assert emit_sql(sql.DeleteAll("s")) == "delete from s"


def test_statement_sequence():
    statements = [sql.DeleteAll("s"), sql.DeleteAll("t")]
    assert emit_sql(statements) == "delete from s;\ndelete from t;"
