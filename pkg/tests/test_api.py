import inspect

import pytest
from fastapi.testclient import TestClient

from api.check import CheckRequest, check
from main import app

ENV = "set s : int\nset t : int\nrel r : int * int\nrel q : int * int"
STATE = "set s : int = {1, 2}\nset t : int = {2}"


@pytest.fixture
def client():
    with TestClient(app) as client:
        yield client


def test_translate_expression(client):
    response = client.post("/api/translate", json={"expr": "dom(r)", "env": ENV})
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "query"
    assert body["sql"] == "select distinct rtmp1.id from (select rtmp0.id, rtmp0.value from r rtmp0) rtmp1"


def test_translate_predicate_and_dialect(client):
    body = client.post("/api/translate", json={"expr": "s <: t", "env": ENV, "dialect": "sqlite"}).json()
    assert body["kind"] == "predicate"


def test_translate_actions_reports_rules(client):
    body = client.post("/api/translate", json={"actions": "s := s \\/ t || r := r <+ q", "env": ENV}).json()
    assert body["kind"] == "actions"
    assert [a["rule"] for a in body["assignments"]] == [1, 4]
    assert body["assignments"][0]["primed_definition"] == "t"
    assert body["assignments"][0]["statements"][0].startswith("insert ignore into s")


def test_translate_needs_exactly_one_input(client):
    assert client.post("/api/translate", json={"env": ENV}).status_code == 422
    assert client.post("/api/translate", json={"expr": "s", "actions": "s := t", "env": ENV}).status_code == 422


@pytest.mark.parametrize("expr", ["s +", "s \\/ r", "x"])
def test_bad_input_is_unprocessable(client, expr):
    response = client.post("/api/translate", json={"expr": expr, "env": ENV})
    assert response.status_code == 422
    assert response.json()["detail"]


def test_evaluate_both_ways(client):
    assert client.post("/api/eval/eb", json={"state": STATE, "expr": "s \\ t"}).json() == {"value": "{1}"}
    body = client.post("/api/eval/sql", json={"state": STATE, "expr": "s \\ t"}).json()
    assert body["value"] == "{1}"
    assert body["columns"] == ["refkey"]
    assert body["rows"] == [[1]]
    assert client.post("/api/eval/sql", json={"state": STATE, "expr": "2 : s"}).json()["value"] == "true"


def test_exec_swaps(client):
    body = client.post("/api/exec", json={"state": STATE, "actions": "s := t || t := s"}).json()
    assert "set s : int = {2}" in body["state"]
    assert "set t : int = {1, 2}" in body["state"]


def test_check(client):
    body = client.post("/api/check", json={"state": STATE, "actions": "s := s \\/ t"}).json()
    assert body == {"verdict": "pass", "counterexample": None}


def test_check_handler_runs_in_the_threadpool():
    assert not inspect.iscoroutinefunction(check)
    response = check(CheckRequest(state=STATE, expr="card(s \\ t)"))
    assert response.verdict == "pass"


def test_fuzz_job_lifecycle(client):
    created = client.post("/api/fuzz/jobs", json={"mode": "actions", "seed": 3, "cases": 10})
    assert created.status_code == 200
    job_id = created.json()["job_id"]

    # background tasks have run by the time the test client returns
    job = client.get(f"/api/fuzz/jobs/{job_id}").json()
    assert job["status"] == "completed"
    assert job["cases_run"] == 10
    assert job["verdict"] == "pass"
    assert len(job["report"]) == 1
    assert job["started_at"] is not None
    assert job["completed_at"] is not None


def test_fuzz_job_with_mutation_fails(client):
    job_id = client.post(
        "/api/fuzz/jobs", json={"seed": 42, "cases": 200, "mutation": "inter_as_diff"}
    ).json()["job_id"]
    job = client.get(f"/api/fuzz/jobs/{job_id}").json()
    assert job["verdict"] == "fail"
    assert job["failure_count"] == len(job["report"]) - 1


def test_fuzz_job_validation(client):
    assert client.post("/api/fuzz/jobs", json={"mode": "bogus"}).status_code == 422
    assert client.post("/api/fuzz/jobs", json={"cases": -1}).status_code == 422
    assert client.get("/api/fuzz/jobs/missing").status_code == 404


def test_health_and_root(client):
    assert client.get("/health").json()["status"] == "healthy"
    assert "translate" in client.get("/").json()["endpoints"]
