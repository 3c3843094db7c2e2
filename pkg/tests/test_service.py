"""HTTP-level tests for the JSON service.

Requests go through the real ASGI app via the test client, so routing,
body validation, the ops layer, and the error-to-status mapping are all
exercised together.
"""

import pytest
from fastapi.testclient import TestClient

from causalpattern import ops
from causalpattern.graphs import parse_dag_text, parse_pattern_text
from causalpattern.latent import parse_report, verify_counterexample
from causalpattern.sem import Dataset
from causalpattern.service import create_app

from .test_cli import (
    ANCHORED_PAT,
    BIDIRECTED_PAT,
    CHAIN_DAG,
    CHAIN_PAT,
    COLLIDER_DAG,
    LATENT_DAG,
    chain_csv_text,
)


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


class TestHealth:
    def test_health_reports_ok(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestDiscover:
    def test_exact_oracle_chain(self, client):
        r = client.post("/discover", json={"graph_text": CHAIN_DAG})
        assert r.status_code == 200
        body = r.json()
        assert body["oracle_kind"] == "exact"
        assert body["edges"] == ["A -- B", "B -- C"]
        assert body["vertices"] == ["A", "B", "C"]
        assert body["trace"] is None
        assert parse_pattern_text(body["pattern_text"]) == parse_pattern_text(
            CHAIN_PAT
        )

    def test_latent_margin_has_a_bidirected_edge(self, client):
        r = client.post("/discover", json={"graph_text": LATENT_DAG})
        assert r.status_code == 200
        assert "X <-> Y" in r.json()["edges"]

    def test_trace_is_returned_on_request(self, client):
        r = client.post(
            "/discover", json={"graph_text": LATENT_DAG, "include_trace": True}
        )
        assert r.status_code == 200
        trace = r.json()["trace"]
        direct = ops.run_discover(graph_text=LATENT_DAG)
        assert trace == list(direct.trace.render_lines())

    def test_data_input_recovers_the_chain(self, client):
        r = client.post(
            "/discover", json={"data_text": chain_csv_text(), "alpha": 0.01}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["oracle_kind"] == "data"
        assert body["edges"] == ["A -- B", "B -- C"]
        assert body["query_count"] > 0

    def test_requires_exactly_one_input(self, client):
        both = client.post(
            "/discover",
            json={"graph_text": CHAIN_DAG, "data_text": chain_csv_text(100, 1)},
        )
        neither = client.post("/discover", json={})
        assert both.status_code == 422
        assert neither.status_code == 422
        assert both.json()["error"] == "InvalidParameter"

    def test_malformed_graph_is_a_400_naming_the_line(self, client):
        r = client.post(
            "/discover",
            json={"graph_text": "node A\nA !! B\n", "source": "upload.dag"},
        )
        assert r.status_code == 400
        body = r.json()
        assert body["error"] == "ParseError"
        assert "upload.dag" in body["detail"]
        assert ":2:" in body["detail"]

    def test_too_few_rows_is_a_422(self, client):
        r = client.post(
            "/discover", json={"data_text": "A,B\n1.0,2.0\n2.0,1.0\n0.5,0.5\n"}
        )
        assert r.status_code == 422
        assert r.json()["error"] == "OracleFailure"


class TestDsep:
    def test_collider_conditioning_opens_the_path(self, client):
        r = client.post(
            "/dsep",
            json={"graph_text": COLLIDER_DAG, "x": "A", "y": "C", "given": ["B"]},
        )
        assert r.status_code == 200
        assert r.json() == {
            "separated": False,
            "verdict": "dependent",
            "graph_kind": "dag",
        }

    def test_marginal_separation(self, client):
        r = client.post("/dsep", json={"graph_text": COLLIDER_DAG, "x": "A", "y": "C"})
        assert r.status_code == 200
        assert r.json()["verdict"] == "independent"

    def test_pattern_document(self, client):
        r = client.post(
            "/dsep",
            json={"graph_text": CHAIN_PAT, "x": "A", "y": "C", "given": ["B"]},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["graph_kind"] == "pattern"
        assert body["verdict"] == "independent"

    def test_unknown_vertex_is_a_404(self, client):
        r = client.post("/dsep", json={"graph_text": COLLIDER_DAG, "x": "A", "y": "Q"})
        assert r.status_code == 404
        assert r.json()["error"] in ("UnknownVertex", "NotObserved")

    def test_latent_vertex_is_a_404(self, client):
        r = client.post("/dsep", json={"graph_text": LATENT_DAG, "x": "A", "y": "T"})
        assert r.status_code == 404

    def test_missing_field_is_a_422_validation_error(self, client):
        r = client.post("/dsep", json={"graph_text": COLLIDER_DAG, "x": "A"})
        assert r.status_code == 422


class TestClaim:
    def test_anchored_edge(self, client):
        r = client.post(
            "/claim",
            json={
                "graph_text": ANCHORED_PAT,
                "source_vertex": "X",
                "target_vertex": "Z",
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["kind"] == "DefiniteCause"
        assert body["rendered"] == "DefiniteCause; witness: C=A, edge X->Z"
        assert body["rule_applied"] == "thm3"
        assert body["anchor"] == "A"
        assert body["path"] == ["X", "Z"]

    def test_bidirected_edge_with_explicit_rule(self, client):
        r = client.post(
            "/claim",
            json={
                "graph_text": BIDIRECTED_PAT,
                "source_vertex": "X",
                "target_vertex": "Y",
                "rule": "thm2",
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["kind"] == "NotACause"
        assert body["rule_applied"] == "thm2"

    def test_strict_premise_changes_the_verdict(self, client):
        doc = "node C\nnode X\nnode Z\nC <-> X\nX -> Z\n"
        arrow = client.post(
            "/claim",
            json={
                "graph_text": doc,
                "source_vertex": "X",
                "target_vertex": "Z",
                "rule": "thm3",
            },
        )
        strict = client.post(
            "/claim",
            json={
                "graph_text": doc,
                "source_vertex": "X",
                "target_vertex": "Z",
                "rule": "thm3",
                "premise": "strict",
            },
        )
        assert arrow.json()["kind"] == "DefiniteCause"
        assert strict.json()["kind"] == "Undetermined"

    def test_unknown_vertex_is_a_404(self, client):
        r = client.post(
            "/claim",
            json={
                "graph_text": ANCHORED_PAT,
                "source_vertex": "X",
                "target_vertex": "Q",
            },
        )
        assert r.status_code == 404


class TestSimulate:
    BODY = {"n_vars": 5, "avg_degree": 2.0, "n_samples": 100, "seed": 7}

    def test_repeated_requests_are_identical(self, client):
        a = client.post("/simulate", json=self.BODY)
        b = client.post("/simulate", json=self.BODY)
        assert a.status_code == 200
        assert a.json() == b.json()

    def test_payload_round_trips_through_the_readers(self, client):
        body = client.post("/simulate", json=self.BODY).json()
        data = Dataset.from_csv(body["csv_text"])
        g, observed = parse_dag_text(body["graph_text"])
        assert data.columns == tuple(body["columns"])
        assert data.n == body["n"] == 100
        assert g.vertices == data.columns
        assert observed is None

    def test_invalid_config_is_a_422(self, client):
        r = client.post("/simulate", json=dict(self.BODY, n_vars=0))
        assert r.status_code == 422
        assert r.json()["error"] == "InvalidParameter"


class TestBenchmark:
    BODY = {
        "n_vars": 4,
        "avg_degree": 1.5,
        "n_samples": 200,
        "n_trials": 3,
        "seed": 5,
        "jobs": 1,
    }

    def test_small_run_accounts_for_every_trial(self, client):
        r = client.post("/benchmark", json=self.BODY)
        assert r.status_code == 200
        body = r.json()
        assert body["trials_completed"] + body["trials_failed"] == 3
        assert body["kv_text"]
        assert body["text"]

    def test_exact_oracle_makes_no_errors(self, client):
        r = client.post("/benchmark", json=dict(self.BODY, oracle="exact"))
        assert r.status_code == 200
        body = r.json()
        assert body["adjacency_omissions"] == 0
        assert body["adjacency_commissions"] == 0
        assert body["arrowhead_omissions"] == 0
        assert body["arrowhead_commissions"] == 0

    def test_invalid_alpha_is_a_422(self, client):
        r = client.post("/benchmark", json=dict(self.BODY, alpha=2.0))
        assert r.status_code == 422
        assert r.json()["error"] == "InvalidParameter"


class TestCounterexample:
    def test_empty_bounds_report_not_found(self, client):
        r = client.post(
            "/counterexample", json={"max_vertices": 4, "max_latents": 0}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["found"] is False
        assert body["detail"]
        assert body["report_text"] is None

    def test_found_report_reverifies(self, client, monkeypatch):
        fixture = (
            __import__("pathlib").Path(__file__).parent
            / "fixtures"
            / "counterexample_6_1.txt"
        )
        frozen = parse_report(fixture.read_text())
        monkeypatch.setattr(ops, "run_counterexample", lambda **kw: frozen)
        r = client.post(
            "/counterexample", json={"max_vertices": 6, "max_latents": 1}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["found"] is True
        assert body["source_vertex"] == frozen.x
        assert body["target_vertex"] == frozen.z
        verify_counterexample(parse_report(body["report_text"]))

    def test_bad_bounds_are_a_422(self, client):
        r = client.post(
            "/counterexample", json={"max_vertices": 2, "max_latents": 0}
        )
        assert r.status_code == 422
        assert r.json()["error"] == "InvalidParameter"
