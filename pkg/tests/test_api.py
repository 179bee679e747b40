"""HTTP surface: routing, auth, error fidelity, restart transparency."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

import knowcap.errors as errors_module
from knowcap.api import create_app
from knowcap.errors import KnowcapError
from knowcap.repository import Repository
from knowcap.service import KnowledgeService


@pytest.fixture
def client(service):
    return TestClient(create_app(service))


@pytest.fixture
def seeded(client):
    summary = client.post("/api/admin/seed", json={"name": "neco"}).json()["summary"]
    return summary


def auth(summary, who="watcher"):
    return {"Authorization": f"Bearer {summary['actors'][who]['token']}"}


# The documented operation surface; every entry must appear exactly once.
CORE_OPERATIONS = {
    "domain.register_actor", "domain.create_decision_problem", "domain.define_stake",
    "domain.advance_phase",
    "annotation.create_annotation", "annotation.follow_up", "annotation.reuse_annotation",
    "annotation.resolve_anchor", "annotation.list_thread",
    "repository.declare", "repository.append_version", "repository.validate",
    "repository.get_history", "repository.snapshot_at",
    "exploit.explore", "exploit.query", "exploit.analyze", "exploit.record_feedback",
    "exploit.recommend",
    "awareness.join", "awareness.heartbeat", "awareness.leave", "awareness.publish_event",
    "awareness.presence_roster", "awareness.replay_since", "awareness.stream",
    "service.seed_fixture", "service.export_log",
}


class TestCatalogue:
    def test_every_operation_has_exactly_one_endpoint(self, client):
        entries = client.get("/api/catalogue").json()["endpoints"]
        operations = [e["operation"] for e in entries]
        assert len(operations) == len(set(operations))
        assert CORE_OPERATIONS <= set(operations)

    def test_catalogue_matches_served_routes(self, client):
        # No drift: every catalogued path is actually served (401/404/422
        # from handlers are fine, 405 method-not-allowed is not).
        for entry in client.get("/api/catalogue").json()["endpoints"]:
            path = entry["path"].replace("{dp_id}", "dp-x").replace("{kr_id}", "kr-x")
            path = path.replace("{annotation_id}", "ann-x").replace("{session_id}", "s-x")
            path = path.replace("{version}", "1").replace("{doc_uri}", "doc-x")
            response = client.request(entry["method"], path)
            assert response.status_code != 405


class TestErrorFidelity:
    def test_every_error_code_is_distinct(self):
        codes = {}
        stack = [KnowcapError]
        while stack:
            cls = stack.pop()
            for sub in cls.__subclasses__():
                assert sub.code not in codes, f"{sub.__name__} reuses code of {codes.get(sub.code)}"
                codes[sub.code] = sub.__name__
                stack.append(sub)
        assert len(codes) >= 20

    def test_error_body_carries_machine_code(self, client, seeded):
        response = client.post(
            f"/api/problems/{seeded['dp_id']}/stake",
            headers=auth(seeded, "coordinator"),
            json={"observed_object": "o", "signal": "s", "hypothesis": "h"},
        )
        assert response.status_code == 403
        assert response.json()["error"]["code"] == "role_violation"

    def test_stale_version_conflict(self, client, seeded):
        response = client.post(
            f"/api/resources/{seeded['stake_lineage']}/versions/1/validate",
            headers=auth(seeded, "decision_maker"),
        )
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "stale_version"

    def test_orphaned_resolution_maps_to_410(self, client, seeded):
        dp = client.get(f"/api/problems/{seeded['dp_id']}", headers=auth(seeded)).json()["problem"]
        document = client.get(f"/api/documents/{dp['initial_demand']}", headers=auth(seeded)).json()["document"]
        anchor = {
            "target_kind": "document", "target": dp["initial_demand"],
            "fragment": {"start_offset": 0, "end_offset": 4, "segment_path": [],
                         "prefix": "", "exact": document["content"][:4], "suffix": document["content"][4:36]},
        }
        response = client.post("/api/anchors/resolve", headers=auth(seeded),
                               json={"anchor": anchor, "content": "entirely different text"})
        assert response.status_code == 410
        assert response.json()["error"]["code"] == "orphaned"

    def test_unknown_token_is_401(self, client):
        assert client.get("/api/problems").status_code == 401
        assert client.get("/api/problems", headers={"Authorization": "Bearer nope"}).status_code == 401


class TestFlows:
    def test_register_and_whoami(self, client):
        body = client.post("/api/actors", json={"display_name": "Ada", "role": "decision_maker"}).json()
        headers = {"Authorization": f"Bearer {body['token']}"}
        me = client.get("/api/me", headers=headers).json()["actor"]
        assert me["actor_id"] == body["actor"]["actor_id"]

    def test_full_stake_loop_over_http(self, client, seeded):
        dp_id = seeded["dp_id"]
        watcher = auth(seeded, "watcher")
        dm = auth(seeded, "decision_maker")

        revised = client.post(f"/api/problems/{dp_id}/stake", headers=watcher, json={
            "observed_object": "results", "signal": "failure rate",
            "hypothesis": "poor preparation plus marking anomalies",
        }).json()["resource"]
        assert revised["version"] == 3

        validated = client.post(
            f"/api/resources/{revised['kr_id']}/versions/3/validate", headers=dm,
        ).json()["resource"]
        assert validated["status"] == "validated"

        phase = client.post(f"/api/problems/{dp_id}/advance", headers=dm).json()["current_phase"]
        assert phase == "search_retrieval"

    def test_annotation_thread_over_http(self, client, seeded):
        dp_id = seeded["dp_id"]
        thread = client.get(
            f"/api/annotations/{seeded['thread_root']}/thread", headers=auth(seeded),
        ).json()["thread"]

        def size(node):
            return 1 + sum(size(c) for c in node["children"])

        assert size(thread) >= 3

    def test_snapshot_endpoint(self, client, seeded):
        live = client.get("/api/snapshot?seq=999999", headers=auth(seeded)).json()
        empty = client.get("/api/snapshot?seq=0", headers=auth(seeded)).json()
        assert empty["lineages"] == {}
        assert seeded["stake_lineage"] in live["lineages"]

    def test_query_and_feedback_and_recommend(self, client, seeded):
        headers = auth(seeded)
        matches = client.post("/api/exploit/query", headers=headers,
                              json={"terms": ["NECO", "failure"]}).json()["matches"]
        assert matches
        top = matches[0]
        feedback = client.post("/api/feedback", headers=headers,
                               json={"kr": top["kr"], "rating": 5, "comment": "useful"}).json()["feedback"]
        assert feedback["rating"] == 5
        recs = client.get("/api/recommend?limit=5", headers=auth(seeded, "coordinator")).json()["recommendations"]
        assert len(recs) >= 1

    def test_explore_and_analyze(self, client, seeded):
        headers = auth(seeded)
        vocabulary = client.get("/api/exploit/explore", headers=headers).json()
        assert vocabulary["attribute_keys"].get("severity") == 1
        report = client.get("/api/exploit/analyze", headers=headers).json()
        assert report["by_kind"]["stake_definition"] == 2
        assert report["evolution"][-1][1] == sum(report["by_kind"].values())

    def test_awareness_over_http(self, client, seeded):
        dp_id = seeded["dp_id"]
        headers = auth(seeded)
        joined = client.post(f"/api/workspaces/{dp_id}/join", headers=headers).json()
        assert joined["backlog_count"] >= 1  # seeded events happened while away
        session_id = joined["session"]["session_id"]
        roster = client.get(f"/api/workspaces/{dp_id}/roster", headers=headers).json()["roster"]
        assert roster and roster[0]["availability"] == "online"
        client.post(f"/api/sessions/{session_id}/heartbeat", headers=headers,
                    json={"availability": "busy"})
        roster = client.get(f"/api/workspaces/{dp_id}/roster", headers=headers).json()["roster"]
        assert roster[0]["availability"] == "busy"
        events = client.get(f"/api/workspaces/{dp_id}/events?after=0", headers=headers).json()["events"]
        ids = [e["event_id"] for e in events]
        assert ids == list(range(1, len(ids) + 1))
        client.post(f"/api/sessions/{session_id}/leave", headers=headers)
        roster = client.get(f"/api/workspaces/{dp_id}/roster", headers=headers).json()["roster"]
        assert roster == []

    def test_seed_twice_is_independent(self, client, seeded):
        second = client.post("/api/admin/seed", json={"name": "neco"}).json()["summary"]
        assert second["dp_id"] != seeded["dp_id"]
        problems = client.get("/api/problems", headers=auth(seeded)).json()["problems"]
        assert len(problems) == 2

    def test_unknown_fixture(self, client):
        response = client.post("/api/admin/seed", json={"name": "x"})
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_fixture"


class TestRestartTransparency:
    def test_reads_identical_across_restart(self, tmp_path):
        def observable_reads(client, summary):
            headers = auth(summary)
            return {
                "problems": client.get("/api/problems", headers=headers).json(),
                "history": client.get(f"/api/resources/{summary['stake_lineage']}", headers=headers).json(),
                "events": client.get(f"/api/workspaces/{summary['dp_id']}/events?after=0", headers=headers).json(),
                "explore": client.get("/api/exploit/explore", headers=headers).json(),
                "analyze": client.get("/api/exploit/analyze", headers=headers).json(),
                "query": client.post("/api/exploit/query", headers=headers,
                                     json={"terms": ["failure", "examination"]}).json(),
                "thread": client.get(f"/api/annotations/{summary['thread_root']}/thread",
                                     headers=headers).json(),
                "export": client.get("/api/admin/export").text,
            }

        service = KnowledgeService(Repository(tmp_path / "data"))
        client = TestClient(create_app(service))
        summary = client.post("/api/admin/seed", json={"name": "neco"}).json()["summary"]
        before = observable_reads(client, summary)
        service.close()

        service2 = KnowledgeService(Repository(tmp_path / "data"))
        client2 = TestClient(create_app(service2))
        after = observable_reads(client2, summary)
        assert after == before
        service2.close()
