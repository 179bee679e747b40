"""Cross-module contracts enforced by the service facade."""

from __future__ import annotations

import threading

import pytest

from knowcap.annotations import Anchor, AttributePair, TARGET_DOCUMENT
from knowcap.awareness import EVENT_ACTIVITY, EVENT_WORKSPACE
from knowcap.errors import InvalidKind
from knowcap.fixtures import seed_fixture
from knowcap.repository import KRKind
from knowcap.service import COUPLED_KINDS


def build_scenario(service, team):
    """A busy decision problem touching every coupled kind plus feedback."""
    dm, watcher, _ = team
    dp = service.create_decision_problem(dm.actor_id, "Scenario", "demand body text")
    _, stake = service.define_stake(watcher.actor_id, dp.dp_id, "o", "s", "h1")
    service.define_stake(watcher.actor_id, dp.dp_id, "o", "s", "h2")
    root = service.create_annotation(
        watcher.actor_id, dp.dp_id, Anchor(TARGET_DOCUMENT, dp.initial_demand),
        body="note", attributes=[AttributePair("severity", "high")],
    )
    service.follow_up(dm.actor_id, root.annotation_id, body="reply")
    service.validate_resource(dm.actor_id, stake.kr_id, 2)
    service.advance_phase(dm.actor_id, dp.dp_id)
    service.record_feedback(watcher.actor_id, (stake.kr_id, 2), 4)
    return dp


class TestEmissionCoupling:
    def test_one_activity_event_per_coupled_append(self, service, team):
        dp = build_scenario(service, team)
        state = service.repo.state
        coupled_appends = [
            row.key for row in state.all_versions()
            if row.kind in COUPLED_KINDS and row.dp_id == dp.dp_id
        ]
        activity_refs = [
            event.ref for event in state.events_for(dp.dp_id)
            if event.kind == EVENT_ACTIVITY
        ]
        # 1:1 both directions, zero orphans either side
        assert sorted(coupled_appends) == sorted(activity_refs)
        assert len(activity_refs) == len(set(activity_refs))

    def test_feedback_emits_no_activity_event(self, service, team, problem):
        _, watcher, _ = team
        target = service.repo.require_problem(problem.dp_id).declaration_lineage
        before = len(service.replay_since(problem.dp_id, 0))
        service.record_feedback(watcher.actor_id, (target, 1), 3)
        assert len(service.replay_since(problem.dp_id, 0)) == before

    def test_validation_emits_workspace_event(self, service, team, problem):
        dm, watcher, _ = team
        _, stake = service.define_stake(watcher.actor_id, problem.dp_id, "o", "s", "h")
        before = len(service.replay_since(problem.dp_id, 0))
        service.validate_resource(dm.actor_id, stake.kr_id, stake.version)
        new = service.replay_since(problem.dp_id, 0)[before:]
        assert [e.kind for e in new] == [EVENT_WORKSPACE]
        assert new[0].payload == f"kr_validated:{stake.kr_id}:v{stake.version}"
        assert new[0].ref == (stake.kr_id, stake.version)


class TestGenericResourceOps:
    def test_declare_generic_kinds_only(self, service, team, problem):
        dm, _, _ = team
        row = service.declare_resource(dm.actor_id, KRKind.DECLARATION, {"title": "t", "text": "x"}, problem.dp_id)
        assert row.version == 1
        for kind in (KRKind.ANNOTATION_REF, KRKind.FEEDBACK, KRKind.PHASE_TRANSITION):
            with pytest.raises(InvalidKind):
                service.declare_resource(dm.actor_id, kind, {}, problem.dp_id)

    def test_append_guarded_by_kind(self, service, team, problem):
        _, watcher, _ = team
        target = service.repo.require_problem(problem.dp_id).declaration_lineage
        feedback = service.record_feedback(watcher.actor_id, (target, 1), 3)
        with pytest.raises(InvalidKind):
            service.append_resource_version(watcher.actor_id, feedback.feedback_kr[0], {})


class TestConcurrency:
    def test_concurrent_stake_definitions_share_one_lineage(self, service, team, problem):
        _, watcher, _ = team
        barrier = threading.Barrier(4)
        errors = []

        def define(i):
            barrier.wait()
            try:
                service.define_stake(watcher.actor_id, problem.dp_id, "o", "s", f"h{i}")
            except Exception as exc:  # pragma: no cover - failure reporting
                errors.append(exc)

        threads = [threading.Thread(target=define, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        stakes = [l for l in service.repo.state.lineages.values() if l.kind is KRKind.STAKE_DEFINITION]
        assert len(stakes) == 1
        assert [row.version for row in stakes[0].versions] == [1, 2, 3, 4]

    def test_concurrent_mixed_appends_keep_seq_total_order(self, service, team, problem):
        dm, watcher, _ = team
        barrier = threading.Barrier(3)

        def annotate():
            barrier.wait()
            for i in range(10):
                service.create_annotation(
                    watcher.actor_id, problem.dp_id,
                    Anchor(TARGET_DOCUMENT, problem.initial_demand), body=f"w{i}")

        def declare():
            barrier.wait()
            for i in range(10):
                service.repo.declare(dm.actor_id, KRKind.DECLARATION, {"title": "", "text": f"d{i}"},
                                     dp_id=problem.dp_id)

        def signal():
            barrier.wait()
            for i in range(10):
                service.publish_signal(dm.actor_id, problem.dp_id, f"s{i}")

        threads = [threading.Thread(target=f) for f in (annotate, declare, signal)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        seqs = [r["seq"] for r in service.repo.all_records()]
        assert seqs == list(range(1, len(seqs) + 1))
        ids = [e.event_id for e in service.replay_since(problem.dp_id, 0)]
        assert ids == list(range(1, len(ids) + 1))


class TestExport:
    def test_partition_by_problem(self, service, team):
        dp1 = build_scenario(service, team)
        dm, _, _ = team
        dp2 = service.create_decision_problem(dm.actor_id, "Second", "another demand")
        records = service.filtered_records()
        scoped = service.filtered_records(dp1.dp_id)
        complement = [r for r in records if service.record_dp(r) != dp1.dp_id]
        assert len(scoped) + len(complement) == len(records)
        assert all(service.record_dp(r) == dp1.dp_id for r in scoped)
        other = service.filtered_records(dp2.dp_id)
        assert {r["seq"] for r in scoped}.isdisjoint({r["seq"] for r in other})

    def test_export_file_round_trips(self, service, team, tmp_path):
        from knowcap.records import read_log_file
        from knowcap.repository import LOG_FILENAME, Repository
        from knowcap.service import KnowledgeService

        build_scenario(service, team)
        out = tmp_path / "export.log"
        count = service.export_log(out)
        assert count == len(service.repo.all_records())

        # import: a fresh instance replays the exported file byte-for-byte
        data_dir = tmp_path / "fresh"
        data_dir.mkdir()
        (data_dir / LOG_FILENAME).write_bytes(out.read_bytes())
        fresh = KnowledgeService(Repository(data_dir))
        for kr_id in service.repo.state.lineages:
            original = [r.to_dict() for r in service.get_history(kr_id)]
            replayed = [r.to_dict() for r in fresh.get_history(kr_id)]
            assert original == replayed
        assert read_log_file(out)  # integrity-checkable as a log
        fresh.close()

    def test_empty_export(self, service, tmp_path):
        out = tmp_path / "empty.log"
        assert service.export_log(out) == 0
        assert out.read_text() == ""


class TestFixture:
    def test_neco_summary_shape(self, service):
        summary = seed_fixture(service, "neco")
        assert summary["stake_version"] == 2
        history = service.get_history(summary["stake_lineage"])
        assert [r.status.value for r in history] == ["superseded", "validated"]
        thread = service.list_thread(summary["thread_root"])
        assert thread.size() >= 3

    def test_unknown_fixture(self, service):
        from knowcap.errors import UnknownFixture

        with pytest.raises(UnknownFixture):
            seed_fixture(service, "x")

    def test_seeding_twice_creates_independent_problems(self, service):
        # Oracle: object counts double, ids disjoint.
        first = seed_fixture(service, "neco")
        second = seed_fixture(service, "neco")
        assert first["dp_id"] != second["dp_id"]
        assert len(service.repo.state.problems) == 2
        assert len(service.repo.state.actors) == 6
