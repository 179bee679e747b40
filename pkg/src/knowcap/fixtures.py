"""Built-in demonstration fixtures.

``neco`` replays the mass-examination-failure walkthrough: a decision maker
opens the problem, a watcher defines and revises the stake under an
annotation exchange, and the decision maker concedes the revised version.
Seeding is intentionally not idempotent; each run creates a fresh problem.
"""

from __future__ import annotations

from typing import Any

from .annotations import Anchor, AttributePair, TARGET_DOCUMENT, make_fragment
from .errors import UnknownFixture
from .model import Role
from .service import KnowledgeService

NECO_DEMAND = (
    "The recent 2010/2011 NECO GCE results released by the National Examinations "
    "Council of Nigeria (NECO) show that 98% of candidates failed the examination. "
    "This poses a major challenge to all stakeholders."
)


def seed_fixture(service: KnowledgeService, name: str) -> dict[str, Any]:
    if name != "neco":
        raise UnknownFixture(f"no fixture named {name!r}")
    return _seed_neco(service)


def _seed_neco(service: KnowledgeService) -> dict[str, Any]:
    dm, dm_token = service.register_actor("Amina", Role.DECISION_MAKER)
    watcher, watcher_token = service.register_actor("Bayo", Role.WATCHER)
    coordinator, coord_token = service.register_actor("Chika", Role.COORDINATOR)

    dp = service.create_decision_problem(
        dm.actor_id,
        title="NECO GCE mass failure",
        initial_demand_text=NECO_DEMAND,
        internal_context="Education ministry under pressure to respond before the next session.",
        external_context="Nationwide examination results published by NECO; public stakeholder concern.",
    )

    _, stake_v1 = service.define_stake(
        watcher.actor_id, dp.dp_id,
        observed_object="NECO GCE examination results",
        signal="98% failure rate",
        hypothesis="Candidates were unprepared for the new syllabus",
    )

    # Annotation exchange over the demand: watcher highlights the failure
    # figure, the decision maker objects, the watcher answers and revises.
    demand_doc = service.repo.require_document(dp.initial_demand)
    quote = "98% of candidates failed the examination"
    start = demand_doc.content.index(quote)
    root = service.create_annotation(
        watcher.actor_id, dp.dp_id,
        Anchor(TARGET_DOCUMENT, dp.initial_demand, make_fragment(demand_doc.content, start, start + len(quote))),
        body="Stake proposal: failure rate signals a systemic preparation gap.",
        attributes=[AttributePair("severity", "critical")],
    )
    objection = service.follow_up(
        dm.actor_id, root.annotation_id,
        body="Hypothesis is too narrow; teaching quality must be considered too.",
        attributes=[AttributePair("status", "objection")],
    )
    service.follow_up(
        watcher.actor_id, objection.annotation_id,
        body="Agreed, widening the hypothesis to cover teaching deficiencies.",
        attributes=[AttributePair("status", "revision")],
    )

    _, stake_v2 = service.define_stake(
        watcher.actor_id, dp.dp_id,
        observed_object="NECO GCE examination results",
        signal="98% failure rate",
        hypothesis="Systemic teaching and preparation deficiencies across schools",
    )
    service.validate_resource(dm.actor_id, stake_v2.kr_id, stake_v2.version)

    return {
        "fixture": "neco",
        "actors": {
            "decision_maker": {"actor_id": dm.actor_id, "token": dm_token},
            "watcher": {"actor_id": watcher.actor_id, "token": watcher_token},
            "coordinator": {"actor_id": coordinator.actor_id, "token": coord_token},
        },
        "dp_id": dp.dp_id,
        "initial_demand": dp.initial_demand,
        "stake_lineage": stake_v2.kr_id,
        "stake_version": stake_v2.version,
        "thread_root": root.annotation_id,
    }
