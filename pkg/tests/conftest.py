from __future__ import annotations

import pytest

from knowcap.model import Role
from knowcap.service import KnowledgeService


class FakeClock:
    """Manually advanced monotonic clock for liveness tests."""

    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


@pytest.fixture
def service(clock) -> KnowledgeService:
    svc = KnowledgeService(clock=clock)
    yield svc
    svc.close()


@pytest.fixture
def team(service):
    """A decision maker, a watcher, and a coordinator."""
    dm, _ = service.register_actor("Dana", Role.DECISION_MAKER)
    watcher, _ = service.register_actor("Wei", Role.WATCHER)
    coordinator, _ = service.register_actor("Cora", Role.COORDINATOR)
    return dm, watcher, coordinator


@pytest.fixture
def problem(service, team):
    dm, _, _ = team
    return service.create_decision_problem(
        dm.actor_id,
        "Examination failure crisis",
        "Results released this week show that 98% of candidates failed the examination.",
        internal_context="internal context",
        external_context="external context",
    )
