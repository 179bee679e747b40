"""Live sessions and three-level group awareness.

Each decision problem is a workspace.  Events published to a workspace get a
gapless per-workspace event_id, are persisted through the repository log
(so asynchronous members can replay what they missed), and are fanned out to
every live subscription in the same order.  Presence (who is online, how
available), workspace (shared-state changes such as validations), and
activity (what actors are doing right now) are the three event kinds.

Liveness is heartbeat-driven: a session that misses heartbeats for longer
than the timeout expires and silently drops from rosters.  The clock is
injectable so tests can steer expiry deterministically.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from . import records as rec
from .errors import ExpiredSession
from .model import new_id
from .repository import AwarenessEvent, Repository

EVENT_PRESENCE = "presence"
EVENT_WORKSPACE = "workspace"
EVENT_ACTIVITY = "activity"

DEFAULT_HEARTBEAT_INTERVAL_S = 15
DEFAULT_SESSION_TIMEOUT_S = 45


class Availability(str, Enum):
    ONLINE = "online"
    BUSY = "busy"
    AWAY = "away"


# Most-available wins when an actor holds several sessions.
_AVAILABILITY_RANK = {Availability.ONLINE: 2, Availability.BUSY: 1, Availability.AWAY: 0}


class Subscription:
    """FIFO delivery endpoint for one listener."""

    def __init__(self, workspace: str, actor: str | None = None):
        self.workspace = workspace
        self.actor = actor
        self.closed = False
        self._queue: queue.Queue = queue.Queue()

    def deliver(self, event: AwarenessEvent) -> None:
        self._queue.put(event)

    def next(self, timeout: float | None = None) -> AwarenessEvent | None:
        try:
            return self._queue.get(timeout=timeout) if timeout is not None else self._queue.get_nowait()
        except queue.Empty:
            return None

    def drain(self) -> list[AwarenessEvent]:
        events = []
        while True:
            try:
                event = self._queue.get_nowait()
            except queue.Empty:
                return events
            if event is not None:
                events.append(event)

    def close(self) -> None:
        self.closed = True
        self._queue.put(None)


@dataclass
class Session:
    session_id: str
    actor: str
    workspace: str
    availability: Availability
    last_heartbeat: float  # hub-clock seconds
    subscription: Subscription = field(repr=False)


@dataclass(frozen=True)
class JoinSummary:
    session: Session
    backlog_count: int
    last_event_id: int


@dataclass(frozen=True)
class RosterEntry:
    actor: str
    availability: Availability
    session_count: int


class AwarenessHub:
    """Session bookkeeping plus ordered event fan-out per workspace."""

    def __init__(
        self,
        repository: Repository,
        heartbeat_interval_s: float = DEFAULT_HEARTBEAT_INTERVAL_S,
        session_timeout_s: float = DEFAULT_SESSION_TIMEOUT_S,
        clock: Callable[[], float] = time.monotonic,
    ):
        self._repo = repository
        self.heartbeat_interval_s = heartbeat_interval_s
        self.session_timeout_s = session_timeout_s
        self._clock = clock
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._taps: dict[str, list[Subscription]] = {}  # workspace -> raw listeners
        # highest event_id delivered to a live session of (workspace, actor)
        self._last_seen: dict[tuple[str, str], int] = {}

    # ------------------------------------------------------------------
    # Event publication
    # ------------------------------------------------------------------

    def publish_event(
        self, kind: str, actor: str, dp_id: str, payload: str,
        ref: tuple[str, int] | None = None,
    ) -> AwarenessEvent:
        """Persist and deliver one event, in a single workspace-ordered step."""
        with self._lock:
            self._repo.require_problem(dp_id)
            existing = self._repo.state.workspace_events.get(dp_id, ())
            event_id = existing[-1].event_id + 1 if existing else 1
            self._repo.append({
                "rec": rec.REC_AWARENESS,
                "workspace": dp_id,
                "event_id": event_id,
                "kind": kind,
                "actor": actor,
                "payload": payload,
                "ref": list(ref) if ref else None,
            })
            event = self._repo.state.workspace_events[dp_id][-1]
            self._deliver(event)
            return event

    def _deliver(self, event: AwarenessEvent) -> None:
        for session in self._sessions.values():
            if session.workspace == event.workspace:
                session.subscription.deliver(event)
                key = (event.workspace, session.actor)
                if event.event_id > self._last_seen.get(key, 0):
                    self._last_seen[key] = event.event_id
        for sub in self._taps.get(event.workspace, ()):
            sub.deliver(event)

    # ------------------------------------------------------------------
    # Session lifecycle
    # ------------------------------------------------------------------

    def join(self, actor: str, dp_id: str) -> JoinSummary:
        with self._lock:
            self._repo.require_actor(actor)
            self._repo.require_problem(dp_id)
            events = self._repo.state.workspace_events.get(dp_id, ())
            latest = events[-1].event_id if events else 0
            # Pending-message count, measured before the join itself lands.
            backlog = max(0, latest - self._last_seen.get((dp_id, actor), 0))
            session = Session(
                session_id=new_id("s"),
                actor=actor,
                workspace=dp_id,
                availability=Availability.ONLINE,
                last_heartbeat=self._clock(),
                subscription=Subscription(dp_id, actor),
            )
            self._sessions[session.session_id] = session
            self.publish_event(EVENT_PRESENCE, actor, dp_id, "joined")
            return JoinSummary(session=session, backlog_count=backlog, last_event_id=latest)

    def heartbeat(self, session_id: str, availability: Availability) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise ExpiredSession(f"session {session_id} is not live")
            if self._expired(session):
                self._drop(session)
                raise ExpiredSession(f"session {session_id} timed out")
            session.last_heartbeat = self._clock()
            if availability != session.availability:
                session.availability = availability
                self.publish_event(
                    EVENT_PRESENCE, session.actor, session.workspace,
                    f"availability_changed:{availability.value}",
                )
            return session

    def leave(self, session_id: str) -> None:
        """Idempotent: leaving an unknown or expired session succeeds."""
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return
            if self._expired(session):
                self._drop(session)
                return
            # Published before detaching so the leaver's own transcript (and
            # last-seen mark) includes the departure notice.
            self.publish_event(EVENT_PRESENCE, session.actor, session.workspace, "left")
            self._drop(session)

    def _expired(self, session: Session) -> bool:
        return self._clock() - session.last_heartbeat > self.session_timeout_s

    def _drop(self, session: Session) -> None:
        session.subscription.close()
        self._sessions.pop(session.session_id, None)

    def purge_expired(self) -> int:
        """Silently remove timed-out sessions; returns how many were dropped."""
        with self._lock:
            expired = [s for s in self._sessions.values() if self._expired(s)]
            for session in expired:
                self._drop(session)
            return len(expired)

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    def presence_roster(self, dp_id: str) -> list[RosterEntry]:
        with self._lock:
            self._repo.require_problem(dp_id)
            self.purge_expired()
            by_actor: dict[str, list[Session]] = {}
            for session in self._sessions.values():
                if session.workspace == dp_id:
                    by_actor.setdefault(session.actor, []).append(session)
            roster = [
                RosterEntry(
                    actor=actor,
                    availability=max((s.availability for s in sessions), key=_AVAILABILITY_RANK.get),
                    session_count=len(sessions),
                )
                for actor, sessions in by_actor.items()
            ]
            return sorted(roster, key=lambda entry: entry.actor)

    def replay_since(self, dp_id: str, after_event_id: int) -> list[AwarenessEvent]:
        with self._lock:
            self._repo.require_problem(dp_id)
            return [e for e in self._repo.state.events_for(dp_id) if e.event_id > after_event_id]

    def tap(self, dp_id: str) -> Subscription:
        """Raw delivery endpoint with no session or presence side effects.

        This is what the streaming endpoint attaches after a join: replay
        the gap, then consume the tap.
        """
        with self._lock:
            self._repo.require_problem(dp_id)
            sub = Subscription(dp_id)
            self._taps.setdefault(dp_id, []).append(sub)
            return sub

    def detach(self, subscription: Subscription) -> None:
        with self._lock:
            taps = self._taps.get(subscription.workspace)
            if taps and subscription in taps:
                taps.remove(subscription)
            subscription.close()

    def live_sessions(self, dp_id: str | None = None) -> list[Session]:
        with self._lock:
            sessions = [s for s in self._sessions.values() if not self._expired(s)]
            if dp_id is not None:
                sessions = [s for s in sessions if s.workspace == dp_id]
            return sessions

    def get_session(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)
