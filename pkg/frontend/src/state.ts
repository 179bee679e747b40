// Workspace view state.  Invariants: the feed is exactly event_id order
// (never reordered client-side), and the backlog badge starts at the
// server-reported pending count and reaches zero once the catch-up events
// have been read.

import type { Actor, AwarenessEventRecord, JoinResult, Problem, RosterEntry } from "./types.js";
import type { StreamStatus } from "./stream.js";

export interface WorkspaceState {
  currentActor: Actor | null;
  openDp: Problem | null;
  sessionId: string | null;
  roster: RosterEntry[];
  feed: AwarenessEventRecord[];
  backlogBadge: number;
  joinWatermark: number; // last event id at join; events at or below were "pending"
  lastEventId: number;
  streamStatus: StreamStatus;
}

export function initialState(actor: Actor | null = null): WorkspaceState {
  return {
    currentActor: actor,
    openDp: null,
    sessionId: null,
    roster: [],
    feed: [],
    backlogBadge: 0,
    joinWatermark: 0,
    lastEventId: 0,
    streamStatus: "connecting",
  };
}

export function onJoined(state: WorkspaceState, problem: Problem, join: JoinResult): WorkspaceState {
  return {
    ...state,
    openDp: problem,
    sessionId: join.session.session_id,
    backlogBadge: join.backlog_count,
    joinWatermark: join.last_event_id,
    feed: [],
    lastEventId: 0,
  };
}

// Append one stream record.  Duplicates and regressions are dropped, which
// keeps the rendered feed identical to the workspace log order even across
// reconnect replays.
export function applyEvent(state: WorkspaceState, record: AwarenessEventRecord): WorkspaceState {
  if (record.event_id <= state.lastEventId) return state;
  const catchingUp = record.event_id <= state.joinWatermark;
  return {
    ...state,
    feed: [...state.feed, record],
    lastEventId: record.event_id,
    backlogBadge: catchingUp && state.backlogBadge > 0 ? state.backlogBadge - 1 : state.backlogBadge,
  };
}

export function setRoster(state: WorkspaceState, roster: RosterEntry[]): WorkspaceState {
  return { ...state, roster };
}

export function setStreamStatus(state: WorkspaceState, streamStatus: StreamStatus): WorkspaceState {
  return { ...state, streamStatus };
}

export function feedIsOrdered(state: WorkspaceState): boolean {
  return state.feed.every((e, i) => i === 0 || e.event_id > state.feed[i - 1].event_id);
}
