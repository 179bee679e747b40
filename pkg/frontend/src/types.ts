// Wire shapes, mirroring the service's JSON bodies one to one.

export type RoleName = "decision_maker" | "watcher" | "coordinator";
export type PhaseName = "translation" | "search_retrieval" | "analysis" | "decision";
export type StatusName = "evolving" | "validated" | "superseded";
export type AvailabilityName = "online" | "busy" | "away";
export type EventKind = "presence" | "workspace" | "activity";

export interface Actor {
  actor_id: string;
  display_name: string;
  role: RoleName;
}

export interface Problem {
  dp_id: string;
  title: string;
  initial_demand: string;
  internal_context: string;
  external_context: string;
  current_phase: PhaseName;
  created_by: string;
  stake_lineage: string | null;
  declaration_lineage: string | null;
}

export interface DocumentBody {
  doc_uri: string;
  content: string;
  content_hash: string;
}

export interface Stamp {
  seq: number;
  wall_clock: string;
  tag: string;
}

export interface FragmentPayload {
  start_offset: number;
  end_offset: number;
  segment_path: number[];
  prefix: string;
  exact: string;
  suffix: string;
}

export interface AnchorPayload {
  target_kind: "document" | "annotation";
  target: string;
  fragment: FragmentPayload | null;
}

export interface AnnotationWire {
  annotation_id: string;
  author: string;
  t_a: Stamp;
  anchor: AnchorPayload;
  body: string;
  attributes: [string, string][];
  parent: string | null;
  derived_from: string | null;
  dp_id: string;
}

export interface ThreadNodeWire {
  annotation: AnnotationWire;
  children: ThreadNodeWire[];
}

export interface ResourceRow {
  kr_id: string;
  version: number;
  kind: string;
  payload: Record<string, unknown>;
  author: string;
  author_role: RoleName;
  stamp: Stamp;
  status: StatusName;
  dp_id: string | null;
  phase_at_write: PhaseName | null;
  supersedes: [string, number] | null;
  status_timeline: [StatusName, number, string][];
}

// One frame of the event stream / one line of the awareness log.
export interface AwarenessEventRecord {
  rec: "awareness";
  seq: number;
  wall: string;
  workspace: string;
  event_id: number;
  kind: EventKind;
  actor: string;
  payload: string;
  ref: [string, number] | null;
}

export interface RosterEntry {
  actor: string;
  availability: AvailabilityName;
  session_count: number;
}

export interface JoinResult {
  session: { session_id: string; actor: string; workspace: string; availability: AvailabilityName };
  backlog_count: number;
  last_event_id: number;
}

export interface MatchBreakdown {
  role_component: number;
  phase_component: number;
  term_component: number;
}

export interface CaseMatchWire {
  kr: [string, number];
  score: number;
  matched_on: MatchBreakdown;
  stamp: Stamp;
  status: StatusName;
  kind: string;
}

export interface RecommendationWire {
  kr: [string, number];
  predicted_rating: number | null;
}

export interface VocabularyReport {
  attribute_keys: Record<string, number>;
  kinds: Record<string, number>;
  actors: Record<string, number>;
  phases: Record<string, number>;
}

export interface IndicatorReport {
  by_kind: Record<string, number>;
  by_status: Record<string, number>;
  by_actor: Record<string, number>;
  by_phase: Record<string, number>;
  versions_per_lineage: Record<string, number>;
  evolution: [number, number][];
}
