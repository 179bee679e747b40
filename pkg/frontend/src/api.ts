// Thin typed client over the service endpoints.  Every datum the app renders
// comes through here; the client never fabricates repository state.

import type {
  Actor,
  AnchorPayload,
  AnnotationWire,
  AwarenessEventRecord,
  CaseMatchWire,
  DocumentBody,
  IndicatorReport,
  JoinResult,
  Problem,
  RecommendationWire,
  ResourceRow,
  RosterEntry,
  ThreadNodeWire,
  VocabularyReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    public token: string | null = null,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["content-type"] = "application/json";
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : {};
    if (!response.ok) {
      const err = parsed?.error ?? { code: "http_error", message: text };
      throw new ApiError(err.code, err.message, response.status);
    }
    return parsed as T;
  }

  // -- actors ---------------------------------------------------------

  async register(displayName: string, role: string): Promise<{ actor: Actor; token: string }> {
    return this.request("POST", "/api/actors", { display_name: displayName, role });
  }

  async whoami(): Promise<Actor> {
    return (await this.request<{ actor: Actor }>("GET", "/api/me")).actor;
  }

  async listActors(): Promise<Actor[]> {
    return (await this.request<{ actors: Actor[] }>("GET", "/api/actors")).actors;
  }

  // -- problems -------------------------------------------------------

  async listProblems(): Promise<Problem[]> {
    return (await this.request<{ problems: Problem[] }>("GET", "/api/problems")).problems;
  }

  async getProblem(dpId: string): Promise<Problem> {
    return (await this.request<{ problem: Problem }>("GET", `/api/problems/${dpId}`)).problem;
  }

  async createProblem(input: {
    title: string;
    initial_demand_text: string;
    internal_context?: string;
    external_context?: string;
  }): Promise<Problem> {
    return (await this.request<{ problem: Problem }>("POST", "/api/problems", input)).problem;
  }

  async defineStake(dpId: string, observed: string, signal: string, hypothesis: string): Promise<ResourceRow> {
    const body = { observed_object: observed, signal, hypothesis };
    return (await this.request<{ resource: ResourceRow }>("POST", `/api/problems/${dpId}/stake`, body)).resource;
  }

  async advancePhase(dpId: string): Promise<string> {
    return (await this.request<{ current_phase: string }>("POST", `/api/problems/${dpId}/advance`)).current_phase;
  }

  async getDocument(docUri: string): Promise<DocumentBody> {
    return (await this.request<{ document: DocumentBody }>("GET", `/api/documents/${docUri}`)).document;
  }

  // -- annotations ----------------------------------------------------

  async createAnnotation(input: {
    dp_id: string;
    anchor: AnchorPayload;
    body?: string;
    attributes?: [string, string][];
  }): Promise<AnnotationWire> {
    return (await this.request<{ annotation: AnnotationWire }>("POST", "/api/annotations", input)).annotation;
  }

  async followUp(parentId: string, body: string, attributes: [string, string][] = []): Promise<AnnotationWire> {
    const payload = { body, attributes };
    return (await this.request<{ annotation: AnnotationWire }>(
      "POST", `/api/annotations/${parentId}/replies`, payload)).annotation;
  }

  async annotationsForProblem(dpId: string): Promise<AnnotationWire[]> {
    return (await this.request<{ annotations: AnnotationWire[] }>(
      "GET", `/api/problems/${dpId}/annotations`)).annotations;
  }

  async getThread(annotationId: string): Promise<ThreadNodeWire> {
    return (await this.request<{ thread: ThreadNodeWire }>(
      "GET", `/api/annotations/${annotationId}/thread`)).thread;
  }

  // -- repository -----------------------------------------------------

  async getHistory(krId: string): Promise<ResourceRow[]> {
    return (await this.request<{ history: ResourceRow[] }>("GET", `/api/resources/${krId}`)).history;
  }

  async validate(krId: string, version: number): Promise<ResourceRow> {
    return (await this.request<{ resource: ResourceRow }>(
      "POST", `/api/resources/${krId}/versions/${version}/validate`)).resource;
  }

  // -- exploitation ---------------------------------------------------

  async explore(): Promise<VocabularyReport> {
    return this.request("GET", "/api/exploit/explore");
  }

  async query(body: {
    role?: string | null;
    phase?: string | null;
    terms?: string[];
    dp_scope?: string | null;
  }): Promise<CaseMatchWire[]> {
    return (await this.request<{ matches: CaseMatchWire[] }>("POST", "/api/exploit/query", body)).matches;
  }

  async analyze(dpScope?: string): Promise<IndicatorReport> {
    const suffix = dpScope ? `?dp=${encodeURIComponent(dpScope)}` : "";
    return this.request("GET", `/api/exploit/analyze${suffix}`);
  }

  async recordFeedback(kr: [string, number], rating: number, comment?: string): Promise<void> {
    await this.request("POST", "/api/feedback", { kr, rating, comment });
  }

  async recommend(limit = 10): Promise<RecommendationWire[]> {
    return (await this.request<{ recommendations: RecommendationWire[] }>(
      "GET", `/api/recommend?limit=${limit}`)).recommendations;
  }

  // -- awareness ------------------------------------------------------

  async join(dpId: string): Promise<JoinResult> {
    return this.request("POST", `/api/workspaces/${dpId}/join`);
  }

  async heartbeat(sessionId: string, availability: string): Promise<void> {
    await this.request("POST", `/api/sessions/${sessionId}/heartbeat`, { availability });
  }

  async leave(sessionId: string): Promise<void> {
    await this.request("POST", `/api/sessions/${sessionId}/leave`);
  }

  async roster(dpId: string): Promise<RosterEntry[]> {
    return (await this.request<{ roster: RosterEntry[] }>("GET", `/api/workspaces/${dpId}/roster`)).roster;
  }

  async replaySince(dpId: string, after: number): Promise<AwarenessEventRecord[]> {
    const events = (await this.request<{ events: { event_id: number }[] }>(
      "GET", `/api/workspaces/${dpId}/events?after=${after}`)).events;
    // the replay endpoint serves the richer wire shape; normalize to records
    return events.map((e) => toRecord(e as never));
  }

  streamUrl(dpId: string, after: number): string {
    return `${this.baseUrl}/api/stream/${dpId}?after=${after}&token=${this.token ?? ""}`;
  }
}

// The replay endpoint returns events with a nested stamp; the stream sends
// flat log records.  Normalize the former into the latter so consumers see
// one shape.
export function toRecord(event: {
  event_id: number;
  kind: string;
  actor: string;
  workspace: string;
  stamp: { seq: number; wall_clock: string };
  payload: string;
  ref: [string, number] | null;
}): AwarenessEventRecord {
  return {
    rec: "awareness",
    seq: event.stamp.seq,
    wall: event.stamp.wall_clock,
    workspace: event.workspace,
    event_id: event.event_id,
    kind: event.kind as AwarenessEventRecord["kind"],
    actor: event.actor,
    payload: event.payload,
    ref: event.ref,
  };
}
