// Application shell: login, problem list, workspace (document + annotations +
// stake validation + awareness panes), and the exploitation screen.
// Hash-routed; every rendered datum comes from the service.

import { ApiClient, ApiError } from "./api.js";
import { currentSelectionOffsets } from "./domselect.js";
import { computeSegments, type HighlightSpan } from "./highlights.js";
import { relocateSpan } from "./selection.js";
import {
  applyEvent,
  feedIsOrdered,
  initialState,
  onJoined,
  setRoster,
  setStreamStatus,
  type WorkspaceState,
} from "./state.js";
import { EventStream } from "./stream.js";
import type {
  Actor,
  AnnotationWire,
  AwarenessEventRecord,
  DocumentBody,
  Problem,
  ResourceRow,
  ThreadNodeWire,
} from "./types.js";
import { annotationAnchor, cleanAttributes, selectionAnchor, submitEnabled, documentAnchor, type AttributeRow } from "./views/annotate.js";
import { buildQueryBody, evolutionPolyline, filterByStatus, ratingStars, type StatusFilter } from "./views/exploit.js";
import { canFormulate, formErrors, roleExplanation } from "./views/problems.js";
import { conceded, errorHint, objectionReply, validateButtonVisible } from "./views/validation.js";

const app = document.getElementById("app")!;
const api = new ApiClient(window.location.origin, localStorage.getItem("knowcap_token"));

let me: Actor | null = null;
let actorNames = new Map<string, string>();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function nameOf(actorId: string): string {
  return actorNames.get(actorId) ?? actorId;
}

async function refreshActors(): Promise<void> {
  const actors = await api.listActors();
  actorNames = new Map(actors.map((a) => [a.actor_id, `${a.display_name} (${a.role.replace("_", " ")})`]));
}

function toast(message: string): void {
  const box = el("div", { class: "toast" }, message);
  document.body.append(box);
  setTimeout(() => box.remove(), 4000);
}

function reportError(error: unknown): void {
  if (error instanceof ApiError) toast(errorHint(error.code));
  else toast(String(error));
}

// ----------------------------------------------------------------------
// Login
// ----------------------------------------------------------------------

function renderLogin(): void {
  const name = el("input", { placeholder: "display name" });
  const role = el("select", {},
    el("option", { value: "decision_maker" }, "decision maker"),
    el("option", { value: "watcher" }, "watcher"),
    el("option", { value: "coordinator" }, "coordinator"));
  const registerBtn = el("button", {}, "Register");
  registerBtn.onclick = async () => {
    try {
      const result = await api.register(name.value, role.value);
      api.token = result.token;
      localStorage.setItem("knowcap_token", result.token);
      await boot();
    } catch (error) {
      reportError(error);
    }
  };
  const token = el("input", { placeholder: "existing bearer token" });
  const tokenBtn = el("button", {}, "Use token");
  tokenBtn.onclick = async () => {
    api.token = token.value.trim();
    localStorage.setItem("knowcap_token", api.token);
    await boot();
  };
  app.replaceChildren(
    el("div", { class: "login card" },
      el("h1", {}, "knowcap"),
      el("p", {}, "Collaborative knowledge capitalization workspace."),
      el("div", { class: "row" }, name, role, registerBtn),
      el("div", { class: "row" }, token, tokenBtn)));
}

// ----------------------------------------------------------------------
// Problems screen
// ----------------------------------------------------------------------

let problemsPoll: number | null = null;

async function renderProblems(): Promise<void> {
  stopWorkspace();
  if (problemsPoll !== null) clearInterval(problemsPoll);
  const list = el("div", { class: "problem-list" });

  const refresh = async () => {
    const problems = await api.listProblems();
    list.replaceChildren(...problems.map((problem) =>
      el("div", { class: "card problem" },
        el("a", { href: `#/dp/${problem.dp_id}` }, problem.title),
        el("span", { class: `chip phase-${problem.current_phase}` }, problem.current_phase.replace("_", " ")),
        el("span", { class: "muted" }, `by ${nameOf(problem.created_by)}`))));
    if (problems.length === 0) list.replaceChildren(el("p", { class: "muted" }, "No decision problems yet."));
  };

  const form = el("div", { class: "card form" });
  if (canFormulate(me)) {
    const title = el("input", { placeholder: "title" });
    const demand = el("textarea", { placeholder: "initial demand — the decision problem as a document", rows: "4" });
    const internal = el("textarea", { placeholder: "internal context", rows: "2" });
    const external = el("textarea", { placeholder: "external context", rows: "2" });
    const errorBox = el("div", { class: "error" });
    const submit = el("button", {}, "Open decision problem");
    submit.onclick = async () => {
      const inputs = {
        title: title.value, initial_demand_text: demand.value,
        internal_context: internal.value, external_context: external.value,
      };
      const errors = formErrors(inputs);
      if (Object.keys(errors).length) {
        errorBox.textContent = Object.values(errors).join(" ");
        return; // no request for an invalid form
      }
      try {
        const problem = await api.createProblem(inputs);
        window.location.hash = `#/dp/${problem.dp_id}`;
      } catch (error) {
        reportError(error);
      }
    };
    form.append(el("h2", {}, "Formulate a decision problem"), title, demand, internal, external, errorBox, submit);
  } else {
    form.append(el("h2", {}, "Formulate a decision problem"),
      el("p", { class: "muted" }, roleExplanation(me) ?? ""));
    for (const input of form.querySelectorAll("input,textarea,button")) {
      (input as HTMLInputElement).disabled = true;
    }
  }

  app.replaceChildren(header("problems"), el("div", { class: "columns" }, list, form));
  await refresh();
  // other actors' new problems appear without a reload
  problemsPoll = window.setInterval(() => { void refresh().catch(() => undefined); }, 2000);
}

// ----------------------------------------------------------------------
// Workspace screen
// ----------------------------------------------------------------------

interface WorkspaceContext {
  state: WorkspaceState;
  problem: Problem;
  document: DocumentBody;
  annotations: AnnotationWire[];
  stakeHistory: ResourceRow[];
  stream: EventStream | null;
  heartbeatTimer: number | null;
  availability: string;
  selection: { start: number; end: number; text: string } | null;
  openThread: string | null;
}

let workspace: WorkspaceContext | null = null;

function stopWorkspace(): void {
  if (!workspace) return;
  workspace.stream?.stop();
  if (workspace.heartbeatTimer !== null) clearInterval(workspace.heartbeatTimer);
  if (workspace.state.sessionId) void api.leave(workspace.state.sessionId).catch(() => undefined);
  workspace = null;
}

async function renderWorkspace(dpId: string): Promise<void> {
  stopWorkspace();
  if (problemsPoll !== null) clearInterval(problemsPoll);
  await refreshActors();

  const problem = await api.getProblem(dpId);
  const documentBody = await api.getDocument(problem.initial_demand);
  const annotations = await api.annotationsForProblem(dpId);
  const stakeHistory = problem.stake_lineage ? await api.getHistory(problem.stake_lineage) : [];
  const join = await api.join(dpId);

  workspace = {
    state: onJoined(initialState(me), problem, join),
    problem,
    document: documentBody,
    annotations,
    stakeHistory,
    stream: null,
    heartbeatTimer: null,
    availability: "online",
    selection: null,
    openThread: null,
  };

  const ctx = workspace;
  ctx.stream = new EventStream({
    url: (after) => api.streamUrl(dpId, after),
    onEvent: (record) => { void handleEvent(ctx, record); },
    onStatus: (status) => {
      ctx.state = setStreamStatus(ctx.state, status);
      paintAwareness(ctx);
    },
    retryDelayMs: 1000,
  });
  ctx.stream.start();
  ctx.heartbeatTimer = window.setInterval(() => {
    if (ctx.state.sessionId) {
      void api.heartbeat(ctx.state.sessionId, ctx.availability).catch(() => undefined);
    }
  }, 10_000);

  ctx.state = setRoster(ctx.state, await api.roster(dpId));
  paintWorkspace(ctx);
}

async function handleEvent(ctx: WorkspaceContext, record: AwarenessEventRecord): Promise<void> {
  ctx.state = applyEvent(ctx.state, record);
  console.assert(feedIsOrdered(ctx.state), "feed must stay in event-id order");
  try {
    if (record.kind === "presence") {
      ctx.state = setRoster(ctx.state, await api.roster(ctx.problem.dp_id));
    } else if (record.payload.startsWith("annotation_created")) {
      ctx.annotations = await api.annotationsForProblem(ctx.problem.dp_id);
      paintDocument(ctx);
      paintMargin(ctx);
    } else if (record.payload.startsWith("stake_") || record.payload.startsWith("kr_validated")) {
      ctx.problem = await api.getProblem(ctx.problem.dp_id);
      ctx.stakeHistory = ctx.problem.stake_lineage ? await api.getHistory(ctx.problem.stake_lineage) : [];
      paintStake(ctx);
    } else if (record.payload.startsWith("phase_advanced") || record.payload.startsWith("dp_declared")) {
      ctx.problem = await api.getProblem(ctx.problem.dp_id);
      paintStake(ctx);
    }
  } catch {
    // transient refetch failures surface on the next event
  }
  paintAwareness(ctx);
}

function paintWorkspace(ctx: WorkspaceContext): void {
  app.replaceChildren(
    header("workspace"),
    el("div", { class: "workspace" },
      el("div", { class: "doc-column" },
        el("div", { class: "card", id: "problem-head" }),
        el("div", { class: "card" },
          el("h3", {}, "Initial demand"),
          el("div", { class: "document", id: "document-pane" }),
          el("div", { id: "composer" })),
        el("div", { class: "card" },
          el("h3", {}, "Annotations"),
          el("div", { id: "margin" }))),
      el("div", { class: "side-column" },
        el("div", { class: "card", id: "stake-panel" }),
        el("div", { class: "card", id: "awareness-panel" }))));
  paintProblemHead(ctx);
  paintDocument(ctx);
  paintComposer(ctx);
  paintMargin(ctx);
  paintStake(ctx);
  paintAwareness(ctx);
}

function paintProblemHead(ctx: WorkspaceContext): void {
  const head = document.getElementById("problem-head")!;
  const advance = el("button", {}, "Advance phase");
  advance.onclick = async () => {
    try {
      await api.advancePhase(ctx.problem.dp_id);
      ctx.problem = await api.getProblem(ctx.problem.dp_id);
      paintProblemHead(ctx);
      paintStake(ctx);
    } catch (error) {
      reportError(error);
    }
  };
  const mayAdvance = me !== null && (me.actor_id === ctx.problem.created_by || me.role === "coordinator");
  head.replaceChildren(
    el("h2", {}, ctx.problem.title),
    el("span", { class: `chip phase-${ctx.problem.current_phase}` }, ctx.problem.current_phase.replace("_", " ")),
    el("p", { class: "muted" },
      `internal: ${ctx.problem.internal_context || "—"} · external: ${ctx.problem.external_context || "—"}`),
    ...(mayAdvance ? [advance] : []));
}

function documentSpans(ctx: WorkspaceContext): HighlightSpan[] {
  const spans: HighlightSpan[] = [];
  for (const annotation of ctx.annotations) {
    const anchor = annotation.anchor;
    if (anchor.target_kind !== "document" || anchor.target !== ctx.document.doc_uri || !anchor.fragment) continue;
    const span = relocateSpan(ctx.document.content, anchor.fragment);
    if (span) spans.push({ id: annotation.annotation_id, start: span.start, end: span.end });
  }
  return spans;
}

function paintDocument(ctx: WorkspaceContext): void {
  const pane = document.getElementById("document-pane");
  if (!pane) return;
  const content = ctx.document.content;
  const segments = computeSegments(content.length, documentSpans(ctx));
  pane.replaceChildren(...segments.map((segment) => {
    const text = content.slice(segment.start, segment.end);
    if (segment.ids.length === 0) return document.createTextNode(text);
    const layer = Math.min(segment.ids.length, 3);
    const node = el("mark", { class: `hl hl-${layer}`, title: `${segment.ids.length} annotation(s)` }, text);
    if (segment.ids.length > 1) node.append(el("sup", { class: "badge" }, String(segment.ids.length)));
    node.onclick = () => {
      ctx.openThread = segment.ids[0];
      paintMargin(ctx);
    };
    return node;
  }));
  pane.onmouseup = () => {
    const offsets = currentSelectionOffsets(pane as HTMLElement);
    ctx.selection = offsets;
    paintComposer(ctx);
  };
}

function paintComposer(ctx: WorkspaceContext): void {
  const composer = document.getElementById("composer");
  if (!composer) return;
  const rows: AttributeRow[] = [{ key: "", value: "" }];
  const body = el("textarea", { placeholder: "annotation body", rows: "2" });
  const attrBox = el("div", {});
  const target = ctx.selection
    ? el("p", { class: "muted" }, `on selection: “${ctx.selection.text.slice(0, 60)}”`)
    : el("p", { class: "muted" }, "whole document (select text for a fine-grain anchor)");
  const submit = el("button", { disabled: "true" }, "Annotate");

  const renderRows = () => {
    attrBox.replaceChildren(...rows.map((row, index) => {
      const key = el("input", { placeholder: "attribute", value: row.key });
      const value = el("input", { placeholder: "value", value: row.value });
      key.oninput = () => { row.key = key.value; refresh(); };
      value.oninput = () => { row.value = value.value; refresh(); };
      const add = el("button", { class: "mini" }, "+");
      add.onclick = () => { rows.splice(index + 1, 0, { key: "", value: "" }); renderRows(); };
      return el("div", { class: "row" }, key, value, add);
    }));
  };
  const refresh = () => {
    submit.toggleAttribute("disabled", !submitEnabled(body.value, rows));
  };
  body.oninput = refresh;
  renderRows();

  submit.onclick = async () => {
    try {
      const anchor = ctx.selection
        ? selectionAnchor(ctx.document.doc_uri, ctx.document.content, ctx.selection.start, ctx.selection.end)
        : documentAnchor(ctx.document.doc_uri);
      await api.createAnnotation({
        dp_id: ctx.problem.dp_id,
        anchor,
        body: body.value,
        attributes: cleanAttributes(rows),
      });
      ctx.selection = null;
      paintComposer(ctx); // annotations repaint on the echoed activity event
    } catch (error) {
      reportError(error);
    }
  };
  composer.replaceChildren(el("h4", {}, "New annotation"), target, body, attrBox, submit);
}

function annotationCard(ctx: WorkspaceContext, annotation: AnnotationWire, nested: boolean): HTMLElement {
  const chips = annotation.attributes.map(([key, value]) =>
    el("span", { class: "chip attr" }, `${key}=${value}`));
  const reply = el("button", { class: "mini" }, "Reply");
  const objection = el("button", { class: "mini" }, "Object");
  const replyBox = el("div", {});
  const startReply = (asObjection: boolean) => {
    const text = el("textarea", { rows: "2", placeholder: asObjection ? "state the objection" : "reply" });
    const send = el("button", { class: "mini" }, "Send");
    send.onclick = async () => {
      try {
        const request = asObjection ? objectionReply(text.value) : { body: text.value, attributes: [] as [string, string][] };
        await api.followUp(annotation.annotation_id, request.body, request.attributes);
        replyBox.replaceChildren();
      } catch (error) {
        reportError(error);
      }
    };
    replyBox.replaceChildren(text, send);
  };
  reply.onclick = () => startReply(false);
  objection.onclick = () => startReply(true);
  return el("div", { class: nested ? "annotation nested" : "annotation" },
    el("div", { class: "meta" }, `${nameOf(annotation.author)} · ${annotation.t_a.wall_clock}`),
    el("div", {}, annotation.body),
    el("div", { class: "chips" }, ...chips),
    el("div", { class: "row" }, reply, objection),
    replyBox);
}

function renderThread(ctx: WorkspaceContext, node: ThreadNodeWire, nested = false): HTMLElement {
  const box = annotationCard(ctx, node.annotation, nested);
  for (const child of node.children) box.append(renderThread(ctx, child, true));
  return box;
}

function paintMargin(ctx: WorkspaceContext): void {
  const margin = document.getElementById("margin");
  if (!margin) return;
  const roots = ctx.annotations.filter((a) => a.parent === null);
  if (roots.length === 0) {
    margin.replaceChildren(el("p", { class: "muted" }, "Nothing here yet — select text to annotate."));
    return;
  }
  margin.replaceChildren();
  for (const root of roots) {
    if (ctx.openThread === root.annotation_id) {
      void api.getThread(root.annotation_id).then((thread) => {
        margin.append(renderThread(ctx, thread));
      });
    } else {
      const card = annotationCard(ctx, root, false);
      const open = el("button", { class: "mini" }, "Thread");
      open.onclick = () => { ctx.openThread = root.annotation_id; paintMargin(ctx); };
      card.append(open);
      margin.append(card);
    }
  }
}

function paintStake(ctx: WorkspaceContext): void {
  const panel = document.getElementById("stake-panel");
  if (!panel) return;
  const history = ctx.stakeHistory;
  const versionRows = history.map((row) => {
    const box = el("div", { class: "version" },
      el("span", { class: `chip status-${row.status}` }, `v${row.version} ${row.status}`),
      el("span", { class: "muted" }, ` ${row.stamp.wall_clock} by ${nameOf(row.author)}`),
      el("div", {},
        `object: ${row.payload["observed_object"] ?? ""} · signal: ${row.payload["signal"] ?? ""}`,
        el("div", {}, `hypothesis: ${row.payload["hypothesis"] ?? ""}`)));
    if (validateButtonVisible(me, history, row.version)) {
      const validate = el("button", {}, "Validate");
      validate.onclick = async () => {
        try {
          await api.validate(row.kr_id, row.version);
        } catch (error) {
          reportError(error);
        }
      };
      box.append(validate);
    }
    return box;
  });

  const formBits: HTMLElement[] = [];
  if (me && me.role !== "coordinator") {
    const observed = el("input", { placeholder: "observed object" });
    const signal = el("input", { placeholder: "signal" });
    const hypothesis = el("input", { placeholder: "hypothesis" });
    const submit = el("button", {}, history.length ? "Revise stake" : "Define stake");
    submit.onclick = async () => {
      try {
        await api.defineStake(ctx.problem.dp_id, observed.value, signal.value, hypothesis.value);
      } catch (error) {
        reportError(error);
      }
    };
    formBits.push(el("div", { class: "form" }, observed, signal, hypothesis, submit));
  }

  panel.replaceChildren(
    el("h3", {}, "Stake"),
    conceded(history)
      ? el("p", { class: "ok" }, "Conceded — the newest version is validated.")
      : el("p", { class: "muted" }, history.length ? "Revision loop open." : "No stake defined yet."),
    ...versionRows,
    ...formBits);
}

function paintAwareness(ctx: WorkspaceContext): void {
  const panel = document.getElementById("awareness-panel");
  if (!panel) return;
  const availability = el("select", {},
    ...["online", "busy", "away"].map((value) =>
      el("option", value === ctx.availability ? { value, selected: "true" } : { value }, value)));
  availability.onchange = () => {
    ctx.availability = availability.value;
    if (ctx.state.sessionId) void api.heartbeat(ctx.state.sessionId, ctx.availability).catch(reportError);
  };
  const roster = el("ul", { class: "roster" },
    ...ctx.state.roster.map((entry) =>
      el("li", {},
        el("span", { class: `dot ${entry.availability}` }),
        `${nameOf(entry.actor)} ×${entry.session_count}`)));
  const feed = el("ol", { class: "feed" },
    ...ctx.state.feed.slice(-40).map((event) =>
      el("li", { class: `kind-${event.kind}` },
        el("span", { class: "muted" }, `#${event.event_id} `),
        `${nameOf(event.actor)}: ${event.payload}`)));
  const badge = ctx.state.backlogBadge > 0
    ? el("span", { class: "chip badge" }, `${ctx.state.backlogBadge} pending`)
    : el("span", {});
  const statusLine = ctx.state.streamStatus === "live"
    ? el("span", { class: "ok" }, "live")
    : el("span", { class: "warn" }, ctx.state.streamStatus);
  panel.replaceChildren(
    el("h3", {}, "Awareness ", badge),
    el("div", { class: "row" }, el("span", {}, "stream: "), statusLine, availability),
    el("h4", {}, "Online now"),
    roster.children.length ? roster : el("p", { class: "muted" }, "nobody live"),
    el("h4", {}, "Activity"),
    feed);
}

// ----------------------------------------------------------------------
// Exploitation screen
// ----------------------------------------------------------------------

async function renderExploit(): Promise<void> {
  stopWorkspace();
  if (problemsPoll !== null) clearInterval(problemsPoll);
  await refreshActors();
  const tabs = el("div", { class: "tabs" });
  const body = el("div", { class: "card" });
  const make = (label: string, render: () => Promise<void>) => {
    const tab = el("button", {}, label);
    tab.onclick = () => { void render().catch(reportError); };
    return tab;
  };

  const renderExplore = async () => {
    const report = await api.explore();
    const table = (title: string, data: Record<string, number>) =>
      el("div", {}, el("h4", {}, title),
        Object.keys(data).length
          ? el("ul", {}, ...Object.entries(data).map(([key, count]) => el("li", {}, `${key}: ${count}`)))
          : el("p", { class: "muted" }, "nothing captured yet"));
    body.replaceChildren(
      table("Attribute vocabulary", report.attribute_keys),
      table("Resource kinds", report.kinds),
      table("Authors", Object.fromEntries(Object.entries(report.actors).map(([id, n]) => [nameOf(id), n]))),
      table("Phases at write", report.phases));
  };

  const renderQuery = async () => {
    const role = el("select", {}, el("option", { value: "" }, "any role"),
      ...["decision_maker", "watcher", "coordinator"].map((r) => el("option", { value: r }, r)));
    const phase = el("select", {}, el("option", { value: "" }, "any phase"),
      ...["translation", "search_retrieval", "analysis", "decision"].map((p) => el("option", { value: p }, p)));
    const terms = el("input", { placeholder: "terms (space-separated)" });
    const status = el("select", {},
      el("option", { value: "both" }, "validated + evolving"),
      el("option", { value: "validated" }, "validated only"),
      el("option", { value: "evolving" }, "evolving only"));
    const results = el("div", {});
    const run = el("button", {}, "Query");
    run.onclick = async () => {
      const queryBody = buildQueryBody({ role: role.value, phase: phase.value, terms: terms.value, dp_scope: "" });
      if (!queryBody) {
        results.replaceChildren(el("p", { class: "error" }, "Give at least one criterion."));
        return;
      }
      const matches = filterByStatus(await api.query(queryBody), status.value as StatusFilter);
      results.replaceChildren(...matches.map((match) =>
        el("div", { class: "match" },
          el("b", {}, `${match.kr[0]} v${match.kr[1]}`),
          el("span", { class: `chip status-${match.status}` }, match.status),
          el("span", { class: "chip" }, match.kind),
          el("div", { class: "muted" },
            `score ${match.score.toFixed(4)} = role ${match.matched_on.role_component.toFixed(2)}`
            + ` · phase ${match.matched_on.phase_component.toFixed(2)}`
            + ` · terms ${match.matched_on.term_component.toFixed(3)}`))));
      if (matches.length === 0) results.replaceChildren(el("p", { class: "muted" }, "No matches."));
    };
    body.replaceChildren(el("div", { class: "row" }, role, phase, terms, status, run), results);
  };

  const renderRecommend = async () => {
    const list = el("div", {});
    const refresh = async () => {
      const recommendations = await api.recommend(10);
      list.replaceChildren(...recommendations.map((rec) => {
        const stars = el("span", {}, ` predicted: ${rec.predicted_rating === null ? "recency" : rec.predicted_rating.toFixed(2)} ${ratingStars(rec.predicted_rating)}`);
        const buttons = el("span", { class: "rate" }, ...[1, 2, 3, 4, 5].map((rating) => {
          const button = el("button", { class: "mini" }, String(rating));
          button.onclick = async () => {
            await api.recordFeedback(rec.kr, rating);
            await refresh(); // rated items drop out of future recommendations
          };
          return button;
        }));
        return el("div", { class: "match" }, el("b", {}, `${rec.kr[0]} v${rec.kr[1]}`), stars, buttons);
      }));
      if (recommendations.length === 0) list.replaceChildren(el("p", { class: "muted" }, "Nothing to recommend."));
    };
    await refresh();
    body.replaceChildren(el("p", { class: "muted" }, "Rate what you exploit; ratings feed future recommendations."), list);
  };

  const renderAnalyze = async () => {
    const report = await api.analyze();
    const svgNs = "http://www.w3.org/2000/svg";
    const svg = document.createElementNS(svgNs, "svg");
    svg.setAttribute("viewBox", "0 0 320 120");
    svg.setAttribute("class", "evolution");
    const line = document.createElementNS(svgNs, "polyline");
    line.setAttribute("points", evolutionPolyline(report.evolution, 320, 120));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.append(line);
    const table = (title: string, data: Record<string, number>) =>
      el("div", {}, el("h4", {}, title),
        el("ul", {}, ...Object.entries(data).map(([key, count]) => el("li", {}, `${key}: ${count}`))));
    body.replaceChildren(
      el("h4", {}, `Evolution (${report.evolution.length} resources)`), svg,
      table("By kind", report.by_kind),
      table("By status", report.by_status),
      table("Versions per lineage", report.versions_per_lineage));
  };

  tabs.append(
    make("Explore", renderExplore),
    make("Query", renderQuery),
    make("Recommend", renderRecommend),
    make("Analyze", renderAnalyze));
  app.replaceChildren(header("exploit"), tabs, body);
  await renderExplore();
}

// ----------------------------------------------------------------------
// Shell
// ----------------------------------------------------------------------

function header(active: string): HTMLElement {
  const logout = el("button", { class: "mini" }, "log out");
  logout.onclick = () => {
    localStorage.removeItem("knowcap_token");
    api.token = null;
    me = null;
    stopWorkspace();
    renderLogin();
  };
  return el("header", {},
    el("b", {}, "knowcap"),
    el("a", { href: "#/problems", class: active === "problems" ? "active" : "" }, "Problems"),
    el("a", { href: "#/exploit", class: active === "exploit" ? "active" : "" }, "Exploit"),
    el("span", { class: "spacer" }),
    el("span", { class: "muted" }, me ? nameOf(me.actor_id) : ""),
    logout);
}

async function route(): Promise<void> {
  const hash = window.location.hash || "#/problems";
  const dpMatch = hash.match(/^#\/dp\/(.+)$/);
  try {
    if (dpMatch) await renderWorkspace(dpMatch[1]);
    else if (hash.startsWith("#/exploit")) await renderExploit();
    else await renderProblems();
  } catch (error) {
    reportError(error);
  }
}

async function boot(): Promise<void> {
  if (!api.token) {
    renderLogin();
    return;
  }
  try {
    me = await api.whoami();
    await refreshActors();
  } catch {
    renderLogin();
    return;
  }
  await route();
}

window.addEventListener("hashchange", () => { void route(); });
window.addEventListener("beforeunload", () => stopWorkspace());
void boot();
