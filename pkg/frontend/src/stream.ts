// Server-sent-events consumer built on fetch streaming, so the same code
// runs in the browser and under node tests.  Reconnects resume from the last
// event id (the server replays the gap first), and a duplicate guard keeps
// the emitted sequence strictly increasing across reconnects.

import type { AwarenessEventRecord } from "./types.js";

export type StreamStatus = "connecting" | "live" | "reconnecting" | "closed";

export interface SseFrame {
  id?: string;
  event?: string;
  data?: string;
}

// Incremental SSE parser: feed text chunks, collect completed frames.
export class SseParser {
  private buffer = "";

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    let boundary: number;
    while ((boundary = this.buffer.indexOf("\n\n")) !== -1) {
      const raw = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const frame: SseFrame = {};
      for (const line of raw.split("\n")) {
        if (!line || line.startsWith(":")) continue; // comment/keepalive
        const sep = line.indexOf(":");
        const field = sep === -1 ? line : line.slice(0, sep);
        const value = sep === -1 ? "" : line.slice(sep + 1).replace(/^ /, "");
        if (field === "data") frame.data = frame.data === undefined ? value : frame.data + "\n" + value;
        else if (field === "id") frame.id = value;
        else if (field === "event") frame.event = value;
      }
      if (frame.data !== undefined || frame.id !== undefined || frame.event !== undefined) {
        frames.push(frame);
      }
    }
    return frames;
  }
}

export interface EventStreamOptions {
  url: (after: number) => string;
  onEvent: (record: AwarenessEventRecord) => void;
  onStatus?: (status: StreamStatus) => void;
  after?: number;
  retryDelayMs?: number;
  fetchImpl?: typeof fetch;
}

export class EventStream {
  lastEventId: number;
  private stopped = false;
  private readonly retryDelayMs: number;
  private readonly fetchImpl: typeof fetch;
  private abort: AbortController | null = null;

  constructor(private readonly options: EventStreamOptions) {
    this.lastEventId = options.after ?? 0;
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.abort?.abort();
    this.setStatus("closed");
  }

  private setStatus(status: StreamStatus): void {
    this.options.onStatus?.(status);
  }

  private async loop(): Promise<void> {
    let first = true;
    while (!this.stopped) {
      this.setStatus(first ? "connecting" : "reconnecting");
      first = false;
      try {
        await this.consumeOnce();
      } catch {
        // fall through to retry
      }
      if (this.stopped) return;
      await delay(this.retryDelayMs);
    }
  }

  private async consumeOnce(): Promise<void> {
    this.abort = new AbortController();
    const response = await this.fetchImpl(this.options.url(this.lastEventId), {
      signal: this.abort.signal,
    });
    if (!response.ok || !response.body) throw new Error(`stream http ${response.status}`);
    this.setStatus("live");
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    while (!this.stopped) {
      const { done, value } = await reader.read();
      if (done) return;
      for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
        if (frame.data === undefined) continue;
        const record = JSON.parse(frame.data) as AwarenessEventRecord;
        if (record.event_id <= this.lastEventId) continue; // replayed duplicate
        this.lastEventId = record.event_id;
        this.options.onEvent(record);
      }
    }
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
