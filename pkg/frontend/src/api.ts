/**
 * HTTP client for the session service plus the SSE event feed.
 *
 * The feed reads the stream with fetch so the same code runs in the
 * browser and under the test runner. A dropped connection resumes from
 * the last delivered event index; a clean end means the session is
 * terminal and the full trace has been replayed.
 */

import type {
  ApiErrorBody,
  EditRequest,
  EventRow,
  PlanPayload,
  SessionRequest,
  StatePayload,
  TaskInfo,
} from './types.js';

export class RequestFailed extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
    this.name = 'RequestFailed';
  }
}

export class ApiClient {
  constructor(readonly base: string = '') {}

  private async send<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.base + path, init);
    const text = await res.text();
    let data: unknown = {};
    if (text) {
      try {
        data = JSON.parse(text);
      } catch {
        data = { error: { code: 'BAD_RESPONSE', message: text.slice(0, 200) } };
      }
    }
    if (!res.ok) {
      const body = (data as { error?: ApiErrorBody }).error ?? {
        code: 'HTTP_' + res.status,
        message: res.statusText || 'request failed',
      };
      throw new RequestFailed(res.status, body);
    }
    return data as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.send<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; version: string; sessions: number }> {
    return this.send('/v1/health');
  }

  async tasks(): Promise<TaskInfo[]> {
    const data = await this.send<{ tasks: TaskInfo[] }>('/v1/tasks');
    return data.tasks;
  }

  createSession(body: SessionRequest): Promise<StatePayload> {
    return this.post('/v1/sessions', body);
  }

  state(sid: string): Promise<StatePayload> {
    return this.send(`/v1/sessions/${sid}/state`);
  }

  plan(sid: string): Promise<PlanPayload> {
    return this.send(`/v1/sessions/${sid}/plan`);
  }

  control(sid: string, command: 'pause' | 'resume' | 'step'): Promise<StatePayload> {
    return this.post(`/v1/sessions/${sid}/control`, { command });
  }

  editPlan(sid: string, edit: EditRequest): Promise<PlanPayload> {
    return this.post(`/v1/sessions/${sid}/plan/edits`, edit);
  }
}

export interface SseMessage {
  id?: string;
  event?: string;
  data: string;
}

/** Incremental server-sent-events decoder. Push chunks, get messages. */
export class SseDecoder {
  private buffer = '';

  push(chunk: string): SseMessage[] {
    this.buffer += chunk;
    const out: SseMessage[] = [];
    let cut: number;
    while ((cut = this.buffer.indexOf('\n\n')) >= 0) {
      const block = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut + 2);
      const msg = this.parseBlock(block);
      if (msg) out.push(msg);
    }
    return out;
  }

  private parseBlock(block: string): SseMessage | null {
    let id: string | undefined;
    let event: string | undefined;
    const data: string[] = [];
    for (const line of block.split('\n')) {
      if (!line || line.startsWith(':')) continue; // comment / heartbeat
      const sep = line.indexOf(':');
      const field = sep < 0 ? line : line.slice(0, sep);
      let value = sep < 0 ? '' : line.slice(sep + 1);
      if (value.startsWith(' ')) value = value.slice(1);
      if (field === 'id') id = value;
      else if (field === 'event') event = value;
      else if (field === 'data') data.push(value);
    }
    if (id === undefined && event === undefined && data.length === 0) return null;
    return { id, event, data: data.join('\n') };
  }
}

export interface FeedHandlers {
  onEvent: (row: EventRow) => void;
  /** Called once when the server closes the stream (terminal session). */
  onEnd?: () => void;
  /** Called on transport errors before the automatic reconnect. */
  onError?: (err: unknown) => void;
}

const RETRY_MS = 250;

export class EventFeed {
  private stopped = false;
  lastIndex: number;

  constructor(
    private readonly client: ApiClient,
    private readonly sid: string,
    after: number = -1,
  ) {
    this.lastIndex = after;
  }

  close(): void {
    this.stopped = true;
  }

  async run(handlers: FeedHandlers): Promise<void> {
    while (!this.stopped) {
      try {
        const res = await fetch(
          `${this.client.base}/v1/sessions/${this.sid}/events?after=${this.lastIndex}`,
          { headers: { accept: 'text/event-stream' } },
        );
        if (!res.ok || !res.body) {
          throw new Error(`event stream rejected: ${res.status}`);
        }
        const reader = res.body.getReader();
        const bytes = new TextDecoder();
        const decoder = new SseDecoder();
        for (;;) {
          const { done, value } = await reader.read();
          if (this.stopped) {
            await reader.cancel().catch(() => undefined);
            return;
          }
          if (done) break;
          for (const msg of decoder.push(bytes.decode(value, { stream: true }))) {
            if (!msg.data) continue;
            const row = JSON.parse(msg.data) as EventRow;
            if (row.index <= this.lastIndex) continue; // duplicate after resume
            this.lastIndex = row.index;
            handlers.onEvent(row);
          }
        }
        handlers.onEnd?.();
        return;
      } catch (err) {
        if (this.stopped) return;
        handlers.onError?.(err);
        await new Promise((r) => setTimeout(r, RETRY_MS));
      }
    }
  }
}
