/**
 * Session dashboard: live plan board, predicate grid, tabletop canvas,
 * and the pause/step/resume and plan-edit controls.
 *
 * All mutations go through the server and the view renders only server
 * acknowledgments; there is no optimistic state. Controls are enabled
 * from the client-side status table so no request is sent in a state
 * where the server would refuse it.
 */

import { ApiClient, EventFeed, RequestFailed } from './api.js';
import { PlanBoard } from './planBoard.js';
import { buildGrid } from './predicateGrid.js';
import { legalControls } from './statusMachine.js';
import { drawTabletop } from './tabletop.js';
import type {
  ApiErrorBody,
  EditRequest,
  EventRow,
  ExecStatus,
  PlanPayload,
  StatePayload,
} from './types.js';

const EVENT_LOG_LIMIT = 200;
const RUNNING_POLL_MS = 400;

export class Dashboard {
  board = new PlanBoard();
  status: ExecStatus = 'planning';
  sid: string | null = null;
  vocabulary: string[] = [];

  private state: StatePayload | null = null;
  private feed: EventFeed | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private eventRows: EventRow[] = [];
  private dragFrom: number | null = null;
  private readonly els: Record<string, HTMLElement>;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {
    this.els = this.buildSkeleton();
  }

  // -- lifecycle ----------------------------------------------------------

  async connect(sid: string): Promise<void> {
    this.disconnect();
    this.sid = sid;
    this.board = new PlanBoard();
    this.eventRows = [];
    let state: StatePayload;
    try {
      state = await this.client.state(sid);
    } catch (err) {
      this.showError(err);
      throw err;
    }
    this.applyState(state);
    try {
      const plan = await this.client.plan(sid);
      this.vocabulary = plan.actions;
    } catch {
      this.vocabulary = [];
    }
    this.render();

    const feed = new EventFeed(this.client, sid, this.board.lastEventIndex);
    this.feed = feed;
    void feed.run({
      onEvent: (row) => {
        this.board.applyEvent(row);
        this.recordEvent(row);
        this.render();
      },
      onEnd: () => {
        // server closes the stream only once the session is terminal
        void this.refreshState();
      },
      onError: () => this.setNote('event stream dropped, resuming'),
    });
    this.schedulePoll();
  }

  disconnect(): void {
    this.feed?.close();
    this.feed = null;
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  // -- server state intake --------------------------------------------------

  applyState(s: StatePayload): void {
    this.state = s;
    this.status = s.status;
    this.board.hydrateState(s);
    this.render();
  }

  applyPlan(p: PlanPayload): void {
    this.status = p.status;
    this.vocabulary = p.actions;
    this.board.hydratePlan(p);
    this.render();
  }

  private async refreshState(): Promise<void> {
    if (!this.sid) return;
    try {
      this.applyState(await this.client.state(this.sid));
    } catch (err) {
      this.showError(err);
    }
  }

  private schedulePoll(): void {
    if (this.pollTimer !== null) return;
    // world geometry only travels in state snapshots, so keep the canvas
    // fresh while the runner is advancing on its own
    this.pollTimer = setInterval(() => {
      if (this.status === 'running') void this.refreshState();
    }, RUNNING_POLL_MS);
  }

  private recordEvent(row: EventRow): void {
    this.eventRows.push(row);
    if (this.eventRows.length > EVENT_LOG_LIMIT) {
      this.eventRows.splice(0, this.eventRows.length - EVENT_LOG_LIMIT);
    }
    if (row.kind === 'task_succeeded') this.status = 'succeeded';
    if (row.kind === 'task_failed') this.status = 'failed';
  }

  // -- commands -------------------------------------------------------------

  private async sendControl(command: 'pause' | 'resume' | 'step'): Promise<void> {
    if (!this.sid) return;
    try {
      this.applyState(await this.client.control(this.sid, command));
      this.clearRejection();
    } catch (err) {
      this.showError(err);
    }
  }

  async submitEdit(edit: EditRequest): Promise<boolean> {
    if (!this.sid) return false;
    if (!legalControls(this.status).edit) return false;
    try {
      this.applyPlan(await this.client.editPlan(this.sid, edit));
      this.clearRejection();
      await this.refreshState();
      return true;
    } catch (err) {
      if (err instanceof RequestFailed && err.status === 422) {
        this.renderRejection(err.body);
        return false;
      }
      this.showError(err);
      return false;
    }
  }

  // -- skeleton -------------------------------------------------------------

  private buildSkeleton(): Record<string, HTMLElement> {
    this.root.innerHTML = `
      <div class="dash">
        <div id="banner" hidden></div>
        <div id="note" hidden></div>
        <div class="dash-head">
          <span id="status-chip" class="status-chip"></span>
          <span id="meta"></span>
          <span class="head-buttons">
            <button id="btn-pause" type="button">pause</button>
            <button id="btn-step" type="button">step</button>
            <button id="btn-resume" type="button">resume</button>
          </span>
        </div>
        <div class="dash-body">
          <div class="col">
            <h3>Plan</h3>
            <div id="plan-board"></div>
            <form id="insert-form">
              <select id="insert-action"></select>
              <input id="insert-pos" type="number" min="0" value="0" />
              <button id="insert-submit" type="submit">insert</button>
            </form>
            <div id="rejection" hidden></div>
          </div>
          <div class="col">
            <h3>Tabletop</h3>
            <canvas id="tabletop" width="320" height="320"></canvas>
            <h3>Predicates</h3>
            <div id="predicate-grid"></div>
            <h3>Events</h3>
            <ul id="event-log"></ul>
          </div>
        </div>
      </div>`;
    const byId = (id: string) => {
      const el = this.root.querySelector<HTMLElement>(`#${id}`);
      if (!el) throw new Error(`dashboard skeleton is missing #${id}`);
      return el;
    };
    const els = {
      banner: byId('banner'),
      note: byId('note'),
      chip: byId('status-chip'),
      meta: byId('meta'),
      pause: byId('btn-pause'),
      step: byId('btn-step'),
      resume: byId('btn-resume'),
      planBoard: byId('plan-board'),
      insertForm: byId('insert-form'),
      insertAction: byId('insert-action'),
      insertPos: byId('insert-pos'),
      insertSubmit: byId('insert-submit'),
      rejection: byId('rejection'),
      tabletop: byId('tabletop'),
      grid: byId('predicate-grid'),
      eventLog: byId('event-log'),
    };
    els.pause.addEventListener('click', () => void this.sendControl('pause'));
    els.resume.addEventListener('click', () => void this.sendControl('resume'));
    els.step.addEventListener('click', () => void this.sendControl('step'));
    els.insertForm.addEventListener('submit', (ev) => {
      ev.preventDefault();
      const action = (els.insertAction as HTMLSelectElement).value;
      const index = Number((els.insertPos as HTMLInputElement).value);
      if (action) void this.submitEdit({ op: 'insert', index, action });
    });
    return els;
  }

  // -- rendering --------------------------------------------------------------

  render(): void {
    const controls = legalControls(this.status);
    this.els.chip.textContent = this.status;
    this.els.chip.dataset.status = this.status;
    (this.els.pause as HTMLButtonElement).disabled = !controls.pause;
    (this.els.resume as HTMLButtonElement).disabled = !controls.resume;
    (this.els.step as HTMLButtonElement).disabled = !controls.step;
    (this.els.insertSubmit as HTMLButtonElement).disabled = !controls.edit;
    (this.els.insertAction as HTMLSelectElement).disabled = !controls.edit;
    (this.els.insertPos as HTMLInputElement).disabled = !controls.edit;

    this.renderBanner();
    this.renderMeta();
    this.renderBoard(controls.edit);
    this.renderInsertOptions();
    this.renderGrid();
    this.renderEventLog();
    if (this.state) {
      drawTabletop(this.els.tabletop as HTMLCanvasElement, this.state.world);
    }
  }

  private renderBanner(): void {
    const banner = this.els.banner;
    if (this.status === 'succeeded') {
      banner.hidden = false;
      banner.className = 'banner success';
      banner.textContent = 'Task succeeded';
    } else if (this.status === 'failed') {
      const failure = [...this.eventRows].reverse().find((r) => r.kind === 'task_failed');
      banner.hidden = false;
      banner.className = 'banner failure';
      banner.textContent = `Task failed: ${String(failure?.detail.reason ?? 'see event log')}`;
    } else {
      banner.hidden = true;
      banner.textContent = '';
    }
  }

  private renderMeta(): void {
    if (!this.state) {
      this.els.meta.textContent = '';
      return;
    }
    const s = this.state;
    this.els.meta.textContent =
      `session ${s.session} · ${s.policy} · tick ${s.tick} · ` +
      `replans ${s.replans_used} · goal ${s.goal}`;
  }

  private renderBoard(editable: boolean): void {
    const host = this.els.planBoard;
    host.innerHTML = '';
    const cursor = this.board.cursor;
    this.board.cards.forEach((card, i) => {
      const el = document.createElement('div');
      el.className = 'plan-card';
      el.dataset.state = card.state;
      el.dataset.index = String(i);

      const head = document.createElement('div');
      head.className = 'card-head';
      const action = document.createElement('span');
      action.className = 'card-action';
      action.textContent = `${i + 1}. ${card.action}`;
      head.appendChild(action);
      if (card.edited) {
        const badge = document.createElement('span');
        badge.className = 'card-edited';
        badge.textContent = 'edited';
        head.appendChild(badge);
      }
      const subgoal = document.createElement('div');
      subgoal.className = 'card-subgoal';
      subgoal.textContent = card.subgoal;
      el.appendChild(head);
      el.appendChild(subgoal);

      const remaining = i >= cursor;
      if (remaining && editable) {
        const del = document.createElement('button');
        del.className = 'card-delete';
        del.type = 'button';
        del.textContent = 'delete';
        del.addEventListener('click', () =>
          void this.submitEdit({ op: 'remove', index: i - cursor }),
        );
        el.appendChild(del);

        el.draggable = true;
        el.addEventListener('dragstart', () => {
          this.dragFrom = i - cursor;
        });
        el.addEventListener('dragover', (ev) => ev.preventDefault());
        el.addEventListener('drop', (ev) => {
          ev.preventDefault();
          if (this.dragFrom === null) return;
          const order = reorderedSuffix(
            this.board.cards.length - cursor,
            this.dragFrom,
            i - cursor,
          );
          this.dragFrom = null;
          if (order) void this.submitEdit({ op: 'reorder', order });
        });
      }
      host.appendChild(el);
    });
  }

  private renderInsertOptions(): void {
    const select = this.els.insertAction as HTMLSelectElement;
    const keep = select.value;
    select.innerHTML = '';
    for (const name of this.vocabulary) {
      const opt = document.createElement('option');
      opt.value = name;
      opt.textContent = name;
      select.appendChild(opt);
    }
    if (keep && this.vocabulary.includes(keep)) select.value = keep;
    const pos = this.els.insertPos as HTMLInputElement;
    pos.max = String(Math.max(0, this.board.cards.length - this.board.cursor));
  }

  private renderGrid(): void {
    const host = this.els.grid;
    host.innerHTML = '';
    if (!this.state) return;
    const slots = buildGrid(this.state.atoms, this.state.config, this.state.goal_vec);
    for (const slot of slots) {
      const el = document.createElement('span');
      el.className = 'grid-slot';
      el.dataset.value = slot.value ? '1' : '0';
      if (slot.goal !== null) {
        el.dataset.goal = slot.goal ? '1' : '0';
        el.dataset.satisfied = slot.satisfied ? '1' : '0';
      }
      el.textContent = slot.name;
      host.appendChild(el);
    }
  }

  private renderEventLog(): void {
    const host = this.els.eventLog;
    host.innerHTML = '';
    for (const row of [...this.eventRows].reverse().slice(0, 40)) {
      const li = document.createElement('li');
      li.className = `event-row event-${row.kind}`;
      li.textContent = `#${row.index} t${row.tick} ${row.kind}`;
      host.appendChild(li);
    }
  }

  private renderRejection(body: ApiErrorBody): void {
    const host = this.els.rejection;
    host.hidden = false;
    host.innerHTML = '';
    const msg = document.createElement('div');
    msg.className = 'rejection-message';
    msg.textContent = `Edit rejected: ${body.message}`;
    host.appendChild(msg);
    if (typeof body.failed_step === 'number') {
      const step = document.createElement('div');
      step.className = 'rejection-step';
      step.textContent = `fails at remaining step ${body.failed_step}`;
      host.appendChild(step);
    }
    for (const atom of body.missing ?? []) {
      const chip = document.createElement('span');
      chip.className = 'missing-atom';
      chip.textContent = atom;
      host.appendChild(chip);
    }
  }

  private clearRejection(): void {
    this.els.rejection.hidden = true;
    this.els.rejection.innerHTML = '';
  }

  private setNote(text: string): void {
    this.els.note.hidden = false;
    this.els.note.textContent = text;
  }

  private showError(err: unknown): void {
    const text =
      err instanceof RequestFailed
        ? `${err.body.code}: ${err.body.message}`
        : String(err);
    this.els.note.hidden = false;
    this.els.note.className = 'note error';
    this.els.note.textContent = text;
  }
}

/**
 * Permutation of the remaining steps that moves `from` in front of the
 * card currently at `to`. Returns null for a no-op drag.
 */
export function reorderedSuffix(length: number, from: number, to: number): number[] | null {
  if (from === to || from < 0 || to < 0 || from >= length || to >= length) return null;
  const order: number[] = [];
  for (let i = 0; i < length; i++) if (i !== from) order.push(i);
  order.splice(to, 0, from);
  return order;
}
