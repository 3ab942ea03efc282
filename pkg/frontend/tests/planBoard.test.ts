import { describe, expect, it } from 'vitest';
import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';

import { SseDecoder } from '../src/api.js';
import { PlanBoard } from '../src/planBoard.js';
import type { EventRow, PlanPayload, StatePayload } from '../src/types.js';

interface Fixture {
  sse: string;
  state: StatePayload;
  plan: PlanPayload;
}

const fixture: Fixture = JSON.parse(
  readFileSync(fileURLToPath(new URL('./fixtures/mc2_session.json', import.meta.url)), 'utf-8'),
);

function decodeEvents(sse: string, chunkSize: number): EventRow[] {
  const decoder = new SseDecoder();
  const rows: EventRow[] = [];
  for (let i = 0; i < sse.length; i += chunkSize) {
    for (const msg of decoder.push(sse.slice(i, i + chunkSize))) {
      if (msg.data) rows.push(JSON.parse(msg.data) as EventRow);
    }
  }
  return rows;
}

describe('recorded session fixture', () => {
  it('contains interventions and a successful finish', () => {
    const rows = decodeEvents(fixture.sse, 4096);
    const kinds = rows.map((r) => r.kind);
    expect(kinds.filter((k) => k === 'intervention_applied').length).toBeGreaterThanOrEqual(2);
    expect(kinds[0]).toBe('plan_created');
    expect(kinds[kinds.length - 1]).toBe('task_succeeded');
    expect(fixture.state.status).toBe('succeeded');
    expect(rows.map((r) => r.index)).toEqual(rows.map((_, i) => i));
  });
});

describe('replay equivalence', () => {
  // the board folded from the event stream must match the board
  // hydrated from the final snapshot, card for card
  it.each([1, 7, 4096])('event fold equals snapshot hydration (chunk %i)', (chunk) => {
    const folded = new PlanBoard();
    for (const row of decodeEvents(fixture.sse, chunk)) folded.applyEvent(row);

    const fromPlan = new PlanBoard();
    fromPlan.hydratePlan(fixture.plan);
    expect(folded.core()).toEqual(fromPlan.core());

    const fromState = new PlanBoard();
    fromState.hydrateState(fixture.state);
    expect(folded.core()).toEqual(fromState.core());
  });

  it('replaying any prefix then hydrating the snapshot converges too', () => {
    const rows = decodeEvents(fixture.sse, 4096);
    for (let cut = 0; cut <= rows.length; cut++) {
      const board = new PlanBoard();
      for (const row of rows.slice(0, cut)) board.applyEvent(row);
      board.hydrateState(fixture.state);
      const reference = new PlanBoard();
      reference.hydrateState(fixture.state);
      expect(board.core()).toEqual(reference.core());
    }
  });

  it('duplicate and out-of-order events are ignored', () => {
    const rows = decodeEvents(fixture.sse, 4096);
    const board = new PlanBoard();
    for (const row of rows) board.applyEvent(row);
    const settled = board.core();
    expect(board.applyEvent(rows[2])).toBe(false);
    expect(board.applyEvent(rows[rows.length - 1])).toBe(false);
    expect(board.core()).toEqual(settled);
  });
});

function planPayload(revision: number, status: PlanPayload['status']): PlanPayload {
  return {
    session: 's',
    revision,
    cursor: 0,
    status,
    steps: [
      { index: 0, action: 'pick-from-table(red, green)', subgoal: 'holding(red)=1', state: 'active' },
      { index: 1, action: 'put-near(red, green)', subgoal: 'close(red, green)=1', state: 'pending' },
    ],
    actions: [],
  };
}

describe('board bookkeeping', () => {
  it('stale revisions never overwrite newer ones', () => {
    const board = new PlanBoard();
    expect(board.hydratePlan(planPayload(5, 'paused'))).toBe(true);
    const settled = board.core();
    expect(board.hydratePlan(planPayload(3, 'running'))).toBe(false);
    expect(board.core()).toEqual(settled);
    expect(board.revision).toBe(5);
  });

  it('interventions badge every card until the next planner-authored plan', () => {
    const board = new PlanBoard();
    board.applyEvent({
      index: 0,
      tick: 0,
      kind: 'plan_created',
      detail: { plan: ['a()', 'b()'], subgoals: ['ga', 'gb'] },
    });
    expect(board.cards.map((c) => c.edited)).toEqual([false, false]);
    board.applyEvent({
      index: 1,
      tick: 4,
      kind: 'intervention_applied',
      detail: { op: 'insert', plan: ['a()', 'c()', 'b()'], subgoals: ['ga', 'gc', 'gb'] },
    });
    expect(board.cards.map((c) => c.edited)).toEqual([true, true, true]);
    board.applyEvent({
      index: 2,
      tick: 9,
      kind: 'replanned',
      detail: { plan: ['b()'], subgoals: ['gb'], reason: 'timeout', attempt: 1 },
    });
    expect(board.cards.map((c) => c.edited)).toEqual([false]);
  });

  it('a failed run marks the stuck card', () => {
    const board = new PlanBoard();
    board.applyEvent({
      index: 0,
      tick: 0,
      kind: 'plan_created',
      detail: { plan: ['a()', 'b()'], subgoals: ['ga', 'gb'] },
    });
    board.applyEvent({ index: 1, tick: 0, kind: 'subgoal_started', detail: { index: 0 } });
    board.applyEvent({ index: 2, tick: 30, kind: 'subgoal_achieved', detail: { index: 0 } });
    board.applyEvent({
      index: 3,
      tick: 200,
      kind: 'task_failed',
      detail: { reason: 'replan budget exhausted' },
    });
    expect(board.cards.map((c) => c.state)).toEqual(['achieved', 'failed']);

    // hydration of the equivalent server payload agrees
    const hydrated = new PlanBoard();
    hydrated.hydratePlan({
      session: 's',
      revision: 9,
      cursor: 1,
      status: 'failed',
      steps: [
        { index: 0, action: 'a()', subgoal: 'ga', state: 'done' },
        { index: 1, action: 'b()', subgoal: 'gb', state: 'pending' },
      ],
      actions: [],
    });
    expect(hydrated.cards.map((c) => c.state)).toEqual(['achieved', 'failed']);
  });
});
