/**
 * Plan board model.
 *
 * The board can be built two independent ways: hydrated from a server
 * snapshot, or folded step by step from the event stream. Card order
 * always equals server plan order, and the two constructions must agree
 * card for card; the replay-equivalence test pins that property.
 *
 * Human-edited badges are the one exception: they are event-sourced
 * (an intervention marks the plan it admitted) and a snapshot cannot
 * recover them, so `core()` leaves them out of the comparison.
 */

import type { EventRow, ExecStatus, PlanPayload, StatePayload } from './types.js';

export type CardState = 'pending' | 'active' | 'achieved' | 'failed';

/** What the events can see of the executor status. */
export type BoardPhase = 'live' | 'succeeded' | 'failed';

export interface PlanCard {
  action: string;
  subgoal: string;
  state: CardState;
  edited: boolean;
}

export interface BoardCore {
  phase: BoardPhase;
  cursor: number;
  cards: { action: string; subgoal: string; state: CardState }[];
}

export function phaseOf(status: ExecStatus): BoardPhase {
  if (status === 'succeeded') return 'succeeded';
  if (status === 'failed') return 'failed';
  return 'live';
}

function cardState(index: number, cursor: number, phase: BoardPhase): CardState {
  if (index < cursor) return 'achieved';
  if (index === cursor && phase === 'live') return 'active';
  if (index === cursor && phase === 'failed') return 'failed';
  return 'pending';
}

export class PlanBoard {
  revision = -1;
  phase: BoardPhase = 'live';
  cursor = 0;
  cards: PlanCard[] = [];
  /** Index of the last event folded in (or covered by a hydration). */
  lastEventIndex = -1;

  /** Full rebuild from a state snapshot. Stale revisions are ignored. */
  hydrateState(s: StatePayload): boolean {
    if (s.revision < this.revision) return false;
    this.revision = s.revision;
    this.phase = phaseOf(s.status);
    this.cursor = s.cursor;
    this.lastEventIndex = s.event_count - 1;
    this.cards = s.plan.map((action, i) => ({
      action,
      subgoal: s.subgoals[i] ?? '',
      state: cardState(i, s.cursor, this.phase),
      edited: false,
    }));
    return true;
  }

  /**
   * Rebuild from a plan payload, taking the server's per-step states
   * verbatim rather than recomputing them. Stale revisions are ignored.
   */
  hydratePlan(p: PlanPayload): boolean {
    if (p.revision < this.revision) return false;
    this.revision = p.revision;
    this.phase = phaseOf(p.status);
    this.cursor = p.cursor;
    this.cards = p.steps.map((step) => ({
      action: step.action,
      subgoal: step.subgoal,
      state: this.mapStepState(step.index, step.state, p.status),
      edited: false,
    }));
    return true;
  }

  private mapStepState(index: number, state: string, status: ExecStatus): CardState {
    if (state === 'done') return 'achieved';
    if (state === 'active') return 'active';
    // the server reports the cursor step of a failed run as plain
    // pending; surface the failure on that card
    if (status === 'failed' && index === this.cursor) return 'failed';
    return 'pending';
  }

  /** Fold one event into the board. Out-of-order replays are ignored. */
  applyEvent(row: EventRow): boolean {
    if (row.index <= this.lastEventIndex) return false;
    this.lastEventIndex = row.index;
    const d = row.detail;
    switch (row.kind) {
      case 'plan_created':
        this.setPlan(d.plan as string[], d.subgoals as string[], false);
        break;
      case 'replanned':
        this.setPlan(d.plan as string[], d.subgoals as string[], false);
        break;
      case 'intervention_applied':
        this.setPlan(d.plan as string[], d.subgoals as string[], true);
        break;
      case 'subgoal_started':
        this.cursor = d.index as number;
        break;
      case 'subgoal_achieved':
        this.cursor = (d.index as number) + 1;
        break;
      case 'task_succeeded':
        this.phase = 'succeeded';
        break;
      case 'task_failed':
        this.phase = 'failed';
        break;
      default:
        return true; // unknown kinds advance the index but change nothing
    }
    this.restate();
    return true;
  }

  private setPlan(actions: string[], subgoals: string[], edited: boolean): void {
    this.cursor = 0;
    this.cards = actions.map((action, i) => ({
      action,
      subgoal: subgoals[i] ?? '',
      state: 'pending' as CardState,
      edited,
    }));
  }

  private restate(): void {
    for (let i = 0; i < this.cards.length; i++) {
      this.cards[i].state = cardState(i, this.cursor, this.phase);
    }
  }

  /** Projection compared by the replay-equivalence property. */
  core(): BoardCore {
    return {
      phase: this.phase,
      cursor: this.cursor,
      cards: this.cards.map(({ action, subgoal, state }) => ({ action, subgoal, state })),
    };
  }
}
