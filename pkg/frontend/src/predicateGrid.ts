/**
 * Predicate grid: one slot per layout atom with its live truth value,
 * plus the goal overlay on exactly the atoms the goal mask pins.
 */

import type { GoalVec } from './types.js';

export interface GridSlot {
  name: string;
  value: boolean;
  /** Pinned goal value, or null when the goal does not constrain this atom. */
  goal: boolean | null;
  satisfied: boolean | null;
}

export function buildGrid(atoms: string[], config: number[], goal: GoalVec): GridSlot[] {
  if (config.length !== atoms.length) {
    throw new Error(`config has ${config.length} entries for ${atoms.length} atoms`);
  }
  if (goal.target.length !== atoms.length || goal.mask.length !== atoms.length) {
    throw new Error(`goal width ${goal.mask.length} does not match layout ${atoms.length}`);
  }
  return atoms.map((name, i) => {
    const value = config[i] === 1;
    const pinned = goal.mask[i] === 1 ? goal.target[i] === 1 : null;
    return {
      name,
      value,
      goal: pinned,
      satisfied: pinned === null ? null : value === pinned,
    };
  });
}
