/**
 * Client-side mirror of the server's legal transitions. Controls render
 * from this table so the UI never posts a command the server would
 * reject with a conflict.
 */

import type { ExecStatus } from './types.js';

export interface Controls {
  pause: boolean;
  resume: boolean;
  step: boolean;
  edit: boolean;
}

// plan edits and manual steps need a parked executor; pause needs a
// running one; everything is off in terminal states and during planning
export function legalControls(status: ExecStatus): Controls {
  const parked = status === 'paused' || status === 'awaiting_edit';
  return {
    pause: status === 'running',
    resume: parked,
    step: parked,
    edit: parked,
  };
}
