/** Wire types for the session service's /v1 API. */

export type ExecStatus =
  | 'planning'
  | 'running'
  | 'paused'
  | 'awaiting_edit'
  | 'succeeded'
  | 'failed';

export function isTerminal(status: ExecStatus): boolean {
  return status === 'succeeded' || status === 'failed';
}

export interface BlockDict {
  name: string;
  pos: number[];
  stacked_on: string | null;
  in_bin: boolean;
}

export interface WorldDict {
  tick: number;
  gripper: number[];
  grip_closed: boolean;
  held: string | null;
  has_bin: boolean;
  blocks: BlockDict[];
}

export interface GoalVec {
  target: number[];
  mask: number[];
}

export interface StatePayload {
  session: string;
  revision: number;
  policy: string;
  created: string;
  status: ExecStatus;
  tick: number;
  cursor: number;
  plan: string[];
  subgoals: string[];
  subgoal: string | null;
  goal: string;
  goal_vec: GoalVec;
  atoms: string[];
  config: number[];
  world: WorldDict;
  replans_used: number;
  event_count: number;
}

export type StepState = 'done' | 'active' | 'pending';

export interface PlanStep {
  index: number;
  action: string;
  subgoal: string;
  state: StepState;
}

export interface PlanPayload {
  session: string;
  revision: number;
  cursor: number;
  status: ExecStatus;
  steps: PlanStep[];
  actions: string[];
}

export interface EventRow {
  index: number;
  tick: number;
  kind: string;
  detail: Record<string, unknown>;
}

export interface TaskInfo {
  id: string;
  profile: string;
  initializer: string;
  goal_atoms: Record<string, boolean> | null;
  scene_dependent_goal: boolean;
}

export interface EditRequest {
  op: 'insert' | 'remove' | 'reorder' | 'replace_plan';
  index?: number;
  action?: string;
  order?: number[];
  plan?: string[];
}

export interface SessionRequest {
  task?: string;
  scene?: { profile: string; initializer: string; seed: number };
  goal?: Record<string, boolean>;
  seed?: number;
  policy?: 'scripted' | 'learned';
  start_paused?: boolean;
  step_delay?: number;
  max_replans?: number;
  subgoal_budget?: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  missing?: string[];
  failed_step?: number | null;
  [key: string]: unknown;
}
