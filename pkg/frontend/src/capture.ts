/** Demonstration capture.
 *
 * doorkey: keyboard tokens (arrows + pickup/use). nav2d: either a pointer
 * drag sampled into per-step bounded displacement vectors, or clicked
 * waypoints walked with bounded steps (a UX toggle). Both emit exactly
 * horizon-length sequences: short input is padded per the service rule,
 * over-horizon input is truncated with a notice.
 */

import type { Action } from "./types";

export const NAV2D_MAX_STEP = 0.1;
export const DOORKEY_PAD_ACTION = 5; // "use" is a no-op when not facing a door

/** Keyboard mapping for the six doorkey tokens 0..5. */
export const DOORKEY_KEY_MAP: Record<string, number> = {
  ArrowUp: 0,
  ArrowDown: 1,
  ArrowLeft: 2,
  ArrowRight: 3,
  p: 4, // pickup
  u: 5, // use
};

export interface CaptureResult {
  actions: Action[];
  padding: number;
  truncated: boolean;
}

export type KeyPushResult =
  | { accepted: true; action: number; done: boolean }
  | { accepted: false; reason: "unknown_key" | "horizon_full"; hint: string };

/** Incremental keyboard capture for doorkey demos. */
export class KeyboardCapture {
  readonly actions: number[] = [];
  truncatedInput = false;

  constructor(public readonly horizon: number) {}

  push(key: string): KeyPushResult {
    const action = DOORKEY_KEY_MAP[key];
    if (action === undefined) {
      const keys = Object.keys(DOORKEY_KEY_MAP).join(", ");
      return { accepted: false, reason: "unknown_key", hint: `use one of: ${keys}` };
    }
    if (this.actions.length >= this.horizon) {
      this.truncatedInput = true;
      return {
        accepted: false,
        reason: "horizon_full",
        hint: `horizon is ${this.horizon}; extra input is ignored`,
      };
    }
    this.actions.push(action);
    return { accepted: true, action, done: this.actions.length >= this.horizon };
  }

  reset(): void {
    this.actions.length = 0;
    this.truncatedInput = false;
  }

  finish(): CaptureResult {
    const padding = this.horizon - this.actions.length;
    return {
      actions: [...this.actions, ...Array(padding).fill(DOORKEY_PAD_ACTION)],
      padding,
      truncated: this.truncatedInput,
    };
  }
}

const clampStep = (v: number): number => Math.min(NAV2D_MAX_STEP, Math.max(-NAV2D_MAX_STEP, v));

/** Pointer-drag capture: consecutive path displacements, each component
 * clamped to the per-step bound, truncated/zero-padded to the horizon. */
export function dragToActions(path: Array<[number, number]>, horizon: number): CaptureResult {
  const steps: number[][] = [];
  for (let i = 1; i < path.length; i++) {
    steps.push([clampStep(path[i][0] - path[i - 1][0]), clampStep(path[i][1] - path[i - 1][1])]);
  }
  const truncated = steps.length > horizon;
  const kept = steps.slice(0, horizon);
  const padding = horizon - kept.length;
  for (let i = 0; i < padding; i++) kept.push([0, 0]);
  return { actions: kept, padding, truncated };
}

/** Waypoint capture: walk toward each clicked waypoint with bounded steps
 * until within `tolerance`, then move on to the next. */
export function waypointsToActions(
  start: [number, number],
  waypoints: Array<[number, number]>,
  horizon: number,
  tolerance = 0.01,
): CaptureResult {
  const steps: number[][] = [];
  let [x, y] = start;
  let truncated = false;
  outer: for (const [wx, wy] of waypoints) {
    while (Math.abs(wx - x) > tolerance || Math.abs(wy - y) > tolerance) {
      if (steps.length >= horizon) {
        truncated = true;
        break outer;
      }
      const dx = clampStep(wx - x);
      const dy = clampStep(wy - y);
      steps.push([dx, dy]);
      x += dx;
      y += dy;
    }
  }
  const padding = horizon - steps.length;
  for (let i = 0; i < padding; i++) steps.push([0, 0]);
  return { actions: steps, padding, truncated };
}

/** Round-trip check: a server echo must reproduce the captured sequence
 * exactly (numbers compared strictly, not approximately). */
export function actionsEqual(a: Action[], b: Action[]): boolean {
  if (a.length !== b.length) return false;
  return a.every((x, i) => {
    const y = b[i];
    if (typeof x === "number" || typeof y === "number") return x === y;
    return x.length === y.length && x.every((v, j) => v === y[j]);
  });
}
