/** Phase safety: each control group is enabled in exactly one phase, so the
 * UI can never issue a request the server would reject as a phase
 * violation. */

import type { Phase } from "./types";

export type Control = "verdict" | "capture" | "feedback" | "poll" | "summary";

const ENABLED: Record<Phase, Control[]> = {
  awaiting_verdict: ["verdict"],
  awaiting_demo: ["capture"],
  awaiting_feedback: ["feedback"],
  finetuning: ["poll"],
  evaluated: ["summary"],
};

export function enabledControls(phase: Phase): ReadonlySet<Control> {
  return new Set(ENABLED[phase]);
}

export function isEnabled(phase: Phase, control: Control): boolean {
  return enabledControls(phase).has(control);
}
