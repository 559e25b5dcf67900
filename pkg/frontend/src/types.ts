/** Wire types for the cfadapt session service (API version 1). */

export type Domain = "nav2d" | "doorkey";

export type Phase =
  | "awaiting_verdict"
  | "awaiting_demo"
  | "awaiting_feedback"
  | "finetuning"
  | "evaluated";

export interface SceneObject {
  name: string;
  present: boolean;
  values: string[];
  position: number[] | null;
}

export interface SceneDescriptor {
  domain: Domain;
  objects: SceneObject[];
  agent_pos: number[];
  door_open: boolean;
  key_held: boolean;
}

export interface Frame {
  encoding: "png" | "raw";
  data: string; // base64
  shape?: number[];
}

/** nav2d actions are [dx, dy]; doorkey actions are token indices 0..5. */
export type Action = number | number[];

export interface TrajectoryPayload {
  provenance: string;
  scene: SceneDescriptor;
  frames: Frame[];
  actions: Action[];
}

export interface RoundLog {
  round: number;
  rollout_digest: string;
  verdict?: boolean;
  demo_digest?: string;
  counterfactual?: CounterfactualJson;
  feedback?: { valid: boolean; relevance: "TI" | "TR" } | null;
  augmented?: number;
  finetune?: { demos: number; epochs: number; final_loss: number | null };
  eval?: EvalSummary | null;
}

export interface SessionLog {
  max_rounds: number;
  status: string;
  rounds: RoundLog[];
}

export interface SessionView {
  version: number;
  id: string;
  domain: Domain;
  shift_type: string;
  seed: number;
  phase: Phase;
  round: number;
  status: string;
  horizon: number;
  reward_prompt: string;
  log: SessionLog;
  created: number;
  rollout?: TrajectoryPayload;
}

export interface CounterfactualJson {
  status: "found" | "none";
  edit: unknown | null;
  scene: SceneDescriptor | null;
  edit_count: number;
  block_distance: number;
  candidates_evaluated: number;
  trajectory_digest: string | null;
}

export interface CounterfactualPayload {
  version: number;
  phase: Phase;
  counterfactual: CounterfactualJson;
  edit_description?: string;
  counterfactual_trajectory?: TrajectoryPayload;
  demo_trajectory?: TrajectoryPayload;
}

export interface EvalSummary {
  per_scene: boolean[];
  mean: number;
}

export interface EvalPayload {
  version: number;
  phase: Phase;
  status: string;
  round: number;
  eval: EvalSummary | null;
  finetune: { demos: number; epochs: number; final_loss: number | null } | null;
  rollout?: TrajectoryPayload;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  allowed: unknown[];
}

/** Messages on the incremental demo-capture stream. */
export type StreamClientMessage =
  | { type: "reset" }
  | { type: "step"; action: Action }
  | { type: "commit" };

export type StreamServerMessage =
  | { type: "state"; t: number; frame: Frame; done?: boolean }
  | { type: "actions"; actions: Action[]; padding: number }
  | { type: "error"; code: string; message: string; allowed: unknown[] };
