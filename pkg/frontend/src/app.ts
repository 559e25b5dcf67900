/** Single-page session flow, phases top-to-bottom, session log always
 * visible. The server is the source of truth: every response re-renders
 * from the fresh SessionView. */

import { ApiClient, ApiError } from "./api";
import {
  KeyboardCapture,
  actionsEqual,
  dragToActions,
  waypointsToActions,
} from "./capture";
import { FeedbackDialog } from "./feedback";
import { isEnabled } from "./phase";
import { LockedPlayback } from "./playback";
import { frameDataUrl, paint, renderScene } from "./render";
import type {
  Action,
  CounterfactualPayload,
  SessionView,
  TrajectoryPayload,
} from "./types";

const CANVAS_SIZE = 360;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class App {
  private api = new ApiClient(
    (document.querySelector("meta[name=api-base]") as HTMLMetaElement)?.content ??
      "http://127.0.0.1:8000",
  );
  private view: SessionView | null = null;
  private cf: CounterfactualPayload | null = null;
  private dialog: FeedbackDialog | null = null;
  private keyCapture: KeyboardCapture | null = null;
  private dragPath: Array<[number, number]> = [];
  private waypoints: Array<[number, number]> = [];
  private playback: LockedPlayback | null = null;
  private rasterDebug = false;
  private lastTick = performance.now();

  start(): void {
    el<HTMLButtonElement>("create").addEventListener("click", () => void this.create());
    el<HTMLButtonElement>("verdict-success").addEventListener("click", () => void this.verdict(true));
    el<HTMLButtonElement>("verdict-failure").addEventListener("click", () => void this.verdict(false));
    el<HTMLButtonElement>("demo-submit").addEventListener("click", () => void this.submitDemo());
    el<HTMLButtonElement>("demo-reset").addEventListener("click", () => this.resetCapture());
    el<HTMLButtonElement>("fb-yes").addEventListener("click", () => this.answer(true));
    el<HTMLButtonElement>("fb-no").addEventListener("click", () => this.answer(false));
    el<HTMLButtonElement>("fb-ti").addEventListener("click", () => this.answerRel("TI"));
    el<HTMLButtonElement>("fb-tr").addEventListener("click", () => this.answerRel("TR"));
    el<HTMLInputElement>("scrubber").addEventListener("input", (e) => {
      this.playback?.master.scrub(Number((e.target as HTMLInputElement).value));
      this.drawFrames();
    });
    el<HTMLButtonElement>("play").addEventListener("click", () => this.playback?.master.play());
    el<HTMLInputElement>("raster-toggle").addEventListener("change", (e) => {
      this.rasterDebug = (e.target as HTMLInputElement).checked;
      this.drawFrames();
    });
    document.addEventListener("keydown", (e) => this.onKey(e));
    const canvas = el<HTMLCanvasElement>("capture-canvas");
    canvas.addEventListener("pointerdown", (e) => this.onPointer(e, true));
    canvas.addEventListener("pointermove", (e) => this.onPointer(e, false));
    requestAnimationFrame(() => this.tick());
  }

  private async create(): Promise<void> {
    const domain = el<HTMLSelectElement>("domain").value;
    const shift = el<HTMLSelectElement>("shift").value;
    const seed = Number(el<HTMLInputElement>("seed").value || "0");
    await this.guard(async () => {
      this.view = await this.api.createSession({ domain, shift_type: shift, seed });
      this.cf = null;
      this.render();
    });
  }

  private async verdict(success: boolean): Promise<void> {
    if (!this.view || !isEnabled(this.view.phase, "verdict")) return;
    await this.guard(async () => {
      await this.api.submitVerdict(this.view!.id, success);
      await this.refresh();
      if (!success) this.beginCapture();
    });
  }

  private beginCapture(): void {
    if (!this.view) return;
    if (this.view.domain === "doorkey") {
      this.keyCapture = new KeyboardCapture(this.view.horizon);
    }
    this.dragPath = [];
    this.waypoints = [];
    this.renderScenePreview();
  }

  private resetCapture(): void {
    this.beginCapture();
    this.note("capture reset");
  }

  private onKey(e: KeyboardEvent): void {
    if (!this.view || !isEnabled(this.view.phase, "capture") || !this.keyCapture) return;
    const res = this.keyCapture.push(e.key);
    this.note(res.accepted ? `step ${this.keyCapture.actions.length}/${this.view.horizon}` : res.hint);
  }

  private onPointer(e: PointerEvent, isDown: boolean): void {
    if (!this.view || this.view.domain !== "nav2d" || !isEnabled(this.view.phase, "capture")) return;
    if (!isDown && e.buttons === 0) return;
    const canvas = e.target as HTMLCanvasElement;
    const rect = canvas.getBoundingClientRect();
    const point: [number, number] = [
      (e.clientX - rect.left) / rect.width,
      (e.clientY - rect.top) / rect.height,
    ];
    const useWaypoints = el<HTMLInputElement>("waypoint-toggle").checked;
    if (useWaypoints && isDown) this.waypoints.push(point);
    if (!useWaypoints) this.dragPath.push(point);
  }

  private captureActions(): { actions: Action[]; truncated: boolean } {
    const view = this.view!;
    if (view.domain === "doorkey") {
      const res = this.keyCapture!.finish();
      return { actions: res.actions, truncated: res.truncated };
    }
    const useWaypoints = el<HTMLInputElement>("waypoint-toggle").checked;
    const scene = view.rollout?.scene;
    const start: [number, number] = scene
      ? [scene.agent_pos[0], scene.agent_pos[1]]
      : [0.1, 0.1];
    const res = useWaypoints
      ? waypointsToActions(start, this.waypoints, view.horizon)
      : dragToActions(this.dragPath, view.horizon);
    return { actions: res.actions, truncated: res.truncated };
  }

  private async submitDemo(): Promise<void> {
    if (!this.view || !isEnabled(this.view.phase, "capture")) return;
    const { actions, truncated } = this.captureActions();
    if (truncated) this.note(`input exceeded the horizon; extra steps were dropped`);
    await this.guard(async () => {
      try {
        this.cf = await this.api.submitDemo(this.view!.id, actions);
      } catch (err) {
        if (err instanceof ApiError && err.code === "demo_failed_success_check") {
          if (confirm("The server thinks this demo fails the task. Keep it anyway?")) {
            this.cf = await this.api.submitDemo(this.view!.id, actions, true);
          } else {
            return;
          }
        } else {
          throw err;
        }
      }
      // round-trip fidelity check against the echoed log entry
      if (this.cf?.demo_trajectory && !actionsEqual(actions, this.cf.demo_trajectory.actions)) {
        this.note("warning: server echo differs from captured actions");
      }
      await this.refresh();
      if (this.cf?.counterfactual.status === "found") {
        this.dialog = new FeedbackDialog(
          this.cf.edit_description ?? "the identified concept change",
          this.view!.reward_prompt,
        );
        this.setupContrast(this.view!.rollout, this.cf.counterfactual_trajectory);
      } else {
        await this.poll();
      }
      this.render();
    });
  }

  private answer(valid: boolean): void {
    if (!this.dialog || this.dialog.currentStage !== "verify") return;
    const stage = this.dialog.answerVerify(valid);
    if (stage === "done") void this.sendFeedback();
    this.render();
  }

  private answerRel(rel: "TI" | "TR"): void {
    if (!this.dialog || this.dialog.currentStage !== "relevance") return;
    this.dialog.answerRelevance(rel);
    void this.sendFeedback();
  }

  private async sendFeedback(): Promise<void> {
    const answers = this.dialog!.result();
    await this.guard(async () => {
      await this.api.submitFeedback(this.view!.id, answers.valid, answers.relevance);
      await this.poll();
    });
  }

  private async poll(): Promise<void> {
    const payload = await this.api.pollEval(this.view!.id);
    this.note(
      payload.eval
        ? `eval success ${Math.round(payload.eval.mean * 100)}% across ${payload.eval.per_scene.length} scenes`
        : "finetuned on the demo",
    );
    await this.refresh();
    if (this.view?.phase === "awaiting_verdict") this.setupContrast(this.view.rollout, undefined);
  }

  private async refresh(): Promise<void> {
    this.view = await this.api.getSession(this.view!.id);
    this.render();
  }

  private setupContrast(left?: TrajectoryPayload, right?: TrajectoryPayload): void {
    if (!left) return;
    this.playback = new LockedPlayback(left.frames.length, right?.frames.length ?? left.frames.length);
    const scrubber = el<HTMLInputElement>("scrubber");
    scrubber.max = String(this.playback.master.frameCount - 1);
    scrubber.value = "0";
    el<HTMLElement>("contrast-right").style.display = right ? "" : "none";
    this.drawFrames();
  }

  private drawFrames(): void {
    if (!this.playback || !this.view?.rollout) return;
    this.drawPane("contrast-left", this.view.rollout, this.playback.leftFrame);
    if (this.cf?.counterfactual_trajectory) {
      this.drawPane("contrast-right", this.cf.counterfactual_trajectory, this.playback.rightFrame);
    }
  }

  private drawPane(id: string, traj: TrajectoryPayload, t: number): void {
    const canvas = el<HTMLCanvasElement>(id + "-canvas");
    const ctx = canvas.getContext("2d")!;
    if (this.rasterDebug) {
      const img = new Image();
      img.onload = () => {
        ctx.imageSmoothingEnabled = false;
        ctx.drawImage(img, 0, 0, CANVAS_SIZE, CANVAS_SIZE);
      };
      img.src = frameDataUrl(traj.frames[t]);
      return;
    }
    // vector re-render of the initial scene; later frames fall back to the
    // raster since intermediate SceneDescriptors are not shipped
    if (t === 0) {
      paint(ctx, renderScene(traj.scene, CANVAS_SIZE));
    } else {
      const img = new Image();
      img.onload = () => {
        ctx.imageSmoothingEnabled = false;
        ctx.drawImage(img, 0, 0, CANVAS_SIZE, CANVAS_SIZE);
      };
      img.src = frameDataUrl(traj.frames[t]);
    }
  }

  private renderScenePreview(): void {
    const scene = this.view?.rollout?.scene;
    if (!scene) return;
    const ctx = el<HTMLCanvasElement>("capture-canvas").getContext("2d")!;
    paint(ctx, renderScene(scene, CANVAS_SIZE));
  }

  private tick(): void {
    const now = performance.now();
    if (this.playback?.master.isPlaying) {
      this.playback.master.tick((now - this.lastTick) / 1000);
      el<HTMLInputElement>("scrubber").value = String(this.playback.master.frame);
      this.drawFrames();
    }
    this.lastTick = now;
    requestAnimationFrame(() => this.tick());
  }

  private render(): void {
    if (!this.view) return;
    el<HTMLElement>("phase").textContent = `${this.view.phase} (round ${this.view.round}, ${this.view.status})`;
    el<HTMLElement>("prompt").textContent = this.view.reward_prompt;
    el<HTMLElement>("log").textContent = JSON.stringify(this.view.log, null, 2);
    for (const [sectionId, control] of [
      ["section-verdict", "verdict"],
      ["section-capture", "capture"],
      ["section-feedback", "feedback"],
    ] as const) {
      const enabled = isEnabled(this.view.phase, control);
      el<HTMLElement>(sectionId).classList.toggle("disabled", !enabled);
      el<HTMLElement>(sectionId)
        .querySelectorAll("button,input")
        .forEach((n) => ((n as HTMLButtonElement).disabled = !enabled));
    }
    if (this.dialog && this.view.phase === "awaiting_feedback") {
      el<HTMLElement>("fb-question").textContent = this.dialog.question;
      el<HTMLElement>("fb-verify").style.display = this.dialog.currentStage === "verify" ? "" : "none";
      el<HTMLElement>("fb-relevance").style.display =
        this.dialog.currentStage === "relevance" ? "" : "none";
    }
    if (this.view.rollout && !this.playback) this.setupContrast(this.view.rollout, undefined);
    this.renderScenePreview();
  }

  private note(msg: string): void {
    el<HTMLElement>("notice").textContent = msg;
  }

  private async guard(fn: () => Promise<void>): Promise<void> {
    try {
      await fn();
    } catch (err) {
      this.note(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  }
}

new App().start();
