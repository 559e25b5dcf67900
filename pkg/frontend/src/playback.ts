/** Playback state for trajectory animation: play/pause/scrub, and a
 * side-by-side mode locking two panes to one scrubber. Pure logic; the DOM
 * layer subscribes to `onChange`. */

export class Playback {
  private t = 0;
  private playing = false;
  private accumulator = 0;
  private listeners: Array<(t: number, playing: boolean) => void> = [];

  constructor(
    public readonly frameCount: number,
    public fps = 5,
  ) {
    if (frameCount < 1) throw new Error("playback needs at least one frame");
  }

  get frame(): number {
    return this.t;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  onChange(fn: (t: number, playing: boolean) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.t, this.playing);
  }

  play(): void {
    if (this.t >= this.frameCount - 1) this.t = 0; // replay from the start
    this.playing = true;
    this.emit();
  }

  pause(): void {
    this.playing = false;
    this.emit();
  }

  /** Jump to a frame; out-of-range values clamp. Scrubbing pauses. */
  scrub(frame: number): void {
    this.t = Math.min(this.frameCount - 1, Math.max(0, Math.round(frame)));
    this.playing = false;
    this.emit();
  }

  /** Advance by elapsed wall time; stops at the last frame. */
  tick(dtSeconds: number): void {
    if (!this.playing) return;
    this.accumulator += dtSeconds * this.fps;
    while (this.accumulator >= 1 && this.t < this.frameCount - 1) {
      this.accumulator -= 1;
      this.t += 1;
    }
    if (this.t >= this.frameCount - 1) {
      this.playing = false;
      this.accumulator = 0;
    }
    this.emit();
  }
}

/** Side-by-side contrastive playback: one timeline drives both panes (the
 * failed rollout and the counterfactual), each clamped to its own length. */
export class LockedPlayback {
  readonly master: Playback;

  constructor(
    public readonly leftFrames: number,
    public readonly rightFrames: number,
    fps = 5,
  ) {
    this.master = new Playback(Math.max(leftFrames, rightFrames), fps);
  }

  get leftFrame(): number {
    return Math.min(this.master.frame, this.leftFrames - 1);
  }

  get rightFrame(): number {
    return Math.min(this.master.frame, this.rightFrames - 1);
  }
}
