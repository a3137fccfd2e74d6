/** Frame-accurate playback engine.
 *
 * Frames are drawn on a canvas-like target at the assigned frame rate. The
 * schedule is computed against absolute deadlines from the injected clock, so
 * timer lateness never accumulates: frame k is shown once elapsed play time
 * reaches k/fps seconds, and pausing freezes elapsed time exactly (resume
 * never skips or repeats more than one frame relative to the schedule).
 */

export interface DrawTarget<F> {
  drawFrame(index: number, frame: F): void;
}

export interface Clock {
  now(): number; // milliseconds
  schedule(cb: () => void, delayMs: number): unknown;
  cancel(handle: unknown): void;
}

export const realClock: Clock = {
  now: () => Date.now(),
  schedule: (cb, delayMs) => setTimeout(cb, Math.max(0, delayMs)),
  cancel: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export type PlayerState = "idle" | "playing" | "paused" | "ended";

export class FramePlayer<F> {
  private state_: PlayerState = "idle";
  private accumulatedMs = 0; // play time banked across pauses
  private resumeAt = 0; // clock time of the last play()/resume
  private lastDrawn = -1;
  private handle: unknown = null;
  private endResolvers: (() => void)[] = [];

  constructor(
    private readonly frames: F[],
    readonly fps: number,
    private readonly target: DrawTarget<F>,
    private readonly clock: Clock = realClock,
  ) {
    if (fps <= 0) throw new Error("fps must be positive");
    if (frames.length === 0) throw new Error("no frames to play");
  }

  get state(): PlayerState {
    return this.state_;
  }

  get frameCount(): number {
    return this.frames.length;
  }

  /** Nominal clip duration in milliseconds. */
  get durationMs(): number {
    return (this.frames.length * 1000) / this.fps;
  }

  private elapsedMs(): number {
    const live = this.state_ === "playing" ? this.clock.now() - this.resumeAt : 0;
    return this.accumulatedMs + live;
  }

  /** Frame index scheduled at a given elapsed play time. */
  frameIndexAt(elapsedMs: number): number {
    const idx = Math.floor((elapsedMs * this.fps) / 1000);
    return Math.min(this.frames.length - 1, Math.max(0, idx));
  }

  play(): void {
    if (this.state_ === "playing" || this.state_ === "ended") return;
    this.state_ = "playing";
    this.resumeAt = this.clock.now();
    this.tick();
  }

  pause(): void {
    if (this.state_ !== "playing") return;
    this.accumulatedMs += this.clock.now() - this.resumeAt;
    this.state_ = "paused";
    if (this.handle !== null) this.clock.cancel(this.handle);
    this.handle = null;
  }

  /** Resolves when the last frame has been displayed. */
  whenEnded(): Promise<void> {
    if (this.state_ === "ended") return Promise.resolve();
    return new Promise((resolve) => this.endResolvers.push(resolve));
  }

  /** Elapsed play time at which frame k is due. */
  private deadline(k: number): number {
    return (k * 1000) / this.fps;
  }

  private tick(): void {
    if (this.state_ !== "playing") return;
    const elapsed = this.elapsedMs();
    // advance using the same deadline expression the scheduler uses, so a
    // tick landing exactly on its deadline always progresses (no float gap)
    while (this.lastDrawn < this.frames.length - 1 && elapsed >= this.deadline(this.lastDrawn + 1)) {
      this.lastDrawn++;
      this.target.drawFrame(this.lastDrawn, this.frames[this.lastDrawn]);
    }
    if (this.lastDrawn >= this.frames.length - 1 && elapsed >= this.durationMs) {
      this.state_ = "ended";
      this.handle = null;
      const resolvers = this.endResolvers;
      this.endResolvers = [];
      for (const r of resolvers) r();
      return;
    }
    const nextDeadline = this.lastDrawn >= this.frames.length - 1
      ? this.durationMs
      : this.deadline(this.lastDrawn + 1);
    // the 1 ms floor absorbs float undershoot when a wakeup lands a hair
    // before its deadline; frames may show up to 1 ms late, never early
    const delay = Math.max(1, nextDeadline - elapsed);
    this.handle = this.clock.schedule(() => this.tick(), delay);
  }
}
