/** Session state machine: cursor over the assigned videos, per-video drafts,
 * client-side validation, and at-most-once submission.
 *
 * The idempotency key is (session_id, video_id): the server deduplicates on
 * it, and this controller additionally refuses local re-submission, so a
 * double-click or a retry after a network drop cannot produce two records.
 */

import { SessionDescriptor, SessionVideo, StudyApi, SubmitResult } from "./api.js";

export interface Draft {
  identification: string;
  perceptibility: number | null;
}

export class SessionController {
  private drafts = new Map<string, Draft>();
  private submitted = new Set<string>();
  private cursor_ = 0;

  constructor(
    readonly descriptor: SessionDescriptor,
    private readonly api: StudyApi,
    private readonly now: () => number = () => Math.floor(Date.now() / 1000),
  ) {
    for (const vid of descriptor.completed) this.submitted.add(vid);
    this.advancePastSubmitted();
  }

  get cursor(): number {
    return this.cursor_;
  }

  current(): SessionVideo | null {
    return this.cursor_ < this.descriptor.videos.length
      ? this.descriptor.videos[this.cursor_]
      : null;
  }

  draft(videoId: string): Draft {
    let d = this.drafts.get(videoId);
    if (!d) {
      d = { identification: "", perceptibility: null };
      this.drafts.set(videoId, d);
    }
    return d;
  }

  setDraft(videoId: string, patch: Partial<Draft>): void {
    Object.assign(this.draft(videoId), patch);
  }

  /** Empty array means the draft is submittable. */
  validate(draft: Draft): string[] {
    const problems: string[] = [];
    if (draft.identification.trim().length === 0) {
      problems.push("identification must be non-empty");
    }
    const p = draft.perceptibility;
    if (p === null || !Number.isInteger(p) || p < 1 || p > 5) {
      problems.push("perceptibility must be an integer from 1 to 5");
    }
    return problems;
  }

  isSubmitted(videoId: string): boolean {
    return this.submitted.has(videoId);
  }

  progress(): { done: number; total: number } {
    return { done: this.submitted.size, total: this.descriptor.videos.length };
  }

  isComplete(): boolean {
    return this.submitted.size >= this.descriptor.videos.length;
  }

  private advancePastSubmitted(): void {
    while (
      this.cursor_ < this.descriptor.videos.length &&
      this.submitted.has(this.descriptor.videos[this.cursor_].video_id)
    ) {
      this.cursor_++;
    }
  }

  /** Submit the current video's draft; the draft survives a failed attempt. */
  async submitCurrent(): Promise<SubmitResult> {
    const video = this.current();
    if (!video) throw new Error("session already complete");
    if (this.submitted.has(video.video_id)) throw new Error("video already submitted");
    const draft = this.draft(video.video_id);
    const problems = this.validate(draft);
    if (problems.length > 0) throw new Error(problems.join("; "));

    const result = await this.api.submit({
      schema: "response/1",
      session_id: this.descriptor.session_id,
      video_id: video.video_id,
      responder_id: this.descriptor.responder_id,
      response_text: draft.identification,
      perceptibility: draft.perceptibility as number,
      fps_shown: video.fps_shown,
      timestamp: this.now(),
    });
    // "duplicate" means the server already holds this key; locally done either way
    this.submitted.add(video.video_id);
    this.advancePastSubmitted();
    return result;
  }
}
