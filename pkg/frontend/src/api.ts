/** Typed client for the study server's four endpoints.
 *
 * The wire schema deliberately has no label field anywhere; this client only
 * ever sees video ids, frame images, and per-category question prompts.
 */

export interface SessionVideo {
  video_id: string;
  category: string;
  width: number;
  height: number;
  native_fps: number;
  fps_shown: number;
  frame_count: number;
  prompt: string;
}

export interface SessionDescriptor {
  schema: string;
  session_id: string;
  responder_id: string;
  replay_allowed: boolean;
  videos: SessionVideo[];
  completed: string[];
  complete: boolean;
}

export interface VideoMeta {
  schema: string;
  video_id: string;
  frame_count: number;
  fps: number;
  width: number;
  height: number;
}

export interface SubmitPayload {
  schema: "response/1";
  session_id: string;
  video_id: string;
  responder_id: string;
  response_text: string;
  perceptibility: number;
  fps_shown: number;
  timestamp: number;
}

export interface SubmitResult {
  status: "ok" | "duplicate";
  video_id: string;
}

export class SubmissionError extends Error {
  constructor(message: string, readonly field: string | null, readonly status: number) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudyApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async session(sessionId: string): Promise<SessionDescriptor> {
    const r = await this.fetchFn(this.url(`/session/${encodeURIComponent(sessionId)}`));
    if (!r.ok) throw new Error(`session fetch failed: ${r.status}`);
    return (await r.json()) as SessionDescriptor;
  }

  async meta(videoId: string): Promise<VideoMeta> {
    const r = await this.fetchFn(this.url(`/video/${encodeURIComponent(videoId)}/meta`));
    if (!r.ok) throw new Error(`meta fetch failed: ${r.status}`);
    return (await r.json()) as VideoMeta;
  }

  frameUrl(videoId: string, index: number): string {
    return this.url(`/video/${encodeURIComponent(videoId)}/frame/${index}`);
  }

  async frameBlob(videoId: string, index: number): Promise<Blob> {
    const r = await this.fetchFn(this.frameUrl(videoId, index));
    if (!r.ok) throw new Error(`frame ${index} fetch failed: ${r.status}`);
    return await r.blob();
  }

  /** Fetch every frame up front so playback never stalls on the network. */
  async preloadFrames(videoId: string, frameCount: number, retries = 2): Promise<Blob[]> {
    const out: Blob[] = new Array(frameCount);
    for (let i = 0; i < frameCount; i++) {
      let lastError: unknown = null;
      for (let attempt = 0; attempt <= retries; attempt++) {
        try {
          out[i] = await this.frameBlob(videoId, i);
          lastError = null;
          break;
        } catch (err) {
          lastError = err;
        }
      }
      if (lastError !== null) throw lastError;
    }
    return out;
  }

  async submit(payload: SubmitPayload): Promise<SubmitResult> {
    const r = await this.fetchFn(this.url("/responses"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (r.status === 400) {
      const body = (await r.json()) as { error?: string; field?: string };
      throw new SubmissionError(body.error ?? "rejected", body.field ?? null, 400);
    }
    if (!r.ok) throw new SubmissionError(`submit failed: ${r.status}`, null, r.status);
    return (await r.json()) as SubmitResult;
  }
}
