import { describe, expect, it } from "vitest";
import { SessionDescriptor, StudyApi, SubmitPayload, SubmitResult } from "../src/api.js";
import { SessionController } from "../src/session.js";

function descriptor(videoIds: string[], completed: string[] = []): SessionDescriptor {
  return {
    schema: "session/1",
    session_id: "s1",
    responder_id: "tester",
    replay_allowed: true,
    videos: videoIds.map((id) => ({
      video_id: id,
      category: "text",
      width: 64,
      height: 64,
      native_fps: 10,
      fps_shown: 10,
      frame_count: 12,
      prompt: "What do you see?",
    })),
    completed,
    complete: false,
  };
}

function stubApi(behavior: (p: SubmitPayload) => SubmitResult | Error) {
  const submissions: SubmitPayload[] = [];
  const api = {
    async submit(payload: SubmitPayload): Promise<SubmitResult> {
      const result = behavior(payload);
      if (result instanceof Error) throw result;
      submissions.push(payload);
      return result;
    },
  } as unknown as StudyApi;
  return { api, submissions };
}

describe("SessionController", () => {
  it("validates identification and rating ranges", () => {
    const { api } = stubApi((p) => ({ status: "ok", video_id: p.video_id }));
    const c = new SessionController(descriptor(["v1"]), api);
    expect(c.validate({ identification: "", perceptibility: 3 })).toHaveLength(1);
    expect(c.validate({ identification: "circle", perceptibility: null })).toHaveLength(1);
    expect(c.validate({ identification: "circle", perceptibility: 0 })).toHaveLength(1);
    expect(c.validate({ identification: "circle", perceptibility: 6 })).toHaveLength(1);
    expect(c.validate({ identification: "circle", perceptibility: 2.5 })).toHaveLength(1);
    expect(c.validate({ identification: "circle", perceptibility: 5 })).toHaveLength(0);
  });

  it("refuses to submit an invalid draft", async () => {
    const { api, submissions } = stubApi((p) => ({ status: "ok", video_id: p.video_id }));
    const c = new SessionController(descriptor(["v1"]), api);
    c.setDraft("v1", { identification: "", perceptibility: 6 });
    await expect(c.submitCurrent()).rejects.toThrow();
    expect(submissions).toHaveLength(0);
    expect(c.cursor).toBe(0);
  });

  it("advances the cursor and blocks double submission", async () => {
    const { api, submissions } = stubApi((p) => ({ status: "ok", video_id: p.video_id }));
    const c = new SessionController(descriptor(["v1", "v2"]), api);
    c.setDraft("v1", { identification: "gold", perceptibility: 4 });
    const result = await c.submitCurrent();
    expect(result.status).toBe("ok");
    expect(c.cursor).toBe(1);
    expect(c.isSubmitted("v1")).toBe(true);
    expect(submissions[0]).toMatchObject({
      session_id: "s1",
      video_id: "v1",
      responder_id: "tester",
      response_text: "gold",
      perceptibility: 4,
      fps_shown: 10,
    });
    expect(c.progress()).toEqual({ done: 1, total: 2 });
  });

  it("keeps the draft when the server rejects", async () => {
    const { api } = stubApi(() => new Error("network down"));
    const c = new SessionController(descriptor(["v1"]), api);
    c.setDraft("v1", { identification: "rain", perceptibility: 5 });
    await expect(c.submitCurrent()).rejects.toThrow("network down");
    expect(c.cursor).toBe(0);
    expect(c.isSubmitted("v1")).toBe(false);
    expect(c.draft("v1")).toEqual({ identification: "rain", perceptibility: 5 });
  });

  it("treats a server-side duplicate as done", async () => {
    const { api } = stubApi((p) => ({ status: "duplicate", video_id: p.video_id }));
    const c = new SessionController(descriptor(["v1"]), api);
    c.setDraft("v1", { identification: "x", perceptibility: 1 });
    const result = await c.submitCurrent();
    expect(result.status).toBe("duplicate");
    expect(c.isComplete()).toBe(true);
  });

  it("skips videos already completed in a resumed session", () => {
    const { api } = stubApi((p) => ({ status: "ok", video_id: p.video_id }));
    const c = new SessionController(descriptor(["v1", "v2", "v3"], ["v1", "v2"]), api);
    expect(c.cursor).toBe(2);
    expect(c.progress()).toEqual({ done: 2, total: 3 });
  });
});
