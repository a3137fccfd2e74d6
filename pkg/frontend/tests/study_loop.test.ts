/** End-to-end study loop against the real backend.
 *
 * Generates a 6-video dataset, starts the study server, then drives a full
 * scripted session through the production client classes: plays every clip at
 * its assigned rate within +-10% of nominal duration, demonstrates the pause
 * freeze, blocks invalid ratings client- and server-side, submits exactly one
 * record per video, verifies no label ever crosses the wire, and finally runs
 * the scorer and checks it against the hand count.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { StudyApi, SubmissionError } from "../src/api.js";
import { FramePlayer } from "../src/player.js";
import { SessionController } from "../src/session.js";

const LABELS = ["gold", "rain", "mind", "circle", "rectangle", "triangle"];
const FPS = 10;
const FRAMES = 12;

let workDir: string;
let serverProc: ChildProcess | null = null;
let baseUrl = "";
const wireResponses: string[] = [];

function runCli(args: string[]): { status: number | null; stdout: string; stderr: string } {
  const r = spawnSync("python3", ["-m", "temporalnoise.cli", ...args], {
    encoding: "utf-8",
    cwd: workDir,
  });
  return { status: r.status, stdout: r.stdout ?? "", stderr: r.stderr ?? "" };
}

/** fetch wrapper that archives every response body for the anonymity check */
const recordingFetch = async (input: string, init?: RequestInit): Promise<Response> => {
  const response = await fetch(input, init);
  const copy = response.clone();
  const bytes = Buffer.from(await copy.arrayBuffer());
  wireResponses.push(bytes.toString("latin1"));
  return response;
};

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "study-loop-"));
  const spec = {
    schema: "genspec/1",
    defaults: { width: 64, height: 64, fps: FPS, duration_s: FRAMES / FPS, block_size: 1 },
    entries: [
      { category: "text", labels: ["gold"], video_id: "v_t1",
        source: { type: "text", text: "GOLD", scale: 1 }, params: { seed: 1 } },
      { category: "text", labels: ["rain"], video_id: "v_t2",
        source: { type: "text", text: "RAIN", scale: 1 }, params: { seed: 2 } },
      { category: "text", labels: ["mind"], video_id: "v_t3",
        source: { type: "text", text: "MIND", scale: 1 }, params: { seed: 3 } },
      { category: "shapes", labels: ["circle"], video_id: "v_s1",
        source: { type: "shape", kind: "circle", center: [32, 32], radius: 14 },
        params: { seed: 4 } },
      { category: "shapes", labels: ["rectangle"], video_id: "v_s2",
        source: { type: "shape", kind: "rectangle", corner: [14, 18], size: [36, 24] },
        params: { seed: 5 } },
      { category: "shapes", labels: ["triangle"], video_id: "v_s3",
        source: { type: "shape", kind: "polygon", vertices: [[32, 10], [54, 50], [10, 50]] },
        params: { seed: 6 } },
    ],
  };
  writeFileSync(join(workDir, "spec.json"), JSON.stringify(spec));
  const gen = runCli(["gen", "batch", "spec.json", "--out", "data"]);
  expect(gen.status, gen.stderr).toBe(0);

  writeFileSync(join(workDir, "sessions.json"), JSON.stringify({
    schema: "sessions/1",
    sessions: [{ session_id: "s1", responder_id: "tester", video_ids: "all",
                 shuffle_seed: 7, fps_shown: FPS }],
  }));

  serverProc = spawn("python3", ["-m", "temporalnoise.cli", "serve",
    "--manifest", join(workDir, "data", "manifest.json"),
    "--sessions", join(workDir, "sessions.json"),
    "--log", join(workDir, "responses.ndjson"),
    "--port", "0"], { cwd: workDir });

  baseUrl = await new Promise<string>((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error(`server did not start: ${buffer}`)), 20000);
    serverProc!.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const m = buffer.match(/study server on (http:\/\/[\d.]+:\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve(m[1]);
      }
    });
    serverProc!.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    serverProc!.on("exit", (code) => reject(new Error(`server exited ${code}: ${buffer}`)));
  });
}, 60000);

afterAll(() => {
  serverProc?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("scripted study session", () => {
  it("plays, validates, submits once per video, leaks no labels, scores exactly", async () => {
    const api = new StudyApi(baseUrl, recordingFetch);
    const controller = new SessionController(await api.session("s1"), api);
    expect(controller.descriptor.videos).toHaveLength(6);

    // experimenter-side answer key, read from disk (never from the wire)
    const manifest = JSON.parse(
      readFileSync(join(workDir, "data", "manifest.json"), "utf-8"));
    const answerById = new Map<string, string>(
      manifest.entries.map((e: { video_id: string; labels: string[] }) =>
        [e.video_id, e.labels[0]]));
    const wrongOnes = new Set(["v_t3", "v_s3"]); // hand count: 4/6, text 2/3, shapes 2/3

    // server-side rejection: an out-of-range rating must not reach the log
    const firstVideo = controller.descriptor.videos[0];
    await expect(api.submit({
      schema: "response/1", session_id: "s1", video_id: firstVideo.video_id,
      responder_id: "tester", response_text: "whatever", perceptibility: 6,
      fps_shown: FPS, timestamp: 1,
    })).rejects.toThrowError(SubmissionError);

    let pausedOnce = false;
    while (!controller.isComplete()) {
      const video = controller.current()!;
      const blobs = await api.preloadFrames(video.video_id, video.frame_count);
      expect(blobs).toHaveLength(FRAMES);

      const drawn: number[] = [];
      const player = new FramePlayer(blobs, video.fps_shown, {
        drawFrame: (i) => drawn.push(i),
      });
      const nominal = player.durationMs;
      const t0 = Date.now();
      player.play();
      if (!pausedOnce) {
        // pause demo on the first clip: playback freezes, then resumes cleanly
        await new Promise((r) => setTimeout(r, 350));
        player.pause();
        const frozen = drawn.length;
        await new Promise((r) => setTimeout(r, 250));
        expect(drawn.length).toBe(frozen);
        player.play();
        pausedOnce = true;
        await player.whenEnded();
      } else {
        await player.whenEnded();
        const wall = Date.now() - t0;
        expect(Math.abs(wall - nominal)).toBeLessThanOrEqual(0.1 * nominal);
      }
      expect(drawn).toEqual(Array.from({ length: FRAMES }, (_v, i) => i));

      // client-side gate: invalid ratings never reach the server
      controller.setDraft(video.video_id, { identification: "draft", perceptibility: 6 });
      await expect(controller.submitCurrent()).rejects.toThrow(/perceptibility/);

      const answer = wrongOnes.has(video.video_id)
        ? "no idea"
        : (answerById.get(video.video_id) as string);
      controller.setDraft(video.video_id, { identification: answer, perceptibility: 4 });
      const result = await controller.submitCurrent();
      expect(result.status).toBe("ok");

      // a retry of the same key is acknowledged but appends nothing
      const dup = await api.submit({
        schema: "response/1", session_id: "s1", video_id: video.video_id,
        responder_id: "tester", response_text: answer, perceptibility: 4,
        fps_shown: FPS, timestamp: 2,
      });
      expect(dup.status).toBe("duplicate");
    }

    // exactly one record per video in the log
    const log = readFileSync(join(workDir, "responses.ndjson"), "utf-8")
      .trim().split("\n");
    expect(log).toHaveLength(6);
    const loggedIds = log.map((l) => JSON.parse(l).video_id).sort();
    expect(loggedIds).toEqual(
      controller.descriptor.videos.map((v) => v.video_id).sort());

    // no ground-truth label ever crossed the wire in any server response
    const wire = wireResponses.join("\n").toLowerCase();
    for (const label of LABELS) {
      expect(wire.includes(label), `label ${label} leaked`).toBe(false);
    }

    // the scorer reproduces the hand count exactly
    const evalRun = runCli(["evaluate",
      "--manifest", join(workDir, "data", "manifest.json"),
      "--responses", join(workDir, "responses.ndjson")]);
    expect(evalRun.status, evalRun.stderr).toBe(0);
    expect(evalRun.stdout).toContain("overall: 4/6 = 0.6667");
    expect(evalRun.stdout).toContain("text: 2/3");
    expect(evalRun.stdout).toContain("shapes: 2/3");
  }, 120000);
});
