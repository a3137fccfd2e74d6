/** Browser bootstrap: canvas playback plus the response form.
 *
 * Query parameters: ?session=<id>[&server=<base-url>]. Defaults to the page's
 * own origin, which is the study server when it serves these files.
 */

import { StudyApi, SessionVideo } from "./api.js";
import { FramePlayer, realClock } from "./player.js";
import { SessionController } from "./session.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function blobsToBitmaps(blobs: Blob[]): Promise<ImageBitmap[]> {
  return Promise.all(blobs.map((b) => createImageBitmap(b)));
}

async function run(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const status = el<HTMLParagraphElement>("status");
  if (!sessionId) {
    status.textContent = "Add ?session=<id> to the URL to begin.";
    return;
  }
  const api = new StudyApi(params.get("server") ?? window.location.origin);
  const controller = new SessionController(await api.session(sessionId), api);

  const canvas = el<HTMLCanvasElement>("stage");
  const maybeCtx = canvas.getContext("2d");
  if (!maybeCtx) throw new Error("canvas 2d context unavailable");
  const ctx: CanvasRenderingContext2D = maybeCtx;
  const prompt = el<HTMLParagraphElement>("prompt");
  const progress = el<HTMLSpanElement>("progress");
  const playBtn = el<HTMLButtonElement>("play");
  const pauseBtn = el<HTMLButtonElement>("pause");
  const submitBtn = el<HTMLButtonElement>("submit");
  const identification = el<HTMLInputElement>("identification");
  const form = el<HTMLFormElement>("response-form");

  let player: FramePlayer<ImageBitmap> | null = null;

  function refreshProgress(): void {
    const p = controller.progress();
    progress.textContent = `${p.done}/${p.total}`;
  }

  async function showCurrent(): Promise<void> {
    refreshProgress();
    const video = controller.current();
    if (!video) {
      status.textContent = `Session complete. Your session code is ${controller.descriptor.session_id}.`;
      playBtn.disabled = pauseBtn.disabled = submitBtn.disabled = true;
      return;
    }
    prompt.textContent = video.prompt;
    canvas.width = video.width;
    canvas.height = video.height;
    status.textContent = "Loading frames...";
    const blobs = await api.preloadFrames(video.video_id, video.frame_count);
    const bitmaps = await blobsToBitmaps(blobs);
    player = new FramePlayer<ImageBitmap>(bitmaps, video.fps_shown, {
      drawFrame: (_i, frame) => ctx.drawImage(frame, 0, 0),
    }, realClock);
    status.textContent = "Ready. Press play; pausing makes the content vanish.";
    identification.value = "";
    form.reset();
  }

  playBtn.addEventListener("click", () => player?.play());
  pauseBtn.addEventListener("click", () => player?.pause());

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const video = controller.current();
    if (!video || !player) return;
    const rating = (form.elements.namedItem("rating") as RadioNodeList | null)?.value ?? "";
    controller.setDraft(video.video_id, {
      identification: identification.value,
      perceptibility: rating ? Number(rating) : null,
    });
    const problems = controller.validate(controller.draft(video.video_id));
    if (problems.length > 0) {
      status.textContent = problems.join("; ");
      return;
    }
    submitBtn.disabled = true;
    try {
      await controller.submitCurrent();
      player.pause();
      await showCurrent();
    } catch (err) {
      status.textContent = `Submission failed, your answer is kept: ${String(err)}`;
    } finally {
      submitBtn.disabled = false;
    }
  });

  await showCurrent();
}

run().catch((err) => {
  const status = document.getElementById("status");
  if (status) status.textContent = String(err);
});
