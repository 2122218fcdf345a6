import { ApiClient, ConflictError } from "./api.js";
import { buildDisagreementOverlay, nosePreview } from "./overlay.js";
import { CanvasSession } from "./session.js";
import { Landmarks, NUM_LANDMARKS, TaskDetail } from "./types.js";

const LANDMARK_RADIUS = 3;

function drawLandmarks(
  ctx: CanvasRenderingContext2D,
  session: CanvasSession,
  points: Landmarks,
  color: string,
): void {
  ctx.fillStyle = color;
  for (let i = 0; i < NUM_LANDMARKS; i++) {
    const p = points[i];
    if (!p) continue;
    const [x, y] = session.imageToCanvas(p);
    ctx.beginPath();
    ctx.arc(x, y, i === session.activeIndex ? LANDMARK_RADIUS + 2 : LANDMARK_RADIUS, 0, 2 * Math.PI);
    ctx.fill();
  }
}

async function render(
  ctx: CanvasRenderingContext2D,
  client: ApiClient,
  session: CanvasSession,
  task: TaskDetail,
  image: HTMLImageElement,
): Promise<void> {
  const size = task.crop.canvas * session.zoom;
  ctx.canvas.width = size;
  ctx.canvas.height = size;
  ctx.imageSmoothingEnabled = session.zoom < 2;
  ctx.drawImage(
    image,
    -session.panX * session.zoom,
    -session.panY * session.zoom,
    task.crop.canvas * session.zoom,
    task.crop.canvas * session.zoom,
  );
  drawLandmarks(ctx, session, session.landmarks, "#d22");

  const labelers = Object.keys(task.annotations);
  if (labelers.length >= 2 && task.status === "flagged") {
    const report = await client.getDisagreements(task.id);
    const a = task.annotations[labelers[0]!]!;
    const b = task.annotations[labelers[1]!]!;
    ctx.strokeStyle = "#f80";
    for (const item of buildDisagreementOverlay(report, a, b)) {
      const [ax, ay] = session.imageToCanvas(item.a);
      const [bx, by] = session.imageToCanvas(item.b);
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
    }
  }

  const ghost = nosePreview(session.landmarks);
  if (ghost) {
    const [x, y] = session.imageToCanvas(ghost);
    ctx.strokeStyle = "#2a2";
    ctx.beginPath();
    ctx.arc(x, y, LANDMARK_RADIUS, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export async function boot(root: HTMLElement, base = ""): Promise<void> {
  const client = new ApiClient(base);
  const labeler =
    new URLSearchParams(window.location.search).get("labeler") ?? "labeler-a";

  const canvas = document.createElement("canvas");
  const status = document.createElement("div");
  root.append(status, canvas);
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");

  const tasks = await client.listTasks();
  const open = tasks.find((t) => t.status !== "completed") ?? tasks[0];
  if (!open) {
    status.textContent = "no tasks";
    return;
  }
  let task = await client.getTask(open.id);
  let session = new CanvasSession(task, labeler);

  const image = new Image();
  image.src = client.imageUrl(task.id);
  await image.decode();

  const repaint = () => {
    status.textContent =
      `task ${task.id} [${task.status}] v${task.version} ` +
      `slot ${session.activeIndex} zoom ${session.zoom}x` +
      (session.dirty ? " *" : "");
    void render(ctx, client, session, task, image);
  };

  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    session.placeAtCanvas([ev.clientX - rect.left, ev.clientY - rect.top]);
    repaint();
  });

  window.addEventListener("keydown", async (ev) => {
    if (ev.key === "n") session.advance();
    else if (ev.key === "x") session.skip();
    else if (ev.key === "u") session.undo();
    else if (ev.key === "+") session.setZoom(session.zoom * 2);
    else if (ev.key === "-") session.setZoom(session.zoom / 2);
    else if (ev.key === "s") {
      try {
        await session.save(client, labeler);
        task = await client.getTask(task.id);
      } catch (err) {
        if (err instanceof ConflictError) {
          status.textContent = `save conflict: ${err.detail}; reload the task`;
          return;
        }
        throw err;
      }
    } else return;
    repaint();
  });

  repaint();
}
