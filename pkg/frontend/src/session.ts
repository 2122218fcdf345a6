import { ApiClient } from "./api.js";
import { CropInfo, Landmarks, NUM_LANDMARKS, Point, TaskDetail } from "./types.js";

export const MAX_ZOOM = 8;
export const MIN_ZOOM = 1;

interface HistoryEntry {
  index: number;
  previous: Point | null;
}

/**
 * Local editing state for one task. Coordinates are kept in original-image
 * pixels as float64 throughout; the canvas mapping never rounds them, so a
 * save/reload round trip is bit-exact.
 */
export class CanvasSession {
  readonly taskId: string;
  readonly crop: CropInfo;
  serverVersion: number;
  landmarks: Landmarks;
  activeIndex = 0;
  zoom = 1;
  panX = 0;
  panY = 0;
  dirty = false;
  private history: HistoryEntry[] = [];

  constructor(task: TaskDetail, labeler: string) {
    this.taskId = task.id;
    this.crop = task.crop;
    this.serverVersion = task.version;
    const existing = task.annotations[labeler];
    this.landmarks = existing
      ? existing.map((p) => (p ? [p[0], p[1]] : null))
      : new Array(NUM_LANDMARKS).fill(null);
    if (this.landmarks.length !== NUM_LANDMARKS) {
      throw new Error(`task ${task.id} has ${this.landmarks.length} slots`);
    }
  }

  /** Image pixel -> displayed canvas position under crop, zoom and pan. */
  imageToCanvas(p: Point): Point {
    const cx = p[0] * this.crop.scale + this.crop.tx;
    const cy = p[1] * this.crop.scale + this.crop.ty;
    return [(cx - this.panX) * this.zoom, (cy - this.panY) * this.zoom];
  }

  /** Displayed canvas position -> image pixel; exact inverse of imageToCanvas. */
  canvasToImage(p: Point): Point {
    const cx = p[0] / this.zoom + this.panX;
    const cy = p[1] / this.zoom + this.panY;
    return [(cx - this.crop.tx) / this.crop.scale, (cy - this.crop.ty) / this.crop.scale];
  }

  setZoom(z: number): void {
    this.zoom = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, z));
  }

  setActive(index: number): void {
    if (index < 0 || index >= NUM_LANDMARKS) {
      throw new Error(`landmark index ${index} out of range`);
    }
    this.activeIndex = index;
  }

  /** Advance to the next slot in canonical order, wrapping at the end. */
  advance(): void {
    this.activeIndex = (this.activeIndex + 1) % NUM_LANDMARKS;
  }

  private set(index: number, value: Point | null): void {
    const prev = this.landmarks[index] ?? null;
    this.history.push({ index, previous: prev ? [prev[0], prev[1]] : null });
    this.landmarks[index] = value;
    this.dirty = true;
  }

  /** Place the active landmark at a canvas position and advance. */
  placeAtCanvas(canvasPos: Point): void {
    this.set(this.activeIndex, this.canvasToImage(canvasPos));
    this.advance();
  }

  /** Move an already placed landmark (drag) without changing the active slot. */
  dragTo(index: number, canvasPos: Point): void {
    this.set(index, this.canvasToImage(canvasPos));
  }

  /** Mark the active slot as visually not present and advance. */
  skip(): void {
    this.set(this.activeIndex, null);
    this.advance();
  }

  undo(): boolean {
    const entry = this.history.pop();
    if (!entry) return false;
    this.landmarks[entry.index] = entry.previous;
    this.dirty = this.history.length > 0;
    return true;
  }

  /**
   * Push local edits to the service. On a version conflict the local state
   * is untouched and the caller should reload the task.
   */
  async save(client: ApiClient, labeler: string): Promise<void> {
    const result = await client.saveAnnotation(
      this.taskId,
      labeler,
      this.serverVersion,
      this.landmarks,
    );
    this.serverVersion = result.version;
    this.history = [];
    this.dirty = false;
  }
}
