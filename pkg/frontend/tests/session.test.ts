import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { CanvasSession, MAX_ZOOM } from "../src/session.js";
import { NUM_LANDMARKS } from "../src/types.js";
import { FakeService } from "./fakeService.js";

async function freshSession(): Promise<CanvasSession> {
  const service = new FakeService();
  service.addTask("t1");
  const client = new ApiClient("", service.fetch);
  return new CanvasSession(await client.getTask("t1"), "alice");
}

describe("canvas session", () => {
  it("always holds exactly 60 slots", async () => {
    const session = await freshSession();
    expect(session.landmarks).toHaveLength(NUM_LANDMARKS);
    session.placeAtCanvas([10, 10]);
    session.skip();
    session.undo();
    expect(session.landmarks).toHaveLength(NUM_LANDMARKS);
  });

  it("canvas/image mapping inverts under zoom and pan", async () => {
    const session = await freshSession();
    session.setZoom(4);
    session.panX = 13.5;
    session.panY = -2.25;
    const image: [number, number] = [40.5, 33.25];
    const [x, y] = session.canvasToImage(session.imageToCanvas(image));
    expect(x).toBeCloseTo(image[0], 12);
    expect(y).toBeCloseTo(image[1], 12);
  });

  it("zoom clamps to the 1..8 range", async () => {
    const session = await freshSession();
    session.setZoom(64);
    expect(session.zoom).toBe(MAX_ZOOM);
    session.setZoom(0.01);
    expect(session.zoom).toBe(1);
  });

  it("placement advances in canonical order and wraps", async () => {
    const session = await freshSession();
    expect(session.activeIndex).toBe(0);
    session.placeAtCanvas([5, 5]);
    expect(session.activeIndex).toBe(1);
    session.setActive(NUM_LANDMARKS - 1);
    session.skip();
    expect(session.activeIndex).toBe(0);
  });

  it("undo restores the previous value of drag and skip", async () => {
    const session = await freshSession();
    session.dragTo(5, [12, 14]);
    const placed = session.landmarks[5]!.slice();
    session.dragTo(5, [99, 99]);
    expect(session.undo()).toBe(true);
    expect(session.landmarks[5]).toEqual(placed);
    session.setActive(5);
    session.skip();
    expect(session.landmarks[5]).toBeNull();
    session.undo();
    expect(session.landmarks[5]).toEqual(placed);
    expect(session.undo()).toBe(true); // the original drag
    expect(session.landmarks[5]).toBeNull();
    expect(session.undo()).toBe(false); // history exhausted
  });
});
