import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { CanvasSession } from "../src/session.js";
import { NUM_LANDMARKS } from "../src/types.js";
import { FakeService } from "./fakeService.js";
import { makePoints } from "./helpers.js";

describe("save/reload round trip", () => {
  it("keeps all 60 coordinates bit-exact through save and reload", async () => {
    const service = new FakeService();
    service.addTask("t1");
    const client = new ApiClient("", service.fetch);

    const task = await client.getTask("t1");
    const session = new CanvasSession(task, "alice");
    const source = makePoints();
    for (let i = 0; i < NUM_LANDMARKS; i++) {
      // drive placement through the canvas mapping, like real clicks do
      session.setActive(i);
      session.placeAtCanvas(session.imageToCanvas(source[i]!));
    }
    expect(session.landmarks).toHaveLength(NUM_LANDMARKS);
    await session.save(client, "alice");

    const reloaded = new CanvasSession(await client.getTask("t1"), "alice");
    expect(reloaded.landmarks).toHaveLength(NUM_LANDMARKS);
    for (let i = 0; i < NUM_LANDMARKS; i++) {
      const before = session.landmarks[i]!;
      const after = reloaded.landmarks[i]!;
      expect(Object.is(before[0], after[0])).toBe(true);
      expect(Object.is(before[1], after[1])).toBe(true);
    }
  });

  it("round trips skipped (null) slots", async () => {
    const service = new FakeService();
    service.addTask("t1");
    const client = new ApiClient("", service.fetch);
    const session = new CanvasSession(await client.getTask("t1"), "alice");

    const source = makePoints();
    for (let i = 0; i < NUM_LANDMARKS; i++) {
      session.setActive(i);
      if (i === 27 || i === 38) session.skip();
      else session.placeAtCanvas(session.imageToCanvas(source[i]!));
    }
    await session.save(client, "alice");

    const reloaded = new CanvasSession(await client.getTask("t1"), "alice");
    expect(reloaded.landmarks[27]).toBeNull();
    expect(reloaded.landmarks[38]).toBeNull();
    expect(reloaded.landmarks[0]).not.toBeNull();
  });

  it("a stale save is rejected and leaves local edits intact", async () => {
    const service = new FakeService();
    service.addTask("t1");
    const client = new ApiClient("", service.fetch);

    const task = await client.getTask("t1");
    const mine = new CanvasSession(task, "alice");
    const theirs = new CanvasSession(task, "bob");
    theirs.dragTo(0, [1, 1]);
    await theirs.save(client, "bob"); // bumps the server version

    mine.dragTo(0, [5, 5]);
    const edited = mine.landmarks[0]!.slice();
    await expect(mine.save(client, "alice")).rejects.toMatchObject({
      name: "ConflictError",
    });
    expect(mine.landmarks[0]).toEqual(edited);
    expect(mine.dirty).toBe(true);
  });
});
