import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { nosePreview } from "../src/overlay.js";
import { FakeService } from "./fakeService.js";
import { EXPECTED_NOSE, NOSELESS_FACE } from "./noseOracle.js";

describe("nose completion preview", () => {
  it("matches the backend's completion output bit for bit", () => {
    // EXPECTED_NOSE was produced by the backend's complete_nose on this face
    const ghost = nosePreview(NOSELESS_FACE);
    expect(ghost).not.toBeNull();
    expect(Object.is(ghost![0], EXPECTED_NOSE[0])).toBe(true);
    expect(Object.is(ghost![1], EXPECTED_NOSE[1])).toBe(true);
  });

  it("matches what the service stores for a nose-only-missing task", async () => {
    const service = new FakeService();
    service.addTask("t1", { alice: NOSELESS_FACE, bob: NOSELESS_FACE });
    const client = new ApiClient("", service.fetch);

    const task = await client.getTask("t1");
    const merged = await client.merge("t1", task.version);
    const done = await client.complete("t1", merged.version);

    const ghost = nosePreview(NOSELESS_FACE)!;
    expect(done.completed[27]).toEqual([ghost[0], ghost[1]]);
    expect(done.status).toBe("completed");
  });

  it("renders no ghost when the nose is already placed or eyes are missing", () => {
    const placed = NOSELESS_FACE.map((p) => p && ([p[0], p[1]] as [number, number]));
    placed[27] = [50, 60];
    expect(nosePreview(placed)).toBeNull();

    const eyeless = NOSELESS_FACE.map((p) => p && ([p[0], p[1]] as [number, number]));
    eyeless[30] = null;
    expect(nosePreview(eyeless)).toBeNull();
  });
});
