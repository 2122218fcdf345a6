import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildDisagreementOverlay } from "../src/overlay.js";
import { FakeService } from "./fakeService.js";
import { makePoints } from "./helpers.js";

describe("disagreement overlay", () => {
  it("shows exactly the indices the service flags at 2 px", async () => {
    const a = makePoints();
    const b = makePoints();
    b[3] = [a[3]![0] + 3, a[3]![1] + 4]; // 5 px apart: flagged
    b[7] = [a[7]![0] + 2, a[7]![1]]; // exactly 2 px: not flagged (strict >)
    b[11] = [a[11]![0], a[11]![1] + 2.0000001]; // just past: flagged
    b[9] = null; // presence mismatch, not a distance flag

    const service = new FakeService();
    service.addTask("t1", { alice: a, bob: b });
    const client = new ApiClient("", service.fetch);

    const report = await client.getDisagreements("t1", 2);
    expect(report.flagged).toEqual([3, 11]);
    expect(report.presence_mismatches).toEqual([9]);

    const items = buildDisagreementOverlay(report, a, b);
    expect(items.map((i) => i.index)).toEqual(report.flagged);
    expect(items[0]!.distance).toBeCloseTo(5, 12);
    expect(items[0]!.a).toEqual(a[3]);
    expect(items[0]!.b).toEqual(b[3]);
  });

  it("merge is rejected while flagged and allowed once corrected", async () => {
    const a = makePoints();
    const b = makePoints();
    b[3] = [a[3]![0] + 5, a[3]![1]];

    const service = new FakeService();
    service.addTask("t1", { alice: a, bob: b });
    const client = new ApiClient("", service.fetch);

    let task = await client.getTask("t1");
    expect(task.status).toBe("flagged");
    await expect(client.merge("t1", task.version)).rejects.toMatchObject({
      name: "ConflictError",
    });

    const saved = await client.saveAnnotation("t1", "bob", task.version, a);
    expect(saved.status).toBe("double-labeled");
    const merged = await client.merge("t1", saved.version);
    expect(merged.status).toBe("merged");
  });
});
