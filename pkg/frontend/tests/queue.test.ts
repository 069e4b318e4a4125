import { describe, expect, it } from "vitest";

import { RequestQueue } from "../src/queue.js";

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

describe("RequestQueue", () => {
  it("serializes rapid submissions: never more than one in flight", async () => {
    const queue = new RequestQueue();
    let active = 0;
    let maxActive = 0;
    const order: number[] = [];
    const job = (id: number) => async () => {
      active += 1;
      maxActive = Math.max(maxActive, active);
      await sleep(5);
      order.push(id);
      active -= 1;
      return id;
    };
    const results = await Promise.all([
      queue.enqueue(job(0)),
      queue.enqueue(job(1)),
      queue.enqueue(job(2)),
    ]);
    expect(results).toEqual([0, 1, 2]);
    expect(order).toEqual([0, 1, 2]);
    expect(maxActive).toBe(1);
  });

  it("keeps serving after a rejected job", async () => {
    const queue = new RequestQueue();
    await expect(
      queue.enqueue(() => Promise.reject(new Error("boom"))),
    ).rejects.toThrow("boom");
    await expect(queue.enqueue(() => Promise.resolve("ok"))).resolves.toBe(
      "ok",
    );
    expect(queue.pending).toBe(0);
  });
});
