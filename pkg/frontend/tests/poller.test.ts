import { describe, expect, it } from "vitest";

import { Poller } from "../src/poller";
import type { PollState } from "../src/poller";

describe("Poller", () => {
  it("keeps stale data and the last-success stamp across failures", async () => {
    let healthy = true;
    const seen: PollState<string>[] = [];
    const poller = new Poller(
      async () => {
        if (!healthy) throw new Error("connection refused");
        return "snapshot-1";
      },
      60_000,
      (state) => seen.push(state),
    );

    await poller.refresh();
    expect(poller.snapshot().data).toBe("snapshot-1");
    expect(poller.snapshot().error).toBeNull();
    const stamp = poller.snapshot().lastSuccess;
    expect(stamp).not.toBeNull();

    healthy = false;
    await poller.refresh();
    const after = poller.snapshot();
    expect(after.data).toBe("snapshot-1"); // retained
    expect(after.error).toBe("connection refused");
    expect(after.lastSuccess).toBe(stamp); // unchanged

    healthy = true;
    await poller.refresh();
    expect(poller.snapshot().error).toBeNull();
    expect(seen).toHaveLength(3);
  });

  it("reports the failure even before any success", async () => {
    const poller = new Poller<string>(
      async () => {
        throw new Error("boom");
      },
      60_000,
      () => {},
    );
    await poller.refresh();
    expect(poller.snapshot().data).toBeNull();
    expect(poller.snapshot().lastSuccess).toBeNull();
    expect(poller.snapshot().error).toBe("boom");
  });

  it("allows only one fetch in flight", async () => {
    let active = 0;
    let peak = 0;
    const poller = new Poller(
      async () => {
        active += 1;
        peak = Math.max(peak, active);
        await new Promise((resolve) => setTimeout(resolve, 20));
        active -= 1;
        return "ok";
      },
      60_000,
      () => {},
    );
    await Promise.all([poller.refresh(), poller.refresh(), poller.refresh()]);
    expect(peak).toBe(1);
  });

  it("polls on the given interval after start", async () => {
    let calls = 0;
    const poller = new Poller(
      async () => {
        calls += 1;
        return calls;
      },
      25,
      () => {},
    );
    poller.start();
    await new Promise((resolve) => setTimeout(resolve, 120));
    poller.stop();
    const total = calls;
    expect(total).toBeGreaterThanOrEqual(3); // immediate + interval ticks
    await new Promise((resolve) => setTimeout(resolve, 60));
    expect(calls).toBe(total); // stop() actually stops
  });
});
