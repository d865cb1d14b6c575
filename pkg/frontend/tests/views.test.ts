import { describe, expect, it } from "vitest";

import { emptyDraft } from "../src/draft";
import type { PollState } from "../src/poller";
import type { TrackerState } from "../src/tracker";
import {
  escapeHtml,
  renderComposer,
  renderDeviceDetail,
  renderFleet,
} from "../src/views";
import type { FleetRow, MeasurementRecord } from "../src/types";
import { DOC, fleetRow, record } from "./fixtures";

const NOW = new Date("2024-01-01T00:05:00Z");

function ok<T>(data: T): PollState<T> {
  return { data, lastSuccess: NOW, error: null, ticks: 1 };
}

const IDLE: TrackerState = {
  instruction: null,
  phase: "idle",
  error: null,
  polls: 0,
  hint: null,
};

describe("renderFleet", () => {
  it("shows an empty-state message for an empty fleet", () => {
    const html = renderFleet(ok<FleetRow[]>([]), DOC, NOW);
    expect(html).toContain("no devices have reported yet");
  });

  it("flags stale rows and badges them", () => {
    const html = renderFleet(
      ok([fleetRow({ device_id: "a" }), fleetRow({ device_id: "b", stale: true })]),
      DOC,
      NOW,
    );
    expect(html).toContain('<tr class="device" data-device-id="a">');
    expect(html).toContain('<tr class="device stale" data-device-id="b">');
    expect(html).toContain('class="badge stale"');
  });

  it("badges low battery and near-cap data from thresholds", () => {
    const html = renderFleet(
      ok([
        fleetRow({ battery_pct: 10, data_used_today: 3.6 * 2 ** 30 }),
      ]),
      DOC,
      NOW,
    );
    expect(html).toContain("low battery");
    expect(html).toContain("near data cap");
  });

  it("keeps the stale grid under an error banner with the last-success stamp", () => {
    const state: PollState<FleetRow[]> = {
      data: [fleetRow({ device_id: "kept" })],
      lastSuccess: NOW,
      error: "fetch failed",
      ticks: 4,
    };
    const html = renderFleet(state, DOC, NOW);
    expect(html).toContain("fleet unreachable: fetch failed");
    expect(html).toContain("2024-01-01T00:05:00.000Z");
    expect(html).toContain('data-device-id="kept"'); // prior grid retained
  });

  it("reports unreachable with no stamp before any success", () => {
    const state: PollState<FleetRow[]> = {
      data: null,
      lastSuccess: null,
      error: "connection refused",
      ticks: 1,
    };
    const html = renderFleet(state, DOC, NOW);
    expect(html).toContain("no successful fetch yet");
  });
});

describe("renderDeviceDetail", () => {
  it("renders one table per kind with class badges", () => {
    const records: MeasurementRecord[] = [
      record("speedtest", {
        down_mbps: 42.0,
        up_mbps: 8.0,
        bytes_down: 1,
        bytes_up: 1,
        duration_s: 10.0,
      }),
      record("latency", {
        target: "edge-a",
        hop_count: 3,
        final_avg_rtt_ms: 62.0,
        complete: true,
      }),
      record("dns", {
        domain: "news.example",
        resolver_ip: "8.8.8.8",
        resolver_class: "google",
        lookup_ms: 41.0,
        success: true,
      }),
      record("cdn", {
        url: "http://cdn/x",
        cdn_name: "edge",
        http_status: 200,
        shield_status: "miss",
        edge_status: "hit",
        total_ms: 80.0,
        bytes: 90_000,
      }),
      record("web", {
        url: "http://site/",
        dns_ms: 40.0,
        connect_ms: 20.0,
        ttfb_ms: 60.0,
        total_ms: 900.0,
        speed_index_s: 2.8,
      }),
    ];
    const html = renderDeviceDetail("phone-01", ok(records), DOC);
    expect(html).toContain("<caption>speedtest</caption>");
    expect(html).toContain("<caption>latency</caption>");
    expect(html).toContain("<caption>dns</caption>");
    expect(html).toContain("<caption>cdn</caption>");
    expect(html).toContain("<caption>web</caption>");
    expect(html).toContain("badge class-fast"); // 42 Mbps
    expect(html).toContain("badge class-good_to_average"); // 62 ms
    expect(html).toContain("badge class-hit");
    expect(html).toContain("badge class-miss");
    expect(html).toContain("badge class-google");
  });

  it("shows an empty state for a device without records", () => {
    const html = renderDeviceDetail("phone-09", ok<MeasurementRecord[]>([]), DOC);
    expect(html).toContain("no records yet for phone-09");
  });

  it("prompts for a selection when no device is chosen", () => {
    const html = renderDeviceDetail(
      null,
      { data: null, lastSuccess: null, error: null, ticks: 0 },
      DOC,
    );
    expect(html).toContain("select a device");
  });
});

describe("renderComposer", () => {
  it("disables submit while the draft is invalid and lists the problems", () => {
    const draft = { ...emptyDraft(), device_id: "phone-01" };
    const problems = ["instruction.params.duration: required for kind pause"];
    const html = renderComposer(draft, problems, IDLE, null);
    expect(html).toContain("<button type=\"submit\" disabled>");
    expect(html).toContain("required for kind pause");
  });

  it("enables submit once the draft is valid", () => {
    const draft = {
      device_id: "phone-01",
      kind: "pause" as const,
      params: { duration: 900 },
    };
    const html = renderComposer(draft, [], IDLE, null);
    expect(html).toContain("<button type=\"submit\">");
  });

  it("shows a server rejection verbatim, escaped", () => {
    const html = renderComposer(
      emptyDraft(),
      [],
      IDLE,
      'instruction.params.duration: must be a positive <number> of seconds',
    );
    expect(html).toContain(
      "instruction.params.duration: must be a positive &lt;number&gt; of seconds",
    );
  });

  it("walks the lifecycle chain and shows the outcome detail", () => {
    const done: TrackerState = {
      instruction: {
        id: "i-1",
        device_id: "phone-01",
        created_at: "2024-01-01T00:00:00Z",
        kind: "pause",
        params: { duration: 900 },
        state: "acked",
        outcome: "paused until 2024-01-01T00:15:00+00:00",
      },
      phase: "done",
      error: null,
      polls: 2,
      hint: null,
    };
    const html = renderComposer(emptyDraft(), [], done, null);
    expect(html).toContain('<strong class="step current">acked</strong>');
    expect(html).toContain("outcome: paused until 2024-01-01T00:15:00+00:00");
  });

  it("hints when an instruction stays pending", () => {
    const waiting: TrackerState = {
      instruction: {
        id: "i-2",
        device_id: "ghost-99",
        created_at: "2024-01-01T00:00:00Z",
        kind: "pause",
        params: { duration: 900 },
        state: "pending",
      },
      phase: "waiting",
      error: null,
      polls: 5,
      hint: "still pending: the device has not fetched it yet",
    };
    const html = renderComposer(emptyDraft(), [], waiting, null);
    expect(html).toContain('<strong class="step current">pending</strong>');
    expect(html).toContain("still pending");
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup in interpolated values", () => {
    expect(escapeHtml('<img src=x onerror="pwn()">')).toBe(
      "&lt;img src=x onerror=&quot;pwn()&quot;&gt;",
    );
  });
});
