/**
 * HTML renderers, kept as pure functions from state to markup.
 *
 * Every number and string in the output is traceable to an API
 * response field plus the threshold document; the only client-side
 * logic is the badge and class binning in badges.ts. Pure functions
 * keep the views testable without a browser.
 */

import {
  badgesFor,
  classifyLatency,
  classifySpeed,
  classifySpeedIndex,
  formatAgo,
  formatBytes,
} from "./badges";
import type { InstructionDraft } from "./draft";
import type { PollState } from "./poller";
import type { TrackerState } from "./tracker";
import type {
  CdnPayload,
  DnsPayload,
  FleetRow,
  LatencyPayload,
  MeasurementRecord,
  SpeedtestPayload,
  ThresholdDoc,
  WebPayload,
} from "./types";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

function badge(label: string, cls: string): string {
  return `<span class="badge ${cls}">${escapeHtml(label)}</span>`;
}

function classBadge(cls: string): string {
  return badge(cls.replaceAll("_", " "), `class-${cls}`);
}

/** Error banner shared by panels; shows how old the rendered data is. */
export function renderBanner<T>(state: PollState<T>, what: string): string {
  if (state.error === null) return "";
  const since = state.lastSuccess
    ? `last successful fetch ${state.lastSuccess.toISOString()}`
    : "no successful fetch yet";
  return (
    `<div class="banner error">${escapeHtml(what)} unreachable: ` +
    `${escapeHtml(state.error)} (${since})</div>`
  );
}

export function renderFleet(
  state: PollState<FleetRow[]>,
  doc: ThresholdDoc | null,
  now: Date,
): string {
  const banner = renderBanner(state, "fleet");
  if (state.data === null) {
    return banner || `<p class="loading">loading fleet…</p>`;
  }
  if (state.data.length === 0) {
    return banner + `<p class="empty">no devices have reported yet</p>`;
  }
  const rows = state.data
    .map((row) => {
      const badges = doc ? badgesFor(row, doc) : null;
      const marks = [
        badges?.stale ? badge("stale", "stale") : "",
        badges?.lowBattery ? badge("low battery", "low-battery") : "",
        badges?.dataCapNear ? badge("near data cap", "data-cap") : "",
      ].join("");
      const battery =
        row.battery_pct === null ? "?" : `${escapeHtml(row.battery_pct)}%`;
      return (
        `<tr class="device${row.stale ? " stale" : ""}" ` +
        `data-device-id="${escapeHtml(row.device_id)}">` +
        `<td>${escapeHtml(row.device_id)}</td>` +
        `<td>${escapeHtml(row.operator_name)}</td>` +
        `<td>${escapeHtml(row.connectivity)}</td>` +
        `<td>${battery}</td>` +
        `<td>${escapeHtml(formatBytes(row.data_used_today))}</td>` +
        `<td>${escapeHtml(formatAgo(row.last_seen, now))}</td>` +
        `<td>${marks}</td></tr>`
      );
    })
    .join("");
  return (
    banner +
    `<table class="fleet"><thead><tr>` +
    `<th>device</th><th>operator</th><th>connectivity</th>` +
    `<th>battery</th><th>data today</th><th>last seen</th><th></th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function timeCell(record: MeasurementRecord): string {
  return `<td>${escapeHtml(record.timestamp)}</td>`;
}

function speedtestTable(records: MeasurementRecord[], doc: ThresholdDoc): string {
  const rows = records
    .map((record) => {
      const p = record.payload as unknown as SpeedtestPayload;
      return (
        `<tr>${timeCell(record)}` +
        `<td>${escapeHtml(p.down_mbps.toFixed(2))} ${classBadge(classifySpeed(p.down_mbps, doc))}</td>` +
        `<td>${escapeHtml(p.up_mbps.toFixed(2))}</td>` +
        `<td>${escapeHtml(p.duration_s.toFixed(1))}s</td>` +
        `<td>${escapeHtml(p.note ?? "")}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="records speedtest"><caption>speedtest</caption>` +
    `<thead><tr><th>time</th><th>down Mbps</th><th>up Mbps</th>` +
    `<th>duration</th><th>note</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

function latencyTable(records: MeasurementRecord[], doc: ThresholdDoc): string {
  const rows = records
    .map((record) => {
      const p = record.payload as unknown as LatencyPayload;
      return (
        `<tr>${timeCell(record)}` +
        `<td>${escapeHtml(p.target)}</td>` +
        `<td>${escapeHtml(p.hop_count)}</td>` +
        `<td>${escapeHtml(p.final_avg_rtt_ms.toFixed(1))} ms ${classBadge(classifyLatency(p.final_avg_rtt_ms, doc))}</td>` +
        `<td>${p.complete ? "yes" : "no"}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="records latency"><caption>latency</caption>` +
    `<thead><tr><th>time</th><th>target</th><th>hops</th>` +
    `<th>final rtt</th><th>complete</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

function dnsTable(records: MeasurementRecord[]): string {
  const rows = records
    .map((record) => {
      const p = record.payload as unknown as DnsPayload;
      return (
        `<tr>${timeCell(record)}` +
        `<td>${escapeHtml(p.domain)}</td>` +
        `<td>${escapeHtml(p.resolver_ip)}</td>` +
        `<td>${classBadge(p.resolver_class)}</td>` +
        `<td>${escapeHtml(p.lookup_ms.toFixed(1))} ms</td>` +
        `<td>${p.success ? "ok" : "failed"}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="records dns"><caption>dns</caption>` +
    `<thead><tr><th>time</th><th>domain</th><th>resolver</th>` +
    `<th>class</th><th>lookup</th><th>result</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

function cdnTable(records: MeasurementRecord[]): string {
  const rows = records
    .map((record) => {
      const p = record.payload as unknown as CdnPayload;
      return (
        `<tr>${timeCell(record)}` +
        `<td>${escapeHtml(p.url)}</td>` +
        `<td>${escapeHtml(p.http_status)}</td>` +
        `<td>${classBadge(p.shield_status)}</td>` +
        `<td>${classBadge(p.edge_status)}</td>` +
        `<td>${escapeHtml(p.total_ms.toFixed(1))} ms</td>` +
        `<td>${escapeHtml(formatBytes(p.bytes))}</td>` +
        `<td>${escapeHtml(p.error ?? "")}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="records cdn"><caption>cdn</caption>` +
    `<thead><tr><th>time</th><th>url</th><th>status</th><th>shield</th>` +
    `<th>edge</th><th>total</th><th>bytes</th><th>error</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

function webTable(records: MeasurementRecord[], doc: ThresholdDoc): string {
  const rows = records
    .map((record) => {
      const p = record.payload as unknown as WebPayload;
      const speedIndex =
        p.speed_index_s === undefined || p.speed_index_s === null
          ? ""
          : `${escapeHtml(p.speed_index_s.toFixed(2))}s ` +
            classBadge(classifySpeedIndex(p.speed_index_s, doc));
      return (
        `<tr>${timeCell(record)}` +
        `<td>${escapeHtml(p.url)}</td>` +
        `<td>${escapeHtml(p.dns_ms.toFixed(1))}</td>` +
        `<td>${escapeHtml(p.connect_ms.toFixed(1))}</td>` +
        `<td>${escapeHtml(p.ttfb_ms.toFixed(1))}</td>` +
        `<td>${escapeHtml(p.total_ms.toFixed(1))}</td>` +
        `<td>${speedIndex}</td>` +
        `<td>${escapeHtml(p.failed_phase ?? "")}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="records web"><caption>web</caption>` +
    `<thead><tr><th>time</th><th>url</th><th>dns ms</th><th>connect ms</th>` +
    `<th>ttfb ms</th><th>total ms</th><th>speed index</th><th>failed phase</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function youtubeTable(records: MeasurementRecord[]): string {
  const rows = records
    .map((record) => {
      const samples = record.payload["samples"];
      const count = Array.isArray(samples) ? samples.length : 0;
      return `<tr>${timeCell(record)}<td>${count} samples</td></tr>`;
    })
    .join("");
  return (
    `<table class="records youtube"><caption>youtube playback</caption>` +
    `<thead><tr><th>time</th><th>series</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

const KIND_ORDER = [
  "speedtest",
  "latency",
  "dns",
  "cdn",
  "web",
  "youtube_stats",
] as const;

export function renderDeviceDetail(
  deviceId: string | null,
  state: PollState<MeasurementRecord[]>,
  doc: ThresholdDoc | null,
): string {
  if (deviceId === null) {
    return `<p class="empty">select a device to see its records</p>`;
  }
  const banner = renderBanner(state, `records for ${deviceId}`);
  if (state.data === null) {
    return banner || `<p class="loading">loading records…</p>`;
  }
  if (state.data.length === 0) {
    return (
      banner + `<p class="empty">no records yet for ${escapeHtml(deviceId)}</p>`
    );
  }
  const byKind = new Map<string, MeasurementRecord[]>();
  for (const record of state.data) {
    const bucket = byKind.get(record.experiment_kind) ?? [];
    bucket.push(record);
    byKind.set(record.experiment_kind, bucket);
  }
  const sections: string[] = [];
  for (const kind of KIND_ORDER) {
    const records = byKind.get(kind);
    if (!records || doc === null) continue;
    if (kind === "speedtest") sections.push(speedtestTable(records, doc));
    else if (kind === "latency") sections.push(latencyTable(records, doc));
    else if (kind === "dns") sections.push(dnsTable(records));
    else if (kind === "cdn") sections.push(cdnTable(records));
    else if (kind === "web") sections.push(webTable(records, doc));
    else sections.push(youtubeTable(records));
  }
  return (
    banner +
    `<h2>device ${escapeHtml(deviceId)}</h2>` +
    sections.join("")
  );
}

const PARAM_FIELDS: Record<string, { name: string; type: "text" | "number" }[]> = {
  pause: [{ name: "duration", type: "number" }],
  resume: [],
  run_now: [{ name: "experiment_id", type: "text" }],
  open_tunnel: [
    { name: "host", type: "text" },
    { name: "port", type: "number" },
  ],
  update_config: [
    { name: "key", type: "text" },
    { name: "value", type: "text" },
  ],
};

function renderTracker(tracker: TrackerState): string {
  if (tracker.phase === "idle") return "";
  if (tracker.phase === "error") {
    return `<div class="tracker"><p class="rejection">${escapeHtml(tracker.error)}</p></div>`;
  }
  const current = tracker.instruction?.state ?? "pending";
  const chain = ["pending", "delivered", current === "failed" ? "failed" : "acked"]
    .map((step) =>
      step === current
        ? `<strong class="step current">${step}</strong>`
        : `<span class="step">${step}</span>`,
    )
    .join(" → ");
  const outcome =
    tracker.phase === "done" && tracker.instruction?.outcome !== undefined
      ? `<p class="outcome">outcome: ${escapeHtml(tracker.instruction.outcome)}</p>`
      : "";
  const hint = tracker.hint
    ? `<p class="hint">${escapeHtml(tracker.hint)}</p>`
    : "";
  return `<div class="tracker"><p class="chain">${chain}</p>${outcome}${hint}</div>`;
}

export function renderComposer(
  draft: InstructionDraft,
  problems: string[],
  tracker: TrackerState,
  rejection: string | null,
): string {
  const kindOptions = Object.keys(PARAM_FIELDS)
    .map(
      (kind) =>
        `<option value="${kind}"${kind === draft.kind ? " selected" : ""}>${kind}</option>`,
    )
    .join("");
  const paramInputs = (PARAM_FIELDS[draft.kind] ?? [])
    .map(({ name, type }) => {
      const value = draft.params[name];
      const rendered = value === undefined || value === null ? "" : String(value);
      return (
        `<label>${name} <input name="param-${name}" data-param="${name}" ` +
        `data-type="${type}" type="${type}" value="${escapeHtml(rendered)}"></label>`
      );
    })
    .join("");
  const problemItems = problems
    .map((problem) => `<li>${escapeHtml(problem)}</li>`)
    .join("");
  const problemList = problems.length
    ? `<ul class="problems">${problemItems}</ul>`
    : "";
  const rejectionLine = rejection
    ? `<p class="rejection">${escapeHtml(rejection)}</p>`
    : "";
  const disabled = problems.length ? " disabled" : "";
  return (
    `<form class="composer">` +
    `<label>device <input name="device_id" value="${escapeHtml(draft.device_id)}"></label>` +
    `<label>kind <select name="kind">${kindOptions}</select></label>` +
    paramInputs +
    `<button type="submit"${disabled}>send</button>` +
    problemList +
    rejectionLine +
    `</form>` +
    renderTracker(tracker)
  );
}
