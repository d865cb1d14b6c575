/**
 * Row badges and measurement class bins, driven by the server's
 * threshold document.
 *
 * Every cut point comes from GET /api/v1/admin/thresholds at runtime,
 * so the badge logic cannot drift from the server's classifiers. The
 * staleness badge uses the server-computed `stale` flag directly; the
 * dashboard never re-derives it from timestamps.
 */

import type { FleetRow, ThresholdDoc } from "./types";

// "Near the cap" is the last eighth of the daily budget: 3.5 GiB of
// the default 4 GiB cap.
export const DATA_CAP_NEAR_FRACTION = 0.875;

export interface Badges {
  stale: boolean;
  lowBattery: boolean;
  dataCapNear: boolean;
}

export function badgesFor(row: FleetRow, doc: ThresholdDoc): Badges {
  return {
    stale: row.stale,
    lowBattery: row.battery_pct !== null && row.battery_pct < doc.battery_floor_pct,
    dataCapNear:
      row.data_used_today >= doc.daily_data_cap_bytes * DATA_CAP_NEAR_FRACTION,
  };
}

export type SpeedClass = "slow" | "average" | "fast";
export type LatencyClass =
  | "exceptional"
  | "good_to_average"
  | "less_desirable"
  | "unclassified";
export type SpeedIndexClass = "fast" | "moderate" | "slow";

export function classifySpeed(mbps: number, doc: ThresholdDoc): SpeedClass {
  if (mbps <= doc.speed_mbps.slow_max) return "slow";
  if (mbps < doc.speed_mbps.fast_min) return "average";
  return "fast";
}

export function classifyLatency(rttMs: number, doc: ThresholdDoc): LatencyClass {
  const t = doc.latency_ms;
  if (rttMs <= t.exceptional_max) return "exceptional";
  if (rttMs >= t.good_min && rttMs <= t.good_max) return "good_to_average";
  if (rttMs >= t.less_desirable_min) return "less_desirable";
  return "unclassified";
}

export function classifySpeedIndex(
  seconds: number,
  doc: ThresholdDoc,
): SpeedIndexClass {
  if (seconds <= doc.speed_index_s.fast_max) return "fast";
  if (seconds >= doc.speed_index_s.slow_min) return "slow";
  return "moderate";
}

/** 1234567 -> "1.2 MB"; data volumes in fleet rows are bytes. */
export function formatBytes(bytes: number): string {
  if (bytes < 1024) return `${bytes} B`;
  const units = ["KiB", "MiB", "GiB", "TiB"];
  let value = bytes;
  let unit = "B";
  for (const next of units) {
    if (value < 1024) break;
    value /= 1024;
    unit = next;
  }
  return `${value.toFixed(value >= 10 ? 0 : 1)} ${unit}`;
}

/** Seconds between two instants, rendered as "3m 20s ago". */
export function formatAgo(thenIso: string, now: Date): string {
  const seconds = Math.max(0, (now.getTime() - Date.parse(thenIso)) / 1000);
  if (seconds < 60) return `${Math.round(seconds)}s ago`;
  const minutes = Math.floor(seconds / 60);
  if (minutes < 60) return `${minutes}m ${Math.round(seconds % 60)}s ago`;
  const hours = Math.floor(minutes / 60);
  return `${hours}h ${minutes % 60}m ago`;
}
