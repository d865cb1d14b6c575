/**
 * Wire types for the control server's JSON API.
 *
 * Mirrors of the server's serialization, field for field. Optional
 * server fields arrive as null or are omitted; both read as undefined
 * or null here. Nothing in the dashboard invents values that are not
 * in one of these payloads.
 */

export type Connectivity = "mobile" | "wifi" | "none";

export interface FleetRow {
  device_id: string;
  last_seen: string;
  battery_pct: number | null;
  connectivity: Connectivity;
  operator_name: string;
  data_used_today: number;
  stale: boolean;
}

export interface ThresholdDoc {
  speed_mbps: { slow_max: number; fast_min: number };
  latency_ms: {
    exceptional_max: number;
    good_min: number;
    good_max: number;
    less_desirable_min: number;
  };
  speed_index_s: { fast_max: number; slow_min: number };
  battery_floor_pct: number;
  daily_data_cap_bytes: number;
  report_interval_s: number;
  stale_after_s: number;
}

export type ExperimentKind =
  | "speedtest"
  | "latency"
  | "dns"
  | "cdn"
  | "web"
  | "youtube_stats";

export interface SpeedtestPayload {
  down_mbps: number;
  up_mbps: number;
  bytes_down: number;
  bytes_up: number;
  duration_s: number;
  note?: string;
}

export interface LatencyPayload {
  target: string;
  hop_count: number;
  final_avg_rtt_ms: number;
  complete: boolean;
}

export interface DnsPayload {
  domain: string;
  resolver_ip: string;
  resolver_class: "google" | "operator_local";
  lookup_ms: number;
  success: boolean;
}

export interface CdnPayload {
  url: string;
  cdn_name: string;
  http_status: number;
  shield_status: "hit" | "miss" | "unknown";
  edge_status: "hit" | "miss" | "unknown";
  total_ms: number;
  bytes: number;
  error?: string;
}

export interface WebPayload {
  url: string;
  dns_ms: number;
  connect_ms: number;
  ttfb_ms: number;
  total_ms: number;
  bytes: number;
  speed_index_s?: number;
  failed_phase?: string;
}

export interface MeasurementRecord {
  record_id: string;
  device_id: string;
  network_id: string;
  experiment_kind: ExperimentKind;
  timestamp: string;
  payload: Record<string, unknown>;
}

export type InstructionState = "pending" | "delivered" | "acked" | "failed";

export interface Instruction {
  id: string;
  device_id: string;
  created_at: string;
  kind: string;
  params: Record<string, unknown>;
  state: InstructionState;
  outcome?: string;
}
