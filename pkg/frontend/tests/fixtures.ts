import type { FleetRow, MeasurementRecord, ThresholdDoc } from "../src/types";

// Mirror of what GET /api/v1/admin/thresholds serves with default policy.
export const DOC: ThresholdDoc = {
  speed_mbps: { slow_max: 15.0, fast_min: 30.0 },
  latency_ms: {
    exceptional_max: 20.0,
    good_min: 50.0,
    good_max: 100.0,
    less_desirable_min: 150.0,
  },
  speed_index_s: { fast_max: 3.4, slow_min: 5.8 },
  battery_floor_pct: 15,
  daily_data_cap_bytes: 4 * 2 ** 30,
  report_interval_s: 300.0,
  stale_after_s: 900.0,
};

export function fleetRow(overrides: Partial<FleetRow> = {}): FleetRow {
  return {
    device_id: "phone-01",
    last_seen: "2024-01-01T00:00:00Z",
    battery_pct: 80,
    connectivity: "mobile",
    operator_name: "DemoCell",
    data_used_today: 0,
    stale: false,
    ...overrides,
  };
}

let serial = 0;

export function record(
  kind: MeasurementRecord["experiment_kind"],
  payload: Record<string, unknown>,
): MeasurementRecord {
  serial += 1;
  return {
    record_id: `r-${serial}`,
    device_id: "phone-01",
    network_id: "net-01",
    experiment_kind: kind,
    timestamp: "2024-01-01T06:00:00Z",
    payload,
  };
}
