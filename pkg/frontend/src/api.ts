/**
 * Thin fetch wrapper over the control server's admin API.
 *
 * Server-side failures arrive as {"error": message, "kind": name} with
 * a 4xx status; they surface here as ApiError carrying the message
 * verbatim so views can display exactly what the server said.
 */

import type {
  FleetRow,
  Instruction,
  MeasurementRecord,
  ThresholdDoc,
} from "./types";

export class ApiError extends Error {
  readonly kind: string;
  readonly status: number;

  constructor(message: string, kind: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.kind = kind;
    this.status = status;
  }
}

export interface InstructionDraftBody {
  device_id: string;
  kind: string;
  params: Record<string, unknown>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    // Trailing slash breaks path joining; strip it once here.
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  fleet(): Promise<FleetRow[]> {
    return this.request("GET", "/api/v1/admin/fleet");
  }

  thresholds(): Promise<ThresholdDoc> {
    return this.request("GET", "/api/v1/admin/thresholds");
  }

  deviceRecords(
    deviceId: string,
    opts: { kind?: string; limit?: number } = {},
  ): Promise<MeasurementRecord[]> {
    const query = new URLSearchParams();
    if (opts.kind) query.set("kind", opts.kind);
    if (opts.limit !== undefined) query.set("limit", String(opts.limit));
    const qs = query.toString();
    const path = `/api/v1/admin/devices/${encodeURIComponent(deviceId)}/records`;
    return this.request("GET", qs ? `${path}?${qs}` : path);
  }

  async enqueueInstruction(draft: InstructionDraftBody): Promise<string> {
    const reply = await this.request<{ id: string }>(
      "POST",
      "/api/v1/admin/instructions",
      draft,
    );
    return reply.id;
  }

  instruction(id: string): Promise<Instruction> {
    return this.request(
      "GET",
      `/api/v1/admin/instructions/${encodeURIComponent(id)}`,
    );
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let message = `${method} ${path}: HTTP ${response.status}`;
      let kind = "http";
      try {
        const detail = (await response.json()) as { error?: string; kind?: string };
        if (typeof detail.error === "string") message = detail.error;
        if (typeof detail.kind === "string") kind = detail.kind;
      } catch {
        // Non-JSON error body; keep the generic message.
      }
      throw new ApiError(message, kind, response.status);
    }
    return (await response.json()) as T;
  }
}
