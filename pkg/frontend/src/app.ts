/**
 * Panel controllers: the glue between the API client, the pollers,
 * and the pure view functions.
 *
 * Each panel owns its state and re-renders through a sink callback, so
 * the same objects drive both the browser (main.ts writes innerHTML)
 * and the tests (which assert on the emitted markup).
 */

import { ApiClient, ApiError } from "./api";
import type { InstructionDraft } from "./draft";
import { emptyDraft, validateDraft } from "./draft";
import type { PollState } from "./poller";
import { Poller } from "./poller";
import type { TrackerState } from "./tracker";
import { InstructionTracker } from "./tracker";
import type { FleetRow, MeasurementRecord, ThresholdDoc } from "./types";
import { renderComposer, renderDeviceDetail, renderFleet } from "./views";

export const DEFAULT_POLL_INTERVAL_MS = 10_000;
const DETAIL_RECORD_LIMIT = 25;

type RenderSink = (html: string) => void;

export class FleetPanel {
  doc: ThresholdDoc | null = null;
  private readonly poller: Poller<FleetRow[]>;

  constructor(
    private readonly api: ApiClient,
    intervalMs: number,
    private readonly sink: RenderSink,
  ) {
    this.poller = new Poller(
      () => this.fetchCycle(),
      intervalMs,
      (state) => this.sink(renderFleet(state, this.doc, new Date())),
    );
  }

  start(): void {
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  refresh(): Promise<void> {
    return this.poller.refresh();
  }

  state(): PollState<FleetRow[]> {
    return this.poller.snapshot();
  }

  html(): string {
    return renderFleet(this.poller.snapshot(), this.doc, new Date());
  }

  // Thresholds change only on server upgrade; fetch once, retry on the
  // next cycle if the first attempt failed.
  private async fetchCycle(): Promise<FleetRow[]> {
    if (this.doc === null) {
      this.doc = await this.api.thresholds();
    }
    return this.api.fleet();
  }
}

export class DetailPanel {
  deviceId: string | null = null;
  doc: ThresholdDoc | null = null;
  private poller: Poller<MeasurementRecord[]> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly intervalMs: number,
    private readonly sink: RenderSink,
  ) {}

  /** Switches the panel to a device and starts polling its records. */
  select(deviceId: string): void {
    this.poller?.stop();
    this.deviceId = deviceId;
    this.poller = new Poller(
      async () => {
        if (this.doc === null) {
          this.doc = await this.api.thresholds();
        }
        return this.api.deviceRecords(deviceId, { limit: DETAIL_RECORD_LIMIT });
      },
      this.intervalMs,
      (state) => this.sink(renderDeviceDetail(this.deviceId, state, this.doc)),
    );
    this.poller.start();
  }

  stop(): void {
    this.poller?.stop();
  }

  refresh(): Promise<void> {
    return this.poller?.refresh() ?? Promise.resolve();
  }

  html(): string {
    const state: PollState<MeasurementRecord[]> = this.poller?.snapshot() ?? {
      data: null,
      lastSuccess: null,
      error: null,
      ticks: 0,
    };
    return renderDeviceDetail(this.deviceId, state, this.doc);
  }
}

export class Composer {
  draft: InstructionDraft = emptyDraft();
  rejection: string | null = null;
  readonly tracker: InstructionTracker;

  constructor(
    private readonly api: ApiClient,
    trackerIntervalMs: number,
    private readonly onChange: () => void,
  ) {
    this.tracker = new InstructionTracker(api, trackerIntervalMs, () =>
      this.onChange(),
    );
  }

  problems(): string[] {
    return validateDraft(this.draft);
  }

  trackerState(): TrackerState {
    return this.tracker.snapshot();
  }

  setDevice(deviceId: string): void {
    this.draft = { ...this.draft, device_id: deviceId };
    this.onChange();
  }

  setKind(kind: InstructionDraft["kind"]): void {
    // Params are kind-specific; switching kinds resets them.
    this.draft = { ...this.draft, kind, params: {} };
    this.onChange();
  }

  /** Applies one form field; numeric fields keep bad input as-is so
   * validation can name the problem instead of silently dropping it. */
  setParam(name: string, raw: string, type: "text" | "number" = "text"): void {
    const params = { ...this.draft.params };
    if (raw === "") {
      delete params[name];
    } else if (type === "number") {
      const parsed = Number(raw);
      params[name] = Number.isNaN(parsed) ? raw : parsed;
    } else {
      params[name] = raw;
    }
    this.draft = { ...this.draft, params };
    this.onChange();
  }

  /**
   * Sends the draft if it passes validation.
   *
   * Returns the instruction id, or null when validation blocked the
   * send or the server rejected it (the rejection text is kept
   * verbatim for display).
   */
  async submit(): Promise<string | null> {
    if (this.problems().length > 0) return null;
    this.rejection = null;
    try {
      const id = await this.api.enqueueInstruction(this.draft);
      this.tracker.track(id);
      this.onChange();
      return id;
    } catch (error) {
      this.rejection =
        error instanceof ApiError
          ? error.message
          : error instanceof Error
            ? error.message
            : String(error);
      this.onChange();
      return null;
    }
  }

  stop(): void {
    this.tracker.stop();
  }

  html(): string {
    return renderComposer(
      this.draft,
      this.problems(),
      this.tracker.snapshot(),
      this.rejection,
    );
  }
}

/** Resolves the control-server URL for the static bundle. */
export function resolveServerUrl(
  windowLike: { AMIGO_SERVER?: string },
  locationLike: { search: string; origin: string },
): string {
  const fromQuery = new URLSearchParams(locationLike.search).get("server");
  return fromQuery ?? windowLike.AMIGO_SERVER ?? locationLike.origin;
}
