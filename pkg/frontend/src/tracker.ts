/**
 * Instruction lifecycle tracker.
 *
 * After an instruction is enqueued, polls its state until it reaches a
 * terminal acked/failed and surfaces the outcome detail. An
 * instruction sent to a device that has never contacted the server is
 * accepted but never delivered; after a few polls stuck in pending the
 * tracker adds a hint saying so instead of spinning silently.
 */

import type { ApiClient } from "./api";
import type { Instruction } from "./types";

export type TrackerPhase = "idle" | "waiting" | "done" | "error";

export interface TrackerState {
  instruction: Instruction | null;
  phase: TrackerPhase;
  error: string | null;
  polls: number;
  hint: string | null;
}

const PENDING_HINT =
  "still pending: the device has not fetched it yet " +
  "(a device the server has never seen will leave it pending indefinitely)";

// Polls stuck in pending before the hint appears.
const HINT_AFTER_POLLS = 3;

export class InstructionTracker {
  private state: TrackerState = {
    instruction: null,
    phase: "idle",
    error: null,
    polls: 0,
    hint: null,
  };
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly intervalMs: number,
    private readonly onChange: (state: TrackerState) => void,
  ) {}

  snapshot(): TrackerState {
    return this.state;
  }

  /** Follows one instruction; any previous tracking stops. */
  track(instructionId: string): void {
    this.stop();
    this.state = {
      instruction: null,
      phase: "waiting",
      error: null,
      polls: 0,
      hint: null,
    };
    this.onChange(this.state);
    const poll = async () => {
      let instruction: Instruction;
      try {
        instruction = await this.api.instruction(instructionId);
      } catch (error) {
        this.stop();
        this.state = {
          ...this.state,
          phase: "error",
          error: error instanceof Error ? error.message : String(error),
        };
        this.onChange(this.state);
        return;
      }
      const polls = this.state.polls + 1;
      const terminal =
        instruction.state === "acked" || instruction.state === "failed";
      if (terminal) this.stop();
      this.state = {
        instruction,
        phase: terminal ? "done" : "waiting",
        error: null,
        polls,
        hint:
          !terminal && instruction.state === "pending" && polls >= HINT_AFTER_POLLS
            ? PENDING_HINT
            : null,
      };
      this.onChange(this.state);
    };
    void poll();
    this.timer = setInterval(() => void poll(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
