/**
 * Stale-while-revalidate polling.
 *
 * One in-flight fetch at a time; a failed refresh keeps the previous
 * data and last-success timestamp and only flips the error message, so
 * a panel can keep rendering the stale snapshot with a banner until
 * the server comes back.
 */

export interface PollState<T> {
  data: T | null;
  lastSuccess: Date | null;
  error: string | null;
  ticks: number;
}

export class Poller<T> {
  private state: PollState<T> = {
    data: null,
    lastSuccess: null,
    error: null,
    ticks: 0,
  };
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;

  constructor(
    private readonly fetchOnce: () => Promise<T>,
    private readonly intervalMs: number,
    private readonly onChange: (state: PollState<T>) => void,
  ) {}

  snapshot(): PollState<T> {
    return this.state;
  }

  /** Starts polling: one refresh immediately, then every intervalMs. */
  start(): void {
    if (this.timer !== null) return;
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One poll cycle; a no-op while a previous cycle is still running. */
  async refresh(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      const data = await this.fetchOnce();
      this.state = {
        data,
        lastSuccess: new Date(),
        error: null,
        ticks: this.state.ticks + 1,
      };
    } catch (error) {
      this.state = {
        ...this.state,
        error: error instanceof Error ? error.message : String(error),
        ticks: this.state.ticks + 1,
      };
    } finally {
      this.inFlight = false;
    }
    this.onChange(this.state);
  }
}
