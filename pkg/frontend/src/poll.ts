// Polls the session endpoints while a round is in flight. The interval
// matches the service's async model: 1s is plenty at desk scale.

export const POLL_INTERVAL_MS = 1000;

export class Poller {
  private tick: () => Promise<boolean>;
  private intervalMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private running = false;

  // `tick` fetches state and returns true while polling should continue.
  constructor(tick: () => Promise<boolean>, intervalMs = POLL_INTERVAL_MS) {
    this.tick = tick;
    this.intervalMs = intervalMs;
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    this.schedule(0);
  }

  stop(): void {
    this.running = false;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private schedule(delay: number): void {
    this.timer = setTimeout(() => {
      void this.tick()
        .catch(() => true) // transient fetch errors: keep polling
        .then((again) => {
          if (this.running && again) {
            this.schedule(this.intervalMs);
          } else {
            this.running = false;
          }
        });
    }, delay);
  }
}
