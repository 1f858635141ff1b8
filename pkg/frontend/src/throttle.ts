/**
 * Trailing-edge rate limiter: forwards the most recent value, never more
 * than `maxPerSecond` times per second. A value arriving inside the
 * cool-down replaces any pending one (latest wins) and is flushed when the
 * cool-down expires.
 */

export class Throttle<T> {
  private readonly intervalMs: number;
  private lastSentAt = -Infinity;
  private pending: T | undefined;
  private timer: ReturnType<typeof setTimeout> | undefined;

  constructor(
    private readonly send: (value: T) => void,
    maxPerSecond = 30,
    private readonly now: () => number = () => Date.now(),
  ) {
    this.intervalMs = 1000 / maxPerSecond;
  }

  push(value: T): void {
    const elapsed = this.now() - this.lastSentAt;
    if (elapsed >= this.intervalMs) {
      this.lastSentAt = this.now();
      this.send(value);
      return;
    }
    this.pending = value;
    if (this.timer === undefined) {
      this.timer = setTimeout(() => this.flush(), this.intervalMs - elapsed);
    }
  }

  private flush(): void {
    this.timer = undefined;
    if (this.pending === undefined) return;
    const value = this.pending;
    this.pending = undefined;
    this.lastSentAt = this.now();
    this.send(value);
  }

  dispose(): void {
    if (this.timer !== undefined) clearTimeout(this.timer);
    this.timer = undefined;
    this.pending = undefined;
  }
}
