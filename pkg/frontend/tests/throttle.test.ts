import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { Throttle } from '../src/throttle.js';

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe('Throttle', () => {
  it('sends the first value immediately', () => {
    const sent: number[] = [];
    const throttle = new Throttle<number>((v) => sent.push(v), 30);
    throttle.push(1);
    expect(sent).toEqual([1]);
  });

  it('caps the rate and keeps only the latest pending value', () => {
    const sent: number[] = [];
    const throttle = new Throttle<number>((v) => sent.push(v), 30);
    for (let i = 0; i < 10; i++) throttle.push(i);
    expect(sent).toEqual([0]);
    vi.advanceTimersByTime(40);
    expect(sent).toEqual([0, 9]);
  });

  it('never exceeds the per-second budget under a steady burst', () => {
    const sent: number[] = [];
    const throttle = new Throttle<number>((v) => sent.push(v), 30);
    for (let i = 0; i < 1000; i++) {
      throttle.push(i);
      vi.advanceTimersByTime(1);
    }
    vi.advanceTimersByTime(100);
    // 1.1 s elapsed: at most one leading send plus one per 33.3 ms interval
    expect(sent.length).toBeLessThanOrEqual(34);
    expect(sent[sent.length - 1]).toBe(999);
  });

  it('resumes immediate sends once the cool-down has passed', () => {
    const sent: number[] = [];
    const throttle = new Throttle<number>((v) => sent.push(v), 30);
    throttle.push(1);
    vi.advanceTimersByTime(50);
    throttle.push(2);
    expect(sent).toEqual([1, 2]);
  });

  it('dispose drops any pending value', () => {
    const sent: number[] = [];
    const throttle = new Throttle<number>((v) => sent.push(v), 30);
    throttle.push(1);
    throttle.push(2);
    throttle.dispose();
    vi.advanceTimersByTime(1000);
    expect(sent).toEqual([1]);
  });
});
