/** Stats overlay text and the UNKNOWN-tint debug heuristic. */

import type { FrameMeta } from './protocol.js';

/** Tint frames whose UNKNOWN fraction exceeds this when debug is on. */
export const UNKNOWN_TINT_THRESHOLD = 0.05;

export function overlayText(meta: FrameMeta): string {
  const { traceMs, missFraction, unknownFraction } = meta.stats;
  return [
    `trace ${traceMs.toFixed(1)} ms`,
    `miss ${(missFraction * 100).toFixed(1)}%`,
    `unknown ${(unknownFraction * 100).toFixed(1)}%`,
  ].join('  |  ');
}

export function shouldTint(meta: FrameMeta, debug: boolean): boolean {
  return debug && meta.stats.unknownFraction > UNKNOWN_TINT_THRESHOLD;
}
