/** Wire types and frame parsing for the probe render service. */

export interface RenderStats {
  traceMs: number;
  missFraction: number;
  unknownFraction: number;
}

export interface CameraMessage {
  eye: [number, number, number];
  look: [number, number, number];
  fov: number;
  width: number;
  height: number;
}

export interface FrameMeta {
  frameCounter: number;
  camera: CameraMessage;
  stats: RenderStats;
}

export interface SceneDescriptor {
  id: string;
  name: string;
  probeCount: number;
  gridDims: [number, number, number];
  bounds: { lo: [number, number, number]; hi: [number, number, number] };
}

export interface StreamFrame {
  meta: FrameMeta;
  png: Uint8Array;
}

const PNG_MAGIC = [0x89, 0x50, 0x4e, 0x47];

/**
 * A binary stream message is a 4-byte big-endian frame counter followed by
 * the PNG payload. The counter must match the preceding metadata message.
 */
export function parseFrameBinary(data: ArrayBuffer | Uint8Array): {
  counter: number;
  png: Uint8Array;
} {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  if (bytes.length < 8) {
    throw new Error(`frame payload too short: ${bytes.length} bytes`);
  }
  const counter =
    ((bytes[0] << 24) | (bytes[1] << 16) | (bytes[2] << 8) | bytes[3]) >>> 0;
  for (let i = 0; i < 4; i++) {
    if (bytes[4 + i] !== PNG_MAGIC[i]) {
      throw new Error('frame payload is not a PNG');
    }
  }
  return { counter, png: bytes.subarray(4) };
}

export function parseFrameMeta(text: string): FrameMeta {
  const parsed = JSON.parse(text);
  if (typeof parsed.error === 'string') {
    throw new Error(parsed.error);
  }
  if (
    typeof parsed.frameCounter !== 'number' ||
    parsed.camera === undefined ||
    parsed.stats === undefined
  ) {
    throw new Error('malformed frame metadata');
  }
  return parsed as FrameMeta;
}

/** True when `sub` appears inside `seq` in order (not necessarily contiguous). */
export function isSubsequence<T>(sub: T[], seq: T[]): boolean {
  let i = 0;
  for (const value of seq) {
    if (i < sub.length && sub[i] === value) i++;
  }
  return i === sub.length;
}
