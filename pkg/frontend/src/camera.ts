/** Walkthrough camera: position + yaw/pitch/fov, WASD-style movement. */

import type { CameraMessage } from './protocol.js';

export interface CameraState {
  position: [number, number, number];
  /** radians, 0 looks along +z, positive turns toward +x */
  yaw: number;
  /** radians, positive looks up; clamped inside (-pi/2, pi/2) */
  pitch: number;
  /** vertical field of view in degrees */
  fov: number;
}

const PITCH_LIMIT = Math.PI / 2 - 0.01;
const FOV_MIN = 20;
const FOV_MAX = 120;

export function clampPitch(pitch: number): number {
  return Math.min(PITCH_LIMIT, Math.max(-PITCH_LIMIT, pitch));
}

export function forwardVector(state: CameraState): [number, number, number] {
  const cp = Math.cos(state.pitch);
  return [
    Math.sin(state.yaw) * cp,
    Math.sin(state.pitch),
    Math.cos(state.yaw) * cp,
  ];
}

/**
 * Move in the ground plane relative to the current yaw (W/S along the view
 * direction, A/D strafing) plus optional vertical motion; `dt` in seconds.
 */
export function moveCamera(
  state: CameraState,
  keys: { forward: number; strafe: number; up: number },
  dt: number,
  speed = 1.5,
): CameraState {
  const sy = Math.sin(state.yaw);
  const cy = Math.cos(state.yaw);
  const dx = (keys.forward * sy + keys.strafe * cy) * speed * dt;
  const dz = (keys.forward * cy - keys.strafe * sy) * speed * dt;
  const dy = keys.up * speed * dt;
  const [x, y, z] = state.position;
  return { ...state, position: [x + dx, y + dy, z + dz] };
}

export function dragLook(
  state: CameraState,
  dxPixels: number,
  dyPixels: number,
  radiansPerPixel = 0.005,
): CameraState {
  return {
    ...state,
    yaw: state.yaw + dxPixels * radiansPerPixel,
    pitch: clampPitch(state.pitch - dyPixels * radiansPerPixel),
  };
}

export function wheelZoom(state: CameraState, deltaY: number): CameraState {
  const fov = Math.min(FOV_MAX, Math.max(FOV_MIN, state.fov + deltaY * 0.05));
  return { ...state, fov };
}

export function toCameraMessage(
  state: CameraState,
  width: number,
  height: number,
): CameraMessage {
  const [fx, fy, fz] = forwardVector(state);
  const [x, y, z] = state.position;
  return {
    eye: [x, y, z],
    look: [x + fx, y + fy, z + fz],
    fov: state.fov,
    width,
    height,
  };
}

export function defaultCamera(): CameraState {
  return { position: [1.5, 1.25, 1.5], yaw: 0, pitch: 0, fov: 60 };
}
