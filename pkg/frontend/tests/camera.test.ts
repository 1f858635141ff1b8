import { describe, expect, it } from 'vitest';

import {
  CameraState,
  clampPitch,
  defaultCamera,
  dragLook,
  forwardVector,
  moveCamera,
  toCameraMessage,
  wheelZoom,
} from '../src/camera.js';

describe('clampPitch', () => {
  it('keeps pitch strictly inside +-90 degrees', () => {
    expect(clampPitch(10)).toBeLessThan(Math.PI / 2);
    expect(clampPitch(-10)).toBeGreaterThan(-Math.PI / 2);
    expect(clampPitch(0.3)).toBeCloseTo(0.3);
  });
});

describe('forwardVector', () => {
  it('is +z at rest and unit length everywhere', () => {
    const rest = forwardVector(defaultCamera());
    expect(rest[0]).toBeCloseTo(0);
    expect(rest[1]).toBeCloseTo(0);
    expect(rest[2]).toBeCloseTo(1);
    const v = forwardVector({ ...defaultCamera(), yaw: 1.1, pitch: -0.7 });
    expect(Math.hypot(...v)).toBeCloseTo(1);
  });

  it('positive pitch looks up', () => {
    const v = forwardVector({ ...defaultCamera(), pitch: 0.5 });
    expect(v[1]).toBeGreaterThan(0);
  });
});

describe('moveCamera', () => {
  it('holding W advances along the view direction', () => {
    let state: CameraState = { ...defaultCamera(), yaw: 0.8 };
    const before = state.position;
    state = moveCamera(state, { forward: 1, strafe: 0, up: 0 }, 0.5);
    const [fx, , fz] = forwardVector({ ...state, pitch: 0 });
    const dx = state.position[0] - before[0];
    const dz = state.position[2] - before[2];
    // displacement parallel to the ground-plane forward direction
    expect(dx * fz - dz * fx).toBeCloseTo(0);
    expect(dx * fx + dz * fz).toBeGreaterThan(0);
    expect(state.position[1]).toBe(before[1]);
  });

  it('strafes perpendicular to the view direction', () => {
    const state = moveCamera(
      defaultCamera(),
      { forward: 0, strafe: 1, up: 0 },
      1.0,
    );
    expect(state.position[0]).toBeGreaterThan(defaultCamera().position[0]);
    expect(state.position[2]).toBeCloseTo(defaultCamera().position[2]);
  });
});

describe('dragLook', () => {
  it('turns with horizontal drag and clamps vertical drag', () => {
    let state = defaultCamera();
    state = dragLook(state, 100, 0);
    expect(state.yaw).toBeGreaterThan(0);
    state = dragLook(state, 0, -1e6);
    expect(state.pitch).toBeLessThan(Math.PI / 2);
    state = dragLook(state, 0, 1e6);
    expect(state.pitch).toBeGreaterThan(-Math.PI / 2);
  });
});

describe('wheelZoom', () => {
  it('clamps the field of view to a sane range', () => {
    expect(wheelZoom(defaultCamera(), 1e6).fov).toBe(120);
    expect(wheelZoom(defaultCamera(), -1e6).fov).toBe(20);
    expect(wheelZoom(defaultCamera(), 100).fov).toBeCloseTo(65);
  });
});

describe('toCameraMessage', () => {
  it('places look one forward step from the eye', () => {
    const state = { ...defaultCamera(), yaw: 0.4, pitch: 0.2 };
    const msg = toCameraMessage(state, 320, 240);
    const fwd = forwardVector(state);
    for (let i = 0; i < 3; i++) {
      expect(msg.look[i] - msg.eye[i]).toBeCloseTo(fwd[i]);
    }
    expect(msg.width).toBe(320);
    expect(msg.height).toBe(240);
    expect(msg.fov).toBe(60);
  });
});
