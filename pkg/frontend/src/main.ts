/** Browser entry point: DOM wiring for the probe scene viewer. */

import {
  CameraState,
  defaultCamera,
  dragLook,
  moveCamera,
  toCameraMessage,
  wheelZoom,
} from './camera.js';
import { StreamClient, fetchScenes } from './client.js';
import { overlayText, shouldTint } from './overlay.js';
import type { SceneDescriptor } from './protocol.js';

const WIDTH = 512;
const HEIGHT = 384;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function wsBase(): string {
  const proto = location.protocol === 'https:' ? 'wss' : 'ws';
  return `${proto}://${location.host}`;
}

async function start(): Promise<void> {
  const frame = el<HTMLImageElement>('frame');
  const overlay = el<HTMLDivElement>('overlay');
  const banner = el<HTMLDivElement>('banner');
  const sceneSelect = el<HTMLSelectElement>('scene');
  const debugToggle = el<HTMLInputElement>('debug');
  const retryButton = el<HTMLButtonElement>('retry');

  let camera: CameraState = defaultCamera();
  let client: StreamClient | undefined;
  let blobUrl = '';
  const held = new Set<string>();

  const showBanner = (message: string) => {
    banner.textContent = message;
    banner.style.display = message === '' ? 'none' : 'block';
  };

  const pushCamera = () => {
    client?.updateCamera(toCameraMessage(camera, WIDTH, HEIGHT));
  };

  const connect = (sceneId: string) => {
    client?.close();
    showBanner('');
    client = new StreamClient(`${wsBase()}/scenes/${sceneId}/stream`, {
      onFrame: (streamFrame) => {
        if (blobUrl !== '') URL.revokeObjectURL(blobUrl);
        blobUrl = URL.createObjectURL(
          new Blob([streamFrame.png as BlobPart], { type: 'image/png' }),
        );
        frame.src = blobUrl;
        overlay.textContent = overlayText(streamFrame.meta);
        frame.classList.toggle(
          'tinted',
          shouldTint(streamFrame.meta, debugToggle.checked),
        );
      },
      onStatus: (status) => {
        if (status === 'reconnecting') showBanner('connection lost, retrying…');
        else if (status === 'open') showBanner('');
      },
      onError: (message) => showBanner(message),
    });
    client.connect();
    pushCamera();
  };

  // --- input handlers ---------------------------------------------------
  addEventListener('keydown', (e) => held.add(e.key.toLowerCase()));
  addEventListener('keyup', (e) => held.delete(e.key.toLowerCase()));

  let dragging = false;
  frame.addEventListener('mousedown', () => {
    dragging = true;
  });
  addEventListener('mouseup', () => {
    dragging = false;
  });
  addEventListener('mousemove', (e) => {
    if (!dragging) return;
    camera = dragLook(camera, e.movementX, e.movementY);
    pushCamera();
  });
  frame.addEventListener('wheel', (e) => {
    e.preventDefault();
    camera = wheelZoom(camera, e.deltaY);
    pushCamera();
  });

  let lastTick = performance.now();
  const tick = (nowMs: number) => {
    const dt = Math.min(0.1, (nowMs - lastTick) / 1000);
    lastTick = nowMs;
    const keys = {
      forward: (held.has('w') ? 1 : 0) - (held.has('s') ? 1 : 0),
      strafe: (held.has('d') ? 1 : 0) - (held.has('a') ? 1 : 0),
      up: (held.has('e') ? 1 : 0) - (held.has('q') ? 1 : 0),
    };
    if (keys.forward !== 0 || keys.strafe !== 0 || keys.up !== 0) {
      camera = moveCamera(camera, keys, dt);
      pushCamera();
    }
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);

  sceneSelect.addEventListener('change', () => connect(sceneSelect.value));
  retryButton.addEventListener('click', () => {
    if (sceneSelect.value !== '') connect(sceneSelect.value);
  });

  // --- scene list -------------------------------------------------------
  try {
    const scenes: SceneDescriptor[] = await fetchScenes('');
    for (const scene of scenes) {
      const option = document.createElement('option');
      option.value = scene.id;
      option.textContent = `${scene.name} (${scene.probeCount} probes)`;
      sceneSelect.appendChild(option);
    }
    if (scenes.length > 0) {
      sceneSelect.value = scenes[0].id;
      connect(scenes[0].id);
    } else {
      showBanner('no scenes available');
    }
  } catch (err) {
    showBanner(err instanceof Error ? err.message : String(err));
  }
}

start();
