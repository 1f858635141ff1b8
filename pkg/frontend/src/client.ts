/**
 * Stream session against the render service: one state store, serialized
 * network events, latest-frame display with stale-frame protection.
 */

import type { CameraMessage, FrameMeta, StreamFrame } from './protocol.js';
import { parseFrameBinary, parseFrameMeta } from './protocol.js';
import { Throttle } from './throttle.js';

/** Minimal WebSocket surface shared by the browser API and `ws`. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus =
  | 'connecting'
  | 'open'
  | 'closed'
  | 'reconnecting';

export interface ViewerEvents {
  onFrame?: (frame: StreamFrame) => void;
  onStatus?: (status: ConnectionStatus) => void;
  onError?: (message: string) => void;
}

export interface StreamClientOptions {
  maxMessagesPerSecond?: number;
  reconnectDelayMs?: number;
  socketFactory?: SocketFactory;
  now?: () => number;
}

function defaultFactory(url: string): SocketLike {
  const ws = new WebSocket(url);
  ws.binaryType = 'arraybuffer';
  return ws as unknown as SocketLike;
}

export class StreamClient {
  private socket: SocketLike | undefined;
  private readonly throttle: Throttle<CameraMessage>;
  private readonly factory: SocketFactory;
  private readonly reconnectDelayMs: number;
  private lastSentJson = '';
  private pendingMeta: FrameMeta | undefined;
  private displayedCounter = 0;
  private closedByUser = false;
  status: ConnectionStatus = 'closed';
  lastFrame: StreamFrame | undefined;

  constructor(
    private readonly url: string,
    private readonly events: ViewerEvents = {},
    options: StreamClientOptions = {},
  ) {
    this.factory = options.socketFactory ?? defaultFactory;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.throttle = new Throttle(
      (camera) => this.sendNow(camera),
      options.maxMessagesPerSecond ?? 30,
      options.now,
    );
  }

  connect(): void {
    this.closedByUser = false;
    this.setStatus('connecting');
    this.openSocket();
  }

  /** Queue a camera update; identical consecutive cameras are not resent. */
  updateCamera(camera: CameraMessage): void {
    const json = JSON.stringify(camera);
    if (json === this.lastSentJson) return;
    this.throttle.push(camera);
  }

  close(): void {
    this.closedByUser = true;
    this.throttle.dispose();
    this.socket?.close();
    this.socket = undefined;
    this.setStatus('closed');
  }

  private sendNow(camera: CameraMessage): void {
    const json = JSON.stringify(camera);
    this.lastSentJson = json;
    if (this.socket !== undefined && this.status === 'open') {
      this.socket.send(json);
    }
  }

  private openSocket(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.setStatus('open');
      // resume with the current camera after a drop
      if (this.lastSentJson !== '') socket.send(this.lastSentJson);
    };
    socket.onmessage = (event) => this.handleMessage(event.data);
    socket.onerror = () => this.handleDrop();
    socket.onclose = () => this.handleDrop();
  }

  private handleDrop(): void {
    if (this.closedByUser || this.socket === undefined) return;
    this.socket = undefined;
    this.pendingMeta = undefined;
    this.setStatus('reconnecting');
    setTimeout(() => {
      if (!this.closedByUser) this.openSocket();
    }, this.reconnectDelayMs);
  }

  private handleMessage(data: unknown): void {
    try {
      if (typeof data === 'string') {
        this.pendingMeta = parseFrameMeta(data);
        return;
      }
      const { counter, png } = parseFrameBinary(
        data as ArrayBuffer | Uint8Array,
      );
      const meta = this.pendingMeta;
      this.pendingMeta = undefined;
      if (meta === undefined || meta.frameCounter !== counter) {
        throw new Error('frame binary without matching metadata');
      }
      // never display an older frame than the one already shown
      if (counter <= this.displayedCounter) return;
      this.displayedCounter = counter;
      this.lastFrame = { meta, png };
      this.events.onFrame?.(this.lastFrame);
    } catch (err) {
      this.events.onError?.(err instanceof Error ? err.message : String(err));
    }
  }

  private setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.events.onStatus?.(status);
  }
}

export async function fetchScenes(baseUrl: string) {
  const response = await fetch(`${baseUrl}/scenes`);
  if (!response.ok) {
    throw new Error(`scene list failed: HTTP ${response.status}`);
  }
  return response.json();
}
