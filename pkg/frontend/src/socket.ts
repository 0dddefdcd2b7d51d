// Thin websocket wrapper: typed sends, parsed receives, a banner hook on
// loss. No reconnect: one connection is one session on the server.

import { parseOutbound } from "./protocol.js";
import type { Inbound, Outbound } from "./protocol.js";

export class GatewaySocket {
  private ws: WebSocket | null = null;

  onMessage: (env: Outbound) => void = () => {};
  onOpen: () => void = () => {};
  onClose: () => void = () => {};

  connect(url: string): void {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => this.onOpen();
    this.ws.onclose = () => this.onClose();
    this.ws.onerror = () => this.onClose();
    this.ws.onmessage = (evt: MessageEvent) => {
      const env = parseOutbound(String(evt.data));
      if (env !== null) {
        this.onMessage(env);
      }
    };
  }

  get ready(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(msg: Inbound): void {
    if (this.ready) {
      this.ws!.send(JSON.stringify(msg));
    }
  }

  close(): void {
    this.ws?.close();
  }
}

export function gatewayUrl(loc: { protocol: string; host: string }): string {
  const scheme = loc.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${loc.host}/ws`;
}
