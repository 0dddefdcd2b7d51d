// Client-side state is a mirror of what the server sent, nothing more.
// Hand posture, dwell progress, trial status and metrics all come from
// envelopes; the client never simulates any of it locally.

import type { EventPayload, Outbound, StatePayload } from "./protocol.js";

export const EVENT_FEED_LIMIT = 50;

export interface ViewModel {
  connected: boolean;
  state: StatePayload | null;
  serverTime: number;
  events: EventPayload[];
  metrics: Record<string, unknown> | null;
  toast: string | null;
}

export function initialViewModel(): ViewModel {
  return {
    connected: false,
    state: null,
    serverTime: 0,
    events: [],
    metrics: null,
    toast: null,
  };
}

const TOAST_KINDS: Record<string, (e: EventPayload) => string> = {
  TrialStart: (e) => `trial ${e.trial}: ${e.object} (${e.optimal_type})`,
  GazeTrigger: (e) => `gaze trigger: ${e.grasp ?? e.button}`,
  SwitchRejected: (e) => `switch to ${e.requested} rejected (${e.phase})`,
  Held: (e) => (e.optimal ? "held!" : `held with non-optimal ${e.used_type}`),
  Placed: () => "placed in the zone",
  TrialEnd: (e) => `trial ${e.trial} ${e.outcome}`,
};

export function reduce(vm: ViewModel, envelope: Outbound): ViewModel {
  const next: ViewModel = { ...vm, serverTime: envelope.t_ms };
  if (envelope.type === "state") {
    next.state = envelope.payload;
    return next;
  }
  if (envelope.type === "metrics") {
    next.metrics = envelope.payload;
    return next;
  }
  const event = envelope.payload;
  next.events = [...vm.events, event].slice(-EVENT_FEED_LIMIT);
  const toast = TOAST_KINDS[event.kind];
  if (toast) {
    next.toast = toast(event);
  }
  return next;
}

export function setConnected(vm: ViewModel, connected: boolean): ViewModel {
  return { ...vm, connected };
}

/** Dwell ring fill fraction for a button, straight from server state. */
export function dwellProgress(vm: ViewModel, buttonId: string): number {
  const dwell = vm.state?.dwell;
  if (!dwell || dwell.button !== buttonId || dwell.threshold_ms <= 0) {
    return 0;
  }
  return Math.min(1, dwell.progress_ms / dwell.threshold_ms);
}
