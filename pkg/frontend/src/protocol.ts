// Typed view of the gateway's session envelope schema, with runtime guards
// for everything the server sends. The client trusts nothing else.

export type GraspName =
  | "cylindrical"
  | "spherical"
  | "tripod"
  | "pinch"
  | "lateral"
  | "hook";

export interface LayoutButton {
  id: string;
  role: "grasp" | "reserved";
  grasp: GraspName | null;
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface HandPayload {
  s: number;
  theta_deg: number[];
  phase: string;
  active_type: GraspName;
  aperture_cm: number;
  contact: boolean;
  s_pre: number;
}

export interface DwellPayload {
  button: string | null;
  progress_ms: number;
  threshold_ms: number;
}

export interface TrialPayload {
  index: number;
  block: number;
  trial_in_block: number;
  object_id: number;
  object: string;
  optimal_type: GraspName;
  trial_t_ms: number;
  object_grip_cm: number;
  contact: boolean;
  held: boolean;
}

export interface StatePayload {
  hand: HandPayload;
  dwell: DwellPayload;
  trial: TrialPayload | null;
  arm_pos: number;
  in_zone: boolean;
  zone: [number, number];
  object_pos: number;
  layout: { buttons: LayoutButton[] };
  done: boolean;
}

export interface EventPayload {
  t: number;
  kind: string;
  [key: string]: unknown;
}

export interface StateEnvelope {
  type: "state";
  t_ms: number;
  payload: StatePayload;
}

export interface EventEnvelope {
  type: "event";
  t_ms: number;
  payload: EventPayload;
}

export interface MetricsEnvelope {
  type: "metrics";
  t_ms: number;
  payload: Record<string, unknown>;
}

export type Outbound = StateEnvelope | EventEnvelope | MetricsEnvelope;

export interface GazeMessage {
  type: "gaze";
  t_ms: number;
  payload: { x: number; y: number; valid: boolean };
}

export interface EmgMessage {
  type: "emg";
  t_ms: number;
  payload: { flexor: number; extensor: number };
}

export interface ControlMessage {
  type: "control";
  t_ms: number;
  payload: { action: "arm"; pos: number } | { action: "end" };
}

export type Inbound = GazeMessage | EmgMessage | ControlMessage;

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function isNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isHand(v: unknown): v is HandPayload {
  return (
    isRecord(v) &&
    isNumber(v.s) &&
    Array.isArray(v.theta_deg) &&
    v.theta_deg.length === 6 &&
    v.theta_deg.every(isNumber) &&
    typeof v.phase === "string" &&
    typeof v.active_type === "string" &&
    isNumber(v.aperture_cm) &&
    typeof v.contact === "boolean" &&
    isNumber(v.s_pre)
  );
}

function isDwell(v: unknown): v is DwellPayload {
  return (
    isRecord(v) &&
    (v.button === null || typeof v.button === "string") &&
    isNumber(v.progress_ms) &&
    isNumber(v.threshold_ms)
  );
}

function isLayout(v: unknown): v is { buttons: LayoutButton[] } {
  if (!isRecord(v) || !Array.isArray(v.buttons) || v.buttons.length === 0) {
    return false;
  }
  return v.buttons.every(
    (b: unknown) =>
      isRecord(b) &&
      typeof b.id === "string" &&
      (b.role === "grasp" || b.role === "reserved") &&
      isNumber(b.cx) &&
      isNumber(b.cy) &&
      isNumber(b.w) &&
      isNumber(b.h),
  );
}

function isStatePayload(v: unknown): v is StatePayload {
  return (
    isRecord(v) &&
    isHand(v.hand) &&
    isDwell(v.dwell) &&
    (v.trial === null || isRecord(v.trial)) &&
    isNumber(v.arm_pos) &&
    typeof v.in_zone === "boolean" &&
    Array.isArray(v.zone) &&
    v.zone.length === 2 &&
    isNumber(v.object_pos) &&
    isLayout(v.layout) &&
    typeof v.done === "boolean"
  );
}

/** Parse one websocket text frame; null for anything malformed. */
export function parseOutbound(text: string): Outbound | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (!isRecord(doc) || !isNumber(doc.t_ms)) return null;
  if (doc.type === "state" && isStatePayload(doc.payload)) {
    return doc as unknown as StateEnvelope;
  }
  if (
    doc.type === "event" &&
    isRecord(doc.payload) &&
    typeof doc.payload.kind === "string" &&
    isNumber(doc.payload.t)
  ) {
    return doc as unknown as EventEnvelope;
  }
  if (doc.type === "metrics" && isRecord(doc.payload)) {
    return doc as unknown as MetricsEnvelope;
  }
  return null;
}

export function gazeMessage(t_ms: number, x: number, y: number, valid = true): GazeMessage {
  return { type: "gaze", t_ms, payload: { x, y, valid } };
}

export function emgMessage(t_ms: number, flexor: number, extensor: number): EmgMessage {
  return { type: "emg", t_ms, payload: { flexor, extensor } };
}

export function armMessage(t_ms: number, pos: number): ControlMessage {
  return { type: "control", t_ms, payload: { action: "arm", pos } };
}

export function endMessage(t_ms: number): ControlMessage {
  return { type: "control", t_ms, payload: { action: "end" } };
}
