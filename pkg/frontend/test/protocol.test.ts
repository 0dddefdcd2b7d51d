import { describe, expect, it } from "vitest";

import {
  armMessage,
  emgMessage,
  endMessage,
  gazeMessage,
  parseOutbound,
} from "../src/protocol.js";

const statePayload = {
  hand: {
    s: 0.25,
    theta_deg: [10, 5, 20, 20, 20, 20],
    phase: "preshape_zone",
    active_type: "pinch",
    aperture_cm: 3.75,
    contact: false,
    s_pre: 0.5,
  },
  dwell: { button: "pinch", progress_ms: 120, threshold_ms: 200 },
  trial: {
    index: 0,
    block: 0,
    trial_in_block: 0,
    object_id: 16,
    object: "bead",
    optimal_type: "pinch",
    trial_t_ms: 1500,
    object_grip_cm: 1.5,
    contact: false,
    held: false,
  },
  arm_pos: 0.4,
  in_zone: false,
  zone: [0.8, 1.0],
  object_pos: 0.5,
  layout: {
    buttons: [
      { id: "pinch", role: "grasp", grasp: "pinch", cx: 0.25, cy: 0.1, w: 0.18, h: 0.1 },
    ],
  },
  done: false,
};

describe("parseOutbound", () => {
  it("accepts a full state envelope", () => {
    const env = parseOutbound(
      JSON.stringify({ type: "state", t_ms: 100, payload: statePayload }),
    );
    expect(env?.type).toBe("state");
    if (env?.type === "state") {
      expect(env.payload.hand.active_type).toBe("pinch");
      expect(env.payload.layout.buttons).toHaveLength(1);
    }
  });

  it("accepts event and metrics envelopes", () => {
    const ev = parseOutbound(
      JSON.stringify({
        type: "event",
        t_ms: 10,
        payload: { t: 10, kind: "GazeTrigger", button: "pinch" },
      }),
    );
    expect(ev?.type).toBe("event");
    const m = parseOutbound(
      JSON.stringify({ type: "metrics", t_ms: 10, payload: { sr_g: 1.0 } }),
    );
    expect(m?.type).toBe("metrics");
  });

  it("rejects malformed payloads", () => {
    expect(parseOutbound("not json")).toBeNull();
    expect(parseOutbound(JSON.stringify({ type: "state", t_ms: 1, payload: {} }))).toBeNull();
    expect(parseOutbound(JSON.stringify({ type: "event", t_ms: 1, payload: { kind: 5 } }))).toBeNull();
    expect(parseOutbound(JSON.stringify({ type: "nope", t_ms: 1, payload: {} }))).toBeNull();
    expect(parseOutbound(JSON.stringify({ type: "state", payload: statePayload }))).toBeNull();
  });

  it("rejects a state with a malformed hand vector", () => {
    const bad = structuredClone(statePayload);
    bad.hand.theta_deg = [1, 2, 3];
    expect(
      parseOutbound(JSON.stringify({ type: "state", t_ms: 1, payload: bad })),
    ).toBeNull();
  });
});

describe("inbound builders", () => {
  it("shape the gateway schema exactly", () => {
    expect(gazeMessage(5, 0.1, 0.2)).toEqual({
      type: "gaze",
      t_ms: 5,
      payload: { x: 0.1, y: 0.2, valid: true },
    });
    expect(emgMessage(5, 0.5, 0)).toEqual({
      type: "emg",
      t_ms: 5,
      payload: { flexor: 0.5, extensor: 0 },
    });
    expect(armMessage(5, 0.9)).toEqual({
      type: "control",
      t_ms: 5,
      payload: { action: "arm", pos: 0.9 },
    });
    expect(endMessage(5).payload).toEqual({ action: "end" });
  });
});
