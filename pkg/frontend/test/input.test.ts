import { beforeEach, describe, expect, it } from "vitest";

import { DEFAULT_INPUT_CONFIG, InputSampler } from "../src/input.js";
import type { Inbound } from "../src/protocol.js";

let sent: Inbound[];
let sampler: InputSampler;

function drive(fromMs: number, toMs: number, stepMs = 5): void {
  for (let t = fromMs; t <= toMs; t += stepMs) {
    sampler.tick(t);
  }
}

function ofType<T extends Inbound["type"]>(type: T): Extract<Inbound, { type: T }>[] {
  return sent.filter((m): m is Extract<Inbound, { type: T }> => m.type === type);
}

beforeEach(() => {
  sent = [];
  sampler = new InputSampler((m) => sent.push(m));
});

describe("gaze sampling", () => {
  it("emits the pointer at 60 Hz regardless of tick rate", () => {
    sampler.setPointer(0.3, 0.1);
    drive(0, 1000, 2);
    const gaze = ofType("gaze");
    expect(gaze.length).toBeGreaterThanOrEqual(60);
    expect(gaze.length).toBeLessThanOrEqual(62);
    expect(gaze[0].payload).toEqual({ x: 0.3, y: 0.1, valid: true });
  });

  it("marks the sample invalid when the pointer leaves the view", () => {
    sampler.setPointer(0.3, 0.1);
    sampler.tick(0);
    sampler.setPointer(0, 0, false);
    sampler.tick(20);
    const gaze = ofType("gaze");
    expect(gaze[gaze.length - 1].payload.valid).toBe(false);
  });
});

describe("key-driven muscle ramp", () => {
  it("reaches full drive after the configured rise time", () => {
    sampler.keyDown("KeyC");
    drive(0, DEFAULT_INPUT_CONFIG.emgRiseMs + 20, 5);
    const last = ofType("emg").at(-1)!;
    expect(last.payload.flexor).toBe(1);
    expect(last.payload.extensor).toBe(0);
  });

  it("ramps roughly linearly", () => {
    sampler.keyDown("KeyO");
    drive(0, 75, 5); // half the 150 ms rise
    const mid = ofType("emg").at(-1)!;
    expect(mid.payload.extensor).toBeGreaterThan(0.3);
    expect(mid.payload.extensor).toBeLessThan(0.7);
  });

  it("decays after release", () => {
    sampler.keyDown("KeyC");
    drive(0, 200, 5);
    sampler.keyUp("KeyC");
    drive(205, 450, 5);
    const last = ofType("emg").at(-1)!;
    expect(last.payload.flexor).toBe(0);
  });

  it("slider value overrides the key ramp until released", () => {
    sampler.setFlexorSlider(0.42);
    sampler.keyDown("KeyC");
    drive(0, 300, 5);
    expect(ofType("emg").at(-1)!.payload.flexor).toBe(0.42);
    sampler.setFlexorSlider(null);
    drive(305, 600, 5);
    expect(ofType("emg").at(-1)!.payload.flexor).toBe(1); // key still held
  });

  it("emits at the configured 50 Hz", () => {
    drive(0, 1000, 2);
    const n = ofType("emg").length;
    expect(n).toBeGreaterThanOrEqual(50);
    expect(n).toBeLessThanOrEqual(52);
  });
});

describe("arm control", () => {
  it("integrates arrow-key motion and clamps to the axis", () => {
    sampler.keyDown("ArrowRight");
    drive(0, 3000, 5); // 0.8 units/s for 3 s hits the +1.2 stop
    const arms = ofType("control");
    const last = arms.at(-1)!.payload;
    expect(last).toEqual({ action: "arm", pos: 1.2 });
    sampler.keyUp("ArrowRight");
    sampler.keyDown("ArrowLeft");
    drive(3005, 8000, 5);
    const end = ofType("control").at(-1)!.payload;
    expect(end).toEqual({ action: "arm", pos: -0.1 });
  });

  it("sends arm positions only when they change", () => {
    drive(0, 500, 5); // idle: one initial position at most
    expect(ofType("control").length).toBeLessThanOrEqual(1);
    sampler.keyDown("ArrowRight");
    drive(505, 1000, 5);
    const count = ofType("control").length;
    expect(count).toBeGreaterThan(3); // ~20 Hz while moving
    expect(count).toBeLessThanOrEqual(1 + 10);
  });

  it("arm slider overrides keys", () => {
    sampler.setArmSlider(0.5);
    sampler.keyDown("ArrowRight");
    drive(0, 500, 5);
    expect(ofType("control").at(-1)!.payload).toEqual({ action: "arm", pos: 0.5 });
  });
});
