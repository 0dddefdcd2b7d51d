// Maps desk inputs onto the sensor streams the gateway expects: the mouse
// position stands in for gaze (60 Hz), held keys or sliders stand in for
// the flexor/extensor pair (50 Hz), and arrow keys or a slider move the
// arm along the reach axis (20 Hz, sent only on change).
//
// DOM-free: the page wires real events into setPointer/keyDown/keyUp and
// calls tick() from its own timer, so all timing logic is testable.

import { armMessage, emgMessage, gazeMessage } from "./protocol.js";
import type { Inbound } from "./protocol.js";

export interface InputConfig {
  gazeHz: number;
  emgHz: number;
  armHz: number;
  emgRiseMs: number; // key-driven ramp 0 -> 1
  armRatePerS: number; // arrow-key arm speed, axis units/s
}

export const DEFAULT_INPUT_CONFIG: InputConfig = {
  gazeHz: 60,
  emgHz: 50,
  armHz: 20,
  emgRiseMs: 150,
  armRatePerS: 0.8,
};

const ARM_MIN = -0.1;
const ARM_MAX = 1.2;

export class InputSampler {
  private readonly cfg: InputConfig;
  private readonly send: (msg: Inbound) => void;

  private pointerX = 0.5;
  private pointerY = 0.5;
  private pointerValid = false;

  private closeHeld = false;
  private openHeld = false;
  private armDir = 0;
  private flexorLevel = 0;
  private extensorLevel = 0;
  private flexorSlider: number | null = null;
  private extensorSlider: number | null = null;
  private armSlider: number | null = null;
  private arm = 0;
  private lastSentArm: number | null = null;

  private nextGaze = 0;
  private nextEmg = 0;
  private nextArm = 0;
  private lastTick: number | null = null;

  constructor(send: (msg: Inbound) => void, cfg: InputConfig = DEFAULT_INPUT_CONFIG) {
    this.send = send;
    this.cfg = cfg;
  }

  setPointer(x: number, y: number, valid = true): void {
    this.pointerX = x;
    this.pointerY = y;
    this.pointerValid = valid;
  }

  keyDown(code: string): void {
    if (code === "KeyC") this.closeHeld = true;
    else if (code === "KeyO") this.openHeld = true;
    else if (code === "ArrowRight") this.armDir = 1;
    else if (code === "ArrowLeft") this.armDir = -1;
  }

  keyUp(code: string): void {
    if (code === "KeyC") this.closeHeld = false;
    else if (code === "KeyO") this.openHeld = false;
    else if (code === "ArrowRight" && this.armDir === 1) this.armDir = 0;
    else if (code === "ArrowLeft" && this.armDir === -1) this.armDir = 0;
  }

  /** Slider values override key ramps while set; null releases them. */
  setFlexorSlider(v: number | null): void {
    this.flexorSlider = v;
  }

  setExtensorSlider(v: number | null): void {
    this.extensorSlider = v;
  }

  setArmSlider(v: number | null): void {
    this.armSlider = v;
  }

  get armPosition(): number {
    return this.armSlider ?? this.arm;
  }

  get flexor(): number {
    return this.flexorSlider ?? this.flexorLevel;
  }

  get extensor(): number {
    return this.extensorSlider ?? this.extensorLevel;
  }

  private ramp(level: number, held: boolean, dtMs: number): number {
    const stepsize = this.cfg.emgRiseMs <= 0 ? 1 : dtMs / this.cfg.emgRiseMs;
    const next = held ? level + stepsize : level - stepsize;
    return Math.max(0, Math.min(1, next));
  }

  /** Advance ramps and emit any due messages; call at >= the fastest rate. */
  tick(nowMs: number): void {
    const dt = this.lastTick === null ? 0 : nowMs - this.lastTick;
    this.lastTick = nowMs;

    this.flexorLevel = this.ramp(this.flexorLevel, this.closeHeld, dt);
    this.extensorLevel = this.ramp(this.extensorLevel, this.openHeld, dt);
    if (this.armDir !== 0 && this.armSlider === null) {
      this.arm = Math.max(
        ARM_MIN,
        Math.min(ARM_MAX, this.arm + this.armDir * this.cfg.armRatePerS * (dt / 1000)),
      );
    }

    // advance each due time by its own period so tick quantization does
    // not stretch the cadence; drop debt after long stalls
    const gazePeriod = 1000 / this.cfg.gazeHz;
    if (nowMs >= this.nextGaze) {
      this.send(gazeMessage(nowMs, this.pointerX, this.pointerY, this.pointerValid));
      this.nextGaze = Math.max(this.nextGaze + gazePeriod, nowMs - gazePeriod);
    }
    const emgPeriod = 1000 / this.cfg.emgHz;
    if (nowMs >= this.nextEmg) {
      this.send(emgMessage(nowMs, this.flexor, this.extensor));
      this.nextEmg = Math.max(this.nextEmg + emgPeriod, nowMs - emgPeriod);
    }
    const armPeriod = 1000 / this.cfg.armHz;
    if (nowMs >= this.nextArm) {
      const pos = this.armPosition;
      if (pos !== this.lastSentArm) {
        this.send(armMessage(nowMs, pos));
        this.lastSentArm = pos;
      }
      this.nextArm = Math.max(this.nextArm + armPeriod, nowMs - armPeriod);
    }
  }
}
