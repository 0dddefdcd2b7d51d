// Canvas renderer. Top band: the nine gaze buttons with dwell rings.
// Below: the reach axis scene (home, object, target zone, arm marker) and
// the six motor-angle bars. Everything drawn comes from the view model.

import type { LayoutButton, StatePayload } from "./protocol.js";
import { dwellProgress } from "./viewmodel.js";
import type { ViewModel } from "./viewmodel.js";

const COLORS = {
  bg: "#14161a",
  panel: "#1e2127",
  button: "#2a2e36",
  buttonActive: "#3c5a3c",
  outline: "#4a4f58",
  text: "#d8dce2",
  dim: "#8a919c",
  ring: "#f0a832",
  zoneFill: "rgba(80, 160, 100, 0.25)",
  object: "#c28845",
  arm: "#6aa1d8",
  bar: "#6aa1d8",
  contact: "#d86a6a",
};

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function buttonRect(b: LayoutButton, width: number, height: number): Rect {
  return {
    x: (b.cx - b.w / 2) * width,
    y: (b.cy - b.h / 2) * height,
    w: b.w * width,
    h: b.h * height,
  };
}

function drawPanel(
  ctx: CanvasRenderingContext2D, vm: ViewModel, state: StatePayload,
  width: number, height: number,
): void {
  for (const b of state.layout.buttons) {
    const r = buttonRect(b, width, height);
    const active = b.grasp !== null && b.grasp === state.hand.active_type;
    ctx.fillStyle = active ? COLORS.buttonActive : COLORS.button;
    ctx.fillRect(r.x, r.y, r.w, r.h);
    ctx.strokeStyle = COLORS.outline;
    ctx.strokeRect(r.x, r.y, r.w, r.h);
    ctx.fillStyle = b.role === "grasp" ? COLORS.text : COLORS.dim;
    ctx.font = "13px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(b.grasp ?? "reserved", r.x + r.w / 2, r.y + r.h / 2);

    const progress = dwellProgress(vm, b.id);
    if (progress > 0) {
      ctx.strokeStyle = COLORS.ring;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.arc(
        r.x + r.w / 2, r.y + r.h / 2, Math.min(r.w, r.h) * 0.62,
        -Math.PI / 2, -Math.PI / 2 + progress * 2 * Math.PI,
      );
      ctx.stroke();
      ctx.lineWidth = 1;
    }
  }
}

function axisX(pos: number, width: number): number {
  // reach axis positions (-0.1 .. 1.2) mapped into the scene band
  return width * (0.08 + 0.8 * (pos + 0.1) / 1.3);
}

function drawScene(
  ctx: CanvasRenderingContext2D, state: StatePayload,
  width: number, height: number,
): void {
  const y = height * 0.62;
  ctx.strokeStyle = COLORS.outline;
  ctx.beginPath();
  ctx.moveTo(axisX(-0.1, width), y);
  ctx.lineTo(axisX(1.2, width), y);
  ctx.stroke();

  const [z0, z1] = state.zone;
  ctx.fillStyle = COLORS.zoneFill;
  ctx.fillRect(axisX(z0, width), y - 24, axisX(z1, width) - axisX(z0, width), 48);
  ctx.fillStyle = COLORS.dim;
  ctx.font = "12px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("target zone", (axisX(z0, width) + axisX(z1, width)) / 2, y + 38);

  if (state.trial) {
    const gripPx = Math.max(6, state.trial.object_grip_cm * 4);
    ctx.fillStyle = COLORS.object;
    const ox = axisX(state.object_pos, width);
    if (!state.trial.held) {
      ctx.fillRect(ox - gripPx / 2, y - gripPx, gripPx, gripPx);
    }
    ctx.fillStyle = COLORS.dim;
    ctx.fillText(
      `${state.trial.object} (${state.trial.optimal_type})`, ox, y + 22,
    );
  }

  const ax = axisX(state.arm_pos, width);
  ctx.strokeStyle = state.hand.contact ? COLORS.contact : COLORS.arm;
  ctx.lineWidth = 2;
  const gap = Math.max(3, state.hand.aperture_cm * 4);
  ctx.beginPath();
  ctx.moveTo(ax - 12, y - 30);
  ctx.lineTo(ax, y - 30);
  ctx.lineTo(ax, y - gap / 2);
  ctx.moveTo(ax - 12, y - 30 + gap + 10);
  ctx.lineTo(ax, y - 30 + gap + 10);
  ctx.stroke();
  ctx.lineWidth = 1;
  if (state.trial?.held) {
    const gripPx = Math.max(6, state.trial.object_grip_cm * 4);
    ctx.fillStyle = COLORS.object;
    ctx.fillRect(ax - gripPx / 2, y - 16, gripPx, gripPx);
  }
}

function drawHandBars(
  ctx: CanvasRenderingContext2D, state: StatePayload,
  width: number, height: number,
): void {
  const names = ["t-rot", "t-flex", "index", "middle", "ring", "little"];
  const x0 = width * 0.72;
  const barW = width * 0.034;
  const y1 = height * 0.95;
  const barH = height * 0.14;
  state.hand.theta_deg.forEach((deg, i) => {
    const x = x0 + i * barW * 1.3;
    const frac = Math.min(1, deg / 90);
    ctx.fillStyle = COLORS.panel;
    ctx.fillRect(x, y1 - barH, barW, barH);
    ctx.fillStyle = COLORS.bar;
    ctx.fillRect(x, y1 - barH * frac, barW, barH * frac);
    ctx.fillStyle = COLORS.dim;
    ctx.font = "10px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(names[i], x + barW / 2, y1 + 10);
  });
  ctx.fillStyle = COLORS.text;
  ctx.font = "13px system-ui, sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(
    `${state.hand.active_type}  s=${state.hand.s.toFixed(2)}  ` +
    `${state.hand.phase}  aperture ${state.hand.aperture_cm.toFixed(1)}cm`,
    width * 0.72, y1 - barH - 12,
  );
}

export function render(
  ctx: CanvasRenderingContext2D, vm: ViewModel,
  width: number, height: number,
): void {
  ctx.fillStyle = COLORS.bg;
  ctx.fillRect(0, 0, width, height);
  if (!vm.state) {
    ctx.fillStyle = COLORS.dim;
    ctx.font = "16px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(
      vm.connected ? "waiting for session state..." : "connecting...",
      width / 2, height / 2,
    );
    return;
  }
  drawPanel(ctx, vm, vm.state, width, height);
  drawScene(ctx, vm.state, width, height);
  drawHandBars(ctx, vm.state, width, height);

  const trial = vm.state.trial;
  ctx.fillStyle = COLORS.text;
  ctx.font = "14px system-ui, sans-serif";
  ctx.textAlign = "left";
  if (trial) {
    ctx.fillText(
      `block ${trial.block}  trial ${trial.trial_in_block + 1}/24  ` +
      `clock ${(trial.trial_t_ms / 1000).toFixed(1)}s` +
      (trial.held ? "  [holding]" : trial.contact ? "  [contact]" : ""),
      12, height * 0.45,
    );
  } else if (vm.state.done) {
    ctx.fillText("session complete - download the log below", 12, height * 0.45);
  }
  if (vm.toast) {
    ctx.fillStyle = COLORS.ring;
    ctx.fillText(vm.toast, 12, height * 0.49);
  }
}
