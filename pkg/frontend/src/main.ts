// Page bootstrap: connect, wire inputs, render, show metrics and downloads.

import { InputSampler } from "./input.js";
import { endMessage } from "./protocol.js";
import { render } from "./render.js";
import { GatewaySocket, gatewayUrl } from "./socket.js";
import { initialViewModel, reduce, setConnected } from "./viewmodel.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const metricsBox = document.getElementById("metrics")!;
const eventsBox = document.getElementById("events")!;
const downloads = document.getElementById("downloads")!;
const endButton = document.getElementById("end-session") as HTMLButtonElement;
const flexorSlider = document.getElementById("flexor") as HTMLInputElement;
const extensorSlider = document.getElementById("extensor") as HTMLInputElement;
const armSlider = document.getElementById("arm") as HTMLInputElement;

let vm = initialViewModel();
const socket = new GatewaySocket();
const input = new InputSampler((msg) => socket.send(msg));

function fitCanvas(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
}
window.addEventListener("resize", fitCanvas);
fitCanvas();

canvas.addEventListener("mousemove", (e) => {
  const r = canvas.getBoundingClientRect();
  input.setPointer((e.clientX - r.left) / r.width, (e.clientY - r.top) / r.height);
});
canvas.addEventListener("mouseleave", () => input.setPointer(0, 0, false));

window.addEventListener("keydown", (e) => {
  if (!e.repeat) input.keyDown(e.code);
  if (["ArrowLeft", "ArrowRight"].includes(e.code)) e.preventDefault();
});
window.addEventListener("keyup", (e) => input.keyUp(e.code));

function bindSlider(el: HTMLInputElement, set: (v: number | null) => void): void {
  el.addEventListener("input", () => set(Number(el.value)));
  el.addEventListener("change", () => {
    // snapping back to zero releases the override so keys work again
    if (Number(el.value) === 0) set(null);
  });
}
bindSlider(flexorSlider, (v) => input.setFlexorSlider(v));
bindSlider(extensorSlider, (v) => input.setExtensorSlider(v));
armSlider.addEventListener("input", () => input.setArmSlider(Number(armSlider.value)));

endButton.addEventListener("click", () => socket.send(endMessage(performance.now())));

function fmtPct(v: unknown): string {
  return typeof v === "number" ? `${(v * 100).toFixed(1)}%` : "n/a";
}

function fmtMs(v: unknown): string {
  if (typeof v !== "object" || v === null) return "n/a";
  const median = (v as Record<string, unknown>).median;
  return typeof median === "number" ? `${median.toFixed(0)} ms` : "n/a";
}

function renderMetrics(): void {
  const m = vm.metrics;
  if (!m) {
    metricsBox.textContent = "no metrics yet";
    return;
  }
  const taskRate = "sr_ht" in m ? m.sr_ht : m.sr_pt;
  const taskTime = "t_ht_ms" in m ? m.t_ht_ms : m.t_pt_ms;
  metricsBox.innerHTML = [
    `<div>trials: <b>${m.n_trials}</b></div>`,
    `<div>switch success: <b>${fmtPct(m.sr_g)}</b></div>`,
    `<div>switch time: <b>${fmtMs(m.t_g_ms)}</b></div>`,
    `<div>task success: <b>${fmtPct(taskRate)}</b></div>`,
    `<div>task time: <b>${fmtMs(taskTime)}</b></div>`,
  ].join("");
}

function renderEvents(): void {
  eventsBox.innerHTML = vm.events
    .slice(-12)
    .map((e) => `<div><span class="t">${e.t}</span> ${e.kind}</div>`)
    .reverse()
    .join("");
}

async function showDownloads(): Promise<void> {
  try {
    const resp = await fetch("/sessions");
    const sessions: string[] = await resp.json();
    downloads.innerHTML = sessions
      .map(
        (sid) =>
          `<div>${sid}: <a href="/sessions/${sid}/events.jsonl" download>events</a> ` +
          `<a href="/sessions/${sid}/inputs.jsonl" download>inputs</a></div>`,
      )
      .join("");
  } catch {
    downloads.textContent = "session list unavailable";
  }
}

socket.onOpen = () => {
  vm = setConnected(vm, true);
  banner.classList.add("hidden");
};
socket.onClose = () => {
  vm = setConnected(vm, false);
  banner.classList.remove("hidden");
  void showDownloads();
};
socket.onMessage = (env) => {
  const wasDone = vm.state?.done ?? false;
  vm = reduce(vm, env);
  if (env.type === "metrics") renderMetrics();
  if (env.type === "event") renderEvents();
  if (!wasDone && vm.state?.done) void showDownloads();
};
socket.connect(gatewayUrl(window.location));

setInterval(() => input.tick(performance.now()), 10);

function frame(): void {
  render(ctx, vm, canvas.width, canvas.height);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
