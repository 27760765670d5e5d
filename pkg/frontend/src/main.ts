// Composition root. One socket, one state object, three canvas panels.
// Socket messages mutate state in arrival order; painting happens on
// animation frames from the latest state, so a fast stream drops frames
// visually instead of queuing.

import { ControlPanel } from "./panel.js";
import { FeedbackSocket, LatestFrameBox } from "./socket.js";
import { SliderController } from "./slider.js";
import { SpectrumRenderer } from "./spectrum.js";
import { TongueRenderer } from "./tongue.js";
import { ViewState } from "./viewstate.js";
import { VowelSpaceRenderer } from "./vowelspace.js";

function grab<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing #${id}`);
  return el as T;
}

const state = new ViewState();
const frameBox = new LatestFrameBox();
let needsRedraw = true;

const spectrum = new SpectrumRenderer(grab<HTMLCanvasElement>("spectrum"));
const tongue = new TongueRenderer(grab<HTMLCanvasElement>("tongue"));
const vowelSpace = new VowelSpaceRenderer(grab<HTMLCanvasElement>("vowelspace"));

const statusBadge = grab<HTMLSpanElement>("status");
const statsLine = grab<HTMLSpanElement>("stats");
const modeToggle = grab<HTMLInputElement>("slider-mode");
const f1Slider = grab<HTMLInputElement>("slider-f1");
const f2Slider = grab<HTMLInputElement>("slider-f2");
const f1Label = grab<HTMLSpanElement>("slider-f1-value");
const f2Label = grab<HTMLSpanElement>("slider-f2-value");
const trailInput = grab<HTMLInputElement>("trail-length");

const wsUrl =
  `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;

const socket = new FeedbackSocket(wsUrl, {
  onMessage(msg) {
    state.applyServer(msg);
    if (msg.type === "frame") {
      frameBox.offer(msg);
    } else {
      if (msg.type === "ack") {
        // slider bounds follow the table the server actually loaded
        const lut = msg.config.lut;
        f1Slider.min = String(lut.f1_lo);
        f1Slider.max = String(lut.f1_hi);
        f2Slider.min = String(lut.f2_lo);
        f2Slider.max = String(lut.f2_hi);
      }
      needsRedraw = true;
    }
  },
  onStatus(status) {
    state.setStatus(status);
    if (status === "open") socket.send({ type: "list_devices" });
    needsRedraw = true;
  },
});

const panel = new ControlPanel(grab<HTMLDivElement>("panel"), (msg) =>
  socket.send(msg),
);

const sliderCtl = new SliderController(
  {
    send: (msg) => socket.send(msg),
    now: () => performance.now(),
    schedule: (fn, delay) => setTimeout(fn, delay),
    cancel: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
  },
  (id) => state.noteInvertSent(id),
);

function sliderValues(): [number, number] {
  return [Number(f1Slider.value), Number(f2Slider.value)];
}

modeToggle.addEventListener("change", () => {
  const on = modeToggle.checked;
  state.setSliderMode(on);
  const [f1, f2] = sliderValues();
  state.setSlider(f1, f2);
  if (on) sliderCtl.start(f1, f2);
  else sliderCtl.stop();
  needsRedraw = true;
});

for (const slider of [f1Slider, f2Slider]) {
  slider.addEventListener("input", () => {
    const [f1, f2] = sliderValues();
    state.setSlider(f1, f2);
    sliderCtl.move(f1, f2);
    needsRedraw = true;
  });
}

trailInput.addEventListener("change", () => {
  state.setTrailLength(Number(trailInput.value) || 1);
  needsRedraw = true;
});

function paint(): void {
  const frame = frameBox.take();
  if (frame !== null || needsRedraw) {
    needsRedraw = false;
    spectrum.render(state);
    tongue.render(state);
    vowelSpace.render(state);
    panel.sync(state);

    statusBadge.textContent = state.status;
    statusBadge.className = `status-${state.status}`;
    f1Label.textContent = `${f1Slider.value} Hz`;
    f2Label.textContent = `${f2Slider.value} Hz`;
    const drops = state.droppedTotal > 0 ? `, ${state.droppedTotal} dropped` : "";
    const err = state.lastError !== null ? ` | ${state.lastError}` : "";
    statsLine.textContent = state.frame !== null
      ? `t ${(state.frame.t_ms / 1000).toFixed(1)} s${drops}${err}`
      : err;
  }
  requestAnimationFrame(paint);
}

socket.connect();
requestAnimationFrame(paint);
