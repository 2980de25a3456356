// DOM wiring for the calibration page: scrubber, sliders, live overlay,
// score readout, save button. Everything semantic happens on the server.

import { CalibApi, Params } from "./api.js";
import { CalibrationController, PARAM_RANGES } from "./state.js";

const WEIGHT_PARAMS: (keyof Params)[] = ["alpha", "beta", "gamma", "delta"];
const SHAPE_PARAMS: (keyof Params)[] = ["tau", "min_area", "margin", "iou_min", "gap_max"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  parent?: HTMLElement,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  parent?.appendChild(node);
  return node;
}

function sliderRow(
  parent: HTMLElement,
  name: keyof Params,
  value: number,
  onInput: (v: number) => void,
): HTMLInputElement {
  const range = PARAM_RANGES[name as string] ?? { min: 0, max: 1, step: 0.01 };
  const row = el("div", { class: "row" }, parent);
  el("label", {}, row).textContent = name as string;
  const slider = el("input", {
    type: "range",
    min: String(range.min),
    max: String(range.max),
    step: String(range.step),
    value: String(value),
    "data-param": name as string,
  }, row);
  const readout = el("span", { class: "value" }, row);
  readout.textContent = String(value);
  slider.addEventListener("input", () => {
    readout.textContent = slider.value;
    onInput(Number(slider.value));
  });
  return slider;
}

export async function boot(root: HTMLElement, baseUrl: string): Promise<CalibrationController> {
  const api = new CalibApi(baseUrl);
  const meta = await api.meta();
  const initial = await api.getConfig();
  const controller = new CalibrationController(api, initial, 150, meta.ground_truth);

  const banner = el("div", { class: "banner", hidden: "" }, root);
  const title = el("h1", {}, root);
  title.textContent = `calibration: ${meta.videos.join(", ")} (${meta.frames} frames, ${meta.width}x${meta.height})`;

  const layout = el("div", { class: "layout" }, root);
  const view = el("div", { class: "view" }, layout);
  const overlayImg = el("img", { class: "overlay", alt: "overlay" }, view);
  const scoreLine = el("div", { class: "score" }, view);
  const boxLine = el("div", { class: "boxes" }, view);

  const controls = el("div", { class: "controls" }, layout);

  const scrubRow = el("div", { class: "row" }, controls);
  el("label", {}, scrubRow).textContent = "frame";
  const scrub = el("input", {
    type: "range", min: "0", max: String(meta.frames - 1), step: "1", value: "0",
    id: "scrubber",
  }, scrubRow);
  const frameReadout = el("span", { class: "value" }, scrubRow);
  frameReadout.textContent = "0";
  scrub.addEventListener("input", () => {
    frameReadout.textContent = scrub.value;
    controller.setFrame(Number(scrub.value));
  });

  el("h2", {}, controls).textContent = "fusion weights";
  for (const name of WEIGHT_PARAMS) {
    sliderRow(controls, name, initial[name] as number, (v) => controller.setParam(name, v));
  }
  el("h2", {}, controls).textContent = "threshold / boxes";
  for (const name of SHAPE_PARAMS) {
    sliderRow(controls, name, initial[name] as number, (v) => controller.setParam(name, v));
  }

  const errorLine = el("div", { class: "error" }, controls);
  const saveRow = el("div", { class: "row" }, controls);
  const saveButton = el("button", { id: "save" }, saveRow);
  saveButton.textContent = "save config";
  saveButton.addEventListener("click", () => void controller.save());
  const dirtyMark = el("span", { class: "dirty" }, saveRow);

  controller.onChange((state) => {
    banner.hidden = state.banner === null;
    banner.textContent = state.banner ?? "";
    errorLine.textContent = state.paramError ?? "";
    dirtyMark.textContent = controller.dirty ? "unsaved changes" : "saved";
    if (state.overlay) {
      overlayImg.src = `data:image/png;base64,${state.overlay.overlay_png}`;
      boxLine.textContent =
        `${state.overlay.boxes.length} boxes, ${state.overlay.mask_pixels} mask px`;
    }
    scoreLine.textContent = state.score
      ? `frame ${state.score.frame}: IoU ${state.score.iou.toFixed(4)}, Dice ${state.score.dice.toFixed(4)}`
      : meta.ground_truth ? "" : "no ground truth loaded";
  });

  controller.scheduleRefresh(0);
  return controller;
}

declare global {
  interface Window {
    turbsegBoot: typeof boot;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.turbsegBoot = boot;
  const root = document.getElementById("app");
  if (root) {
    const base = new URLSearchParams(window.location.search).get("api")
      ?? "http://127.0.0.1:8321";
    void boot(root, base);
  }
}
