/** Assembles the editor: paint canvas, attribute sliders, preview, jobs. */

import { StudioClient } from "./api.js";
import { CanvasLayoutModel } from "./canvas.js";
import {
  JobRecord,
  KeyValueStore,
  ManipulationController,
  stageDownloads,
} from "./manipulate.js";
import { LABEL_PALETTE, colorFor } from "./palette.js";
import { PaintController } from "./paint.js";
import { PreviewController } from "./preview.js";
import { PRESETS, SliderPanelModel } from "./sliders.js";
import type { HallucinationResult, ManipulationPayload } from "./types.js";

export interface StudioOptions {
  client?: StudioClient;
  storage?: KeyValueStore;
  seed?: number;
}

export interface StudioApp {
  client: StudioClient;
  sessionId: string;
  canvas: CanvasLayoutModel;
  paint: PaintController;
  sliders: SliderPanelModel;
  preview: PreviewController;
  jobs: ManipulationController;
  root: HTMLElement;
  readonly lastPreview: HallucinationResult | null;
  readonly lastResult: ManipulationPayload | null;
  requestPreview(): void;
  runSweep(attribute: string): Promise<void>;
  submitManipulation(): Promise<JobRecord | null>;
}

const DISPLAY_SCALE = 4;

export async function mountStudio(
  root: HTMLElement,
  options: StudioOptions = {},
): Promise<StudioApp> {
  const client = options.client ?? new StudioClient();
  const storage = options.storage ?? window.localStorage;
  let seed = options.seed ?? 7;

  const attributeNames = await client.attributeNames();
  const info = await client.createSession();
  const snapshot = await client.getSession(info.id);

  root.innerHTML = buildShell(attributeNames, snapshot.num_classes, seed);
  const el = <T extends HTMLElement>(selector: string): T => {
    const node = root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  };

  // A fresh session is all label 0 on the server, matching the blank local
  // raster; every later change flows through the edit queue, so the two
  // rasters only diverge while an edit is in flight.
  const canvas = new CanvasLayoutModel(
    snapshot.width,
    snapshot.height,
    snapshot.num_classes,
    snapshot.undo_limit,
  );
  canvas.version = snapshot.version;

  const surface = el<HTMLCanvasElement>("#paint-canvas");
  surface.width = canvas.width;
  surface.height = canvas.height;
  surface.style.width = `${canvas.width * DISPLAY_SCALE}px`;
  surface.style.height = `${canvas.height * DISPLAY_SCALE}px`;

  const sliders = new SliderPanelModel(attributeNames);

  const previewImage = el<HTMLImageElement>("#preview-image");
  const badge = el("#badge");
  const offlineBanner = el("#offline-banner");
  const usePreviewButton = el<HTMLButtonElement>("#use-preview");
  const runButton = el<HTMLButtonElement>("#manipulate-run");
  const toastBox = el("#toast");

  let lastPreview: HallucinationResult | null = null;
  let lastResult: ManipulationPayload | null = null;
  let manipulateInput: string | null = null;
  let toastTimer: ReturnType<typeof setTimeout> | null = null;

  function toast(message: string): void {
    toastBox.textContent = message;
    toastBox.hidden = false;
    if (toastTimer) clearTimeout(toastTimer);
    toastTimer = setTimeout(() => {
      toastBox.hidden = true;
    }, 4000);
  }

  function renderCanvas(): void {
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = surface.getContext("2d");
    } catch {
      ctx = null;
    }
    if (!ctx) return; // headless DOM: the model still holds the raster
    const image = ctx.createImageData(canvas.width, canvas.height);
    for (let i = 0; i < canvas.labels.length; i++) {
      const [r, g, b] = rgbFor(canvas.labels[i]!);
      image.data[i * 4] = r;
      image.data[i * 4 + 1] = g;
      image.data[i * 4 + 2] = b;
      image.data[i * 4 + 3] = 255;
    }
    ctx.putImageData(image, 0, 0);
  }

  function layoutKey(): string {
    return `${canvas.version}.${paint.serverVersion}`;
  }

  function requestPreview(): void {
    preview.request(sliders.asMap(), layoutKey(), seed);
    renderTopThree();
  }

  function renderTopThree(): void {
    const names = sliders.topThree();
    el("#top3").textContent = names.length
      ? `strongest: ${names.join(", ")}`
      : "all attributes at zero";
  }

  function setJobStatus(text: string): void {
    el("#job-status").textContent = text;
  }

  function renderTriptych(record: JobRecord, result: ManipulationPayload): void {
    const triptych = el("#triptych");
    triptych.textContent = "";
    const panes: [string, string][] = [
      ["input", record.image],
      ["hallucination", result.hallucination],
      ["final", result.final],
    ];
    for (const [name, image] of panes) {
      const figure = document.createElement("figure");
      figure.dataset.pane = name;
      const img = document.createElement("img");
      img.src = `data:image/png;base64,${image}`;
      img.alt = name;
      const caption = document.createElement("figcaption");
      caption.textContent = name;
      figure.append(img, caption);
      triptych.append(figure);
    }
    const downloads = el("#downloads");
    downloads.textContent = "";
    for (const { name, href } of stageDownloads(result)) {
      const link = document.createElement("a");
      link.href = href;
      link.download = name;
      link.textContent = name;
      downloads.append(link);
    }
  }

  async function runSweep(attribute: string): Promise<void> {
    const strip = el("#filmstrip");
    strip.textContent = "rendering sweep…";
    try {
      const { values, frames } = await preview.sweep(sliders.asMap(), layoutKey(), attribute, seed);
      strip.textContent = "";
      frames.forEach((frame, i) => {
        const figure = document.createElement("figure");
        const img = document.createElement("img");
        img.src = `data:image/png;base64,${frame.image}`;
        img.alt = `${attribute} = ${values[i]}`;
        const caption = document.createElement("figcaption");
        caption.textContent = `${attribute} ${values[i]!.toFixed(2)}`;
        figure.append(img, caption);
        strip.append(figure);
      });
    } catch (error) {
      strip.textContent = "";
      toast(error instanceof Error ? error.message : String(error));
    }
  }

  async function submitManipulation(): Promise<JobRecord | null> {
    if (!manipulateInput) {
      toast("choose an input image first");
      return null;
    }
    el("#error-panel").hidden = true;
    setJobStatus("submitting…");
    try {
      const record = await jobs.submit(manipulateInput, info.id, sliders.asMap(), seed);
      setJobStatus(`job ${record.job} queued`);
      return record;
    } catch (error) {
      setJobStatus("");
      toast(error instanceof Error ? error.message : String(error));
      return null;
    }
  }

  const preview = new PreviewController(
    client,
    info.id,
    (result) => {
      lastPreview = result;
      previewImage.src = `data:image/png;base64,${result.image}`;
      badge.textContent = `checkpoint ${result.checkpoint.slice(0, 8)} · seed ${result.seed}`;
      usePreviewButton.disabled = false;
    },
    (offline) => {
      offlineBanner.hidden = !offline;
    },
    toast,
  );

  const paint = new PaintController(client, canvas, info.id, toast, () => {
    renderCanvas();
    requestPreview();
  });

  const jobs = new ManipulationController(
    client,
    storage,
    {
      onStatus: (record, status, stage) => {
        setJobStatus(`job ${record.job} ${status}${stage ? ` — ${stage}` : ""}`);
      },
      onDone: (record, result) => {
        lastResult = result;
        setJobStatus(`job ${record.job} done in ${totalSeconds(result).toFixed(1)}s`);
        renderTriptych(record, result);
      },
      onFailed: (record, stage, message) => {
        setJobStatus(`job ${record.job} failed`);
        const panel = el("#error-panel");
        panel.hidden = false;
        panel.dataset.stage = stage ?? "";
        panel.textContent = stage ? `failed during ${stage}: ${message}` : `failed: ${message}`;
      },
    },
    750,
  );

  // --- canvas painting -------------------------------------------------------
  const pointFromEvent = (event: MouseEvent): { x: number; y: number } => {
    const rect = surface.getBoundingClientRect();
    const scaleX = rect.width > 0 ? canvas.width / rect.width : 1;
    const scaleY = rect.height > 0 ? canvas.height / rect.height : 1;
    return { x: (event.clientX - rect.left) * scaleX, y: (event.clientY - rect.top) * scaleY };
  };
  let drawing = false;
  surface.addEventListener("mousedown", (event) => {
    drawing = true;
    paint.strokeStart(pointFromEvent(event));
  });
  surface.addEventListener("mousemove", (event) => {
    if (drawing) paint.strokeMove(pointFromEvent(event));
  });
  const endStroke = (): void => {
    if (!drawing) return;
    drawing = false;
    paint.strokeEnd();
  };
  surface.addEventListener("mouseup", endStroke);
  surface.addEventListener("mouseleave", endStroke);

  // --- legend / brush controls -----------------------------------------------
  root.querySelectorAll<HTMLButtonElement>("#legend button").forEach((button) => {
    button.addEventListener("click", () => {
      paint.label = Number(button.dataset.label);
      root
        .querySelectorAll("#legend button")
        .forEach((b) => b.classList.toggle("selected", b === button));
    });
  });
  el<HTMLInputElement>("#brush-radius").addEventListener("input", (event) => {
    paint.radius = Number((event.target as HTMLInputElement).value);
  });
  el("#undo").addEventListener("click", () => {
    if (!paint.undo()) toast("nothing to undo");
  });
  el("#redo").addEventListener("click", () => {
    if (!paint.redo()) toast("nothing to redo");
  });

  // --- sliders ---------------------------------------------------------------
  for (const name of attributeNames) {
    const input = el<HTMLInputElement>(`#slider-${name}`);
    input.addEventListener("input", () => {
      const exact = sliders.set(name, Number(input.value));
      input.value = String(exact);
      el(`#value-${name}`).textContent = exact.toFixed(2);
      requestPreview();
    });
  }
  root.querySelectorAll<HTMLButtonElement>("#presets button").forEach((button) => {
    button.addEventListener("click", () => {
      const preset = PRESETS.find((p) => p.name === button.dataset.preset);
      if (!preset) return;
      sliders.applyPreset(preset);
      for (const name of attributeNames) {
        const value = sliders.get(name);
        el<HTMLInputElement>(`#slider-${name}`).value = String(value);
        el(`#value-${name}`).textContent = value.toFixed(2);
      }
      requestPreview();
    });
  });

  el<HTMLInputElement>("#seed").addEventListener("input", (event) => {
    const parsed = Number((event.target as HTMLInputElement).value);
    if (Number.isInteger(parsed) && parsed >= 0) {
      seed = parsed;
      requestPreview();
    }
  });

  el<HTMLButtonElement>("#sweep-run").addEventListener("click", () => {
    void runSweep(el<HTMLSelectElement>("#sweep-attr").value);
  });

  // --- manipulation inputs -----------------------------------------------------
  usePreviewButton.addEventListener("click", () => {
    if (!lastPreview) return;
    manipulateInput = lastPreview.image;
    runButton.disabled = false;
    el("#input-note").textContent = "input: current preview";
  });
  el<HTMLInputElement>("#photo-file").addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => {
      const url = String(reader.result);
      manipulateInput = url.slice(url.indexOf(",") + 1);
      runButton.disabled = false;
      el("#input-note").textContent = `input: ${file.name}`;
    };
    reader.readAsDataURL(file);
  });
  runButton.addEventListener("click", () => {
    void submitManipulation();
  });

  renderCanvas();
  renderTopThree();
  const resumed = jobs.resume();
  if (resumed > 0) setJobStatus(`resumed ${resumed} running job${resumed > 1 ? "s" : ""}`);

  return {
    client,
    sessionId: info.id,
    canvas,
    paint,
    sliders,
    preview,
    jobs,
    root,
    get lastPreview() {
      return lastPreview;
    },
    get lastResult() {
      return lastResult;
    },
    requestPreview,
    runSweep,
    submitManipulation,
  };
}

function buildShell(attributeNames: string[], numClasses: number, seed: number): string {
  const legend = LABEL_PALETTE.slice(0, numClasses)
    .map(
      (entry, label) =>
        `<button type="button" data-label="${label}" class="${label === 1 ? "selected" : ""}">` +
        `<span class="swatch" style="background:${entry.color}"></span>${entry.name}</button>`,
    )
    .join("");
  const sliderRows = attributeNames
    .map(
      (name) =>
        `<div class="slider-row"><label for="slider-${name}">${name}</label>` +
        `<input id="slider-${name}" type="range" min="0" max="1" step="0.01" value="0">` +
        `<span id="value-${name}">0.00</span></div>`,
    )
    .join("");
  const presetButtons = PRESETS.map(
    (preset) => `<button type="button" data-preset="${preset.name}">${preset.name}</button>`,
  ).join("");
  const sweepOptions = attributeNames
    .map((name) => `<option value="${name}">${name}</option>`)
    .join("");
  return `
<div id="offline-banner" hidden>service unreachable — edits are kept locally</div>
<div id="toast" hidden></div>
<header><h1>scene studio</h1><span id="badge">no preview yet</span></header>
<main>
  <section class="pane">
    <canvas id="paint-canvas"></canvas>
    <div id="legend">${legend}</div>
    <label>brush <input id="brush-radius" type="range" min="1" max="16" value="6"></label>
    <button type="button" id="undo">undo</button>
    <button type="button" id="redo">redo</button>
  </section>
  <section class="pane">
    <div id="sliders">${sliderRows}</div>
    <div id="presets">${presetButtons}</div>
    <div id="top3"></div>
    <label>seed <input id="seed" type="number" min="0" value="${seed}"></label>
    <div><select id="sweep-attr">${sweepOptions}</select>
      <button type="button" id="sweep-run">sweep</button></div>
    <div id="filmstrip"></div>
  </section>
  <section class="pane">
    <img id="preview-image" alt="preview">
    <button type="button" id="use-preview" disabled>manipulate this preview</button>
    <input id="photo-file" type="file" accept="image/png">
    <span id="input-note"></span>
    <button type="button" id="manipulate-run" disabled>run manipulation</button>
    <div id="job-status"></div>
    <div id="error-panel" hidden></div>
    <div id="triptych"></div>
    <div id="downloads"></div>
  </section>
</main>`;
}

function rgbFor(label: number): [number, number, number] {
  const hex = colorFor(label).replace("#", "");
  return [
    parseInt(hex.slice(0, 2), 16),
    parseInt(hex.slice(2, 4), 16),
    parseInt(hex.slice(4, 6), 16),
  ];
}

function totalSeconds(result: ManipulationPayload): number {
  return Object.values(result.timings ?? {}).reduce((sum, value) => sum + value, 0);
}
