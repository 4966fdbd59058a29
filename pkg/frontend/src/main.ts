/**
 * DOM wiring: corpus/pipeline pickers, the draggable scatterplot, the
 * update-model button, the history slider, and the training-status line.
 */

import { ApiClient } from "./api.js";
import { SessionStore } from "./state.js";
import { RenderState, Scatterplot, hitTest } from "./scatter.js";
import { makeMapping } from "./viewport.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const serverInput = $<HTMLInputElement>("server");
const corpusSelect = $<HTMLSelectElement>("corpus");
const pipelineSelect = $<HTMLSelectElement>("pipeline");
const startButton = $<HTMLButtonElement>("start");
const updateButton = $<HTMLButtonElement>("update");
const colorToggle = $<HTMLInputElement>("color-by-label");
const historySlider = $<HTMLInputElement>("history");
const historyLabel = $<HTMLSpanElement>("history-label");
const statusLine = $<HTMLSpanElement>("status");
const bannerBox = $<HTMLDivElement>("banner");
const canvas = $<HTMLCanvasElement>("plot");

let api = new ApiClient(serverInput.value);
let store = new SessionStore(api, 500, sync);
let mapping = makeMapping(canvas.width, canvas.height);
let plot = new Scatterplot(canvas, mapping);
let selectedId: string | null = null;
let dragging = false;

function renderState(): RenderState | null {
  if (!store.layout) return null;
  return {
    ids: store.layout.ids,
    positions: store.layout.ids.map((id) => store.positionOf(id)),
    labels: store.layout.labels,
    colorByLabel: store.colorByLabel,
    pendingIds: new Set(store.pending.keys()),
    selectedId,
  };
}

function sync(): void {
  updateButton.disabled = !store.canUpdate();
  updateButton.textContent =
    store.status === "training" ? "Training..." : `Update model (${store.pending.size} moves)`;
  statusLine.textContent = store.sessionId
    ? `${store.pipeline} session ${store.sessionId} | iteration ${store.layout?.iteration ?? 0}` +
      ` | status ${store.status}`
    : "no session";
  bannerBox.hidden = store.banner === null;
  bannerBox.textContent = store.banner ?? "";
  historySlider.max = String(store.latestIteration);
  historyLabel.textContent = `${historySlider.value}/${store.latestIteration}`;
  const state = renderState();
  if (state) plot.render(state);
}

async function refreshCorpora(): Promise<void> {
  const corpora = await api.listCorpora();
  corpusSelect.innerHTML = "";
  for (const c of corpora) {
    const opt = document.createElement("option");
    opt.value = c.corpus_id;
    opt.textContent = `${c.corpus_id} (${c.n} docs, ${c.label_count} classes)`;
    corpusSelect.appendChild(opt);
  }
}

startButton.addEventListener("click", async () => {
  api = new ApiClient(serverInput.value);
  store = new SessionStore(api, 500, sync);
  await store.startSession(corpusSelect.value, pipelineSelect.value, { seed: 0 });
  historySlider.value = "0";
  sync();
});

updateButton.addEventListener("click", async () => {
  const result = await store.updateModel();
  if (result) {
    const state = renderState();
    if (state) await plot.animate(state, result.from, result.to, 400);
    historySlider.value = String(store.latestIteration);
    sync();
  }
});

colorToggle.addEventListener("change", () => {
  store.colorByLabel = colorToggle.checked;
  sync();
});

historySlider.addEventListener("change", async () => {
  await store.browseHistory(Number(historySlider.value));
});

canvas.addEventListener("pointerdown", (ev) => {
  const state = renderState();
  if (!state) return;
  const rect = canvas.getBoundingClientRect();
  selectedId = hitTest(mapping, state, ev.clientX - rect.left, ev.clientY - rect.top);
  dragging = selectedId !== null;
  if (dragging) canvas.setPointerCapture(ev.pointerId);
  sync();
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging || !selectedId) return;
  const rect = canvas.getBoundingClientRect();
  const [x, y] = mapping.toViewport(ev.clientX - rect.left, ev.clientY - rect.top);
  store.dragTo(selectedId, x, y);
});

canvas.addEventListener("pointerup", () => {
  dragging = false;
  selectedId = null;
  sync();
});

serverInput.addEventListener("change", async () => {
  api = new ApiClient(serverInput.value);
  await refreshCorpora();
});

refreshCorpora().catch(() => {
  bannerBox.hidden = false;
  bannerBox.textContent = "Cannot reach the session service - is `sidr serve` running?";
});
sync();
