/**
 * Expression editor: pick a note, move the six sliders, render, listen,
 * inspect the returned f0/amplitude contours, iterate. All state lives in
 * the EditorStore; the server is stateless and receives the full document
 * on every render.
 */

import { ApiClient, RenderQueue } from "./api.js";
import type { RenderOutcome } from "./api.js";
import { drawContours } from "./contours.js";
import {
  CONTROL_NAMES,
  DEFAULT_EXPRESSION,
  EditorStore,
  PRESETS,
  type ControlId,
  type RenderRequestBody,
  type ScoreDocument,
} from "./model.js";

const DEMO_SCORE: ScoreDocument = {
  frame_rate: 250,
  total_frames: 520,
  notes: [
    { pitch: 41, onset: 0, offset: 125, expression: { ...DEFAULT_EXPRESSION } },
    { pitch: 43, onset: 125, offset: 250,
      expression: { ...DEFAULT_EXPRESSION } },
    { pitch: 45, onset: 260, offset: 385,
      expression: { ...DEFAULT_EXPRESSION } },
    { pitch: 46, onset: 385, offset: 510,
      expression: { ...DEFAULT_EXPRESSION } },
  ],
};

const store = new EditorStore(DEMO_SCORE);
const api = new ApiClient("");
const queue = new RenderQueue<RenderRequestBody, RenderOutcome>(
  (body) => api.render(body));

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

function noteLabel(i: number): string {
  const names = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A",
                 "A#", "B"];
  const n = store.document.notes[i];
  const name = `${names[n.pitch % 12]}${Math.floor(n.pitch / 12) - 1}`;
  return `${i + 1}: ${name} [${n.onset}-${n.offset})`;
}

function renderNoteList(): void {
  const list = $("notes");
  list.innerHTML = "";
  store.document.notes.forEach((_, i) => {
    const item = document.createElement("button");
    item.className = "note" + (store.selection.has(i) ? " selected" : "");
    item.textContent = noteLabel(i);
    item.onclick = (ev) => {
      if (!(ev as MouseEvent).shiftKey) store.selection.clear();
      if (store.selection.has(i)) store.selection.delete(i);
      else store.selection.add(i);
      refresh();
    };
    list.appendChild(item);
  });
}

function selectedIndex(): number | null {
  const first = [...store.selection].sort((a, b) => a - b)[0];
  return first === undefined ? null : first;
}

function renderSliders(): void {
  const panel = $("sliders");
  panel.innerHTML = "";
  const index = selectedIndex();
  if (index === null) {
    panel.textContent = "select a note to edit its expression";
    return;
  }
  const expr = store.document.notes[index].expression ?? DEFAULT_EXPRESSION;
  for (const name of CONTROL_NAMES) {
    const row = document.createElement("label");
    row.className = "slider-row";
    const caption = document.createElement("span");
    caption.textContent = name.split("_").join(" ");
    const value = document.createElement("span");
    value.className = "value";
    value.textContent = expr[name].toFixed(2);
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(expr[name]);
    slider.oninput = () => {
      value.textContent = Number(slider.value).toFixed(2);
    };
    slider.onchange = () => {
      // one commit per released drag = one undo step
      store.editNoteExpression(index, name as ControlId,
                               Number(slider.value));
      refresh();
    };
    row.append(caption, slider, value);
    panel.appendChild(row);
  }
}

function setStatus(text: string, isError = false): void {
  const el = $("status");
  el.textContent = text;
  el.className = isError ? "error" : "";
}

async function renderAndPlay(): Promise<void> {
  const errors = store.validationErrors();
  if (errors.length > 0) {
    setStatus(errors.join("; "), true);
    return;
  }
  setStatus("rendering...");
  const seed = Number(($("seed") as HTMLInputElement).value) || 0;
  const request = store.buildRenderRequest(seed);
  const outcome = await queue.submit(request);
  if (outcome === null) return; // superseded by a newer request
  if (!outcome.ok) {
    setStatus(`server rejected the document (${outcome.status}): `
              + outcome.error, true);
    return;
  }
  const params = await api.renderParams(request);
  if ("ok" in params) {
    setStatus(`parameter fetch failed: ${params.error}`, true);
    return;
  }
  store.lastRender = { wav: outcome.wav, params };
  store.dirty = false;
  const audio = $("player") as HTMLAudioElement;
  audio.src = URL.createObjectURL(
    new Blob([outcome.wav], { type: "audio/wav" }));
  void audio.play().catch(() => undefined);
  drawContours($("contours") as HTMLCanvasElement, params,
               store.document.notes, store.document.total_frames);
  const clamps = params.clamps ?? [];
  setStatus(clamps.length > 0
    ? `rendered with ${clamps.length} clamped control(s); see console`
    : "rendered");
  if (clamps.length > 0) console.warn("clamped controls:", clamps);
}

function refresh(): void {
  renderNoteList();
  renderSliders();
  ($("undo") as HTMLButtonElement).disabled = store.undoDepth === 0;
  $("dirty").textContent = store.dirty ? "unsaved changes" : "";
}

function wire(): void {
  $("render").onclick = () => void renderAndPlay();
  $("undo").onclick = () => {
    store.undo();
    refresh();
  };
  for (const name of Object.keys(PRESETS)) {
    const button = document.createElement("button");
    button.textContent = name;
    button.onclick = () => {
      if (store.selection.size === 0) {
        setStatus("select notes first", true);
        return;
      }
      store.applyPreset(name, store.selection);
      refresh();
    };
    $("presets").appendChild(button);
  }
  void api.health().then((ok) => {
    if (!ok) setStatus("render service unreachable", true);
  });
  refresh();
}

wire();
