/**
 * Editor state: the score document, selection, an undo stack of snapshots,
 * and client-side validation mirroring the server's range rules.
 *
 * Every user-visible edit (one slider commit, one preset application, one
 * note-field change) is exactly one undo step. Slider values are clamped at
 * input time, so the editor can never build a document the server would
 * reject for a range error.
 */

export interface Expression {
  volume: number;
  volume_fluctuation: number;
  volume_peak_position: number;
  vibrato: number;
  brightness: number;
  attack_noise: number;
}

export type ControlId = keyof Expression;

export const CONTROL_NAMES: readonly ControlId[] = [
  "volume",
  "volume_fluctuation",
  "volume_peak_position",
  "vibrato",
  "brightness",
  "attack_noise",
];

export const DEFAULT_EXPRESSION: Expression = {
  volume: 0.5,
  volume_fluctuation: 0.5,
  volume_peak_position: 0.5,
  vibrato: 0.5,
  brightness: 0.5,
  attack_noise: 0.5,
};

export interface NoteEntry {
  pitch: number;
  onset: number;
  offset: number;
  expression?: Expression;
}

export interface ScoreDocument {
  frame_rate: number;
  total_frames: number;
  notes: NoteEntry[];
}

export interface RenderRequestBody {
  score: ScoreDocument;
  noise_seed: number;
}

/** Served by /api/render/params (JSON form of the parameter dump). */
export interface ParamsSummary {
  n_frames: number;
  f0: number[];
  amplitude: number[];
  harmonic_distribution: number[][];
  noise_magnitudes: number[][];
  clamps?: unknown[];
}

/** Relative control adjustments applied as one-click bundles. */
export const PRESETS: Record<string, Partial<Record<ControlId, number>>> = {
  // short detached notes: more internal movement, early peak, hard attack
  staccato: {
    volume_fluctuation: +0.25,
    volume_peak_position: -0.3,
    attack_noise: +0.3,
  },
  // connected notes: soft attacks
  legato: { attack_noise: -0.3 },
};

export function clamp01(value: number): number | null {
  if (!Number.isFinite(value)) return null;
  return Math.min(1, Math.max(0, value));
}

export function cloneDocument(doc: ScoreDocument): ScoreDocument {
  return {
    frame_rate: doc.frame_rate,
    total_frames: doc.total_frames,
    notes: doc.notes.map((n) => ({
      pitch: n.pitch,
      onset: n.onset,
      offset: n.offset,
      ...(n.expression ? { expression: { ...n.expression } } : {}),
    })),
  };
}

export function documentsEqual(a: ScoreDocument, b: ScoreDocument): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/** Mirror of the server-side score checks; returns [] when submittable. */
export function validateDocument(doc: ScoreDocument): string[] {
  const problems: string[] = [];
  if (doc.frame_rate !== 250) problems.push("frame_rate must be 250");
  if (!Number.isInteger(doc.total_frames) || doc.total_frames < 0) {
    problems.push("total_frames must be a non-negative integer");
  }
  let prev: NoteEntry | null = null;
  doc.notes.forEach((note, i) => {
    const where = `notes[${i}]`;
    if (!Number.isInteger(note.pitch) || note.pitch < 1 || note.pitch > 127) {
      problems.push(`${where}: pitch must be an integer in [1,127]`);
    }
    if (!Number.isInteger(note.onset) || note.onset < 0) {
      problems.push(`${where}: onset must be a non-negative integer`);
    }
    if (!Number.isInteger(note.offset) || note.offset <= note.onset) {
      problems.push(`${where}: offset must exceed onset`);
    }
    if (note.offset > doc.total_frames) {
      problems.push(`${where}: offset exceeds total_frames`);
    }
    if (prev && note.onset < prev.offset) {
      problems.push(`${where}: overlaps previous note at frame ${note.onset}`);
    }
    if (note.expression) {
      for (const name of CONTROL_NAMES) {
        const v = note.expression[name];
        if (!Number.isFinite(v) || v < 0 || v > 1) {
          problems.push(`${where}: expression.${name} out of [0,1]`);
        }
      }
    }
    prev = note;
  });
  return problems;
}

export interface LastRender {
  wav: ArrayBuffer;
  params: ParamsSummary;
}

export class EditorStore {
  private doc: ScoreDocument;
  private undoStack: ScoreDocument[] = [];
  selection: Set<number> = new Set();
  dirty = false;
  lastRender: LastRender | null = null;

  constructor(initial: ScoreDocument) {
    this.doc = cloneDocument(initial);
  }

  get document(): ScoreDocument {
    return this.doc;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  validationErrors(): string[] {
    return validateDocument(this.doc);
  }

  buildRenderRequest(seed: number): RenderRequestBody {
    return { score: cloneDocument(this.doc), noise_seed: seed };
  }

  private beginEdit(): ScoreDocument {
    // snapshot pushed only if the edit actually lands (see commit)
    return cloneDocument(this.doc);
  }

  private commit(snapshot: ScoreDocument): void {
    this.undoStack.push(snapshot);
    this.dirty = true;
  }

  private expressionOf(index: number): Expression {
    const note = this.doc.notes[index];
    if (!note.expression) note.expression = { ...DEFAULT_EXPRESSION };
    return note.expression;
  }

  /** One slider commit: clamp, update, one undo step. Non-finite input is
   * rejected outright (never enters the document). */
  editNoteExpression(index: number, control: ControlId, value: number):
      boolean {
    if (index < 0 || index >= this.doc.notes.length) return false;
    const clamped = clamp01(value);
    if (clamped === null) return false;
    const snapshot = this.beginEdit();
    const expr = this.expressionOf(index);
    if (expr[control] === clamped) return false; // no-op, no undo entry
    expr[control] = clamped;
    this.commit(snapshot);
    return true;
  }

  /** Numeric note-field edit (pitch/timing). Field-level rules are enforced
   * here; sequence-level problems (overlaps) surface via validation. */
  editNoteField(index: number, field: "pitch" | "onset" | "offset",
                value: number): boolean {
    if (index < 0 || index >= this.doc.notes.length) return false;
    if (!Number.isInteger(value)) return false;
    if (field === "pitch" && (value < 1 || value > 127)) return false;
    if (field !== "pitch" && value < 0) return false;
    const snapshot = this.beginEdit();
    if (this.doc.notes[index][field] === value) return false;
    this.doc.notes[index][field] = value;
    this.doc.total_frames = Math.max(
      this.doc.total_frames, ...this.doc.notes.map((n) => n.offset));
    this.commit(snapshot);
    return true;
  }

  /** Apply a preset's relative adjustments to every selected note as a
   * single undo step. */
  applyPreset(name: keyof typeof PRESETS, indices: Iterable<number>):
      boolean {
    const deltas = PRESETS[name];
    if (!deltas) return false;
    const snapshot = this.beginEdit();
    let changed = false;
    for (const index of indices) {
      if (index < 0 || index >= this.doc.notes.length) continue;
      const expr = this.expressionOf(index);
      for (const [control, delta] of Object.entries(deltas)) {
        const id = control as ControlId;
        const next = clamp01(expr[id] + (delta as number));
        if (next !== null && next !== expr[id]) {
          expr[id] = next;
          changed = true;
        }
      }
    }
    if (changed) this.commit(snapshot);
    return changed;
  }

  undo(): boolean {
    const snapshot = this.undoStack.pop();
    if (!snapshot) return false;
    this.doc = snapshot;
    this.dirty = this.undoStack.length > 0;
    return true;
  }
}
