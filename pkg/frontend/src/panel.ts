// Control panel: every edit becomes a partial config message; the panel
// itself only ever displays values the server has acknowledged, so a
// rejected edit snaps back and shows the server's reason inline.

import type { ClientMessage } from "./protocol.js";
import type { ViewState } from "./viewstate.js";

const INT_FIELDS = new Set([
  "frame_size", "hop_size", "lpc_order", "max_formants", "n_fft",
]);

const NUMERIC_FIELDS = [
  "sample_rate", "frame_size", "hop_size", "lpc_order", "preemphasis",
  "threshold_db", "max_formants", "max_bandwidth_hz", "n_fft",
] as const;

export type ParsedEdit =
  | { ok: true; value: number }
  | { ok: false; error: string };

/** Local syntax check only; range rules stay on the server. */
export function parseConfigEdit(field: string, raw: string): ParsedEdit {
  const text = raw.trim();
  if (text === "") return { ok: false, error: `${field} is empty` };
  const value = Number(text);
  if (!Number.isFinite(value)) {
    return { ok: false, error: `${field} must be a number` };
  }
  if (INT_FIELDS.has(field) && !Number.isInteger(value)) {
    return { ok: false, error: `${field} must be an integer` };
  }
  return { ok: true, value };
}

export class ControlPanel {
  private inputs = new Map<string, HTMLInputElement>();
  private highlightBoxes: HTMLInputElement[] = [];
  private smoothing: HTMLInputElement;
  private smoothingLabel: HTMLSpanElement;
  private deviceSelect: HTMLSelectElement;
  private errorLine: HTMLDivElement;
  private localError: string | null = null;
  private knownDevices = "";

  constructor(
    root: HTMLElement,
    private readonly send: (msg: ClientMessage) => boolean,
  ) {
    const details = document.createElement("details");
    details.open = true;
    const summary = document.createElement("summary");
    summary.textContent = "controls";
    details.appendChild(summary);

    this.errorLine = document.createElement("div");
    this.errorLine.className = "panel-error";
    details.appendChild(this.errorLine);

    const deviceRow = document.createElement("label");
    deviceRow.className = "panel-row";
    deviceRow.textContent = "device";
    this.deviceSelect = document.createElement("select");
    this.deviceSelect.addEventListener("change", () => {
      this.localError = null;
      this.send({ type: "config", device: this.deviceSelect.value || null });
    });
    deviceRow.appendChild(this.deviceSelect);
    details.appendChild(deviceRow);

    for (const field of NUMERIC_FIELDS) {
      const row = document.createElement("label");
      row.className = "panel-row";
      row.textContent = field.replace(/_/g, " ");
      const input = document.createElement("input");
      input.type = "text";
      input.addEventListener("change", () => this.commit(field, input));
      row.appendChild(input);
      details.appendChild(row);
      this.inputs.set(field, input);
    }

    const highlightRow = document.createElement("div");
    highlightRow.className = "panel-row";
    highlightRow.textContent = "highlight";
    for (let n = 1; n <= 4; n += 1) {
      const wrap = document.createElement("label");
      wrap.className = "panel-check";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.addEventListener("change", () => this.commitHighlight());
      wrap.appendChild(box);
      wrap.appendChild(document.createTextNode(`F${n}`));
      highlightRow.appendChild(wrap);
      this.highlightBoxes.push(box);
    }
    details.appendChild(highlightRow);

    const smoothingRow = document.createElement("label");
    smoothingRow.className = "panel-row";
    smoothingRow.textContent = "smoothing";
    this.smoothing = document.createElement("input");
    this.smoothing.type = "range";
    this.smoothing.min = "0";
    this.smoothing.max = "0.95";
    this.smoothing.step = "0.05";
    this.smoothing.addEventListener("change", () => {
      this.localError = null;
      this.send({ type: "config", display_smoothing: Number(this.smoothing.value) });
    });
    this.smoothingLabel = document.createElement("span");
    smoothingRow.appendChild(this.smoothing);
    smoothingRow.appendChild(this.smoothingLabel);
    details.appendChild(smoothingRow);

    root.appendChild(details);
  }

  /** Mirror acked state into the widgets; never shows unconfirmed values. */
  sync(state: ViewState): void {
    const acked = state.acked;
    if (acked !== null) {
      for (const field of NUMERIC_FIELDS) {
        const input = this.inputs.get(field)!;
        if (document.activeElement !== input) {
          input.value = String(acked[field]);
        }
      }
      this.highlightBoxes.forEach((box, i) => {
        box.checked = acked.highlight.includes(i + 1);
      });
      if (document.activeElement !== this.smoothing) {
        this.smoothing.value = String(acked.display_smoothing);
      }
      this.smoothingLabel.textContent = acked.display_smoothing.toFixed(2);
    }

    const key = state.devices.join("\n");
    if (key !== this.knownDevices) {
      this.knownDevices = key;
      this.deviceSelect.replaceChildren();
      const none = document.createElement("option");
      none.value = "";
      none.textContent = "(default)";
      this.deviceSelect.appendChild(none);
      for (const name of state.devices) {
        const opt = document.createElement("option");
        opt.value = name;
        opt.textContent = name;
        this.deviceSelect.appendChild(opt);
      }
    }
    if (acked !== null && document.activeElement !== this.deviceSelect) {
      this.deviceSelect.value = acked.device ?? "";
    }

    const error = this.localError ?? state.panelError;
    this.errorLine.textContent = error ?? "";
    this.errorLine.style.display = error === null ? "none" : "block";
  }

  private commit(field: string, input: HTMLInputElement): void {
    const parsed = parseConfigEdit(field, input.value);
    if (!parsed.ok) {
      this.localError = parsed.error;
      input.blur(); // next sync snaps back to the acked value
      return;
    }
    this.localError = null;
    this.send({ type: "config", [field]: parsed.value });
    input.blur();
  }

  private commitHighlight(): void {
    this.localError = null;
    const picked = this.highlightBoxes
      .map((box, i) => (box.checked ? i + 1 : 0))
      .filter((n) => n > 0);
    this.send({ type: "config", highlight: picked });
  }
}
