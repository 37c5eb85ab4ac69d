/** DOM rendering. Pure functions from data to elements; no fetching here. */

import { CatalogResponse, Prediction, PredictionsResponse } from "./api.js";
import { AdaptationStatus } from "./state.js";

const NULL_TYPE = "null";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Type badge: type name (an em dash for abstentions), a 0-100 confidence
 * bar, and the emitting estimator. */
export function renderBadge(doc: Document, pred: Prediction): HTMLElement {
  const abstained = pred.type === NULL_TYPE && pred.estimator === "none";
  const badge = el(doc, "div", abstained ? "badge badge-null" : "badge");
  badge.dataset.column = String(pred.column);
  badge.appendChild(el(doc, "span", "badge-type", abstained ? "—" : pred.type));
  const pct = Math.round(pred.confidence * 100);
  const bar = el(doc, "div", "confidence-bar");
  const fill = el(doc, "div", "confidence-fill");
  fill.style.width = `${pct}%`;
  bar.title = `${pct}%`;
  bar.appendChild(fill);
  badge.appendChild(bar);
  badge.appendChild(el(doc, "span", "badge-estimator", pred.estimator));
  return badge;
}

/** Column grid: badge row, header row, then value cells. */
export function renderTable(
  doc: Document,
  resp: PredictionsResponse,
  grid: string[][] | null,
  onCorrect: (columnIndex: number) => void,
): HTMLElement {
  const root = el(doc, "div", "table-view");
  root.dataset.tableId = resp.table_id;
  const badges = el(doc, "div", "badge-row");
  for (const p of resp.predictions) {
    const cell = el(doc, "div", "badge-cell");
    cell.appendChild(renderBadge(doc, p));
    const btn = el(doc, "button", "correct-btn", "correct");
    btn.addEventListener("click", () => onCorrect(p.column));
    cell.appendChild(btn);
    badges.appendChild(cell);
  }
  root.appendChild(badges);
  const header = el(doc, "div", "header-row");
  for (const p of resp.predictions) {
    header.appendChild(el(doc, "div", "header-cell", p.header));
  }
  root.appendChild(header);
  if (grid) {
    for (const row of grid) {
      const tr = el(doc, "div", "value-row");
      for (const v of row) tr.appendChild(el(doc, "div", "value-cell", v));
      root.appendChild(tr);
    }
  }
  return root;
}

/** Header-bar badge showing the server's current model version plus the
 * adaptation status. */
export function renderVersionBadge(
  doc: Document,
  modelVersion: number,
  status: AdaptationStatus,
): HTMLElement {
  const node = el(doc, "div", "version-badge", `model v${modelVersion}`);
  node.dataset.status = status;
  if (status !== "idle") {
    node.appendChild(el(doc, "span", "status-pill", status));
  }
  return node;
}

/** Catalog picker grouped by category, with free-text entry for a new type
 * and an optional regex for it. */
export function renderTypePicker(
  doc: Document,
  catalog: CatalogResponse,
  onPick: (type: string, opts: { newType: boolean; regex?: string }) => void,
): HTMLElement {
  const root = el(doc, "div", "type-picker");
  const byCategory = new Map<string, string[]>();
  for (const t of catalog.types) {
    if (t.name === NULL_TYPE) continue;
    const list = byCategory.get(t.category) ?? [];
    list.push(t.name);
    byCategory.set(t.category, list);
  }
  for (const [category, names] of byCategory) {
    const group = el(doc, "div", "picker-group");
    group.dataset.category = category;
    group.appendChild(el(doc, "h4", "picker-category", category));
    for (const name of names.sort()) {
      const btn = el(doc, "button", "picker-type", name);
      btn.addEventListener("click", () => onPick(name, { newType: false }));
      group.appendChild(btn);
    }
    root.appendChild(group);
  }
  const form = el(doc, "div", "picker-new");
  const nameInput = el(doc, "input", "picker-new-name");
  nameInput.placeholder = "new type name";
  const regexInput = el(doc, "input", "picker-new-regex");
  regexInput.placeholder = "optional regex";
  const submit = el(doc, "button", "picker-new-submit", "define new type");
  submit.addEventListener("click", () => {
    const name = nameInput.value.trim().toLowerCase();
    if (!name) return;
    onPick(name, { newType: true, regex: regexInput.value.trim() || undefined });
  });
  form.appendChild(nameInput);
  form.appendChild(regexInput);
  form.appendChild(submit);
  root.appendChild(form);
  return root;
}

/** Non-blocking error banner; dismissable. */
export function renderBanner(
  doc: Document,
  message: string,
  onDismiss: () => void,
): HTMLElement {
  const banner = el(doc, "div", "error-banner", message);
  const close = el(doc, "button", "banner-dismiss", "×");
  close.addEventListener("click", onDismiss);
  banner.appendChild(close);
  return banner;
}
