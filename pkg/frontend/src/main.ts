/** Single-page wiring: file upload, table views, correction dialog,
 * annotation mode. */

import { Client } from "./api.js";
import { AnnotationSession, ColumnRef } from "./annotations.js";
import {
  renderBanner,
  renderTable,
  renderTypePicker,
  renderVersionBadge,
} from "./render.js";
import { Store } from "./state.js";

/** Just enough CSV handling for the value grid; the server does the real
 * parsing. */
export function csvGrid(csv: string): string[][] {
  return csv
    .trim()
    .split(/\r?\n/)
    .slice(1)
    .map((line) => line.split(","));
}

export function boot(doc: Document, baseUrl = ""): Store {
  const client = new Client(baseUrl);
  const store = new Store(client);
  const grids = new Map<string, string[][]>();
  let annotating: AnnotationSession | null = null;
  let pickerTarget: { tableId: string; columnIndex: number } | null = null;

  const topBar = doc.getElementById("top-bar")!;
  const tablesRoot = doc.getElementById("tables")!;
  const pickerRoot = doc.getElementById("picker")!;
  const bannerRoot = doc.getElementById("banner")!;

  function render(): void {
    const s = store.snapshot;
    topBar.replaceChildren(renderVersionBadge(doc, s.modelVersion, s.status));
    tablesRoot.replaceChildren(
      ...[...s.tables.values()].map((resp) =>
        renderTable(doc, resp, grids.get(resp.table_id) ?? null, (col) => {
          pickerTarget = { tableId: resp.table_id, columnIndex: col };
          render();
        }),
      ),
    );
    pickerRoot.replaceChildren();
    if (pickerTarget && s.catalog) {
      pickerRoot.appendChild(
        renderTypePicker(doc, s.catalog, (type, opts) => {
          const t = pickerTarget!;
          pickerTarget = null;
          void store.correct({
            tableId: t.tableId,
            columnIndex: t.columnIndex,
            type,
            newType: opts.newType,
            regex: opts.regex,
          });
        }),
      );
    }
    bannerRoot.replaceChildren();
    if (s.error) {
      bannerRoot.appendChild(renderBanner(doc, s.error, () => store.clearError()));
    }
  }

  store.subscribe(render);
  void store.refreshCatalog();

  const input = doc.getElementById("csv-input") as HTMLInputElement | null;
  input?.addEventListener("change", async () => {
    const file = input.files?.[0];
    if (!file) return;
    const text = await file.text();
    const id = await store.uploadCsv(text);
    if (id) grids.set(id, csvGrid(text));
    render();
  });

  const exportBtn = doc.getElementById("export-annotations");
  exportBtn?.addEventListener("click", () => {
    if (!annotating) return;
    const blob = new Blob([annotating.exportJsonl() + "\n"], {
      type: "application/jsonl",
    });
    const a = doc.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = `annotations-${annotating.worker}.jsonl`;
    a.click();
  });

  const annotateBtn = doc.getElementById("start-annotation");
  annotateBtn?.addEventListener("click", () => {
    const s = store.snapshot;
    const worker = (doc.getElementById("worker-id") as HTMLInputElement).value;
    const targets: ColumnRef[] = [...s.tables.values()].flatMap((resp) =>
      resp.predictions.map((p) => ({ table: resp.table_id, column: p.column })),
    );
    const typeList = (s.catalog?.types ?? []).map((t) => t.name);
    annotating = new AnnotationSession(worker || "anonymous", typeList, targets);
    render();
  });

  render();
  return store;
}

declare global {
  interface Window {
    adatyper?: Store;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.adatyper = boot(document);
}
