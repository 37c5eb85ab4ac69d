// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { CatalogResponse, PredictionsResponse } from "../src/api.js";
import {
  renderBadge,
  renderTable,
  renderTypePicker,
  renderVersionBadge,
} from "../src/render.js";

const RESPONSE: PredictionsResponse = {
  table_id: "t0",
  model_version: 3,
  catalog_version: 11,
  predictions: [
    { table: "t0", column: 0, type: "city", confidence: 0.92, estimator: "header", header: "city" },
    { table: "t0", column: 1, type: "email", confidence: 0.4, estimator: "classifier", header: "contact" },
    { table: "t0", column: 2, type: "null", confidence: 0, estimator: "none", header: "junk" },
  ],
};

const CATALOG: CatalogResponse = {
  version: 11,
  types: [
    { name: "null", category: "background" },
    { name: "city", category: "location" },
    { name: "country", category: "location" },
    { name: "email", category: "contact" },
  ],
};

describe("table rendering", () => {
  it("shows one badge per column", () => {
    const view = renderTable(document, RESPONSE, null, () => {});
    expect(view.querySelectorAll(".badge")).toHaveLength(3);
    expect(view.querySelectorAll(".header-cell")).toHaveLength(3);
  });

  it("abstained columns show an em dash at zero confidence", () => {
    const badge = renderBadge(document, RESPONSE.predictions[2]);
    expect(badge.querySelector(".badge-type")!.textContent).toBe("—");
    expect((badge.querySelector(".confidence-fill") as HTMLElement).style.width).toBe("0%");
    expect(badge.querySelector(".badge-estimator")!.textContent).toBe("none");
  });

  it("confidence renders as a 0-100 bar with the emitting estimator", () => {
    const badge = renderBadge(document, RESPONSE.predictions[0]);
    expect((badge.querySelector(".confidence-fill") as HTMLElement).style.width).toBe("92%");
    expect(badge.querySelector(".badge-estimator")!.textContent).toBe("header");
  });

  it("renders the value grid under the headers", () => {
    const view = renderTable(document, RESPONSE, [["a", "b", "c"], ["d", "e", "f"]], () => {});
    expect(view.querySelectorAll(".value-row")).toHaveLength(2);
    expect(view.querySelectorAll(".value-cell")).toHaveLength(6);
  });
});

describe("version badge", () => {
  it("shows the server's model version", () => {
    const badge = renderVersionBadge(document, 3, "idle");
    expect(badge.textContent).toContain("model v3");
    expect(badge.querySelector(".status-pill")).toBeNull();
  });

  it("shows the adaptation status while a cycle runs", () => {
    const badge = renderVersionBadge(document, 3, "retraining");
    expect(badge.querySelector(".status-pill")!.textContent).toBe("retraining");
  });
});

describe("type picker", () => {
  it("groups catalog types by category and hides the background type", () => {
    const picker = renderTypePicker(document, CATALOG, () => {});
    const groups = [...picker.querySelectorAll(".picker-group")].map(
      (g) => (g as HTMLElement).dataset.category,
    );
    expect(groups).toEqual(["location", "contact"]);
    const names = [...picker.querySelectorAll(".picker-type")].map((b) => b.textContent);
    expect(names).toEqual(["city", "country", "email"]);
  });

  it("picking an existing type reports newType false", () => {
    let picked: [string, { newType: boolean }] | null = null;
    const picker = renderTypePicker(document, CATALOG, (t, o) => (picked = [t, o]));
    (picker.querySelector(".picker-type") as HTMLButtonElement).click();
    expect(picked).toEqual(["city", { newType: false }]);
  });

  it("free-text entry defines a new type with an optional regex", () => {
    let picked: [string, { newType: boolean; regex?: string }] | null = null;
    const picker = renderTypePicker(document, CATALOG, (t, o) => (picked = [t, o]));
    (picker.querySelector(".picker-new-name") as HTMLInputElement).value = "ORCID";
    (picker.querySelector(".picker-new-regex") as HTMLInputElement).value = "\\d{4}-\\d{4}";
    (picker.querySelector(".picker-new-submit") as HTMLButtonElement).click();
    expect(picked).toEqual(["orcid", { newType: true, regex: "\\d{4}-\\d{4}" }]);
  });
});
