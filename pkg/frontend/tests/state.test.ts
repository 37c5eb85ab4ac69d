import { describe, expect, it } from "vitest";

import {
  CatalogResponse,
  Client,
  FeedbackRequest,
  PredictionsResponse,
} from "../src/api.js";
import { AdaptationStatus, Store } from "../src/state.js";
import { ApiError } from "../src/api.js";

/** In-memory stand-in for the service: one table, corrections really change
 * the re-predicted type and bump the model version. */
class FakeService {
  modelVersion = 0;
  busy = false;
  types: { name: string; category: string }[] = [
    { name: "null", category: "background" },
    { name: "city", category: "location" },
    { name: "email", category: "contact" },
  ];
  corrected = new Map<number, string>();
  feedbackCalls: FeedbackRequest[] = [];

  response(tableId: string): PredictionsResponse {
    const type = (i: number) => this.corrected.get(i) ?? ["city", "email", "null"][i];
    return {
      table_id: tableId,
      model_version: this.modelVersion,
      catalog_version: 11,
      predictions: [0, 1, 2].map((i) => ({
        table: tableId,
        column: i,
        type: type(i),
        confidence: type(i) === "null" ? 0 : 0.9,
        estimator: type(i) === "null" ? "none" : "classifier",
        header: `h${i}`,
      })),
    };
  }

  client(): Client {
    const svc = this;
    return {
      async uploadCsv() {
        return svc.response("t0");
      },
      async predictions(id: string) {
        return svc.response(id);
      },
      async feedback(req: FeedbackRequest) {
        svc.feedbackCalls.push(req);
        if (svc.busy) throw new ApiError(409, "adaptation in progress");
        svc.corrected.set(req.column_index, req.corrected_type);
        if (req.new_type) {
          svc.types.push({ name: req.corrected_type, category: "user-defined" });
        }
        svc.modelVersion += 1;
        return { model_version: svc.modelVersion, catalog_version: 11, report: {} };
      },
      async catalog(): Promise<CatalogResponse> {
        return { version: 11, types: svc.types };
      },
    } as unknown as Client;
  }
}

describe("Store", () => {
  it("upload stores predictions and the model version", async () => {
    const svc = new FakeService();
    const store = new Store(svc.client());
    const id = await store.uploadCsv("a,b,c\n1,2,3\n");
    expect(id).toBe("t0");
    expect(store.snapshot.tables.get("t0")!.predictions).toHaveLength(3);
    expect(store.snapshot.modelVersion).toBe(0);
  });

  it("correction awaits the server, re-fetches, and bumps the version badge", async () => {
    const svc = new FakeService();
    const store = new Store(svc.client());
    await store.uploadCsv("x");
    const seen: AdaptationStatus[] = [];
    store.subscribe((s) => seen.push(s.status));
    await store.correct({ tableId: "t0", columnIndex: 2, type: "junk code", newType: true });
    expect(seen).toContain("retraining");
    expect(seen[seen.length - 1]).toBe("updated");
    expect(store.snapshot.modelVersion).toBe(1);
    // the corrected column shows the corrected type only after re-fetch
    expect(store.snapshot.tables.get("t0")!.predictions[2].type).toBe("junk code");
  });

  it("new type appears in the refreshed catalog", async () => {
    const svc = new FakeService();
    const store = new Store(svc.client());
    await store.uploadCsv("x");
    await store.correct({ tableId: "t0", columnIndex: 1, type: "orcid", newType: true });
    const names = store.snapshot.catalog!.types.map((t) => t.name);
    expect(names).toContain("orcid");
  });

  it("busy server keeps the correction queued as pending, retry drains it", async () => {
    const svc = new FakeService();
    svc.busy = true;
    const store = new Store(svc.client());
    await store.uploadCsv("x");
    await store.correct({ tableId: "t0", columnIndex: 0, type: "email" });
    expect(store.snapshot.status).toBe("pending");
    expect(store.snapshot.queued).toHaveLength(1);
    svc.busy = false;
    await store.retryPending();
    expect(store.snapshot.status).toBe("updated");
    expect(store.snapshot.queued).toHaveLength(0);
    expect(store.snapshot.tables.get("t0")!.predictions[0].type).toBe("email");
  });

  it("non-busy failures surface as a banner, not an exception", async () => {
    const svc = new FakeService();
    const client = svc.client();
    (client as { feedback: unknown }).feedback = async () => {
      throw new ApiError(422, "cannot adapt to the background type");
    };
    const store = new Store(client);
    await store.uploadCsv("x");
    await store.correct({ tableId: "t0", columnIndex: 0, type: "null" });
    expect(store.snapshot.error).toMatch("background type");
    expect(store.snapshot.queued).toHaveLength(0);
  });
});
