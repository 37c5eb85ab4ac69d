/** Application store: open tables, their latest predictions, the service's
 * model version, and the correction workflow.
 *
 * Corrections are never applied optimistically — a badge only changes after
 * the server confirms the adaptation cycle. While one cycle runs, further
 * corrections queue client-side and are surfaced as "pending".
 */

import {
  ApiError,
  CatalogResponse,
  Client,
  FeedbackRequest,
  PredictionsResponse,
} from "./api.js";

export type AdaptationStatus = "idle" | "pending" | "retraining" | "updated";

export interface Correction {
  tableId: string;
  columnIndex: number;
  type: string;
  newType?: boolean;
  regex?: string;
}

export interface AppState {
  tables: Map<string, PredictionsResponse>;
  modelVersion: number;
  catalog: CatalogResponse | null;
  status: AdaptationStatus;
  queued: Correction[];
  error: string | null;
}

type Listener = (state: AppState) => void;

export class Store {
  private readonly state: AppState = {
    tables: new Map(),
    modelVersion: 0,
    catalog: null,
    status: "idle",
    queued: [],
    error: null,
  };
  private listeners: Listener[] = [];
  private adapting = false;

  constructor(private readonly client: Client) {}

  get snapshot(): AppState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  private fail(err: unknown): void {
    this.state.error = err instanceof Error ? err.message : String(err);
    this.notify();
  }

  clearError(): void {
    this.state.error = null;
    this.notify();
  }

  async refreshCatalog(): Promise<void> {
    try {
      this.state.catalog = await this.client.catalog();
      this.notify();
    } catch (err) {
      this.fail(err);
    }
  }

  async uploadCsv(csv: string): Promise<string | null> {
    try {
      const resp = await this.client.uploadCsv(csv);
      this.state.tables.set(resp.table_id, resp);
      this.state.modelVersion = resp.model_version;
      this.state.error = null;
      this.notify();
      return resp.table_id;
    } catch (err) {
      this.fail(err);
      return null;
    }
  }

  /** Queue a correction and start draining unless a cycle is in flight. */
  async correct(c: Correction): Promise<void> {
    this.state.queued.push(c);
    if (this.adapting) {
      this.state.status = "pending";
      this.notify();
      return;
    }
    await this.drain();
  }

  private async drain(): Promise<void> {
    this.adapting = true;
    try {
      while (this.state.queued.length > 0) {
        const c = this.state.queued[0];
        this.state.status = "retraining";
        this.notify();
        const req: FeedbackRequest = {
          table_id: c.tableId,
          column_index: c.columnIndex,
          corrected_type: c.type,
          new_type: c.newType,
          regex: c.regex,
        };
        try {
          const resp = await this.client.feedback(req);
          this.state.queued.shift();
          this.state.modelVersion = resp.model_version;
          await this.refetchAll();
          await this.refreshCatalog();
          this.state.status = "updated";
          this.state.error = null;
          this.notify();
        } catch (err) {
          if (err instanceof ApiError && err.busy) {
            // server-side cycle in flight; keep the correction queued
            this.state.status = "pending";
            this.notify();
            return;
          }
          this.state.queued.shift();
          this.state.status = "idle";
          this.fail(err);
        }
      }
    } finally {
      this.adapting = false;
    }
  }

  /** Retry queued corrections, e.g. after a 409. */
  async retryPending(): Promise<void> {
    if (!this.adapting && this.state.queued.length > 0) await this.drain();
  }

  /** Every open table is re-predicted with the current model. */
  private async refetchAll(): Promise<void> {
    for (const id of this.state.tables.keys()) {
      const resp = await this.client.predictions(id);
      this.state.tables.set(id, resp);
      this.state.modelVersion = resp.model_version;
    }
  }
}
