/** Typed client for the prediction service. All state changes go through
 * these endpoints; the UI never mutates anything locally. */

export interface Prediction {
  table: string;
  column: number;
  type: string;
  confidence: number;
  estimator: string;
  header: string;
}

export interface PredictionsResponse {
  table_id: string;
  model_version: number;
  catalog_version: number;
  predictions: Prediction[];
}

export interface CatalogType {
  name: string;
  category: string;
}

export interface CatalogResponse {
  version: number;
  types: CatalogType[];
}

export interface FeedbackRequest {
  table_id: string;
  column_index: number;
  corrected_type: string;
  new_type?: boolean;
  regex?: string;
}

export interface FeedbackResponse {
  model_version: number;
  catalog_version: number;
  report: Record<string, unknown>;
}

export interface ServiceState {
  model_version: number;
  catalog_version: number;
  index_size: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }

  /** An adaptation cycle is already running; retry later. */
  get busy(): boolean {
    return this.status === 409;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  uploadCsv(csv: string): Promise<PredictionsResponse> {
    return this.request("/v1/tables", {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  uploadColumns(
    id: string,
    columns: { header: string; values: string[] }[],
  ): Promise<PredictionsResponse> {
    return this.request("/v1/tables", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ id, columns }),
    });
  }

  predictions(tableId: string): Promise<PredictionsResponse> {
    return this.request(`/v1/predictions/${encodeURIComponent(tableId)}`);
  }

  feedback(req: FeedbackRequest): Promise<FeedbackResponse> {
    return this.request("/v1/feedback", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  catalog(): Promise<CatalogResponse> {
    return this.request("/v1/catalog");
  }

  registerType(name: string, category = "user-defined"): Promise<{ name: string }> {
    return this.request("/v1/types", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, category }),
    });
  }

  state(): Promise<ServiceState> {
    return this.request("/v1/state");
  }

  history(): Promise<{ history: Record<string, unknown>[] }> {
    return this.request("/v1/history");
  }
}
