/** Typed fetch client for the session API.  All math happens server-side;
 *  this module only moves JSON back and forth. */

import type {
  CurveData,
  CurveSource,
  DecomposeOptions,
  DecomposeSummary,
  EditResponse,
  PlotSelection,
  Series,
  TermEdit,
} from "./types.js";

export class ApiError extends Error {
  constructor(message: string, public readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async call<T>(method: "GET" | "POST", path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.base + path, init);
    const data = await resp.json();
    if (!resp.ok) {
      throw new ApiError(String((data as { error?: string }).error ?? resp.status), resp.status);
    }
    return data as T;
  }

  async createSession(): Promise<string> {
    const out = await this.call<{ session: string }>("POST", "/api/session");
    return out.session;
  }

  async scatterers(): Promise<string[]> {
    const out = await this.call<{ scatterers: string[] }>("GET", "/api/table");
    return out.scatterers;
  }

  createCurve(session: string, source: CurveSource): Promise<CurveData> {
    return this.call("POST", `/api/session/${session}/curve`, source);
  }

  decompose(
    session: string,
    label: string,
    options: DecomposeOptions = {},
  ): Promise<DecomposeSummary> {
    return this.call("POST", `/api/session/${session}/curve/${encodeURIComponent(label)}/decompose`, options);
  }

  editTerms(session: string, label: string, edits: TermEdit[]): Promise<EditResponse> {
    return this.call("POST", `/api/session/${session}/curve/${encodeURIComponent(label)}/edit`, { edits });
  }

  plotData(session: string, selections: PlotSelection[]): Promise<{ series: Series[] }> {
    return this.call("POST", `/api/session/${session}/plot`, { selections });
  }

  async exportCurves(session: string, selections: string[]): Promise<string> {
    const out = await this.call<{ content: string }>(
      "POST",
      `/api/session/${session}/export`,
      { selections },
    );
    return out.content;
  }

  snapshot(session: string): Promise<unknown> {
    return this.call("GET", `/api/session/${session}/snapshot`);
  }

  async importSession(snapshot: unknown): Promise<string> {
    const out = await this.call<{ session: string }>("POST", "/api/session/import", snapshot);
    return out.session;
  }
}
