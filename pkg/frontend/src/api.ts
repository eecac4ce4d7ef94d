// Thin client over the varimap JSON API. The fetch implementation is
// injectable so tests can serve recorded responses. Raw response text is
// kept next to the parsed value: what the UI shows must be traceable to the
// exact bytes the server sent.

import type {
  Band,
  DecisionsDoc,
  MapDoc,
  MatrixDoc,
  MetricsDoc,
  ProjectDoc,
  ScenarioDoc,
  ScenarioRequest,
  Strength,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiResult<T> {
  raw: string;
  data: T;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: string,
  ) {
    super(`HTTP ${status}: ${body}`);
  }
}

export class StaleRevisionError extends Error {
  constructor(public readonly serverRevision: number) {
    super(`stale revision; server is at ${serverRevision}`);
  }
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly baseUrl: string = "",
  ) {}

  private async get<T>(path: string): Promise<ApiResult<T>> {
    const res = await this.fetchFn(this.baseUrl + path);
    const raw = await res.text();
    if (!res.ok) throw new ApiError(res.status, raw);
    return { raw, data: JSON.parse(raw) as T };
  }

  getProject(): Promise<ApiResult<ProjectDoc>> {
    return this.get("/api/project");
  }

  getMatrix(): Promise<ApiResult<MatrixDoc>> {
    return this.get("/api/matrix");
  }

  getDecisions(): Promise<ApiResult<DecisionsDoc>> {
    return this.get("/api/decisions");
  }

  getMap(): Promise<ApiResult<MapDoc>> {
    return this.get("/api/map");
  }

  getMetrics(): Promise<ApiResult<MetricsDoc>> {
    return this.get("/api/metrics");
  }

  // Writes carry If-Match so a concurrent editor surfaces as a 409 instead
  // of a silent overwrite. A 409 is mapped to StaleRevisionError carrying
  // the server's revision so callers can refetch and retry.
  private async put(path: string, body: unknown, revision: number): Promise<number> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method: "PUT",
      headers: { "Content-Type": "application/json", "If-Match": String(revision) },
      body: JSON.stringify(body),
    });
    const raw = await res.text();
    if (res.status === 409) {
      const parsed = JSON.parse(raw) as { revision: number };
      throw new StaleRevisionError(parsed.revision);
    }
    if (!res.ok) throw new ApiError(res.status, raw);
    return (JSON.parse(raw) as { revision: number }).revision;
  }

  putRating(driverId: string, strength: Strength, revision: number): Promise<number> {
    return this.put(`/api/ratings/${driverId}`, { strength }, revision);
  }

  putBand(groupId: string, band: Band, revision: number): Promise<number> {
    return this.put(`/api/similarity/${groupId}`, { band }, revision);
  }

  async postScenario(request: ScenarioRequest): Promise<ApiResult<ScenarioDoc>> {
    const res = await this.fetchFn(this.baseUrl + "/api/scenario", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    const raw = await res.text();
    if (!res.ok) throw new ApiError(res.status, raw);
    return { raw, data: JSON.parse(raw) as ScenarioDoc };
  }
}
