/** Typed client for the room Poisson HTTP service.
 *
 * The fetch implementation is injected so tests (and non-browser hosts)
 * can run the client against a fake transport.  All artifact access
 * goes through this client; the UI never touches files directly.
 */

import type {
  MeshDoc,
  ProblemDoc,
  SolutionDoc,
  SpaceDoc,
  StatusDoc,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** Error reported by the service, carrying its error class name. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    readonly detail: string,
  ) {
    super(`${errorName}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface ExtractionParams {
  dist_tol?: number;
  angle_tol?: number;
  min_area?: number;
  max_planes?: number;
  seed?: number;
  up?: [number, number, number];
}

export interface ExplicitSpace {
  footprint: [number, number][];
  z_floor: number;
  z_ceiling: number;
}

export interface SolveOptions {
  tol?: number;
  max_iter?: number;
}

export class ServiceClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.url(path), init);
    if (!response.ok) {
      let errorName = `HTTP ${response.status}`;
      let detail = response.statusText;
      try {
        const body = (await response.json()) as {
          error?: string;
          detail?: string;
        };
        if (body.error) errorName = body.error;
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body: keep the HTTP status text
      }
      throw new ApiError(response.status, errorName, detail);
    }
    return response;
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  private jsonInit(method: string, payload: unknown): RequestInit {
    return {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  async createSession(): Promise<string> {
    const doc = await this.requestJson<{ id: string }>("/api/sessions", {
      method: "POST",
    });
    return doc.id;
  }

  async uploadScan(
    sessionId: string,
    data: Uint8Array<ArrayBuffer> | string,
    format: "ply" | "obj" = "ply",
  ): Promise<void> {
    await this.request(
      `/api/sessions/${sessionId}/scan?format=${format}`,
      {
        method: "POST",
        headers: { "content-type": "application/octet-stream" },
        body: data,
      },
    );
  }

  async buildSpace(
    sessionId: string,
    params: ExtractionParams | ExplicitSpace = {},
  ): Promise<void> {
    await this.request(
      `/api/sessions/${sessionId}/space`,
      this.jsonInit("POST", params),
    );
  }

  async buildMesh(sessionId: string, targetH: number): Promise<void> {
    await this.request(
      `/api/sessions/${sessionId}/mesh`,
      this.jsonInit("POST", { target_h: targetH }),
    );
  }

  async putProblem(sessionId: string, problem: ProblemDoc): Promise<void> {
    await this.request(
      `/api/sessions/${sessionId}/problem`,
      this.jsonInit("PUT", problem),
    );
  }

  async startSolve(
    sessionId: string,
    options: SolveOptions = {},
  ): Promise<void> {
    await this.request(
      `/api/sessions/${sessionId}/solve`,
      this.jsonInit("POST", options),
    );
  }

  getStatus(sessionId: string): Promise<StatusDoc> {
    return this.requestJson<StatusDoc>(`/api/sessions/${sessionId}/status`);
  }

  getSpace(sessionId: string): Promise<SpaceDoc> {
    return this.requestJson<SpaceDoc>(`/api/sessions/${sessionId}/space`);
  }

  getMesh(sessionId: string): Promise<MeshDoc> {
    return this.requestJson<MeshDoc>(`/api/sessions/${sessionId}/mesh`);
  }

  getProblem(sessionId: string): Promise<ProblemDoc> {
    return this.requestJson<ProblemDoc>(
      `/api/sessions/${sessionId}/problem`,
    );
  }

  getSolution(sessionId: string): Promise<SolutionDoc> {
    return this.requestJson<SolutionDoc>(
      `/api/sessions/${sessionId}/solution`,
    );
  }
}
