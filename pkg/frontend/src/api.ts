// Typed fetch client for the matchkit edit service.

import type {
  Alignment,
  CreateDocResponse,
  EditOp,
  EditsResponse,
  TimeMap,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function fail(response: Response): Promise<never> {
  let code = "http-error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && body.detail) {
      code = body.detail.code ?? code;
      message = body.detail.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, code, message);
}

export class MatchkitClient {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) await fail(response);
    return (await response.json()) as T;
  }

  createDoc(text: string): Promise<CreateDocResponse> {
    return this.json<CreateDocResponse>("/v1/docs", {
      method: "POST",
      headers: { "Content-Type": "text/plain" },
      body: text,
    });
  }

  getAlignment(docId: string): Promise<Alignment> {
    return this.json<Alignment>(`/v1/docs/${docId}/alignment`);
  }

  getTimeMap(docId: string): Promise<TimeMap> {
    return this.json<TimeMap>(`/v1/docs/${docId}/timemap`);
  }

  async getFile(docId: string): Promise<string> {
    const response = await this.fetchImpl(`${this.base}/v1/docs/${docId}/file`);
    if (!response.ok) await fail(response);
    return response.text();
  }

  postEdits(docId: string, baseVersion: number, ops: EditOp[]): Promise<EditsResponse> {
    return this.json<EditsResponse>(`/v1/docs/${docId}/edits`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ base_version: baseVersion, ops }),
    });
  }

  undo(docId: string): Promise<EditsResponse> {
    return this.json<EditsResponse>(`/v1/docs/${docId}/undo`, { method: "POST" });
  }
}
