// Typed client for the kymosnake HTTP service. Every request the UI makes
// goes through this module; there is no other route to the backend and no
// client-side re-implementation of what the service computes.

export interface SnakeJson {
  closed: boolean;
  snaxels: [number, number][];
}

export interface DeformResultJson {
  snake: SnakeJson;
  trace: number[];
  iterations: number;
  converged: boolean;
}

/** Edge-pair deformations return one result per fold edge. */
export interface PairDeformResponse {
  midline: number;
  upper: DeformResultJson;
  lower: DeformResultJson;
}

export type DeformResponse = DeformResultJson | PairDeformResponse;

export function isPairResponse(r: DeformResponse): r is PairDeformResponse {
  return "midline" in r;
}

export interface GroundTruth {
  midline: number;
  edges: [number, number][];
}

export interface SynthesizeResponse {
  session_id: string;
  pgm_base64: string;
  vstring: string;
  ground_truth: GroundTruth;
}

export interface UploadResponse {
  session_id: string;
  width: number;
  height: number;
  midline_estimate: number;
}

export interface SnakeParamsJson {
  alpha?: number;
  beta?: number;
  gamma?: number;
  rigidity?: "second-difference" | "as-printed";
}

export interface ConstraintsJson {
  min_spacing?: number;
  max_spacing?: number;
  band?: [number, number, number, number];
  column_locked?: boolean;
}

export type DeformInit =
  | { midline: number; band_halfwidth: number }
  | { snake: SnakeJson };

export interface DeformRequest {
  params: SnakeParamsJson;
  /** Omit to continue from the session's stored deformation state. */
  init?: DeformInit;
  constraints?: ConstraintsJson;
  max_iter?: number;
  step_mode?: boolean;
  field_mode?: "intensity" | "gradient";
}

export interface DecideResponse {
  verdict: "accept" | "reject";
  runs: [string, number][];
  violation?: string;
}

export interface DfaResponse {
  verdict: "accept" | "reject";
  final_state: number;
}

export interface SessionRecord {
  session_id: string;
  width: number;
  height: number;
  history: unknown[];
  [key: string]: unknown;
}

export type PresetTable = Record<string, Record<string, unknown>>;

/** Structured failure from the service: {error: code, detail: text}. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;

  constructor(status: number, code: string, detail: string) {
    super(`${code}: ${detail}`);
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    // Bind so the implementation survives being detached from `window`.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      if (body instanceof FormData) {
        init.body = body;
      } else {
        init.body = JSON.stringify(body);
        init.headers = { "content-type": "application/json" };
      }
    }
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      let code = "unknown";
      let detail = resp.statusText;
      try {
        const parsed = (await resp.json()) as { error?: string; detail?: string };
        if (parsed.error) code = parsed.error;
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(resp.status, code, detail);
    }
    return (await resp.json()) as T;
  }

  synthesize(body: {
    preset?: string;
    spec?: Record<string, unknown>;
    periods?: number;
    seed?: number;
  }): Promise<SynthesizeResponse> {
    return this.request("POST", "/api/synthesize", body);
  }

  uploadSession(file: Blob, name = "upload.pgm"): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", file, name);
    return this.request("POST", "/api/sessions", form);
  }

  deform(sessionId: string, body: DeformRequest): Promise<DeformResponse> {
    return this.request("POST", `/api/sessions/${sessionId}/deform`, body);
  }

  getSession(sessionId: string): Promise<SessionRecord> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }

  decide(vstring: string, c?: [number, number, number], eps?: number): Promise<DecideResponse> {
    const body: Record<string, unknown> = { vstring };
    if (c !== undefined) body.c = c;
    if (eps !== undefined) body.eps = eps;
    return this.request("POST", "/api/decide", body);
  }

  dfa(pattern: string, input: string, alphabet?: string): Promise<DfaResponse> {
    const body: Record<string, unknown> = { pattern, input };
    if (alphabet !== undefined) body.alphabet = alphabet;
    return this.request("POST", "/api/dfa", body);
  }

  pair(op: "encode" | "decode" | "triple" | "untriple", args: number[]): Promise<{ result: number | number[] }> {
    return this.request("POST", "/api/pair", { op, args });
  }

  presets(): Promise<PresetTable> {
    return this.request("GET", "/api/presets");
  }
}
