/**
 * Thin client for the facilitation service. Every number shown in the UI
 * comes out of these responses; nothing is recomputed client side.
 */

export interface MatrixPayload {
  labels: string[];
  rows: string[][];
}

export interface EvaluationPayload {
  criteria: MatrixPayload;
  alternatives: Record<string, MatrixPayload>;
}

export interface HierarchyPayload {
  goal: { id: string; name: string };
  criteria: string[];
  alternatives: string[];
}

export interface StopRulePayload {
  cr_threshold: number;
  max_group_iterations: number;
  max_per_member_revisions: number;
}

export interface MatrixReport {
  key: string;
  stage: string;
  n: number;
  lambda_max: number;
  consistency_index: number;
  random_index: number;
  consistency_ratio: number;
  ratio_defined: boolean;
  acceptable: boolean;
  weights: number[];
  weight_order_violations: number[][];
  judgment_order_violations: number[][];
}

export interface ConsistencyView {
  worst_ratio: number;
  worst_key: string;
  acceptable: boolean;
  matrices: MatrixReport[];
}

export interface MemberView {
  id: string;
  name: string;
  submitted: boolean;
  revisions_used: number;
  consistency: ConsistencyView | null;
}

export interface InfluenceView {
  group_ratio: number;
  most_influential: string;
  members: Array<{
    member: string;
    own_worst_ratio: number;
    leave_one_out_ratio: number;
    influence: number;
  }>;
}

export interface SessionView {
  version: number;
  phase: string;
  round: number;
  revision_target: string | null;
  ready_for_advance: boolean;
  missing_members: string[];
  hierarchy: HierarchyPayload;
  stop_rule: StopRulePayload;
  members: MemberView[];
  group: ConsistencyView | null;
  aggregate: EvaluationPayload | null;
  influence: InfluenceView | null;
  trajectory: {
    initial_cr: number | null;
    rounds: Array<{ round: number; group_cr: number; target_member: string }>;
  };
  ranking: Array<{ alternative: string; weight: number }> | null;
}

export interface CreatedSession {
  session: string;
  facilitator_token: string;
  member_tokens: Record<string, string>;
  state: SessionView;
}

export interface CellDiagnostic {
  row: number;
  col: number;
  matrix: string | null;
  code: string;
  message: string;
}

/** Error envelope the service returns; surfaced to callers as-is. */
export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly details: CellDiagnostic[] = [],
    public readonly missing: string[] = [],
    public readonly member: string | null = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly fetchFn: FetchLike;

  constructor(
    public readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    // bind so the browser's fetch keeps its window receiver
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request(
    method: string,
    path: string,
    token?: string,
    body?: unknown,
  ): Promise<Response> {
    const headers: Record<string, string> = {};
    if (token) headers["Authorization"] = `Bearer ${token}`;
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: payload,
    });
    if (!response.ok) {
      let envelope: { error?: Record<string, unknown> } = {};
      try {
        envelope = await response.json();
      } catch {
        /* non-JSON failure body; fall through to the generic error */
      }
      const err = (envelope.error ?? {}) as Record<string, unknown>;
      throw new ServiceError(
        response.status,
        typeof err.code === "string" ? err.code : "unknown",
        typeof err.message === "string" ? err.message : `HTTP ${response.status}`,
        Array.isArray(err.details) ? (err.details as CellDiagnostic[]) : [],
        Array.isArray(err.missing) ? (err.missing as string[]) : [],
        typeof err.member === "string" ? err.member : null,
      );
    }
    return response;
  }

  async createSession(
    hierarchy: HierarchyPayload,
    members: Array<{ id: string; name: string }>,
    stopRule: StopRulePayload,
  ): Promise<CreatedSession> {
    const r = await this.request("POST", "/sessions", undefined, {
      hierarchy,
      members,
      stop_rule: stopRule,
    });
    return r.json();
  }

  /**
   * Session view; pass waitVersion to long poll until the server moves past
   * that version or the timeout elapses (the server clamps it at 30 s).
   */
  async view(
    sessionId: string,
    token: string,
    opts: { waitVersion?: number; timeoutSeconds?: number } = {},
  ): Promise<SessionView> {
    const params = new URLSearchParams();
    if (opts.waitVersion !== undefined) params.set("wait_version", String(opts.waitVersion));
    if (opts.timeoutSeconds !== undefined) params.set("timeout", String(opts.timeoutSeconds));
    const qs = params.toString();
    const query = qs ? `?${qs}` : "";
    const r = await this.request("GET", `/sessions/${sessionId}${query}`, token);
    return r.json();
  }

  async submit(
    sessionId: string,
    token: string,
    evaluation: EvaluationPayload,
  ): Promise<SessionView> {
    const r = await this.request("POST", `/sessions/${sessionId}/judgments`, token, {
      evaluation,
    });
    return r.json();
  }

  /** Partial resubmission; matrices left out carry forward server side. */
  async patch(
    sessionId: string,
    token: string,
    patch: { criteria?: MatrixPayload; alternatives?: Record<string, MatrixPayload> },
  ): Promise<SessionView> {
    const r = await this.request("POST", `/sessions/${sessionId}/judgments`, token, {
      patch,
    });
    return r.json();
  }

  async advance(sessionId: string, token: string): Promise<SessionView> {
    const r = await this.request("POST", `/sessions/${sessionId}/advance`, token);
    return r.json();
  }

  /** Stateless consistency diagnostics for an unsubmitted evaluation. */
  async preview(
    sessionId: string,
    token: string,
    evaluation: EvaluationPayload,
  ): Promise<ConsistencyView> {
    const r = await this.request("POST", `/sessions/${sessionId}/preview`, token, {
      evaluation,
    });
    return r.json();
  }

  /** The canonical event log, exactly as stored on the server's disk. */
  async log(sessionId: string, token: string): Promise<string> {
    const r = await this.request("GET", `/sessions/${sessionId}/log`, token);
    return r.text();
  }
}
