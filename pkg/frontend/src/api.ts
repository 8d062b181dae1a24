/**
 * Typed client for the workbench HTTP API.
 *
 * Every call maps to exactly one server request so the action log on
 * the server mirrors user gestures one to one.
 */

export type ConditionName =
  | "manual"
  | "labels"
  | "labels_local"
  | "labels_local_global";

export type FilterName = "all" | "toxic" | "nontoxic";

export interface GlobalToken {
  token: string;
  frequency: number;
}

export interface SessionInfo {
  session_id: string;
  condition: ConditionName;
  corpus: string;
  mode: "delegation" | "report_all";
  min_rules: number;
  page_size: number;
  global_explanations?: GlobalToken[];
}

export interface CommentCard {
  id: string;
  text: string;
  pred?: "toxic" | "nontoxic";
  rationale?: [number, number][];
}

export interface SearchResult {
  total: number;
  page: number;
  page_size: number;
  items: CommentCard[];
}

export interface RandomResult {
  total: number;
  seed: number;
  items: CommentCard[];
}

export interface RuleRow {
  keyword: string;
  total_matched: number;
  predicted_toxic_matched?: number;
}

export interface RuleListing {
  mode: string;
  min_rules: number;
  rules: RuleRow[];
}

export interface SessionResult {
  session_id: string;
  condition: string;
  corpus: string;
  n_actions: number;
  n_rules: number;
  elapsed_minutes: number;
  rules_per_minute: number | null;
}

export interface EvaluationReport {
  corpus: string;
  mode: string;
  rules: string[];
  average_precision: number | null;
  defined_rule_count: number;
  union_precision: number | null;
  coverage: number;
  reward: number;
  bonus_usd: number;
  model_alone_precision: number | null;
}

export interface FinishResponse {
  result: SessionResult;
  report: EvaluationReport | null;
  bonus_usd: number | null;
}

export interface ApiFailure {
  error: string;
  field?: string;
}

export class ApiError extends Error {
  status: number;
  field?: string;

  constructor(status: number, body: ApiFailure) {
    super(body.error);
    this.status = status;
    this.field = body.field;
  }
}

export type FetchLike = typeof fetch;

export class ApiClient {
  private base: string;
  private fetchFn: FetchLike;
  private sessionId: string | null = null;

  constructor(base = "", fetchFn: FetchLike = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  get session(): string | null {
    return this.sessionId;
  }

  private async request<T>(
    method: string,
    path: string,
    params: Record<string, string | number | undefined> = {},
    body?: unknown,
  ): Promise<T> {
    const url = new URL(this.base + path, this.base || "http://localhost");
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) url.searchParams.set(key, String(value));
    }
    if (this.sessionId) url.searchParams.set("session", this.sessionId);
    const resp = await this.fetchFn(url.toString(), {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) throw new ApiError(resp.status, payload as ApiFailure);
    return payload as T;
  }

  async createSession(
    condition: ConditionName,
    corpus?: string,
    minRules?: number,
  ): Promise<SessionInfo> {
    const info = await this.request<SessionInfo>("POST", "/api/session", {}, {
      condition,
      corpus,
      min_rules: minRules,
    });
    this.sessionId = info.session_id;
    return info;
  }

  search(
    q: string,
    filter: FilterName = "all",
    page = 0,
    source?: "chip",
  ): Promise<SearchResult> {
    return this.request<SearchResult>("GET", "/api/search", {
      q,
      filter,
      page,
      source,
    });
  }

  loadRandom(k: number, seed?: number): Promise<RandomResult> {
    return this.request<RandomResult>("GET", "/api/random", { k, seed });
  }

  addRule(keyword: string): Promise<{ rule: RuleRow; n_rules: number }> {
    return this.request("POST", "/api/rules", {}, { keyword });
  }

  removeRule(keyword: string): Promise<{ removed: string; n_rules: number }> {
    return this.request("DELETE", `/api/rules/${encodeURIComponent(keyword)}`);
  }

  listRules(): Promise<RuleListing> {
    return this.request<RuleListing>("GET", "/api/rules");
  }

  logGesture(kind: string, payload = ""): Promise<{ logged: string }> {
    return this.request("POST", "/api/actions", {}, { kind, payload });
  }

  finish(): Promise<FinishResponse> {
    return this.request<FinishResponse>("POST", "/api/finish");
  }
}
