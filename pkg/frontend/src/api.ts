/** Typed client for the gate service. The console never computes predictions,
 * evidence or gating itself; every displayed value comes from these calls. */

export type LanguageCode = "EN" | "HI" | "PA";
export type QueueState = "DEFERRED" | "RESOLVED";

export interface RecordSnapshot {
  id: string;
  text: string;
  lang: LanguageCode;
}

export interface PredictionSnapshot {
  id: string;
  lang: LanguageCode;
  probs: number[];
  predicted: string;
  confidence: number;
}

export interface EvidenceVerdict {
  status: "SUPPORTED" | "NO_EVIDENCE" | "CONTRADICTED";
  matched_terms: [string, string][];
}

export interface RiskVerdict {
  level: "LOW" | "MEDIUM" | "HIGH";
  script_purity: number;
  term_coverage: number;
}

export interface GateVerdict {
  status: "AUTHORIZE" | "REQUIRE_REVIEW";
  routed_label: string;
  reasons: string[];
  confidence: number;
}

export interface HumanDecision {
  label: string;
  reviewer_id: string;
  note: string;
  timestamp: string;
}

export interface QueueItem {
  case_id: string;
  record: RecordSnapshot;
  prediction: PredictionSnapshot;
  verdicts: { evidence: EvidenceVerdict; language_risk: RiskVerdict };
  decision: GateVerdict;
  state: QueueState;
  human_decision: HumanDecision | null;
}

export interface AuditRecord {
  sequence_no: number;
  timestamp: string;
  event: string;
  record_id: string;
  case_id: string | null;
  human_decision: HumanDecision | null;
  prev_hash: string;
  this_hash: string;
  [key: string]: unknown;
}

export interface QueueFilter {
  state?: QueueState;
  lang?: LanguageCode;
  offset?: number;
  limit?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ServiceClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string; model_loaded: boolean }> {
    return this.get("/v1/health");
  }

  async fetchQueue(filter: QueueFilter = {}): Promise<QueueItem[]> {
    const params = new URLSearchParams();
    if (filter.state) params.set("state", filter.state);
    if (filter.lang) params.set("lang", filter.lang);
    if (filter.offset !== undefined) params.set("offset", String(filter.offset));
    if (filter.limit !== undefined) params.set("limit", String(filter.limit));
    const query = params.toString();
    const body = await this.get<{ items: QueueItem[] }>(
      `/v1/queue${query ? `?${query}` : ""}`,
    );
    return body.items;
  }

  async submitDecision(
    caseId: string,
    label: string,
    reviewerId: string,
    note: string,
  ): Promise<QueueItem> {
    const response = await this.fetchFn(
      `${this.baseUrl}/v1/queue/${encodeURIComponent(caseId)}/decision`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ label, reviewer_id: reviewerId, note }),
      },
    );
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as QueueItem;
  }

  async fetchAudit(fromSeq = 1): Promise<AuditRecord[]> {
    const body = await this.get<{ records: AuditRecord[] }>(
      `/v1/audit?from_seq=${fromSeq}`,
    );
    return body.records;
  }
}
