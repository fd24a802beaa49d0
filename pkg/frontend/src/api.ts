/**
 * Typed client for the chat service: POST /v1/chat, POST /v1/rate, GET /v1/health.
 */

export interface EntityMentionView {
  surface: string;
  start: number;
  end: number;
  entity_id: string;
  entity_type: string;
}

export interface FeatureView {
  sentiment: number | null;
  entities: EntityMentionView[];
  topic_dist: Record<string, number> | null;
  intent_dist: Record<string, number> | null;
  qa_answer: string | null;
  diagnostics: string[];
}

export interface StackEntryView {
  state: string;
  life: number;
}

export interface DebugBlock {
  state: string;
  variables: Record<string, string | number | boolean>;
  stack: StackEntryView[]; // top-first, as the server sends it
  features: FeatureView;
  chosen_transitions: { user: string | null; system: string[] };
  components: string[];
  unmatched: boolean;
  used_fallback: boolean;
  history: [string, string][];
}

export interface ChatResponseBody {
  response: string;
  session_id: string;
  turn_index: number;
  debug?: DebugBlock;
}

export interface HealthBody {
  status: string;
  graph_name: string;
  state_count: number;
}

/** Server rejected the request (4xx); `detail` is shown to the user verbatim. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class EmoretteClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = await response.json();
        detail = typeof body?.error === "string" ? body.error : JSON.stringify(body);
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  chat(sessionId: string, utterance: string, debug: boolean): Promise<ChatResponseBody> {
    const query = debug ? "?debug=1" : "";
    return this.post<ChatResponseBody>(`/v1/chat${query}`, {
      session_id: sessionId,
      utterance,
    });
  }

  rate(sessionId: string, rating: number): Promise<{ ok: boolean }> {
    return this.post<{ ok: boolean }>("/v1/rate", { session_id: sessionId, rating });
  }

  async health(): Promise<HealthBody> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/health`);
    if (!response.ok) {
      throw new ApiError(response.status, `${response.status}`);
    }
    return (await response.json()) as HealthBody;
  }
}
