/** Typed client for the study-service HTTP API. */

export interface SessionInfo {
  session_id: string;
  part: number;
  item_count: number;
}

export interface ItemPayload {
  item_id: string;
  history: number[];
  horizon: number;
  pass?: "without" | "with";
  explanation?: string;
  reference_forecast?: number[];
  labels?: string[];
}

export interface NextResponse {
  done: boolean;
  item: ItemPayload | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`server rejected the request (${status}): ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function reject(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class StudyApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await reject(response);
    return (await response.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) await reject(response);
    return (await response.json()) as T;
  }

  createSession(annotatorId: string, part: 1 | 2, consent: boolean): Promise<SessionInfo> {
    return this.post<SessionInfo>("/sessions", {
      annotator_id: annotatorId,
      part,
      consent,
    });
  }

  nextItem(sessionId: string): Promise<NextResponse> {
    return this.get<NextResponse>(`/sessions/${sessionId}/next`);
  }

  submitForecast(
    sessionId: string,
    itemId: string,
    pass: "without" | "with",
    values: number[],
  ): Promise<unknown> {
    return this.post(`/sessions/${sessionId}/items/${itemId}/forecast`, {
      pass,
      values,
    });
  }

  submitLabel(sessionId: string, itemId: string, label: string): Promise<unknown> {
    return this.post(`/sessions/${sessionId}/items/${itemId}/label`, { label });
  }
}
