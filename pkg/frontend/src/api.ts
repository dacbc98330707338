import { consumeChatStream } from "./stream.js";
import type { MetricsResult, UiMessage } from "./types.js";

export class AuthError extends Error {}
export class ServerError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export interface ApiOptions {
  baseUrl?: string;
  fetchImpl?: typeof fetch;
}

/** Thin client over the documented service endpoints; holds the bearer
 * token but no other state. */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: typeof fetch;

  constructor(
    public userId: string,
    public token: string,
    options: ApiOptions = {},
  ) {
    this.baseUrl = options.baseUrl ?? "";
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
  }

  private headers(json = true): Record<string, string> {
    const base: Record<string, string> = { Authorization: `Bearer ${this.token}` };
    if (json) base["Content-Type"] = "application/json";
    return base;
  }

  async sendMessage(
    message: string,
    onUpdate: (m: UiMessage) => void,
    mode?: string,
  ): Promise<UiMessage> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/chat`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ user_id: this.userId, message, ...(mode ? { mode } : {}) }),
    });
    if (response.status === 401) throw new AuthError("token rejected");
    if (!response.ok || !response.body) {
      throw new ServerError(response.status, `chat failed: ${response.status}`);
    }
    return consumeChatStream(response.body, onUpdate);
  }

  /** 204 -> true; 404 (stale card) -> false; anything else throws. */
  async submitAdherence(recId: string, followed: boolean): Promise<boolean> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/adherence`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ rec_id: recId, followed }),
    });
    if (response.status === 204) return true;
    if (response.status === 404) return false;
    if (response.status === 401) throw new AuthError("token rejected");
    throw new ServerError(response.status, `adherence failed: ${response.status}`);
  }

  /** null when the service has no data for the range (its apology 404). */
  async metrics(
    from: string,
    to: string,
    metric = "total_sleep_duration",
    aggregate = "mean",
  ): Promise<MetricsResult | null> {
    const params = new URLSearchParams({ from, to, metric, aggregate });
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/metrics/${encodeURIComponent(this.userId)}?${params}`,
      { headers: this.headers(false) },
    );
    if (response.status === 404) return null;
    if (response.status === 401) throw new AuthError("token rejected");
    if (!response.ok) throw new ServerError(response.status, `metrics failed: ${response.status}`);
    return (await response.json()) as MetricsResult;
  }
}
