export interface ChatMeta {
  routes: string[];
  techniques: string[];
  rec_id: string | null;
}

export interface UiMessage {
  role: "user" | "assistant";
  /** Grows while the reply streams in. */
  text: string;
  /** Present only once the stream has completed. */
  meta?: ChatMeta;
}

export interface MetricsResult {
  user_id: string;
  metric: string;
  aggregate: string;
  value: number;
  unit: string;
  n: number;
  facts: [string, number, string][];
  series: [string, number][] | null;
}
