/** Payload shapes of the evaluation service API. */

export interface ReplayConfig {
  enabled: boolean;
  speedup_factor?: number | null;
}

export interface SessionConfig {
  corpus_path: string;
  topics_path: string;
  qrels_path: string;
  n_bundles: number;
  seed: number;
  stoplist_id: string;
  stemmer_id: string;
  model_id: string;
  model_params?: Record<string, number>;
  measure: string;
  replay: ReplayConfig;
}

export interface StatusPayload {
  session_id: string;
  active_version: number;
  pending_version: number | null;
  percent_indexed: number;
  docs_indexed: number;
  status: "idle" | "building" | "pending_decision" | "complete";
  n_bundles: number;
  selected_measure: string;
  models: string[];
}

export interface TopicPoint {
  topic: string;
  value: number;
}

export interface EvaluationsPayload {
  measure: string;
  scope: "topic" | "overall";
  active_version: number;
  models: Record<string, TopicPoint[] | number>;
  absent: string[];
}

export interface RunResponse {
  run_id: string;
  model: string;
  snapshot_version: number;
  mean: number | null;
  measure: string;
}

export interface ApiError {
  status: number;
  detail: string;
}

export const MEASURES = [
  "ap",
  "ndcg",
  "ndcg@10",
  "ndcg@20",
  "p@5",
  "p@10",
  "rprec",
  "recip_rank",
];

export const STOPLISTS = ["indri", "lucene", "terrier", "nostop"];
export const STEMMERS = ["porter", "nostem"];
export const MODELS = ["bm25", "boolean", "dirichlet_lm", "tfidf"];
