import { ApiClient, FetchLike } from "../src/api";
import type { StatusPayload, TopicPoint } from "../src/types";

/** In-memory stand-in for the evaluation service: enough protocol to
 * exercise the store's state machine without HTTP. */
export class FakeService {
  status: StatusPayload = {
    session_id: "s1",
    active_version: 1,
    pending_version: null,
    percent_indexed: 20,
    docs_indexed: 24,
    status: "building",
    n_bundles: 5,
    selected_measure: "ndcg",
    models: ["bm25"],
  };
  topicValues: Record<string, TopicPoint[]> = {
    bm25: [
      { topic: "1", value: 0.4 },
      { topic: "2", value: 0.6 },
    ],
  };
  decisions: string[] = [];
  runs: string[] = [];
  failNextDecideWith409 = false;
  evaluationFetches = 0;

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    if (method === "POST" && path === "/sessions") {
      return json(201, { session_id: this.status.session_id });
    }
    if (path.endsWith("/status")) {
      return json(200, this.status);
    }
    if (path.endsWith("/index/decision")) {
      if (this.failNextDecideWith409) {
        this.failNextDecideWith409 = false;
        return json(409, { detail: "no snapshot version is awaiting a decision" });
      }
      const { action } = JSON.parse(String(init?.body ?? "{}"));
      this.decisions.push(action);
      if (action === "update" && this.status.pending_version !== null) {
        this.status = {
          ...this.status,
          active_version: this.status.pending_version,
          pending_version: null,
        };
      }
      return json(200, this.status);
    }
    if (path.endsWith("/runs")) {
      const { model_id } = JSON.parse(String(init?.body ?? "{}"));
      this.runs.push(model_id);
      if (!this.topicValues[model_id]) {
        this.topicValues[model_id] = [
          { topic: "1", value: 0.1 },
          { topic: "2", value: 0.2 },
        ];
      }
      return json(201, {
        run_id: `run-${this.runs.length}`,
        model: model_id,
        snapshot_version: this.status.active_version,
        mean: 0.5,
        measure: "ndcg",
      });
    }
    if (path.includes("/evaluations")) {
      this.evaluationFetches += 1;
      const scope = new URL(url).searchParams.get("scope");
      const measure = new URL(url).searchParams.get("measure") ?? "ndcg";
      const models: Record<string, TopicPoint[] | number> = {};
      for (const [model, points] of Object.entries(this.topicValues)) {
        models[model] =
          scope === "topic"
            ? points
            : points.reduce((acc, p) => acc + p.value, 0) / points.length;
      }
      return json(200, {
        measure,
        scope,
        active_version: this.status.active_version,
        models,
        absent: [],
      });
    }
    return json(404, { detail: `no route ${path}` });
  };

  client(): ApiClient {
    return new ApiClient("http://fake", this.fetch);
  }

  offerPending(version: number): void {
    this.status = {
      ...this.status,
      pending_version: version,
      status: "pending_decision",
    };
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
