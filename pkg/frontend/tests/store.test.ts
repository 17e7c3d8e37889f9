import { beforeEach, describe, expect, it } from "vitest";

import { SessionStore, MAX_MODELS, SLOT_COLORS } from "../src/store";
import { FakeService } from "./helpers";

const CONFIG = {
  corpus_path: "c",
  topics_path: "t",
  qrels_path: "q",
  n_bundles: 5,
  seed: 1,
  stoplist_id: "lucene",
  stemmer_id: "porter",
  model_id: "bm25",
  measure: "ndcg",
  replay: { enabled: true, speedup_factor: 1000 },
};

describe("SessionStore", () => {
  let service: FakeService;
  let store: SessionStore;

  beforeEach(async () => {
    service = new FakeService();
    store = new SessionStore(service.client());
    await store.createSession(CONFIG);
  });

  it("registers the configured model in the first color slot", () => {
    expect(store.state.sessionId).toBe("s1");
    expect(store.state.models).toEqual([{ key: "bm25", color: SLOT_COLORS[0] }]);
    expect(store.state.topicData).not.toBeNull();
  });

  describe("update banner state machine", () => {
    it("shows an offer when a pending version appears", async () => {
      service.offerPending(2);
      await store.poll();
      expect(store.state.banner).toEqual({ kind: "offer", version: 2 });
    });

    it("update adopts, hides the banner and refreshes charts", async () => {
      service.offerPending(2);
      await store.poll();
      const fetches = service.evaluationFetches;
      await store.decide("update");
      expect(service.decisions).toEqual(["update"]);
      expect(store.state.banner).toEqual({ kind: "hidden" });
      expect(store.state.status!.active_version).toBe(2);
      expect(service.evaluationFetches).toBeGreaterThan(fetches);
    });

    it("continue turns the banner into a persistent chip", async () => {
      service.offerPending(2);
      await store.poll();
      await store.decide("continue");
      expect(store.state.banner).toEqual({ kind: "chip", version: 2 });
      await store.poll(); // chip survives later polls while still pending
      expect(store.state.banner).toEqual({ kind: "chip", version: 2 });
    });

    it("a retained chip can be adopted later", async () => {
      service.offerPending(2);
      await store.poll();
      await store.decide("continue");
      await store.decide("update");
      expect(store.state.status!.active_version).toBe(2);
      expect(store.state.banner).toEqual({ kind: "hidden" });
    });

    it("a 409 race dismisses the stale banner", async () => {
      service.offerPending(2);
      await store.poll();
      service.failNextDecideWith409 = true;
      service.status = {
        ...service.status,
        active_version: 2,
        pending_version: null,
      };
      await store.decide("update");
      expect(store.state.banner).toEqual({ kind: "hidden" });
      expect(store.state.status!.active_version).toBe(2);
    });

    it("a newer pending version replaces the chip with a fresh offer", async () => {
      service.offerPending(2);
      await store.poll();
      await store.decide("continue");
      // the service adopted 2 elsewhere and now offers 3
      service.status = {
        ...service.status,
        active_version: 2,
        pending_version: 3,
      };
      await store.poll();
      expect(store.state.banner).toEqual({ kind: "offer", version: 3 });
    });
  });

  describe("selections across adoption", () => {
    it("measure and model selections survive an index update", async () => {
      await store.setMeasure("p@10");
      await store.addModel("tfidf");
      service.offerPending(2);
      await store.poll();
      await store.decide("update");
      expect(store.state.measure).toBe("p@10");
      expect(store.state.models.map((m) => m.key)).toEqual(["bm25", "tfidf"]);
    });
  });

  describe("model slots", () => {
    it("assigns stable colors in registration order", async () => {
      await store.addModel("tfidf");
      await store.addModel("boolean");
      expect(store.state.models.map((m) => m.color)).toEqual(
        SLOT_COLORS.slice(0, 3),
      );
    });

    it("rejects a fifth distinct model with a visible message", async () => {
      await store.addModel("tfidf");
      await store.addModel("boolean");
      await store.addModel("dirichlet_lm");
      expect(store.state.models).toHaveLength(MAX_MODELS);
      const runsBefore = service.runs.length;
      await store.addModel("bm25", { k1: 2.0 });
      expect(store.state.models).toHaveLength(MAX_MODELS);
      expect(store.state.error).toMatch(/at most 4/);
      expect(service.runs.length).toBe(runsBefore); // not even submitted
    });

    it("re-running an existing slot is allowed", async () => {
      await store.addModel("bm25");
      expect(store.state.models).toHaveLength(1);
      expect(service.runs.filter((r) => r === "bm25").length).toBeGreaterThan(0);
    });
  });

  describe("derived chart data", () => {
    it("topicSeries carries api values verbatim", async () => {
      const series = store.topicSeries();
      expect(series).toHaveLength(1);
      expect(series[0].points).toEqual([
        { topic: "1", value: 0.4 },
        { topic: "2", value: 0.6 },
      ]);
    });

    it("overallMeans maps model to mean", async () => {
      const means = store.overallMeans();
      expect(means).toHaveLength(1);
      expect(means[0].value).toBeCloseTo(0.5, 10);
    });

    it("measure switch refetches evaluations", async () => {
      const fetches = service.evaluationFetches;
      await store.setMeasure("ap");
      expect(service.evaluationFetches).toBe(fetches + 2); // topic + overall
      expect(store.state.topicData!.measure).toBe("ap");
    });
  });

  it("zoom state is scatter-only and resettable", () => {
    store.setZoom({ x0: 0, x1: 1, y0: 0.2, y1: 0.8 });
    expect(store.state.zoom).not.toBeNull();
    store.setZoom(null);
    expect(store.state.zoom).toBeNull();
  });
});
