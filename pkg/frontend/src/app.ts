import { Popup, renderBars, renderScatter } from "./charts";
import { SessionStore, MAX_MODELS } from "./store";
import { MEASURES, MODELS, STEMMERS, STOPLISTS } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function option(value: string): HTMLOptionElement {
  return el("option", { value }, value);
}

/** Configuration page: collection paths, preprocessing, initial model,
 * replay toggle. Submits the session and hands over to the analysis view. */
export function renderConfigPage(root: HTMLElement, store: SessionStore): void {
  root.innerHTML = "";
  const form = el("form", { class: "config" });
  form.appendChild(el("h1", {}, "Session configuration"));

  const fields: [string, string, string][] = [
    ["corpus_path", "Corpus file", "data/corpus.sgml"],
    ["topics_path", "Topics file", "data/topics.txt"],
    ["qrels_path", "Qrels (pool) file", "data/qrels.txt"],
  ];
  for (const [name, label, placeholder] of fields) {
    const row = el("label", { class: "row" }, `${label} `);
    const input = el("input", { name, placeholder, required: "true" });
    row.appendChild(input);
    form.appendChild(row);
  }

  const selects: [string, string, string[]][] = [
    ["stoplist_id", "Stoplist", STOPLISTS],
    ["stemmer_id", "Stemmer", STEMMERS],
    ["model_id", "Initial retrieval model", MODELS],
    ["measure", "Evaluation measure", MEASURES],
  ];
  for (const [name, label, values] of selects) {
    const row = el("label", { class: "row" }, `${label} `);
    const select = el("select", { name });
    for (const v of values) select.appendChild(option(v));
    row.appendChild(select);
    form.appendChild(row);
  }

  const bundles = el("label", { class: "row" }, "Bundles ");
  bundles.appendChild(el("input", { name: "n_bundles", type: "number", value: "10" }));
  form.appendChild(bundles);
  const seed = el("label", { class: "row" }, "Seed ");
  seed.appendChild(el("input", { name: "seed", type: "number", value: "0" }));
  form.appendChild(seed);

  const replayRow = el("label", { class: "row" }, "Replay (precomputed indexes) ");
  const replayToggle = el("input", { name: "replay", type: "checkbox" });
  replayRow.appendChild(replayToggle);
  const speedup = el("input", {
    name: "speedup_factor",
    type: "number",
    value: "100",
    title: "speed-up factor",
  });
  replayRow.appendChild(speedup);
  form.appendChild(replayRow);

  const error = el("p", { class: "error", role: "alert" });
  form.appendChild(error);
  form.appendChild(el("button", { type: "submit" }, "Start session"));

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void store
      .createSession({
        corpus_path: String(data.get("corpus_path") ?? ""),
        topics_path: String(data.get("topics_path") ?? ""),
        qrels_path: String(data.get("qrels_path") ?? ""),
        n_bundles: Number(data.get("n_bundles") ?? 10),
        seed: Number(data.get("seed") ?? 0),
        stoplist_id: String(data.get("stoplist_id") ?? "nostop"),
        stemmer_id: String(data.get("stemmer_id") ?? "nostem"),
        model_id: String(data.get("model_id") ?? "bm25"),
        measure: String(data.get("measure") ?? "ndcg"),
        replay: {
          enabled: data.get("replay") === "on",
          speedup_factor: Number(data.get("speedup_factor") ?? 100),
        },
      })
      .then((ok) => {
        if (ok) {
          store.startPolling(1000);
          renderAnalysisPage(root, store);
        } else {
          error.textContent = store.state.error;
        }
      });
  });

  root.appendChild(form);
}

/** Analysis view: header with index coverage, update banner/chip, the
 * topic-based and overall tabs, measure and model controls. */
export function renderAnalysisPage(root: HTMLElement, store: SessionStore): void {
  root.innerHTML = "";
  const popup = new Popup();

  const header = el("header", { class: "header" });
  const settings = el("span", { class: "settings" });
  const coverage = el("span", { class: "coverage", id: "coverage" });
  header.append(settings, coverage);

  const banner = el("div", { class: "banner", id: "update-banner" });
  const chipHost = el("div", { class: "chip-host" });

  const tabs = el("nav", { class: "tabs" });
  const topicTab = el("button", { class: "tab active" }, "Topic-based analysis");
  const overallTab = el("button", { class: "tab" }, "Overall analysis");
  tabs.append(topicTab, overallTab);

  const controls = el("div", { class: "controls" });
  const measureSelect = el("select", { id: "measure-select" });
  for (const m of MEASURES) measureSelect.appendChild(option(m));
  measureSelect.value = store.state.measure;
  const modelSelect = el("select", { id: "model-select" });
  for (const m of MODELS) modelSelect.appendChild(option(m));
  const addModel = el("button", { id: "add-model" }, "Add model");
  const legend = el("span", { class: "legend" });
  controls.append("Measure: ", measureSelect, " Model: ", modelSelect, addModel, legend);

  const errorBox = el("p", { class: "error", role: "alert" });
  const chart = el("div", { class: "chart", id: "chart" });

  root.append(header, banner, chipHost, tabs, controls, errorBox, chart, popup.el);

  measureSelect.addEventListener("change", () => {
    void store.setMeasure(measureSelect.value);
  });
  addModel.addEventListener("click", () => {
    void store.addModel(modelSelect.value);
  });
  topicTab.addEventListener("click", () => store.setTab("topic"));
  overallTab.addEventListener("click", () => store.setTab("overall"));

  const render = () => {
    const state = store.state;
    const status = state.status;
    if (status) {
      settings.textContent =
        `session ${status.session_id} | measure ${state.measure} | ` +
        `models ${state.models.map((m) => m.key).join(", ") || "none"}`;
      coverage.textContent =
        `${status.percent_indexed.toFixed(0)}% of the corpus indexed ` +
        `(${status.docs_indexed} documents, version ` +
        `${status.active_version}/${status.n_bundles}, ${status.status})`;
    }

    banner.innerHTML = "";
    if (state.banner.kind === "offer") {
      banner.appendChild(
        el("span", {}, `Index version ${state.banner.version} is ready.`),
      );
      const update = el("button", { id: "decide-update" }, "Update");
      update.addEventListener("click", () => void store.decide("update"));
      const keep = el("button", { id: "decide-continue" }, "Continue");
      keep.addEventListener("click", () => void store.decide("continue"));
      banner.append(update, keep);
      banner.style.display = "block";
    } else {
      banner.style.display = "none";
    }

    chipHost.innerHTML = "";
    if (state.banner.kind === "chip") {
      const chip = el(
        "button",
        { class: "chip", id: "pending-chip" },
        `pending v${state.banner.version} available - adopt`,
      );
      chip.addEventListener("click", () => void store.decide("update"));
      chipHost.appendChild(chip);
    }

    topicTab.className = state.activeTab === "topic" ? "tab active" : "tab";
    overallTab.className = state.activeTab === "overall" ? "tab active" : "tab";
    addModel.disabled =
      state.models.length >= MAX_MODELS; // the 5th comparison slot is disabled
    legend.innerHTML = "";
    for (const slot of state.models) {
      const item = el("span", { class: "legend-item" }, ` ${slot.key}`);
      item.style.color = slot.color;
      legend.appendChild(item);
    }
    errorBox.textContent = state.error ?? "";

    if (state.activeTab === "topic") {
      renderScatter(chart, store, popup);
    } else {
      renderBars(chart, store, popup);
    }
  };

  store.subscribe(render);
  render();
}

export function mountApp(root: HTMLElement, store: SessionStore): void {
  renderConfigPage(root, store);
}
