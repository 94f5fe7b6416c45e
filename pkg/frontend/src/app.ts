// DOM wiring: input box, month selector, alpha slider, dual control/test
// panes, error banner. All ranking comes from the server; this layer only
// displays the latest completed response pair.

import type { CompleteFetcher, SeasonalityFetcher } from "./api.js";
import { ServiceClient } from "./api.js";
import type { PanePair } from "./controller.js";
import { TypeaheadController } from "./controller.js";
import { sparklineSvg } from "./sparkline.js";

export interface AppHandles {
  controller: TypeaheadController;
  elements: {
    input: HTMLInputElement;
    month: HTMLSelectElement;
    alpha: HTMLInputElement;
    alphaValue: HTMLElement;
    controlPane: HTMLElement;
    testPane: HTMLElement;
    banner: HTMLElement;
  };
}

export interface AppOptions {
  complete: CompleteFetcher;
  seasonality: SeasonalityFetcher;
  month?: number;
  alpha?: number;
  debounceMs?: number;
}

const MONTH_NAMES = [
  "January", "February", "March", "April", "May", "June",
  "July", "August", "September", "October", "November", "December",
];

export function defaultOptions(baseUrl: string): AppOptions {
  const client = new ServiceClient(baseUrl);
  return { complete: client.complete, seasonality: client.seasonality };
}

export function mountApp(root: HTMLElement, options: AppOptions): AppHandles {
  root.innerHTML = `
    <div class="controls">
      <input id="prefix" type="search" autocomplete="off" spellcheck="false"
             placeholder="start typing a query..." />
      <select id="month" aria-label="month"></select>
      <label class="alpha-label">seasonality weight
        <input id="alpha" type="range" min="0" max="1" step="0.05" />
        <span id="alpha-value"></span>
      </label>
    </div>
    <div id="banner" class="banner" hidden></div>
    <div class="panes">
      <section class="pane" aria-label="control pane">
        <h2>control (&alpha;=0)</h2>
        <ol id="control-pane" data-seq=""></ol>
      </section>
      <section class="pane" aria-label="test pane">
        <h2>test (&alpha;=<span id="alpha-echo"></span>)</h2>
        <ol id="test-pane" data-seq=""></ol>
      </section>
    </div>`;

  const input = root.querySelector<HTMLInputElement>("#prefix")!;
  const month = root.querySelector<HTMLSelectElement>("#month")!;
  const alpha = root.querySelector<HTMLInputElement>("#alpha")!;
  const alphaValue = root.querySelector<HTMLElement>("#alpha-value")!;
  const alphaEcho = root.querySelector<HTMLElement>("#alpha-echo")!;
  const controlPane = root.querySelector<HTMLElement>("#control-pane")!;
  const testPane = root.querySelector<HTMLElement>("#test-pane")!;
  const banner = root.querySelector<HTMLElement>("#banner")!;

  for (let m = 1; m <= 12; m += 1) {
    const option = document.createElement("option");
    option.value = String(m);
    option.textContent = MONTH_NAMES[m - 1] ?? String(m);
    month.appendChild(option);
  }

  const sparkCache = new Map<string, number[]>();

  async function decorateSparkline(item: HTMLElement, query: string, m: number) {
    try {
      let scores = sparkCache.get(query);
      if (!scores) {
        scores = (await options.seasonality(query)).scores;
        sparkCache.set(query, scores);
      }
      const slot = item.querySelector(".spark-slot");
      if (slot) slot.innerHTML = sparklineSvg(scores, m);
    } catch {
      // sparklines are decoration; never block or banner on their failure
    }
  }

  function renderPane(
    pane: HTMLElement,
    pair: PanePair,
    which: "control" | "test",
  ): void {
    pane.dataset.seq = String(pair.seq);
    pane.textContent = "";
    const response = which === "control" ? pair.control : pair.test;
    for (const s of response.suggestions) {
      const li = document.createElement("li");
      li.dataset.query = s.query;
      const label = document.createElement("span");
      label.className = "query";
      label.textContent = s.query;
      li.appendChild(label);
      if (which === "test") {
        const delta = pair.promotions.get(s.query);
        if (delta !== undefined) {
          const badge = document.createElement("span");
          badge.className = "badge promoted";
          badge.textContent = delta === Infinity ? "new" : `↑${delta}`;
          li.appendChild(badge);
        }
      }
      const detail = document.createElement("span");
      detail.className = "detail";
      detail.textContent =
        ` final ${s.final_score.toFixed(3)} · l1 ${s.l1_score.toFixed(3)}` +
        ` · season ${s.seasonality.toFixed(3)}`;
      li.appendChild(detail);
      const spark = document.createElement("span");
      spark.className = "spark-slot";
      li.appendChild(spark);
      pane.appendChild(li);
      void decorateSparkline(li, s.query, pair.month);
    }
  }

  const controller = new TypeaheadController({
    fetcher: options.complete,
    debounceMs: options.debounceMs,
    month: options.month,
    alpha: options.alpha,
    onRender: (pair) => {
      if (pair === null) {
        controlPane.textContent = "";
        testPane.textContent = "";
        controlPane.dataset.seq = "";
        testPane.dataset.seq = "";
        return;
      }
      renderPane(controlPane, pair, "control");
      renderPane(testPane, pair, "test");
    },
    onError: (message) => {
      if (message === null) {
        banner.hidden = true;
        banner.textContent = "";
      } else {
        banner.hidden = false;
        banner.textContent = `service unreachable: ${message}`;
      }
    },
  });

  month.value = String(controller.state.month);
  alpha.value = String(controller.state.alpha);
  alphaValue.textContent = controller.state.alpha.toFixed(2);
  alphaEcho.textContent = controller.state.alpha.toFixed(2);

  input.addEventListener("input", () => controller.keystroke(input.value));
  month.addEventListener("change", () => controller.setMonth(Number(month.value)));
  alpha.addEventListener("input", () => {
    const value = Number(alpha.value);
    alphaValue.textContent = value.toFixed(2);
    alphaEcho.textContent = value.toFixed(2);
    controller.setAlpha(value);
  });

  return {
    controller,
    elements: { input, month, alpha, alphaValue, controlPane, testPane, banner },
  };
}
