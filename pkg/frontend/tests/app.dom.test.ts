// The UI acceptance flow, driven through the real DOM against the recorded
// service fixture: type "memo" with May selected, check pane consistency,
// the seasonal promotion, and that alpha=0 renders identical panes.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { mountApp, type AppHandles } from "../src/app.js";
import type { CompleteParams } from "../src/api.js";
import { fixtureComplete, fixtureSeasonality } from "./fixtures.js";

let handles: AppHandles;
let calls: CompleteParams[];

function paneQueries(pane: HTMLElement): string[] {
  return Array.from(pane.querySelectorAll<HTMLElement>("li")).map(
    (li) => li.dataset.query ?? "",
  );
}

async function settle(): Promise<void> {
  await vi.advanceTimersByTimeAsync(150);
  await handles.controller.whenIdle();
  await vi.advanceTimersByTimeAsync(10); // sparkline decorations
}

function type(text: string): void {
  const { input } = handles.elements;
  for (let i = 1; i <= text.length; i += 1) {
    input.value = text.slice(0, i);
    input.dispatchEvent(new Event("input", { bubbles: true }));
  }
}

beforeEach(() => {
  vi.useFakeTimers();
  calls = [];
  document.body.innerHTML = '<div id="app"></div>';
  handles = mountApp(document.getElementById("app")!, {
    complete: fixtureComplete(calls),
    seasonality: fixtureSeasonality,
    month: 5,
    alpha: 0.5,
  });
});

afterEach(() => {
  vi.useRealTimers();
});

describe("typing memo with May selected", () => {
  it("renders both panes from one request pair with the seasonal query promoted", async () => {
    expect(handles.elements.month.value).toBe("5");
    type("memo");
    await settle();

    // a single debounced pair despite four keystrokes
    expect(calls.length).toBe(2);
    expect(calls.every((c) => c.prefix === "memo" && c.month === 5)).toBe(true);

    const { controlPane, testPane } = handles.elements;
    // pane consistency: both panes carry the same sequence number
    expect(controlPane.dataset.seq).not.toBe("");
    expect(controlPane.dataset.seq).toBe(testPane.dataset.seq);

    // server order verbatim: control pane is the pure-L1 ranking
    expect(paneQueries(controlPane)).toEqual([
      "memory foam mattress topper",
      "memory foam mattress",
      "memory foam pillow",
      "memorial day flowers",
      "memory card",
      "memorial day decorations",
      "memory foam futon",
    ]);

    // the May-peaked query rises to the top of the test pane
    expect(paneQueries(testPane)[0]).toBe("memorial day flowers");

    // and carries a promotion badge with its rank delta (4 -> 1)
    const top = testPane.querySelector("li")!;
    const badge = top.querySelector(".badge.promoted");
    expect(badge?.textContent).toBe("↑3");

    // non-promoted items carry no badge
    const topperItem = Array.from(testPane.querySelectorAll("li")).find(
      (li) => li.dataset.query === "memory foam mattress topper",
    )!;
    expect(topperItem.querySelector(".badge")).toBeNull();
  });

  it("renders seasonality sparklines from the seasonality endpoint", async () => {
    type("memo");
    await settle();
    await vi.runAllTimersAsync();
    const sparks = handles.elements.testPane.querySelectorAll("svg.spark");
    expect(sparks.length).toBeGreaterThan(0);
  });
});

describe("alpha slider", () => {
  it("alpha=0 renders identical panes", async () => {
    type("memo");
    await settle();
    const { alpha } = handles.elements;
    alpha.value = "0";
    alpha.dispatchEvent(new Event("input", { bubbles: true }));
    await settle();

    const { controlPane, testPane } = handles.elements;
    expect(paneQueries(testPane)).toEqual(paneQueries(controlPane));
    expect(controlPane.dataset.seq).toBe(testPane.dataset.seq);
    expect(testPane.querySelectorAll(".badge.promoted").length).toBe(0);
  });
});

describe("degraded modes", () => {
  it("clears both panes on empty input", async () => {
    type("memo");
    await settle();
    handles.elements.input.value = "";
    handles.elements.input.dispatchEvent(new Event("input", { bubbles: true }));
    await settle();
    expect(paneQueries(handles.elements.controlPane)).toEqual([]);
    expect(paneQueries(handles.elements.testPane)).toEqual([]);
  });

  it("shows a non-blocking banner on network failure and keeps panes", async () => {
    type("memo");
    await settle();
    const before = paneQueries(handles.elements.testPane);

    document.body.innerHTML = '<div id="app"></div>';
    calls = [];
    let shouldFail = true;
    const flaky = fixtureComplete(calls);
    handles = mountApp(document.getElementById("app")!, {
      complete: async (params) => {
        if (shouldFail) throw new Error("connection refused");
        return flaky(params);
      },
      seasonality: fixtureSeasonality,
      month: 5,
      alpha: 0.5,
    });
    type("memo");
    await settle();
    const banner = handles.elements.banner;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("connection refused");

    shouldFail = false;
    type("memor");
    await settle();
    expect(banner.hidden).toBe(true);
    expect(paneQueries(handles.elements.testPane)).toEqual(before);
  });
});
