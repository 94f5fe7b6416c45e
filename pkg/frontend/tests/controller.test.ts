// Request lifecycle: debounce contract, staleness, clearing, error banner.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { CompleteParams, CompleteResponse } from "../src/api.js";
import { TypeaheadController, type PanePair } from "../src/controller.js";
import { fixtureComplete } from "./fixtures.js";

interface Harness {
  controller: TypeaheadController;
  renders: Array<PanePair | null>;
  errors: Array<string | null>;
  calls: CompleteParams[];
}

function makeHarness(fetcher = fixtureComplete()): Harness {
  const renders: Array<PanePair | null> = [];
  const errors: Array<string | null> = [];
  const calls: CompleteParams[] = [];
  const wrapped: typeof fetcher = async (params) => {
    calls.push({ ...params });
    return fetcher(params);
  };
  const controller = new TypeaheadController({
    fetcher: wrapped,
    onRender: (pair) => renders.push(pair),
    onError: (message) => errors.push(message),
    month: 5,
    alpha: 0.5,
    debounceMs: 100,
  });
  return { controller, renders, errors, calls };
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

async function settle(controller: TypeaheadController): Promise<void> {
  await vi.advanceTimersByTimeAsync(150);
  await controller.whenIdle();
}

describe("debounce", () => {
  it("collapses rapid keystrokes into exactly one request pair", async () => {
    const h = makeHarness();
    h.controller.keystroke("m");
    await vi.advanceTimersByTimeAsync(30);
    h.controller.keystroke("me");
    await vi.advanceTimersByTimeAsync(30);
    h.controller.keystroke("mem");
    await settle(h.controller);
    expect(h.calls.length).toBe(2); // one control + one test fetch
    expect(h.calls.every((c) => c.prefix === "mem")).toBe(true);
    expect(h.renders.length).toBe(1);
    expect(h.renders[0]?.prefix).toBe("mem");
  });

  it("issues separate pairs when keystrokes are slower than the window", async () => {
    const h = makeHarness();
    h.controller.keystroke("m");
    await settle(h.controller);
    h.controller.keystroke("me");
    await settle(h.controller);
    expect(h.calls.length).toBe(4);
    expect(h.renders.length).toBe(2);
  });

  it("fires control with alpha=0 and test with the current alpha", async () => {
    const h = makeHarness();
    h.controller.keystroke("memo");
    await settle(h.controller);
    const alphas = h.calls.map((c) => c.alpha).sort();
    expect(alphas).toEqual([0, 0.5]);
  });
});

describe("staleness", () => {
  it("drops an older pair that completes after a newer one", async () => {
    const pending = new Map<string, Array<(r: CompleteResponse) => void>>();
    const fetcher = (params: CompleteParams) =>
      new Promise<CompleteResponse>((resolve) => {
        const arr = pending.get(params.prefix) ?? [];
        arr.push(resolve);
        pending.set(params.prefix, arr);
      });
    const h = makeHarness(fetcher as never);

    h.controller.keystroke("me");
    await vi.advanceTimersByTimeAsync(110); // pair A in flight
    h.controller.keystroke("mem");
    await vi.advanceTimersByTimeAsync(110); // pair B in flight

    const respond = (prefix: string) => {
      for (const resolve of pending.get(prefix) ?? []) {
        resolve({ prefix, month: 5, suggestions: [], latency_micros: 1 });
      }
    };
    respond("mem"); // newer pair resolves first
    await h.controller.whenIdle();
    respond("me"); // older pair resolves afterwards
    await vi.runAllTimersAsync();
    await h.controller.whenIdle();

    expect(h.renders.length).toBe(1);
    expect(h.renders[0]?.prefix).toBe("mem");
  });

  it("keeps panes in lockstep: control and test share one sequence number", async () => {
    const h = makeHarness();
    h.controller.keystroke("me");
    await settle(h.controller);
    h.controller.keystroke("memo");
    await settle(h.controller);
    const seqs = h.renders.map((r) => r?.seq);
    expect(new Set(seqs).size).toBe(seqs.length); // strictly advancing
    const last = h.renders.at(-1)!;
    expect(last.control.prefix).toBe(last.test.prefix);
  });
});

describe("clearing and errors", () => {
  it("empty input clears the panes without fetching", async () => {
    const h = makeHarness();
    h.controller.keystroke("me");
    await settle(h.controller);
    h.controller.keystroke("");
    await settle(h.controller);
    expect(h.renders.at(-1)).toBeNull();
    expect(h.calls.length).toBe(2); // only the first keystroke fetched
  });

  it("a failing fetch banners but keeps the last good panes", async () => {
    let fail = false;
    const good = fixtureComplete();
    const fetcher = async (params: CompleteParams) => {
      if (fail) throw new Error("boom");
      return good(params);
    };
    const h = makeHarness(fetcher as never);
    h.controller.keystroke("me");
    await settle(h.controller);
    expect(h.renders.length).toBe(1);
    expect(h.errors.at(-1)).toBeNull();

    fail = true;
    h.controller.keystroke("mem");
    await settle(h.controller);
    expect(h.renders.length).toBe(1); // no new render
    expect(h.errors.at(-1)).toContain("boom");

    fail = false;
    h.controller.keystroke("memo");
    await settle(h.controller);
    expect(h.renders.length).toBe(2);
    expect(h.errors.at(-1)).toBeNull(); // banner cleared on recovery
  });

  it("month and alpha changes refetch with the current prefix", async () => {
    const h = makeHarness();
    h.controller.keystroke("memo");
    await settle(h.controller);
    h.controller.setMonth(12);
    await settle(h.controller);
    expect(h.calls.at(-1)?.month).toBe(12);
    h.controller.setAlpha(0.25);
    await settle(h.controller);
    expect(h.calls.at(-1)?.alpha).toBe(0.25);
    expect(h.calls.length).toBe(6);
  });

  it("month and alpha changes with no prefix do not fetch", async () => {
    const h = makeHarness();
    h.controller.setMonth(3);
    h.controller.setAlpha(0.9);
    await settle(h.controller);
    expect(h.calls.length).toBe(0);
  });

  it("rejects out-of-range inputs", () => {
    const h = makeHarness();
    expect(() => h.controller.setMonth(13)).toThrow();
    expect(() => h.controller.setMonth(0)).toThrow();
    expect(() => h.controller.setAlpha(1.5)).toThrow();
  });
});
