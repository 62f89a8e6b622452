// Reducer fold replay against a recorded engine session, plus the prune
// cycle, out-of-order buffering, and gauge clamping.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/client.js";
import {
  applyAll,
  applyEvent,
  bestSoFarSeries,
  budgetGauge,
  foldEvent,
  initialState,
  type DashboardState,
} from "../src/reducer.js";
import type { EngineEvent } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

const events = fixture<EngineEvent[]>("events.json");
const runsSnapshot = fixture<{ runs: Record<string, unknown>[] }>("runs.json");
const summary = fixture<{ intent: { metric: string; direction: string } }>("summary.json");

function replayed(): DashboardState {
  return applyAll(initialState(summary.intent.metric), events);
}

describe("recorded fixture replay", () => {
  it("yields a run table equal to the server's GET runs snapshot", () => {
    const state = replayed();
    const expected = runsSnapshot.runs.map((r) => ({
      ordinal: r["ordinal"],
      runId: r["run_id"],
      status: r["status"],
      cacheHit: r["cache_hit"],
      feasible: r["feasible"],
      metrics: r["metrics"],
    }));
    const actual = state.rows.map((r) => ({
      ordinal: r.ordinal,
      runId: r.runId,
      status: r.status,
      cacheHit: r.cacheHit,
      feasible: r.feasible,
      metrics: r.metrics,
    }));
    expect(actual).toEqual(expected);
  });

  it("prune of 2 pending rows reduces the final run count by 2", () => {
    const state = replayed();
    expect(state.rows.length).toBe(7); // 9 configurations minus 2 pruned
    expect(state.prunedOrdinals).toEqual([5, 6]);
    const pruned = events.find((e) => e.kind === "SchedulePruned");
    expect(pruned?.payload["by"]).toBe("supervisor");
  });

  it("PromptOpened surfaces the inbox and PromptResolved clears it within one event", () => {
    let state = initialState(summary.intent.metric);
    let sawOpen = false;
    for (const event of events) {
      state = applyEvent(state, event);
      if (event.kind === "PromptOpened") {
        sawOpen = true;
        expect(state.prompt).not.toBeNull();
        expect(state.prompt?.promptId).toBe(event.payload["prompt_id"]);
      }
      if (event.kind === "PromptResolved") {
        expect(state.prompt).toBeNull();
      }
    }
    expect(sawOpen).toBe(true);
    expect(state.status).toBe("completed");
  });

  it("budget gauge reflects the charged checkpoint", () => {
    const state = replayed();
    const gauge = budgetGauge(state);
    expect(gauge.total).toBe(10);
    expect(gauge.used).toBe(2);
  });

  it("best-so-far series is nondecreasing for a maximized metric", () => {
    const state = replayed();
    const series = bestSoFarSeries(state, summary.intent.direction);
    expect(series.length).toBeGreaterThan(0);
    for (let i = 1; i < series.length; i++) {
      expect(series[i]!.value).toBeGreaterThanOrEqual(series[i - 1]!.value);
    }
  });
});

describe("out-of-order delivery", () => {
  it("buffers gaps until filled and converges to the ordered result", () => {
    const ordered = replayed();
    const shuffled = [...events];
    // displace a few events forward to create gaps
    for (const step of [2, 5, 9]) {
      const item = shuffled.splice(step, 1)[0]!;
      shuffled.splice(Math.min(step + 3, shuffled.length), 0, item);
    }
    const state = applyAll(initialState(summary.intent.metric), shuffled);
    expect(state.rows).toEqual(ordered.rows);
    expect(state.prunedOrdinals).toEqual(ordered.prunedOrdinals);
    expect(state.status).toBe(ordered.status);
    expect(Object.keys(state.buffered)).toHaveLength(0);
  });

  it("ignores duplicate deliveries", () => {
    const once = replayed();
    const twice = applyAll(once, events);
    expect(twice).toEqual(once);
  });
});

describe("budget gauge", () => {
  it("never displays used beyond total", () => {
    let state = initialState("accuracy");
    state = foldEvent(state, {
      seq: 1,
      kind: "PromptResolved",
      payload: { prompt_id: "x", budget_used_min: 99, budget_total_min: 10 },
    });
    const gauge = budgetGauge(state);
    expect(gauge.used).toBe(10);
    expect(gauge.fraction).toBeLessThanOrEqual(1);
  });
});

describe("api client", () => {
  function fakeFetch(status: number, body: unknown) {
    const calls: { url: string; init?: RequestInit }[] = [];
    const impl = async (url: string, init?: RequestInit) => {
      calls.push({ url, init });
      return {
        ok: status >= 200 && status < 300,
        status,
        json: async () => body,
      } as Response;
    };
    return { impl, calls };
  }

  it("posts supervisor prune with ordinals", async () => {
    const { impl, calls } = fakeFetch(200, { ok: true });
    const client = new ApiClient("", impl);
    await client.respondSupervisor("p1", "prune", [5, 6]);
    expect(calls[0]!.url).toBe("/prompts/p1/response");
    expect(JSON.parse(String(calls[0]!.init?.body))).toEqual({
      action: "prune",
      ordinals: [5, 6],
    });
  });

  it("surfaces 409 conflicts as typed errors", async () => {
    const { impl } = fakeFetch(409, { error: "prompt already resolved" });
    const client = new ApiClient("", impl);
    await expect(client.respondSupervisor("p1", "continue")).rejects.toMatchObject({
      status: 409,
      message: "prompt already resolved",
    });
    await expect(client.respondSupervisor("p1", "continue")).rejects.toBeInstanceOf(ApiError);
  });

  it("maps run rows from the wire shape", async () => {
    const { impl } = fakeFetch(200, {
      runs: [
        {
          ordinal: 3,
          run_id: "r3",
          assignment: { lr: 0.01 },
          status: "ok",
          cache_hit: true,
          feasible: true,
          metrics: { accuracy: 0.8 },
          cost: { wall_s: 1, cpu_s: 0.5, peak_mem_mb: null, interaction_min: 0 },
        },
      ],
    });
    const client = new ApiClient("", impl);
    const rows = await client.getRuns("exp");
    expect(rows[0]).toMatchObject({ ordinal: 3, runId: "r3", cacheHit: true });
  });
});
