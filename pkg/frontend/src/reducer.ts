// Dashboard state is a pure fold of the per-experiment event stream.
// Events may arrive out of order; anything ahead of the next expected
// sequence number is parked until the gap fills, so replaying a recorded
// log in any interleaving converges to the same state.

import type {
  BestPoint,
  BudgetInfo,
  EngineEvent,
  PromptInfo,
  RetrainNotice,
  RunRow,
} from "./types.js";

export interface DashboardState {
  nextSeq: number;
  buffered: Record<number, EngineEvent>;
  intentMetric: string;
  rows: RunRow[];
  runningOrdinals: number[];
  prunedOrdinals: number[];
  prompt: PromptInfo | null;
  budget: BudgetInfo | null;
  bestSoFar: BestPoint[];
  status: string;
  best: Record<string, unknown> | null;
  retrain: RetrainNotice | null;
}

export function initialState(intentMetric: string): DashboardState {
  return {
    nextSeq: 1,
    buffered: {},
    intentMetric,
    rows: [],
    runningOrdinals: [],
    prunedOrdinals: [],
    prompt: null,
    budget: null,
    bestSoFar: [],
    status: "running",
    best: null,
    retrain: null,
  };
}

function num(value: unknown): number {
  return typeof value === "number" ? value : Number(value ?? 0);
}

function budgetFrom(payload: Record<string, unknown>): BudgetInfo | null {
  if (payload["budget_total_min"] === undefined) return null;
  return {
    usedMin: num(payload["budget_used_min"]),
    totalMin: num(payload["budget_total_min"]),
  };
}

/** Fold one in-order event. Exported for tests; use applyEvent for streams. */
export function foldEvent(state: DashboardState, event: EngineEvent): DashboardState {
  const p = event.payload;
  switch (event.kind) {
    case "RunStarted": {
      const ordinal = num(p["ordinal"]);
      return { ...state, runningOrdinals: [...state.runningOrdinals, ordinal] };
    }
    case "RunFinished": {
      const ordinal = num(p["ordinal"]);
      const metrics = (p["metrics"] ?? {}) as Record<string, number>;
      const feasible = Boolean(p["feasible"]);
      const row: RunRow = {
        ordinal,
        runId: String(p["run_id"] ?? ""),
        assignment: (p["assignment"] ?? {}) as Record<string, unknown>,
        status: String(p["status"] ?? ""),
        cacheHit: Boolean(p["cache_hit"]),
        feasible,
        metrics,
        cost: (p["cost"] as RunRow["cost"]) ?? null,
      };
      const bestSoFar =
        feasible && typeof metrics[state.intentMetric] === "number"
          ? [...state.bestSoFar, { ordinal, value: metrics[state.intentMetric] as number }]
          : state.bestSoFar;
      return {
        ...state,
        rows: [...state.rows, row],
        runningOrdinals: state.runningOrdinals.filter((o) => o !== ordinal),
        bestSoFar,
      };
    }
    case "PromptOpened": {
      const prompt: PromptInfo = {
        promptId: String(p["prompt_id"] ?? ""),
        role: String(p["role"] ?? ""),
        costMin: p["cost_min"] === undefined ? null : num(p["cost_min"]),
        payload: (p["payload"] ?? {}) as Record<string, unknown>,
      };
      return { ...state, prompt };
    }
    case "PromptResolved": {
      const promptId = String(p["prompt_id"] ?? "");
      const prompt = state.prompt && state.prompt.promptId === promptId ? null : state.prompt;
      return { ...state, prompt, budget: budgetFrom(p) ?? state.budget };
    }
    case "SchedulePruned": {
      const ordinals = ((p["ordinals"] ?? []) as number[]).map(num);
      return { ...state, prunedOrdinals: [...state.prunedOrdinals, ...ordinals] };
    }
    case "ExperimentFinished": {
      return {
        ...state,
        status: String(p["status"] ?? "completed"),
        best: (p["best"] as Record<string, unknown>) ?? null,
        budget: budgetFrom(p) ?? state.budget,
      };
    }
    case "TriggerFired": {
      return {
        ...state,
        retrain: {
          reason: String(p["reason"] ?? ""),
          experiment: String(p["experiment"] ?? ""),
        },
      };
    }
    default:
      return state;
  }
}

/** Apply an event that may be out of order; gaps are buffered until filled. */
export function applyEvent(state: DashboardState, event: EngineEvent): DashboardState {
  if (event.seq < state.nextSeq) return state; // duplicate delivery
  if (event.seq > state.nextSeq) {
    return { ...state, buffered: { ...state.buffered, [event.seq]: event } };
  }
  let next = foldEvent(state, event);
  next = { ...next, nextSeq: state.nextSeq + 1 };
  while (next.buffered[next.nextSeq] !== undefined) {
    const queued = next.buffered[next.nextSeq] as EngineEvent;
    const rest = { ...next.buffered };
    delete rest[next.nextSeq];
    next = { ...foldEvent(next, queued), nextSeq: next.nextSeq + 1, buffered: rest };
  }
  return next;
}

export function applyAll(state: DashboardState, events: EngineEvent[]): DashboardState {
  return events.reduce(applyEvent, state);
}

/** Budget gauge values; never displays used beyond total. */
export function budgetGauge(state: DashboardState): { used: number; total: number; fraction: number } {
  const total = state.budget?.totalMin ?? 0;
  const used = Math.min(state.budget?.usedMin ?? 0, total);
  return { used, total, fraction: total > 0 ? used / total : 0 };
}

/** Cumulative best of the intent metric over feasible runs, for the chart. */
export function bestSoFarSeries(state: DashboardState, direction: string): BestPoint[] {
  const better = (a: number, b: number) => (direction === "minimize" ? a < b : a > b);
  const out: BestPoint[] = [];
  let best: number | null = null;
  for (const point of state.bestSoFar) {
    if (best === null || better(point.value, best)) best = point.value;
    out.push({ ordinal: point.ordinal, value: best });
  }
  return out;
}

export function pendingOrdinals(state: DashboardState): number[] {
  if (!state.prompt) return [];
  const pending = (state.prompt.payload["pending"] as number[] | undefined) ?? [];
  return pending.filter((o) => !state.prunedOrdinals.includes(o));
}
