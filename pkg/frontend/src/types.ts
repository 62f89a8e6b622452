// Wire types mirrored from the engine's HTTP API and event stream.

export interface EngineEvent {
  seq: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface CostInfo {
  wall_s: number;
  cpu_s: number;
  peak_mem_mb: number | null;
  interaction_min: number;
}

export interface RunRow {
  ordinal: number;
  runId: string;
  assignment: Record<string, unknown>;
  status: string;
  cacheHit: boolean;
  feasible: boolean;
  metrics: Record<string, number>;
  cost: CostInfo | null;
}

export interface PromptInfo {
  promptId: string;
  role: string;
  costMin: number | null;
  payload: Record<string, unknown>;
}

export interface BudgetInfo {
  usedMin: number;
  totalMin: number;
}

export interface BestPoint {
  ordinal: number;
  value: number;
}

export interface RetrainNotice {
  reason: string;
  experiment: string;
}

export interface ExperimentSummary {
  id: string;
  status: string;
  runs: number;
  intent: { direction: string; metric: string };
  strategy: string;
  budget?: { total_min: number; used_min: number };
  best?: { ordinal: number; value: number; metric: string } | null;
}

export interface Recommendation {
  kind: string;
  id: string;
  score: number;
}

export type SupervisorAction = "continue" | "abort" | "prune" | "prioritize";
