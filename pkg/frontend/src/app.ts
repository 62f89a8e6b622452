// Dashboard wiring: one experiment at a time, state folded from SSE with
// GET reconciliation after errors. Supervisor actions are optimistic: rows
// grey out immediately and reconcile when the PromptResolved event lands.

import { ApiClient, ApiError } from "./client.js";
import {
  applyEvent,
  bestSoFarSeries,
  budgetGauge,
  initialState,
  pendingOrdinals,
  type DashboardState,
} from "./reducer.js";
import type { EngineEvent, ExperimentSummary } from "./types.js";

const client = new ApiClient("");

interface AppContext {
  experiment: ExperimentSummary | null;
  state: DashboardState | null;
  selected: Set<number>;
  optimisticPruned: Set<number>;
  closeStream: (() => void) | null;
}

const ctx: AppContext = {
  experiment: null,
  state: null,
  selected: new Set(),
  optimisticPruned: new Set(),
  closeStream: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toasts");
  const item = document.createElement("div");
  item.className = "toast";
  item.textContent = message;
  box.appendChild(item);
  setTimeout(() => item.remove(), 4000);
}

function fmt(value: unknown): string {
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : value.toFixed(4);
  }
  return String(value ?? "");
}

// ------------------------------------------------------------------ render

function renderExperimentList(experiments: ExperimentSummary[]): void {
  const box = el<HTMLUListElement>("experiments");
  box.innerHTML = "";
  for (const experiment of experiments) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = `${experiment.id} · ${experiment.status}`;
    link.onclick = (event) => {
      event.preventDefault();
      void selectExperiment(experiment.id);
    };
    item.appendChild(link);
    box.appendChild(item);
  }
}

function renderRuns(): void {
  const state = ctx.state;
  if (!state || !ctx.experiment) return;
  const table = el<HTMLTableSectionElement>("runs-body");
  const metric = state.intentMetric;
  table.innerHTML = "";
  for (const row of state.rows) {
    const tr = document.createElement("tr");
    const pruned =
      state.prunedOrdinals.includes(row.ordinal) || ctx.optimisticPruned.has(row.ordinal);
    if (pruned) tr.className = "pruned";
    if (!row.feasible) tr.classList.add("infeasible");
    tr.innerHTML = `
      <td>${row.ordinal}</td>
      <td class="assignment">${Object.entries(row.assignment)
        .map(([k, v]) => `${k}=${fmt(v)}`)
        .join(" ")}</td>
      <td>${row.status}${row.cacheHit ? " (cached)" : ""}</td>
      <td>${row.feasible ? "yes" : "no"}</td>
      <td>${fmt(row.metrics[metric])}</td>
      <td>${row.cost ? row.cost.wall_s.toFixed(2) + "s" : ""}</td>`;
    table.appendChild(tr);
  }
  el<HTMLSpanElement>("run-count").textContent = String(state.rows.length);
  el<HTMLSpanElement>("status").textContent = state.status;
  if (state.best) {
    el<HTMLSpanElement>("best").textContent = `ordinal ${fmt(state.best["ordinal"])} -> ${fmt(
      state.best["value"],
    )}`;
  }
}

function renderBudget(): void {
  if (!ctx.state) return;
  const gauge = budgetGauge(ctx.state);
  el<HTMLSpanElement>("budget-text").textContent =
    gauge.total > 0 ? `${gauge.used.toFixed(1)} / ${gauge.total.toFixed(1)} min` : "no budget";
  el<HTMLDivElement>("budget-fill").style.width = `${Math.round(gauge.fraction * 100)}%`;
}

function renderChart(): void {
  const state = ctx.state;
  if (!state || !ctx.experiment) return;
  const series = bestSoFarSeries(state, ctx.experiment.intent.direction);
  const svg = el<HTMLElement>("chart");
  if (series.length === 0) {
    svg.innerHTML = "";
    return;
  }
  const values = series.map((p) => p.value);
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min || 1;
  const stepX = 280 / Math.max(series.length - 1, 1);
  const points = series
    .map((p, i) => `${10 + i * stepX},${90 - ((p.value - min) / span) * 80}`)
    .join(" ");
  svg.innerHTML = `<polyline fill="none" stroke="#2a7" stroke-width="2" points="${points}" />`;
}

function renderInbox(): void {
  const state = ctx.state;
  const box = el<HTMLDivElement>("inbox");
  if (!state || !state.prompt) {
    box.innerHTML = "<p class='muted'>No pending checkpoint.</p>";
    return;
  }
  const prompt = state.prompt;
  if (prompt.role === "validator") {
    box.innerHTML = `
      <p><strong>Validator:</strong> ${fmt(prompt.payload["question"] ?? "Is this output valid?")}
      <span class="muted">(${fmt(prompt.payload["task"])})</span></p>
      <button id="btn-valid">Valid</button>
      <button id="btn-invalid">Invalid</button>`;
    el<HTMLButtonElement>("btn-valid").onclick = () => void respondValidator(true);
    el<HTMLButtonElement>("btn-invalid").onclick = () => void respondValidator(false);
    return;
  }
  const pending = pendingOrdinals(state);
  box.innerHTML = `
    <p><strong>Supervisor checkpoint</strong> after ${fmt(prompt.payload["completed"])} runs.
    Select pending configurations below, then choose an action.</p>
    <div id="pending-list">${pending
      .map(
        (o) =>
          `<label><input type="checkbox" data-ordinal="${o}" ${
            ctx.selected.has(o) ? "checked" : ""
          }/> #${o}</label>`,
      )
      .join(" ")}</div>
    <button id="btn-continue">Continue</button>
    <button id="btn-prune">Prune selected</button>
    <button id="btn-prioritize">Prioritize selected</button>
    <button id="btn-abort" class="danger">Abort</button>`;
  box.querySelectorAll<HTMLInputElement>("input[type=checkbox]").forEach((input) => {
    input.onchange = () => {
      const ordinal = Number(input.dataset["ordinal"]);
      if (input.checked) ctx.selected.add(ordinal);
      else ctx.selected.delete(ordinal);
    };
  });
  el<HTMLButtonElement>("btn-continue").onclick = () => void respondSupervisor("continue");
  el<HTMLButtonElement>("btn-prune").onclick = () => void respondSupervisor("prune");
  el<HTMLButtonElement>("btn-prioritize").onclick = () => void respondSupervisor("prioritize");
  el<HTMLButtonElement>("btn-abort").onclick = () => void respondSupervisor("abort");
}

function renderRetrain(): void {
  const state = ctx.state;
  const box = el<HTMLDivElement>("retrain");
  if (state?.retrain) {
    box.textContent = `Re-execution triggered (${state.retrain.reason}): ${state.retrain.experiment}`;
  } else {
    box.textContent = "";
  }
}

function renderAll(): void {
  renderRuns();
  renderBudget();
  renderChart();
  renderInbox();
  renderRetrain();
}

// ----------------------------------------------------------------- actions

async function respondSupervisor(action: "continue" | "abort" | "prune" | "prioritize"): Promise<void> {
  const state = ctx.state;
  if (!state?.prompt) return;
  const ordinals = action === "prune" || action === "prioritize" ? [...ctx.selected] : [];
  if (action === "prune") {
    for (const o of ordinals) ctx.optimisticPruned.add(o); // grey immediately
    renderRuns();
  }
  try {
    await client.respondSupervisor(state.prompt.promptId, action, ordinals);
    ctx.selected.clear();
  } catch (error) {
    for (const o of ordinals) ctx.optimisticPruned.delete(o);
    if (error instanceof ApiError) {
      toast(`${error.status}: ${error.message}`);
      if (error.status === 409) await resync();
    } else {
      toast(String(error));
    }
    renderAll();
  }
}

async function respondValidator(valid: boolean): Promise<void> {
  const state = ctx.state;
  if (!state?.prompt) return;
  try {
    await client.respondValidator(state.prompt.promptId, valid);
  } catch (error) {
    toast(error instanceof ApiError ? `${error.status}: ${error.message}` : String(error));
    if (error instanceof ApiError && error.status === 409) await resync();
  }
}

async function resync(): Promise<void> {
  if (!ctx.experiment || !ctx.state) return;
  const rows = await client.getRuns(ctx.experiment.id);
  ctx.state = { ...ctx.state, rows };
  ctx.optimisticPruned.clear();
  renderAll();
}

async function loadRecommendations(): Promise<void> {
  const user = el<HTMLInputElement>("rec-user").value;
  const intent = el<HTMLInputElement>("rec-intent").value;
  const box = el<HTMLUListElement>("recommendations");
  try {
    const items = await client.recommendations({ user, intent, relation: "usesAlgorithm", k: 5 });
    box.innerHTML = items
      .map((i) => `<li><code>${i.id}</code> <span class="muted">${i.score.toFixed(3)}</span></li>`)
      .join("");
  } catch (error) {
    box.innerHTML = `<li class="muted">${
      error instanceof ApiError ? error.message : String(error)
    }</li>`;
  }
}

// ------------------------------------------------------------------- boot

async function selectExperiment(id: string): Promise<void> {
  if (ctx.closeStream) ctx.closeStream();
  ctx.experiment = await client.getExperiment(id);
  ctx.state = initialState(ctx.experiment.intent.metric);
  ctx.selected.clear();
  ctx.optimisticPruned.clear();
  el<HTMLSpanElement>("experiment-name").textContent = id;
  ctx.closeStream = client.openEvents(id, 0, (event: EngineEvent) => {
    if (!ctx.state) return;
    const before = ctx.state.prunedOrdinals.length;
    ctx.state = applyEvent(ctx.state, event);
    if (ctx.state.prunedOrdinals.length !== before) ctx.optimisticPruned.clear();
    renderAll();
  });
  renderAll();
}

export async function boot(): Promise<void> {
  const experiments = await client.listExperiments();
  renderExperimentList(experiments);
  el<HTMLButtonElement>("rec-load").onclick = () => void loadRecommendations();
  el<HTMLButtonElement>("refresh").onclick = () =>
    void client.listExperiments().then(renderExperimentList);
  const first = experiments[0];
  if (first) await selectExperiment(first.id);
}

if (typeof document !== "undefined" && document.getElementById("runs-body")) {
  void boot();
}
