/** Single-page operator console. All numbers on screen come from API
 * responses (plus tariff display arithmetic); the running event id lives in
 * the URL hash so a refresh re-attaches to the same trace. */

import { ApiClient } from './api';
import { TracePoller } from './poller';
import {
  GridState,
  newGrid,
  setCell,
  toStrategy,
  validateGrid,
} from './strategyEditor';
import {
  avgCurtailmentKw,
  buildTraceView,
  projectedRevenue,
} from './traceView';
import type {
  EvaluationReport,
  EventSnapshot,
  MbcrtMeta,
  ModelMeta,
  Strategy,
  Tariff,
} from './types';

const DEFAULT_TARIFF: Tariff = {
  reservation_rate: 25,
  energy_rate: 1,
  months: 4,
  events_per_month: 5,
  event_hours: 1,
};

interface ConsoleState {
  models: ModelMeta[];
  selected: string | null;
  meta: MbcrtMeta | null;
  grids: GridState[];
  report: EvaluationReport | null;
  eventId: string | null;
  snapshot: EventSnapshot | null;
  staleBanner: boolean;
}

const state: ConsoleState = {
  models: [],
  selected: null,
  meta: null,
  grids: [],
  report: null,
  eventId: null,
  snapshot: null,
  staleBanner: false,
};

const api = new ApiClient(
  (window as unknown as { DRSUITE_API?: string }).DRSUITE_API ?? '',
);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(x: number | null | undefined, digits = 1): string {
  return x === null || x === undefined ? '—' : x.toFixed(digits);
}

async function refreshModels(): Promise<void> {
  state.models = await api.listModels();
  const list = el<HTMLUListElement>('model-list');
  list.innerHTML = '';
  for (const m of state.models) {
    const li = document.createElement('li');
    const acc = m.metrics['accuracy'];
    li.textContent = `${m.name} [${m.type}]` + (acc !== undefined ? ` acc=${acc.toFixed(3)}` : '');
    li.onclick = () => void selectModel(m.name);
    if (m.name === state.selected) li.classList.add('selected');
    list.appendChild(li);
  }
}

async function selectModel(name: string): Promise<void> {
  state.selected = name;
  const meta = await api.modelMeta(name);
  state.meta = (meta.model_meta ?? null) as MbcrtMeta | null;
  if (state.meta && state.meta.x_safe) {
    state.grids = [newGrid('s1', state.meta, 12)];
    renderEditor();
  }
  void refreshModels();
}

function renderEditor(): void {
  const host = el<HTMLDivElement>('editor');
  host.innerHTML = '';
  const grid = state.grids[0];
  if (!grid) return;
  const table = document.createElement('table');
  const head = table.insertRow();
  head.insertCell().textContent = 'step';
  for (const c of grid.controls) {
    const range = grid.ranges[c];
    head.insertCell().textContent = range
      ? `${c} [${range[0]}..${range[1]}]`
      : c;
  }
  const errors = validateGrid(grid);
  grid.rows.forEach((row, t) => {
    const tr = table.insertRow();
    tr.insertCell().textContent = String(t);
    for (const c of grid.controls) {
      const cell = tr.insertCell();
      const input = document.createElement('input');
      input.type = 'number';
      input.value = String(row[c]);
      input.onchange = () => {
        state.grids[0] = setCell(grid, t, c, Number(input.value));
        renderEditor();
      };
      if (errors.some((e) => e.step === t && e.control === c)) {
        cell.classList.add('invalid');
      }
      cell.appendChild(input);
    }
  });
  host.appendChild(table);
  el<HTMLButtonElement>('start-event').disabled = errors.length > 0;
  el<HTMLDivElement>('editor-errors').textContent = errors.length
    ? `${errors.length} cell(s) outside the safe range — save blocked`
    : '';
}

async function startReplayEvent(): Promise<void> {
  const grid = state.grids[0];
  if (!grid || !state.selected || !state.meta) return;
  const strategy: Strategy = toStrategy(grid);
  const forecastText = el<HTMLTextAreaElement>('forecast-input').value;
  const payload = JSON.parse(forecastText) as {
    forecast: Record<string, number>[];
    baseline?: number[];
    config?: Record<string, unknown>;
  };
  void strategy; // strategy grid drives the forecast the operator pastes
  const started = await api.startEvent({
    model: state.selected,
    n_steps: payload.forecast.length,
    forecast: payload.forecast,
    baseline: payload.baseline,
    config: payload.config,
    mode: 'replay',
  });
  state.eventId = started.id;
  window.location.hash = `event=${started.id}`;
  attachPoller(started.id);
}

function attachPoller(id: string): void {
  const poller = new TracePoller(() => api.eventTrace(id), {
    onSnapshot: (snapshot) => {
      state.snapshot = snapshot;
      renderTrace();
    },
    onStale: () => {
      state.staleBanner = true;
      renderBanner();
    },
    onRecovered: () => {
      state.staleBanner = false;
      renderBanner();
    },
  });
  poller.start();
}

function renderBanner(): void {
  el<HTMLDivElement>('stale-banner').style.display = state.staleBanner
    ? 'block'
    : 'none';
}

function renderTrace(): void {
  if (!state.snapshot || !state.meta) return;
  const view = buildTraceView(state.snapshot);
  const rows = view.steps.map((t, i) => {
    const switched = view.modelSwitches.includes(i) ? ' ⇄' : '';
    return (
      `<tr><td>${t}${switched}</td>` +
      `<td>${fmt(view.kwHat[i])}</td>` +
      `<td>${fmt(view.kwPlant[i] ?? null)}</td>` +
      `<td>${fmt(view.baseline[i] ?? null)}</td>` +
      `<td>${(view.regionIds[i] ?? []).join(',')}</td>` +
      `<td>${fmt(view.cumCurtailmentKwh[i] ?? null, 2)}</td></tr>`
    );
  });
  el<HTMLTableElement>('trace-table').innerHTML =
    '<tr><th>t</th><th>kŴ</th><th>kW plant</th><th>baseline</th>' +
    '<th>regions</th><th>Σ curtail kWh</th></tr>' + rows.join('');

  const avg = avgCurtailmentKw(view, state.meta.interval_minutes);
  const revenueText =
    avg === null
      ? '—'
      : `$${projectedRevenue(avg, DEFAULT_TARIFF).totalDollars.toFixed(0)}`;
  el<HTMLDivElement>('trace-summary').textContent =
    `${view.steps.length}/${state.snapshot.n_steps} steps · ` +
    `${view.modelSwitches.length} model switch(es) · ` +
    `avg curtailment ${fmt(avg)} kW · projected revenue ${revenueText}` +
    (view.complete ? ' · complete' : ' · running');
}

export function boot(): void {
  el<HTMLButtonElement>('start-event').onclick = () =>
    void startReplayEvent();
  const hash = new URLSearchParams(window.location.hash.slice(1));
  const existing = hash.get('event');
  if (existing) {
    state.eventId = existing;
    attachPoller(existing);
  }
  void refreshModels();
}

if (typeof document !== 'undefined' && document.getElementById('model-list')) {
  boot();
}
