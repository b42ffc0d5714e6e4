/** Wire types mirroring the drsuite HTTP API. Every field here is filled
 * from an API response verbatim; the console never recomputes model
 * outputs client-side. */

export interface ModelMeta {
  name: string;
  type: 'tree' | 'cvtree' | 'forest' | 'brt' | 'ar' | 'mbcrt' | string;
  trained_at: string;
  metrics: Record<string, number>;
  schema: ColumnRecord[];
  /** envelope metadata; for mbcrt carries x_safe and the control list */
  model_meta?: MbcrtMeta | Record<string, unknown>;
}

export interface ColumnRecord {
  name: string;
  kind: string;
  role: string;
  units: string;
}

export interface MbcrtMeta {
  controls: string[];
  disturbances: string[];
  x_safe: Record<string, [number, number]>;
  interval_minutes: number;
  delta: number;
}

export interface Strategy {
  name: string;
  interval_minutes: number;
  steps: Record<string, number>[];
}

export interface EvaluationReport {
  trajectories: Record<string, number[]>;
  totals_kwh: Record<string, number>;
  ranking: string[];
  chosen: string;
}

export interface TraceStep {
  t: number;
  controls: Record<string, number>;
  kw_hat: number;
  t_hat: number[];
  region_ids: number[];
  objective: number;
  status: 'optimal' | 'infeasible_comfort' | string;
  kw_plant?: number;
  t_plant?: number[];
  baseline_kw?: number;
  cum_curtailment_kwh?: number;
}

export interface EventSnapshot {
  id: string;
  status: 'running' | 'complete' | string;
  n_steps: number;
  trace: TraceStep[];
}

export interface SynthesisConfigBody {
  penalty?: number;
  t_ref?: number[];
  comfort_bounds?: [number, number][];
}

export interface ApiError {
  code: string;
  message: string;
  detail?: unknown;
}

export interface Tariff {
  reservation_rate: number;
  energy_rate: number;
  months: number;
  events_per_month: number;
  event_hours: number;
}
