import type {
  ApiError,
  EvaluationReport,
  EventSnapshot,
  ModelMeta,
  Strategy,
  SynthesisConfigBody,
  TraceStep,
} from './types';

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the drsuite service. All state lives server-side;
 * the client holds only the base URL. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiRequestError(resp.status, body as ApiError);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  listModels(): Promise<ModelMeta[]> {
    return this.request('/models');
  }

  modelMeta(name: string): Promise<ModelMeta> {
    return this.request(`/models/${encodeURIComponent(name)}`);
  }

  predictBaseline(
    model: string,
    rows: Record<string, number>[],
    initialLags?: number[],
  ): Promise<{ model: string; trajectory: number[] }> {
    return this.post('/predict/baseline', {
      model,
      rows,
      initial_lags: initialLags,
    });
  }

  evaluateStrategies(body: {
    power_model: string;
    zone_models: Record<string, string>;
    strategies: Strategy[];
    forecast: Record<string, number>[];
    initial_state: {
      power_lags: number[];
      zone_lags: Record<string, number[]>;
    };
    interval_minutes: number;
  }): Promise<EvaluationReport> {
    return this.post('/evaluate/strategies', body);
  }

  synthesizeStep(
    model: string,
    xD: Record<string, number>,
    config?: SynthesisConfigBody,
  ): Promise<TraceStep> {
    return this.post('/synthesize/step', { model, x_d: xD, config });
  }

  startEvent(body: {
    model: string;
    n_steps?: number;
    event?: Record<string, unknown>;
    forecast: Record<string, number>[];
    initial_lags?: number[];
    config?: SynthesisConfigBody;
    baseline?: number[];
    mode: 'replay' | 'live';
    step_seconds?: number;
  }): Promise<{ id: string; status: string; n_steps: number }> {
    return this.post('/events', body);
  }

  eventTrace(id: string): Promise<EventSnapshot> {
    return this.request(`/events/${encodeURIComponent(id)}/trace`);
  }

  updateEventConfig(
    id: string,
    config: SynthesisConfigBody,
  ): Promise<{ id: string; applied_from_step: number }> {
    return this.post(`/events/${encodeURIComponent(id)}/config`, config);
  }

  whatIf(body: {
    config?: Record<string, unknown>;
    initial_temps?: number[];
    strategy: Strategy;
    weather: Record<string, number>[];
  }): Promise<{ total_kwh: number; power: number[]; zone_temps: number[][] }> {
    return this.post('/simulate/whatif', body);
  }
}
