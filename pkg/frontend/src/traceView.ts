import type { EventSnapshot, Tariff, TraceStep } from './types';

/** Everything the live event monitor renders, derived 1:1 from the trace
 * JSON — series values are copied, never recomputed. */
export interface TraceViewModel {
  steps: number[];
  kwHat: number[];
  kwPlant: (number | null)[];
  baseline: (number | null)[];
  zoneTemps: number[][]; // [zone][step], predicted
  regionIds: number[][]; // per step
  /** step indices where any tree switched to a different region */
  modelSwitches: number[];
  cumCurtailmentKwh: (number | null)[];
  infeasibleSteps: number[];
  complete: boolean;
}

export function buildTraceView(snapshot: EventSnapshot): TraceViewModel {
  const trace = snapshot.trace;
  const nZones = trace.length > 0 ? trace[0]!.t_hat.length : 0;
  const zoneTemps: number[][] = Array.from({ length: nZones }, () => []);
  const view: TraceViewModel = {
    steps: [],
    kwHat: [],
    kwPlant: [],
    baseline: [],
    zoneTemps,
    regionIds: [],
    modelSwitches: [],
    cumCurtailmentKwh: [],
    infeasibleSteps: [],
    complete: snapshot.status === 'complete',
  };
  let prevRegions: number[] | null = null;
  trace.forEach((step: TraceStep, i: number) => {
    view.steps.push(step.t);
    view.kwHat.push(step.kw_hat);
    view.kwPlant.push(step.kw_plant ?? null);
    view.baseline.push(step.baseline_kw ?? null);
    step.t_hat.forEach((temp, z) => zoneTemps[z]!.push(temp));
    view.regionIds.push([...step.region_ids]);
    view.cumCurtailmentKwh.push(step.cum_curtailment_kwh ?? null);
    if (step.status !== 'optimal') view.infeasibleSteps.push(i);
    if (prevRegions !== null && !sameRegions(prevRegions, step.region_ids)) {
      view.modelSwitches.push(i);
    }
    prevRegions = step.region_ids;
  });
  return view;
}

function sameRegions(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** Zone temperatures that stray outside the comfort band, for the
 * bounds-overlay chart. */
export function comfortViolations(
  view: TraceViewModel,
  bounds: [number, number][],
): { step: number; zone: number; temp: number }[] {
  const out: { step: number; zone: number; temp: number }[] = [];
  view.zoneTemps.forEach((series, zone) => {
    const band = bounds[zone];
    if (!band) return;
    series.forEach((temp, step) => {
      if (temp < band[0] || temp > band[1]) out.push({ step, zone, temp });
    });
  });
  return out;
}

/** Average curtailment so far, read off the trace's cumulative field. */
export function avgCurtailmentKw(
  view: TraceViewModel,
  intervalMinutes: number,
): number | null {
  const n = view.cumCurtailmentKwh.length;
  if (n === 0) return null;
  const last = view.cumCurtailmentKwh[n - 1];
  if (last === null || last === undefined) return null;
  const hours = (n * intervalMinutes) / 60;
  return hours > 0 ? last / hours : null;
}

/** Contract revenue projection for a sustained curtailment level. Display
 * arithmetic over tariff terms; model outputs themselves are never
 * recomputed client-side. */
export function projectedRevenue(curtailedKw: number, tariff: Tariff) {
  const reservation =
    curtailedKw * tariff.reservation_rate * tariff.months;
  const energyKwh =
    curtailedKw * tariff.event_hours * tariff.events_per_month * tariff.months;
  const energy = energyKwh * tariff.energy_rate;
  return {
    reservationDollars: reservation,
    energyKwh,
    energyDollars: energy,
    totalDollars: reservation + energy,
  };
}
