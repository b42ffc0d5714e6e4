import type { MbcrtMeta, Strategy } from './types';

/** One invalid cell in the strategy grid. */
export interface CellError {
  step: number;
  control: string;
  value: number;
  lo: number;
  hi: number;
}

export interface GridState {
  name: string;
  intervalMinutes: number;
  controls: string[];
  ranges: Record<string, [number, number]>;
  /** rows[step][control] */
  rows: Record<string, number>[];
}

/** Build an editable grid seeded at the midpoint of every safe range. The
 * ranges come straight from the model metadata, so client validation can
 * never drift from what the server will accept. */
export function newGrid(
  name: string,
  meta: MbcrtMeta,
  steps: number,
): GridState {
  const rows: Record<string, number>[] = [];
  for (let t = 0; t < steps; t++) {
    const row: Record<string, number> = {};
    for (const c of meta.controls) {
      const range = meta.x_safe[c];
      if (!range) throw new Error(`no safe range for control ${c}`);
      row[c] = (range[0] + range[1]) / 2;
    }
    rows.push(row);
  }
  return {
    name,
    intervalMinutes: meta.interval_minutes,
    controls: [...meta.controls],
    ranges: { ...meta.x_safe },
    rows,
  };
}

export function gridFromStrategy(
  strategy: Strategy,
  meta: MbcrtMeta,
): GridState {
  return {
    name: strategy.name,
    intervalMinutes: strategy.interval_minutes,
    controls: [...meta.controls],
    ranges: { ...meta.x_safe },
    rows: strategy.steps.map((s) => ({ ...s })),
  };
}

export function setCell(
  grid: GridState,
  step: number,
  control: string,
  value: number,
): GridState {
  const rows = grid.rows.map((r, i) =>
    i === step ? { ...r, [control]: value } : r,
  );
  return { ...grid, rows };
}

/** All out-of-range or missing cells. An empty list means the strategy is
 * safe to send. */
export function validateGrid(grid: GridState): CellError[] {
  const errors: CellError[] = [];
  grid.rows.forEach((row, step) => {
    for (const control of grid.controls) {
      const range = grid.ranges[control];
      if (!range) continue;
      const value = row[control];
      const [lo, hi] = range;
      if (value === undefined || !Number.isFinite(value) || value < lo || value > hi) {
        errors.push({ step, control, value: value ?? NaN, lo, hi });
      }
    }
  });
  return errors;
}

/** Serialize for POSTing; throws if any cell is invalid (save is blocked
 * in the UI, this is the last line of defence). */
export function toStrategy(grid: GridState): Strategy {
  const errors = validateGrid(grid);
  if (errors.length > 0) {
    const first = errors[0]!;
    throw new Error(
      `cell (${first.step}, ${first.control}) = ${first.value} outside ` +
        `[${first.lo}, ${first.hi}]`,
    );
  }
  return {
    name: grid.name,
    interval_minutes: grid.intervalMinutes,
    steps: grid.rows.map((r) => ({ ...r })),
  };
}

/** Copy a strategy under a new name (duplicate-and-tweak workflow). */
export function duplicateGrid(grid: GridState, name: string): GridState {
  return { ...grid, name, rows: grid.rows.map((r) => ({ ...r })) };
}
