"""Model based control with regression trees: trees grown on disturbance
features only, linear leaf models over the control variables, and a per-step
linear program that picks the optimal set-points."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cart import FitConfig, LeafModel, RegressionTreeModel, find_leaf, fit_tree, iter_internal
from .dataset import TimeStampedDataset
from .errors import DegenerateControl, InfeasibleComfort, InvalidArgument, SchemaMismatch
from .events import DrEvent
from .lp import LinearProgram, LpSolution, solve_lp


@dataclass(frozen=True)
class VariablePartition:
    controls: tuple[str, ...]
    disturbances: tuple[str, ...]

    def __post_init__(self):
        overlap = set(self.controls) & set(self.disturbances)
        if overlap:
            raise InvalidArgument(f"features in both partitions: {sorted(overlap)}")
        if not self.controls:
            raise InvalidArgument("at least one control variable required")

    @property
    def all_features(self) -> tuple[str, ...]:
        return self.disturbances + self.controls


@dataclass(frozen=True)
class ControlLeafModel:
    intercept: float
    coefficients: np.ndarray  # aligned with the partition's control order
    region_id: int
    n_samples: int
    rmse: float

    def predict(self, u: np.ndarray) -> float:
        return float(self.intercept + self.coefficients @ u)


@dataclass
class DisturbanceTree:
    """One tree split on disturbances with a control-variable linear model
    at every leaf."""

    tree: RegressionTreeModel
    leaves: dict[int, ControlLeafModel]
    response: str


@dataclass
class MbcrtModel:
    power: DisturbanceTree
    zones: list[DisturbanceTree]
    partition: VariablePartition
    x_safe: dict[str, tuple[float, float]]
    interval_minutes: int
    delta: int = 0  # lag order of the power-lag disturbance features

    @property
    def q(self) -> int:
        return len(self.zones)


@dataclass(frozen=True)
class SynthesisConfig:
    penalty: float = 50.0  # kW per degC of summed zone deviation
    t_ref: tuple[float, ...] = ()
    comfort_bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.penalty < 0:
            raise InvalidArgument("penalty must be nonnegative")
        if self.comfort_bounds is not None:
            for (lo, hi), ref in zip(self.comfort_bounds, self.t_ref):
                if not lo <= ref <= hi:
                    raise InvalidArgument("need T_lo <= T_ref <= T_hi per zone")


@dataclass
class SynthesisStep:
    controls: dict[str, float]
    kw_hat: float
    t_hat: list[float]
    region_ids: list[int]
    objective: float
    status: str


def control_splits(model: MbcrtModel) -> int:
    """Count of tree nodes testing a control feature; zero by construction."""
    names = set(model.partition.controls)
    count = 0
    for dt in [model.power] + model.zones:
        for node in iter_internal(dt.tree):
            if dt.tree.feature_names[node.rule.feature] in names:
                count += 1
    return count


def _control_ols(U_active, y):
    """Least squares with intercept; trace-scaled ridge fallback when the
    control design is rank-deficient. Returns (intercept, coefs, residuals)."""
    design = np.column_stack([np.ones(len(y)), U_active])
    gram = design.T @ design
    if np.linalg.matrix_rank(gram) < gram.shape[0]:
        gram = gram + 1e-8 * (np.trace(gram) / gram.shape[0]) * np.eye(gram.shape[0])
    beta = np.linalg.solve(gram, design.T @ y)
    resid = y - design @ beta
    return float(beta[0]), beta[1:], resid


def default_mbcrt_min_leaf(n_controls: int) -> int:
    return max(15, 5 * (n_controls + 1))


def _grow_disturbance_tree(X_all, y, d_cols, active_u_cols, categorical, config):
    """M5-style growth: each node carries a control-variable regression;
    split search runs on the node's regression residuals and only over
    disturbance features, so control-driven variance never drives a split."""
    from .cart import TreeNode, _best_split_on_feature, _sse_of

    scale = max(1.0, float(np.sum(y * y)))

    def node_fit(rows):
        target = y[rows]
        if len(active_u_cols) == 0:
            mean = float(target.mean())
            return mean, np.zeros(0), target - mean
        return _control_ols(X_all[np.ix_(rows, active_u_cols)], target)

    root_rows = np.arange(len(y))
    _, _, root_resid = node_fit(root_rows)
    root_resid_sse = float(np.sum(root_resid**2))

    def grow(rows, depth):
        target = y[rows]
        node = TreeNode(len(rows), float(target.mean()), _sse_of(target))
        intercept, coefs, resid = node_fit(rows)
        node.model = (intercept, coefs, float(np.sqrt(np.mean(resid**2))))
        resid_sse = float(np.sum(resid**2))
        if (len(rows) < 2 * config.min_leaf or depth >= config.max_depth
                or resid_sse <= 1e-18 * scale):
            return node
        best = None
        for j in d_cols:
            found = _best_split_on_feature(X_all[rows, j], resid, config.min_leaf,
                                           categorical.get(j))
            if found is None:
                continue
            sse, thr, left_codes = found
            if best is None or sse < best[0] * (1 - 1e-12) - 1e-12:
                best = (sse, j, thr, left_codes)
        if best is None:
            return node
        sse, j, thr, left_codes = best
        if resid_sse - sse < config.min_split_improvement * max(root_resid_sse, 1e-300):
            return node
        from .cart import SplitRule

        if left_codes is None:
            node.rule = SplitRule(feature=j, kind="threshold", threshold=float(thr))
            mask = X_all[rows, j] <= thr
        else:
            node.rule = SplitRule(feature=j, kind="category_subset", left_codes=left_codes)
            mask = np.isin(X_all[rows, j], list(left_codes))
        node.left = grow(rows[mask], depth + 1)
        node.right = grow(rows[~mask], depth + 1)
        return node

    return grow(root_rows, 0)


def fit_mbcrt(ds: TimeStampedDataset, partition: VariablePartition,
              power_response: str, zone_responses: list[str],
              x_safe: dict[str, tuple[float, float]],
              config: FitConfig | None = None, delta: int = 0) -> MbcrtModel:
    """Grow the power tree and q zone-temperature trees on disturbances only,
    then fit per-leaf linear models over the controls."""
    for name in partition.all_features:
        ds.column(name)  # raises SchemaMismatch if absent
    missing = [c for c in partition.controls if c not in x_safe]
    if missing:
        raise InvalidArgument(f"x_safe missing controls: {missing}")
    if config is None:
        config = FitConfig(min_leaf=default_mbcrt_min_leaf(len(partition.controls)))
    config = FitConfig(
        min_leaf=max(config.min_leaf, len(partition.controls) + 1),
        max_depth=config.max_depth,
        min_split_improvement=config.min_split_improvement,
        feature_whitelist=tuple(partition.disturbances),
    )

    names = list(partition.all_features)
    X_all = ds.matrix(names)
    control_cols = [names.index(c) for c in partition.controls]
    control_names = list(partition.controls)
    cat_codes = {
        j: ds.column(nm).codes
        for j, nm in enumerate(names)
        if ds.column(nm).kind == "categorical"
    }
    d_cols = sorted(names.index(d) for d in partition.disturbances)

    U = X_all[:, control_cols]
    degenerate = [j for j in range(U.shape[1]) if np.ptp(U[:, j]) == 0.0]
    for j in degenerate:
        warnings.warn(
            f"control {control_names[j]!r} is constant over the training data; "
            "its leaf coefficients are pinned to zero",
            DegenerateControl,
        )
    active = [j for j in range(U.shape[1]) if j not in degenerate]
    active_u_cols = [control_cols[j] for j in active]

    def build(response: str) -> DisturbanceTree:
        from .cart import iter_leaves

        y = ds.column(response).values
        root = _grow_disturbance_tree(X_all, y, d_cols, active_u_cols, cat_codes, config)
        tree = RegressionTreeModel(root=root, feature_names=names,
                                   categorical_codes=cat_codes)
        # convert growth-time fits into region-indexed control leaf models
        counter = 0
        leaves: dict[int, ControlLeafModel] = {}

        def visit(node):
            nonlocal counter
            if node.is_leaf:
                intercept, coefs_active, rmse = node.model
                coefs = np.zeros(U.shape[1])
                for k, j in enumerate(active):
                    coefs[j] = float(coefs_active[k])
                node.region_id = counter
                leaves[counter] = ControlLeafModel(
                    intercept=intercept, coefficients=coefs, region_id=counter,
                    n_samples=node.n_samples, rmse=rmse)
                node.model = LeafModel(
                    "linear", intercept,
                    {control_names[j]: float(coefs[j]) for j in range(len(coefs))})
                counter += 1
            else:
                node.model = None
                visit(node.left)
                visit(node.right)

        visit(root)
        return DisturbanceTree(tree=tree, leaves=leaves, response=response)

    return MbcrtModel(
        power=build(power_response),
        zones=[build(z) for z in zone_responses],
        partition=partition,
        x_safe=dict(x_safe),
        interval_minutes=ds.interval_minutes,
        delta=delta,
    )


def locate_leaf(dt: DisturbanceTree, x_d: dict[str, float]) -> ControlLeafModel:
    """Route a disturbance forecast to its region's control model."""
    node = find_leaf(dt.tree, x_d)
    return dt.leaves[node.region_id]


def assemble_lp(power_leaf: ControlLeafModel, zone_leaves: list[ControlLeafModel],
                config: SynthesisConfig, x_safe: dict[str, tuple[float, float]],
                control_names: list[str]) -> LinearProgram:
    """Per-step LP: minimize predicted power plus a penalty on summed
    absolute zone-temperature deviation from the reference, subject to the
    safe set-point box and optional hard comfort rows.

    Variables are the controls u plus one auxiliary s_k >= |T_hat_k - T_ref_k|
    per zone."""
    nc = len(control_names)
    q = len(zone_leaves)
    t_ref = list(config.t_ref)
    if q and len(t_ref) != q:
        raise InvalidArgument(f"t_ref needs {q} entries, got {len(t_ref)}")

    c = np.concatenate([power_leaf.coefficients, np.full(q, config.penalty)])
    lo = np.array([x_safe[nm][0] for nm in control_names] + [0.0] * q)
    hi = np.array([x_safe[nm][1] for nm in control_names] + [np.inf] * q)

    rows, rhs = [], []
    for k, zl in enumerate(zone_leaves):
        # s_k >= +(T_hat_k - T_ref_k)  and  s_k >= -(T_hat_k - T_ref_k)
        up = np.zeros(nc + q)
        up[:nc] = zl.coefficients
        up[nc + k] = -1.0
        rows.append(up)
        rhs.append(t_ref[k] - zl.intercept)
        dn = np.zeros(nc + q)
        dn[:nc] = -zl.coefficients
        dn[nc + k] = -1.0
        rows.append(dn)
        rhs.append(zl.intercept - t_ref[k])
        if config.comfort_bounds is not None:
            t_lo, t_hi = config.comfort_bounds[k]
            hard_up = np.zeros(nc + q)
            hard_up[:nc] = zl.coefficients
            rows.append(hard_up)
            rhs.append(t_hi - zl.intercept)
            hard_dn = np.zeros(nc + q)
            hard_dn[:nc] = -zl.coefficients
            rows.append(hard_dn)
            rhs.append(zl.intercept - t_lo)

    return LinearProgram(
        c=c,
        lo=lo,
        hi=hi,
        A=np.array(rows) if rows else np.zeros((0, nc + q)),
        b=np.array(rhs),
        c0=power_leaf.intercept,
        names=list(control_names) + [f"s{k}" for k in range(q)],
    )


def _step_from_solution(sol: LpSolution, power_leaf, zone_leaves, control_names,
                        region_ids, status) -> SynthesisStep:
    nc = len(control_names)
    u = sol.values[:nc]
    return SynthesisStep(
        controls={nm: float(u[j]) for j, nm in enumerate(control_names)},
        kw_hat=power_leaf.predict(u),
        t_hat=[zl.predict(u) for zl in zone_leaves],
        region_ids=region_ids,
        objective=float(sol.objective),
        status=status,
    )


def synthesize_step(model: MbcrtModel, x_d: dict[str, float],
                    config: SynthesisConfig) -> SynthesisStep:
    """One run-time step: locate the active leaf of every tree, assemble the
    LP, solve it, and report the optimal set-points and predictions.

    Raises InfeasibleComfort (with the soft-penalty relaxation attached as a
    fallback) when hard comfort bounds cannot be met in the active region."""
    control_names = list(model.partition.controls)
    power_leaf = locate_leaf(model.power, x_d)
    zone_leaves = [locate_leaf(z, x_d) for z in model.zones]
    region_ids = [power_leaf.region_id] + [zl.region_id for zl in zone_leaves]

    lp = assemble_lp(power_leaf, zone_leaves, config, model.x_safe, control_names)
    sol = solve_lp(lp)
    if sol.status == "optimal":
        return _step_from_solution(sol, power_leaf, zone_leaves, control_names,
                                   region_ids, "optimal")
    # hard comfort rows made the region infeasible: re-solve soft-only
    relaxed_cfg = SynthesisConfig(penalty=config.penalty, t_ref=config.t_ref,
                                  comfort_bounds=None)
    relaxed = solve_lp(assemble_lp(power_leaf, zone_leaves, relaxed_cfg,
                                   model.x_safe, control_names))
    if relaxed.status != "optimal":
        raise InvalidArgument(f"synthesis LP unsolvable: {sol.status}")
    fallback = _step_from_solution(relaxed, power_leaf, zone_leaves, control_names,
                                   region_ids, "infeasible_comfort")
    raise InfeasibleComfort("hard comfort bounds infeasible in active region",
                            fallback=fallback)


def run_dr_event(model: MbcrtModel, disturbance_forecast: list[dict[str, float]],
                 initial_lags: list[float], config: SynthesisConfig,
                 event: DrEvent | int, plant=None,
                 baseline: list[float] | None = None) -> list[dict]:
    """Loop synthesize_step over an event.

    `disturbance_forecast` has one row per step with every non-lag
    disturbance feature. Lagged power features (lag_1..lag_delta) are
    refreshed each step from the plant callback when given (closed loop) or
    from the model's own prediction (open loop). `plant(controls) ->
    (power_kw, zone_temps)` advances the real building one step."""
    n_steps = event if isinstance(event, int) else event.n_steps
    if len(disturbance_forecast) < n_steps:
        from .errors import InsufficientHistory

        raise InsufficientHistory(
            f"forecast covers {len(disturbance_forecast)} steps, event needs {n_steps}"
        )
    if model.delta and len(initial_lags) < model.delta:
        from .errors import InsufficientHistory

        raise InsufficientHistory(f"need {model.delta} initial lags")
    if baseline is not None and len(baseline) < n_steps:
        raise InvalidArgument("baseline trajectory shorter than event")

    lags = list(initial_lags[: model.delta]) if model.delta else []
    dt_hours = model.interval_minutes / 60.0
    trace = []
    cum_kwh = 0.0
    for t in range(n_steps):
        x_d = dict(disturbance_forecast[t])
        for j in range(model.delta):
            x_d[f"lag_{j + 1}"] = lags[j]
        try:
            step = synthesize_step(model, x_d, config)
        except InfeasibleComfort as exc:
            step = exc.fallback
        entry = {
            "t": t,
            "controls": step.controls,
            "kw_hat": step.kw_hat,
            "t_hat": step.t_hat,
            "region_ids": step.region_ids,
            "objective": step.objective,
            "status": step.status,
        }
        measured_kw = step.kw_hat
        if plant is not None:
            plant_kw, plant_temps = plant(step.controls)
            entry["kw_plant"] = float(plant_kw)
            entry["t_plant"] = [float(v) for v in plant_temps]
            measured_kw = float(plant_kw)
        if baseline is not None:
            curtailed = float(baseline[t]) - measured_kw
            cum_kwh += curtailed * dt_hours
            entry["baseline_kw"] = float(baseline[t])
            entry["cum_curtailment_kwh"] = cum_kwh
        if model.delta:
            lags = [measured_kw] + lags[:-1]
        trace.append(entry)
    return trace
