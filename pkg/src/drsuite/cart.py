"""Single binary regression trees: greedy CART growth, cost-complexity
pruning with time-blocked cross-validation, prediction and JSON round trip."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyData, InvalidArgument, SchemaMismatch

# Relative tolerance used when comparing candidate-split SSEs, so that
# float-noise near-ties resolve by the deterministic tie rule (lowest
# feature index, then lowest threshold) instead of by rounding luck.
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SplitRule:
    feature: int
    kind: str  # "threshold" | "category_subset"
    threshold: float = 0.0
    left_codes: frozenset = frozenset()


@dataclass(frozen=True)
class LeafModel:
    kind: str  # "constant" | "linear"
    intercept: float
    coefficients: dict[str, float] = field(default_factory=dict)

    def evaluate(self, x: dict[str, float]) -> float:
        out = self.intercept
        for name, beta in self.coefficients.items():
            if name not in x:
                raise SchemaMismatch(f"leaf model needs feature {name!r}")
            out += beta * x[name]
        return out


class TreeNode:
    """Internal node (rule, left, right) or leaf (model). Every node keeps
    its training sample count, mean and SSE so pruning can collapse it."""

    __slots__ = ("rule", "left", "right", "model", "n_samples", "mean", "sse", "region_id")

    def __init__(self, n_samples, mean, sse, rule=None, left=None, right=None,
                 model=None, region_id=-1):
        self.rule = rule
        self.left = left
        self.right = right
        self.model = model
        self.n_samples = n_samples
        self.mean = mean
        self.sse = sse
        self.region_id = region_id

    @property
    def is_leaf(self):
        return self.rule is None


@dataclass
class RegressionTreeModel:
    root: TreeNode
    feature_names: list[str]
    categorical_codes: dict[int, tuple[int, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class FitConfig:
    min_leaf: int = 5
    max_depth: int = 30
    min_split_improvement: float = 1e-12  # relative to root SSE
    feature_whitelist: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.min_leaf < 1:
            raise InvalidArgument("min_leaf must be >= 1")
        if self.max_depth < 1:
            raise InvalidArgument("max_depth must be >= 1")


def _sse_of(y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    return float(np.sum((y - y.mean()) ** 2))


def _best_split_on_feature(xj, y, min_leaf, codes):
    """Best (sse, threshold_or_codes) for one feature, or None.

    Continuous: candidates are midpoints between consecutive distinct sorted
    values. Categorical: codes ordered by mean response, scanned as if
    continuous (exact for SSE).
    """
    n = len(y)
    if codes is None:
        order = np.argsort(xj, kind="stable")
        xs, ys = xj[order], y[order]
        best = None
        csum = np.cumsum(ys)
        csq = np.cumsum(ys**2)
        total_sum, total_sq = csum[-1], csq[-1]
        for i in range(min_leaf - 1, n - min_leaf):
            if xs[i] == xs[i + 1]:
                continue
            nl = i + 1
            nr = n - nl
            sl = csum[i]
            sse = (csq[i] - sl * sl / nl) + ((total_sq - csq[i]) - (total_sum - sl) ** 2 / nr)
            sse = max(sse, 0.0)
            thr = (xs[i] + xs[i + 1]) / 2.0
            if best is None or sse < best[0] * (1 - _TIE_RTOL) - _TIE_RTOL:
                best = (sse, thr, None)
        return best

    # categorical: order codes present at this node by mean response
    present = []
    for c in codes:
        mask = xj == c
        cnt = int(mask.sum())
        if cnt:
            present.append((float(y[mask].mean()), c, mask, cnt))
    if len(present) < 2:
        return None
    present.sort()
    best = None
    for k in range(1, len(present)):
        left_mask = np.zeros(n, dtype=bool)
        for _, _, mask, _ in present[:k]:
            left_mask |= mask
        nl = int(left_mask.sum())
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        sse = _sse_of(y[left_mask]) + _sse_of(y[~left_mask])
        left_codes = frozenset(int(c) for _, c, _, _ in present[:k])
        if best is None or sse < best[0] * (1 - _TIE_RTOL) - _TIE_RTOL:
            best = (sse, float(k), left_codes)
    return best


def _grow(X, y, config, depth, root_sse, categorical, candidate_features, rng, mtry):
    n = len(y)
    node_sse = _sse_of(y)
    node = TreeNode(n_samples=n, mean=float(y.mean()), sse=node_sse)
    if n < 2 * config.min_leaf or depth >= config.max_depth or node_sse == 0.0:
        return node

    if mtry is not None and mtry < len(candidate_features):
        feats = sorted(rng.choice(candidate_features, size=mtry, replace=False).tolist())
    else:
        feats = candidate_features

    best = None  # (sse, feature, threshold, left_codes)
    for j in feats:
        found = _best_split_on_feature(X[:, j], y, config.min_leaf, categorical.get(j))
        if found is None:
            continue
        sse, thr, left_codes = found
        if best is None or sse < best[0] * (1 - _TIE_RTOL) - _TIE_RTOL:
            best = (sse, j, thr, left_codes)

    if best is None:
        return node
    sse, j, thr, left_codes = best
    improvement = node_sse - sse
    if improvement < config.min_split_improvement * max(root_sse, 1e-300):
        return node

    if left_codes is None:
        rule = SplitRule(feature=j, kind="threshold", threshold=float(thr))
        mask = X[:, j] <= thr
    else:
        rule = SplitRule(feature=j, kind="category_subset", left_codes=left_codes)
        mask = np.isin(X[:, j], list(left_codes))
    node.rule = rule
    node.left = _grow(X[mask], y[mask], config, depth + 1, root_sse, categorical,
                      candidate_features, rng, mtry)
    node.right = _grow(X[~mask], y[~mask], config, depth + 1, root_sse, categorical,
                       candidate_features, rng, mtry)
    return node


def _assign_regions(model: RegressionTreeModel):
    counter = 0

    def visit(node):
        nonlocal counter
        if node.is_leaf:
            node.region_id = counter
            if node.model is None:
                node.model = LeafModel("constant", node.mean)
            counter += 1
        else:
            visit(node.left)
            visit(node.right)

    visit(model.root)


def fit_tree(X, y, config: FitConfig = FitConfig(), feature_names=None,
             categorical_codes=None, rng=None, mtry=None) -> RegressionTreeModel:
    """Grow a regression tree by greedy SSE minimization.

    `categorical_codes` maps feature index -> declared code set. `mtry` with
    an `rng` restricts each node's split search to a random feature subset
    (used by forests)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise InvalidArgument("X must be 2-D")
    if len(y) == 0 or X.shape[0] == 0:
        raise EmptyData("no training rows")
    if X.shape[0] != len(y):
        raise InvalidArgument("X rows and y length differ")
    if X.shape[0] < 2 * config.min_leaf:
        # not enough rows for any split; a single-leaf tree is still valid
        pass
    m = X.shape[1]
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(m)]
    if len(feature_names) != m:
        raise InvalidArgument("feature_names length mismatch")
    categorical = dict(categorical_codes or {})
    if config.feature_whitelist is not None:
        index = {name: j for j, name in enumerate(feature_names)}
        missing = [n for n in config.feature_whitelist if n not in index]
        if missing:
            raise SchemaMismatch(f"whitelist features not in schema: {missing}")
        candidates = sorted(index[n] for n in config.feature_whitelist)
    else:
        candidates = list(range(m))
    root_sse = _sse_of(y)
    root = _grow(X, y, config, 0, root_sse, categorical, candidates, rng, mtry)
    model = RegressionTreeModel(root=root, feature_names=list(feature_names),
                                categorical_codes=categorical)
    _assign_regions(model)
    return model


def _route(model: RegressionTreeModel, x) -> TreeNode:
    if isinstance(x, dict):
        def get(j):
            name = model.feature_names[j]
            if name not in x:
                raise SchemaMismatch(f"missing feature {name!r}")
            return x[name]
    else:
        vec = np.asarray(x, dtype=float)

        def get(j):
            return vec[j]

    node = model.root
    while not node.is_leaf:
        r = node.rule
        v = get(r.feature)
        if r.kind == "threshold":
            node = node.left if v <= r.threshold else node.right
        else:
            node = node.left if int(v) in r.left_codes else node.right
    return node


def find_leaf(model: RegressionTreeModel, x) -> TreeNode:
    """Deterministically route a feature vector to its leaf node."""
    return _route(model, x)


def predict_tree(model: RegressionTreeModel, x) -> float:
    node = _route(model, x)
    leaf = node.model
    if leaf.kind == "constant":
        return leaf.intercept
    if isinstance(x, dict):
        return leaf.evaluate(x)
    vec = np.asarray(x, dtype=float)
    named = {name: float(vec[j]) for j, name in enumerate(model.feature_names)}
    return leaf.evaluate(named)


def predict_tree_batch(model: RegressionTreeModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.array([predict_tree(model, X[i]) for i in range(X.shape[0])])


def leaf_count(model: RegressionTreeModel) -> int:
    def count(node):
        return 1 if node.is_leaf else count(node.left) + count(node.right)

    return count(model.root)


def depth(model: RegressionTreeModel) -> int:
    def d(node):
        return 1 if node.is_leaf else 1 + max(d(node.left), d(node.right))

    return d(model.root)


def iter_leaves(model: RegressionTreeModel):
    stack = [model.root]
    out = []
    while stack:
        node = stack.pop()
        if node.is_leaf:
            out.append(node)
        else:
            stack.append(node.right)
            stack.append(node.left)
    return sorted(out, key=lambda n: n.region_id)


def iter_internal(model: RegressionTreeModel):
    stack = [model.root]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            yield node
            stack.append(node.right)
            stack.append(node.left)


# --- cost-complexity pruning -------------------------------------------------

def _subtree_stats(node):
    """(sum of leaf SSEs, leaf count) under node."""
    if node.is_leaf:
        return node.sse, 1
    ls, lc = _subtree_stats(node.left)
    rs, rc = _subtree_stats(node.right)
    return ls + rs, lc + rc


def _clone(node):
    c = TreeNode(node.n_samples, node.mean, node.sse, node.rule,
                 None, None, node.model, node.region_id)
    if not node.is_leaf:
        c.left = _clone(node.left)
        c.right = _clone(node.right)
    return c


def _weakest_link_alphas(root) -> list[float]:
    """Critical alpha values of the nested subtree sequence."""
    work = _clone(root)
    alphas = []
    while not work.is_leaf:
        best = None

        def visit(node):
            nonlocal best
            if node.is_leaf:
                return
            sub_sse, leaves = _subtree_stats(node)
            g = (node.sse - sub_sse) / (leaves - 1)
            if best is None or g < best[0]:
                best = (g, node)
            visit(node.left)
            visit(node.right)

        visit(work)
        alphas.append(max(best[0], 0.0))
        _collapse_at(work, alphas[-1])
    return alphas


def _collapse_at(root, alpha):
    """Collapse every internal node whose weakest-link value <= alpha."""
    changed = True
    while changed:
        changed = False

        def visit(node):
            nonlocal changed
            if node.is_leaf:
                return
            sub_sse, leaves = _subtree_stats(node)
            g = (node.sse - sub_sse) / (leaves - 1)
            if g <= alpha + 1e-15:
                node.rule = None
                node.left = None
                node.right = None
                node.model = LeafModel("constant", node.mean)
                changed = True
                return
            visit(node.left)
            visit(node.right)

        visit(root)


def prune_cv(model: RegressionTreeModel, X, y, k: int = 10,
             config: FitConfig = FitConfig()) -> RegressionTreeModel:
    """Cost-complexity pruning with k-fold CV over contiguous time blocks.

    Candidate alphas come from the full tree's weakest-link sequence
    (geometric means of consecutive critical values); the alpha minimizing
    mean validation SSE wins and the full tree is pruned at it."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    if k > n:
        raise InvalidArgument(f"k={k} folds with only {n} rows")

    crit = _weakest_link_alphas(model.root)
    if not crit:
        return model
    candidates = [0.0]
    for i in range(len(crit)):
        lo = crit[i]
        hi = crit[i + 1] if i + 1 < len(crit) else None
        if hi is not None and lo > 0 and hi > 0:
            candidates.append(float(np.sqrt(lo * hi)))
        else:
            candidates.append(lo if hi is None else (lo + (hi or lo)) / 2)
    candidates = sorted(set(candidates))

    bounds = [round(i * n / k) for i in range(k + 1)]
    cv_sse = np.zeros(len(candidates))
    for f in range(k):
        lo, hi = bounds[f], bounds[f + 1]
        mask = np.ones(n, dtype=bool)
        mask[lo:hi] = False
        if mask.sum() < 2 * config.min_leaf or hi - lo == 0:
            continue
        fold_tree = fit_tree(X[mask], y[mask], config, model.feature_names,
                             model.categorical_codes)
        for ci, alpha in enumerate(candidates):
            pruned_root = _clone(fold_tree.root)
            _collapse_at(pruned_root, alpha)
            pruned = RegressionTreeModel(pruned_root, model.feature_names,
                                         model.categorical_codes)
            preds = predict_tree_batch(pruned, X[lo:hi])
            cv_sse[ci] += float(np.sum((y[lo:hi] - preds) ** 2))

    best_alpha = candidates[int(np.argmin(cv_sse))]
    final_root = _clone(model.root)
    _collapse_at(final_root, best_alpha)
    final = RegressionTreeModel(final_root, list(model.feature_names),
                                dict(model.categorical_codes))
    _assign_regions(final)
    return final


# --- serialization -----------------------------------------------------------

def tree_to_dict(model: RegressionTreeModel) -> dict:
    nodes = []

    def visit(node):
        idx = len(nodes)
        rec = {"id": idx, "n_samples": node.n_samples, "mean": node.mean,
               "sse": node.sse}
        nodes.append(rec)
        if node.is_leaf:
            rec["region_id"] = node.region_id
            rec["leaf_model"] = {
                "kind": node.model.kind,
                "intercept": node.model.intercept,
                "coefficients": dict(node.model.coefficients),
            }
        else:
            r = node.rule
            rec["rule"] = {
                "feature": r.feature,
                "kind": r.kind,
                "threshold": r.threshold,
                "left_codes": sorted(r.left_codes),
            }
            rec["left"] = visit(node.left)
            rec["right"] = visit(node.right)
        return idx

    visit(model.root)
    return {
        "feature_names": list(model.feature_names),
        "categorical_codes": {str(k): list(v) for k, v in model.categorical_codes.items()},
        "nodes": nodes,
    }


def tree_from_dict(data: dict) -> RegressionTreeModel:
    nodes = data["nodes"]

    def build(idx):
        rec = nodes[idx]
        node = TreeNode(rec["n_samples"], rec["mean"], rec["sse"])
        if "rule" in rec:
            r = rec["rule"]
            node.rule = SplitRule(r["feature"], r["kind"], r["threshold"],
                                  frozenset(r["left_codes"]))
            node.left = build(rec["left"])
            node.right = build(rec["right"])
        else:
            node.region_id = rec["region_id"]
            lm = rec["leaf_model"]
            node.model = LeafModel(lm["kind"], lm["intercept"], dict(lm["coefficients"]))
        return node

    return RegressionTreeModel(
        root=build(0),
        feature_names=list(data["feature_names"]),
        categorical_codes={int(k): tuple(v) for k, v in data["categorical_codes"].items()},
    )
