"""Dense min-form linear programs over box-bounded variables, solved by a
two-phase tableau simplex with Bland's anti-cycling rule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9


@dataclass
class LinearProgram:
    """min c.v + c0  s.t.  A.v <= b,  lo <= v <= hi.

    Lower bounds must be finite (the standard-form shift needs them); upper
    bounds may be +inf for internal auxiliaries. All control variables a
    caller exposes should carry finite boxes."""

    c: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c0: float = 0.0
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        n = len(self.c)
        if self.A is None or np.size(self.A) == 0:
            self.A = np.zeros((0, n))
            self.b = np.zeros(0)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float)
        if len(self.lo) != n or len(self.hi) != n:
            raise InvalidArgument("bound vectors must match variable count")
        if self.A.shape[0] != len(self.b):
            raise InvalidArgument("A rows and b length differ")
        if not np.all(np.isfinite(self.lo)):
            raise InvalidArgument("all lower bounds must be finite")
        if np.any(self.lo > self.hi):
            raise InvalidArgument("empty box: lo > hi")
        if not self.names:
            self.names = [f"v{j}" for j in range(n)]

    def dump(self) -> str:
        """Plain-text rows for solver triage."""
        lines = ["min " + " + ".join(f"{cj:g}*{nm}" for cj, nm in zip(self.c, self.names))
                 + (f" + {self.c0:g}" if self.c0 else "")]
        for i in range(self.A.shape[0]):
            lines.append("  " + " + ".join(f"{self.A[i, j]:g}*{self.names[j]}"
                                           for j in range(len(self.c))) + f" <= {self.b[i]:g}")
        for j, nm in enumerate(self.names):
            lines.append(f"  {self.lo[j]:g} <= {nm} <= {self.hi[j]:g}")
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: np.ndarray | None = None
    objective: float | None = None
    violated_rows: list[int] = field(default_factory=list)


def _bland_simplex(tab, basis, cost, m, n_cols, rhs_col):
    """Minimize cost over the canonical tableau in place. Returns 'optimal'
    or 'unbounded'. Entering: lowest-index negative reduced cost; leaving:
    min ratio, ties by lowest basis variable index (Bland)."""
    while True:
        cb = cost[basis]
        # reduced costs r_j = c_j - cb . tab[:, j]
        r = cost[:n_cols] - cb @ tab[:, :n_cols]
        enter = -1
        for j in range(n_cols):
            if r[j] < -FEAS_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best_ratio = np.inf
        for i in range(m):
            a = tab[i, enter]
            if a > PIVOT_TOL:
                ratio = tab[i, rhs_col] / a
                if ratio < best_ratio - FEAS_TOL or (
                    abs(ratio - best_ratio) <= FEAS_TOL
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        piv = tab[leave, enter]
        tab[leave] /= piv
        for i in range(m):
            if i != leave and abs(tab[i, enter]) > 0.0:
                tab[i] -= tab[i, enter] * tab[leave]
        basis[leave] = enter


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Exact vertex optimum of a boxed LP, or infeasible/unbounded status."""
    n = len(lp.c)
    if n == 0:
        return LpSolution("optimal", np.zeros(0), lp.c0)

    # shift variables to w = v - lo >= 0; fold finite upper bounds into rows
    A_rows = [lp.A]
    b_rows = [lp.b - lp.A @ lp.lo]
    ub_rows = []
    ub_rhs = []
    for j in range(n):
        span = lp.hi[j] - lp.lo[j]
        if np.isfinite(span):
            row = np.zeros(n)
            row[j] = 1.0
            ub_rows.append(row)
            ub_rhs.append(span)
    if ub_rows:
        A_rows.append(np.array(ub_rows))
        b_rows.append(np.array(ub_rhs))
    A = np.vstack(A_rows)
    b = np.concatenate(b_rows)
    m = A.shape[0]
    n_user_rows = lp.A.shape[0]

    # equality form with slacks; flip negative-rhs rows and give them artificials
    scale = 1.0 + float(np.max(np.abs(b))) if m else 1.0
    neg = b < 0
    A_eq = A.copy()
    b_eq = b.copy()
    A_eq[neg] *= -1.0
    b_eq[neg] *= -1.0
    slack = np.eye(m)
    slack[neg] *= -1.0

    art_rows = np.flatnonzero(neg)
    n_art = len(art_rows)
    art = np.zeros((m, n_art))
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0

    n_cols = n + m + n_art
    tab = np.zeros((m, n_cols + 1))
    tab[:, :n] = A_eq
    tab[:, n : n + m] = slack
    tab[:, n + m : n_cols] = art
    tab[:, n_cols] = b_eq

    basis = np.zeros(m, dtype=int)
    for i in range(m):
        if neg[i]:
            basis[i] = n + m + int(np.flatnonzero(art_rows == i)[0])
        else:
            basis[i] = n + i

    if n_art:
        phase1_cost = np.zeros(n_cols + 1)
        phase1_cost[n + m : n_cols] = 1.0
        status = _bland_simplex(tab, basis, phase1_cost, m, n_cols, n_cols)
        infeas = float(tab[:, n_cols] @ (phase1_cost[basis]))
        if status != "optimal" or infeas > FEAS_TOL * scale:
            violated = [int(i) for i in art_rows if i < n_user_rows]
            return LpSolution("infeasible", violated_rows=violated or [0])
        # pivot lingering zero-valued artificials out of the basis
        for i in range(m):
            if basis[i] >= n + m:
                for j in range(n + m):
                    if abs(tab[i, j]) > PIVOT_TOL:
                        piv = tab[i, j]
                        tab[i] /= piv
                        for r_ in range(m):
                            if r_ != i and abs(tab[r_, j]) > 0.0:
                                tab[r_] -= tab[r_, j] * tab[i]
                        basis[i] = j
                        break

    # phase 2 over original columns only (artificials barred by +inf-like cost guard)
    cost = np.zeros(n_cols + 1)
    cost[:n] = lp.c
    if n_art:
        cost[n + m : n_cols] = 1e30
    status = _bland_simplex(tab, basis, cost, m, n + m, n_cols)
    if status == "unbounded":
        return LpSolution("unbounded")

    w = np.zeros(n_cols)
    for i in range(m):
        w[basis[i]] = tab[i, n_cols]
    v = w[:n] + lp.lo
    v = np.clip(v, lp.lo, lp.hi)
    objective = float(lp.c @ v + lp.c0)
    return LpSolution("optimal", values=v, objective=objective)
