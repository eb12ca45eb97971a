"""Dense linear-program solver (two-phase primal simplex, bounded variables).

Maximizes c @ v subject to rows (a, rel, b) with rel in {<=, =, >=} and
per-variable bounds [lo, hi] (infinities allowed).  Box bounds are handled
implicitly in the ratio test rather than as extra rows, which keeps the
tableau at n_rows rows; that matters because the precoding LPs have a few
rows but hundreds of box-bounded variables.  Free variables are split into
positive/negative parts; equality rows (and inequality rows whose slack
cannot absorb the initial residual) receive phase-1 artificial variables.

Pivoting: Dantzig pricing, switching to Bland's rule after 5*(n_vars+n_rows)
iterations so termination is guaranteed; pivot tolerance 1e-9; feasibility
tolerance 1e-7; hard iteration cap 50*(n_vars+n_rows+10) after which the
solver reports NonConvergence rather than a possibly-wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError

LE = "<="
EQ = "="
GE = ">="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NONCONVERGENCE = "nonconvergence"

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

_NB_LO, _NB_HI, _BASIC = 0, 1, 2


@dataclass
class LinearProgram:
    """max objective @ v s.t. rows and bounds; rows are (coeffs, rel, rhs).

    start_hint (optional, per variable) only picks which finite bound each
    variable starts from (positive -> upper, negative -> lower); it never
    changes the optimum, just the pivot count for a well-chosen corner.
    """

    n_vars: int
    objective: np.ndarray
    rows: list
    bounds: np.ndarray  # (n_vars, 2) [lo, hi], +-inf allowed
    start_hint: np.ndarray | None = None

    def validate(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise ConfigError(f"objective length {self.objective.shape} != n_vars {self.n_vars}")
        if not np.all(np.isfinite(self.objective)):
            raise ConfigError("objective coefficients must be finite")
        if self.bounds.shape != (self.n_vars, 2):
            raise ConfigError(f"bounds must be ({self.n_vars}, 2), got {self.bounds.shape}")
        if np.any(self.bounds[:, 0] > self.bounds[:, 1]):
            raise ConfigError("variable bounds require lo <= hi")
        for a, rel, _b in self.rows:
            if np.asarray(a).shape != (self.n_vars,):
                raise ConfigError("row coefficient length mismatch")
            if rel not in (LE, EQ, GE):
                raise ConfigError(f"unknown relation {rel!r}")


@dataclass
class LpSolution:
    status: str
    v: np.ndarray
    objective_value: float
    iterations: int
    n_rows: int = 0
    n_cols: int = 0


@dataclass
class _State:
    count: int = 0
    bland_after: int = 0
    max_iter: int = 0
    refresh_every: int = field(default=256)


def _pricing_loop(T, xB, basis, stat, lo, hi, cvec, st: _State):
    """Run simplex pivots until optimal/unbounded/iteration cap."""
    m, ncols = T.shape
    d = cvec - cvec[basis] @ T if m else cvec.copy()
    since_refresh = 0
    movable = lo < hi
    while True:
        if st.count >= st.max_iter:
            return "iter_cap"
        if since_refresh >= st.refresh_every:
            d = cvec - cvec[basis] @ T if m else cvec.copy()
            since_refresh = 0
        bland = st.count >= st.bland_after
        up = (stat == _NB_LO) & movable & (d > PIVOT_TOL)
        down = (stat == _NB_HI) & movable & (d < -PIVOT_TOL)
        elig = up | down
        if not elig.any():
            return "optimal"
        if bland:
            q = int(np.nonzero(elig)[0][0])
        else:
            score = np.where(up, d, np.where(down, -d, -np.inf))
            q = int(np.argmax(score))
        sigma = 1.0 if stat[q] == _NB_LO else -1.0
        e = sigma * T[:, q]

        if m:
            lo_B = lo[basis]
            hi_B = hi[basis]
            pos = e > PIVOT_TOL
            neg = e < -PIVOT_TOL
            theta = np.full(m, np.inf)
            np.divide(xB - lo_B, e, out=theta, where=pos)
            theta_hi = np.full(m, np.inf)
            np.divide(xB - hi_B, e, out=theta_hi, where=neg)
            theta = np.maximum(np.minimum(theta, theta_hi), 0.0)
            tmin = float(theta.min())
        else:
            theta = None
            tmin = np.inf
        tflip = hi[q] - lo[q]
        if not np.isfinite(tmin) and not np.isfinite(tflip):
            return "unbounded"
        st.count += 1
        since_refresh += 1

        if tflip < tmin:
            if m:
                xB -= tflip * e
            stat[q] = _NB_HI if stat[q] == _NB_LO else _NB_LO
            continue

        cand = np.nonzero(theta <= tmin + 1e-12)[0]
        if bland:
            r = -1
            for i in cand[np.argsort(basis[cand], kind="stable")]:
                if abs(e[i]) > PIVOT_TOL:
                    r = int(i)
                    break
            if r < 0:
                r = int(cand[int(np.argmax(np.abs(e[cand])))])
        else:
            r = int(cand[int(np.argmax(np.abs(e[cand])))])

        leave = basis[r]
        stat[leave] = _NB_LO if e[r] > 0 else _NB_HI
        xB -= tmin * e
        entering_val = (lo[q] if sigma > 0 else hi[q]) + sigma * tmin

        piv = T[r, q]
        row = T[r] / piv
        col = T[:, q].copy()
        T -= np.outer(col, row)
        T[r] = row
        T[:, q] = 0.0
        T[r, q] = 1.0
        d = d - d[q] * row
        xB[r] = entering_val
        basis[r] = q
        stat[q] = _BASIC


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve a LinearProgram; status is optimal/infeasible/unbounded/nonconvergence."""
    lp.validate()
    n = lp.n_vars
    m = len(lp.rows)

    # --- internal columns: all structural vars, negated halves of free vars,
    # then slacks, then artificials
    A_rows = np.array([np.asarray(a, dtype=float) for a, _r, _b in lp.rows]).reshape(m, n)
    rels = [r for _a, r, _b in lp.rows]
    b = np.array([float(bb) for _a, _r, bb in lp.rows])

    free = np.isneginf(lp.bounds[:, 0]) & np.isposinf(lp.bounds[:, 1])
    free_idx = np.nonzero(free)[0]
    n_free = len(free_idx)
    col_expr = []
    for j in range(n):
        if free[j]:
            col_expr.append((j, n + int(np.searchsorted(free_idx, j))))
        else:
            col_expr.append((j,))

    n_slack = sum(1 for r in rels if r != EQ)
    blocks_a = [A_rows, -A_rows[:, free_idx]]
    slack_col = {}
    if n_slack:
        S = np.zeros((m, n_slack))
        si = 0
        for i in range(m):
            if rels[i] == EQ:
                continue
            S[i, si] = 1.0 if rels[i] == LE else -1.0
            slack_col[i] = n + n_free + si
            si += 1
        blocks_a.append(S)
    A_all = np.concatenate(blocks_a, axis=1) if m else np.zeros((0, n + n_free + n_slack))

    lo = np.concatenate([np.where(free, 0.0, lp.bounds[:, 0]),
                         np.zeros(n_free), np.zeros(n_slack)])
    hi = np.concatenate([np.where(free, np.inf, lp.bounds[:, 1]),
                         np.full(n_free, np.inf), np.full(n_slack, np.inf)])
    cvec = np.concatenate([lp.objective, -lp.objective[free_idx], np.zeros(n_slack)])

    # initial nonbasic values at a finite bound
    stat = np.where(np.isfinite(lo), _NB_LO, _NB_HI).astype(np.int8)
    if lp.start_hint is not None:
        hint = np.asarray(lp.start_hint, dtype=float)
        for j in range(n):
            expr = col_expr[j]
            if len(expr) != 1:
                continue
            col = expr[0]
            if hint[j] > 0 and np.isfinite(hi[col]):
                stat[col] = _NB_HI
            elif hint[j] < 0 and np.isfinite(lo[col]):
                stat[col] = _NB_LO
    w0 = np.where(stat == _NB_LO, lo, hi)

    resid = b - A_all @ w0 if m else np.zeros(0)

    n_real = A_all.shape[1]
    basis = np.zeros(m, dtype=np.int64)
    diag = np.ones(m)
    xB = np.zeros(m)
    art_cols = []
    extra_a, extra_lo, extra_hi, extra_c = [], [], [], []
    for i in range(m):
        r_i = resid[i]
        if rels[i] == LE and r_i >= 0:
            basis[i] = slack_col[i]
            diag[i] = 1.0
            xB[i] = r_i
        elif rels[i] == GE and r_i <= 0:
            basis[i] = slack_col[i]
            diag[i] = -1.0
            xB[i] = -r_i
        else:
            sgn = 1.0 if r_i >= 0 else -1.0
            col = np.zeros(m)
            col[i] = sgn
            extra_a.append(col)
            extra_lo.append(0.0)
            extra_hi.append(np.inf)
            extra_c.append(0.0)
            basis[i] = n_real + len(extra_a) - 1
            diag[i] = sgn
            xB[i] = abs(r_i)
            art_cols.append(basis[i])

    if extra_a:
        A_all = np.concatenate([A_all, np.array(extra_a).T.reshape(m, len(extra_a))], axis=1)
        lo = np.concatenate([lo, extra_lo])
        hi = np.concatenate([hi, extra_hi])
        cvec = np.concatenate([cvec, extra_c])
        stat = np.concatenate([stat, np.full(len(extra_a), _NB_LO, dtype=np.int8)])
    ncols = A_all.shape[1]
    stat[basis] = _BASIC

    T = (A_all / diag[:, None]).copy() if m else np.zeros((0, ncols))

    st = _State(bland_after=5 * (n + m), max_iter=50 * (n + m + 10))
    art_mask = np.zeros(ncols, dtype=bool)
    art_mask[art_cols] = True

    def extract() -> np.ndarray:
        v_all = np.where(stat == _NB_HI, hi, lo)
        v_all[~np.isfinite(v_all)] = 0.0
        if m:
            v_all[basis] = xB
            # refine basic values against the original columns to remove pivot drift
            v_nb = v_all.copy()
            v_nb[basis] = 0.0
            rhs = b - A_all @ v_nb
            try:
                ref = np.linalg.solve(A_all[:, basis], rhs)
                if np.all(np.isfinite(ref)):
                    v_all[basis] = ref
            except np.linalg.LinAlgError:
                pass
        v = np.empty(n)
        for j, expr in enumerate(col_expr):
            v[j] = v_all[expr[0]] if len(expr) == 1 else v_all[expr[0]] - v_all[expr[1]]
        return v

    def result(status: str) -> LpSolution:
        v = extract()
        return LpSolution(status, v, float(lp.objective @ v), st.count, m, ncols)

    # --- phase 1
    if art_mask.any() and xB[art_mask[basis]].sum() > FEAS_TOL:
        c1 = np.zeros(ncols)
        c1[art_mask] = -1.0
        out = _pricing_loop(T, xB, basis, stat, lo, hi, c1, st)
        if out == "iter_cap":
            return result(NONCONVERGENCE)
        if out == "unbounded":  # cannot happen for a bounded phase-1 objective
            return result(NONCONVERGENCE)
        # artificials can only sit basic or at their lower bound 0
        infeas = xB[art_mask[basis]].sum()
        if infeas > FEAS_TOL:
            return result(INFEASIBLE)
    # pin artificials at zero for phase 2
    if art_mask.any():
        lo[art_mask] = 0.0
        hi[art_mask] = 0.0
        basic_art = art_mask[basis]
        xB[basic_art] = 0.0

    out = _pricing_loop(T, xB, basis, stat, lo, hi, cvec, st)
    if out == "iter_cap":
        return result(NONCONVERGENCE)
    if out == "unbounded":
        return result(UNBOUNDED)
    return result(OPTIMAL)


def feasibility_violation(lp: LinearProgram, v: np.ndarray) -> float:
    """Max violation of rows and bounds at v (diagnostic, used by the tests)."""
    worst = 0.0
    for a, rel, bb in lp.rows:
        r = float(np.dot(a, v))
        if rel == LE:
            worst = max(worst, r - bb)
        elif rel == GE:
            worst = max(worst, bb - r)
        else:
            worst = max(worst, abs(r - bb))
    lo, hi = lp.bounds[:, 0], lp.bounds[:, 1]
    worst = max(worst, float(np.max(np.maximum(lo - v, 0.0), initial=0.0)))
    worst = max(worst, float(np.max(np.maximum(v - hi, 0.0), initial=0.0)))
    return worst
