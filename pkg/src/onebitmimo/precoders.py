"""Transmit-signal designers behind a common registry interface.

All 1-bit precoders return a transmit vector whose entries are g*(+-1 +- j)
with g = sqrt(pt / (2*N_T)), so every scheme radiates exactly pt per slot and
SNR comparisons are power-fair.  The CI family (lp, ss, pbb, exhaustive)
maximizes the safety margin of ci.py; the MSE family (zf/mmse quantization,
c2po, squid) minimizes a symbol-level squared error before quantization.

Registry names: zf-inf, zf-1bit, mmse-1bit, c2po, squid, lp, ss, pbb,
pbb-full, exhaustive.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, NumericalError, as_matrix, real_stack, real_stack_matrix
from . import ci
from .lp import (EQ, GE, INFEASIBLE, LE, NONCONVERGENCE, OPTIMAL, UNBOUNDED,
                 LinearProgram, LpSolution, solve_lp)
from .modem import Constellation

# candidate order fixes every deterministic tie-break (zero column -> +1+j)
CANDIDATES = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])

_PRUNE_EPS = 1e-9


@dataclass
class PrecoderInput:
    H: object  # ChannelRealization or (K, N_T) complex ndarray
    s_vec: np.ndarray
    c: Constellation
    pt: float = 1.0
    sigma2: float | None = None
    options: dict = field(default_factory=dict)


@dataclass
class PrecodeOutcome:
    x: np.ndarray
    onebit: bool
    power_scale: float
    receiver_scale: float
    achieved_margin: float
    mult_count: int
    iterations: int
    truncated: bool = False
    trace: dict | None = None


def quantize_1bit(v: np.ndarray) -> np.ndarray:
    """Elementwise sign with sign(0) = +1."""
    v = np.asarray(v, dtype=float)
    return np.where(v >= 0.0, 1.0, -1.0)


def _unpack(inp: PrecoderInput):
    H = as_matrix(inp.H)
    s = np.asarray(inp.s_vec, dtype=complex)
    k, nt = H.shape
    if s.shape != (k,):
        raise ConfigError(f"expected {k} symbols, got {s.shape}")
    if not inp.pt > 0:
        raise ConfigError(f"transmit power must be positive, got {inp.pt}")
    return H, s, k, nt


def _one_bit_scale(pt: float, nt: int) -> float:
    return math.sqrt(pt / (2.0 * nt))


def _make_scorer(H: np.ndarray, s_vec: np.ndarray, c: Constellation):
    """Exact margin scoring of a +-1+-j candidate vector.

    Returns (selection_score, reported_margin, receiver_scale).  For PSK the
    selection score is the coefficient margin itself; for QAM the candidates
    are ranked by beta * margin (the pre-scaling distance that drives
    detection), with beta from the golden-section receiver-scale search.
    """
    if not c.is_qam:
        m = c.m

        def score(x_pm: np.ndarray):
            u = H @ x_pm
            g = float(ci.psk_user_margins(u, s_vec, m).min())
            return g, g, 1.0

        return score

    spec = ci.qam_constraints(s_vec, c)
    half_delta = c.level_spacing / 2.0

    def score(x_pm: np.ndarray):
        u = H @ x_pm
        beta_hi = max(4.0 * float(np.max(np.abs(u))), 1e-12)
        beta, margin = ci.golden_beta(u, spec, half_delta, beta_hi)
        return beta * margin, margin, beta

    return score


def _finish_onebit(x_pm, inp, nt, margin, beta, mults, iters, truncated=False, trace=None):
    g = _one_bit_scale(inp.pt, nt)
    return PrecodeOutcome(
        x=g * x_pm,
        onebit=True,
        power_scale=g,
        receiver_scale=float(beta),
        achieved_margin=float(margin),
        mult_count=int(mults),
        iterations=int(iters),
        truncated=truncated,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# linear baselines

def _zf_direction(H, s):
    try:
        w = np.linalg.solve(H @ H.conj().T, s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular channel Gram matrix: {exc}") from exc
    return H.conj().T @ w


def _gram_solve_mults(k, nt):
    # Gram build + complex LU solve + matched-filter spread
    return 4 * k * k * nt + int(4 * (k ** 3 / 3 + k * k)) + 4 * nt * k


def precode_zf_inf(inp: PrecoderInput) -> PrecodeOutcome:
    """Unquantized zero-forcing, normalized to pt per slot."""
    H, s, k, nt = _unpack(inp)
    if k > nt:
        raise ConfigError(f"zero forcing needs K <= N_T, got K={k}, N_T={nt}")
    d = _zf_direction(H, s)
    nrm = float(np.linalg.norm(d))
    if not nrm > 0:
        raise NumericalError("zero-forcing direction has zero norm")
    gamma = math.sqrt(inp.pt) / nrm
    x = gamma * d
    rep = ci.margin_report(H, x, s, inp.c, beta=gamma if inp.c.is_qam else 1.0)
    return PrecodeOutcome(
        x=x,
        onebit=False,
        power_scale=1.0,
        receiver_scale=gamma,
        achieved_margin=rep.global_margin,
        mult_count=_gram_solve_mults(k, nt) + 6 * nt,
        iterations=1,
    )


def _mse_margin(H, s, c, x_pm):
    """Margin and receiver scale for the MSE family: beta is the real
    least-squares fit of the noiseless receive onto the intended symbols."""
    u = H @ x_pm
    beta = max(float(np.vdot(s, u).real) / float(np.vdot(s, s).real), 1e-12)
    if c.is_qam:
        spec = ci.qam_constraints(s, c)
        margin = float(ci.qam_margins_at_beta(u, spec, c.level_spacing / 2.0, beta).min())
    else:
        margin = float(ci.psk_user_margins(u, s, c.m).min())
    return margin, beta


def _quantized_linear(inp, direction):
    H, s, k, nt = _unpack(inp)
    x_pm = quantize_1bit(real_stack(direction))
    x_pm = x_pm[:nt] + 1j * x_pm[nt:]
    margin, beta = _mse_margin(H, s, inp.c, x_pm)
    return x_pm, margin, beta, k, nt


def precode_zf_1bit(inp: PrecoderInput) -> PrecodeOutcome:
    """Direct 1-bit quantization of the zero-forcing vector."""
    H, s, k, nt = _unpack(inp)
    if k > nt:
        raise ConfigError(f"zero forcing needs K <= N_T, got K={k}, N_T={nt}")
    d = _zf_direction(H, s)
    x_pm, margin, beta, k, nt = _quantized_linear(inp, d)
    return _finish_onebit(x_pm, inp, nt, margin, beta, _gram_solve_mults(k, nt), 1)


def precode_mmse_1bit(inp: PrecoderInput) -> PrecodeOutcome:
    """1-bit quantization of the regularized (block-MMSE) precoding vector."""
    H, s, k, nt = _unpack(inp)
    if k > nt:
        raise ConfigError(f"MMSE needs K <= N_T, got K={k}, N_T={nt}")
    if inp.sigma2 is None:
        raise ConfigError("mmse-1bit requires the noise variance sigma2")
    reg = k * inp.sigma2 / inp.pt
    try:
        w = np.linalg.solve(H @ H.conj().T + reg * np.eye(k), s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular MMSE system: {exc}") from exc
    x_pm, margin, beta, k, nt = _quantized_linear(inp, H.conj().T @ w)
    return _finish_onebit(x_pm, inp, nt, margin, beta, _gram_solve_mults(k, nt) + k, 1)


# ---------------------------------------------------------------------------
# MSE splitting methods

def _box_init(Ht, st_vec):
    v = Ht.T @ st_vec
    peak = float(np.max(np.abs(v)))
    return v / peak if peak > 0 else v


def precode_c2po(inp: PrecoderInput) -> PrecodeOutcome:
    """Forward-backward splitting on the box-relaxed symbol-level MSE.

    Projected-gradient iterations x <- clip(x - tau * Ht'(Ht x - beta s))
    with tau = 1/sigma_max(H)^2 and beta refit by least squares before each
    step; the fixed-beta objective is non-increasing per step.
    """
    H, s, k, nt = _unpack(inp)
    iters = int(inp.options.get("iters", 20))
    if iters < 1:
        raise ConfigError("c2po needs at least one iteration")
    want_trace = bool(inp.options.get("trace", False))

    Ht = real_stack_matrix(H)
    st_vec = real_stack(s)
    lam = float(np.linalg.eigvalsh(H @ H.conj().T)[-1])
    if not lam > 0:
        raise NumericalError("zero channel matrix")
    tau = 1.0 / lam
    ss_norm = float(st_vec @ st_vec)

    x = np.clip(_box_init(Ht, st_vec), -1.0, 1.0)
    trace = {"objective_pairs": []} if want_trace else None
    for _ in range(iters):
        r = Ht @ x
        beta = max(float(st_vec @ r) / ss_norm, 1e-6)
        grad = Ht.T @ (r - beta * st_vec)
        x_new = np.clip(x - tau * grad, -1.0, 1.0)
        if want_trace:
            before = float(np.sum((r - beta * st_vec) ** 2))
            after = float(np.sum((Ht @ x_new - beta * st_vec) ** 2))
            trace["objective_pairs"].append((before, after))
        x = x_new

    x_pm = quantize_1bit(x)
    x_pm = x_pm[:nt] + 1j * x_pm[nt:]
    margin, beta_rx = _mse_margin(H, s, inp.c, x_pm)
    mults = 4 * k * k * nt + 40 * k ** 3 + 4 * k * nt + 2 * nt  # gram + eig + init
    mults += iters * (8 * k * nt + 4 * k + 2 * nt)
    return _finish_onebit(x_pm, inp, nt, margin, beta_rx, mults, iters, trace=trace)


def precode_squid(inp: PrecoderInput) -> PrecodeOutcome:
    """Douglas-Rachford splitting on 0.5*||Ht x - c s||^2 + box indicator.

    The channel is normalized to unit RMS entry so the trajectory (and the
    quantized pattern) is invariant to a positive channel scale; the target
    amplitude c = sqrt(2*N_T/(pi*K)) splits the one-bit array-gain factor
    sqrt(2/pi) evenly over the K users.  The quadratic prox is applied
    through a precomputed (2K x 2K) Woodbury inverse.
    """
    H, s, k, nt = _unpack(inp)
    iters = int(inp.options.get("iters", 50))
    if iters < 1:
        raise ConfigError("squid needs at least one iteration")
    want_trace = bool(inp.options.get("trace", False))

    fro = float(np.linalg.norm(H))
    if not fro > 0:
        raise NumericalError("zero channel matrix")
    Hn = H * (math.sqrt(k * nt) / fro)
    Ht = real_stack_matrix(Hn)
    target = math.sqrt(2.0 * nt / (math.pi * k)) * real_stack(s)

    M = np.linalg.inv(np.eye(2 * k) + Ht @ Ht.T)
    htb = Ht.T @ target

    def prox_quadratic(v):
        w = v + htb
        return w - Ht.T @ (M @ (Ht @ w))

    z = np.clip(_box_init(Ht, real_stack(s)), -1.0, 1.0)
    y = z
    trace = {"residuals": []} if want_trace else None
    for _ in range(iters):
        x = prox_quadratic(z)
        y = np.clip(2.0 * x - z, -1.0, 1.0)
        step = y - x
        z = z + step
        if want_trace:
            trace["residuals"].append(float(np.linalg.norm(step)))

    x_pm = quantize_1bit(y)
    x_pm = x_pm[:nt] + 1j * x_pm[nt:]
    margin, beta_rx = _mse_margin(H, s, inp.c, x_pm)
    mults = 6 * k * nt + 8 * k * k * nt + 8 * k ** 3 + 8 * k * nt + 2 * nt
    mults += iters * (8 * k * nt + 4 * k * k)
    return _finish_onebit(x_pm, inp, nt, margin, beta_rx, mults, iters, trace=trace)


# ---------------------------------------------------------------------------
# CI linear program

def _ci_lp_parts(H, s_vec, c: Constellation):
    """Constraint rows of the CI precoding LP over (x_stacked, t).

    Row i reads R[i] @ x_stacked + t_coeff[i] * t  rel  0.  PSK uses the two
    scaling coefficients per user (one signed real part for BPSK); QAM pins
    inner dimensions to the scaled level (equality) and pushes outer
    dimensions beyond it (inequality).  t is the margin for PSK (free) and
    the constellation scale for QAM (nonnegative).
    """
    k, nt = H.shape
    h_re = np.concatenate([H.real, -H.imag], axis=1)  # Re(h_k x) rows
    h_im = np.concatenate([H.imag, H.real], axis=1)   # Im(h_k x) rows
    if not c.is_qam:
        if c.m == 2:
            R = s_vec.real[:, None] * h_re + s_vec.imag[:, None] * h_im
            t_coeff = -np.ones(k)
            rels = [GE] * k
        else:
            s_a, s_b, sinf = ci.psk_pair_dirs(s_vec, c.m)
            rows_a = (s_b.real[:, None] * h_im - s_b.imag[:, None] * h_re) / sinf
            rows_b = (s_a.imag[:, None] * h_re - s_a.real[:, None] * h_im) / sinf
            R = np.concatenate([rows_a, rows_b], axis=0)
            t_coeff = -np.ones(2 * k)
            rels = [GE] * (2 * k)
        t_bounds = (-np.inf, np.inf)
        return R, t_coeff, rels, t_bounds

    spec = ci.qam_constraints(s_vec, c)
    levels2, outer2 = ci.qam_stacked_targets(spec)
    U = np.concatenate([h_re, h_im], axis=0)  # stacked receive dims, (2K, 2NT)
    R = np.where(outer2[:, None], np.sign(levels2)[:, None] * U, U)
    t_coeff = np.where(outer2, -np.abs(levels2), -levels2)
    rels = [GE if o else EQ for o in outer2]
    return R, t_coeff, rels, (0.0, np.inf)


def _assemble_ci_lp(R, t_coeff, rels, t_bounds, hint=None) -> LinearProgram:
    m, n2 = R.shape
    n = n2 + 1
    obj = np.zeros(n)
    obj[-1] = 1.0
    bounds = np.empty((n, 2))
    bounds[:n2, 0] = -1.0
    bounds[:n2, 1] = 1.0
    bounds[-1] = t_bounds
    rows = [(np.concatenate([R[i], [t_coeff[i]]]), rels[i], 0.0) for i in range(m)]
    start = None
    if hint is not None:
        start = np.concatenate([hint, [0.0]])
    return LinearProgram(n, obj, rows, bounds, start_hint=start)


def _lp_pivot_mults(sol: LpSolution) -> int:
    return sol.iterations * ((sol.n_rows + 1) * (sol.n_cols + 1) + sol.n_cols)


def _solve_ci_relaxation(H, s_vec, c):
    R, t_coeff, rels, t_bounds = _ci_lp_parts(H, s_vec, c)
    # starting at the matched-filter corner roughly halves the pivot count
    mf = real_stack_matrix(H).T @ real_stack(s_vec)
    sol = solve_lp(_assemble_ci_lp(R, t_coeff, rels, t_bounds, hint=np.sign(mf)))
    if sol.status == NONCONVERGENCE:
        raise NumericalError("CI relaxation LP did not converge")
    if sol.status in (INFEASIBLE, UNBOUNDED):
        raise NumericalError(f"CI relaxation LP reported {sol.status}")
    return sol, (R, t_coeff, rels, t_bounds)


def precode_lp(inp: PrecoderInput) -> PrecodeOutcome:
    """Max-margin CI precoding: box-relaxed LP, then 1-bit quantization."""
    H, s, k, nt = _unpack(inp)
    sol, parts = _solve_ci_relaxation(H, s, inp.c)
    x_rel = sol.v[: 2 * nt]
    t_rel = float(sol.v[2 * nt])

    xq = quantize_1bit(x_rel)
    x_pm = xq[:nt] + 1j * xq[nt:]
    score = _make_scorer(H, s, inp.c)
    _sel, margin, beta = score(x_pm)
    mults = 8 * k * nt + _lp_pivot_mults(sol)
    return _finish_onebit(x_pm, inp, nt, margin, beta, mults, sol.iterations,
                          trace={"t_relaxed": t_rel})


# ---------------------------------------------------------------------------
# three-stage symbol scaling

def _ss_contributions(H, s_vec, c: Constellation):
    """C[n, q, :] = coefficient deltas contributed by candidate q on antenna n."""
    V = H.T[:, None, :] * CANDIDATES[None, :, None]  # (NT, 4, K)
    if c.m == 2:
        return (V * np.conj(s_vec)[None, None, :]).real
    s_a, s_b, sinf = ci.psk_pair_dirs(s_vec, c.m)
    da = (V * np.conj(s_b)[None, None, :]).imag / sinf
    db = (np.conj(V) * s_a[None, None, :]).imag / sinf
    return np.concatenate([da, db], axis=2)  # (NT, 4, 2K)


def _ss_refine(C, assign, total, nt, max_passes, record):
    """Stage-3 sweeps: per antenna keep the min-margin maximizer, strict
    improvements only, so the margin never decreases.  Returns passes used."""
    margin = float(total.min())
    if record is not None:
        record.append(margin)
    passes = 0
    for _ in range(max_passes):
        passes += 1
        changed = False
        for n in range(nt):
            base = total - C[n, assign[n]]
            mins = (base[None, :] + C[n]).min(axis=1)
            q = int(np.argmax(mins))
            if mins[q] > margin:
                assign[n] = q
                total[:] = base + C[n, q]
                margin = float(mins[q])
                changed = True
                if record is not None:
                    record.append(margin)
        if not changed:
            break
    return margin, passes


def precode_ss(inp: PrecoderInput) -> PrecodeOutcome:
    """Three-stage symbol-scaling heuristic (PSK only).

    Stage 1 pins the half of the antennas whose best candidate has the
    largest total coefficient sum.  Stage 2 fills the rest under two design
    criteria: once maximizing the running minimum coefficient (descending
    column-norm order) and once using each antenna's best-sum candidate.
    Stage 3 refines each allocation by single-antenna exchanges that
    strictly improve the margin (at most 10 passes each) and the better of
    the two results is kept.
    """
    H, s, k, nt = _unpack(inp)
    if inp.c.is_qam:
        raise ConfigError("symbol scaling supports PSK constellations only")
    want_trace = bool(inp.options.get("trace", False))
    max_passes = int(inp.options.get("max_passes", 10))

    C = _ss_contributions(H, s, inp.c)
    sums = C.sum(axis=2)
    best_q = np.argmax(sums, axis=1)
    best_val = sums[np.arange(nt), best_q]

    n1 = (nt + 1) // 2
    by_sum = np.argsort(-best_val, kind="stable")
    stage1 = by_sum[:n1]
    rest = by_sum[n1:]
    col_norm = np.sum(np.abs(H) ** 2, axis=0)
    rest_by_norm = rest[np.argsort(-col_norm[rest], kind="stable")]

    best = None
    traces = [] if want_trace else None
    total_passes = 0
    for criterion in ("max-min", "max-sum"):
        assign = np.zeros(nt, dtype=np.int64)
        assign[stage1] = best_q[stage1]
        total = C[stage1, best_q[stage1]].sum(axis=0)
        for n in rest_by_norm:
            if criterion == "max-min":
                q = int(np.argmax((total[None, :] + C[n]).min(axis=1)))
            else:
                q = int(best_q[n])
            assign[n] = q
            total = total + C[n, q]
        record = [] if want_trace else None
        margin, passes = _ss_refine(C, assign, total, nt, max_passes, record)
        total_passes += passes
        if want_trace:
            traces.append(record)
        if best is None or margin > best[0]:
            best = (margin, assign.copy())

    margin, assign = best
    x_pm = CANDIDATES[assign]
    mults = (8 if inp.c.m == 2 else 16) * k * nt
    trace = {"margins": traces} if want_trace else None
    return _finish_onebit(x_pm, inp, nt, margin, 1.0, mults, total_passes, trace=trace)


# ---------------------------------------------------------------------------
# branch and bound

def _bound_scale(c: Constellation) -> float:
    """Converts an LP t-value into the selection-score currency of _make_scorer."""
    return c.level_spacing / 2.0 if c.is_qam else 1.0


def precode_pbb(inp: PrecoderInput) -> PrecodeOutcome:
    """Partial branch-and-bound around the CI relaxation.

    Entries of the relaxed solution already at +-1 (within fix_threshold) are
    frozen; the remainder is explored with best-bound search, bounding each
    node by the LP value with its assignments fixed.  The incumbent starts
    from the quantized relaxation and is also refreshed from the quantized
    solution of every node LP, so the result never falls below the plain LP
    precoder.  With full_bb nothing is frozen and the search is exact for
    PSK (the LP bound dominates every completion).
    """
    H, s, k, nt = _unpack(inp)
    eps = float(inp.options.get("fix_threshold", 1e-6))
    node_limit = int(inp.options.get("node_limit", 10_000))
    full_bb = bool(inp.options.get("full_bb", False))

    sol, (R, t_coeff, rels, t_bounds) = _solve_ci_relaxation(H, s, inp.c)
    n2 = 2 * nt
    x_rel = sol.v[:n2]
    mults = 8 * k * nt + _lp_pivot_mults(sol)

    score = _make_scorer(H, s, inp.c)
    bscale = _bound_scale(inp.c)

    if full_bb:
        fixed_mask = np.zeros(n2, dtype=bool)
    else:
        fixed_mask = np.abs(x_rel) >= 1.0 - eps
    fixed_vals = quantize_1bit(x_rel)
    free_idx = np.nonzero(~fixed_mask)[0]

    def complete(assign_vals, free_relaxed):
        xq = fixed_vals.copy()
        xq[free_idx] = np.where(assign_vals != 0, assign_vals, quantize_1bit(free_relaxed))
        return xq[:nt] + 1j * xq[nt:]

    inc_x = complete(np.zeros(len(free_idx)), x_rel[free_idx])
    inc_sel, inc_margin, inc_beta = score(inc_x)

    truncated = False
    nodes = 0
    if len(free_idx) > 0:
        R_fixed = R[:, fixed_mask]
        rhs_fixed = -(R_fixed @ fixed_vals[fixed_mask]) if fixed_mask.any() else np.zeros(R.shape[0])
        R_free = R[:, free_idx]

        def node_bound(assign_vals):
            """LP over unassigned free entries and t; returns (bound, relaxed free part)."""
            un = assign_vals == 0
            rhs = rhs_fixed - R_free[:, ~un] @ assign_vals[~un]
            nf = int(un.sum())
            obj = np.zeros(nf + 1)
            obj[-1] = 1.0
            bounds = np.empty((nf + 1, 2))
            bounds[:nf] = (-1.0, 1.0)
            bounds[-1] = t_bounds
            cols = R_free[:, un]
            rows = [(np.concatenate([cols[i], [t_coeff[i]]]), rels[i], float(rhs[i]))
                    for i in range(R.shape[0])]
            start = np.concatenate([np.sign(x_rel[free_idx][un]), [0.0]])
            nsol = solve_lp(LinearProgram(nf + 1, obj, rows, bounds, start_hint=start))
            if nsol.status == NONCONVERGENCE:
                raise NumericalError("branch-and-bound node LP did not converge")
            if nsol.status != OPTIMAL:
                return -np.inf, None, nsol
            rel = np.asarray(assign_vals, dtype=float)
            rel[un] = nsol.v[:nf]
            return float(nsol.v[nf]) * bscale, rel, nsol

        counter = 0
        root_assign = np.zeros(len(free_idx), dtype=np.int8)
        heap = [(-sol.v[n2] * bscale, counter, root_assign, x_rel[free_idx].astype(float))]

        while heap:
            neg_bound, _idx, assign, rel_vals = heapq.heappop(heap)
            if -neg_bound <= inc_sel + _PRUNE_EPS:
                continue
            un = np.nonzero(assign == 0)[0]
            frac = 1.0 - np.abs(rel_vals[un])
            branch = un[int(np.argmax(frac))]
            first = 1.0 if rel_vals[branch] >= 0 else -1.0
            stop = False
            for val in (first, -first):
                if nodes >= node_limit:
                    truncated = True
                    stop = True
                    break
                nodes += 1
                child = assign.copy()
                child[branch] = int(val)
                if np.all(child != 0):
                    x_pm = complete(child.astype(float), np.zeros(len(child)))
                    sel, margin, beta = score(x_pm)
                    if sel > inc_sel:
                        inc_sel, inc_margin, inc_beta, inc_x = sel, margin, beta, x_pm
                    continue
                bound, rel, nsol = node_bound(child.astype(float))
                mults += _lp_pivot_mults(nsol)
                if rel is not None:
                    x_pm = complete(child.astype(float), rel)
                    sel, margin, beta = score(x_pm)
                    if sel > inc_sel:
                        inc_sel, inc_margin, inc_beta, inc_x = sel, margin, beta, x_pm
                if bound > inc_sel + _PRUNE_EPS:
                    counter += 1
                    heapq.heappush(heap, (-bound, counter, child, rel))
            if stop:
                break

    return _finish_onebit(inc_x, inp, nt, inc_margin, inc_beta, mults, nodes,
                          truncated=truncated, trace={"t_relaxed": float(sol.v[n2])})


def precode_pbb_full(inp: PrecoderInput) -> PrecodeOutcome:
    """P-BB with nothing frozen: exact branch-and-bound over all entries."""
    opts = dict(inp.options)
    opts["full_bb"] = True
    return precode_pbb(PrecoderInput(inp.H, inp.s_vec, inp.c, inp.pt, inp.sigma2, opts))


# ---------------------------------------------------------------------------
# exhaustive oracle

def _sign_patterns(n: int) -> np.ndarray:
    bits = (np.arange(1 << n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return 2.0 * bits - 1.0


def precode_exhaustive(inp: PrecoderInput) -> PrecodeOutcome:
    """Enumerate all 4^N_T one-bit vectors and return the margin maximizer.

    Candidates are generated in lexicographic order of the stacked vector so
    argmax resolves margin ties to the lexicographically smallest one.
    """
    H, s, k, nt = _unpack(inp)
    if nt > 8:
        raise ConfigError(f"exhaustive enumeration is limited to N_T <= 8, got {nt}")
    pat = _sign_patterns(nt)
    n_half = pat.shape[0]
    re = np.repeat(pat, n_half, axis=0)
    im = np.tile(pat, (n_half, 1))
    X = re + 1j * im  # (4^NT, NT)
    U = X @ H.T  # (4^NT, K)

    if not inp.c.is_qam:
        if inp.c.m == 2:
            sel = (U * np.conj(s)[None, :]).real.min(axis=1)
        else:
            s_a, s_b, sinf = ci.psk_pair_dirs(s, inp.c.m)
            aa = (U * np.conj(s_b)[None, :]).imag / sinf
            ab = (np.conj(U) * s_a[None, :]).imag / sinf
            sel = np.minimum(aa.min(axis=1), ab.min(axis=1))
    else:
        spec = ci.qam_constraints(s, inp.c)
        half_delta = inp.c.level_spacing / 2.0
        beta, margin = _golden_beta_batch(U, spec, half_delta)
        sel = beta * margin

    best = int(np.argmax(sel))
    x_pm = X[best]
    score = _make_scorer(H, s, inp.c)
    _sel, margin_out, beta_out = score(x_pm)
    mults = 4 * X.shape[0] * nt * k + 8 * X.shape[0] * k
    return _finish_onebit(x_pm, inp, nt, margin_out, beta_out, mults, X.shape[0])


def _golden_beta_batch(U, spec, half_delta, iters=60):
    """Row-wise golden-section receiver-scale search (same scheme as ci.golden_beta)."""
    u2 = np.concatenate([U.real, U.imag], axis=1)
    levels2, outer2 = ci.qam_stacked_targets(spec)
    inv = ci._INVPHI

    def g(beta):
        m = ci._dim_margins(u2 / beta[:, None], levels2[None, :], outer2[None, :], half_delta)
        return m.min(axis=1)

    b = np.maximum(4.0 * np.max(np.abs(U), axis=1), 1e-12)
    a = b * 1e-9
    x1 = b - inv * (b - a)
    x2 = a + inv * (b - a)
    f1, f2 = g(x1), g(x2)
    take2 = f2 > f1
    best_beta = np.where(take2, x2, x1)
    best_val = np.where(take2, f2, f1)
    for _ in range(iters):
        move_a = f1 < f2  # drop [a, x1), keep probing to the right
        a = np.where(move_a, x1, a)
        b = np.where(move_a, b, x2)
        x1n = np.where(move_a, x2, b - inv * (b - a))
        x2n = np.where(move_a, a + inv * (b - a), x1)
        x_new = np.where(move_a, x2n, x1n)
        f_new = g(x_new)
        f1n = np.where(move_a, f2, f_new)
        f2n = np.where(move_a, f_new, f1)
        x1, x2, f1, f2 = x1n, x2n, f1n, f2n
        upd = f_new > best_val
        best_beta = np.where(upd, x_new, best_beta)
        best_val = np.where(upd, f_new, best_val)
    return best_beta, best_val


# ---------------------------------------------------------------------------

PRECODERS = {
    "zf-inf": precode_zf_inf,
    "zf-1bit": precode_zf_1bit,
    "mmse-1bit": precode_mmse_1bit,
    "c2po": precode_c2po,
    "squid": precode_squid,
    "lp": precode_lp,
    "ss": precode_ss,
    "pbb": precode_pbb,
    "pbb-full": precode_pbb_full,
    "exhaustive": precode_exhaustive,
}

NEEDS_SIGMA2 = frozenset({"mmse-1bit"})


def get_precoder(name: str):
    try:
        return PRECODERS[name]
    except KeyError:
        raise ConfigError(f"unknown precoder {name!r}; known: {sorted(PRECODERS)}") from None
