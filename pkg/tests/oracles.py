"""Independent reference implementations used to check the library.

These deliberately avoid the code paths they validate: the LP oracle
enumerates candidate vertices by brute force, and the fading BER oracle is
the textbook closed form.
"""

import itertools

import numpy as np

from onebitmimo.lp import EQ, GE, LE


def lp_vertex_oracle(lp, tol=1e-7):
    """Brute-force LP solve: enumerate all n-subsets of {rows, bounds} as
    active sets, solve each square system, keep feasible points.

    Returns (feasible, best_value).  Assumes fully bounded variables so a
    nonempty feasible set implies a vertex exists.
    """
    n = lp.n_vars
    cons = []
    for a, rel, b in lp.rows:
        cons.append((np.asarray(a, dtype=float), float(b)))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        lo, hi = lp.bounds[j]
        if np.isfinite(lo):
            cons.append((e.copy(), float(lo)))
        if np.isfinite(hi):
            cons.append((e.copy(), float(hi)))

    A = np.array([c[0] for c in cons])
    b = np.array([c[1] for c in cons])
    combos = np.array(list(itertools.combinations(range(len(cons)), n)))

    best = None
    feasible = False
    for chunk in np.array_split(combos, max(1, len(combos) // 4096)):
        M = A[chunk]                      # (C, n, n)
        rhs = b[chunk]                    # (C, n)
        dets = np.abs(np.linalg.det(M))
        ok = dets > 1e-10
        if not ok.any():
            continue
        V = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]  # (C', n)
        # feasibility against every constraint
        rowvals = V @ np.array([np.asarray(a, dtype=float) for a, _r, _b in lp.rows]).T \
            if lp.rows else np.zeros((len(V), 0))
        feas = np.ones(len(V), dtype=bool)
        for i, (_a, rel, bb) in enumerate(lp.rows):
            if rel == LE:
                feas &= rowvals[:, i] <= bb + tol
            elif rel == GE:
                feas &= rowvals[:, i] >= bb - tol
            else:
                feas &= np.abs(rowvals[:, i] - bb) <= tol
        feas &= np.all(V >= lp.bounds[None, :, 0] - tol, axis=1)
        feas &= np.all(V <= lp.bounds[None, :, 1] + tol, axis=1)
        if feas.any():
            feasible = True
            vals = V[feas] @ np.asarray(lp.objective, dtype=float)
            cand = float(vals.max())
            best = cand if best is None else max(best, cand)
    return feasible, best


def random_box_lp(rng, max_vars=8, max_rows=8, max_subsets=50_000):
    """Random fully-box-bounded LinearProgram small enough for the oracle."""
    from math import comb

    from onebitmimo.lp import LinearProgram

    while True:
        n = int(rng.integers(2, max_vars + 1))
        m = int(rng.integers(0, max_rows + 1))
        if comb(m + 2 * n, n) <= max_subsets:
            break
    c = rng.standard_normal(n)
    lo = rng.uniform(-3, 0, n)
    hi = rng.uniform(0.2, 3, n)
    rows = []
    anchor = rng.uniform(lo, hi)  # biases some instances toward feasibility
    for _ in range(m):
        a = rng.standard_normal(n)
        rel = (LE, GE, EQ)[int(rng.choice([0, 1, 2], p=[0.45, 0.40, 0.15]))]
        if rng.random() < 0.7:
            b = float(a @ anchor + rng.standard_normal() * 0.5)
        else:
            b = float(rng.standard_normal() * 2.0)
        rows.append((a, rel, b))
    return LinearProgram(n, c, rows, np.stack([lo, hi], axis=1))


def rayleigh_bpsk_ber(snr_linear: float) -> float:
    """Closed-form BPSK error rate over Rayleigh fading with receive SNR snr."""
    return 0.5 * (1.0 - np.sqrt(snr_linear / (1.0 + snr_linear)))
