"""Uncapacitated transportation problem by successive shortest paths.

Sources carry positive supply, sinks positive demand; any source may ship to
any sink at the given cost. Each round runs a dense Dijkstra on the residual
graph with reduced costs (node potentials keep them non-negative) and stops
as soon as a sink with residual demand is settled.
"""

from __future__ import annotations

import numpy as np


class TransportResult:
    __slots__ = ("flow", "cost", "potential_src", "potential_snk", "augmentations")

    def __init__(self, flow, cost, potential_src, potential_snk, augmentations):
        self.flow = flow
        self.cost = cost
        self.potential_src = potential_src
        self.potential_snk = potential_snk
        self.augmentations = augmentations


def solve_transport(supply, demand, cost, tol=1e-15, max_augment=None):
    """Minimum-cost flow from ``supply`` (m,) to ``demand`` (k,) over ``cost`` (m, k).

    Totals must agree up to rounding. Returns a ``TransportResult`` whose
    ``potential_src``/``potential_snk`` are shortest-path labels ``pi`` with
    ``cost[s, t] + pi_s - pi_t >= 0`` everywhere and ``== 0`` on arcs that
    carry flow.
    """
    a = np.array(supply, dtype=float)
    b = np.array(demand, dtype=float)
    C = np.asarray(cost, dtype=float)
    m, k = C.shape
    if a.shape != (m,) or b.shape != (k,):
        raise ValueError("supply/demand shapes do not match cost matrix")
    if np.any(a < 0) or np.any(b < 0) or np.any(C < 0):
        raise ValueError("supplies, demands and costs must be non-negative")
    scale = max(a.sum(), b.sum(), 1.0)
    eps = tol * scale
    if abs(a.sum() - b.sum()) > 1e-9 * scale:
        raise ValueError(f"unbalanced problem: {a.sum()!r} vs {b.sum()!r}")

    F = np.zeros((m, k))
    rs = a.copy()
    rd = b.copy()
    hs = np.zeros(m)
    ht = np.zeros(k)
    if max_augment is None:
        max_augment = 50 * (m + k) + 100
    rounds = 0
    while rs.max(initial=0.0) > eps and rd.max(initial=0.0) > eps:
        rounds += 1
        if rounds > max_augment:
            raise RuntimeError("transport solver did not converge")
        ds = np.where(rs > eps, 0.0, np.inf)
        dt = np.full(k, np.inf)
        pred_s = np.full(m, -1)
        pred_t = np.full(k, -1)
        done_s = np.zeros(m, bool)
        done_t = np.zeros(k, bool)
        target = -1
        while True:
            cs = np.where(done_s, np.inf, ds)
            ct = np.where(done_t, np.inf, dt)
            i = int(np.argmin(cs))
            j = int(np.argmin(ct))
            if ct[j] <= cs[i] and np.isfinite(ct[j]):
                done_t[j] = True
                if rd[j] > eps:
                    target = j
                    break
                back = F[:, j] > 0
                if back.any():
                    rc = np.maximum(ht[j] - hs - C[:, j], 0.0)
                    cand = dt[j] + rc
                    upd = back & ~done_s & (cand < ds)
                    ds[upd] = cand[upd]
                    pred_s[upd] = j
            elif np.isfinite(cs[i]):
                done_s[i] = True
                rc = np.maximum(C[i] + hs[i] - ht, 0.0)
                cand = ds[i] + rc
                upd = ~done_t & (cand < dt)
                dt[upd] = cand[upd]
                pred_t[upd] = i
            else:
                raise RuntimeError("no augmenting path; residual graph disconnected")
        D = dt[target]
        hs += np.minimum(ds, D)
        ht += np.minimum(dt, D)

        # walk back: t <- s (forward arc) <- t' (backward arc) <- ... <- source
        arcs = []
        t = target
        while True:
            s = pred_t[t]
            arcs.append((s, t, +1))
            if pred_s[s] < 0:
                break
            t2 = pred_s[s]
            arcs.append((s, t2, -1))
            t = t2
        src = arcs[-1][0]
        amount = min(rs[src], rd[target])
        for s, t, sign in arcs:
            if sign < 0:
                amount = min(amount, F[s, t])
        for s, t, sign in arcs:
            F[s, t] += sign * amount
            if sign < 0 and F[s, t] <= eps:
                F[s, t] = 0.0
        rs[src] -= amount
        rd[target] -= amount
        if rs[src] <= eps:
            rs[src] = 0.0
        if rd[target] <= eps:
            rd[target] = 0.0
    return TransportResult(F, float((F * C).sum()), hs, ht, rounds)
