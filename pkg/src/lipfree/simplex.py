"""Dense tableau simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

Used as the independent oracle for the free-space norm: it never sees the
transport solver. Dantzig pricing, switching to Bland's rule after a run of
degenerate pivots so the highly degenerate Lipschitz polytopes cannot cycle.
"""

from __future__ import annotations

import numpy as np


class UnboundedError(Exception):
    pass


class LPResult:
    __slots__ = ("x", "value", "pivots")

    def __init__(self, x, value, pivots):
        self.x = x
        self.value = value
        self.pivots = pivots


def maximize(c, A, b, tol=1e-12, max_pivots=100_000):
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < -tol):
        raise ValueError("origin must be feasible (b >= 0)")
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = np.maximum(b, 0.0)
    T[m, :n] = -c
    basis = np.arange(n, n + m)

    pivots = 0
    degenerate_run = 0
    while True:
        obj = T[m, :-1]
        entering = np.flatnonzero(obj < -tol)
        if entering.size == 0:
            break
        if degenerate_run > 20:
            col = int(entering[0])
        else:
            col = int(entering[np.argmin(obj[entering])])
        colv = T[:m, col]
        pos = colv > tol
        if not pos.any():
            raise UnboundedError("objective unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol)
        row = int(ties[np.argmin(basis[ties])])
        degenerate_run = degenerate_run + 1 if best <= tol else 0

        T[row] /= T[row, col]
        f = T[:, col].copy()
        f[row] = 0.0
        nz = np.flatnonzero(f)
        # the constraint matrices here are sparse, so only touch affected rows
        T[nz] -= f[nz, None] * T[row]
        basis[row] = col
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex exceeded pivot limit")

    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return LPResult(x[:n], float(T[m, -1]), pivots)
