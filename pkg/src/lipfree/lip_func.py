"""Lipschitz functions on finite spaces."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .errors import LipschitzViolation, PreconditionError, StructureError
from .metric_core import is_ladder

_CHUNK = 512


def _lip_and_pair(space, values):
    v = np.asarray(values, dtype=float)
    D = space.dist
    n = len(v)
    if n != len(space):
        raise StructureError(f"{n} values for a space of {len(space)} points")
    best, pair = 0.0, None
    for lo in range(0, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        diff = np.abs(v[lo:hi, None] - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(D[lo:hi] > 0, diff / D[lo:hi], 0.0)
        idx = int(np.argmax(ratio))
        r = float(ratio.flat[idx])
        if r > best:
            best = r
            pair = (lo + idx // n, idx % n)
    return best, pair


def lip_constant(space, values):
    """Exact max over pairs of |f(p) - f(q)| / d(p, q); 0 for constants."""
    return _lip_and_pair(space, values)[0]


def lip_attaining_pair(space, values):
    return _lip_and_pair(space, values)


class LipFunction:
    """Values on every point of ``space`` with value 0 at the base.

    ``anchor=True`` subtracts the base value; otherwise a non-zero base
    value is rejected. ``lip`` and ``pair`` (an attaining pair) are computed
    on construction.
    """

    def __init__(self, space, values, anchor=True, flags=()):
        v = np.array(values, dtype=float)
        if v.shape != (len(space),):
            raise StructureError(f"expected {len(space)} values, got shape {v.shape}")
        b = v[space.base]
        if anchor:
            if b != 0.0:
                v = v - b
        elif b != 0.0:
            raise StructureError(f"value at base is {b!r}, not 0")
        v.setflags(write=False)
        self.space = space
        self.values = v
        self.flags = tuple(flags)
        self.lip, self.pair = _lip_and_pair(space, v)

    def __repr__(self):
        return f"LipFunction(n={len(self.values)}, lip={self.lip!r})"

    def __call__(self, p):
        return float(self.values[p])

    def __add__(self, other):
        return LipFunction(self.space, self.values + _vals(other))

    def __sub__(self, other):
        return LipFunction(self.space, self.values - _vals(other))

    def __mul__(self, c):
        return LipFunction(self.space, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _vals(f):
    return f.values if isinstance(f, LipFunction) else np.asarray(f, dtype=float)


def _partial_arrays(partial):
    if isinstance(partial, Mapping):
        ids = np.fromiter((int(k) for k in partial), dtype=int, count=len(partial))
        vals = np.fromiter((float(partial[k]) for k in partial), dtype=float, count=len(partial))
    else:
        ids, vals = partial
        ids = np.asarray(ids, dtype=int)
        vals = np.asarray(vals, dtype=float)
    if ids.size == 0:
        raise PreconditionError("partial function has non-empty domain")
    return ids, vals


def check_partial_lipschitz(space, ids, vals, L, tol=1e-12):
    """Raise ``LipschitzViolation`` naming the worst pair if the check fails."""
    D = space.dist[np.ix_(ids, ids)]
    excess = np.abs(vals[:, None] - vals[None, :]) - L * D
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    idx = int(np.argmax(excess))
    if excess.flat[idx] > tol * scale:
        a, b = divmod(idx, len(ids))
        ratio = abs(vals[a] - vals[b]) / D[a, b] if D[a, b] > 0 else np.inf
        raise LipschitzViolation((int(ids[a]), int(ids[b])), float(ratio), L)


def _extend(space, partial, L, tol, reducer):
    ids, vals = _partial_arrays(partial)
    if L < 0:
        raise PreconditionError("L >= 0", repr(L))
    check_partial_lipschitz(space, ids, vals, L, tol)
    out = np.empty(len(space))
    for lo in range(0, len(space), _CHUNK):
        hi = min(len(space), lo + _CHUNK)
        block = space.dist[lo:hi][:, ids]
        if reducer == "min":
            out[lo:hi] = (vals[None, :] + L * block).min(axis=1)
        else:
            out[lo:hi] = (vals[None, :] - L * block).max(axis=1)
    out[ids] = vals
    flags = []
    if out[space.base] != 0.0:
        flags.append("re-anchored")
    return LipFunction(space, out, anchor=True, flags=flags)


def mcshane_extend(space, partial, L, tol=1e-12):
    """Largest L-Lipschitz extension: ``min_y partial(y) + L d(x, y)``.

    ``partial`` is a mapping id -> value or an ``(ids, values)`` pair. If the
    base is not in the domain (or carries a non-zero value) the result is
    re-anchored and flagged ``"re-anchored"``.
    """
    return _extend(space, partial, L, tol, "min")


def mcshane_extend_lower(space, partial, L, tol=1e-12):
    """Smallest L-Lipschitz extension: ``max_y partial(y) - L d(x, y)``."""
    return _extend(space, partial, L, tol, "max")


def f_xy_values(space, x, y):
    """Raw values of d(x,y)/2 * (d(y,p) - d(x,p)) / (d(x,p) + d(y,p))."""
    if x == y:
        raise PreconditionError("x != y", repr(x))
    D = space.dist
    dxy = D[x, y]
    return dxy / 2.0 * (D[y] - D[x]) / (D[x] + D[y])


def f_xy_builder(space, x, y):
    """The function above as an element of Lip_0 (shifted to vanish at base)."""
    raw = f_xy_values(space, x, y)
    flags = ("re-anchored",) if raw[space.base] != 0.0 else ()
    return LipFunction(space, raw, anchor=True, flags=flags)


def projections(ladder_space):
    """Coordinate projections (pi1, pi2) of a ladder space."""
    if not is_ladder(ladder_space):
        raise StructureError("projections need a space built by build_ladder")
    xy = ladder_space.coords
    return LipFunction(ladder_space, xy[:, 0]), LipFunction(ladder_space, xy[:, 1])


def bump(space, p, r):
    """``max(0, r - d(u, p))``; flagged if the base lies strictly inside."""
    if not r > 0:
        raise PreconditionError("r > 0", repr(r))
    vals = np.maximum(0.0, r - space.dist[p])
    flags = ("bump overlaps base",) if vals[space.base] > 0 else ()
    return LipFunction(space, vals, anchor=True, flags=flags)
