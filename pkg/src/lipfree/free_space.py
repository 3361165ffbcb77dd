"""Finitely supported elements of the free space and their norm.

The norm of ``sum c_p delta_p`` is an optimal transport cost: the base point
absorbs the mass imbalance (its Dirac is the zero functional), positive
coefficients ship to negative ones at cost d. The dual side is the
Lipschitz-0 function recovered from the final shortest-path labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMoleculeError, StructureError
from .lip_func import LipFunction
from .metric_core import check_points
from .simplex import maximize
from .transport import solve_transport


class FreeElement:
    """Sparse ``{point: coefficient}`` over a space; no base entry, no zeros."""

    def __init__(self, space, coeffs=None):
        self.space = space
        clean = {}
        for p, c in (coeffs or {}).items():
            p = int(p)
            c = float(c)
            if p == space.base or c == 0.0:
                continue
            clean[p] = clean.get(p, 0.0) + c
        check_points(space, clean)
        self.coeffs = {p: c for p, c in clean.items() if c != 0.0}

    @classmethod
    def dirac(cls, space, p):
        return cls(space, {p: 1.0})

    def __repr__(self):
        return f"FreeElement({self.coeffs!r})"

    def __len__(self):
        return len(self.coeffs)

    @property
    def support(self):
        return sorted(self.coeffs)

    def _check(self, other):
        if not self.space.same_as(other.space):
            raise StructureError("elements live on different spaces")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0.0) + c
        return FreeElement(self.space, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, s):
        s = float(s)
        return FreeElement(self.space, {p: s * c for p, c in self.coeffs.items()})

    __rmul__ = __mul__

    def dense(self):
        v = np.zeros(len(self.space))
        for p, c in self.coeffs.items():
            v[p] = c
        return v

    def max_abs_diff(self, other):
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coeffs.get(p, 0.0) - other.coeffs.get(p, 0.0)) for p in keys), default=0.0)


@dataclass(frozen=True)
class Molecule:
    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise DegenerateMoleculeError(f"molecule needs u != v, got {self.u}")


@dataclass
class MolecularDecomposition:
    space: object
    terms: list = field(default_factory=list)  # (weight, Molecule)

    @property
    def total_weight(self):
        return float(sum(w for w, _ in self.terms))

    def as_element(self):
        acc = {}
        D = self.space.dist
        for w, m in self.terms:
            s = w / D[m.u, m.v]
            acc[m.u] = acc.get(m.u, 0.0) + s
            acc[m.v] = acc.get(m.v, 0.0) - s
        return FreeElement(self.space, acc)

    def endpoints(self):
        return {p for _, m in self.terms for p in (m.u, m.v)}

    @classmethod
    def uniform(cls, space, pairs):
        """Average ``(1/m) sum m_{u_j v_j}``."""
        pairs = list(pairs)
        w = 1.0 / len(pairs)
        return cls(space, [(w, Molecule(int(u), int(v))) for u, v in pairs])


@dataclass
class NormCertificate:
    value: float
    flow: list  # (u, v, amount): mass moved from u to v
    potentials: LipFunction
    lower_potentials: LipFunction | None = None

    def flow_divergence(self, space):
        """Net outflow at each point of ``space``."""
        out = np.zeros(len(space))
        for u, v, a in self.flow:
            out[u] += a
            out[v] -= a
        return out


def molecule_element(space, u, v):
    if u == v:
        raise DegenerateMoleculeError(f"molecule needs u != v, got {u}")
    s = 1.0 / space.dist[u, v]
    return FreeElement(space, {u: s, v: -s})


def molecule_sum(space, terms):
    """``sum w * m_uv`` over ``(w, u, v)`` triples, built in one pass."""
    acc = {}
    D = space.dist
    for w, u, v in terms:
        if u == v:
            raise DegenerateMoleculeError(f"molecule needs u != v, got {u}")
        s = w / D[u, v]
        acc[u] = acc.get(u, 0.0) + s
        acc[v] = acc.get(v, 0.0) - s
    return FreeElement(space, acc)


def _balanced(element):
    space = element.space
    pts = element.support
    c = np.array([element.coeffs[p] for p in pts])
    imbalance = float(c.sum())
    nodes = list(pts)
    if imbalance != 0.0:
        nodes.append(space.base)
        c = np.append(c, -imbalance)
    nodes = np.array(nodes, dtype=int)
    return nodes, c


def _zero_function(space):
    return LipFunction(space, np.zeros(len(space)))


def norm(space, element):
    """Free-space norm with a primal flow and a dual 1-Lipschitz witness."""
    if not space.same_as(element.space):
        raise StructureError("element belongs to a different space")
    if not element.coeffs:
        z = _zero_function(space)
        return NormCertificate(0.0, [], z, z)
    nodes, c = _balanced(element)
    src = nodes[c > 0]
    snk = nodes[c < 0]
    res = solve_transport(c[c > 0], -c[c < 0], space.dist[np.ix_(src, snk)])
    flow = [(int(src[i]), int(snk[j]), float(res.flow[i, j]))
            for i, j in zip(*np.nonzero(res.flow > 0))]
    # phi = -pi satisfies phi(s) - phi(t) <= d(s, t); its c-transforms over
    # the sinks (upper) or the sources (lower) are 1-Lipschitz everywhere.
    phi_t = -res.potential_snk
    phi_s = -res.potential_src
    D = space.dist
    upper = (D[:, snk] + phi_t[None, :]).min(axis=1)
    lower = (phi_s[None, :] - D[:, src]).max(axis=1)
    return NormCertificate(res.cost, flow, LipFunction(space, upper), LipFunction(space, lower))


def decompose(space, element):
    """Molecular decomposition read off an optimal flow (weights sum to the norm)."""
    cert = norm(space, element)
    D = space.dist
    terms = [(a * D[u, v], Molecule(u, v)) for u, v, a in cert.flow]
    return MolecularDecomposition(space, terms)


def pairing(f, element):
    """``sum_p c_p (f(p) - f(base))`` for a LipFunction or a raw value array."""
    if isinstance(f, LipFunction):
        if not f.space.same_as(element.space):
            raise StructureError("function and element live on different spaces")
        vals = f.values
    else:
        vals = np.asarray(f, dtype=float)
        if vals.shape != (len(element.space),):
            raise StructureError("value array does not match the element's space")
    if not element.coeffs:
        return 0.0
    b = vals[element.space.base]
    pts = np.fromiter(element.coeffs.keys(), dtype=int, count=len(element.coeffs))
    cs = np.fromiter(element.coeffs.values(), dtype=float, count=len(element.coeffs))
    return float(np.dot(cs, vals[pts] - b))


def lp_norm(space, element):
    """Norm as ``max sum c_p f_p`` over the Lipschitz polytope, by dense simplex.

    Variables are shifted to ``g_p = f_p + d(p, base) >= 0`` so the origin is
    feasible; constraints cover all ordered pairs of support points plus the
    base. Independent of the transport solver.
    """
    if not element.coeffs:
        return 0.0
    pts = np.array(element.support, dtype=int)
    c = np.array([element.coeffs[p] for p in pts])
    n = len(pts)
    D = space.dist
    Dpp = D[np.ix_(pts, pts)]
    d0 = D[pts, space.base]
    I, J = np.nonzero(~np.eye(n, dtype=bool))
    pair_rows = np.zeros((len(I), n))
    pair_rows[np.arange(len(I)), I] = 1.0
    pair_rows[np.arange(len(I)), J] = -1.0
    rows = np.vstack([np.eye(n), pair_rows])
    rhs = np.concatenate([2.0 * d0, Dpp[I, J] + d0[I] - d0[J]])
    res = maximize(c, rows, np.maximum(rhs, 0.0))
    return res.value - float(np.dot(c, d0))
