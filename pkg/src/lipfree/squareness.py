"""Ladder and zigzag constructions around (weak) almost squareness.

Ladder side: molecule windows by height, the flattening of a norming
functional below a height, filtering a near-square element into a height
window, and gluing per-strip functionals into one 3-Lipschitz functional.

Geodesic side: dyadic zigzag elements along internally disjoint geodesics of
a metric graph, their alternating witness, and weak-null trend tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    ContradictionDiagnostic,
    PreconditionError,
    ResolutionError,
    StructureError,
    VerificationError,
)
from .free_space import (
    FreeElement,
    MolecularDecomposition,
    Molecule,
    decompose,
    molecule_element,
    molecule_sum,
    norm,
    pairing,
)
from .lip_func import LipFunction, mcshane_extend, projections
from .metric_core import METRIC_TOL, build_ladder, heights, is_ladder, sample_geodesic, segment

LIP_TOL = 1e-9


def _require_ladder(space):
    if not is_ladder(space):
        raise StructureError("operation needs a space built by build_ladder")


def ladder_xy(space):
    """Ids of x = (0, 0) and y = (1, 0)."""
    _require_ladder(space)
    return space.find((0.0, 0.0)), space.find((1.0, 0.0))


def m_xy(space):
    x, y = ladder_xy(space)
    return molecule_element(space, x, y)


# ---------------------------------------------------------------- windows


@dataclass(frozen=True)
class MolWindow:
    delta: float
    eps: float

    def __post_init__(self):
        if not 0 < self.delta < self.eps:
            raise PreconditionError("0 < delta < eps", f"{self.delta!r}, {self.eps!r}")


def mol_window_members(ladder_space, window):
    """All molecules m_uv with both endpoint heights strictly inside the window."""
    h = heights(ladder_space)
    inside = np.flatnonzero((h > window.delta) & (h < window.eps))
    return {Molecule(int(u), int(v)) for u in inside for v in inside if u != v}


# ---------------------------------------------------------------- flatten


def flatten(ladder_space, nu, g, eps, delta):
    """Turn a norming functional of ``nu`` into one vanishing at heights <= delta.

    ``nu`` is a MolecularDecomposition with endpoint heights > delta and
    ``g`` a 1-Lipschitz function with g(nu) = ||nu|| and |g(m_xy)| < eps.
    With u = (0, delta), v = (1, delta) and h = g + g(m_uv) * pi1, returns
    f = (h - h(u)) / ||h|| above delta and 0 at or below it.
    """
    _require_ladder(ladder_space)
    space = ladder_space
    hgt = heights(space)
    u = space.find((0.0, delta))
    v = space.find((1.0, delta))
    if u is None or v is None:
        raise ResolutionError(f"ladder has no side points at height {delta!r}; pass extra_heights")
    if nu.total_weight > 1 + LIP_TOL or any(w < 0 for w, _ in nu.terms):
        raise PreconditionError("nu is a convex combination of molecules", repr(nu.total_weight))
    ends = nu.endpoints()
    if any(hgt[p] <= delta for p in ends):
        raise PreconditionError("endpoints of nu lie above delta")
    if g.lip > 1 + LIP_TOL:
        raise PreconditionError("g is 1-Lipschitz", f"lip = {g.lip!r}")
    gxy = pairing(g, m_xy(space))
    if not abs(gxy) < eps:
        raise PreconditionError("|g(m_xy)| < eps", f"{gxy!r} vs {eps!r}")
    nu_el = nu.as_element()
    nu_norm = norm(space, nu_el).value
    g_nu = pairing(g, nu_el)
    if g_nu < nu_norm - LIP_TOL:
        raise PreconditionError("g(nu) = ||nu||", f"{g_nu!r} vs {nu_norm!r}")

    pi1, _ = projections(space)
    g_uv = pairing(g, molecule_element(space, u, v))
    h = g.values + g_uv * pi1.values
    h_lip = LipFunction(space, h).lip
    if h_lip == 0.0:
        raise PreconditionError("h is not constant")
    vals = np.where(hgt <= delta, 0.0, (h - h[u]) / h_lip)
    return LipFunction(space, vals, anchor=False)


def flatten_bound(nu_norm, eps, delta):
    """Lower bound on f(nu) guaranteed by ``flatten`` (minus-sign form)."""
    return (nu_norm - eps - 2 * delta) / (1 + eps + 2 * delta)


# ---------------------------------------------------------------- molecule filter


@dataclass
class FilterResult:
    delta: float
    nu: MolecularDecomposition
    distance: float
    j_mass: float
    split_mismatch: float = 0.0
    norms: dict = field(default_factory=dict)


def check_near_square(ladder_space, mu, eps):
    """Norms entering the hypothesis; raise if it does not hold."""
    space = ladder_space
    mxy = m_xy(space)
    n_mu = norm(space, mu).value
    n_plus = norm(space, mxy + mu).value
    n_minus = norm(space, mxy - mu).value
    norms = {"mu": n_mu, "m_xy_plus_mu": n_plus, "m_xy_minus_mu": n_minus}
    slack = eps ** 2 / 64
    if n_mu > 1 + LIP_TOL:
        raise PreconditionError("||mu|| <= 1", repr(n_mu))
    if not n_mu > 1 - slack:
        raise PreconditionError("||mu|| > 1 - eps^2/64", f"{n_mu!r} vs {1 - slack!r}")
    if not max(n_plus, n_minus) < 1 + slack:
        raise PreconditionError(
            "||m_xy +- mu|| < 1 + eps^2/64", f"{n_plus!r}, {n_minus!r} vs {1 + slack!r}")
    return norms


def split_at_height(decomposition, level, tol=METRIC_TOL):
    """Split molecules crossing ``level`` at a segment point of that height.

    Returns ``(new_decomposition, mismatch)``; ``mismatch`` is the largest
    height error when no exact point exists and the nearest one was used.
    """
    space = decomposition.space
    hgt = heights(space)
    D = space.dist
    out = []
    mismatch = 0.0
    for w, m in decomposition.terms:
        hu, hv = hgt[m.u], hgt[m.v]
        if not (min(hu, hv) < level <= max(hu, hv)):
            out.append((w, m))
            continue
        seg = [p for p in segment(space, m.u, m.v, tol) if p not in (m.u, m.v)]
        exact = [p for p in seg if abs(hgt[p] - level) <= tol]
        if exact:
            c = min(exact)
        elif seg:
            c = min(seg, key=lambda p: (abs(hgt[p] - level), p))
            mismatch = max(mismatch, abs(hgt[c] - level))
        else:
            out.append((w, m))
            mismatch = max(mismatch, min(abs(hu - level), abs(hv - level)))
            continue
        duv = D[m.u, m.v]
        out.append((w * D[m.u, c] / duv, Molecule(m.u, c)))
        out.append((w * D[c, m.v] / duv, Molecule(c, m.v)))
    return MolecularDecomposition(space, out), mismatch


def molecule_filter(ladder_space, mu, eps):
    """Approximate a near-square ``mu`` by a combination of low molecules.

    Returns a FilterResult with window_delta and nu whose endpoint heights lie
    in (window_delta, eps). Raises PreconditionError if the hypothesis fails and
    ContradictionDiagnostic if the dropped mass exceeds 15 eps / 16.
    """
    _require_ladder(ladder_space)
    if not 0 < eps < 1:
        raise PreconditionError("eps in (0, 1)", repr(eps))
    space = ladder_space
    norms = check_near_square(space, mu, eps)
    level = eps / 16
    dec, mismatch = split_at_height(decompose(space, mu), level)
    hgt = heights(space)
    kept, j_mass = [], 0.0
    for w, m in dec.terms:
        lo, hi = sorted((hgt[m.u], hgt[m.v]))
        if lo >= level or hi >= eps:
            j_mass += w
        else:
            kept.append((w, m))
    threshold = 15 * eps / 16
    if j_mass > threshold:
        raise ContradictionDiagnostic(j_mass, threshold, f"split mismatch {mismatch!r}")
    ends = [hgt[p] for _, m in kept for p in (m.u, m.v)]
    if min(ends) <= 0:
        raise PreconditionError("decomposition avoids height 0")
    delta = 0.5 * min(ends)
    nu = MolecularDecomposition(space, kept)
    dist = norm(space, mu - nu.as_element()).value
    if not dist < eps + mismatch:
        raise VerificationError(f"||mu - nu|| = {dist!r} not below eps = {eps!r}")
    return FilterResult(delta, nu, dist, j_mass, mismatch, norms)


# ---------------------------------------------------------------- zigzags


def zigzag_element(space, samples):
    """``2^-k sum_j (-1)^j m_{p_{j-1} p_j}`` over one sampled geodesic."""
    m = len(samples) - 1
    w = 1.0 / m
    return molecule_sum(space, [(w * (-1) ** j, samples[j - 1], samples[j]) for j in range(1, m + 1)])


def alternating_partial(sample_lists, step):
    """0 at even sample positions, ``step`` at odd ones (shared points must agree)."""
    partial = {}
    for samples in sample_lists:
        for j, p in enumerate(samples):
            val = 0.0 if j % 2 == 0 else step
            if partial.get(p, val) != val:
                raise PreconditionError("geodesics agree on shared sample points", f"point {p}")
            partial[p] = val
    return partial


def rung_zigzag(ladder_space, height, k):
    """Zigzag element along the rung at ``height`` with 2**k steps.

    Returns ``(element, samples)``.
    """
    _require_ladder(ladder_space)
    m = 2 ** k
    samples = []
    for j in range(m + 1):
        p = ladder_space.find((j / m, height))
        if p is None:
            raise ResolutionError(f"no rung point ({j}/{m}, {height!r}); raise rung_resolution")
        samples.append(p)
    return zigzag_element(ladder_space, samples), samples


@dataclass
class ZigzagLevel:
    k: int
    graph: object
    space: object
    samples: list
    paths: list
    nus: list
    mu: FreeElement
    y: FreeElement
    d: float
    pairs: list

    @property
    def n(self):
        return len(self.pairs)


class ZigzagFamily:
    """y = (1/n) sum m_{u_i v_i} along chosen geodesics, refined level by level.

    ``y_molecules`` holds ``(u, v)`` or ``(u, v, path)`` entries; the path pins
    a geodesic when several exist.
    """

    def __init__(self, graph, y_molecules):
        self.graph = graph
        D = graph.space.dist
        self.pairs, self.paths = [], []
        for entry in y_molecules:
            u, v = int(entry[0]), int(entry[1])
            path = list(entry[2]) if len(entry) > 2 and entry[2] is not None else graph.shortest_path(u, v)
            if u == v:
                raise PreconditionError("u_i != v_i", repr(u))
            length = graph.path_length(path)
            if abs(length - D[u, v]) > METRIC_TOL * max(1.0, D[u, v]):
                raise PreconditionError("chosen paths are geodesics", f"({u}, {v})")
            self.pairs.append((u, v))
            self.paths.append(path)
        lengths = [D[u, v] for u, v in self.pairs]
        self.d = float(lengths[0])
        if max(lengths) - min(lengths) > METRIC_TOL * max(1.0, self.d):
            raise PreconditionError("all d(u_i, v_i) equal", repr(lengths))
        self._check_disjoint()
        self._levels = {}

    def _check_disjoint(self):
        edge_sets = [
            {self.graph.edge_between(a, b) for a, b in zip(p, p[1:])} for p in self.paths
        ]
        for i in range(len(self.paths)):
            for j in range(i + 1, len(self.paths)):
                allowed = set(self.pairs[i]) | set(self.pairs[j])
                shared = (set(self.paths[i]) & set(self.paths[j])) - allowed
                if shared or edge_sets[i] & edge_sets[j]:
                    raise PreconditionError(
                        "geodesics meet only at endpoints", f"geodesics {i} and {j} overlap")

    def disjoint_pairs(self):
        """Index pairs whose geodesic images do not meet at all."""
        out = []
        for i in range(len(self.paths)):
            for j in range(i + 1, len(self.paths)):
                if not set(self.paths[i]) & set(self.paths[j]):
                    out.append((i, j))
        return out

    def level(self, k):
        if k not in self._levels:
            g = self.graph
            samples, paths = [], []
            for (u, v), path in zip(self.pairs, self.paths):
                g, ids, full = sample_geodesic(g, u, v, k, path=path)
                samples.append(ids)
                paths.append(full)
            space = g.space
            nus = [zigzag_element(space, s) for s in samples]
            n = len(nus)
            acc = {}
            for nu in nus:
                for p, c in nu.coeffs.items():
                    acc[p] = acc.get(p, 0.0) + c / n
            mu = FreeElement(space, acc)
            y = molecule_sum(space, [(1.0 / n, u, v) for u, v in self.pairs])
            self._levels[k] = ZigzagLevel(k, g, space, samples, paths, nus, mu, y, self.d,
                                          list(self.pairs))
        return self._levels[k]


def make_zigzag(graph, y_molecules, k):
    return ZigzagFamily(graph, y_molecules).level(k)


def zigzag_witness(level, family=None):
    """Alternating 0 / 2^-k d on the samples, McShane-extended with L = 1."""
    D = level.space.dist
    step = level.d / 2 ** level.k
    if family is not None:
        pairs = family.disjoint_pairs()
    else:
        pairs = [(i, j) for i in range(len(level.paths)) for j in range(i + 1, len(level.paths))
                 if not set(level.paths[i]) & set(level.paths[j])]
    for i, j in pairs:
        gap = D[np.ix_(level.paths[i], level.paths[j])].min()
        if not gap > step:
            raise PreconditionError(
                "disjoint geodesics are separated by more than 2^-k d",
                f"geodesics {i}, {j}: distance {gap!r} vs {step!r}")
    partial = alternating_partial(level.samples, step)
    return mcshane_extend(level.space, partial, 1.0, tol=LIP_TOL)


class PiecewiseLinearTest:
    """Piecewise-linear function of the geodesic parameter t in [0, 1].

    Evaluated on the samples of geodesic ``i`` only; ``lip`` is the slope
    bound in t and ``breakpoints`` the number of interior knots.
    """

    def __init__(self, knots, values, name=None):
        self.knots = np.asarray(knots, dtype=float)
        self.vals = np.asarray(values, dtype=float)
        if self.knots[0] != 0.0 or self.knots[-1] != 1.0 or np.any(np.diff(self.knots) <= 0):
            raise PreconditionError("knots increase from 0 to 1")
        self.breakpoints = len(self.knots) - 2
        self.lip = float(np.max(np.abs(np.diff(self.vals) / np.diff(self.knots))))
        self.name = name or f"pl{self.breakpoints}"

    def values(self, level, i):
        out = np.zeros(len(level.space))
        samples = level.samples[i]
        t = np.arange(len(samples)) / (len(samples) - 1)
        out[samples] = np.interp(t, self.knots, self.vals)
        return out

    def bound(self, k, d):
        return 2 * (self.breakpoints + 1) * self.lip * 2.0 ** -k / d

    def _at(self, t):
        knots = [Fraction(x) for x in self.knots]
        vals = [Fraction(x) for x in self.vals]
        for a, b, fa, fb in zip(knots, knots[1:], vals, vals[1:]):
            if t <= b:
                return fa + (fb - fa) * (t - a) / (b - a)
        return vals[-1]

    def exact_pairing(self, k, d):
        """``f(nu_k^i)`` in rational arithmetic along an ideal geodesic of length d.

        Steps are d 2^-k, so the pairing is (1/d) sum_j (-1)^j (f(t_{j-1}) - f(t_j)).
        """
        m = 2 ** k
        f = [self._at(Fraction(j, m)) for j in range(m + 1)]
        total = sum((-1) ** j * (f[j - 1] - f[j]) for j in range(1, m + 1))
        return total / Fraction(d)


class DistanceTest:
    """``p -> d(p, vertex)`` for a vertex of the original graph."""

    def __init__(self, vertex, name=None):
        self.vertex = int(vertex)
        self.name = name or f"dist{vertex}"

    def values(self, level, i):
        return np.array(level.space.dist[self.vertex])

    def bound(self, k, d):
        return None


def weak_null_trend(family, test_functions, k_range):
    """Rows ``{k, test, i, value, bound}`` with value = |f(nu_k^i)|."""
    rows = []
    for k in k_range:
        lev = family.level(k)
        for tf in test_functions:
            for i, nu in enumerate(lev.nus):
                val = abs(pairing(tf.values(lev, i), nu))
                rows.append({"k": k, "test": tf.name, "i": i, "value": val,
                             "bound": tf.bound(k, lev.d)})
    return rows


# ---------------------------------------------------------------- strip gluing


@dataclass
class StripSchedule:
    deltas: Sequence[float]
    functions: Sequence[LipFunction]

    def __post_init__(self):
        d = list(self.deltas)
        if len(d) != len(self.functions) + 1:
            raise PreconditionError("one more delta than strip functions",
                                    f"{len(d)} deltas, {len(self.functions)} functions")
        if any(x <= 0 for x in d):
            raise PreconditionError("deltas positive")
        for a, b in zip(d, d[1:]):
            if not a > 2 * b:
                raise PreconditionError("delta_i > 2 delta_{i+1}", f"{a!r}, {b!r}")

    def strip(self, space, i):
        """Ids with 2 delta_{i+1} <= height < delta_i (i is 0-based)."""
        h = heights(space)
        return np.flatnonzero((h >= 2 * self.deltas[i + 1]) & (h < self.deltas[i]))


def glue_strips(ladder_space, schedule, L=3.0):
    """f = f_i on strip i, 0 at the base, McShane-extended with constant L."""
    _require_ladder(ladder_space)
    space = ladder_space
    h = heights(space)
    partial = {space.base: 0.0}
    for i, f in enumerate(schedule.functions):
        if f.lip > 1 + LIP_TOL:
            raise PreconditionError("strip functions are 1-Lipschitz", f"strip {i}: {f.lip!r}")
        low = h <= 2 * schedule.deltas[i + 1]
        if np.any(np.abs(f.values[low]) > LIP_TOL):
            raise PreconditionError("f_i vanishes at heights <= 2 delta_{i+1}", f"strip {i}")
        for p in schedule.strip(space, i):
            partial[int(p)] = float(f.values[p])
    return mcshane_extend(space, partial, L, tol=LIP_TOL)


# ---------------------------------------------------------------- non-WASQ pipeline


@dataclass
class NonWasqReport:
    deltas: list
    candidate_heights: list
    lip: float
    rows: list
    min_ratio: float
    space_size: int

    def to_dict(self):
        return {
            "deltas": self.deltas,
            "candidate_heights": self.candidate_heights,
            "lip_constant": self.lip,
            "rows": self.rows,
            "min_normalized_pairing": self.min_ratio,
            "space_size": self.space_size,
        }


def nonwasq_certificate(n_strips=5, k=3, ratio=4):
    """Glued functional for rung zigzags under the schedule delta_i = ratio^-i.

    Candidate i is the rung zigzag at height 3/4 delta_i, inserted as an extra
    rung because no dyadic rung lies strictly inside (2 delta_{i+1}, delta_i)
    when ratio = 4.
    """
    deltas = [float(ratio) ** -i for i in range(1, n_strips + 2)]
    cand_h = [0.75 * d for d in deltas[:-1]]
    n_levels = int(np.ceil(-np.log2(2 * deltas[-1]))) + 1
    space = build_ladder(n_levels, 2 ** k, 4, extra_heights=[2 * d for d in deltas],
                         extra_rungs=cand_h, validate=False)
    functions, cands, rows = [], [], []
    for i in range(n_strips):
        mu, samples = rung_zigzag(space, cand_h[i], k)
        witness = mcshane_extend(space, alternating_partial([samples], 2.0 ** -k), 1.0, tol=LIP_TOL)
        nu = decompose(space, mu)
        eps_i = 4 * deltas[i]
        f_i = flatten(space, nu, witness, eps_i, 2 * deltas[i + 1])
        functions.append(f_i)
        cands.append((mu, nu))
    glued = glue_strips(space, StripSchedule(deltas, functions))
    ratios = []
    for i, (mu, nu) in enumerate(cands):
        nu_norm = norm(space, nu.as_element()).value
        val = pairing(glued, mu)
        bound = (nu_norm - 4 * deltas[i] - 4 * deltas[i + 1]) / (1 + 4 * deltas[i] + 4 * deltas[i + 1]) - deltas[i]
        ratios.append(val / glued.lip)
        rows.append({"i": i + 1, "delta": deltas[i], "height": cand_h[i], "norm_nu": nu_norm,
                     "pairing": val, "bound": bound, "normalized": val / glued.lip,
                     "holds": bool(val > bound)})
    return NonWasqReport(deltas, cand_h, glued.lip, rows, min(ratios), len(space))
