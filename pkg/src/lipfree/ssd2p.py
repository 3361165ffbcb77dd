"""Refuting the symmetric strong diameter 2d property on a discretized space.

Given n anchors with disjoint balls B_i = B(p_i, R), the slices are cut by
the bumps f_i = max(0, r - d(., p_i)) with r = eps R / 2. For any y of norm
at least 1 - eps and any choice x_i in S_i, some index i has
||x_i + d y|| > 1, so x_i + d y leaves the unit ball and hence S_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ResolutionError, StructureError
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
from .lip_func import LipFunction, bump, mcshane_extend
from .metric_core import interval_space, segment

LIP_TOL = 1e-9


@dataclass
class SliceSpec:
    f: LipFunction
    eps: float
    norm_f: float

    def contains(self, element, value=None):
        """Membership test; ``value`` may carry a precomputed norm."""
        n = norm(element.space, element).value if value is None else value
        return n <= 1 + LIP_TOL and pairing(self.f, element) > self.norm_f - self.eps


@dataclass
class Ssd2pInstance:
    space: object
    d_param: float
    eps: float
    anchors: list
    R: float
    r: float
    balls: list
    cores: list
    slices: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.anchors)


def build_instance(space, anchors, d_param, eps):
    """Radii, balls and bump slices for the given anchors."""
    anchors = [int(a) for a in anchors]
    n = len(anchors)
    if len(set(anchors)) != n:
        raise PreconditionError("anchors distinct")
    if space.base in anchors:
        raise PreconditionError("anchors avoid the base point")
    if not 0 < d_param <= 1:
        raise PreconditionError("d in (0, 1]", repr(d_param))
    if not 0 < eps < d_param / 6:
        raise PreconditionError("eps in (0, d/6)", f"eps={eps!r}, d={d_param!r}")
    if not 4 * d_param / n <= eps:
        raise PreconditionError("4 d / n <= eps", f"n={n}, d={d_param!r}, eps={eps!r}")
    D = space.dist
    nodes = anchors + [space.base]
    sub = D[np.ix_(nodes, nodes)]
    R = 0.25 * sub[~np.eye(len(nodes), dtype=bool)].min()
    r = eps * R / 2
    balls = [set(np.flatnonzero(D[p] <= R).tolist()) for p in anchors]
    cores = [set(np.flatnonzero(D[p] <= r).tolist()) for p in anchors]
    seen = set()
    for i, b in enumerate(balls):
        if seen & b:
            raise StructureError(f"ball {i} meets an earlier ball")
        seen |= b
    inst = Ssd2pInstance(space, d_param, eps, anchors, R, r, balls, cores)
    for i, p in enumerate(anchors):
        f = bump(space, p, r)
        if f.lip < 1 - eps / 4:
            raise ResolutionError(
                f"bump {i} has Lipschitz constant {f.lip!r} < 1 - eps/4; refine near anchor {p}")
        if len(cores[i]) < 2:
            raise ResolutionError(f"no point within r of anchor {p}; slice witness missing")
        inst.slices.append(SliceSpec(f, eps, f.lip))
    return inst


def glue_g(space, instance, i, f):
    """f off B_i, the shifted bump on C_i, McShane (L = 1) in between."""
    if f.lip > 1 - instance.eps + LIP_TOL:
        raise PreconditionError("||f|| <= 1 - eps", repr(f.lip))
    p = instance.anchors[i]
    fi = instance.slices[i].f
    shift = f.values[p] - fi.values[p]
    partial = {}
    inside = instance.balls[i]
    for q in range(len(space)):
        if q not in inside:
            partial[q] = float(f.values[q])
    for q in instance.cores[i]:
        partial[q] = float(fi.values[q] + shift)
    return mcshane_extend(space, partial, 1.0, tol=LIP_TOL)


def as_decomposition(space, y):
    if isinstance(y, MolecularDecomposition):
        return y
    if isinstance(y, FreeElement):
        return decompose(space, y)
    return MolecularDecomposition.uniform(space, y)


def ball_masses(instance, y_dec):
    """Weight of the molecules of y touching each ball."""
    out = []
    for ball in instance.balls:
        out.append(sum(w for w, m in y_dec.terms if m.u in ball or m.v in ball))
    return out


def inner_approximant(space, instance, i, x):
    """Convex combination of molecules inside C_i close to x and in S_i.

    Returns ``(z, distance)`` for the best candidate, or raises
    ResolutionError if none lies within 2 eps of x.
    """
    core = instance.cores[i]
    sl = instance.slices[i]
    D = space.dist
    dec = decompose(space, x)
    cands = []

    inner = [(w, m) for w, m in dec.terms if m.u in core and m.v in core]
    if inner:
        cands.append(inner)

    clipped = []
    for w, m in dec.terms:
        a, b = m.u, m.v
        if a in core and b in core:
            clipped.append((w, m))
        elif a in core or b in core:
            keep, far = (a, b) if a in core else (b, a)
            on_seg = [c for c in segment(space, keep, far) if c in core and c != keep]
            if on_seg:
                c = max(on_seg, key=lambda q: (D[keep, q], -q))
                mol = Molecule(keep, c) if keep == a else Molecule(c, keep)
                clipped.append((w, mol))
    if clipped:
        cands.append(clipped)

    p = instance.anchors[i]
    neighbours = sorted(core - {p}, key=lambda q: (D[p, q], q))
    if neighbours:
        cands.append([(1.0, Molecule(p, neighbours[0]))])

    best = None
    for terms in cands:
        total = sum(w for w, _ in terms)
        if total <= 0:
            continue
        z = molecule_sum(space, [(w / total, m.u, m.v) for w, m in terms])
        if not sl.contains(z, value=min(1.0, norm(space, z).value)):
            continue
        dist = norm(space, z - x).value
        if best is None or dist < best[1]:
            best = (z, dist)
    if best is None or not best[1] < 2 * instance.eps:
        got = "none" if best is None else repr(best[1])
        raise ResolutionError(
            f"no approximant of x inside C_{i} within 2 eps (best {got}); use a finer space")
    return best


@dataclass
class RefutationReport:
    index: int
    anchor: int
    j_terms: list
    j_mass: float
    pigeonhole_bound: float
    norm_y: float
    norm_f_i: float
    f_minus_g_y: float
    four_over_n: float
    d_g_y: float
    d_minus_3eps: float
    g_z: float
    z_lower: float
    one_plus_d_minus_4eps: float
    dist_x_z: float
    analytic_lower: float
    norm_x_plus_dy: float
    one_plus_d_minus_6eps: float
    lip_g: float
    verdict: bool
    checks: dict

    def to_dict(self):
        return dict(self.__dict__)


def refute(space, instance, y, x_per_slice):
    """Find i with ||x_i + d y|| > 1, recording every intermediate bound."""
    inst = instance
    d, eps, n = inst.d_param, inst.eps, inst.n
    if len(x_per_slice) != n:
        raise PreconditionError("one x per slice", f"{len(x_per_slice)} for {n} slices")
    y_dec = as_decomposition(space, y)
    y_el = y_dec.as_element()
    y_cert = norm(space, y_el)
    if y_cert.value < 1 - eps - LIP_TOL or y_cert.value > 1 + LIP_TOL:
        raise PreconditionError("1 - eps <= ||y|| <= 1", repr(y_cert.value))
    for k, x in enumerate(x_per_slice):
        if not inst.slices[k].contains(x):
            raise PreconditionError("x_i lies in S_i", f"slice {k}")

    masses = ball_masses(inst, y_dec)
    i = int(np.argmin(masses))
    j_mass = float(masses[i])
    ball = inst.balls[i]
    j_terms = [t for t, (w, m) in enumerate(y_dec.terms) if m.u in ball or m.v in ball]
    pigeon = 2 * y_dec.total_weight / n

    x = x_per_slice[i]
    z, dist_xz = inner_approximant(space, inst, i, x)
    f = y_cert.potentials * (1 - eps)
    g = glue_g(space, inst, i, f)
    f_y = pairing(f, y_el)
    g_y = pairing(g, y_el)
    g_z = pairing(g, z)
    z_lower = g_z + d * g_y
    analytic = z_lower - dist_xz
    engine = norm(space, x + d * y_el).value
    checks = {
        "j_mass_pigeonhole": j_mass <= pigeon + LIP_TOL,
        "f_minus_g_le_4_over_n": f_y - g_y <= 4 / n + LIP_TOL,
        "d_g_y_ge_d_minus_3eps": d * g_y >= d - 3 * eps - LIP_TOL,
        "g_lipschitz": g.lip <= 1 + LIP_TOL,
        "z_in_slice": inst.slices[i].contains(z),
        "dist_x_z_lt_2eps": dist_xz < 2 * eps,
        "z_bound": z_lower >= 1 + d - 4 * eps - (1 - inst.slices[i].norm_f) - 1e-6,
        "analytic_le_engine": analytic <= engine + 1e-6,
        "engine_ge_1_plus_d_minus_6eps": engine >= 1 + d - 6 * eps - 1e-3,
        "outside_unit_ball": engine > 1,
    }
    return RefutationReport(
        index=i, anchor=inst.anchors[i], j_terms=j_terms, j_mass=j_mass,
        pigeonhole_bound=pigeon, norm_y=y_cert.value, norm_f_i=inst.slices[i].norm_f,
        f_minus_g_y=f_y - g_y, four_over_n=4 / n, d_g_y=d * g_y, d_minus_3eps=d - 3 * eps,
        g_z=g_z, z_lower=z_lower, one_plus_d_minus_4eps=1 + d - 4 * eps, dist_x_z=dist_xz,
        analytic_lower=analytic, norm_x_plus_dy=engine, one_plus_d_minus_6eps=1 + d - 6 * eps,
        lip_g=g.lip, verdict=bool(engine > 1), checks=checks,
    )


# ---------------------------------------------------------------- test scenarios


def anchored_interval(n_anchors, eps, fine=8, coarse=3, length=1.0):
    """Points of [0, length]: base at 0, anchors at k * s, fine near anchors.

    Each anchor gets ``fine`` points per side inside C_i, four per side in
    B_i \\ C_i and ``coarse`` points in every gap between balls. Returns
    ``(space, anchor_ids)``.
    """
    s = length / (n_anchors + 1)
    R = s / 4
    r = eps * R / 2
    pos = {0.0}
    anchors_pos = [s * (k + 1) for k in range(n_anchors)]
    for p in anchors_pos:
        pos.add(p)
        for j in range(1, fine + 1):
            pos.update((p - r * j / fine, p + r * j / fine))
        for q in (0.25, 0.5, 0.75, 1.0):
            off = r + (R - r) * q
            pos.update((p - off, p + off))
    edges = [0.0] + anchors_pos + [length]
    for a, b in zip(edges, edges[1:]):
        for j in range(1, coarse + 1):
            pos.add(a + (b - a) * j / (coarse + 1))
    pos.add(length)
    arr = np.array(sorted(pos))
    space = interval_space(arr, base_index=0)
    ids = [int(np.argmin(np.abs(arr - p))) for p in anchors_pos]
    return space, ids


def random_y(space, rng, m=12, flips=0, eps=None, tries=100):
    """Uniform average of m molecules, all pointing away from the base except ``flips``.

    With ``eps`` given, redraws until the norm is at least 1 - eps.
    """
    D = space.dist
    b = space.base
    n = len(space)
    for _ in range(tries):
        pairs = []
        while len(pairs) < m:
            u, v = (int(t) for t in rng.choice(n, size=2, replace=False))
            if D[u, b] < D[v, b]:
                u, v = v, u
            if len(pairs) < flips:
                u, v = v, u
            pairs.append((u, v))
        dec = MolecularDecomposition.uniform(space, pairs)
        if eps is None or norm(space, dec.as_element()).value >= 1 - eps:
            return dec
    raise PreconditionError("could not draw y with norm >= 1 - eps", f"{tries} tries")


def random_slice_point(space, instance, i, rng, t_max=None):
    """Mostly molecules m_{p_i w} inside C_i plus a small arbitrary molecule."""
    eps = instance.eps
    t_max = eps / 4 if t_max is None else t_max
    p = instance.anchors[i]
    core = sorted(instance.cores[i] - {p})
    k = int(rng.integers(1, min(3, len(core)) + 1))
    ws = [int(w) for w in rng.choice(core, size=k, replace=False)]
    t = float(rng.uniform(0, t_max))
    a, b = (int(q) for q in rng.choice(len(space), size=2, replace=False))
    terms = [((1 - t) / k, p, w) for w in ws] + [(t, a, b)]
    return molecule_sum(space, terms)


def ball_hitting_y(space, instance, rng):
    """One molecule between each pair of consecutive balls (cyclically), oriented outward.

    Every ball is touched by exactly two molecules, so each ball mass is 2/n.
    """
    D = space.dist
    b = space.base
    n = instance.n
    pairs = []
    for i in range(n):
        u = int(rng.choice(sorted(instance.balls[(i + 1) % n])))
        v = int(rng.choice(sorted(instance.balls[i])))
        if D[u, b] < D[v, b]:
            u, v = v, u
        pairs.append((u, v))
    return MolecularDecomposition.uniform(space, pairs)
