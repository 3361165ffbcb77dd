"""Seeded verification suites shared by the CLI and the acceptance tests."""

from __future__ import annotations

import numpy as np

from .free_space import FreeElement, MolecularDecomposition, Molecule, lp_norm, norm, pairing
from .lip_func import mcshane_extend
from .metric_core import MetricGraph, build_ladder, euclidean_space, heights
from .squareness import DistanceTest, ZigzagFamily, zigzag_witness
from .ssd2p import anchored_interval, build_instance, random_slice_point, random_y, refute

RNG_NAME = "numpy.PCG64"


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def random_space(rng, n):
    """Euclidean cloud or random connected graph metric on n points."""
    if rng.random() < 0.5:
        return euclidean_space(rng.random((n, 2)))
    edges = [(i, int(rng.integers(0, i)), float(rng.uniform(0.1, 1.0))) for i in range(1, n)]
    for _ in range(n):
        u, v = (int(t) for t in rng.choice(n, size=2, replace=False))
        edges.append((u, v, float(rng.uniform(0.1, 1.0))))
    return MetricGraph(n, edges).space


def random_element(rng, space):
    n = len(space)
    k = int(rng.integers(1, n + 1))
    pts = rng.choice(n, size=k, replace=False)
    return FreeElement(space, {int(p): float(c) for p, c in zip(pts, rng.normal(size=k))})


def duality_suite(count=500, seed=0, n_min=6, n_max=40):
    """Flow value vs dense-simplex value vs dual pairing on random instances."""
    rng = make_rng(seed)
    worst = {"primal_lp_gap": 0.0, "primal_dual_gap": 0.0, "lip_excess": 0.0, "conservation": 0.0}
    for _ in range(count):
        space = random_space(rng, int(rng.integers(n_min, n_max + 1)))
        el = random_element(rng, space)
        cert = norm(space, el)
        lp = lp_norm(space, el)
        div = cert.flow_divergence(space)
        cons = max((abs(div[p] - c) for p, c in el.coeffs.items()), default=0.0)
        worst["primal_lp_gap"] = max(worst["primal_lp_gap"], abs(cert.value - lp))
        worst["primal_dual_gap"] = max(worst["primal_dual_gap"], abs(cert.value - pairing(cert.potentials, el)))
        worst["lip_excess"] = max(worst["lip_excess"], cert.potentials.lip - 1.0)
        worst["conservation"] = max(worst["conservation"], cons)
    ok = (worst["primal_lp_gap"] <= 1e-9 and worst["primal_dual_gap"] <= 1e-9
          and worst["lip_excess"] <= 1e-9 and worst["conservation"] <= 1e-9)
    return {"suite": "duality", "count": count, "seed": seed, "rng": RNG_NAME, "worst": worst, "ok": ok}


def zigzag_rows(family, k_range, tests=None, engine=True):
    """One row per level: norms of mu_k and y +- mu_k, largest test pairing."""
    if tests is None:
        tests = [DistanceTest(v) for v in range(family.graph.n_vertices)]
    rows = []
    for k in k_range:
        lev = family.level(k)
        w = zigzag_witness(lev, family)
        witness = pairing(w, lev.mu) / w.lip
        row = {"k": k, "witness_lower": witness, "weight_upper": 1.0}
        if engine:
            row["norm_mu"] = norm(lev.space, lev.mu).value
            row["norm_y_plus"] = norm(lev.space, lev.y + lev.mu).value
            row["norm_y_minus"] = norm(lev.space, lev.y - lev.mu).value
        else:
            row["norm_mu"] = witness
        row["max_test_pairing"] = max(
            abs(pairing(t.values(lev, i), nu)) for t in tests for i, nu in enumerate(lev.nus))
        rows.append(row)
    return rows


def standard_graphs():
    """Unit interval, 3-spoke star and theta graph with their y-molecules."""
    interval = MetricGraph(["a", "b"], [(0, 1, 1.0)], base=0)
    star = MetricGraph(["c", "l1", "l2", "l3"], [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], base=0)
    theta = MetricGraph(["A", "B", "m1", "m2", "m3"],
                        [(0, 2, 0.5), (2, 1, 0.5), (0, 3, 0.25), (3, 1, 0.75), (0, 4, 0.75), (4, 1, 0.25)],
                        base=0)
    return {
        "interval": (interval, [(0, 1)]),
        "star": (star, [(1, 0), (2, 0), (3, 0)]),
        "theta": (theta, [(0, 1, [0, 2, 1]), (0, 1, [0, 3, 1]), (0, 1, [0, 4, 1])]),
    }


def ssd2p_suite(d_param, eps=None, n_anchors=32, trials=4, seed=0, fine=8, m=12):
    """Refutation reports for seeded (y, x_1..x_n) draws on an anchored interval."""
    eps = d_param / 8 if eps is None else eps
    rng = make_rng(seed)
    space, anchors = anchored_interval(n_anchors, eps, fine=fine)
    inst = build_instance(space, anchors, d_param, eps)
    reports = []
    for t in range(trials):
        y = random_y(space, rng, m=m, flips=t % 3, eps=eps)
        xs = [random_slice_point(space, inst, i, rng) for i in range(inst.n)]
        reports.append(refute(space, inst, y, xs))
    return inst, reports


def flatten_instance(rng, ladder=None):
    """Random valid input ``(ladder, nu, g, eps, delta)`` for ``flatten``.

    nu is a convex combination of 1-3 molecules above a side height delta, g a
    norming functional of nu whose value at y is pulled as close to 0 as
    the Lipschitz condition allows, and eps sits just above |g(m_xy)|.
    """
    if ladder is None:
        n_levels = int(rng.integers(4, 7))
        ladder = build_ladder(n_levels, 8, 8, extra_heights=[2.0 ** -j for j in range(2, n_levels + 1)])
    h = heights(ladder)
    lows = sorted({float(t) for t in h if 0 < t < 0.25
                   and ladder.find((0.0, t)) is not None and ladder.find((1.0, t)) is not None})
    delta = float(rng.choice(lows))
    above = np.flatnonzero(h > delta)
    m = int(rng.integers(1, 4))
    w = rng.uniform(0.2, 1.0, m)
    w /= w.sum()
    terms = []
    for wi in w:
        u, v = (int(t) for t in rng.choice(above, size=2, replace=False))
        terms.append((float(wi), Molecule(u, v)))
    nu = MolecularDecomposition(ladder, terms)
    cert = norm(ladder, nu.as_element())
    ends = np.array(sorted(nu.endpoints()))
    gv = cert.potentials.values[ends]
    x, y = ladder.find((0.0, 0.0)), ladder.find((1.0, 0.0))
    D = ladder.dist
    lo = max(float(np.max(gv - D[ends, y])), -D[x, y])
    hi = min(float(np.min(gv + D[ends, y])), D[x, y])
    gy = min(max(0.0, lo), hi)
    partial = {int(p): float(val) for p, val in zip(ends, gv)}
    partial[x] = 0.0
    partial[y] = gy
    g = mcshane_extend(ladder, partial, 1.0, tol=1e-9)
    gxy = abs(gy) / D[x, y]
    eps = gxy + float(rng.uniform(0.01, 0.5))
    return ladder, nu, g, eps, delta
