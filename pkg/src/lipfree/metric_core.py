"""Finite metric spaces, the ladder space, metric graphs and geodesic sampling.

Point ids are integer indices into ``FiniteMetricSpace.points``; labels and
coordinates are metadata.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import DisconnectedError, PreconditionError, StructureError

METRIC_TOL = 1e-12


@dataclass(frozen=True)
class Point:
    id: int
    label: str | None = None
    coords: tuple[float, float] | None = None


class FiniteMetricSpace:
    """A finite point set with a dense distance matrix and a base point.

    Instances are treated as immutable; ``dist`` is made read-only.
    """

    def __init__(self, points, dist, base=0, kind="generic", meta=None):
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise StructureError(f"distance matrix must be square, got shape {dist.shape}")
        n = dist.shape[0]
        pts = []
        for i, p in enumerate(points):
            if isinstance(p, Point):
                pts.append(Point(i, p.label, p.coords))
            else:
                pts.append(Point(i, *p) if isinstance(p, tuple) else Point(i, p))
        if len(pts) != n:
            raise StructureError(f"{len(pts)} points but {n}x{n} distance matrix")
        if not 0 <= base < n:
            raise StructureError(f"base {base} out of range")
        dist.setflags(write=False)
        self.points = tuple(pts)
        self.dist = dist
        self.base = int(base)
        self.kind = kind
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FiniteMetricSpace(n={len(self)}, base={self.base}, kind={self.kind!r})"

    def d(self, p, q):
        return float(self.dist[p, q])

    def same_as(self, other):
        return self is other or (
            isinstance(other, FiniteMetricSpace)
            and self.base == other.base
            and self.dist.shape == other.dist.shape
            and np.array_equal(self.dist, other.dist)
        )

    @property
    def coords(self):
        """(n, 2) array of coordinates; raises if any point lacks them."""
        if any(p.coords is None for p in self.points):
            raise StructureError("space has points without coordinates")
        return np.array([p.coords for p in self.points], dtype=float)

    def find(self, coords, tol=METRIC_TOL):
        """Id of the point with the given coordinates, or None."""
        c = np.asarray(coords, dtype=float)
        xy = self.coords
        hit = np.flatnonzero(np.all(np.abs(xy - c) <= tol, axis=1))
        return int(hit[0]) if hit.size else None

    def scaled(self, c):
        """The same points with every distance multiplied by ``c`` > 0."""
        if c <= 0:
            raise PreconditionError("scale factor must be positive", repr(c))
        return FiniteMetricSpace(self.points, self.dist * c, self.base, self.kind, self.meta)


@dataclass
class ValidationReport:
    nonsquare: bool = False
    nonzero_diagonal: list = field(default_factory=list)
    asymmetric_pairs: list = field(default_factory=list)
    nonpositive_pairs: list = field(default_factory=list)
    triangle_violations: list = field(default_factory=list)
    n_triangle_violations: int = 0

    @property
    def ok(self):
        return not (
            self.nonsquare
            or self.nonzero_diagonal
            or self.asymmetric_pairs
            or self.nonpositive_pairs
            or self.n_triangle_violations
        )

    def first_violation(self):
        for name in ("nonzero_diagonal", "asymmetric_pairs", "nonpositive_pairs", "triangle_violations"):
            items = getattr(self, name)
            if items:
                return name, items[0]
        return None

    def to_dict(self):
        return {
            "ok": self.ok,
            "nonzero_diagonal": self.nonzero_diagonal,
            "asymmetric_pairs": self.asymmetric_pairs,
            "nonpositive_pairs": self.nonpositive_pairs,
            "triangle_violations": self.triangle_violations,
            "n_triangle_violations": self.n_triangle_violations,
        }


def validate_metric(dist, tol=METRIC_TOL, max_report=100):
    """Check the metric axioms on a dense matrix.

    Triangle violations are reported as triples ``(i, j, k)`` meaning
    ``dist[i][k] > dist[i][j] + dist[j][k]``. At most ``max_report`` of each
    kind are listed; ``n_triangle_violations`` counts all of them.
    """
    D = np.asarray(dist, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise StructureError(f"distance matrix must be square, got shape {D.shape}")
    n = D.shape[0]
    rep = ValidationReport()
    scale = max(1.0, float(np.max(np.abs(D)))) if n else 1.0
    t = tol * scale

    diag = np.flatnonzero(np.abs(np.diag(D)) > t)
    rep.nonzero_diagonal = [int(i) for i in diag[:max_report]]
    iu, ju = np.triu_indices(n, 1)
    asym = np.abs(D[iu, ju] - D[ju, iu]) > t
    rep.asymmetric_pairs = [(int(a), int(b)) for a, b in zip(iu[asym], ju[asym])][:max_report]
    nonpos = (D[iu, ju] <= 0) | (D[ju, iu] <= 0)
    rep.nonpositive_pairs = [(int(a), int(b)) for a, b in zip(iu[nonpos], ju[nonpos])][:max_report]

    count = 0
    found = []
    for j in range(n):
        bad = D > D[:, j, None] + D[None, j, :] + t
        c = int(np.count_nonzero(bad))
        if c:
            count += c
            if len(found) < max_report:
                ii, kk = np.nonzero(bad)
                for i, k in zip(ii, kk):
                    if len(found) >= max_report:
                        break
                    found.append((int(i), j, int(k)))
    rep.triangle_violations = sorted(found)
    rep.n_triangle_violations = count
    return rep


def ladder_distance(a, b, c, e):
    """Ladder metric, vectorized over broadcastable coordinate arrays."""
    a, b, c, e = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, e)))
    same = b == e
    other = np.minimum(a + c, 2.0 - a - c) + np.abs(b - e)
    return np.where(same, np.abs(a - c), other)


def build_ladder(n_levels, rung_resolution, side_resolution, extra_heights=(),
                 extra_rungs=(), validate=True):
    """Finite model of the ladder space truncated at ``n_levels`` rungs.

    Rung points are ``(j / rung_resolution, 2**-n)`` for ``n = 1..n_levels``;
    side points are ``(0 or 1, j / (2 * side_resolution))``. ``extra_heights``
    adds side points at the given heights, ``extra_rungs`` adds whole rungs
    (at the rung resolution) at non-dyadic heights. The base is ``(0, 0)``.
    """
    if n_levels < 1:
        raise PreconditionError("n_levels >= 1", repr(n_levels))
    if rung_resolution < 2 or side_resolution < 2:
        raise PreconditionError("resolutions >= 2", f"{rung_resolution}, {side_resolution}")

    coords = [(0.0, 0.0), (1.0, 0.0)]
    rung_heights = [2.0 ** -n for n in range(1, n_levels + 1)]
    for h in extra_rungs:
        if not 0 < h <= 0.5:
            raise PreconditionError("extra rung height in (0, 1/2]", repr(h))
    for h in sorted(set(rung_heights) | {float(h) for h in extra_rungs}, reverse=True):
        coords.extend((j / rung_resolution, h) for j in range(rung_resolution + 1))
    side = {j / (2 * side_resolution) for j in range(side_resolution + 1)}
    for h in extra_heights:
        if not 0 <= h <= 0.5:
            raise PreconditionError("extra side height in [0, 1/2]", repr(h))
        side.add(float(h))
    for h in sorted(side):
        coords.extend([(0.0, h), (1.0, h)])

    seen = {}
    for c in coords:
        seen.setdefault(c, len(seen))
    xy = np.array(list(seen), dtype=float)
    D = ladder_distance(xy[:, None, 0], xy[:, None, 1], xy[None, :, 0], xy[None, :, 1])
    pts = [Point(i, None, (float(a), float(b))) for i, (a, b) in enumerate(xy)]
    space = FiniteMetricSpace(
        pts, D, base=0, kind="ladder",
        meta={
            "n_levels": n_levels,
            "rung_resolution": rung_resolution,
            "side_resolution": side_resolution,
            "extra_heights": [float(h) for h in extra_heights],
            "extra_rungs": [float(h) for h in extra_rungs],
        },
    )
    if validate:
        rep = validate_metric(D)
        if not rep.ok:
            raise StructureError(f"ladder failed metric validation: {rep.first_violation()}")
    return space


def segment(space, u, v, tol=METRIC_TOL):
    """Ids of points p with d(u,p) + d(v,p) <= d(u,v) + tol."""
    D = space.dist
    mask = D[u] + D[v] <= D[u, v] + tol
    return set(int(i) for i in np.flatnonzero(mask))


class MetricGraph:
    """Undirected graph with positive edge lengths and its shortest-path metric.

    ``edges`` is a list of ``(u, v, length)``; parallel edges are allowed.
    Instances are not mutated after construction; ``subdivide_path``
    returns a new graph.
    """

    def __init__(self, vertices, edges, base=0):
        if isinstance(vertices, int):
            vertices = [None] * vertices
        self.labels = list(vertices)
        n = len(self.labels)
        self.edges = []
        for u, v, length in edges:
            u, v, length = int(u), int(v), float(length)
            if not (0 <= u < n and 0 <= v < n):
                raise StructureError(f"edge ({u}, {v}) references unknown vertex")
            if u == v:
                raise StructureError(f"self-loop at {u}")
            if not length > 0:
                raise StructureError(f"edge ({u}, {v}) has non-positive length {length!r}")
            self.edges.append((u, v, length))
        self.base = int(base)
        self._space = None

    @property
    def n_vertices(self):
        return len(self.labels)

    def _shortest_edges(self):
        best = {}
        for idx, (u, v, length) in enumerate(self.edges):
            key = (min(u, v), max(u, v))
            if key not in best or length < self.edges[best[key]][2]:
                best[key] = idx
        return best

    def adjacency(self):
        n = self.n_vertices
        best = self._shortest_edges()
        rows, cols, vals = [], [], []
        for (u, v), idx in best.items():
            rows += [u, v]
            cols += [v, u]
            vals += [self.edges[idx][2]] * 2
        return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    @property
    def space(self):
        if self._space is None:
            n = self.n_vertices
            A = self.adjacency()
            ncomp, _ = connected_components(A, directed=False)
            if n and ncomp != 1:
                raise DisconnectedError(f"graph has {ncomp} connected components")
            D = shortest_path(A, method="D", directed=False)
            D = np.minimum(D, D.T)
            pts = [Point(i, lab) for i, lab in enumerate(self.labels)]
            self._space = FiniteMetricSpace(pts, D, base=self.base, kind="graph")
        return self._space

    def redundant_edges(self, tol=METRIC_TOL):
        """Edges strictly longer than the distance between their endpoints."""
        D = self.space.dist
        return [i for i, (u, v, length) in enumerate(self.edges) if length > D[u, v] + tol]

    def shortest_path(self, u, v):
        """A shortest vertex path from u to v (ties broken by vertex id)."""
        adj = {i: [] for i in range(self.n_vertices)}
        for (a, b), idx in self._shortest_edges().items():
            length = self.edges[idx][2]
            adj[a].append((b, length))
            adj[b].append((a, length))
        dist = {u: 0.0}
        prev = {}
        heap = [(0.0, u)]
        done = set()
        while heap:
            du, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            if x == v:
                break
            for y, length in sorted(adj[x]):
                nd = du + length
                if y not in dist or nd < dist[y] - METRIC_TOL:
                    dist[y] = nd
                    prev[y] = x
                    heapq.heappush(heap, (nd, y))
        if v not in done:
            raise DisconnectedError(f"no path between {u} and {v}")
        path = [v]
        while path[-1] != u:
            path.append(prev[path[-1]])
        return path[::-1]

    def edge_between(self, a, b):
        best = self._shortest_edges().get((min(a, b), max(a, b)))
        if best is None:
            raise StructureError(f"no edge between {a} and {b}")
        return best

    def path_length(self, path):
        return sum(self.edges[self.edge_between(a, b)][2] for a, b in zip(path, path[1:]))

    def subdivide_path(self, path, positions, tol=METRIC_TOL):
        """Insert vertices at arc-length ``positions`` along a vertex path.

        Returns ``(new_graph, ids, full_path)``: ids of the vertices sitting at
        each requested position (existing vertices are reused when a position
        coincides with one) and the refined vertex path.
        """
        labels = list(self.labels)
        edges = list(self.edges)
        removed = set()
        positions = list(positions)
        ids = [None] * len(positions)
        full = [path[0]]
        start = 0.0
        for a, b in zip(path, path[1:]):
            idx = self.edge_between(a, b)
            length = self.edges[idx][2]
            end = start + length
            chain = [a]
            offsets = [0.0]
            for pi, s in enumerate(positions):
                if ids[pi] is not None:
                    continue
                if abs(s - start) <= tol:
                    ids[pi] = a
                elif abs(s - end) <= tol:
                    ids[pi] = b
                elif start < s < end:
                    labels.append(None)
                    w = len(labels) - 1
                    ids[pi] = w
                    chain.append(w)
                    offsets.append(s - start)
            if len(chain) > 1:
                removed.add(idx)
                chain.append(b)
                offsets.append(length)
                for (p, q), (o1, o2) in zip(zip(chain, chain[1:]), zip(offsets, offsets[1:])):
                    edges.append((p, q, o2 - o1))
            full.extend(chain[1:] if len(chain) > 1 else [b])
            start = end
        if any(i is None for i in ids):
            raise PreconditionError("positions lie on the path", repr(positions))
        kept = [e for i, e in enumerate(edges) if i not in removed]
        return MetricGraph(labels, kept, base=self.base), ids, full


def sample_geodesic(graph, u, v, k, path=None):
    """Dyadic samples ``gamma(j / 2**k)`` of a geodesic from u to v.

    Returns ``(enlarged_graph, ids, full_path)``; ``ids`` has ``2**k + 1``
    entries starting at u and ending at v. ``path`` pins a particular
    geodesic when several exist.
    """
    if u == v:
        raise PreconditionError("u != v", repr(u))
    if k < 0:
        raise PreconditionError("k >= 0", repr(k))
    D = graph.space.dist
    if path is None:
        path = graph.shortest_path(u, v)
    else:
        path = list(path)
        if path[0] != u or path[-1] != v:
            raise PreconditionError("path runs from u to v", repr(path))
    total = graph.path_length(path)
    if abs(total - D[u, v]) > METRIC_TOL * max(1.0, D[u, v]):
        raise PreconditionError("path is a geodesic", f"length {total!r} vs d(u,v) {D[u, v]!r}")
    m = 2 ** k
    positions = [j * total / m for j in range(m + 1)]
    return graph.subdivide_path(path, positions)


def path_graph(positions, labels=None, base_index=0):
    """Metric graph on sorted real positions joined consecutively."""
    pos = np.asarray(positions, dtype=float)
    order = np.argsort(pos, kind="stable")
    if np.any(np.diff(pos[order]) <= 0):
        raise StructureError("positions must be distinct")
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    edges = [(int(order[i]), int(order[i + 1]), float(pos[order[i + 1]] - pos[order[i]]))
             for i in range(len(order) - 1)]
    return MetricGraph(labels if labels is not None else len(pos), edges, base=base_index)


def euclidean_space(xy: Sequence[Sequence[float]], base: int = 0) -> FiniteMetricSpace:
    xy = np.asarray(xy, dtype=float)
    D = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1))
    pts = [Point(i, None, tuple(map(float, c[:2])) if xy.shape[1] == 2 else None)
           for i, c in enumerate(xy)]
    return FiniteMetricSpace(pts, D, base=base, kind="euclidean")


def is_ladder(space):
    return getattr(space, "kind", None) == "ladder"


def heights(space):
    """Second coordinate of every point of a ladder space."""
    if not is_ladder(space):
        raise StructureError("not a ladder space")
    return space.coords[:, 1]


def check_points(space, ids: Iterable[int]):
    n = len(space)
    for i in ids:
        if not 0 <= int(i) < n:
            raise StructureError(f"point {i} not in space of size {n}")


def interval_space(positions, base_index=0):
    """Finite subset of the real line with d(s, t) = |s - t|."""
    pos = np.asarray(positions, dtype=float)
    if len(np.unique(pos)) != len(pos):
        raise StructureError("positions must be distinct")
    D = np.abs(pos[:, None] - pos[None, :])
    pts = [Point(i, None, (float(t), 0.0)) for i, t in enumerate(pos)]
    return FiniteMetricSpace(pts, D, base=base_index, kind="interval")
