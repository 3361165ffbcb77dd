import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from lipfree.simplex import UnboundedError, maximize
from lipfree.transport import solve_transport


def brute_force_max(c, A, b):
    """Best vertex of {A x <= b, x >= 0} by enumerating active sets."""
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = -np.inf
    for rows in itertools.combinations(range(m + n), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            best = max(best, c @ x)
    return best


@pytest.mark.parametrize("seed", range(25))
def test_simplex_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 6), rng.integers(2, 4)
    A = rng.uniform(0.1, 1.0, (m, n))
    b = rng.uniform(0.5, 2.0, m)
    c = rng.normal(size=n)
    res = maximize(c, A, b)
    assert res.value == pytest.approx(brute_force_max(c, A, b), abs=1e-10)
    assert np.all(A @ res.x <= b + 1e-10) and np.all(res.x >= -1e-12)


def test_simplex_degenerate_polytope():
    # many redundant constraints through the same vertex
    A = np.array([[1, 1], [1, 0], [0, 1], [2, 2], [1, 1]], dtype=float)
    b = np.array([1, 1, 1, 2, 1], dtype=float)
    assert maximize([1, 1], A, b).value == pytest.approx(1.0)


def test_simplex_unbounded():
    with pytest.raises(UnboundedError):
        maximize([1, 0], [[0, 1]], [1])


@pytest.mark.parametrize("seed", range(20))
def test_transport_matches_linprog(seed):
    rng = np.random.default_rng(seed)
    m, k = rng.integers(1, 7), rng.integers(1, 7)
    a = rng.uniform(0.1, 1, m)
    b = rng.uniform(0.1, 1, k)
    b *= a.sum() / b.sum()
    C = rng.uniform(0, 3, (m, k))
    res = solve_transport(a, b, C)
    A_eq = np.vstack([np.kron(np.eye(m), np.ones(k)), np.kron(np.ones(m), np.eye(k))])
    ref = linprog(C.ravel(), A_eq=A_eq, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert res.cost == pytest.approx(ref.fun, abs=1e-9)
    np.testing.assert_allclose(res.flow.sum(1), a, atol=1e-12)
    np.testing.assert_allclose(res.flow.sum(0), b, atol=1e-12)


def test_transport_potentials_certify():
    rng = np.random.default_rng(7)
    a, b = rng.uniform(0.1, 1, 5), rng.uniform(0.1, 1, 6)
    b *= a.sum() / b.sum()
    C = rng.uniform(0, 2, (5, 6))
    res = solve_transport(a, b, C)
    red = C + res.potential_src[:, None] - res.potential_snk[None, :]
    assert red.min() >= -1e-12
    assert np.all(np.abs(red[res.flow > 1e-12]) < 1e-12)


def test_transport_rejects_unbalanced():
    with pytest.raises(ValueError):
        solve_transport([1.0], [2.0], [[1.0]])
