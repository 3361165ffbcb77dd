import numpy as np
import pytest

from lipfree.errors import PreconditionError, ResolutionError
from lipfree.experiments import make_rng, ssd2p_suite
from lipfree.free_space import FreeElement, norm, pairing
from lipfree.lip_func import LipFunction
from lipfree.metric_core import interval_space
from lipfree.ssd2p import (
    anchored_interval,
    ball_hitting_y,
    ball_masses,
    build_instance,
    glue_g,
    inner_approximant,
    random_slice_point,
    random_y,
    refute,
)


@pytest.fixture(scope="module")
def setup():
    eps = 1 / 8
    space, anchors = anchored_interval(32, eps)
    return space, build_instance(space, anchors, 1.0, eps)


def test_instance_geometry(setup):
    space, inst = setup
    assert inst.n == 32
    assert inst.r == pytest.approx(inst.eps * inst.R / 2)
    for i in range(inst.n):
        assert inst.cores[i] <= inst.balls[i]
        assert inst.slices[i].norm_f >= 1 - inst.eps / 4
    seen = set()
    for b in inst.balls:
        assert not seen & b
        seen |= b


def test_instance_preconditions():
    space, anchors = anchored_interval(8, 1 / 8)
    with pytest.raises(PreconditionError):
        build_instance(space, anchors, 1.0, 1 / 8)  # 4 d / n = 1/2 > eps
    with pytest.raises(PreconditionError):
        build_instance(space, anchors[:1] * 2, 1.0, 1 / 8)


def test_coarse_space_rejected():
    space = interval_space(np.linspace(0, 1, 69))
    with pytest.raises(ResolutionError):
        build_instance(space, list(range(1, 69, 2)), 1.0, 0.15)


def test_slice_points_are_in_slices(setup):
    space, inst = setup
    rng = make_rng(3)
    for i in range(0, inst.n, 5):
        x = random_slice_point(space, inst, i, rng)
        assert inst.slices[i].contains(x)


def test_inner_approximant(setup):
    space, inst = setup
    rng = make_rng(4)
    x = random_slice_point(space, inst, 7, rng)
    z, dist = inner_approximant(space, inst, 7, x)
    assert dist < 2 * inst.eps
    assert set(z.support) <= inst.cores[7] | {space.base}


def test_glue_g_properties(setup):
    space, inst = setup
    rng = make_rng(5)
    y = random_y(space, rng, eps=inst.eps)
    f = norm(space, y.as_element()).potentials * (1 - inst.eps)
    g = glue_g(space, inst, 2, f)
    assert g.lip <= 1 + 1e-9
    outside = np.array([q not in inst.balls[2] for q in range(len(space))])
    np.testing.assert_allclose(g.values[outside], f.values[outside])


def test_glue_g_rejects_large_f(setup):
    space, inst = setup
    with pytest.raises(PreconditionError):
        glue_g(space, inst, 0, LipFunction(space, space.coords[:, 0]))


def test_refutation_random_y(setup):
    space, inst = setup
    rng = make_rng(6)
    y = random_y(space, rng, eps=inst.eps)
    xs = [random_slice_point(space, inst, i, rng) for i in range(inst.n)]
    rep = refute(space, inst, y, xs)
    assert all(rep.checks.values()), rep.checks
    assert rep.norm_x_plus_dy > 1


def test_refutation_ball_hitting_y(setup):
    space, inst = setup
    rng = make_rng(7)
    y = ball_hitting_y(space, inst, rng)
    assert max(ball_masses(inst, y)) == pytest.approx(2 / inst.n)
    xs = [random_slice_point(space, inst, i, rng) for i in range(inst.n)]
    rep = refute(space, inst, y, xs)
    assert rep.j_mass > 0
    assert all(rep.checks.values()), rep.checks


def test_refute_rejects_short_y(setup):
    space, inst = setup
    rng = make_rng(8)
    y = FreeElement(space, {5: 0.1})
    xs = [random_slice_point(space, inst, i, rng) for i in range(inst.n)]
    with pytest.raises(PreconditionError):
        refute(space, inst, y, xs)


def test_scaling_invariance():
    # scaling the metric scales R and r but keeps every normalized quantity
    eps = 1 / 8
    space, anchors = anchored_interval(32, eps)
    big = space.scaled(5.0)
    a = build_instance(space, anchors, 1.0, eps)
    b = build_instance(big, anchors, 1.0, eps)
    assert b.R == pytest.approx(5 * a.R)
    assert b.r == pytest.approx(5 * a.r)
    assert [s.norm_f for s in a.slices] == pytest.approx([s.norm_f for s in b.slices])
    rng1, rng2 = make_rng(9), make_rng(9)
    ya = ball_hitting_y(space, a, rng1)
    yb = ball_hitting_y(big, b, rng2)
    assert norm(space, ya.as_element()).value == pytest.approx(norm(big, yb.as_element()).value)


def test_suite_half():
    inst, reps = ssd2p_suite(0.5, trials=2, seed=1)
    assert all(all(r.checks.values()) for r in reps)
