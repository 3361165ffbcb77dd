import numpy as np
import pytest

from lipfree.errors import DegenerateMoleculeError, StructureError
from lipfree.experiments import make_rng, random_element, random_space
from lipfree.free_space import (
    FreeElement,
    MolecularDecomposition,
    Molecule,
    decompose,
    lp_norm,
    molecule_element,
    norm,
    pairing,
)
from lipfree.lip_func import LipFunction, projections
from lipfree.metric_core import build_ladder, euclidean_space, interval_space
from lipfree.squareness import m_xy


@pytest.fixture(scope="module")
def ladder():
    return build_ladder(6, 8, 4, extra_heights=[2.0 ** -i for i in range(1, 7)])


def test_base_coefficient_dropped():
    sp = interval_space([0.0, 2.0])
    el = molecule_element(sp, 1, 0)
    assert el.coeffs == {1: 0.5}


def test_ladder_m_xy_coefficients(ladder):
    assert m_xy(ladder).coeffs == {1: -1.0}


def test_degenerate_molecule():
    sp = interval_space([0.0, 1.0])
    with pytest.raises(DegenerateMoleculeError):
        molecule_element(sp, 1, 1)
    with pytest.raises(DegenerateMoleculeError):
        Molecule(2, 2)


def test_molecules_have_unit_norm(rng):
    sp = euclidean_space(rng.random((15, 2)))
    for _ in range(50):
        u, v = rng.choice(15, size=2, replace=False)
        assert norm(sp, molecule_element(sp, int(u), int(v))).value == pytest.approx(1.0, abs=1e-12)


def test_dirac_norm_is_distance_to_base(rng):
    sp = euclidean_space(rng.random((8, 2)))
    for p in range(1, 8):
        assert norm(sp, FreeElement.dirac(sp, p)).value == pytest.approx(sp.dist[p, 0])


@pytest.mark.parametrize("k", range(1, 7))
def test_two_delta_molecule_distance(ladder, k):
    delta = 2.0 ** -k
    u, v = ladder.find((0.0, delta)), ladder.find((1.0, delta))
    el = m_xy(ladder) - molecule_element(ladder, u, v)
    assert norm(ladder, el).value == pytest.approx(2 * delta, abs=1e-9)


@pytest.mark.parametrize("seed", range(15))
def test_flow_matches_simplex_oracle(seed):
    rng = make_rng(seed)
    sp = random_space(rng, 6)
    el = random_element(rng, sp)
    assert norm(sp, el).value == pytest.approx(lp_norm(sp, el), abs=1e-9)


def test_strong_duality_and_witness(rng):
    for _ in range(50):
        sp = random_space(rng, int(rng.integers(5, 15)))
        el = random_element(rng, sp)
        cert = norm(sp, el)
        assert cert.potentials.lip <= 1 + 1e-12
        assert cert.lower_potentials.lip <= 1 + 1e-12
        assert pairing(cert.potentials, el) == pytest.approx(cert.value, abs=1e-9)
        assert pairing(cert.lower_potentials, el) == pytest.approx(cert.value, abs=1e-9)


def test_decompose_dirac():
    sp = interval_space([0.0, 0.5, 2.0])
    dec = decompose(sp, FreeElement.dirac(sp, 2))
    assert len(dec.terms) == 1
    w, m = dec.terms[0]
    assert (m.u, m.v) == (2, 0) and w == pytest.approx(2.0)


def test_decompose_half_molecule_difference():
    sp = euclidean_space([[0, 0], [1, 0], [1, 1]])
    el = FreeElement(sp, {1: 0.5, 2: -0.5})
    dec = decompose(sp, el)
    assert len(dec.terms) == 1
    assert dec.terms[0][0] == pytest.approx(0.5)


def test_decompose_reconstructs(rng):
    for _ in range(20):
        sp = random_space(rng, 8)
        el = random_element(rng, sp)
        dec = decompose(sp, el)
        assert dec.total_weight == pytest.approx(norm(sp, el).value, abs=1e-9)
        assert el.max_abs_diff(dec.as_element()) < 1e-9
        assert all(w > 0 for w, _ in dec.terms)


def test_pairing_on_molecule(rng):
    sp = euclidean_space(rng.random((6, 2)))
    f = LipFunction(sp, rng.normal(size=6))
    assert pairing(f, molecule_element(sp, 2, 4)) == pytest.approx((f(2) - f(4)) / sp.dist[2, 4])


def test_pi1_norms_m_xy(ladder):
    pi1, pi2 = projections(ladder)
    mxy = molecule_element(ladder, 0, 1)
    assert pairing(pi1, mxy) == pytest.approx(-1.0)
    assert pairing(pi1, m_xy(ladder) * -1.0) == pytest.approx(1.0)


def test_pairing_rejects_foreign_function():
    a = interval_space([0.0, 1.0])
    b = interval_space([0.0, 2.0])
    with pytest.raises(StructureError):
        pairing(LipFunction(b, [0.0, 1.0]), molecule_element(a, 1, 0))


def test_arithmetic():
    sp = interval_space([0.0, 1.0, 2.0])
    a = FreeElement(sp, {1: 1.0, 2: 2.0})
    b = FreeElement(sp, {1: -1.0})
    assert (a + b).coeffs == {2: 2.0}
    assert (a - a).coeffs == {}
    assert norm(sp, a - a).value == 0.0
    assert (-b).coeffs == {1: 1.0}


def test_uniform_decomposition():
    sp = interval_space([0.0, 1.0, 2.0, 3.0])
    dec = MolecularDecomposition.uniform(sp, [(1, 0), (3, 2)])
    assert dec.total_weight == pytest.approx(1.0)
    assert norm(sp, dec.as_element()).value == pytest.approx(1.0)


def test_norm_is_homogeneous_and_scales_with_metric(rng):
    sp = euclidean_space(rng.random((10, 2)))
    el = random_element(rng, sp)
    n = norm(sp, el).value
    assert norm(sp, el * -2.5).value == pytest.approx(2.5 * n)
    big = sp.scaled(3.0)
    assert norm(big, FreeElement(big, el.coeffs)).value == pytest.approx(3 * n)
