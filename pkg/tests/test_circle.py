import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lemniscate.algebra import BlaschkeProduct
from lemniscate.circle import (
    CircleDiffeo,
    DiskAutomorphism,
    align_mod_automorphism,
    conjugacy_residual,
    deck_transformation,
    grid,
    lift,
    nth_root,
    solve_conjugacy,
)

TH = grid(1024)


def random_blaschke(rng, n, radius=0.8, theta=None):
    r = radius * np.sqrt(rng.uniform(size=n))
    a = r * np.exp(2j * np.pi * rng.uniform(size=n))
    return BlaschkeProduct(rng.uniform(0, 2 * np.pi) if theta is None else theta, a)


def test_lift_of_monomial():
    a = lift(BlaschkeProduct.monomial(3), 256)
    assert np.allclose(a.samples, 3 * grid(256), atol=1e-13)


def test_lift_of_rotation():
    a = lift(BlaschkeProduct(0.4, [0]), 256)
    assert np.allclose(a.samples, grid(256) + 0.4, atol=1e-13)


def test_lift_total_increase_matches_winding():
    rng = np.random.default_rng(0)
    B = random_blaschke(rng, 3)
    a = lift(B, 1024)
    assert abs(a(2 * np.pi) - a(0.0) - 6 * np.pi) < 1e-9
    # argument principle: winding number of B over the circle is the zero count
    w = np.exp(1j * TH)
    wind = np.sum(np.angle(np.roll(B(w), -1) / B(w))) / (2 * np.pi)
    assert round(wind) == 3
    assert np.all(np.diff(a.samples) > 0)


def test_nth_root_of_monomial_is_identity():
    k = nth_root(BlaschkeProduct.monomial(3))
    assert np.allclose(k.lift, TH, atol=1e-13)


def test_nth_root_of_rotated_monomial():
    k = nth_root(BlaschkeProduct.monomial(2, theta=1.0))
    assert np.allclose(k.lift, TH + 0.5, atol=1e-13)


def test_nth_root_worked_case():
    B = BlaschkeProduct(0.0, [0, 0.5])
    k = nth_root(B, 2)
    assert np.max(np.abs(k.values() ** 2 - B(np.exp(1j * TH)))) <= 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_nth_root_power_recovers_blaschke(seed):
    rng = np.random.default_rng(seed)
    B = random_blaschke(rng, 2 + seed % 4)
    k = nth_root(B)
    assert np.max(np.abs(k.values() ** B.degree - B(np.exp(1j * TH)))) <= 1e-10
    assert np.all(np.diff(k.lift) > 0)
    assert abs(k.evaluate_lift(2 * np.pi) - k.evaluate_lift(0.0) - 2 * np.pi) < 1e-10


def test_solve_conjugacy_identity():
    A = BlaschkeProduct.monomial(2)
    k = solve_conjugacy(A, A, 0)
    assert np.allclose(k.lift, TH, atol=1e-12)


def test_solve_conjugacy_with_monomial_is_nth_root():
    rng = np.random.default_rng(3)
    B = random_blaschke(rng, 3)
    k = solve_conjugacy(BlaschkeProduct.monomial(3), B, 0)
    assert np.max(np.abs(k.lift - nth_root(B).lift)) <= 1e-10


def test_conjugacy_branches():
    rng = np.random.default_rng(7)
    A = random_blaschke(rng, 3)
    B = random_blaschke(rng, 3)
    branches = [solve_conjugacy(A, B, b) for b in range(3)]
    for k in branches:
        assert conjugacy_residual(A, B, k) <= 1e-9
    for i in range(3):
        for j in range(i + 1, 3):
            assert branches[i].distance(branches[j]) > 1e-3
    # the deck transformation of A permutes the branches
    moved = deck_transformation(A, branches[0], 1)
    assert moved.distance(branches[1]) < 1e-9


def test_align_identical():
    k = nth_root(BlaschkeProduct(0.0, [0.3, -0.2j]))
    aut, dist = align_mod_automorphism(k, k)
    assert dist <= 1e-12
    assert abs(aut.alpha) < 1e-10 and abs(np.angle(np.exp(1j * aut.theta))) < 1e-10


def test_align_rotation():
    k1 = CircleDiffeo(TH.copy())
    k2 = k1.rotate(0.3)
    aut, dist = align_mod_automorphism(k1, k2)
    assert abs(aut.alpha) < 1e-10 and abs(aut.theta - 0.3) < 1e-10 and dist < 1e-10


@settings(max_examples=15, deadline=None)
@given(
    st.floats(0, 2 * np.pi),
    st.floats(0, 0.6),
    st.floats(0, 2 * np.pi),
    st.integers(0, 1000),
)
def test_align_recovers_planted_automorphism(theta, r, t, seed):
    rng = np.random.default_rng(seed)
    k1 = nth_root(random_blaschke(rng, 2, radius=0.6))
    planted = DiskAutomorphism(theta, r * np.exp(1j * t))
    k2 = k1.precompose(planted)
    aut, dist = align_mod_automorphism(k1, k2)
    assert dist <= 1e-8
    z = np.exp(1j * TH[::64])
    assert np.max(np.abs(aut(z) - planted(z))) <= 1e-8


def test_align_is_symmetric():
    rng = np.random.default_rng(11)
    k1 = nth_root(random_blaschke(rng, 3))
    k2 = k1.precompose(DiskAutomorphism(1.1, 0.2 + 0.3j))
    _, d12 = align_mod_automorphism(k1, k2)
    _, d21 = align_mod_automorphism(k2, k1)
    assert abs(d12 - d21) <= 1e-8


def test_align_separates_inequivalent():
    rng = np.random.default_rng(12)
    k1 = nth_root(random_blaschke(rng, 3))
    k2 = nth_root(random_blaschke(rng, 3))
    _, dist = align_mod_automorphism(k1, k2)
    assert dist > 1e-3


def test_automorphism_inverse():
    phi = DiskAutomorphism(0.7, 0.3 - 0.4j)
    z = 0.5 * np.exp(1j * TH[::100])
    assert np.max(np.abs(phi.inverse()(phi(z)) - z)) < 1e-14


def test_automorphism_rejects_alpha_outside():
    with pytest.raises(ValueError):
        DiskAutomorphism(0.0, 1.0)


def test_diffeo_csv(tmp_path):
    k = nth_root(BlaschkeProduct(0.0, [0, 0.5]), N=256)
    path = tmp_path / "k.csv"
    k.write_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "theta,k_theta" and len(rows) == 257
