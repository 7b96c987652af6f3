import json

import numpy as np
import pytest

from lemniscate.algebra import BlaschkeProduct, ComplexPolynomial, RationalMap, critical_values, match_multisets
from lemniscate.circle import align_mod_automorphism, conjugacy_residual, grid, nth_root
from lemniscate.engine import (
    fingerprint_polynomial,
    fingerprint_rational,
    sample_perturbed_rational,
    sample_proper_polynomial,
    verify_uniqueness,
    zeros_from_boundary,
)
from lemniscate.errors import NotProperError

W2 = (2 - np.sqrt(3)) ** 2
TH = grid(1024)


@pytest.fixture(scope="module")
def worked():
    return fingerprint_polynomial(ComplexPolynomial([-W2, 0, 1]))


@pytest.mark.parametrize("n", [2, 3])
def test_monomial_fingerprint_is_identity(n):
    rep = fingerprint_polynomial(ComplexPolynomial.monomial(n), check_exterior=False)
    assert np.max(np.abs(rep.B.zeros)) < 1e-10
    assert abs(np.exp(1j * rep.B.theta) - 1) < 1e-10
    assert np.max(np.abs(np.exp(1j * rep.k.lift) - np.exp(1j * TH))) < 1e-10


def test_blaschke_critical_points_from_numerator_denominator():
    B = BlaschkeProduct(0.0, [0, 0.5])
    num, den = B.numerator_denominator()
    assert np.allclose(critical_values(B), critical_values(RationalMap(num, den)))


def test_worked_case_critical_value(worked):
    # the critical value of B inside the disk equals that of P (B = P∘φ₋)
    cv = critical_values(worked.B)
    inside = cv[np.abs(cv) < 1]
    assert len(inside) == 1 and abs(inside[0] + W2) < 1e-8


def test_worked_case_matches_planted_blaschke(worked):
    # B(z) = z(z - 1/2)/(1 - z/2) has the same critical value, so the two
    # fingerprints agree modulo a disk automorphism
    k_planted = nth_root(BlaschkeProduct(0.0, [0, 0.5]), 2, N=worked.k.N)
    _, dist = align_mod_automorphism(worked.k, k_planted)
    assert dist < 1e-8


def test_worked_case_residuals(worked):
    r = worked.residuals
    assert r["conjugacy"] <= 1e-10
    assert r["two_path"] <= 1e-8
    assert r["exterior_identity"] <= 1e-7
    assert r["exterior_power"] <= 1e-9


def test_affine_precomposition_aligns(worked):
    p = ComplexPolynomial([-W2, 0, 1]).compose_affine(2.0, 1.0)
    rep = fingerprint_polynomial(p, check_exterior=False)
    _, dist = align_mod_automorphism(rep.k, worked.k)
    assert dist <= 1e-7


@pytest.mark.parametrize("seed", range(3))
def test_two_path_agreement(seed):
    rng = np.random.default_rng(seed)
    p = sample_proper_polynomial(2 + seed, rng)
    rep = fingerprint_polynomial(p, check_exterior=False)
    assert rep.residuals["two_path"] <= 1e-6
    assert rep.residuals["conjugacy"] <= 1e-6
    assert rep.k.is_smooth()


def test_not_proper_rejected():
    with pytest.raises(NotProperError):
        fingerprint_polynomial(ComplexPolynomial([-2, 0, 1]))


def test_report_json(worked):
    data = worked.to_json()
    text = json.dumps(data)
    assert "residuals" in data and "B" in data
    assert json.loads(text)["B"]["zeros"]


def test_rational_monomial():
    rep = fingerprint_rational(RationalMap.from_polynomial(ComplexPolynomial.monomial(2)))
    assert np.max(np.abs(rep.A.zeros)) < 1e-8
    assert np.max(np.abs(rep.B.zeros)) < 1e-8
    assert np.max(np.abs(np.exp(1j * (rep.k.lift - TH)) - np.exp(1j * (rep.k.lift[0])))) < 1e-8


def test_rational_fingerprint_residuals():
    r = RationalMap(ComplexPolynomial([0.2, 0, 1]), ComplexPolynomial([1, 0.05]))
    rep = fingerprint_rational(r)
    assert conjugacy_residual(rep.A, rep.B, rep.k) <= 1e-6
    assert np.min(np.abs(rep.A.zeros)) <= 1e-8
    inside, outside, on = rep.normalization["critical_value_split"]
    assert (inside, outside, on) == (1, 1, 0)
    assert rep.residuals["A_zeros_consistency"] <= 1e-8


def test_rational_with_offset_pole_is_not_proper():
    r = RationalMap(ComplexPolynomial([0.05, 0, -3, 1]), ComplexPolynomial([-3, 1]))
    with pytest.raises(NotProperError):
        fingerprint_rational(r)


def test_zeros_from_boundary_of_known_product():
    B = BlaschkeProduct(0.4, [0.3, -0.2 + 0.5j, 0])
    th = grid(512)
    alpha = np.unwrap(np.angle(B(np.exp(1j * th))))
    dist, _ = match_multisets(zeros_from_boundary(th, alpha, 3), B.zeros)
    assert dist < 1e-10


def test_verify_uniqueness_examples():
    p = ComplexPolynomial([0.1, -0.3j, 0.2, 1])
    assert verify_uniqueness(p, p)
    assert verify_uniqueness(p, p.compose_affine(1.7, 0.2 - 0.1j))
    assert not verify_uniqueness(ComplexPolynomial([0.1, 0, 1]), ComplexPolynomial([0.2, 0, 1]))


def test_samplers_respect_margin():
    rng = np.random.default_rng(0)
    for n in (2, 3, 4):
        p = sample_proper_polynomial(n, rng)
        assert np.all(np.abs(critical_values(p)) < 0.98)
    r = sample_perturbed_rational(rng)
    assert r.degree == 2
