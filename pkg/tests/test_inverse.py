import numpy as np
import pytest

from lemniscate.algebra import BlaschkeProduct, ComplexPolynomial, RationalMap, critical_values, match_multisets
from lemniscate.circle import align_mod_automorphism, nth_root
from lemniscate.engine import fingerprint_polynomial
from lemniscate.inverse import (
    _Shape,
    count_classes,
    expected_classes,
    invert_polynomial,
    invert_rational,
    polynomial_from_blaschke,
    rational_from_pair,
    same_class,
    track,
)

from _oracles import count_by_multistart

W2 = (2 - np.sqrt(3)) ** 2


def inside_critical_values(B):
    cv = critical_values(B)
    return cv[np.abs(cv) < 1]


@pytest.mark.parametrize("n", [2, 3])
def test_monomial_blaschke_gives_monomial(n):
    P, res = polynomial_from_blaschke(BlaschkeProduct.monomial(n))
    assert np.max(np.abs(P.coeffs - ComplexPolynomial.monomial(n).coeffs)) < 1e-10
    assert res <= 1e-10


def test_worked_case():
    P, res = polynomial_from_blaschke(BlaschkeProduct(0.0, [0, 0.5]))
    assert np.max(np.abs(P.coeffs - [-W2, 0, 1])) <= 1e-6
    assert res <= 1e-6


@pytest.fixture(scope="module")
def cubic_case():
    B = BlaschkeProduct(0.3, [0.2 - 0.1j, -0.4j, 0.5])
    return B, invert_polynomial(B, seed=0)


def test_cubic_closes(cubic_case):
    B, out = cubic_case
    assert out.residual <= 1e-5
    assert len(out.candidates) == expected_classes(3) == 1
    _, dist = align_mod_automorphism(out.fingerprint.k, nth_root(B, N=out.fingerprint.k.N))
    assert dist <= 1e-4


def test_returned_report_describes_returned_polynomial(cubic_case):
    _, out = cubic_case
    fresh = fingerprint_polynomial(out.P, check_exterior=False)
    assert np.max(np.abs(fresh.k.lift - out.fingerprint.k.lift)) <= 1e-8
    assert np.max(np.abs(fresh.curve.samples.mean() - out.fingerprint.curve.samples.mean())) <= 1e-10


def test_cubic_critical_values_match(cubic_case):
    B, out = cubic_case
    dist, _ = match_multisets(critical_values(out.P), inside_critical_values(B))
    assert dist <= 1e-8


def test_inverse_is_deterministic(cubic_case):
    B, out = cubic_case
    again = invert_polynomial(B, seed=0)
    assert np.max(np.abs(again.P.coeffs - out.P.coeffs)) <= 1e-9


def test_track_history():
    shape = _Shape(3, 3)
    rng = np.random.default_rng(0)
    x0 = shape.random_start(rng)
    _, _, _, c0 = shape.split(x0)
    w0 = shape.to_map(x0[: shape.n_params])(c0)
    w1 = np.array([0.2 + 0.1j, -0.3 + 0.05j])
    state = track(shape, x0, w0, w1, rng)
    ts = [h[0] for h in state.history]
    assert np.all(np.diff(ts) > 0) and ts[-1] == 1.0
    assert max(h[2] for h in state.history) <= 1e-10
    R = shape.to_map(state.x[: shape.n_params])
    assert match_multisets(critical_values(R.numerator), w1)[0] < 1e-10


def test_same_class_modulo_rotation():
    p = ComplexPolynomial([0.1, 0.2j, 0, 1])
    w = np.exp(2j * np.pi / 3)
    q = ComplexPolynomial(p.coeffs * w ** -np.arange(4) * w**3).compose_affine(w, 0)
    assert same_class(RationalMap.from_polynomial(p), RationalMap.from_polynomial(q), 3)
    r = ComplexPolynomial([0.1, 0.3j, 0, 1])
    assert not same_class(RationalMap.from_polynomial(p), RationalMap.from_polynomial(r), 3)


def test_rational_with_monomial_A_reduces_to_polynomial():
    B = BlaschkeProduct(0.0, [0, 0.5])
    R, res = rational_from_pair(BlaschkeProduct.monomial(2), B)
    P, _ = polynomial_from_blaschke(B)
    assert R.denominator.degree == 0
    assert np.max(np.abs(R.numerator.coeffs / R.denominator.coeffs[0] - P.coeffs)) < 1e-9


def test_rational_example_pair():
    A = BlaschkeProduct(0.0, [0, 0.1])
    B = BlaschkeProduct(0.0, [0, 0.5])
    out = invert_rational(A, B, seed=0)
    assert out.residual <= 1e-4
    cv = critical_values(out.R)
    cv = cv[np.isfinite(cv)]
    assert np.sum(np.abs(cv) < 1) == 1 and np.sum(np.abs(cv) > 1) == 1


def test_count_degree_two():
    assert count_classes([0.4j], 2).count == 1


def test_count_degree_three_matches_oracle():
    values = [0.2 + 0.1j, -0.3 + 0.05j]
    got = count_classes(values, 3)
    assert got.count == 1 == count_by_multistart(values, 3)
    assert not got.possibly_incomplete


def test_multistart_oracle_degree_four():
    # independent of the homotopy code: plain Newton from random starts
    assert count_by_multistart([0.3, -0.2 + 0.4j, -0.1 - 0.5j], 4) == 4


def test_count_rejects_bad_values():
    with pytest.raises(ValueError):
        count_classes([0.2, 0.2], 3)
    with pytest.raises(ValueError):
        count_classes([1.2, 0.1], 3)
    with pytest.raises(ValueError):
        count_classes([0.1], 3)
