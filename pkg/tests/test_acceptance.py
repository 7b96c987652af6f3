"""Acceptance suite: one test per acceptance criterion.

Each test prints a single line "[criterion N] PASS|FAIL ..." with the worst
observed value next to its tolerance, then asserts.  Run with `pytest -s` to
see the lines live; they are also kept in the captured output on failure.
"""

import time

import numpy as np
import pytest

from lemniscate.algebra import BlaschkeProduct, ComplexPolynomial, RationalMap, critical_values
from lemniscate.circle import align_mod_automorphism, conjugacy_residual, grid, nth_root
from lemniscate.conformal import exterior_map, interior_map
from lemniscate.curves import JordanCurve, trace_level_set
from lemniscate.engine import (
    fingerprint_polynomial,
    fingerprint_rational,
    sample_perturbed_rational,
    sample_proper_polynomial,
)
from lemniscate.errors import LemniscateError
from lemniscate.inverse import count_classes, invert_polynomial, invert_rational

from _oracles import level_set_radius, sign_grid_components

GRID = grid(1024)


def verdict(number: int, ok: bool, detail: str) -> None:
    print(f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def random_blaschke(rng, n, radius=0.8):
    r = radius * np.sqrt(rng.uniform(size=n))
    return BlaschkeProduct(rng.uniform(0, 2 * np.pi), r * np.exp(2j * np.pi * rng.uniform(size=n)))


@pytest.fixture(scope="module")
def forward_runs():
    """20 rejection-sampled proper polynomials of degrees 2-4 with their fingerprints."""
    rng = np.random.default_rng(20240601)
    runs = []
    for i in range(20):
        p = sample_proper_polynomial(2 + i % 3, rng)
        start = time.perf_counter()
        rep = fingerprint_polynomial(p, 1024)
        runs.append((p, rep, time.perf_counter() - start))
    return runs


def test_criterion_01_polynomial_forward(forward_runs):
    worst, slowest = 0.0, 0.0
    for p, rep, seconds in forward_runs:
        n = p.degree
        k_vals = np.exp(1j * rep.k.evaluate_lift(GRID))
        worst = max(worst, float(np.max(np.abs(k_vals**n - rep.B(np.exp(1j * GRID))))))
        slowest = max(slowest, seconds)
    ok = worst <= 1e-6 and slowest <= 60.0
    verdict(1, ok, f"sup|k^n - B| = {worst:.2e} (tol 1e-6), slowest instance {slowest:.1f}s (limit 60s), 20 instances")


def test_criterion_02_exterior_identity(forward_runs):
    zeta = 1.2 * np.exp(1j * grid(256))
    worst = 0.0
    for p, rep, _ in forward_runs:
        ext = rep.maps["exterior"]
        branch = rep.maps["root_branch"]
        worst = max(worst, float(np.max(np.abs(ext(zeta) - branch(zeta)))))
    verdict(2, worst <= 1e-6, f"sup|exterior map - P^(1/n) branch| on |z|=1.2 = {worst:.2e} (tol 1e-6), 20 instances")


def test_criterion_03_inverse_closing_loop():
    rng = np.random.default_rng(3)
    worst_res, worst_align = 0.0, 0.0
    for i in range(20):
        B = random_blaschke(rng, 2 + i % 2)
        out = invert_polynomial(B, seed=0)
        # fresh forward run on the reconstructed polynomial, independent of the closing step
        fp = fingerprint_polynomial(out.P, check_exterior=False)
        _, dist = align_mod_automorphism(fp.k, nth_root(B, N=fp.k.N))
        worst_res = max(worst_res, out.residual)
        worst_align = max(worst_align, dist)
    ok = worst_res <= 1e-5 and worst_align <= 1e-4
    verdict(3, ok, f"residual {worst_res:.2e} (tol 1e-5), alignment {worst_align:.2e} (tol 1e-4), 20 products of degree 2-3")


def test_criterion_04_uniqueness_across_seeds():
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(6):
        B = random_blaschke(rng, 2 + i % 2)
        P1 = invert_polynomial(B, seed=11).P.canonical_form()
        P2 = invert_polynomial(B, seed=12345).P.canonical_form()
        worst = max(worst, float(np.max(np.abs(P1.coeffs - P2.coeffs))))
    verdict(4, worst <= 1e-6, f"max coefficient gap between seeds {worst:.2e} (tol 1e-6), 6 products of degree 2-3")


def test_criterion_05_affine_invariance():
    rng = np.random.default_rng(5)
    p = sample_proper_polynomial(3, rng)
    base = fingerprint_polynomial(p, check_exterior=False)
    worst = 0.0
    for _ in range(10):
        a = rng.uniform(0.5, 2.0)
        b = np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        rep = fingerprint_polynomial(p.compose_affine(a, b), check_exterior=False)
        _, dist = align_mod_automorphism(rep.k, base.k)
        worst = max(worst, dist)
    verdict(5, worst <= 1e-6, f"alignment distance {worst:.2e} (tol 1e-6), 10 random affine maps")


def test_criterion_06_rational_forward():
    rng = np.random.default_rng(6)
    worst, worst_zero = 0.0, 0.0
    for _ in range(10):
        r = sample_perturbed_rational(rng)
        rep = fingerprint_rational(r)
        worst = max(worst, conjugacy_residual(rep.A, rep.B, rep.k, 1024))
        # the fitted A carries its zero at 0 by construction; the boundary-recovered zeros do not
        recovered = rep.residuals["A_zero_at_origin"]
        worst_zero = max(worst_zero, float(np.min(np.abs(rep.A.zeros))), recovered)
    ok = worst <= 1e-6 and worst_zero <= 1e-8
    verdict(6, ok, f"sup|A(k) - B| = {worst:.2e} (tol 1e-6), |zero of A at 0| = {worst_zero:.2e} (tol 1e-8), 10 rationals")


def _rational_round_trip(r, seed=0, target=False):
    f = fingerprint_rational(r)
    out = invert_rational(f.A, f.B, seed=seed, target=f.k if target else None)
    g = fingerprint_rational(out.R)
    _, dist = align_mod_automorphism(g.k, f.k)
    return dist


def _degree_three_rational(rng):
    while True:
        p = sample_proper_polynomial(3, rng)
        d = 0.05 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        r = RationalMap(p, ComplexPolynomial([1, d]))
        if trace_level_set(r, 256).interior_simply_connected:
            return r


def test_criterion_07_rational_round_trip():
    rng = np.random.default_rng(7)
    worst = max(_rational_round_trip(sample_perturbed_rational(rng)) for _ in range(5))
    # degree 3 is best effort and does not gate the verdict; the pair (A, B)
    # admits several classes there, so the original fingerprint selects one
    try:
        dist = _rational_round_trip(_degree_three_rational(rng), target=True)
        extra = f"; n=3 best effort alignment {dist:.2e}"
    except LemniscateError as exc:
        extra = f"; n=3 best effort failed ({type(exc).__name__})"
    verdict(7, worst <= 1e-4, f"n=2 alignment {worst:.2e} (tol 1e-4), 5 round trips{extra}")


def test_criterion_08_counting():
    got2 = count_classes([0.3 - 0.2j], 2).count
    got3 = count_classes([0.2 + 0.1j, -0.3 + 0.05j], 3).count
    start = time.perf_counter()
    got4 = count_classes([0.3, -0.2 + 0.4j, -0.1 - 0.5j], 4, seed=0).count
    seconds = time.perf_counter() - start
    ok = (got2, got3, got4) == (1, 1, 4) and seconds <= 600
    verdict(8, ok, f"counts n=2,3,4 = {got2},{got3},{got4} (expected 1,1,4), n=4 took {seconds:.1f}s (limit 600s)")


def test_criterion_09_conformal_sanity():
    r = 1.7
    m = interior_map(JordanCurve.circle(0, r, N=256), 0j)
    z = 0.9 * np.exp(1j * np.linspace(0, 2 * np.pi, 50)) * np.linspace(0.1, 1, 50)
    circle_err = float(np.max(np.abs(m(z) - r * z)))
    ext = exterior_map(JordanCurve.circle(0, r, N=256))
    circle_err = max(circle_err, float(np.max(np.abs(ext(2 * np.exp(1j * GRID[::16])) - 2 * r * np.exp(1j * GRID[::16])))))
    a = interior_map(JordanCurve.ellipse(1.2, 0.8, N=256), 0j)
    b = interior_map(JordanCurve.ellipse(1.2, 0.8, N=512), 0j)
    ellipse_err = float(np.max(np.abs(b.sigma[::2] - a.sigma)))
    ok = circle_err <= 1e-10 and ellipse_err <= 1e-9
    verdict(9, ok, f"circle error {circle_err:.2e} (tol 1e-10), ellipse N=256 vs 512 {ellipse_err:.2e} (tol 1e-9)")


def _random_map(rng, i):
    """Degree 2-3 polynomials and rationals with critical values kept off the circle."""
    while True:
        n = 2 + i % 2
        c = np.append(0.9 * (rng.normal(size=n) + 1j * rng.normal(size=n)), 1.0)
        if i % 4 == 3:
            d = 0.05 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
            m = RationalMap(ComplexPolynomial(c), ComplexPolynomial([1, d]))
        else:
            m = ComplexPolynomial(c)
        cv = critical_values(m)
        cv = cv[np.isfinite(cv)]
        if np.min(np.abs(np.abs(cv) - 1)) > 0.05:
            return m


def _box_radius(m):
    if isinstance(m, RationalMap):
        return 1.05 * level_set_radius(m.numerator.coeffs, m.denominator.coeffs)
    return 1.05 * level_set_radius(m.coeffs)


def test_criterion_10_level_set_tracer():
    rng = np.random.default_rng(10)
    worst, mismatches = 0.0, []
    for i in range(20):
        m = _random_map(rng, i)
        rep = trace_level_set(m, 1024)
        for c in rep.components:
            worst = max(worst, float(np.max(np.abs(np.abs(m(c.samples)) - 1))))
        oracle = sign_grid_components(m, _box_radius(m), 512)
        if oracle != len(rep.components):
            mismatches.append((i, len(rep.components), oracle))
    ok = worst <= 1e-10 and not mismatches
    verdict(10, ok, f"level residual {worst:.2e} (tol 1e-10), component-count mismatches {mismatches} over 20 maps")
