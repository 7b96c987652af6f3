"""Forward pipelines: from a proper lemniscate to its fingerprint.

All boundary data are kept at the nodes of the traced curve, where the
Szegő-kernel solution is resolved even when the conformal maps crowd; the
Blaschke products are fitted against P∘φ₋ (or R∘φ±) there, and the
fingerprint itself is produced on a uniform circle grid from the fitted
products.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _fourier
from . import circle as _circle
from .algebra import (
    BlaschkeProduct,
    ComplexPolynomial,
    RationalMap,
    blaschke_fit,
    critical_values,
    match_multisets,
    roots,
)
from .circle import CircleDiffeo, nth_root, solve_conjugacy, wrap
from .conformal import _root_branch_inverse, exterior_map, exterior_root_branch, interior_map
from .curves import JordanCurve, is_proper, trace_level_set
from .errors import LemniscateError, NotProperError, StageError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
CONJUGACY_TOL = 1e-6
FIT_TARGET = 1e-9
MAX_N = 4096
EXTERIOR_CHECK_RADIUS = 1.2
EXTERIOR_CHECK_POINTS = 256


@dataclass(frozen=True, eq=False)
class FingerprintReport:
    k: CircleDiffeo
    B: BlaschkeProduct
    curve: JordanCurve
    residuals: dict
    normalization: dict
    A: BlaschkeProduct | None = None
    source: object = None
    maps: dict = field(default_factory=dict, repr=False)

    @property
    def degree(self) -> int:
        return self.B.degree

    @property
    def A_effective(self) -> BlaschkeProduct:
        return self.A if self.A is not None else BlaschkeProduct.monomial(self.B.degree)

    def to_json(self, k_csv: str | None = None) -> dict:
        out = {
            "B": self.B.to_json(),
            "A": self.A_effective.to_json(),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "normalization": self.normalization,
        }
        if k_csv is not None:
            out["k_csv"] = str(k_csv)
        return out


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except NotProperError:
        raise
    except (LemniscateError, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise StageError(name, exc) from exc


def _interior_center(zeros: np.ndarray, curve: JordanCurve) -> complex:
    """Centroid of the zeros if it lies inside the curve, otherwise the zero nearest to it."""
    c = complex(np.mean(zeros))
    if curve.winding_number(c)[0] == 1:
        return c
    inside = zeros[curve.winding_number(zeros) == 1]
    pool = inside if inside.size else zeros
    return complex(pool[np.argmin(np.abs(pool - c))])


def _smooth_root(B: BlaschkeProduct, N: int) -> CircleDiffeo:
    while True:
        k = nth_root(B, N=N)
        if k.is_smooth() or N >= 4 * MAX_N:
            return k
        N *= 2


def _best_branch(k: CircleDiffeo, theta_minus, theta_plus, n: int) -> tuple[int, float]:
    """Branch b of k·e^{2πib/n} closest to the node data (θ₋(t_j), θ₊(t_j)), and its sup distance."""
    u = k.evaluate_lift(theta_minus)
    dist = [float(np.max(np.abs(wrap(u + TWO_PI * b / n - theta_plus)))) for b in range(n)]
    b = int(np.argmin(dist))
    return b, dist[b]


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def _polynomial_attempt(p: ComplexPolynomial, N: int):
    report = _stage("trace", trace_level_set, p, N)
    if not report.interior_simply_connected:
        raise NotProperError("lemniscate sublevel set is not connected")
    curve = report.components[0]
    zeros = roots(p)
    center = _interior_center(zeros, curve)
    phi_minus = _stage("interior_map", interior_map, curve, center)
    theta_minus = phi_minus.boundary_angle
    a = _stage("zeros", phi_minus.inverse_cauchy, zeros)
    values = p(curve.samples)
    B, fit = _stage("blaschke_fit", blaschke_fit, np.exp(1j * theta_minus), values, a, tol=CONJUGACY_TOL)
    return report, curve, center, phi_minus, theta_minus, B, fit


def fingerprint_polynomial(
    p: ComplexPolynomial, N: int = 1024, *, max_N: int = MAX_N, check_exterior: bool = True
) -> FingerprintReport:
    """Fingerprint k = B^{1/n} of the lemniscate |p| = 1, with verification residuals.

    The polynomial is only phase-normalized (positive leading coefficient);
    translations and scalings of the variable are left alone, since the
    fingerprint is invariant under them up to a disk automorphism.
    """
    if not isinstance(p, ComplexPolynomial):
        raise TypeError("fingerprint_polynomial needs a ComplexPolynomial")
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    if not _stage("properness", is_proper, p):
        raise NotProperError("critical values of the polynomial are not all inside the unit disk")
    p = p.with_positive_leading()
    n = p.degree

    attempt = None
    while True:
        try:
            attempt = _polynomial_attempt(p, N)
            fit = attempt[-1]
        except StageError as exc:
            if N * 2 > max_N:
                raise
            log.info("N=%d failed at stage %s; retrying with N=%d", N, exc.stage, 2 * N)
            N *= 2
            continue
        log.info("t=fingerprint, step=N%d, residual=%.3e", N, fit)
        if fit <= FIT_TARGET or N * 2 > max_N:
            break
        N *= 2

    report, curve, center, phi_minus, theta_minus, B, fit = attempt
    k = _smooth_root(B, max(1024, N))

    residuals = {"blaschke_fit": fit}
    th = _circle.grid(1024)
    residuals["conjugacy"] = float(
        np.max(np.abs(np.exp(1j * n * k.evaluate_lift(th)) - B(np.exp(1j * th))))
    )
    # second path: φ₊⁻¹ = P^{1/n} at the curve nodes
    theta_plus = np.unwrap(np.angle(_stage("root_branch", _root_branch_inverse, p, curve.samples)))
    # report the branch of B^{1/n} that is φ₊⁻¹∘φ₋ itself
    b, residuals["two_path"] = _best_branch(k, theta_minus, theta_plus, n)
    if b:
        k = k.rotate(TWO_PI * b / n)
    maps = {"interior": phi_minus}
    if check_exterior:
        zeta = EXTERIOR_CHECK_RADIUS * np.exp(1j * _circle.grid(EXTERIOR_CHECK_POINTS))
        ext = _stage("exterior_map", exterior_map, curve)
        branch = _stage("root_branch", exterior_root_branch, p, curve)
        residuals["exterior_identity"] = float(np.max(np.abs(ext(zeta) - branch(zeta))))
        residuals["exterior_power"] = float(np.max(np.abs(p(branch(zeta)) - zeta**n)))
        maps["exterior"] = ext
        maps["root_branch"] = branch
    normalization = {
        "center": [center.real, center.imag],
        "derivative_at_0": float(phi_minus.coeffs[1].real),
        "N": int(N),
        "k_N": int(k.N),
    }
    if residuals["conjugacy"] > CONJUGACY_TOL:
        raise StageError("verify", LemniscateError(f"conjugacy residual {residuals['conjugacy']:.3e}"))
    return FingerprintReport(k, B, curve, residuals, normalization, None, p, maps)


# ---------------------------------------------------------------------------
# Rational maps
# ---------------------------------------------------------------------------


def zeros_from_boundary(theta, alpha, n: int) -> np.ndarray:
    """Zeros of a degree-n Blaschke product from its boundary argument.

    `theta` and `alpha` are the lifted arguments of ζ and of the product at
    uniformly spaced nodes of some smooth parametrization.  The power sums
    Σ a_k^m = (1/2π) ∮ ζ^m d(arg A) are computed with the trapezoid rule and
    converted to the zeros by Newton's identities.
    """
    M = len(theta)
    t = TWO_PI * np.arange(M) / M
    dalpha = n + _fourier.derivative_samples(alpha - n * t)
    zeta = np.exp(1j * theta)
    s = np.array([np.mean(zeta**m * dalpha) for m in range(1, n + 1)])
    # Newton's identities: e_m = (1/m) Σ_{i=1}^{m} (-1)^{i-1} e_{m-i} s_i
    e = np.zeros(n + 1, dtype=complex)
    e[0] = 1.0
    for m in range(1, n + 1):
        e[m] = sum((-1) ** (i - 1) * e[m - i] * s[i - 1] for i in range(1, m + 1)) / m
    # z^n - e1 z^{n-1} + e2 z^{n-2} - ...
    coeffs = np.array([(-1) ** m * e[m] for m in range(n + 1)])[::-1]
    poly = ComplexPolynomial(coeffs)
    out = np.zeros(n, dtype=complex)
    if poly.degree:
        r = roots(poly)
        out[: len(r)] = r
    return out


def fingerprint_rational(r: RationalMap, N: int = 1024, *, max_N: int = MAX_N) -> FingerprintReport:
    """Fingerprint of a rational lemniscate: A = R∘φ₊ and B = R∘φ₋ with A∘k = B."""
    if isinstance(r, ComplexPolynomial):
        r = RationalMap.from_polynomial(r)
    n = r.degree
    while True:
        try:
            out = _rational_attempt(r, N)
        except StageError as exc:
            if N * 2 > max_N:
                raise
            log.info("N=%d failed at stage %s; retrying with N=%d", N, exc.stage, 2 * N)
            N *= 2
            continue
        fit = max(out["fit_A"], out["fit_B"])
        log.info("t=fingerprint_rational, step=N%d, residual=%.3e", N, fit)
        if fit <= FIT_TARGET or N * 2 > max_N:
            break
        N *= 2

    A, B = out["A"], out["B"]
    kN = max(1024, N)
    k = None
    for branch in range(n):
        cand = _stage("conjugacy", solve_conjugacy, A, B, branch, kN, CONJUGACY_TOL)
        d = float(np.max(np.abs(wrap(cand.evaluate_lift(out["theta_minus"]) - out["theta_plus"]))))
        if k is None or d < best:
            k, best = cand, d
    residuals = {
        "blaschke_fit_A": out["fit_A"],
        "blaschke_fit_B": out["fit_B"],
        "conjugacy": _circle.conjugacy_residual(A, B, k, 1024),
        "two_path": best,
        "A_zero_at_origin": float(np.min(np.abs(out["A_zeros_independent"]))),
        "A_zeros_consistency": out["A_zeros_consistency"],
    }
    center = out["center"]
    normalization = {
        "center": [center.real, center.imag],
        "derivative_at_0": float(out["interior"].coeffs[1].real),
        "capacity": float(out["exterior"].capacity),
        "N": int(N),
        "k_N": int(k.N),
        "critical_value_split": list(out["split"]),
    }
    if residuals["conjugacy"] > CONJUGACY_TOL:
        raise StageError("verify", LemniscateError(f"conjugacy residual {residuals['conjugacy']:.3e}"))
    maps = {"interior": out["interior"], "exterior": out["exterior"]}
    return FingerprintReport(k, B, out["curve"], residuals, normalization, A, r, maps)


def _rational_attempt(r: RationalMap, N: int) -> dict:
    n = r.degree
    report = _stage("trace", trace_level_set, r, N)
    if not report.interior_simply_connected:
        raise NotProperError(
            f"sublevel set is not simply connected: {len(report.components)} components, "
            f"sublevel inside = {report.inner_side_sublevel}"
        )
    curve = report.components[0]
    zeros = r.zeros()
    poles = r.poles()
    center = _interior_center(zeros, curve)
    phi_minus = _stage("interior_map", interior_map, curve, center)
    phi_plus = _stage("exterior_map", exterior_map, curve)
    theta_minus = phi_minus.boundary_angle
    theta_plus = phi_plus.boundary_angle
    values = r(curve.samples)

    b_zeros = _stage("zeros", phi_minus.inverse_cauchy, zeros)
    finite = np.zeros(0, dtype=complex)
    if poles.size:
        finite = 1.0 / np.conj(_stage("zeros", phi_plus.inverse_cauchy, poles))
    at_infinity = n - poles.size
    a_zeros = np.concatenate([finite, np.zeros(at_infinity, dtype=complex)])
    B, fit_B = _stage("blaschke_fit", blaschke_fit, np.exp(1j * theta_minus), values, b_zeros, tol=CONJUGACY_TOL)
    A, fit_A = _stage("blaschke_fit", blaschke_fit, np.exp(1j * theta_plus), values, a_zeros, tol=CONJUGACY_TOL)
    # independent check of A's zeros from the boundary argument of R along the curve
    alpha = np.unwrap(np.angle(values))
    independent = zeros_from_boundary(theta_plus, alpha, n)
    consistency, _ = match_multisets(independent, a_zeros)
    return {
        "curve": curve,
        "center": center,
        "interior": phi_minus,
        "exterior": phi_plus,
        "theta_minus": theta_minus,
        "theta_plus": theta_plus,
        "A": A,
        "B": B,
        "fit_A": fit_A,
        "fit_B": fit_B,
        "A_zeros_independent": independent,
        "A_zeros_consistency": float(consistency),
        "split": report.critical_value_split,
    }


# ---------------------------------------------------------------------------
# Uniqueness and sampling
# ---------------------------------------------------------------------------


def verify_uniqueness(p1: ComplexPolynomial, p2: ComplexPolynomial, tol: float = 1e-6) -> bool:
    """True iff the two polynomials have the same canonical form (so are affinely related)."""
    c1 = p1.canonical_form()
    c2 = p2.canonical_form()
    if c1.degree != c2.degree:
        return False
    return bool(np.max(np.abs(c1.coeffs - c2.coeffs)) <= tol)


def sample_proper_polynomial(
    degree: int, rng: np.random.Generator, *, radius: float = 0.6, margin: float = 0.02, max_tries: int = 10000
) -> ComplexPolynomial:
    """Monic centered polynomial with random lower coefficients, kept only if proper.

    Critical values closer than `margin` to the unit circle are rejected too,
    since they produce nearly pinched curves that need very fine grids.
    """
    if degree < 2:
        raise ValueError("degree must be at least 2")
    for _ in range(max_tries):
        c = np.zeros(degree + 1, dtype=complex)
        c[-1] = 1.0
        m = degree - 1
        c[:m] = radius * (rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m))
        p = ComplexPolynomial(c)
        if np.all(np.abs(critical_values(p)) < 1.0 - margin):
            return p
    raise RuntimeError("rejection sampler exhausted its budget")


def sample_perturbed_rational(
    rng: np.random.Generator, *, delta: float = 0.05, margin: float = 0.02, max_tries: int = 1000
) -> RationalMap:
    """R(z) = (z² + w) / (1 + δ z) with random w and small random δ, kept if the tracer accepts it."""
    for _ in range(max_tries):
        w = 0.6 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        d = delta * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        if abs(w) > 1 - margin:
            continue
        r = RationalMap(ComplexPolynomial([w, 0, 1]), ComplexPolynomial([1, d]))
        try:
            rep = trace_level_set(r, 256)
        except LemniscateError:
            continue
        vals = np.abs(critical_values(r))
        if rep.interior_simply_connected and np.all(np.abs(vals[np.isfinite(vals)] - 1) > margin):
            return r
    raise RuntimeError("rejection sampler exhausted its budget")
