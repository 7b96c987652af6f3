"""Inverse pipelines: from Blaschke data back to a lemniscate.

Both reconstructions go through critical values.  A polynomial P with
B = P∘φ₋ has the same critical values as B inside the disk; a rational R with
A = R∘φ₊, B = R∘φ₋ has in addition the finite critical values of A outside
the closed disk.  Maps with prescribed critical values are found by path
tracking in critical-value space from a random start, and the sheet that
actually reproduces the Blaschke data is selected by recomputing the
fingerprint of each candidate.

Unknowns for a map of degree n whose pole at infinity has order m are

    R(z) = z^m + q_{m-2} z^{m-2} + ... + q_0 + Σ_{j=1}^{n-m} r_j / (z - p_j)

(for m = 1 the polynomial part is just z), together with its finite
critical points c_1..c_K, K = 2n - m - 1.  The square system is
R'(c_i) = 0, R(c_i) = w_i.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .algebra import (
    BlaschkeProduct,
    ComplexPolynomial,
    RationalMap,
    critical_points,
    critical_values,
    match_multisets,
)
from .circle import CircleDiffeo, align_mod_automorphism, grid, nth_root, solve_conjugacy
from .curves import JordanCurve
from .engine import FingerprintReport, fingerprint_polynomial, fingerprint_rational
from .errors import InversionError, LemniscateError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
STEP_RESIDUAL_TOL = 1e-10
FINAL_RESIDUAL_TOL = 1e-12
PATH_PERTURBATION = 1e-3
RETRY_BUDGET = 25
ALIGN_TOL = 1e-4
POLY_RESIDUAL_TOL = 1e-5
RATIONAL_RESIDUAL_TOL = 1e-4
ZERO_TOL = 1e-8


# ---------------------------------------------------------------------------
# Parametrized maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Shape:
    n: int
    m: int

    @property
    def n_q(self) -> int:
        return max(self.m - 1, 0)

    @property
    def n_poles(self) -> int:
        return self.n - self.m

    @property
    def n_crit(self) -> int:
        return 2 * self.n - self.m - 1

    @property
    def n_params(self) -> int:
        return self.n_q + 2 * self.n_poles

    def split(self, x):
        q = x[: self.n_q]
        p = x[self.n_q : self.n_q + self.n_poles]
        r = x[self.n_q + self.n_poles : self.n_params]
        c = x[self.n_params :]
        return q, p, r, c

    def poly_part(self, q) -> np.ndarray:
        coeffs = np.zeros(self.m + 1, dtype=complex)
        coeffs[-1] = 1.0
        if self.m >= 2:
            coeffs[: self.m - 1] = q
        return coeffs

    def to_map(self, params) -> RationalMap:
        q, p, r, _ = self.split(np.concatenate([params, np.zeros(0)]))
        poly = ComplexPolynomial(self.poly_part(q))
        if self.n_poles == 0:
            return RationalMap(poly, ComplexPolynomial([1.0]))
        den = ComplexPolynomial.from_roots(p)
        num = poly * den
        for j in range(self.n_poles):
            others = ComplexPolynomial.from_roots(np.delete(p, j))
            num = num + others * ComplexPolynomial([r[j]])
        return RationalMap(num, den)

    def system(self, x, w):
        """Residual F(x) and Jacobian dF/dx of R'(c) = 0, R(c) = w."""
        q, p, r, c = self.split(x)
        poly = self.poly_part(q)
        k = np.arange(len(poly))
        K = self.n_crit
        cp = c[:, None]
        powers = cp ** k[None, :]
        # polynomial part and its derivatives at the critical points
        P0 = powers @ poly
        P1 = (cp ** np.maximum(k - 1, 0)[None, :] * k[None, :]) @ poly
        P2 = (cp ** np.maximum(k - 2, 0)[None, :] * (k * (k - 1))[None, :]) @ poly
        d = cp - p[None, :]
        R0 = P0 + np.sum(r / d, axis=1)
        R1 = P1 - np.sum(r / d**2, axis=1)
        R2 = P2 + 2 * np.sum(r / d**3, axis=1)
        F = np.concatenate([R1, R0 - w])
        J = np.zeros((2 * K, self.n_params + K), dtype=complex)
        if self.n_q:
            kq = np.arange(self.n_q)
            J[:K, : self.n_q] = kq[None, :] * cp ** np.maximum(kq - 1, 0)[None, :]
            J[K:, : self.n_q] = cp ** kq[None, :]
        s = self.n_q
        J[:K, s : s + self.n_poles] = -2 * r / d**3
        J[K:, s : s + self.n_poles] = r / d**2
        s += self.n_poles
        J[:K, s : s + self.n_poles] = -1.0 / d**2
        J[K:, s : s + self.n_poles] = 1.0 / d
        s += self.n_poles
        J[:K, s:] = np.diag(R2)
        J[K:, s:] = np.diag(R1)
        return F, J

    def random_start(self, rng) -> np.ndarray | None:
        """Random nondegenerate parameters with their K simple finite critical points."""
        q = 0.5 * (rng.standard_normal(self.n_q) + 1j * rng.standard_normal(self.n_q))
        p = 1.5 * np.exp(1j * rng.uniform(0, TWO_PI, self.n_poles)) * rng.uniform(0.7, 1.3, self.n_poles)
        r = 0.3 * (rng.standard_normal(self.n_poles) + 1j * rng.standard_normal(self.n_poles))
        params = np.concatenate([q, p, r])
        try:
            crit = critical_points(self.to_map(params))
        except LemniscateError:
            return None
        if len(crit) != self.n_crit:
            return None
        gaps = np.abs(crit[:, None] - crit[None, :]) + np.eye(len(crit))
        if np.min(gaps) < 1e-3:
            return None
        return np.concatenate([params, crit])


# ---------------------------------------------------------------------------
# Path tracking
# ---------------------------------------------------------------------------


@dataclass
class HomotopyState:
    """Snapshot of a continuation run at an accepted step."""

    t: float
    x: np.ndarray
    targets: np.ndarray
    step: float
    residual: float
    history: list = field(default_factory=list)


def _newton(shape, x, w, iters=8, tol=FINAL_RESIDUAL_TOL):
    first = last = None
    for _ in range(iters):
        F, J = shape.system(x, w)
        dx = np.linalg.solve(J, -F)
        x = x + dx
        size = float(np.max(np.abs(dx)))
        if first is None:
            first = size
        if last is not None and size > 0.5 * last and size > 1e-13:
            last = size
            break
        last = size
        if size < 1e-14 * max(1.0, float(np.max(np.abs(x)))):
            break
    F, _ = shape.system(x, w)
    return x, float(np.max(np.abs(F))), first


def track(shape: _Shape, x0, w0, w1, rng, perturb: float = 0.0, h0: float = 0.05, h_min: float = 1e-7):
    """Follow F(x; w(t)) = 0 from t = 0 to 1 along w(t) = w0 + t (w1 - w0) + perturb t (1 - t) ρ."""
    rho = perturb * (rng.standard_normal(len(w0)) + 1j * rng.standard_normal(len(w0)))

    def w_at(t):
        return w0 + t * (w1 - w0) + t * (1 - t) * rho

    def dw_at(t):
        return (w1 - w0) + (1 - 2 * t) * rho

    state = HomotopyState(0.0, np.array(x0, dtype=complex), np.asarray(w1), h0, 0.0)
    t, x, h = 0.0, state.x, h0
    K = shape.n_crit
    while t < 1.0:
        h = min(h, 1.0 - t)
        try:
            _, J = shape.system(x, w_at(t))
            rhs = np.concatenate([np.zeros(K), dw_at(t)])
            dx = np.linalg.solve(J, rhs)
            x_pred = x + h * dx
            x_new, res, first = _newton(shape, x_pred, w_at(t + h), iters=6)
        except np.linalg.LinAlgError:
            res, first, x_new = np.inf, np.inf, x
        scale = max(1.0, float(np.max(np.abs(x))))
        moved = float(np.max(np.abs(x_new - x)))
        good = np.isfinite(res) and res <= STEP_RESIDUAL_TOL and first <= 0.1 * max(moved, 1e-12) + 1e-10 * scale
        if not good:
            h *= 0.5
            if h < h_min:
                raise InversionError(f"path tracking stalled at t={t:.6f} (likely near a discriminant)")
            continue
        t = 1.0 if 1.0 - (t + h) < 1e-15 else t + h
        x = x_new
        state.history.append((t, h, res))
        log.debug("t=%.6f, step=%.3e, residual=%.3e", t, h, res)
        h = min(2.0 * h, 0.2)
    x, res, _ = _newton(shape, x, w1, iters=10)
    if res > FINAL_RESIDUAL_TOL * max(1.0, float(np.max(np.abs(x)))):
        raise InversionError(f"final Newton polish failed (residual {res:.3e})")
    state.t, state.x, state.step, state.residual = 1.0, x, h, res
    log.info("t=1, step=%.3e, residual=%.3e", h, res)
    return state


def _solve_for_values(shape: _Shape, targets, rng, attempts: int = RETRY_BUDGET):
    """One map with the prescribed (labelled) critical values, from a random start."""
    last = None
    for attempt in range(attempts):
        x0 = shape.random_start(rng)
        if x0 is None:
            continue
        _, _, _, c0 = shape.split(x0)
        w0 = shape.to_map(x0[: shape.n_params])(c0)
        order = rng.permutation(len(targets))
        try:
            state = track(shape, x0, w0, targets[order], rng, perturb=PATH_PERTURBATION if attempt else 0.0)
        except (InversionError, LemniscateError, FloatingPointError) as exc:
            last = exc
            continue
        params = state.x[: shape.n_params]
        _, p, r, _ = shape.split(state.x)
        if shape.n_poles and (np.min(np.abs(r)) < 1e-8 or not np.all(np.isfinite(p))):
            last = InversionError("path ended at a degenerate map (vanishing residue)")
            continue
        return shape.to_map(params), state
    raise InversionError(f"no path converged in {attempts} attempts: {last}")


# ---------------------------------------------------------------------------
# Candidate classes
# ---------------------------------------------------------------------------


def _normalized(r: RationalMap) -> tuple[np.ndarray, np.ndarray]:
    lead = r.denominator.leading
    return r.numerator.coeffs / lead, r.denominator.coeffs / lead


def same_class(r1: RationalMap, r2: RationalMap, m: int, tol: float = 1e-6) -> bool:
    """True if r2(z) = r1(ωz) for some ω with ω^m = 1 (rotations that keep the canonical form)."""
    if r1.degree != r2.degree or r1.denominator.degree != r2.denominator.degree:
        return False
    n2, d2 = _normalized(r2)
    for j in range(max(m, 1)):
        w = np.exp(TWO_PI * 1j * j / max(m, 1))
        n1, d1 = _normalized(r1.compose_affine(w, 0.0))
        if max(np.max(np.abs(n1 - n2)), np.max(np.abs(d1 - d2))) <= tol * max(1.0, np.max(np.abs(n2))):
            return True
    return False


def _blaschke_targets_inside(B: BlaschkeProduct) -> np.ndarray:
    crit = critical_points(B)
    inside = crit[np.abs(crit) < 1.0]
    if len(inside) != B.degree - 1:
        raise InversionError(f"expected {B.degree - 1} critical points of B in the disk, found {len(inside)}")
    return B(inside)


def _is_monomial_like(B: BlaschkeProduct) -> bool:
    return bool(np.all(np.abs(B.zeros) <= ZERO_TOL))


# ---------------------------------------------------------------------------
# Polynomial reconstruction
# ---------------------------------------------------------------------------


@dataclass
class PolynomialInversion:
    P: ComplexPolynomial
    residual: float
    alignment: float
    candidates: list
    fingerprint: object = None


def _rotated_fingerprint(k: CircleDiffeo, gamma: float) -> CircleDiffeo:
    """Fingerprint of P(e^{iγ} z) from that of P: k'(w) = e^{-iγ} k(e^{iγ} w)."""
    return CircleDiffeo(k.evaluate_lift(grid(k.N) + gamma) - gamma)


def _rotated_report(fp: FingerprintReport, gamma: float, source) -> FingerprintReport:
    """Report for m(e^{iγ} z) given the report for m; the new lemniscate is e^{-iγ}Γ."""
    rot = np.exp(-1j * gamma)
    c = fp.curve
    curve = JordanCurve(c.samples * rot, c.interior_point * rot, None if c.tangents is None else c.tangents * rot)
    k = _rotated_fingerprint(fp.k, gamma)
    k = k.rotate(-TWO_PI * np.floor(k.lift[0] / TWO_PI))

    def turn(P):
        P = P.rotate_argument(gamma)
        return BlaschkeProduct(np.mod(P.theta, TWO_PI), P.zeros)

    return replace(
        fp,
        k=k,
        B=turn(fp.B),
        A=None if fp.A is None else turn(fp.A),
        curve=curve,
        source=source,
        maps={},
    )


def _close_polynomial(P: ComplexPolynomial, B: BlaschkeProduct, k_B: CircleDiffeo, N: int):
    """Rotation of P whose fingerprint matches k_B, with alignment distance and residual."""
    n = P.degree
    fp = fingerprint_polynomial(P, N, check_exterior=False)
    best = None
    for j in range(n):
        gamma = TWO_PI * j / n
        k_j = _rotated_fingerprint(fp.k, gamma) if j else fp.k
        if k_j.N != k_B.N:
            k_j = CircleDiffeo(k_j.evaluate_lift(grid(k_B.N)))
        aut, dist = align_mod_automorphism(k_j, k_B)
        if best is None or dist < best[1]:
            best = (j, dist, aut)
    j, dist, aut = best
    gamma = TWO_PI * j / n
    P_rot = P.compose_affine(np.exp(1j * gamma), 0.0)
    B_rot = fp.B.rotate_argument(gamma)
    th = grid(1024)
    residual = float(np.max(np.abs(B(np.exp(1j * th)) - B_rot(aut(np.exp(1j * th))))))
    residual += fp.residuals["blaschke_fit"]
    return P_rot, dist, residual, _rotated_report(fp, gamma, P_rot)


def invert_polynomial(B: BlaschkeProduct, *, seed: int = 0, N: int = 1024, max_paths: int = RETRY_BUDGET):
    """Full record of the polynomial reconstruction (see polynomial_from_blaschke)."""
    n = B.degree
    if n < 2:
        raise ValueError("need a Blaschke product of degree >= 2")
    targets = _blaschke_targets_inside(B)
    k_B = nth_root(B, N=max(1024, N))
    if _is_monomial_like(B) or np.max(np.abs(targets - targets[0])) <= 1e-12:
        # all critical values equal: z^n + w is the only monic centered solution
        w = complex(np.mean(targets))
        coeffs = np.zeros(n + 1, dtype=complex)
        coeffs[0], coeffs[-1] = w, 1.0
        P = ComplexPolynomial(coeffs)
        P_rot, dist, residual, fp = _close_polynomial(P, B, k_B, N)
        return PolynomialInversion(P_rot, residual, dist, [P], fp)

    shape = _Shape(n, n)
    rng = np.random.default_rng(seed)
    classes = []
    for path in range(max_paths):
        try:
            R, state = _solve_for_values(shape, targets, rng, attempts=3)
        except InversionError as exc:
            log.info("path %d failed: %s", path, exc)
            continue
        P = R.numerator
        if any(same_class(RationalMap.from_polynomial(c), R, n) for c in classes):
            continue
        classes.append(P)
        log.info("path %d: new candidate class %d", path, len(classes))
        try:
            P_rot, dist, residual, fp = _close_polynomial(P, B, k_B, N)
        except LemniscateError as exc:
            log.info("candidate rejected: %s", exc)
            continue
        log.info("t=close, step=%d, residual=%.3e", path, residual)
        if dist <= ALIGN_TOL and residual <= POLY_RESIDUAL_TOL:
            return PolynomialInversion(P_rot, residual, dist, classes, fp)
    raise InversionError(f"no candidate among {len(classes)} classes reproduces B", classes)


def polynomial_from_blaschke(B: BlaschkeProduct, *, seed: int = 0, N: int = 1024) -> tuple[ComplexPolynomial, float]:
    """Monic centered P whose lemniscate has Blaschke data B (B = P∘φ₋), and the residual sup|B - P∘φ₋∘ψ|."""
    out = invert_polynomial(B, seed=seed, N=N)
    return out.P, out.residual


# ---------------------------------------------------------------------------
# Rational reconstruction
# ---------------------------------------------------------------------------


@dataclass
class RationalInversion:
    R: RationalMap
    residual: float
    alignment: float
    candidates: list
    fingerprint: object = None


def _rational_targets(A: BlaschkeProduct, B: BlaschkeProduct, m: int) -> np.ndarray:
    inside = _blaschke_targets_inside(B)
    crit = critical_points(A)
    crit = crit[(np.abs(crit) < 1.0) & (np.abs(crit) > ZERO_TOL)]
    if len(crit) != A.degree - m:
        raise InversionError(f"expected {A.degree - m} nonzero critical points of A in the disk, found {len(crit)}")
    outside = 1.0 / np.conj(A(crit))
    return np.concatenate([inside, outside])


def _close_rational(R: RationalMap, A: BlaschkeProduct, B: BlaschkeProduct, branches, N: int):
    """Rotation R(e^{iγ} z) of a candidate whose A-product equals A, with alignment and residual."""
    n = R.degree
    fp = fingerprint_rational(R, N)
    A_c = fp.A
    best = None
    for j in range(n):
        gamma = (A.theta - A_c.theta + TWO_PI * j) / n
        d, _ = match_multisets(A.zeros, np.exp(-1j * gamma) * A_c.zeros)
        if best is None or d < best[0]:
            best = (d, gamma)
    zero_mismatch, gamma = best
    if zero_mismatch > 1e-5:
        raise InversionError(f"candidate's exterior product does not match A (zero distance {zero_mismatch:.2e})")
    k_g = _rotated_fingerprint(fp.k, gamma)
    th = grid(1024)
    result = None
    for k_ab in branches:
        k_cmp = k_g if k_g.N == k_ab.N else CircleDiffeo(k_g.evaluate_lift(grid(k_ab.N)))
        aut, dist = align_mod_automorphism(k_cmp, k_ab)
        if result is None or dist < result[0]:
            u = k_g.evaluate_lift(aut.boundary_lift(th))
            residual = float(np.max(np.abs(A(np.exp(1j * u)) - B(np.exp(1j * th)))))
            result = (dist, residual)
    dist, residual = result
    R_rot = R.compose_affine(np.exp(1j * gamma), 0.0)
    return R_rot, dist, residual, _rotated_report(fp, gamma, R_rot)


def invert_rational(
    A: BlaschkeProduct,
    B: BlaschkeProduct,
    *,
    seed: int = 0,
    N: int = 1024,
    max_paths: int = RETRY_BUDGET,
    target: CircleDiffeo | None = None,
):
    """Full record of the rational reconstruction (see rational_from_pair).

    For n >= 3 the pair (A, B) can be realized by several classes whose
    fingerprints are different solutions of A∘k = B.  Passing `target`
    (one such solution) restricts the closing check to it; otherwise any
    solution is accepted.
    """
    n = A.degree
    if B.degree != n:
        raise ValueError("A and B must have the same degree")
    at_zero = np.abs(A.zeros) <= ZERO_TOL
    m = int(np.sum(at_zero))
    if m == 0:
        raise ValueError("A must vanish at 0 (the map fixes infinity)")
    if m == n:
        # A = e^{iθ} z^n: the polynomial case, rotated back by e^{iθ}
        rot = np.exp(1j * A.theta)
        inner = invert_polynomial(BlaschkeProduct(B.theta - A.theta, B.zeros), seed=seed, N=N)
        R = RationalMap(ComplexPolynomial(rot * inner.P.coeffs), ComplexPolynomial([1.0]))
        return RationalInversion(R, inner.residual, inner.alignment, inner.candidates, inner.fingerprint)
    A = BlaschkeProduct(A.theta, np.where(at_zero, 0.0, A.zeros))
    targets = _rational_targets(A, B, m)
    if target is None:
        branches = [solve_conjugacy(A, B, b, max(1024, N), tol=1e-8) for b in range(n)]
    else:
        size = max(1024, N)
        branches = [target if target.N == size else CircleDiffeo(target.evaluate_lift(grid(size)))]
    shape = _Shape(n, m)
    rng = np.random.default_rng(seed)
    classes = []
    best = None
    for path in range(max_paths):
        try:
            R, _ = _solve_for_values(shape, targets, rng, attempts=3)
        except InversionError as exc:
            log.info("path %d failed: %s", path, exc)
            continue
        if any(same_class(c, R, m) for c in classes):
            continue
        classes.append(R)
        try:
            R_rot, dist, residual, fp = _close_rational(R, A, B, branches, N)
        except LemniscateError as exc:
            log.info("candidate rejected: %s", exc)
            continue
        log.info("t=close, step=%d, residual=%.3e", path, residual)
        if best is None or residual < best.residual:
            best = RationalInversion(R_rot, residual, dist, classes, fp)
        if residual <= RATIONAL_RESIDUAL_TOL and (target is None or dist <= ALIGN_TOL):
            return best
    raise InversionError(f"no candidate among {len(classes)} classes reproduces (A, B)", classes)


def rational_from_pair(
    A: BlaschkeProduct, B: BlaschkeProduct, *, seed: int = 0, N: int = 1024, target: CircleDiffeo | None = None
) -> tuple[RationalMap, float]:
    """Rational R with R(∞) = ∞, A = R∘φ₊ and B = R∘φ₋ (up to the interior normalization), and the residual."""
    out = invert_rational(A, B, seed=seed, N=N, target=target)
    return out.R, out.residual


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------


class ClassCount(NamedTuple):
    count: int
    possibly_incomplete: bool
    classes: list


def expected_classes(n: int) -> int:
    return 1 if n <= 3 else n ** (n - 3)


def count_classes(values, n: int, *, seed: int = 0, budget: int | None = None) -> ClassCount:
    """Number of monic centered polynomials with the given critical values, counted modulo z ↦ ωz.

    Multi-start path tracking with a fixed budget of random starts and target
    orderings; the count is flagged as possibly incomplete when it falls short
    of n^{n-3}.
    """
    values = np.asarray(values, dtype=complex)
    if len(values) != n - 1:
        raise ValueError(f"need {n - 1} critical values for degree {n}")
    if np.any(np.abs(values) >= 1 - 1e-6):
        raise ValueError("critical values must lie in the unit disk")
    if n == 2:
        return ClassCount(1, False, [ComplexPolynomial([values[0], 0, 1])])
    gaps = np.abs(values[:, None] - values[None, :]) + np.eye(n - 1)
    if np.min(gaps) < 1e-9:
        raise ValueError("critical values must be pairwise distinct")
    budget = 16 * n ** (n - 2) if budget is None else budget
    shape = _Shape(n, n)
    rng = np.random.default_rng(seed)
    classes = []
    for path in range(budget):
        try:
            R, _ = _solve_for_values(shape, values, rng, attempts=1)
        except InversionError:
            continue
        got, _ = match_multisets(critical_values(R.numerator), values)
        if got > 1e-8:
            continue
        if not any(same_class(RationalMap.from_polynomial(c), R, n) for c in classes):
            classes.append(R.numerator)
            log.info("t=count, step=%d, residual=%.3e", path, got)
    expected = expected_classes(n)
    return ClassCount(len(classes), len(classes) < expected, classes)
