"""Complex polynomials, rational maps and Blaschke products.

All three map types are immutable and evaluate vectorised over numpy
arrays.  Coefficients are stored in ascending degree order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    BlaschkeFitError,
    DegenerateMapError,
    PoleError,
    RootFindingError,
)

TRIM_TOL = 1e-14
CLUSTER_RADIUS = 1e-7
ROOT_RESIDUAL_TOL = 1e-10
BLASCHKE_ZERO_MARGIN = 1e-12
POLE_TOL = 1e-14


def _as_complex_array(values) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=complex))


def _horner(coeffs: np.ndarray, z):
    """Value and first derivative of an ascending coefficient vector at z."""
    z = np.asarray(z, dtype=complex)
    value = np.full(z.shape, coeffs[-1], dtype=complex)
    deriv = np.zeros(z.shape, dtype=complex)
    for c in coeffs[-2::-1]:
        deriv = deriv * z + value
        value = value * z + c
    return value, deriv


def _abs_scale(coeffs: np.ndarray, z) -> np.ndarray:
    """sum |c_k| |z|^k, the natural backward-error scale of a polynomial at z."""
    r = np.abs(np.asarray(z, dtype=complex))
    value = np.full(r.shape, abs(coeffs[-1]))
    for c in coeffs[-2::-1]:
        value = value * r + abs(c)
    return value


def complex_to_pairs(values) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in _as_complex_array(values)]


def pairs_to_complex(pairs, where="value") -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: expected a list of [re, im] pairs") from exc
    if arr.ndim == 1 and arr.size == 0:
        return np.zeros(0, dtype=complex)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{where}: expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    """Polynomial with complex coefficients in ascending order.

    Trailing coefficients smaller than ``1e-14`` times the largest one are
    dropped on construction so that the leading coefficient is always
    numerically nonzero.
    """

    coeffs: np.ndarray
    canonical: bool = False

    def __post_init__(self):
        c = _as_complex_array(self.coeffs).copy()
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        scale = np.max(np.abs(c)) if c.size else 0.0
        if scale == 0.0:
            raise DegenerateMapError("zero polynomial")
        last = len(c) - 1
        while last > 0 and abs(c[last]) <= TRIM_TOL * scale:
            last -= 1
        c = c[: last + 1]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots, leading=1.0) -> "ComplexPolynomial":
        roots = _as_complex_array(roots)
        c = np.array([leading], dtype=complex)
        for r in roots:
            c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
        return cls(c)

    @classmethod
    def monomial(cls, n: int) -> "ComplexPolynomial":
        c = np.zeros(n + 1, dtype=complex)
        c[n] = 1.0
        return cls(c, canonical=True)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, z):
        return _horner(self.coeffs, z)[0]

    def eval_with_derivative(self, z):
        return _horner(self.coeffs, z)

    def derivative(self) -> "ComplexPolynomial":
        if self.degree == 0:
            raise DegenerateMapError("derivative of a constant polynomial vanishes identically")
        return ComplexPolynomial(self.coeffs[1:] * np.arange(1, self.degree + 1))

    def roots(self, **kwargs) -> np.ndarray:
        return roots(self, **kwargs)

    def __add__(self, other):
        other = _coerce_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return ComplexPolynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPolynomial(self.coeffs * other)
        other = _coerce_poly(other)
        return ComplexPolynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def compose_affine(self, a: complex, b: complex = 0.0) -> "ComplexPolynomial":
        """Return z -> p(a z + b)."""
        result = np.zeros(1, dtype=complex)
        inner = np.array([b, a], dtype=complex)
        for c in self.coeffs[::-1]:
            result = np.convolve(result, inner)
            result[0] += c
        return ComplexPolynomial(result)

    def with_positive_leading(self) -> "ComplexPolynomial":
        """Multiply by the unimodular constant making the leading coefficient positive.

        The lemniscate |p| = 1 is unchanged.
        """
        phase = self.leading / abs(self.leading)
        c = self.coeffs / phase
        c[-1] = abs(self.leading)
        return ComplexPolynomial(c)

    def canonical_form(self) -> "ComplexPolynomial":
        """Monic, root-centroid-zero representative of the shape class of Γ(p).

        Obtained by a unimodular post-factor (lemniscate unchanged) followed by
        precomposition with z -> s z + t, s > 0 (a similarity of the curve).
        """
        n = self.degree
        if n < 1:
            raise DegenerateMapError("canonical form needs degree >= 1")
        q = self.with_positive_leading()
        s = q.leading ** (-1.0 / n)
        q = q.compose_affine(s, 0.0)
        shift = -q.coeffs[n - 1] / (n * q.leading)
        q = q.compose_affine(1.0, shift)
        c = q.coeffs.copy()
        c[-1] = 1.0
        c[n - 1] = 0.0
        return ComplexPolynomial(c, canonical=True)

    def is_canonical(self, tol: float = 1e-12) -> bool:
        n = self.degree
        return abs(self.leading - 1.0) <= tol and abs(self.coeffs[n - 1]) <= tol if n >= 1 else False

    def to_json(self) -> dict:
        return {"coeffs": complex_to_pairs(self.coeffs)}

    @classmethod
    def from_json(cls, data, where="poly") -> "ComplexPolynomial":
        if isinstance(data, dict):
            if "coeffs" not in data:
                raise ValueError(f"{where}: missing field 'coeffs'")
            data = data["coeffs"]
        c = pairs_to_complex(data, where=f"{where}.coeffs")
        if c.size == 0:
            raise ValueError(f"{where}.coeffs: empty coefficient list")
        try:
            return cls(c)
        except DegenerateMapError as exc:
            raise ValueError(f"{where}.coeffs: {exc}") from exc

    def __repr__(self):
        return f"ComplexPolynomial({np.array2string(self.coeffs, precision=6)})"


def _coerce_poly(value) -> ComplexPolynomial:
    if isinstance(value, ComplexPolynomial):
        return value
    return ComplexPolynomial([complex(value)])


# ---------------------------------------------------------------------------
# Rational maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RationalMap:
    """R = numerator / denominator with deg numerator > deg denominator, so R(∞) = ∞."""

    numerator: ComplexPolynomial
    denominator: ComplexPolynomial = field(default_factory=lambda: ComplexPolynomial([1.0]))
    check: bool = True

    def __post_init__(self):
        if self.numerator.degree <= self.denominator.degree:
            raise ValueError("rational map must fix infinity: deg numerator > deg denominator")
        if self.check and self.denominator.degree > 0:
            zs, ps = roots(self.numerator), roots(self.denominator)
            gap = np.min(np.abs(zs[:, None] - ps[None, :]))
            if gap <= 1e-10:
                raise ValueError(f"numerator and denominator share a root (distance {gap:.2e})")

    @classmethod
    def from_polynomial(cls, p: ComplexPolynomial) -> "RationalMap":
        return cls(p, ComplexPolynomial([1.0]), check=False)

    @property
    def degree(self) -> int:
        return self.numerator.degree

    @property
    def is_polynomial(self) -> bool:
        return self.denominator.degree == 0

    def __call__(self, z):
        return self.eval_with_derivative(z)[0]

    def eval_with_derivative(self, z):
        n, dn = _horner(self.numerator.coeffs, z)
        d, dd = _horner(self.denominator.coeffs, z)
        scale = _abs_scale(self.denominator.coeffs, z)
        bad = np.abs(d) <= POLE_TOL * scale
        if np.any(bad):
            raise PoleError(complex(np.asarray(z, dtype=complex)[bad].ravel()[0]))
        return n / d, (dn * d - n * dd) / (d * d)

    def zeros(self) -> np.ndarray:
        return roots(self.numerator)

    def poles(self) -> np.ndarray:
        if self.denominator.degree == 0:
            return np.zeros(0, dtype=complex)
        return roots(self.denominator)

    def multiply(self, c: complex) -> "RationalMap":
        return RationalMap(self.numerator * c, self.denominator, check=False)

    def compose_affine(self, a: complex, b: complex = 0.0) -> "RationalMap":
        return RationalMap(
            self.numerator.compose_affine(a, b), self.denominator.compose_affine(a, b), check=False
        )

    def to_json(self) -> dict:
        return {"num": self.numerator.to_json(), "den": self.denominator.to_json()}

    @classmethod
    def from_json(cls, data, where="rational") -> "RationalMap":
        if not isinstance(data, dict):
            raise ValueError(f"{where}: expected an object with 'num' and 'den'")
        for key in ("num", "den"):
            if key not in data:
                raise ValueError(f"{where}: missing field '{key}'")
        num = ComplexPolynomial.from_json(data["num"], where=f"{where}.num")
        den = ComplexPolynomial.from_json(data["den"], where=f"{where}.den")
        try:
            return cls(num, den)
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from exc

    def __repr__(self):
        return f"RationalMap(num={self.numerator!r}, den={self.denominator!r})"


# ---------------------------------------------------------------------------
# Blaschke products
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    """e^{iθ} ∏ (z - a_k) / (1 - conj(a_k) z) with every |a_k| < 1."""

    theta: float
    zeros: np.ndarray

    def __post_init__(self):
        a = _as_complex_array(self.zeros).copy()
        if a.size == 0:
            raise ValueError("Blaschke product needs at least one zero")
        if np.any(np.abs(a) >= 1.0 - BLASCHKE_ZERO_MARGIN):
            raise ValueError("Blaschke zeros must lie strictly inside the unit disk")
        a.setflags(write=False)
        object.__setattr__(self, "zeros", a)
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def monomial(cls, n: int, theta: float = 0.0) -> "BlaschkeProduct":
        return cls(theta, np.zeros(n, dtype=complex))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def fixes_infinity(self) -> bool:
        return bool(np.any(np.abs(self.zeros) <= BLASCHKE_ZERO_MARGIN))

    def _factors(self, z):
        z = np.asarray(z, dtype=complex)[..., None]
        a = self.zeros
        return (z - a) / (1.0 - np.conj(a) * z), (1.0 - np.abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2

    def __call__(self, z):
        f, _ = self._factors(z)
        return np.exp(1j * self.theta) * np.prod(f, axis=-1)

    def eval_with_derivative(self, z):
        f, df = self._factors(z)
        n = self.degree
        value = np.prod(f, axis=-1)
        deriv = np.zeros(value.shape, dtype=complex)
        for k in range(n):
            others = np.prod(np.delete(f, k, axis=-1), axis=-1) if n > 1 else 1.0
            deriv = deriv + df[..., k] * others
        rot = np.exp(1j * self.theta)
        return rot * value, rot * deriv

    def numerator_denominator(self) -> tuple[ComplexPolynomial, ComplexPolynomial]:
        num = ComplexPolynomial.from_roots(self.zeros, leading=np.exp(1j * self.theta))
        den = np.array([1.0], dtype=complex)
        for a in self.zeros:
            den = np.convolve(den, [1.0, -np.conj(a)])
        return num, ComplexPolynomial(den)

    def rotate_argument(self, gamma: float) -> "BlaschkeProduct":
        """Return z -> B(e^{iγ} z)."""
        return BlaschkeProduct(self.theta + self.degree * gamma, self.zeros * np.exp(-1j * gamma))

    def to_json(self) -> dict:
        return {"theta": float(self.theta), "zeros": complex_to_pairs(self.zeros)}

    @classmethod
    def from_json(cls, data, where="blaschke") -> "BlaschkeProduct":
        if not isinstance(data, dict):
            raise ValueError(f"{where}: expected an object with 'theta' and 'zeros'")
        for key in ("theta", "zeros"):
            if key not in data:
                raise ValueError(f"{where}: missing field '{key}'")
        try:
            theta = float(data["theta"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{where}.theta: expected a number") from exc
        zeros = pairs_to_complex(data["zeros"], where=f"{where}.zeros")
        try:
            return cls(theta, zeros)
        except ValueError as exc:
            raise ValueError(f"{where}.zeros: {exc}") from exc

    def __repr__(self):
        return f"BlaschkeProduct(theta={self.theta:.6g}, zeros={np.array2string(self.zeros, precision=6)})"


# ---------------------------------------------------------------------------
# Roots
# ---------------------------------------------------------------------------


def _aberth(a: np.ndarray, z: np.ndarray, maxiter: int) -> tuple[np.ndarray, bool]:
    """Ehrlich-Aberth simultaneous iteration on an ascending coefficient vector."""
    m = len(z)
    done = np.zeros(m, dtype=bool)
    eps = np.finfo(float).eps
    for _ in range(maxiter):
        pz, dpz = _horner(a, z)
        scale = _abs_scale(a, z)
        done |= np.abs(pz) <= 4 * eps * scale
        if np.all(done):
            return z, True
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            s = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        if np.any(bad):
            w[bad] = 1e-3 * (1.0 + np.abs(z[bad])) * np.exp(1j * np.arange(np.sum(bad)))
        w[done] = 0.0
        z = z - w
        small = np.abs(w) <= 2 * eps * np.maximum(np.abs(z), 1e-300)
        done |= small
    pz = _horner(a, z)[0]
    return z, bool(np.all(np.abs(pz) <= 1e-12 * _abs_scale(a, z)))


def _initial_guesses(a: np.ndarray, rng: np.random.Generator | None) -> np.ndarray:
    m = len(a) - 1
    monic = a / a[-1]
    center = -monic[m - 1] / m if m >= 1 else 0.0
    shifted = ComplexPolynomial(monic).compose_affine(1.0, center).coeffs
    radius = max(
        (abs(shifted[k]) ** (1.0 / (m - k)) for k in range(m) if shifted[k] != 0), default=1.0
    )
    radius = max(radius, 1e-8)
    offset = 0.4 if rng is None else rng.uniform(0, 2 * np.pi)
    if rng is not None:
        radius *= rng.uniform(0.5, 1.5)
    return center + radius * np.exp(1j * (2 * np.pi * np.arange(m) / m + offset))


def _newton_polish(a: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    z = z.copy()
    for _ in range(steps):
        pz, dpz = _horner(a, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            znew = z - pz / dpz
        ok = np.isfinite(znew) & (np.abs(_horner(a, znew)[0]) < np.abs(pz))
        z[ok] = znew[ok]
    return z


def _deflation_roots(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sequential Newton + synthetic division; the slow but simple fallback."""
    work = a.astype(complex)
    found = []
    while len(work) > 2:
        z = complex(rng.normal(), rng.normal())
        for _ in range(200):
            pz, dpz = _horner(work, z)
            if dpz == 0:
                z += 1e-3
                continue
            step = pz / dpz
            z -= step
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        found.append(z)
        desc = work[::-1]
        quotient, _ = np.polydiv(desc, np.array([1.0, -z]))
        work = np.asarray(quotient, dtype=complex)[::-1]
    found.append(-work[0] / work[1])
    return _newton_polish(a, np.array(found))


def _cluster(z: np.ndarray, radius: float) -> np.ndarray:
    """Replace single-linkage clusters of radius `radius` by their centroid (multiplicity kept)."""
    m = len(z)
    label = np.arange(m)
    for i in range(m):
        for j in range(i + 1, m):
            if abs(z[i] - z[j]) <= radius * max(1.0, abs(z[i])):
                old, new = label[j], label[i]
                label[label == old] = new
    out = z.copy()
    for lab in np.unique(label):
        idx = label == lab
        if np.sum(idx) > 1:
            out[idx] = np.mean(z[idx])
    return out


def roots(p: ComplexPolynomial, *, restarts: int = 6, maxiter: int = 400, seed: int = 0) -> np.ndarray:
    """All roots of p with multiplicity.

    Aberth-Ehrlich iteration with random restarts, then a deflation fallback.
    Each root r satisfies |p(r)| <= 1e-10 * sum_k |c_k| |r|^k.
    """
    if not isinstance(p, ComplexPolynomial):
        p = ComplexPolynomial(p)
    c = p.coeffs
    n = p.degree
    if n < 1:
        raise DegenerateMapError("roots of a constant polynomial")
    k = 0
    while k < n and c[k] == 0:
        k += 1
    core = c[k:]
    m = n - k
    out = np.zeros(k, dtype=complex)
    if m == 0:
        return out
    if m == 1:
        return np.concatenate([out, [-core[0] / core[1]]])
    # rescale z = rho*w so the roots are O(1); the cluster radius is absolute
    powers = np.arange(m)
    rho = float(np.max(np.abs(core[:m] / core[m]) ** (1.0 / (m - powers))))
    if rho > 0 and np.isfinite(rho) and not 1e-3 < rho < 1e3:
        scaled = core * rho ** np.arange(m + 1) / rho**m
        return np.concatenate([out, rho * roots(ComplexPolynomial(scaled), restarts=restarts, maxiter=maxiter, seed=seed)])

    def acceptable(z):
        res = np.abs(_horner(core, z)[0]) / _abs_scale(core, z)
        return np.all(np.isfinite(z)) and np.max(res) <= ROOT_RESIDUAL_TOL, np.max(res)

    rng = None
    worst = np.inf
    for attempt in range(restarts + 1):
        z0 = _initial_guesses(core, rng)
        z, _ = _aberth(core, z0, maxiter)
        z = _newton_polish(core, z)
        # judge the individual roots: a cluster mean need not be a small-residual point
        ok, res = acceptable(z)
        if ok:
            return np.concatenate([out, _cluster(z, CLUSTER_RADIUS)])
        worst = min(worst, res)
        rng = np.random.default_rng(seed + attempt)
    z = _deflation_roots(core, np.random.default_rng(seed))
    ok, res = acceptable(z)
    if ok:
        return np.concatenate([out, _cluster(z, CLUSTER_RADIUS)])
    raise RootFindingError("root finder did not converge", min(worst, res))


def match_multisets(a, b) -> tuple[float, np.ndarray]:
    """Optimal pairing of two equal-size point sets; returns (max pair distance, permutation of b)."""
    a, b = _as_complex_array(a), _as_complex_array(b)
    if len(a) != len(b):
        raise ValueError("multisets of different size")
    if len(a) == 0:
        return 0.0, np.zeros(0, dtype=int)
    cost = np.abs(a[:, None] - b[None, :])
    cost = np.where(np.isfinite(cost), cost, 1e300)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(a), dtype=int)
    perm[rows] = cols
    return float(np.max(cost[rows, cols])), perm


# ---------------------------------------------------------------------------
# Critical points, evaluation, fitting
# ---------------------------------------------------------------------------


def _numerator_denominator(m) -> tuple[ComplexPolynomial, ComplexPolynomial]:
    if isinstance(m, ComplexPolynomial):
        return m, ComplexPolynomial([1.0])
    if isinstance(m, RationalMap):
        return m.numerator, m.denominator
    if isinstance(m, BlaschkeProduct):
        return m.numerator_denominator()
    raise TypeError(f"unsupported map type {type(m).__name__}")


def critical_points(m) -> np.ndarray:
    """Finite critical points of a polynomial, rational map or Blaschke product."""
    if isinstance(m, ComplexPolynomial):
        if m.degree < 1:
            raise DegenerateMapError("constant polynomial has no critical points")
        if m.degree == 1:
            return np.zeros(0, dtype=complex)
        return roots(m.derivative())
    num, den = _numerator_denominator(m)
    wronskian = np.convolve(num.derivative().coeffs, den.coeffs)
    if den.degree > 0:
        prod = np.convolve(num.coeffs, den.derivative().coeffs)
        size = max(len(wronskian), len(prod))
        w = np.zeros(size, dtype=complex)
        w[: len(wronskian)] += wronskian
        w[: len(prod)] -= prod
        wronskian = w
    scale = max(np.max(np.abs(np.convolve(num.coeffs, den.coeffs))), 1e-300)
    if np.max(np.abs(wronskian)) <= 1e-13 * scale:
        raise DegenerateMapError("derivative vanishes identically")
    c = np.asarray(wronskian, dtype=complex)
    if num.degree != den.degree:
        # top coefficient is (deg num - deg den) * lead(num) * lead(den), never cancelled
        c = c[: num.degree + den.degree]
    else:
        # the z^(2n-1) terms cancel exactly; further cancellation means critical points at infinity
        c = c[: 2 * num.degree - 1]
        last = len(c) - 1
        while last > 0 and abs(c[last]) <= 1e-13 * scale:
            last -= 1
        c = c[: last + 1]
    w = ComplexPolynomial(c)
    if w.degree == 0:
        return np.zeros(0, dtype=complex)
    return roots(w)


def critical_values(m) -> np.ndarray:
    """Images of the finite critical points; a critical point at a pole maps to complex infinity.

    Polynomials of degree n give n-1 values, rational maps fixing ∞ with a
    simple pole there give 2n-2.
    """
    pts = critical_points(m)
    if isinstance(m, ComplexPolynomial):
        return m(pts)
    num, den = _numerator_denominator(m)
    nv = num(pts)
    dv = den(pts)
    scale = _abs_scale(den.coeffs, pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(np.abs(dv) <= 1e-12 * scale, complex(np.inf, 0.0), nv / dv)
    return vals


def eval_with_derivative(m, z):
    """(value, derivative) of any supported map type at z."""
    if isinstance(m, (ComplexPolynomial, RationalMap, BlaschkeProduct)):
        return m.eval_with_derivative(z)
    if hasattr(m, "eval_with_derivative"):
        return m.eval_with_derivative(z)
    raise TypeError(f"unsupported map type {type(m).__name__}")


def blaschke_fit(points, values, zeros, *, tol: float = 1e-6) -> tuple[BlaschkeProduct, float]:
    """Fit the rotation of a Blaschke product with prescribed zeros to boundary samples.

    Returns the product and the sup residual over the samples.  The rotation
    is the circular mean of value / (product without rotation).
    """
    points = _as_complex_array(points)
    values = _as_complex_array(values)
    base = BlaschkeProduct(0.0, zeros)
    raw = base(points)
    ratio = values / raw
    theta = float(np.angle(np.sum(ratio / np.abs(ratio))))
    fitted = BlaschkeProduct(theta, zeros)
    residual = float(np.max(np.abs(fitted(points) - values)))
    if not residual <= tol:
        raise BlaschkeFitError(residual, tol)
    return fitted, residual
