"""Circle maps: lifts of Blaschke covers, the conjugacy A∘k = B, n-th roots and
comparison of circle diffeomorphisms modulo disk automorphisms.

Angles are always lifted (real, unwrapped).  A circle map is stored through
its lift sampled on the uniform grid θ_j = 2πj/N.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _fourier
from .algebra import BlaschkeProduct
from .errors import ConjugacyError, LemniscateError

TWO_PI = 2.0 * np.pi
DEFAULT_N = 1024
SMOOTHNESS_TOL = 1e-8
ALIGN_POINTS = np.array([0.0, TWO_PI / 3, 2 * TWO_PI / 3])


class UndersampledError(LemniscateError):
    pass


def grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def wrap(angle):
    """Map angles to (-π, π]."""
    return np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), TWO_PI)


def blaschke_lift(B: BlaschkeProduct, theta):
    """Continuous argument of B(e^{iθ}) and its derivative.

    Each factor contributes θ + 2 Arg(1 - a e^{-iθ}); the principal Arg is
    continuous there because |a| < 1.
    """
    theta = np.asarray(theta, dtype=float)
    e = np.exp(-1j * theta)[..., None]
    a = B.zeros
    value = B.theta + B.degree * theta + 2.0 * np.sum(np.angle(1.0 - a * e), axis=-1)
    deriv = np.sum((1.0 - np.abs(a) ** 2) / np.abs(1.0 - a * e) ** 2, axis=-1)
    return value, deriv


@dataclass(frozen=True, eq=False)
class CoverLift:
    """Lift a of a degree-n circle cover: a(θ + 2π) = a(θ) + 2πn, base point a(0) in [0, 2π)."""

    cover: BlaschkeProduct
    samples: np.ndarray
    offset: float

    @property
    def degree(self) -> int:
        return self.cover.degree

    @property
    def N(self) -> int:
        return len(self.samples)

    def __call__(self, theta):
        return blaschke_lift(self.cover, theta)[0] - self.offset

    def derivative(self, theta):
        return blaschke_lift(self.cover, theta)[1]

    def inverse(self, y) -> np.ndarray:
        """Solve a(θ) = y for θ (a is strictly increasing)."""
        y = np.asarray(y, dtype=float)
        n = self.degree
        periods = np.floor(y / (TWO_PI * n))
        target = y - periods * TWO_PI * n
        th = grid(self.N)
        xs = np.concatenate([th - TWO_PI, th, th + TWO_PI, [2 * TWO_PI]])
        ys = np.concatenate(
            [self.samples - TWO_PI * n, self.samples, self.samples + TWO_PI * n, [self.samples[0] + 2 * TWO_PI * n]]
        )
        guess = np.interp(target, ys, xs)
        idx = np.clip(np.searchsorted(ys, target), 1, len(ys) - 1)
        lo, hi = xs[idx - 1].copy(), xs[idx].copy()
        x = guess
        for _ in range(60):
            f = self(x) - target
            lo = np.where(f < 0, x, lo)
            hi = np.where(f > 0, x, hi)
            step = f / self.derivative(x)
            xn = x - step
            outside = (xn <= lo) | (xn >= hi)
            xn = np.where(outside, 0.5 * (lo + hi), xn)
            if np.all(np.abs(xn - x) <= 1e-15 * (1 + np.abs(x))):
                x = xn
                break
            x = xn
        return x + periods * TWO_PI


def lift(cover: BlaschkeProduct, N: int = DEFAULT_N) -> CoverLift:
    """Unwrapped argument of the cover on N uniform circle points."""
    if cover.degree < 1:
        raise ValueError("cover must have degree >= 1")
    raw = blaschke_lift(cover, grid(N))[0]
    offset = TWO_PI * np.floor(raw[0] / TWO_PI)
    samples = raw - offset
    jumps = np.diff(np.append(samples, samples[0] + TWO_PI * cover.degree))
    if np.max(jumps) >= np.pi / 2:
        raise UndersampledError(
            f"grid of {N} points undersamples the cover (max jump {np.max(jumps):.3f}); increase N"
        )
    sampled = np.unwrap(np.angle(cover(np.exp(1j * grid(N)))))
    if np.max(np.abs(sampled - sampled[0] - (samples - samples[0]))) > 1e-8:
        raise UndersampledError("phase unwrapping disagrees with the continuous lift; increase N")
    return CoverLift(cover, samples, offset)


# ---------------------------------------------------------------------------
# Circle diffeomorphisms and disk automorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CircleDiffeo:
    """Orientation preserving circle diffeomorphism given by lift samples u_j = u(2πj/N)."""

    lift: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.lift, dtype=float).copy()
        u.setflags(write=False)
        object.__setattr__(self, "lift", u)

    @property
    def N(self) -> int:
        return len(self.lift)

    @cached_property
    def _periodic(self):
        return _fourier.coefficients(self.lift - grid(self.N))

    def evaluate_lift(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta + _fourier.evaluate(self.lift - grid(self.N), theta, coeffs=self._periodic).real

    def derivative_lift(self, theta):
        theta = np.asarray(theta, dtype=float)
        return 1.0 + _fourier.evaluate(self.lift - grid(self.N), theta, deriv=1, coeffs=self._periodic).real

    def __call__(self, z):
        """Apply the map to points of the unit circle."""
        return np.exp(1j * self.evaluate_lift(np.angle(z)))

    def values(self) -> np.ndarray:
        return np.exp(1j * self.lift)

    def inverse_lift(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        periods = np.floor((y - self.lift[0]) / TWO_PI)
        target = y - periods * TWO_PI
        th = grid(self.N)
        xs = np.concatenate([th, [TWO_PI]])
        ys = np.concatenate([self.lift, [self.lift[0] + TWO_PI]])
        x = np.interp(target, ys, xs)
        for _ in range(30):
            f = self.evaluate_lift(x) - target
            step = f / self.derivative_lift(x)
            x = x - step
            if np.all(np.abs(step) <= 1e-14):
                break
        return x + periods * TWO_PI

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(np.append(self.lift, self.lift[0] + TWO_PI)) > 0))

    def spectral_tail(self) -> float:
        c = np.abs(np.fft.rfft(self.lift - grid(self.N))) / self.N
        return float(np.max(c[3 * len(c) // 4 :]))

    def is_smooth(self, tol: float = SMOOTHNESS_TOL) -> bool:
        return self.spectral_tail() < tol

    def rotate(self, angle: float) -> "CircleDiffeo":
        """Postcompose with the rotation by `angle`."""
        return CircleDiffeo(self.lift + angle)

    def precompose(self, aut: "DiskAutomorphism") -> "CircleDiffeo":
        """Samples of k∘φ on the same grid."""
        return CircleDiffeo(self.evaluate_lift(aut.boundary_lift(grid(self.N))))

    def distance(self, other: "CircleDiffeo") -> float:
        """Sup over the grid of the circular distance between the two maps."""
        return float(np.max(np.abs(wrap(self.lift - other.lift))))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "k_theta"])
            for t, u in zip(grid(self.N), self.lift):
                writer.writerow([f"{t:.17g}", f"{u:.17g}"])


@dataclass(frozen=True)
class DiskAutomorphism:
    """z -> e^{iθ} (z - α) / (1 - conj(α) z)."""

    theta: float
    alpha: complex

    def __post_init__(self):
        if not abs(self.alpha) < 1:
            raise ValueError("automorphism parameter alpha must lie in the unit disk")

    @classmethod
    def identity(cls) -> "DiskAutomorphism":
        return cls(0.0, 0j)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * self.theta) * (z - self.alpha) / (1.0 - np.conj(self.alpha) * z)

    def inverse(self) -> "DiskAutomorphism":
        # w = e^{iθ}(z-α)/(1-ᾱz)  =>  z = e^{-iθ}(w + e^{iθ}α) / (1 + e^{-iθ}ᾱ w)
        return DiskAutomorphism(-self.theta, -np.exp(1j * self.theta) * self.alpha)

    def boundary_lift(self, theta):
        """Continuous argument of φ(e^{iθ}), equal to θ + θ_φ + 2 Arg(1 - α e^{-iθ})."""
        theta = np.asarray(theta, dtype=float)
        return self.theta + theta + 2.0 * np.angle(1.0 - self.alpha * np.exp(-1j * theta))

    def to_json(self) -> dict:
        return {"theta": float(self.theta), "alpha": [float(np.real(self.alpha)), float(np.imag(self.alpha))]}


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def nth_root(B: BlaschkeProduct, n: int | None = None, N: int = DEFAULT_N) -> CircleDiffeo:
    """Branch 0 of B^{1/n} on the circle: lift b(θ)/n with b(0) in [0, 2π)."""
    n = B.degree if n is None else n
    if n != B.degree:
        raise ValueError(f"nth_root needs n = deg B (got n={n}, deg B={B.degree})")
    return CircleDiffeo(lift(B, N).samples / n)


def solve_conjugacy(
    A: BlaschkeProduct, B: BlaschkeProduct, branch: int = 0, N: int = DEFAULT_N, tol: float = 1e-9
) -> CircleDiffeo:
    """Circle diffeomorphism k with A∘k = B, lift u = a⁻¹(b + 2π·branch)."""
    if A.degree != B.degree:
        raise ValueError("A and B must have the same degree")
    n = A.degree
    if not 0 <= branch < n:
        raise ValueError(f"branch must lie in 0..{n - 1}")
    a = lift(A, N)
    b = lift(B, N)
    u = a.inverse(b.samples + TWO_PI * branch)
    k = CircleDiffeo(u)
    residual = conjugacy_residual(A, B, k)
    if not residual <= tol:
        raise ConjugacyError(f"conjugacy residual {residual:.3e} exceeds {tol:.1e}")
    return k


def conjugacy_residual(A: BlaschkeProduct, B: BlaschkeProduct, k: CircleDiffeo, M: int | None = None) -> float:
    """sup |A(k(e^{iθ})) - B(e^{iθ})| on the grid of k (or on M points by interpolation)."""
    if M is None or M == k.N:
        th, u = grid(k.N), k.lift
    else:
        th = grid(M)
        u = k.evaluate_lift(th)
    return float(np.max(np.abs(A(np.exp(1j * u)) - B(np.exp(1j * th)))))


def deck_transformation(A: BlaschkeProduct, k: CircleDiffeo, shift: int = 1) -> CircleDiffeo:
    """Postcompose k with the deck transformation of A that moves the lift of A by 2π·shift."""
    a = lift(A, k.N)
    return CircleDiffeo(a.inverse(a(k.lift) + TWO_PI * shift))


def _mobius_from_points(z, w) -> np.ndarray:
    """2x2 matrix of the Möbius map sending the three points z to the three points w."""

    def to_standard(p):
        p1, p2, p3 = p
        return np.array([[p2 - p3, -p1 * (p2 - p3)], [p2 - p1, -p3 * (p2 - p1)]], dtype=complex)

    return np.linalg.solve(to_standard(w), to_standard(z))


def _automorphism_from_matrix(m: np.ndarray) -> DiskAutomorphism | None:
    (a, b), (c, d) = m
    if abs(a) < 1e-300:
        return None
    alpha = -b / a
    if not abs(alpha) < 1:
        return None
    z = 1.0 if abs(1.0 - alpha) > 0.5 else -1.0
    val = (a * z + b) / (c * z + d)
    rot = val * (1.0 - np.conj(alpha) * z) / (z - alpha)
    return DiskAutomorphism(float(np.angle(rot)), complex(alpha))


def _polish_automorphism(aut, angles, targets, iters=20):
    x = np.array([aut.theta, np.real(aut.alpha), np.imag(aut.alpha)])

    def residual(x):
        return wrap(DiskAutomorphism(x[0], complex(x[1], x[2])).boundary_lift(angles) - targets)

    for _ in range(iters):
        r = residual(x)
        if np.max(np.abs(r)) < 1e-15:
            break
        jac = np.empty((3, 3))
        h = 1e-7
        for j in range(3):
            xp = x.copy()
            xp[j] += h
            if abs(complex(xp[1], xp[2])) >= 1:
                xp[j] -= 2 * h
                jac[:, j] = (r - residual(xp)) / h
            else:
                jac[:, j] = (residual(xp) - r) / h
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            break
        xn = x - step
        while abs(complex(xn[1], xn[2])) >= 1:
            step /= 2
            xn = x - step
        x = xn
    return DiskAutomorphism(float(x[0]), complex(x[1], x[2]))


def _coarse_search(angles, targets):
    best, best_val = None, np.inf
    for r in np.linspace(0, 0.95, 20):
        for phase in np.linspace(0, TWO_PI, 24, endpoint=False):
            alpha = r * np.exp(1j * phase)
            for theta in np.linspace(-np.pi, np.pi, 24, endpoint=False):
                aut = DiskAutomorphism(theta, alpha)
                val = np.max(np.abs(wrap(aut.boundary_lift(angles) - targets)))
                if val < best_val:
                    best, best_val = aut, val
            if r == 0:
                break
    return best


def align_mod_automorphism(k1: CircleDiffeo, k2: CircleDiffeo) -> tuple[DiskAutomorphism, float]:
    """Disk automorphism φ with k1∘φ = k2 at the three points 1, e^{2πi/3}, e^{4πi/3}.

    Returns φ and the sup circular distance between k1∘φ and k2 on the grid.
    """
    if k1.N != k2.N:
        raise ValueError("diffeomorphisms must share the grid size")
    targets = k1.inverse_lift(k2.evaluate_lift(ALIGN_POINTS))
    z = np.exp(1j * ALIGN_POINTS)
    w = np.exp(1j * targets)
    aut = None
    try:
        aut = _automorphism_from_matrix(_mobius_from_points(z, w))
    except np.linalg.LinAlgError:
        aut = None
    if aut is None:
        aut = _coarse_search(ALIGN_POINTS, targets)
    aut = _polish_automorphism(aut, ALIGN_POINTS, targets)
    aligned = k1.precompose(aut)
    return aut, aligned.distance(k2)
