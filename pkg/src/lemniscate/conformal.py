"""Numerical Riemann maps onto the two sides of a smooth Jordan curve.

The interior map is computed from the Szegő kernel, which solves the
Kerzman–Stein second-kind integral equation on the boundary.  The Nyström
discretization with the trapezoid rule converges geometrically for analytic
curves.  Once the boundary correspondence is known, the map is stored as a
Taylor series whose coefficients come from one FFT of the boundary values.

The exterior map reuses the interior solver after the inversion
z ↦ 1/(z − z₀).  For polynomial lemniscates a second, independent exterior
map is available as the branch of P^{1/n} that behaves like z at infinity.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import _fourier
from .algebra import ComplexPolynomial, _horner
from .curves import JordanCurve
from .errors import ConformalMapError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DENSE_SOLVE_MAX = 1024
GMRES_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class RiemannMap:
    """Conformal map from the unit disk (interior) or its complement (exterior) onto one side of `curve`.

    `sigma[j]` is the (lifted) curve parameter of the image of e^{2πij/N}.
    Series maps keep Taylor coefficients of the interior problem; an exterior
    series map is z₀ + 1/ψ(1/ζ) where ψ is the interior map of the inverted
    curve and z₀ = `center`.
    """

    side: str
    curve: JordanCurve
    sigma: np.ndarray
    center: complex
    capacity: float | None = None
    coeffs: np.ndarray | None = None
    polynomial: ComplexPolynomial | None = None
    model_curve: JordanCurve | None = None
    model_angle: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.sigma)

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.N) / self.N

    @property
    def kind(self) -> str:
        return "root_branch" if self.polynomial is not None else "series"

    # -- evaluation ---------------------------------------------------------

    def _series(self, w, deriv=False):
        c = self.coeffs
        if deriv:
            c = c[1:] * np.arange(1, len(c))
        return np.polyval(c[::-1], w)

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        if self.polynomial is not None:
            return _root_branch_forward(self.polynomial, z)
        if self.side == "interior":
            return self._series(z)
        return self.center + 1.0 / self._series(1.0 / z)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.polynomial is not None:
            n = self.polynomial.degree
            return n * z ** (n - 1) / self.polynomial.derivative()(self.evaluate(z))
        if self.side == "interior":
            return self._series(z, deriv=True)
        w = 1.0 / z
        return self._series(w, deriv=True) / (self._series(w) ** 2 * z * z)

    def boundary_values(self) -> np.ndarray:
        """Curve points φ(e^{iθ_j}) taken from the boundary correspondence."""
        return self.curve.evaluate(self.sigma)

    def inverse(self, w):
        return map_invert(self, w)

    @property
    def boundary_angle(self) -> np.ndarray:
        """Lifted angle arg φ⁻¹(z(t_j)) at the nodes of `curve`."""
        if self.model_angle is None:
            raise AttributeError("boundary angles are only kept for series maps")
        if self.side == "interior":
            return self.model_angle
        a = self.model_angle
        out = np.empty_like(a)
        out[0] = -a[0]
        out[1:] = TWO_PI - a[:0:-1]
        return out

    def inverse_cauchy(self, w):
        """φ⁻¹ at points off the curve from the Cauchy integral of its boundary values.

        Uses the ratio of two trapezoid sums, which stays accurate much closer
        to the boundary than the plain Cauchy formula.
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        x = w if self.side == "interior" else 1.0 / (w - self.center)
        zc = self.model_curve.samples
        kern = self.model_curve.derivative[None, :] / (zc[None, :] - x[:, None])
        vals = np.exp(1j * self.model_angle)
        out = (kern @ vals) / kern.sum(axis=1)
        return out if self.side == "interior" else 1.0 / out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "sigma"])
            for t, s in zip(self.theta, self.sigma):
                writer.writerow([f"{t:.17g}", f"{s:.17g}"])


# ---------------------------------------------------------------------------
# Interior solver
# ---------------------------------------------------------------------------


def _szego_boundary(z, dz, a):
    """Szegő kernel S(a, ·) at the nodes, and the Nyström solver's residual history."""
    N = len(z)
    speed = np.abs(dz)
    T = dz / speed
    w = speed * TWO_PI / N
    diff = z[None, :] - z[:, None]  # z_j - z_i
    np.fill_diagonal(diff, 1.0)
    H = T[None, :] / (2j * np.pi * diff)  # H(z_i, z_j)
    # A(z_i, z_j) = conj(H(z_j, z_i)) - H(z_i, z_j); skew-Hermitian, zero on the diagonal
    A = np.conj(H.T) - H
    np.fill_diagonal(A, 0.0)
    A *= w[None, :]
    rhs = np.conj(T / (2j * np.pi * (z - a)))
    history = []
    if N <= DENSE_SOLVE_MAX:
        K = A + np.eye(N)
        S = np.linalg.solve(K, rhs)
        history.append(float(np.linalg.norm(K @ S - rhs) / np.linalg.norm(rhs)))
    else:
        op = LinearOperator((N, N), matvec=lambda x: x + A @ x, dtype=complex)
        S, info = gmres(op, rhs, rtol=GMRES_TOL, atol=0.0, restart=200, maxiter=20,
                        callback=lambda r: history.append(float(r)), callback_type="pr_norm")
        final = float(np.linalg.norm(S + A @ S - rhs) / np.linalg.norm(rhs))
        history.append(final)
        if info != 0 and final > 1e-10:
            raise ConformalMapError("boundary integral equation did not converge", history)
    return S, history


def _invert_lift(g, g_coeffs, targets):
    """Solve t + g(t) = targets for t, with g a real trigonometric series and t + g increasing.

    Each target is bracketed between two grid nodes; Newton steps that leave
    the bracket are replaced by bisection.
    """
    N = len(g)
    t_grid = TWO_PI * np.arange(N + 1) / N
    f_grid = t_grid + np.append(g, g[0])
    targets = np.asarray(targets, dtype=float)
    # shift targets into the range covered by one period of the grid
    shift = TWO_PI * np.floor((targets - f_grid[0]) / TWO_PI)
    tt = targets - shift
    idx = np.clip(np.searchsorted(f_grid, tt) - 1, 0, N - 1)
    lo, hi = t_grid[idx], t_grid[idx + 1]
    t = lo + (hi - lo) * (tt - f_grid[idx]) / (f_grid[idx + 1] - f_grid[idx])
    for _ in range(100):
        val = t + _fourier.evaluate(g, t, coeffs=g_coeffs) - tt
        lo = np.where(val < 0, t, lo)
        hi = np.where(val > 0, t, hi)
        der = 1.0 + _fourier.evaluate(g, t, deriv=1, coeffs=g_coeffs)
        new = t - val / der
        outside = ~((new > lo) & (new < hi)) | ~np.isfinite(new)
        new = np.where(outside, 0.5 * (lo + hi), new)
        step = np.abs(new - t)
        t = new
        if np.max(step) < 1e-14:
            return t + shift
    raise ConformalMapError("boundary correspondence inversion did not converge")


def _normalize_lift(sigma):
    return sigma - TWO_PI * np.floor((sigma[0] + 1e-12) / TWO_PI)


def _interior_series(curve: JordanCurve, a: complex):
    """Taylor coefficients of the interior map with φ(0) = a, φ'(0) > 0, plus σ and diagnostics."""
    z = curve.samples
    dz = curve.derivative
    N = len(z)
    t = curve.t
    S, history = _szego_boundary(z, dz, a)
    density = np.abs(S) ** 2 * np.abs(dz)  # proportional to θ'(t)
    density *= N / np.sum(density)  # θ' integrates to 2π
    if np.min(density) <= 0:
        raise ConformalMapError("boundary correspondence is not monotone", history)
    # θ(t) = t + g(t) with g periodic; fix its constant by the boundary value of the map
    f_boundary = -1j * (dz / np.abs(dz)) * S**2 / np.abs(S) ** 2
    c = np.fft.fft(density - 1.0) / N
    k = np.fft.fftfreq(N, 1.0 / N)
    with np.errstate(divide="ignore", invalid="ignore"):
        ci = np.where(k != 0, c / (1j * k), 0.0)
    g = np.real(np.fft.ifft(ci) * N)
    offset = np.angle(np.mean(f_boundary * np.exp(-1j * (t + g))))
    g = g + offset
    g_coeffs = _fourier.coefficients(g)
    sigma = _invert_lift(g, g_coeffs, t)
    boundary = curve.evaluate(sigma)
    coeffs = np.fft.fft(boundary) / N
    # rotate so that φ'(0) > 0 exactly
    rot = float(np.angle(coeffs[1]))
    if abs(rot) > 1e-15:
        sigma = _invert_lift(g, g_coeffs, t - rot)
        boundary = curve.evaluate(sigma)
        coeffs = np.fft.fft(boundary) / N
    sigma = _normalize_lift(sigma)
    node_angle = t + g + rot
    half = N // 2
    positive = coeffs[:half].copy()
    negative = coeffs[half + 1 :]
    scale = np.max(np.abs(boundary - a))
    diagnostics = {
        "solver_history": history,
        "negative_frequency": float(np.max(np.abs(negative)) / scale) if negative.size else 0.0,
        "series_tail": float(np.max(np.abs(positive[3 * half // 4 :])) / scale),
        "density_tail": _fourier.tail(density),
    }
    positive[0] = a
    positive[1] = abs(positive[1])
    return positive, sigma, node_angle, diagnostics


def _check_inside(curve: JordanCurve, z0: complex):
    if curve.winding_number(z0)[0] != 1:
        raise ValueError(f"point {z0!r} is not inside the curve")


def interior_map(curve: JordanCurve, z0: complex | None = None) -> RiemannMap:
    """Riemann map φ: 𝔻 → inside of `curve` with φ(0) = z0 and φ'(0) > 0."""
    z0 = complex(curve.interior_point if z0 is None else z0)
    _check_inside(curve, z0)
    coeffs, sigma, angle, diag = _interior_series(curve, z0)
    return RiemannMap(
        "interior", curve, sigma, z0, coeffs=coeffs, model_curve=curve, model_angle=angle, diagnostics=diag
    )


def _inverted_curve(curve: JordanCurve, z0: complex) -> JordanCurve:
    idx = (-np.arange(curve.N)) % curve.N
    z = curve.samples[idx] - z0
    dz = curve.derivative[idx]
    return JordanCurve(1.0 / z, 0j, dz / z**2)


def exterior_map(curve: JordanCurve) -> RiemannMap:
    """Riemann map of the exterior of the unit disk onto the outside of `curve`, fixing ∞ with φ'(∞) > 0."""
    z0 = curve.interior_point
    _check_inside(curve, z0)
    inv = _inverted_curve(curve, z0)
    coeffs, sigma_inv, angle_inv, diag = _interior_series(inv, 0j)
    # φ₊(e^{iθ}) = z(-σ_inv(-θ))
    N = curve.N
    sigma = np.empty(N)
    sigma[0] = -sigma_inv[0]
    sigma[1:] = TWO_PI - sigma_inv[:0:-1]
    sigma = _normalize_lift(sigma)
    return RiemannMap(
        "exterior",
        curve,
        sigma,
        z0,
        capacity=float(1.0 / coeffs[1].real),
        coeffs=coeffs,
        model_curve=inv,
        model_angle=angle_inv,
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# Root-branch exterior map for polynomial lemniscates
# ---------------------------------------------------------------------------


def _start_scale(p: ComplexPolynomial) -> tuple[float, complex, float]:
    n = p.degree
    lead = p.leading
    cap = abs(lead) ** (-1.0 / n)
    shift = -p.coeffs[n - 1] / (n * lead) if n > 1 else -p.coeffs[0] / lead
    radius = 1.0 + np.max(np.abs(p.coeffs[:-1] / lead)) if n > 0 else 1.0
    return cap, complex(shift), float(1e3 * max(1.0, radius / cap))


def _root_branch_forward(p: ComplexPolynomial, zeta):
    """φ₊(ζ): the solution of P(z) = ζ^n continuing z ~ aζ + b from infinity."""
    zeta = np.asarray(zeta, dtype=complex)
    flat = zeta.ravel()
    n = p.degree
    cap, shift, S = _start_scale(p)
    r = np.abs(flat)
    big = S * np.maximum(1.0, r) / np.maximum(r, 1e-300)
    out = np.full(flat.shape, np.nan, dtype=complex)
    for steps in (64, 256, 1024, 4096):
        todo = np.isnan(out.real)
        if not np.any(todo):
            break
        zt, bt = flat[todo], big[todo]
        start = cap * bt * zt * np.exp(-1j * np.angle(p.leading) / n) + shift
        z, ok = _track_log(p, start, zt, bt, steps)
        res = np.where(ok, z, np.nan)
        out[todo] = res
    if np.any(np.isnan(out.real)):
        raise ConformalMapError("root-branch continuation failed to converge")
    return out.reshape(zeta.shape)


def _track_log(p, z, zeta, big, steps):
    """Continuation of P(z) = (s ζ)^n for s from `big` down to 1 (per point), uniform in log s."""
    n = p.degree
    a = p.coeffs
    dp = p.derivative().coeffs
    logs = np.log(big)
    z = np.array(z, dtype=complex)
    ok = np.ones(z.shape, dtype=bool)
    # polish the asymptotic start
    tgt = (big * zeta) ** n
    for _ in range(20):
        val, d = _horner(a, z)
        z = z - (val - tgt) / d
    for i in range(steps):
        s_prev = np.exp(logs * (1 - i / steps))
        s_new = np.exp(logs * (1 - (i + 1) / steps))
        t_prev = (s_prev * zeta) ** n
        t_new = (s_new * zeta) ** n
        d = _horner(dp, z)[0]
        z_pred = z + (t_new - t_prev) / d
        zz = z_pred
        for _ in range(6):
            val, dd = _horner(a, zz)
            zz = zz - (val - t_new) / dd
        moved = np.abs(zz - z)
        ok &= np.abs(zz - z_pred) <= 0.25 * moved + 1e-14 * np.abs(zz)
        z = zz
    val, dd = _horner(a, z)
    ok &= np.abs((val - zeta**n) / dd) <= 1e-11 * np.maximum(1.0, np.abs(z))
    return z, ok


def _root_branch_inverse(p: ComplexPolynomial, z):
    """φ₊⁻¹(z) = P(z)^{1/n}, branch fixed by following the gradient line of |P| out to infinity."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    n = p.degree
    cap, shift, S = _start_scale(p)
    val0 = p(flat)
    if np.any(np.abs(val0) < 1.0 - 1e-12):
        raise ValueError("point lies inside the lemniscate")
    a = p.coeffs
    dp = p.derivative().coeffs
    out = np.full(flat.shape, np.nan, dtype=complex)
    for steps in (64, 256, 1024, 4096):
        todo = np.isnan(out.real)
        if not np.any(todo):
            break
        zz = flat[todo].copy()
        w0 = val0[todo]
        big = S / np.abs(w0) ** (1.0 / n)
        logs = np.log(big)
        ok = np.ones(zz.shape, dtype=bool)
        for i in range(steps):
            s_prev = np.exp(logs * i / steps)
            s_new = np.exp(logs * (i + 1) / steps)
            d = _horner(dp, zz)[0]
            z_pred = zz + (s_new**n - s_prev**n) * w0 / d
            zn = z_pred
            for _ in range(6):
                v, dv = _horner(a, zn)
                zn = zn - (v - s_new**n * w0) / dv
            ok &= np.abs(zn - z_pred) <= 0.25 * np.abs(zn - zz) + 1e-14 * np.abs(zn)
            zz = zn
        approx = (zz - shift) * np.exp(1j * np.angle(p.leading) / n) / cap / big
        roots = np.abs(w0) ** (1.0 / n) * np.exp(1j * (np.angle(w0) + TWO_PI * np.arange(n)[:, None]) / n)
        pick = np.argmin(np.abs(roots - approx[None, :]), axis=0)
        chosen = roots[pick, np.arange(len(pick))]
        # the asymptotic guess must single out one root unambiguously
        second = np.sort(np.abs(roots - approx[None, :]), axis=0)[1] if n > 1 else np.inf
        ok &= np.abs(chosen - approx) < 0.25 * second
        out[todo] = np.where(ok, chosen, np.nan)
    if np.any(np.isnan(out.real)):
        raise ConformalMapError("root-branch inversion failed to converge")
    return out.reshape(z.shape)


def exterior_root_branch(p: ComplexPolynomial, curve: JordanCurve) -> RiemannMap:
    """Exterior map of a proper polynomial lemniscate whose inverse is z ↦ P(z)^{1/n}."""
    if p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    if abs(np.angle(p.leading)) > 1e-12:
        raise ValueError("leading coefficient must be positive")
    N = curve.N
    theta = TWO_PI * np.arange(N) / N
    pts = _root_branch_forward(p, np.exp(1j * theta))
    sigma = _normalize_lift(np.unwrap(curve.parameter_of(pts)))
    if sigma[-1] < sigma[0]:
        raise ConformalMapError("root-branch boundary correspondence has the wrong orientation")
    cap = abs(p.leading) ** (-1.0 / p.degree)
    return RiemannMap("exterior", curve, sigma, curve.interior_point, capacity=float(cap), polynomial=p)


# ---------------------------------------------------------------------------
# Inversion
# ---------------------------------------------------------------------------


def _newton_disk(F, dF, target, seeds, tol=1e-12):
    w = seeds.copy()
    for _ in range(60):
        r = F(w) - target
        step = r / dF(w)
        # damp steps that would leave the disk
        new = w - step
        over = np.abs(new) >= 1.0
        while np.any(over):
            step = np.where(over, 0.5 * step, step)
            new = w - step
            over = np.abs(new) >= 1.0
            if np.all(np.abs(step[over]) < 1e-16):
                break
        w = new
        if np.max(np.abs(step)) < tol * 1e-2:
            break
    return w, np.abs(F(w) - target)


def map_invert(m: RiemannMap, w):
    """Preimage of image-domain points under a Riemann map (Newton from a coarse pullback grid)."""
    scalar = np.ndim(w) == 0
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if m.polynomial is not None:
        x = _root_branch_inverse(m.polynomial, w)
        return x[0] if scalar else x
    if m.side == "interior":
        target = w
    else:
        target = 1.0 / (w - m.center)
    F = lambda x: m._series(x)  # noqa: E731
    dF = lambda x: m._series(x, deriv=True)  # noqa: E731
    r = np.linspace(0.0, 0.98, 25)
    ang = TWO_PI * np.arange(64) / 64
    grid = (r[:, None] * np.exp(1j * ang[None, :])).ravel()
    vals = F(grid)
    seeds = grid[np.argmin(np.abs(vals[None, :] - target[:, None]), axis=1)]
    x, res = _newton_disk(F, dF, target, seeds)
    scale = np.max(np.abs(m.coeffs[1:4]))
    bad = res > 1e-10 * max(scale, 1.0)
    if np.any(bad):
        raise ConformalMapError(f"map inversion did not converge (residual {np.max(res):.2e})")
    x = x if m.side == "interior" else 1.0 / x
    return x[0] if scalar else x
