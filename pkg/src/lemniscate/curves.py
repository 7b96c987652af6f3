"""Lemniscate geometry: sampled Jordan curves and the level set |m(z)| = 1.

Every component of a lemniscate is traced in the variable ψ = arg m, which
increases monotonically along the level curve (with Ω₋ = {|m| < 1} on the
left).  Components are then resampled uniformly in arc length with every
emitted point projected back onto the level set by Newton's method.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from . import _fourier
from .algebra import (
    ComplexPolynomial,
    RationalMap,
    _abs_scale,
    _horner,
    _numerator_denominator,
    critical_points,
    critical_values,
    roots,
)
from .errors import DegenerateLemniscateError, TraceError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEGENERATE_TOL = 1e-9
LEVEL_TOL = 1e-12


# ---------------------------------------------------------------------------
# Jordan curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JordanCurve:
    """Closed curve sampled at t_j = 2πj/N, counterclockwise about `interior_point`.

    `tangents` holds dz/dt at the samples when known analytically; otherwise
    it is obtained by spectral differentiation.
    """

    samples: np.ndarray
    interior_point: complex
    tangents: np.ndarray | None = None
    closed: bool = True

    def __post_init__(self):
        z = np.asarray(self.samples, dtype=complex).copy()
        z.setflags(write=False)
        object.__setattr__(self, "samples", z)
        object.__setattr__(self, "interior_point", complex(self.interior_point))
        if self.tangents is not None:
            dz = np.asarray(self.tangents, dtype=complex).copy()
            dz.setflags(write=False)
            object.__setattr__(self, "tangents", dz)

    @classmethod
    def from_function(cls, f, df, N: int, interior_point: complex) -> "JordanCurve":
        t = TWO_PI * np.arange(N) / N
        return cls(f(t), interior_point, df(t))

    @classmethod
    def circle(cls, center: complex = 0.0, radius: float = 1.0, N: int = 256) -> "JordanCurve":
        return cls.from_function(
            lambda t: center + radius * np.exp(1j * t),
            lambda t: 1j * radius * np.exp(1j * t),
            N,
            center,
        )

    @classmethod
    def ellipse(cls, a: float, b: float, center: complex = 0.0, N: int = 256) -> "JordanCurve":
        return cls.from_function(
            lambda t: center + a * np.cos(t) + 1j * b * np.sin(t),
            lambda t: -a * np.sin(t) + 1j * b * np.cos(t),
            N,
            center,
        )

    @property
    def N(self) -> int:
        return len(self.samples)

    @property
    def t(self) -> np.ndarray:
        return TWO_PI * np.arange(self.N) / self.N

    @cached_property
    def derivative(self) -> np.ndarray:
        if self.tangents is not None:
            return self.tangents
        return _fourier.derivative_samples(self.samples)

    @cached_property
    def _coeffs(self):
        return _fourier.coefficients(self.samples)

    def evaluate(self, t, deriv: int = 0):
        """Trigonometric interpolant of the samples (or a derivative) at parameters t."""
        return _fourier.evaluate(self.samples, t, deriv=deriv, coeffs=self._coeffs)

    def gaps(self) -> np.ndarray:
        return np.abs(np.diff(np.append(self.samples, self.samples[0])))

    @property
    def length(self) -> float:
        return float(np.sum(np.abs(self.derivative)) * TWO_PI / self.N)

    def signed_area(self) -> float:
        z = self.samples
        return 0.5 * float(np.sum(np.imag(np.conj(z) * self.derivative))) * TWO_PI / self.N

    def winding_number(self, point) -> np.ndarray:
        """Winding number of the sampled polygon about each point."""
        point = np.atleast_1d(np.asarray(point, dtype=complex))
        out = np.empty(point.shape, dtype=int)
        for i, p in enumerate(point.ravel()):
            d = self.samples - p
            ang = np.angle(np.roll(d, -1) / d)
            out.ravel()[i] = int(np.rint(np.sum(ang) / TWO_PI))
        return out

    def contains(self, point) -> np.ndarray:
        return self.winding_number(point) == 1

    def is_simple(self) -> bool:
        """Segment-pair intersection test on the closed polygon through the samples."""
        p = self.samples
        q = np.roll(p, -1)
        n = len(p)
        x1, y1 = p.real, p.imag
        d = q - p
        block = 256
        for s in range(0, n, block):
            i = np.arange(s, min(n, s + block))[:, None]
            j = np.arange(n)[None, :]
            # ignore identical and adjacent segments
            mask = (j > i + 1) & ~((i == 0) & (j == n - 1))
            if not np.any(mask):
                continue
            di = d[i]
            dj = d[j]
            denom = di.real * dj.imag - di.imag * dj.real
            rx = x1[j] - x1[i]
            ry = y1[j] - y1[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                ta = (rx * dj.imag - ry * dj.real) / denom
                tb = (rx * di.imag - ry * di.real) / denom
            hit = mask & (denom != 0) & (ta >= 0) & (ta <= 1) & (tb >= 0) & (tb <= 1)
            if np.any(hit):
                return False
        return True

    def reversed(self) -> "JordanCurve":
        idx = (-np.arange(self.N)) % self.N
        tangents = None if self.tangents is None else -self.tangents[idx]
        return JordanCurve(self.samples[idx], self.interior_point, tangents)

    def parameter_of(self, points) -> np.ndarray:
        """Curve parameter t of points lying on (or very near) the curve, by Newton on the interpolant."""
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        tree = cKDTree(np.column_stack([self.samples.real, self.samples.imag]))
        _, idx = tree.query(np.column_stack([points.real, points.imag]))
        t = self.t[idx].astype(float)
        for _ in range(30):
            z = self.evaluate(t)
            dz = self.evaluate(t, deriv=1)
            d2z = self.evaluate(t, deriv=2)
            g = np.real(np.conj(z - points) * dz)
            dg = np.abs(dz) ** 2 + np.real(np.conj(z - points) * d2z)
            step = g / dg
            t = t - step
            if np.max(np.abs(step)) < 1e-14:
                break
        return t

    def check_invariants(self) -> dict:
        gaps = self.gaps()
        return {
            "gap_ratio": float(np.max(gaps) / np.min(gaps)),
            "simple": self.is_simple(),
            "winding": int(self.winding_number(self.interior_point)[0]),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "re", "im"])
            for t, z in zip(self.t, self.samples):
                writer.writerow([f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])


def write_svg(curves, path, size: int = 512) -> None:
    """One closed <path> per curve; the viewBox is fitted to all samples."""
    pts = np.concatenate([c.samples for c in curves])
    xmin, xmax = pts.real.min(), pts.real.max()
    ymin, ymax = (-pts.imag).min(), (-pts.imag).max()
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-12)
    w = xmax - xmin + 2 * pad
    h = ymax - ymin + 2 * pad
    stroke = max(w, h) / 400
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{xmin - pad:.9g} {ymin - pad:.9g} {w:.9g} {h:.9g}">'
    ]
    for c in curves:
        z = c.samples
        d = "M " + " L ".join(f"{p.real:.9g},{-p.imag:.9g}" for p in z) + " Z"
        lines.append(f'<path d="{d}" fill="none" stroke="black" stroke-width="{stroke:.6g}"/>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def hausdorff_distance(c1: JordanCurve, c2: JordanCurve) -> float:
    """Symmetric discrete Hausdorff distance between the sample sets."""
    a = np.column_stack([c1.samples.real, c1.samples.imag])
    b = np.column_stack([c2.samples.real, c2.samples.imag])
    d1, _ = cKDTree(b).query(a)
    d2, _ = cKDTree(a).query(b)
    return float(max(np.max(d1), np.max(d2)))


# ---------------------------------------------------------------------------
# Properness
# ---------------------------------------------------------------------------


def critical_value_split(m, tol: float = DEGENERATE_TOL) -> tuple[int, int, int]:
    """(inside 𝔻, outside the closed disk, on 𝕋 within tol) counts of the finite critical values."""
    vals = critical_values(m)
    mod = np.abs(vals)
    on = np.abs(mod - 1.0) <= tol
    return int(np.sum((mod < 1.0) & ~on)), int(np.sum((mod > 1.0) & ~on)), int(np.sum(on))


def is_proper(p: ComplexPolynomial) -> bool:
    """True iff all n-1 critical values of p lie in the open unit disk."""
    if p.degree < 1:
        raise ValueError("is_proper needs degree >= 1")
    if p.degree == 1:
        return True
    mod = np.abs(critical_values(p))
    if np.any(np.abs(mod - 1.0) <= DEGENERATE_TOL):
        raise DegenerateLemniscateError(
            "a critical value lies on the unit circle; the lemniscate passes through a critical point"
        )
    return bool(np.all(mod < 1.0 - DEGENERATE_TOL))


# ---------------------------------------------------------------------------
# Tracing
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LevelSetReport:
    components: list
    proper: bool
    interior_simply_connected: bool
    critical_value_split: tuple
    inner_side_sublevel: list = field(default_factory=list)
    windings: list = field(default_factory=list)


class _Level:
    """Newton machinery for N(z) - e^{iψ} D(z) = 0."""

    def __init__(self, m):
        num, den = _numerator_denominator(m)
        self.num = num.coeffs
        self.den = den.coeffs
        self.degree = num.degree

    def value(self, z):
        n, dn = _horner(self.num, z)
        d, dd = _horner(self.den, z)
        return n / d, (dn * d - n * dd) / (d * d)

    def velocity(self, z):
        """dz/dψ along the level curve: i m / m'."""
        m, dm = self.value(z)
        return 1j * m / dm

    def newton(self, z, psi, iters: int = 8):
        z = np.array(z, dtype=complex, copy=True)
        phase = np.exp(1j * np.asarray(psi, dtype=float))
        history = []
        for _ in range(iters):
            n, dn = _horner(self.num, z)
            d, dd = _horner(self.den, z)
            f = n - phase * d
            df = dn - phase * dd
            step = f / df
            z = z - step
            history.append(np.max(np.abs(step)) if step.size else 0.0)
        n = _horner(self.num, z)[0]
        d = _horner(self.den, z)[0]
        scale = _abs_scale(self.num, z) + _abs_scale(self.den, z)
        res = np.abs(n - phase * d) / scale
        return z, res, history

    def seeds(self, psi: float) -> np.ndarray:
        c = self.num.astype(complex).copy()
        c[: len(self.den)] -= np.exp(1j * psi) * self.den
        z = roots(ComplexPolynomial(c))
        return self.newton(z, np.full(z.shape, psi), iters=3)[0]


def _hermite(psi_k, z_k, v_k, psi):
    idx = np.clip(np.searchsorted(psi_k, psi) - 1, 0, len(psi_k) - 2)
    h = psi_k[idx + 1] - psi_k[idx]
    s = (psi - psi_k[idx]) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * z_k[idx] + h10 * h * v_k[idx] + h01 * z_k[idx + 1] + h11 * h * v_k[idx + 1]


def _march(level: _Level, z0: complex, psi0: float, crit: np.ndarray, scale: float):
    """Adaptive predictor-corrector march in ψ until the component closes.

    Returns the coarse track (ψ, z, dz/dψ) and the winding d (turns of ψ).
    """
    h_cap = 0.05 * scale
    psi, z = psi0, complex(z0)
    v = complex(level.velocity(z))
    track_psi, track_z, track_v = [psi], [z], [v]
    turns = 0
    close_tol = 1e-7 * scale

    def h_local(z):
        if crit.size == 0:
            return h_cap
        return min(h_cap, 0.1 * max(np.min(np.abs(crit - z)), 1e-9 * scale))

    dpsi = h_local(z) / abs(v)
    while True:
        mark = psi0 + TWO_PI * (turns + 1)
        step = min(dpsi, mark - psi)
        if step < 1e-13:
            if mark - psi < 1e-13:
                step = mark - psi
            else:
                raise TraceError("step size underflow while tracing the level set", location=z)
        z_pred = z + step * v
        v_mid = complex(level.velocity(z + 0.5 * step * v))
        z_pred = z + step * v_mid
        z_new, res, hist = level.newton(np.array([z_pred]), np.array([psi + step]), iters=6)
        z_new = complex(z_new[0])
        moved = abs(z_new - z)
        good = (
            np.isfinite(z_new)
            and res[0] <= 1e-13
            and abs(z_new - z_pred) <= 0.1 * max(moved, 1e-300)
            and moved <= 2.0 * h_local(z)
        )
        if not good:
            dpsi = 0.5 * step
            if dpsi < 1e-14:
                raise TraceError("step size underflow while tracing the level set", location=z)
            continue
        psi = psi + step
        if mark - psi < 1e-13:
            psi = mark
        z = z_new
        v = complex(level.velocity(z))
        track_psi.append(psi)
        track_z.append(z)
        track_v.append(v)
        dpsi = min(1.5 * step, h_local(z) / abs(v))
        if psi == mark:
            turns += 1
            if abs(z - z0) <= close_tol:
                track_z[-1] = complex(z0)
                return np.array(track_psi), np.array(track_z), np.array(track_v), turns
            if turns > level.degree:
                raise TraceError("level curve failed to close", location=z)


def _dense_samples(level: _Level, track, turns: int, M: int):
    psi_k, z_k, v_k = track
    psi0 = psi_k[0]
    psi = psi0 + TWO_PI * turns * np.arange(M) / M
    guess = _hermite(psi_k, z_k, v_k, psi)
    z, res, _ = level.newton(guess, psi, iters=6)
    if np.max(res) > 1e-12:
        return None
    # continuity: consecutive samples must follow the tangent direction
    v = level.velocity(z)
    dpsi = TWO_PI * turns / M
    chord = np.roll(z, -1) - z
    pred = v * dpsi
    if np.max(np.abs(chord - pred) / np.abs(pred)) > 0.5:
        return None
    return psi, z, v


def _arc_length_resample(level: _Level, psi0: float, turns: int, dense, N: int):
    """Resample one component uniformly in arc length; returns points, exact dz/dt, and length."""
    psi, z, v = dense
    M = len(psi)
    speed = turns * np.abs(v)  # ds/dτ with τ = (ψ - ψ0)/turns ∈ [0, 2π)
    coeffs = np.fft.fft(speed) / M
    k = np.fft.fftfreq(M, 1.0 / M)
    keep = np.abs(coeffs) > 1e-16 * abs(coeffs[0])
    keep[0] = True
    ck, kk = coeffs[keep], k[keep]
    mean = coeffs[0].real
    length = TWO_PI * mean
    nz = kk != 0

    def s_and_speed(tau):
        e = np.exp(1j * np.outer(tau, kk))
        s = mean * tau + np.real((e[:, nz] - 1.0) @ (ck[nz] / (1j * kk[nz])))
        return s, np.real(e @ ck)

    tau_grid = TWO_PI * np.arange(M) / M
    # on the grid itself the antiderivative is an inverse FFT
    with np.errstate(divide="ignore", invalid="ignore"):
        integ = np.where(k != 0, coeffs / (1j * k), 0.0)
    s_grid = mean * tau_grid + np.real(np.fft.ifft(integ) * M - np.sum(integ))
    targets = length * np.arange(N) / N
    tau = np.interp(targets, np.append(s_grid, length), np.append(tau_grid, TWO_PI))
    for _ in range(20):
        s_val, v_val = s_and_speed(tau)
        step = (s_val - targets) / v_val
        tau = tau - step
        if np.max(np.abs(step)) < 1e-13:
            break
    v_val = s_and_speed(tau)[1]
    psi_t = psi0 + turns * tau
    # interpolate an initial guess from the dense ψ grid, then project
    guess = _hermite(np.append(psi, psi0 + TWO_PI * turns), np.append(z, z[0]), np.append(v, v[0]), psi_t)
    pts, res, _ = level.newton(guess, psi_t, iters=6)
    if np.max(res) > 1e-12:
        raise TraceError("projection onto the level set failed", location=complex(pts[np.argmax(res)]))
    dzdpsi = level.velocity(pts)
    tangents = dzdpsi * turns * (length / TWO_PI) / v_val
    return pts, tangents, length


def _trace_component(level, z0, psi0, crit, scale, N):
    track = _march(level, z0, psi0, crit, scale)
    turns = track[3]
    track = track[:3]
    M = max(2048, 2 * N) * turns
    dense = None
    while M <= (1 << 19):
        dense = _dense_samples(level, track, turns, M)
        if dense is not None and _fourier.tail(turns * np.abs(dense[2])) < 1e-13:
            break
        M *= 2
    if dense is None:
        raise TraceError("could not resolve the level curve on a uniform ψ grid", location=z0)
    pts, tangents, length = _arc_length_resample(level, psi0, turns, dense, N)
    return track, turns, pts, tangents


def _pick_interior(curve_pts, zeros, poles):
    tmp = JordanCurve(curve_pts, 0j)
    for group in (zeros, poles):
        if group.size == 0:
            continue
        inside = group[tmp.winding_number(group) != 0]
        if inside.size:
            c = np.mean(inside)
            if tmp.winding_number(c)[0] != 0:
                return complex(c)
            return complex(inside[0])
    c = np.mean(curve_pts)
    return complex(c)


def trace_level_set(m, N: int = 1024) -> LevelSetReport:
    """Find and trace every component of {|m(z)| = 1}.

    Components are returned counterclockwise and uniformly resampled in arc
    length to N points each lying on the level set to 1e-12.
    """
    if isinstance(m, ComplexPolynomial):
        if m.degree < 1:
            raise ValueError("trace_level_set needs degree >= 1")
    elif not isinstance(m, RationalMap):
        raise TypeError("trace_level_set accepts a ComplexPolynomial or RationalMap")
    inside, outside, on = (m.degree - 1, 0, 0) if m.degree == 1 else critical_value_split(m)
    if on:
        raise DegenerateLemniscateError("critical value on the unit circle; level set is singular")
    level = _Level(m)
    n = level.degree
    crit = critical_points(m) if n > 1 else np.zeros(0, dtype=complex)
    zeros = roots(ComplexPolynomial(level.num))
    poles = roots(ComplexPolynomial(level.den)) if len(level.den) > 1 else np.zeros(0, dtype=complex)
    phis = 0.1234 + TWO_PI * np.arange(2 * n) / (2 * n)
    seed_sets = [level.seeds(phi) for phi in phis]
    scale = max(np.max(np.abs(seed_sets[0] - np.mean(seed_sets[0]))), 1e-6)
    scale = max(scale, np.max(np.abs(np.diff(np.append(seed_sets[0], seed_sets[0][0])))))

    traced = []  # (track, turns, pts, tangents)

    def on_traced(z, phi):
        for track, turns, _, _ in traced:
            psi_k, z_k, v_k = track
            base = psi_k[0]
            offsets = np.mod(phi - base, TWO_PI) + TWO_PI * np.arange(turns)
            cand = _hermite(psi_k, z_k, v_k, base + offsets)
            cand, _, _ = level.newton(cand, base + offsets, iters=4)
            if np.min(np.abs(cand - z)) <= 1e-7 * scale:
                return True
        return False

    for phi, seeds in zip(phis, seed_sets):
        for z in seeds:
            if on_traced(z, phi):
                continue
            log.debug("tracing component from seed %s at phase %.4f", z, phi)
            traced.append(_trace_component(level, z, phi, crit, scale, N))

    total = sum(t[1] for t in traced)
    if total != n:
        raise TraceError(f"traced components account for {total} of {n} solutions of m = e^(iφ)")

    components, sublevel_inside, windings = [], [], []
    for _, turns, pts, tangents in traced:
        area = JordanCurve(pts, 0j).signed_area()
        inner = area > 0  # +ψ keeps Ω₋ on the left
        if not inner:
            idx = (-np.arange(N)) % N
            pts, tangents = pts[idx], -tangents[idx]
        interior = _pick_interior(pts, zeros, poles)
        components.append(JordanCurve(pts, interior, tangents))
        sublevel_inside.append(bool(inner))
        windings.append(int(turns if inner else -turns))

    n_sub = sum(sublevel_inside)
    proper = n_sub == 1
    simply = proper and len(components) == 1
    if simply and n > 1 and inside != n - 1:
        raise TraceError(
            f"tracer found a simply connected sublevel set but {inside} critical values in the disk (expected {n - 1})"
        )
    return LevelSetReport(
        components=components,
        proper=proper,
        interior_simply_connected=simply,
        critical_value_split=(inside, outside, on),
        inner_side_sublevel=sublevel_inside,
        windings=windings,
    )


def lemniscate(m, N: int = 1024) -> JordanCurve:
    """The single Jordan curve of a lemniscate whose sublevel set is simply connected."""
    report = trace_level_set(m, N)
    if not report.interior_simply_connected:
        from .errors import NotProperError

        raise NotProperError(f"sublevel set is not simply connected ({len(report.components)} components)")
    return report.components[0]
