"""Trigonometric interpolation of uniformly sampled periodic data."""

import numpy as np

_CHUNK = 1 << 22


def coefficients(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fourier coefficients c_k (divided by N) and integer wavenumbers, Nyquist split symmetrically."""
    samples = np.asarray(samples)
    n = len(samples)
    c = np.fft.fft(samples) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        half = c[n // 2] / 2
        c = np.concatenate([c, [half]])
        c[n // 2] = half
        k = np.concatenate([k, [n // 2]])
        k[n // 2] = -(n // 2)
    return c, k


def evaluate(samples, t, deriv: int = 0, coeffs=None):
    """Trigonometric interpolant (or its derivative) of samples at t_j = 2πj/N, evaluated at t."""
    if coeffs is None:
        coeffs = coefficients(samples)
    c, k = coeffs
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    weights = c * (1j * k) ** deriv if deriv else c
    out = np.empty(flat.shape, dtype=complex)
    step = max(1, _CHUNK // len(k))
    for start in range(0, len(flat), step):
        block = flat[start : start + step]
        out[start : start + step] = np.exp(1j * np.outer(block, k)) @ weights
    out = out.reshape(t.shape)
    if np.isrealobj(samples):
        return out.real
    return out


def derivative_samples(samples, order: int = 1):
    """Spectral derivative of periodic samples on their own grid."""
    samples = np.asarray(samples)
    n = len(samples)
    c = np.fft.fft(samples)
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    out = np.fft.ifft(c * (1j * k) ** order)
    return out.real if np.isrealobj(samples) else out


def tail(samples, fraction: float = 0.25) -> float:
    """Largest coefficient magnitude in the top `fraction` of wavenumbers, relative to the largest overall."""
    c = np.abs(np.fft.fft(np.asarray(samples))) / len(samples)
    k = np.abs(np.fft.fftfreq(len(samples), 1.0 / len(samples)))
    cutoff = (1.0 - fraction) * np.max(k)
    top = np.max(c)
    if top == 0:
        return 0.0
    return float(np.max(c[k >= cutoff]) / top)
