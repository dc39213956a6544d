"""Spectral differentiation along a uniform offset axis.

Samples on a uniform grid are treated as one period of a periodic
signal (period = n * spacing). A Tukey taper is applied first so that
profiles which have decayed near the grid ends wrap smoothly; values in
the tapered fringe (outer alpha/2 fraction per side) are distorted by
design and should not be trusted by callers.
"""

from __future__ import annotations

import numpy as np
from scipy.signal.windows import tukey

__all__ = ["fourier_derivative", "taper"]


def taper(n: int, alpha: float = 0.2) -> np.ndarray:
    return tukey(n, alpha)


def fourier_derivative(
    values: np.ndarray,
    spacing: float,
    order: int,
    window_alpha: float = 0.2,
) -> np.ndarray:
    """order-th derivative along the last axis via FFT.

    values may be any shape; the last axis is the sampled axis. Returns
    an array of the same shape. order=0 applies the taper only.
    """
    if order < 0:
        raise ValueError("derivative order must be >= 0")
    v = np.asarray(values, dtype=float)
    n = v.shape[-1]
    if n < 4:
        raise ValueError("need at least 4 samples along the offset axis")
    win = tukey(n, window_alpha) if window_alpha > 0 else np.ones(n)
    vw = v * win
    if order == 0:
        return vw
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)
    mult = (1j * k) ** order
    if order % 2 == 0:
        # even orders are real multipliers; keep the Nyquist bin
        out = np.fft.ifft(np.fft.fft(vw, axis=-1) * mult, axis=-1).real
    else:
        # odd orders: zero the unpaired Nyquist bin for a real result
        if n % 2 == 0:
            mult = mult.copy()
            mult[n // 2] = 0.0
        out = np.fft.ifft(np.fft.fft(vw, axis=-1) * mult, axis=-1).real
    return out
