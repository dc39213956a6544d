"""Infinite-width RePU networks: ridge integrals against cylinder measures.

H(x) = integral of ([<w,x> - b]_+^p - [-b]_+^p) / psi(b) over the
measure, plus optional monomial terms and a constant. The subtracted
[-b]_+^p makes the integrand vanish at x = 0, so H(0) = c always, and
keeps it bounded in b so slowly-decaying measures still integrate.

Atomic measures are summed exactly. Grid measures use the grid's own
quadrature (trapezoid in b, direction weights on the sphere); large
evaluation batches go through per-direction cubic-spline profiles of
the one-dimensional ridge integral, which is exact up to spline
interpolation error O(dt^4) and turns the cost from
(points x directions x offsets) into (points x directions).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import factorial

import numpy as np
from scipy.interpolate import CubicSpline

from .measures import AtomicMeasure, GridMeasure, WeightFn

__all__ = [
    "InfiniteNet",
    "eval_H",
    "eval_H_normalized_at_zero",
    "laplacian_identity_check",
    "laplacian_power_field",
    "LaplacianIdentityReport",
]

# switch to spline profiles when the direct grid quadrature would touch
# more than this many (point, offset) pairs per direction
_PROFILE_THRESHOLD = 2**22


@dataclass(frozen=True)
class InfiniteNet:
    """A measure on S^{d-1} x R, a constant, the power p, and optional
    monomial coefficients v of shape (d, p)."""

    mu: AtomicMeasure | GridMeasure
    c: float
    p: int
    v: np.ndarray | None = None

    def __post_init__(self):
        if self.p < 1 or self.p % 2 == 0:
            raise ValueError("p must be an odd positive integer")
        if self.v is not None:
            v = np.asarray(self.v, dtype=float)
            if v.shape != (self.mu.dim, self.p):
                raise ValueError("v must have shape (dim, p)")
            object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.mu.dim


def _ridge_integrand(t, b, p, psi_b):
    """([t - b]_+^p - [-b]_+^p) / psi(b), broadcasting t against b."""
    pos = np.maximum(t - b, 0.0) ** p
    return (pos - np.maximum(-b, 0.0) ** p) / psi_b


def _eval_atoms(mu: AtomicMeasure, p: int, X: np.ndarray) -> np.ndarray:
    if mu.n_atoms == 0:
        return np.zeros(len(X))
    psi = WeightFn(p).psi(mu.b)
    T = X @ mu.w.T  # (m, n_atoms)
    vals = _ridge_integrand(T, mu.b, p, psi)
    return vals @ mu.mass


def _eval_grid_direct(mu: GridMeasure, p: int, X: np.ndarray) -> np.ndarray:
    psi = WeightFn(p).psi(mu.offsets)
    qw = mu.trapezoid_weights
    out = np.zeros(len(X))
    for i in range(len(mu.directions)):
        t = X @ mu.directions[i]
        vals = _ridge_integrand(t[:, None], mu.offsets, p, psi)
        out += mu.direction_weights[i] * (vals @ (qw * mu.density[i]))
    return out


def _eval_grid_profiles(mu: GridMeasure, p: int, X: np.ndarray) -> np.ndarray:
    # one cubic profile of the ridge integral per direction
    T = X @ mu.directions.T  # (m, N)
    lo, hi = float(T.min()), float(T.max())
    span = max(hi - lo, 10.0 * mu.h)
    pad = 0.02 * span
    dt = min(mu.h / 2.0, span / 512.0)
    n_nodes = int(np.ceil((span + 2 * pad) / dt)) + 1
    nodes = np.linspace(lo - pad, hi + pad, n_nodes)

    psi = WeightFn(p).psi(mu.offsets)
    qw = mu.trapezoid_weights
    kernel = np.maximum(nodes[:, None] - mu.offsets, 0.0) ** p
    kernel -= np.maximum(-mu.offsets, 0.0) ** p
    kernel /= psi
    profiles = kernel @ (qw * mu.density).T  # (n_nodes, N)

    out = np.zeros(len(X))
    for i in range(len(mu.directions)):
        spline = CubicSpline(nodes, profiles[:, i])
        out += mu.direction_weights[i] * spline(T[:, i])
    return out


def eval_H(net: InfiniteNet, x) -> float | np.ndarray:
    """Evaluate the infinite-width network at x ((d,) or (m, d))."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != net.dim:
        raise ValueError(f"expected points in R^{net.dim}, got shape {x.shape}")
    mu = net.mu
    if isinstance(mu, AtomicMeasure):
        out = _eval_atoms(mu, net.p, X)
    elif isinstance(mu, GridMeasure):
        if len(X) * len(mu.offsets) <= _PROFILE_THRESHOLD:
            out = _eval_grid_direct(mu, net.p, X)
        else:
            out = _eval_grid_profiles(mu, net.p, X)
    else:
        raise TypeError(f"not a measure: {type(mu)!r}")
    if net.v is not None:
        powers = X[:, :, None] ** np.arange(1, net.p + 1)
        out = out + np.einsum("mdk,dk->m", powers, net.v)
    out = out + net.c
    return float(out[0]) if single else out


def eval_H_normalized_at_zero(net: InfiniteNet, target: float) -> InfiniteNet:
    """Copy of net with the constant set so H(0) = target.

    The ridge integrand vanishes at x = 0 and the monomial terms have no
    constant, so this is just c = target.
    """
    return replace(net, c=float(target))


@dataclass(frozen=True)
class LaplacianIdentityReport:
    max_rel_error: float
    scale: float  # max |rhs| over interior nodes, the error denominator
    n_interior: int
    fd_order: int


def _laplacian_5pt(F: np.ndarray, dx: float) -> np.ndarray:
    """4th-order 5-point Laplacian of F sampled on a cubic lattice.

    Output drops two cells per side relative to the input.
    """
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * dx * dx)
    core = F[2:-2, 2:-2, 2:-2]
    out = np.zeros_like(core)
    for axis in range(3):
        for k, ck in enumerate(c):
            sl = [slice(2, -2)] * 3
            start = k  # offsets -2..2 relative to the core
            sl[axis] = slice(start, F.shape[axis] - 4 + start)
            out += ck * F[tuple(sl)]
    return out


def laplacian_identity_check(
    mu: GridMeasure,
    p: int,
    x_lo: float = -2.0,
    x_hi: float = 2.0,
    n: int = 41,
) -> LaplacianIdentityReport:
    """Check that (p+1)/2 Laplacians of H reproduce p! times the dual
    Radon transform of the density divided by psi.

    The left side is computed by iterated 4th-order finite differences
    of H on an n^3 lattice; the right side by the dual-transform
    machinery, an independent code path. Returns the maximum
    node error over the surviving interior lattice, relative to the max
    |right side| there (node-wise relative error is meaningless where
    the right side crosses zero).
    """
    from .radon import RadonImage, dual_radon

    if mu.dim != 3:
        raise ValueError("the lattice check is implemented for d=3")
    iters = (p + 1) // 2
    axis = np.linspace(x_lo, x_hi, n)
    dx = axis[1] - axis[0]
    trim = 2 * iters
    if n <= 2 * trim + 1:
        raise ValueError("x-grid too small for the finite-difference stencil")

    net = InfiniteNet(mu=mu, c=0.0, p=p)
    XX, YY, ZZ = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.column_stack([XX.ravel(), YY.ravel(), ZZ.ravel()])
    H = eval_H(net, pts).reshape(n, n, n)

    lhs = H
    for _ in range(iters):
        lhs = _laplacian_5pt(lhs, dx)

    interior = axis[trim:-trim]
    XI, YI, ZI = np.meshgrid(interior, interior, interior, indexing="ij")
    pts_i = np.column_stack([XI.ravel(), YI.ravel(), ZI.ravel()])

    psi = WeightFn(p).psi(mu.offsets)
    img = RadonImage(
        directions=mu.directions,
        direction_weights=mu.direction_weights,
        offsets=mu.offsets,
        values=mu.density / psi,
    )
    rhs = factorial(p) * dual_radon(img, pts_i)

    scale = float(np.max(np.abs(rhs)))
    if scale == 0.0:
        err = float(np.max(np.abs(lhs)))
        return LaplacianIdentityReport(err, 0.0, len(pts_i), 4)
    err = float(np.max(np.abs(lhs.ravel() - rhs)) / scale)
    return LaplacianIdentityReport(err, scale, len(pts_i), 4)


def laplacian_power_field(mu: GridMeasure, p: int):
    """The field (-Delta)^((d+p)/2) H for a gridded even measure,
    reduced analytically.

    H itself grows like |x|^p and has no transform, but the Laplacian
    powers collapse it: (p+1)/2 of them turn each ridge unit into p!
    times a delta layer on its hyperplane, so Delta^((p+1)/2) H is
    p! R*(density/psi), and the remaining (d-1)/2 pass through the
    dual transform as second offset derivatives. What is left decays
    like the density and is safe to radon-transform; that is the only
    route to the transform side of H. The leading sign is
    (-1)^((d+p)/2).

    For a density constant across directions the field is radial and
    says so, which the transform exploits.
    """
    from .radon import RadonImage, ScalarField, dual_radon

    d = mu.dim
    if d % 2 == 0 or p % 2 == 0:
        raise ValueError("odd-odd case only (both d and p must be odd)")
    psi = WeightFn(p).psi(mu.offsets)
    v = mu.density / psi
    if d > 1:
        from .spectral import fourier_derivative

        v = fourier_derivative(v, float(mu.offsets[1] - mu.offsets[0]), d - 1)
    sign = (-1.0) ** ((d + p) // 2)
    img = RadonImage(
        mu.directions,
        mu.direction_weights,
        mu.offsets,
        sign * factorial(p) * v,
        parity="none",
    )

    def fn(X):
        return dual_radon(img, X)

    profile = None
    vmax = float(np.max(np.abs(v)))
    if d == 3 and (vmax == 0.0 or np.max(np.abs(v - v[0])) <= 1e-12 * vmax):
        # radial shortcut: R*[q](x) = 2 pi (A(r) - A(-r)) / r with A the
        # antiderivative of the single profile, q(0) * |S^2| at r = 0
        A = CubicSpline(mu.offsets, img.values[0]).antiderivative()
        at0 = 4.0 * np.pi * float(np.interp(0.0, mu.offsets, img.values[0]))
        B = float(mu.offsets[-1])

        def profile(r):
            r = np.asarray(r, dtype=float)
            rc = np.minimum(r, B)  # the integrand is zero beyond the grid
            out = np.full(r.shape, at0)
            np.divide(
                2.0 * np.pi * (A(rc) - A(-rc)), r, out=out, where=(r != 0)
            )
            return out

    return ScalarField(
        dim=d,
        fn=fn,
        decay_rate=np.inf,
        decay_radius=float(mu.offsets[-1]),
        radial_profile=profile,
        name=f"laplacian_power({p})",
    )
