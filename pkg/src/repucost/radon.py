"""Numerical Radon transform machinery for odd dimension (d in {1, 3}).

The forward transform integrates a field over hyperplanes <w, x> = b
with a tensor-product trapezoid rule in an orthonormal frame of the
plane. The dual transform averages an image over directions with cubic
interpolation along the offset axis. Inversion composes the two with an
order-(d-1) spectral derivative in b and the constant
gamma_d = 1 / (2 * (2*pi)^(d-1)).

Fields that are exactly radial may carry a radial profile; hyperplane
integrals of a radial field are identical for every direction, so the
transform computes one offset column on the same in-plane lattice and
broadcasts it. This is an exact shortcut, not an approximation: the
integrand values do not depend on the frame.

Fourier convention used throughout: (2*pi)^(-d/2) * integral of
f(x) exp(-i<x, xi>) dx, in every dimension d including d = 1. Under it
the slice identity reads: 1-d transform of Rf(w, .) in b equals
(2*pi)^((d-1)/2) times the d-dim transform of f at tau*w.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import numpy.polynomial.polynomial as npp
from scipy.interpolate import CubicSpline

from .measures import GridMeasure, sphere_area
from .spectral import fourier_derivative
from .spheres import direction_set, orthonormal_frame

__all__ = [
    "ScalarField",
    "RadonImage",
    "gaussian_field",
    "gaussian_mixture_field",
    "gamma_d",
    "radon",
    "dual_radon",
    "invert_radon",
    "fourier_slice_check",
    "intertwining_check",
    "SliceCheckReport",
    "IntertwiningReport",
]

_OVERFLOW_GUARD = 1e12


def gamma_d(d: int) -> float:
    return 1.0 / (2.0 * (2.0 * np.pi) ** (d - 1))


@dataclass(frozen=True)
class ScalarField:
    """A function on R^d with declared decay, for quadrature safety.

    fn maps (m, d) arrays to (m,) values. laplacian_iterate(X, times),
    when present, returns the analytic value of the Laplacian applied
    `times` times. decay_rate is the declared envelope exponent
    (|f| = O(r^-decay_rate) beyond decay_radius; use inf for compactly
    concentrated fields like Gaussians). radial_profile, when present,
    asserts f(x) = radial_profile(||x||) exactly.
    """

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    laplacian_iterate: Callable[[np.ndarray, int], np.ndarray] | None = None
    decay_rate: float = np.inf
    decay_radius: float = 8.0
    radial_profile: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "field"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.dim:
            raise ValueError(f"expected points in R^{self.dim}")
        out = np.asarray(self.fn(X), dtype=float)
        return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Gaussian builtins with polynomial-times-Gaussian Laplacian calculus.
#
# For q(s)*exp(-s/2) with s = ||x - z||^2 / sigma^2, one Laplacian gives
# (2/sigma^2) * [2 s q'' + (d - 2s) q' + (s - d)/2 * q] * exp(-s/2); the
# map on coefficient vectors is exact, so iterates of any order are
# available in closed form.


def _laplacian_step(q: np.ndarray, d: int, sigma: float) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    q1 = npp.polyder(q) if len(q) > 1 else np.zeros(1)
    q2 = npp.polyder(q, 2) if len(q) > 2 else np.zeros(1)
    term = 2.0 * npp.polymulx(q2)
    term = npp.polyadd(term, -2.0 * npp.polymulx(q1))
    term = npp.polyadd(term, 0.5 * npp.polymulx(q))
    term = npp.polyadd(term, d * q1)
    term = npp.polyadd(term, -0.5 * d * q)
    return (2.0 / sigma**2) * term


@dataclass(frozen=True)
class _GaussComponent:
    center: np.ndarray
    sigma: float
    amplitude: float

    def s_values(self, X: np.ndarray) -> np.ndarray:
        diff = X - self.center
        return np.einsum("ij,ij->i", diff, diff) / self.sigma**2

    def eval_poly(self, q: np.ndarray, X: np.ndarray) -> np.ndarray:
        s = self.s_values(X)
        return self.amplitude * npp.polyval(s, q) * np.exp(-0.5 * s)


def _mixture_field(components: list[_GaussComponent], d: int) -> ScalarField:
    one = np.ones(1)

    def fn(X):
        return sum(c.eval_poly(one, X) for c in components)

    def lap(X, times):
        out = np.zeros(len(X))
        for c in components:
            q = one
            for _ in range(times):
                q = _laplacian_step(q, d, c.sigma)
            out += c.eval_poly(q, X)
        return out

    centered = all(np.all(c.center == 0.0) for c in components)
    profile = None
    if centered:

        def profile(r):
            r = np.asarray(r, dtype=float)
            return sum(
                c.amplitude * np.exp(-0.5 * r**2 / c.sigma**2) for c in components
            )

    radius = max(
        float(np.linalg.norm(c.center)) + 10.0 * c.sigma for c in components
    )
    return ScalarField(
        dim=d,
        fn=fn,
        laplacian_iterate=lap,
        decay_rate=np.inf,
        decay_radius=radius,
        radial_profile=profile,
        name="gaussian" if len(components) == 1 and centered else "gaussian_mixture",
    )


def gaussian_field(
    d: int = 3, center=None, sigma: float = 1.0, amplitude: float = 1.0
) -> ScalarField:
    z = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    return _mixture_field([_GaussComponent(z, float(sigma), float(amplitude))], d)


def gaussian_mixture_field(components, d: int = 3) -> ScalarField:
    comps = [
        _GaussComponent(
            np.asarray(c.get("center", np.zeros(d)), dtype=float),
            float(c.get("sigma", 1.0)),
            float(c.get("amplitude", 1.0)),
        )
        for c in components
    ]
    return _mixture_field(comps, d)


def laplacian_field(field: ScalarField, times: int) -> ScalarField:
    """The field Delta^times f, using the analytic iterate."""
    if field.laplacian_iterate is None:
        raise ValueError("field has no analytic Laplacian")
    profile = None
    if field.radial_profile is not None:
        # for radial fields the iterate is radial too; evaluate along an axis
        def profile(r):
            r = np.asarray(r, dtype=float)
            flat = np.ravel(r)
            pts = np.zeros((flat.size, field.dim))
            pts[:, 0] = flat
            return field.laplacian_iterate(pts, times).reshape(r.shape)

    return replace(
        field,
        fn=lambda X: field.laplacian_iterate(X, times),
        radial_profile=profile,
        name=f"laplacian^{times}({field.name})",
    )


# ---------------------------------------------------------------------------
# Radon image


class RadonImage:
    """Sampled transform values on a direction x offset grid.

    parity="even" asserts value(w, b) = value(-w, -b); `check_even`
    verifies it on reflection-paired nodes.
    """

    __slots__ = ("directions", "direction_weights", "offsets", "values", "parity", "h")

    def __init__(self, directions, direction_weights, offsets, values, parity="even"):
        directions = np.asarray(directions, dtype=float)
        direction_weights = np.asarray(direction_weights, dtype=float)
        offsets = np.asarray(offsets, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(directions), len(offsets)):
            raise ValueError("values must be (n_directions, n_offsets)")
        steps = np.diff(offsets)
        if len(offsets) < 2 or np.any(steps <= 0):
            raise ValueError("offsets must be increasing")
        if not np.allclose(steps, steps[0], rtol=0, atol=1e-9 * abs(steps[0])):
            raise ValueError("offsets must be uniform")
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "direction_weights", direction_weights)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "parity", parity)
        object.__setattr__(self, "h", float(steps[0]))

    def __setattr__(self, *_):
        raise AttributeError("RadonImage is immutable")

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def to_grid_measure(self) -> GridMeasure:
        return GridMeasure(
            self.dim,
            self.directions,
            self.direction_weights,
            self.offsets,
            self.values,
        )

    def reflection_indices(self) -> np.ndarray:
        lookup = {self.directions[i].tobytes(): i for i in range(len(self.directions))}
        idx = np.empty(len(self.directions), dtype=int)
        for i, w in enumerate(-self.directions):
            j = lookup.get(w.tobytes())
            if j is None:
                match = np.where(
                    np.all(np.abs(self.directions - w) <= 1e-12, axis=1)
                )[0]
                if len(match) != 1:
                    raise ValueError("direction set not antipodally closed")
                j = int(match[0])
            idx[i] = j
        return idx

    def check_even(self, tol: float = 1e-8) -> float:
        """Max |value(w,b) - value(-w,-b)|; raises beyond tol."""
        idx = self.reflection_indices()
        gap = float(np.max(np.abs(self.values - self.values[idx][:, ::-1])))
        scale = max(1.0, float(np.max(np.abs(self.values))))
        if gap > tol * scale:
            raise ValueError(f"image violates evenness by {gap:.3e}")
        return gap

    def with_values(self, values, parity=None) -> "RadonImage":
        return RadonImage(
            self.directions,
            self.direction_weights,
            self.offsets,
            values,
            parity=self.parity if parity is None else parity,
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "directions": self.directions.tolist(),
            "direction_weights": self.direction_weights.tolist(),
            "offsets": {
                "lo": float(self.offsets[0]),
                "hi": float(self.offsets[-1]),
                "n": len(self.offsets),
            },
            "values": self.values.tolist(),
            "parity": self.parity,
        }

    @classmethod
    def from_dict(cls, spec: dict) -> "RadonImage":
        off = spec["offsets"]
        return cls(
            spec["directions"],
            spec["direction_weights"],
            np.linspace(off["lo"], off["hi"], int(off["n"])),
            spec["values"],
            parity=spec.get("parity", "even"),
        )


# ---------------------------------------------------------------------------
# forward transform


def _plane_quadrature(n_nodes: int, window: float):
    s = np.linspace(-window, window, n_nodes)
    wq = np.full(n_nodes, s[1] - s[0])
    wq[0] *= 0.5
    wq[-1] *= 0.5
    return s, wq


def radon(
    field: ScalarField,
    n_directions: int = 1000,
    B: float = 8.0,
    h: float = 0.02,
    plane_window: float | None = None,
    plane_step: float = 0.25,
) -> RadonImage:
    """Hyperplane integrals of the field on a (direction, offset) grid.

    Offsets are the uniform grid on [-B, B] with spacing h. Each
    hyperplane integral is a trapezoid tensor rule on a square window
    of half-width plane_window (default: the field's decay radius) in
    an orthonormal frame of the plane.
    """
    if field.dim % 2 == 0:
        raise ValueError("even dimension is not supported")
    if field.dim > 1 and field.decay_rate < field.dim + 1:
        raise ValueError("field not integrable on hyperplanes")
    n_half = int(round(B / h))
    offsets = np.linspace(-n_half * h, n_half * h, 2 * n_half + 1)
    dirs, dw = direction_set(field.dim, n_directions)

    if field.dim == 1:
        vals = np.stack([field(offsets[:, None]), field(-offsets[:, None])])
        img = RadonImage(dirs, dw, offsets, vals)
        img.check_even(1e-8)
        return img

    window = float(plane_window if plane_window is not None else field.decay_radius)
    n_nodes = 2 * int(np.ceil(window / plane_step)) + 1
    s, wq = _plane_quadrature(n_nodes, window)
    w2d = np.outer(wq, wq)

    if field.radial_profile is not None:
        # one column serves every direction: the integrand on the plane
        # lattice depends only on sqrt(b^2 + s^2 + t^2)
        rsq = offsets[:, None, None] ** 2 + s[None, :, None] ** 2 + s[None, None, :] ** 2
        vals_b = np.einsum(
            "bst,st->b", field.radial_profile(np.sqrt(rsq)), w2d
        )
        values = np.broadcast_to(vals_b, (len(dirs), len(offsets))).copy()
    else:
        values = np.empty((len(dirs), len(offsets)))
        ss, tt = np.meshgrid(s, s, indexing="ij")
        for i, w in enumerate(dirs):
            u, v = orthonormal_frame(w)
            plane = ss[..., None] * u + tt[..., None] * v  # (ns, ns, 3)
            flat = plane.reshape(-1, 3)
            for j0 in range(0, len(offsets), 64):
                j1 = min(j0 + 64, len(offsets))
                pts = offsets[j0:j1, None, None] * w + flat[None, :, :]
                fv = field(pts.reshape(-1, 3)).reshape(j1 - j0, -1)
                values[i, j0:j1] = fv @ w2d.ravel()

    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > _OVERFLOW_GUARD:
        raise RuntimeError("field not integrable on hyperplanes")
    img = RadonImage(dirs, dw, offsets, values)
    img.check_even(1e-8)
    return img


# ---------------------------------------------------------------------------
# dual transform and inversion


def dual_radon(img: RadonImage, x) -> float | np.ndarray:
    """Direction-weighted average of img(w, <w, x>), cubic in b.

    Points are processed in blocks so the (points x directions)
    projection table never exceeds ~2e7 entries at a time.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != img.dim:
        raise ValueError(f"expected points in R^{img.dim}")
    B = img.offsets[-1]
    margin = 1e-9 * max(1.0, B)
    splines = [
        CubicSpline(img.offsets, img.values[i])
        for i in range(len(img.directions))
    ]
    out = np.zeros(len(X))
    block = max(1, int(2e7) // max(1, len(img.directions)))
    for lo in range(0, len(X), block):
        T = X[lo : lo + block] @ img.directions.T
        if np.max(np.abs(T)) > B + margin:
            raise ValueError("offset grid too small")
        acc = np.zeros(T.shape[0])
        for i, spline in enumerate(splines):
            acc += img.direction_weights[i] * spline(T[:, i])
        out[lo : lo + block] = acc
    return float(out[0]) if single else out


def invert_radon(img: RadonImage, d: int | None = None) -> ScalarField:
    """Reconstruct the field: gamma_d * (-Lap)^((d-1)/2) R* img.

    The Laplacian power is moved through the dual transform onto the
    offset axis ((-1)^((d-1)/2) * order-(d-1) spectral derivative), so
    evaluation anywhere is a single dual transform of the filtered
    image. Returns a lazily-evaluated field.
    """
    d = img.dim if d is None else d
    if d % 2 == 0:
        raise ValueError("even dimension is not supported")
    if d != img.dim:
        raise ValueError("dimension mismatch with image")
    if img.parity != "even":
        raise ValueError("inversion requires an even image")
    img.check_even(1e-8)
    order = d - 1
    sign = (-1.0) ** ((d - 1) // 2)
    if order == 0:
        filtered = img  # d=1: no filtering, and no taper distortion
    else:
        filtered = img.with_values(
            sign * fourier_derivative(img.values, img.h, order)
        )
    g = gamma_d(d)

    def fn(X):
        return g * dual_radon(filtered, X)

    return ScalarField(
        dim=d,
        fn=fn,
        decay_rate=np.inf,
        decay_radius=float(img.offsets[-1]),
        name="inverted_radon",
    )


# ---------------------------------------------------------------------------
# identity checks


@dataclass(frozen=True)
class SliceCheckReport:
    taus: np.ndarray
    lhs: np.ndarray  # 1-d transform of the offset profile
    rhs: np.ndarray  # (2 pi)^((d-1)/2) * d-dim transform on the ray
    max_rel_error: float
    max_imag: float


def fourier_slice_check(
    field: ScalarField,
    w=None,
    taus=None,
    B: float = 8.0,
    h: float = 0.02,
    x_window: float = 7.0,
    x_step: float = 0.2,
    plane_step: float = 0.25,
) -> SliceCheckReport:
    """Compare the two routes to the field's Fourier values on a ray."""
    d = field.dim
    w = np.asarray(
        w if w is not None else np.eye(d)[0], dtype=float
    )
    w = w / np.linalg.norm(w)
    taus = np.asarray(
        taus if taus is not None else np.linspace(0.0, 3.0, 13), dtype=float
    )
    n_half = int(round(B / h))
    offsets = np.linspace(-n_half * h, n_half * h, 2 * n_half + 1)
    if d == 1:
        column = field(offsets[:, None] * w)
    else:
        window = field.decay_radius
        n_nodes = 2 * int(np.ceil(window / plane_step)) + 1
        s, wq = _plane_quadrature(n_nodes, window)
        w2d = np.outer(wq, wq)
        u, v = orthonormal_frame(w)
        ss, tt = np.meshgrid(s, s, indexing="ij")
        flat = (ss[..., None] * u + tt[..., None] * v).reshape(-1, 3)
        column = np.empty(len(offsets))
        for j0 in range(0, len(offsets), 64):
            j1 = min(j0 + 64, len(offsets))
            pts = offsets[j0:j1, None, None] * w + flat[None, :, :]
            fv = field(pts.reshape(-1, 3)).reshape(j1 - j0, -1)
            column[j0:j1] = fv @ w2d.ravel()

    tw = np.full(len(offsets), h)
    tw[0] *= 0.5
    tw[-1] *= 0.5
    phase_b = np.exp(-1j * np.outer(taus, offsets))
    lhs = (2.0 * np.pi) ** -0.5 * (phase_b @ (tw * column))

    ax = np.linspace(-x_window, x_window, 2 * int(round(x_window / x_step)) + 1)
    xw = np.full(len(ax), ax[1] - ax[0])
    xw[0] *= 0.5
    xw[-1] *= 0.5
    if d == 1:
        pts = ax[:, None]
        vol_w = xw
    else:
        XX, YY, ZZ = np.meshgrid(ax, ax, ax, indexing="ij")
        pts = np.column_stack([XX.ravel(), YY.ravel(), ZZ.ravel()])
        vol_w = (xw[:, None, None] * xw[None, :, None] * xw[None, None, :]).ravel()
    fx = field(pts) * vol_w
    proj = pts @ w
    phase_x = np.exp(-1j * np.outer(taus, proj))
    fhat = (2.0 * np.pi) ** (-d / 2.0) * (phase_x @ fx)
    rhs = (2.0 * np.pi) ** ((d - 1) / 2.0) * fhat

    scale = float(np.max(np.abs(rhs)))
    err = float(np.max(np.abs(lhs - rhs)) / max(scale, 1e-300))
    max_imag = float(max(np.max(np.abs(lhs.imag)), np.max(np.abs(rhs.imag))))
    return SliceCheckReport(taus, lhs, rhs, err, max_imag)


@dataclass(frozen=True)
class IntertwiningReport:
    order: int
    max_rel_error: float
    scale: float


def intertwining_check(
    field: ScalarField,
    s: int,
    n_directions: int = 64,
    B: float = 8.0,
    h: float = 0.02,
    plane_step: float = 0.25,
) -> IntertwiningReport:
    """Transform of the s/2-fold Laplacian vs the order-s offset
    derivative of the transform; equal in exact arithmetic."""
    if s % 2:
        raise ValueError("odd orders are not supported (even s only)")
    img = radon(field, n_directions=n_directions, B=B, h=h, plane_step=plane_step)
    if s == 0:
        return IntertwiningReport(0, 0.0, float(np.max(np.abs(img.values))))
    lap = laplacian_field(field, s // 2)
    lhs = radon(lap, n_directions=n_directions, B=B, h=h, plane_step=plane_step)
    rhs = fourier_derivative(img.values, img.h, s)
    # the taper distorts the outer fringe by design; compare inside it
    n = img.values.shape[1]
    fringe = int(np.ceil(0.1 * n)) + 1
    core = slice(fringe, n - fringe)
    scale = float(np.max(np.abs(lhs.values[:, core])))
    err = float(np.max(np.abs(lhs.values[:, core] - rhs[:, core])) / scale)
    return IntertwiningReport(s, err, scale)
