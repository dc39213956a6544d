"""Multivariate representational cost through the Radon domain.

The direct route takes the transform of the field, differentiates
d+p times along the offset axis, and integrates the absolute value
over the cylinder, scaled by gamma_d before the p-th root. Under this
scaling the value of a network field is (p!)^(1/p) times the plain
total-variation cost of its coefficient measure: collapsing a ridge
unit with p+1 offset derivatives leaves a p! behind, and the cost
convention here keeps it.

The dual route pairs the field against test images phi (even, smooth,
sup-norm at most 1): each phi is differentiated d+p times in b, pushed
back to x-space by the dual transform, and inner-multiplied with f on
a lattice. The supremum over an explicit finite dictionary is a lower
bound of the direct value by construction; with a mollified sign
pattern of the differentiated image itself as the test function the
bound becomes nearly tight.

Resolution matters on this route, in two separate places. Along the
offset axis, the x-lattice quadrature only sees features of phi's
order-(d+p) derivative wider than about pi/x_step in wavenumber;
dictionary members and the near-optimal test function are therefore
smoothed by a Gaussian kernel along b before use. A mollified test
function is still admissible (even, sup-norm at most 1), so the
reported bound stays a true lower bound. Over the sphere the problem
is worse: the differentiated image enters the dual transform as
w -> q(x . w), whose spherical-harmonic content reaches degree around
(wavenumber x radius), far beyond what any affordable direction set
resolves. The estimator therefore never sums directions when it can
avoid it: separable members with a labeled degree <= 2 angular factor,
and images with direction-independent rows, integrate the sphere in
closed form through moment antiderivatives. Only unlabeled
direction-dependent images fall back to the discrete direction sum,
and those must be smooth in b or the pairing returns quadrature junk,
not a better bound.

Sign bookkeeping: the pairing is
    -gamma_d * (-1)^((d+p)/2) * <f, R*[d_b^(d+p) phi]>
and both signs of each phi are tried, so the estimator never loses a
member to an unlucky orientation. For d+p = 0 mod 4 the maximizer is
minus the smoothed sign of the differentiated image; for
d+p = 2 mod 4 it is the plus version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scipy.interpolate import CubicSpline

from .measures import WeightFn, even_odd_decompose, tv_norm, weighted_tv_norm
from .networks import MonomialNet, RepuNet, to_measure
from .radon import RadonImage, ScalarField, dual_radon, gamma_d, radon
from .spectral import fourier_derivative
from .spheres import direction_set

__all__ = [
    "RNormReport",
    "SeparableTestImage",
    "rnorm_direct",
    "rnorm_dual_estimate",
    "rnorm_both",
    "rnorm_of_net",
    "near_optimal_test_function",
    "default_dictionary",
]


@dataclass(frozen=True)
class RNormReport:
    direct_value: float | None
    dual_lower_bound: float | None
    gap: float | None  # (direct - dual) / direct when both present
    grid: dict


def _check_odd(p: int, d: int):
    if d % 2 == 0 or p % 2 == 0:
        raise ValueError("odd-odd case only (both d and p must be odd)")


def rnorm_direct(
    field: ScalarField,
    p: int,
    d: int | None = None,
    n_directions: int = 1000,
    B: float = 8.0,
    h: float = 0.02,
    plane_step: float = 0.25,
    image: RadonImage | None = None,
) -> RNormReport:
    """Direct Radon-domain cost of the field.

    Pass a precomputed transform through `image` to reuse it across
    calls with different p (the transform is the expensive stage).
    """
    d = field.dim if d is None else d
    _check_odd(p, d)
    img = image if image is not None else radon(
        field, n_directions=n_directions, B=B, h=h, plane_step=plane_step
    )
    deriv = fourier_derivative(img.values, img.h, d + p)
    total = tv_norm(img.with_values(deriv).to_grid_measure())
    value = (gamma_d(d) * total) ** (1.0 / p)
    meta = {
        "n_directions": len(img.directions),
        "B": float(img.offsets[-1]),
        "h": img.h,
        "order": d + p,
    }
    return RNormReport(value, None, None, meta)


def _gauss_kernel(std_cells: float) -> np.ndarray:
    """Normalized symmetric Gaussian kernel, truncated at five stds."""
    half = max(1, int(np.ceil(5.0 * std_cells)))
    t = np.arange(-half, half + 1, dtype=float)
    k = np.exp(-0.5 * (t / std_cells) ** 2)
    return k / k.sum()


def _edge_cutoff(offsets: np.ndarray) -> np.ndarray:
    """Smooth window forcing test images to zero before the outer 20%
    of the offset range, where the spectral-derivative taper lives. A
    test image with mass under the taper ramp turns into broadband
    ringing at order d+p; the erf profile here decays fast enough in
    wavenumber to add none of its own.
    """
    from scipy.special import erf

    B = float(offsets[-1])
    return 0.5 * (1.0 - erf((np.abs(offsets) - 0.7 * B) / (0.03 * B * np.sqrt(2.0))))

def _mollify_rows(values: np.ndarray, h: float, smoothing: float) -> np.ndarray:
    """Convolve along the offset axis with a Gaussian of std `smoothing`
    (offset units). Sup-norm non-increasing, parity preserving."""
    if smoothing <= 0.0:
        return values
    kern = _gauss_kernel(smoothing / h)
    arr = np.atleast_2d(values)
    out = np.empty_like(arr)
    for i in range(arr.shape[0]):
        out[i] = np.convolve(arr[i], kern, mode="same")
    return out if values.ndim > 1 else out[0]

def near_optimal_test_function(
    field: ScalarField,
    p: int,
    d: int | None = None,
    smoothing: float | None = None,
    n_directions: int = 1000,
    B: float = 8.0,
    h: float = 0.02,
    plane_step: float = 0.25,
    image: RadonImage | None = None,
) -> RadonImage:
    """Mollified sign of the (d+p)-th offset derivative of the transform.

    The raw sign pattern is zeroed where the derivative is below 1e-6
    of its peak (otherwise rounding noise in the far tails turns into a
    random square wave), forced to zero before the outer fifth of the
    offset range by a smooth cutoff, and then smoothed with a Gaussian
    kernel of std `smoothing` offset units, wide enough that the
    pairing quadratures in rnorm_dual_estimate resolve its order-(d+p)
    derivative. The result stays even and within the unit sup bound.
    Default smoothing is max(2h, 0.04(d+p)).

    When the transform does not depend on the direction (radial field),
    the pattern is built once from the direction-averaged profile and
    replicated, so the output rows are exactly equal and the pairing
    stage can integrate the sphere in closed form instead of summing
    the direction set. Building the sign pattern per row would break
    that: the order-(d+p) spectral derivative amplifies row-to-row
    rounding noise enough to flip thresholded cells unpredictably.
    """
    d = field.dim if d is None else d
    _check_odd(p, d)
    img = image if image is not None else radon(
        field, n_directions=n_directions, B=B, h=h, plane_step=plane_step
    )
    if smoothing is None:
        smoothing = max(2.0 * img.h, 0.04 * (d + p))
    vmax = float(np.max(np.abs(img.values)))
    radial = d > 1 and vmax > 0.0 and (
        float(np.max(np.abs(img.values - img.values[0]))) <= 1e-9 * vmax
    )
    work = img.values.mean(axis=0)[None, :] if radial else img.values
    deriv = fourier_derivative(work, img.h, d + p)
    scale = float(np.max(np.abs(deriv)))
    if scale == 0.0:
        return img.with_values(np.zeros_like(img.values))
    raw = np.sign(deriv)
    raw[np.abs(deriv) < 1e-6 * scale] = 0.0
    raw = raw * _edge_cutoff(img.offsets)[None, :]
    raw = _mollify_rows(raw, img.h, smoothing)
    if radial:
        sym = 0.5 * (raw + raw[:, ::-1])
        sym = np.repeat(sym, len(img.directions), axis=0)
    else:
        idx = img.reflection_indices()
        sym = 0.5 * (raw + raw[idx][:, ::-1])
    np.clip(sym, -1.0, 1.0, out=sym)
    return img.with_values(sym)


@dataclass(frozen=True)
class SeparableTestImage:
    """Test image of rank one: values = outer(angular, profile).

    `angular_kind` names the angular factor as a polynomial in the
    direction: ("const",), ("coord", i) for w_i, or ("coord2", i, j)
    for w_i w_j, each divided by its sup over the sphere so the stored
    `angular` has unit sup. rnorm_dual_estimate uses the kind to
    integrate the direction variable exactly (degree <= 2 spherical
    reduction), which is what makes sharply saturated profiles usable:
    a discrete direction sum cannot resolve the high-degree spherical
    content their derivatives create at large radius. `parities` is
    (s_w, s_b) with s_w*s_b = +1 so the image is even under
    (w, b) -> (-w, -b).
    """

    directions: np.ndarray
    direction_weights: np.ndarray
    offsets: np.ndarray
    angular: np.ndarray
    profile: np.ndarray
    parities: tuple[int, int]
    angular_kind: tuple | None = None

    @property
    def h(self) -> float:
        return float(self.offsets[1] - self.offsets[0])

    @property
    def values(self) -> np.ndarray:
        return np.outer(self.angular, self.profile)

    @property
    def sup(self) -> float:
        return float(
            np.max(np.abs(self.angular)) * np.max(np.abs(self.profile))
        )

    def to_image(self) -> RadonImage:
        return RadonImage(
            self.directions, self.direction_weights, self.offsets, self.values
        )


def default_dictionary(
    directions: np.ndarray,
    direction_weights: np.ndarray,
    offsets: np.ndarray,
    hermite_orders=range(7),
    widths=(0.8, 1.0, 1.5, 2.5),
    saturations=(1.0, 4.0, 16.0, 64.0),
    smoothing: float = 0.16,
) -> list[SeparableTestImage]:
    """Even separable test images: windowed Hermite offset profiles
    times low-order direction polynomials.

    A member is ang(w) * prof(b) with matching parities (even angular
    with even Hermite order, odd with odd), so phi(-w, -b) = phi(w, b)
    exactly. Saturation tanh(lambda * prof)/tanh(lambda) flattens the
    profile toward its sign pattern while keeping the sup under 1;
    saturated members are what lets a finite dictionary track
    total-variation mass rather than just low moments. Every profile is
    forced to zero before the spectral-derivative taper fringe by a
    smooth edge cutoff and then mollified with a Gaussian of std
    `smoothing` offset units. The mollification comes after the
    saturation, so the offset grid only ever has to resolve the
    mollifier; arbitrarily hard saturation is safe, and the labeled
    angular factors keep the sphere integral closed-form no matter how
    rough the profile is.
    """
    d = directions.shape[1]
    # (values on the direction set, symbolic kind); each divided by its
    # sup over the whole sphere so the continuum sup bound is exact
    even_ang = [(np.ones(len(directions)), ("const",))]
    odd_ang = [(directions[:, 0], ("coord", 0))]
    if d == 3:
        even_ang += [
            (directions[:, i] ** 2, ("coord2", i, i)) for i in range(3)
        ]
        even_ang += [
            (2.0 * directions[:, 0] * directions[:, 1], ("coord2", 0, 1)),
            (2.0 * directions[:, 1] * directions[:, 2], ("coord2", 1, 2)),
        ]
        odd_ang += [
            (directions[:, 1], ("coord", 1)),
            (directions[:, 2], ("coord", 2)),
        ]

    hstep = float(offsets[1] - offsets[0])
    window = _edge_cutoff(offsets)
    members = []
    for sigma in widths:
        t = offsets / sigma
        env = np.exp(-0.5 * t * t)
        polys = _hermite_all(max(hermite_orders) + 1, t)
        for m in hermite_orders:
            base = polys[m] * env
            peak = float(np.max(np.abs(base)))
            if peak == 0.0:
                continue
            base = base / peak
            angs = even_ang if m % 2 == 0 else odd_ang
            s_b = 1 if m % 2 == 0 else -1
            for lam in saturations:
                prof = np.tanh(lam * base) / np.tanh(lam)
                prof = _mollify_rows(prof * window, hstep, smoothing)
                np.clip(prof, -1.0, 1.0, out=prof)
                for ang, kind in angs:
                    members.append(
                        SeparableTestImage(
                            directions,
                            direction_weights,
                            offsets,
                            ang,
                            prof,
                            (s_b, s_b),
                            kind,
                        )
                    )
    return members


def _hermite_all(n: int, t: np.ndarray) -> list[np.ndarray]:
    """He_0..He_{n-1} evaluated at t (probabilists' recursion)."""
    out = [np.ones_like(t)]
    if n > 1:
        out.append(t.copy())
    for m in range(2, n):
        out.append(t * out[m - 1] - (m - 1) * out[m - 2])
    return out


def _pairing_quadrature(d: int, window: float, step: float, sphere_n: int):
    """Quadrature for the ball of radius `window`, as (points, weights,
    shells).

    d=3 uses a product rule, uniform radii times a direction rule with
    weights r^2 dr dS; `shells` is (radii, dirs) for the shell-moment
    shortcut. The radial factors of the dual transform oscillate at the
    mollification scale of the test functions, so the radial step is
    what has to be small; the direction rule only ever has to resolve
    the field itself, which is smooth. A cubic lattice gets this
    backwards: affordable spacings alias the radial oscillation and the
    pairing comes out garbage. d=1 is a plain trapezoid grid (shells is
    None).
    """
    if d == 1:
        ax = np.linspace(-window, window, 2 * int(round(window / step)) + 1)
        wq = np.full(len(ax), ax[1] - ax[0])
        wq[0] *= 0.5
        wq[-1] *= 0.5
        return ax[:, None], wq, None
    n_r = int(round(window / step))
    radii = step * np.arange(1, n_r + 1)
    rw = np.full(n_r, step)
    rw[-1] *= 0.5
    dirs, dw = direction_set(3, sphere_n)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    vol = ((radii**2 * rw)[:, None] * dw[None, :]).ravel()
    return pts, vol, (radii, dirs)


def _separable_parity_error(phi: SeparableTestImage) -> float:
    """Max violation of phi(-w, -b) = phi(w, b) for a factored member.

    Directions are assumed antipodally ordered (second half = minus the
    first half), which is how direction_set lays them out.
    """
    s_w, s_b = phi.parities
    prof = phi.profile
    e_prof = float(np.max(np.abs(prof[::-1] - s_b * prof)))
    half = len(phi.directions) // 2
    flip = np.concatenate([np.arange(half, 2 * half), np.arange(half)])
    e_ang = float(np.max(np.abs(phi.angular[flip] - s_w * phi.angular)))
    scale = max(1e-30, phi.sup)
    return (
        max(
            e_prof * np.max(np.abs(phi.angular)),
            e_ang * np.max(np.abs(prof)),
        )
        / scale
    )


def _kind_values(kind: tuple, directions: np.ndarray) -> np.ndarray:
    """Angular factor named by `kind` on the direction set, in the
    sup-normalized convention of default_dictionary."""
    if kind[0] == "const":
        return np.ones(len(directions))
    if kind[0] == "coord":
        return directions[:, kind[1]]
    if kind[0] == "coord2":
        i, j = kind[1], kind[2]
        vals = directions[:, i] * directions[:, j]
        return vals if i == j else 2.0 * vals
    raise ValueError(f"unknown angular_kind {kind!r}")


class _DualPairing:
    """<f, R* chi> on a fixed lattice for chi = ang(w) q(b), member by
    member, with the sphere integral in R* done in closed form when the
    angular factor is a labeled polynomial of degree at most two.

    With M_k(r) the integral of q(s) s^k over [-r, r] and r = |x|,

        R*[1 * q](x)       = 2 pi M_0 / r
        R*[w_i * q](x)     = (x_i / r) * 2 pi M_1 / r^2
        R*[w_i w_j * q](x) = (delta_ij / 3) * 2 pi M_0 / r
                             + (x_i x_j / r^2 - delta_ij / 3)
                               * 2 pi (1.5 M_2 / r^3 - 0.5 M_0 / r)

    and at the origin the three radial factors are 4 pi q(0), 0, 0.
    The M_k come from spline antiderivatives of q s^k, so no direction
    set appears at all; that is the point, because q has spherical
    content of degree about (wavenumber x radius) which a discrete
    direction sum has no hope of resolving for saturated profiles.
    On the product quadrature the x-integral splits into shell moments
    of the field (computed once) against the radial factors, so a
    member costs one spectral derivative plus a handful of short dot
    products, and members sharing a profile array are nearly free. In
    d=1 the direction set IS the whole sphere and the plain weighted
    sum is exact.
    """

    def __init__(self, pts, fvals, shells, d: int, order: int):
        self.pts = pts
        self.fvals = fvals
        self.d = d
        self.order = order
        self._cache: dict[int, dict] = {}
        if d == 3:
            radii, dirs = shells
            self.radii = radii
            fgrid = fvals.reshape(len(radii), len(dirs))
            self.G0 = fgrid.sum(axis=1)
            self.G1 = [fgrid @ dirs[:, i] for i in range(3)]
            self.G2 = {
                (i, j): fgrid @ (dirs[:, i] * dirs[:, j])
                for i in range(3)
                for j in range(i, 3)
            }
            self.rmax = float(radii[-1])
        else:
            self.rmax = float(np.max(np.abs(pts)))

    def _scalars(self, offsets, profile, h) -> dict:
        got = self._cache.get(id(profile))
        if got is not None:
            return got
        q = fourier_derivative(profile, h, self.order)
        r = self.radii
        moments = []
        for k in range(3):
            A = CubicSpline(offsets, q * offsets**k).antiderivative()
            moments.append(A(r) - A(-r))
        M0, M1, M2 = moments
        F0 = 2.0 * np.pi * M0 / r
        F1 = 2.0 * np.pi * M1 / r**2
        F2 = 2.0 * np.pi * (1.5 * M2 / r**3 - 0.5 * M0 / r)
        out = {
            "s0": float(self.G0 @ F0),
            "t0": float(self.G0 @ F2),
            "s1": [float(g @ F1) for g in self.G1],
            "t2": {ij: float(g @ F2) for ij, g in self.G2.items()},
        }
        self._cache[id(profile)] = out
        return out

    def pair(self, phi: SeparableTestImage) -> float:
        if self.rmax > float(phi.offsets[-1]) + 1e-9:
            raise ValueError("offset grid too small for the pairing window")
        if self.d == 1:
            q = fourier_derivative(phi.profile, phi.h, self.order)
            spline = CubicSpline(phi.offsets, q)
            acc = 0.0
            for k in range(len(phi.directions)):
                t = self.pts @ phi.directions[k]
                acc += float(
                    phi.direction_weights[k]
                    * phi.angular[k]
                    * (self.fvals @ spline(t))
                )
            return acc
        sc = self._scalars(phi.offsets, phi.profile, phi.h)
        kind = phi.angular_kind
        if kind[0] == "const":
            return sc["s0"]
        if kind[0] == "coord":
            return sc["s1"][kind[1]]
        i, j = kind[1], kind[2]
        if i == j:
            return sc["s0"] / 3.0 + sc["t2"][(i, i)] - sc["t0"] / 3.0
        return 2.0 * sc["t2"][(min(i, j), max(i, j))]


def rnorm_dual_estimate(
    field: ScalarField,
    p: int,
    d: int | None = None,
    dictionary: list | None = None,
    n_directions: int = 400,
    B: float = 8.0,
    h: float = 0.02,
    plane_step: float = 0.25,
    x_window: float = 6.0,
    x_step: float = 0.02,
    x_sphere: int = 800,
) -> RNormReport:
    """Best lower bound over the dictionary (both signs of each phi).

    Members are SeparableTestImage or RadonImage; they must be even
    with sup norm at most 1 + 1e-9 (violators raise). Separable
    members with a labeled angular factor, and RadonImage members
    whose rows are all equal (radial fields produce these), pair
    through the closed-form sphere reduction of _DualPairing, which
    tolerates saturated profiles. Anything else falls back to the
    discrete direction sum and must be smooth at the scale that sum
    can resolve (see the module docstring). With no dictionary
    supplied, the default family is built on an (n_directions,
    [-B, B]/h) grid. The x-integral runs over the ball of radius
    x_window with radial step x_step and an x_sphere-point direction
    rule (d=3).
    """
    d = field.dim if d is None else d
    _check_odd(p, d)
    if dictionary is None:
        probe = radon(
            field, n_directions=n_directions, B=B, h=h, plane_step=plane_step
        )
        dictionary = default_dictionary(
            probe.directions, probe.direction_weights, probe.offsets
        )
    pts, vol, shells = _pairing_quadrature(d, x_window, x_step, x_sphere)
    fvals = field(pts) * vol
    pairing = _DualPairing(pts, fvals, shells, d, d + p)
    sign_flip = (-1.0) ** ((d + p) // 2)
    scale_out = -gamma_d(d) * sign_flip

    def summed_pair(image: RadonImage) -> float:
        chi = image.with_values(
            fourier_derivative(image.values, image.h, d + p), parity="none"
        )
        return float(fvals @ dual_radon(chi, pts))

    best = 0.0
    for phi in dictionary:
        if isinstance(phi, SeparableTestImage):
            if phi.sup > 1.0 + 1e-9:
                raise ValueError(
                    f"dictionary member exceeds the unit sup bound ({phi.sup:.6f})"
                )
            if _separable_parity_error(phi) > 1e-6:
                raise ValueError("dictionary member is not even")
            if d == 3 and phi.angular_kind is None:
                pair = summed_pair(phi.to_image())
            else:
                if d == 3:
                    expect = _kind_values(phi.angular_kind, phi.directions)
                    if float(np.max(np.abs(phi.angular - expect))) > 1e-8:
                        raise ValueError(
                            "angular values disagree with angular_kind"
                        )
                pair = pairing.pair(phi)
        else:
            sup = float(np.max(np.abs(phi.values)))
            if sup > 1.0 + 1e-9:
                raise ValueError(
                    f"dictionary member exceeds the unit sup bound ({sup:.6f})"
                )
            phi.check_even(1e-6)
            vals = phi.values
            if d == 3 and sup > 0.0 and (
                float(np.max(np.abs(vals - vals[0]))) <= 1e-12 * sup
            ):
                member = SeparableTestImage(
                    phi.directions,
                    phi.direction_weights,
                    phi.offsets,
                    np.ones(len(phi.directions)),
                    vals[0],
                    (1, 1),
                    ("const",),
                )
                pair = pairing.pair(member)
            else:
                pair = summed_pair(phi)
        best = max(best, abs(scale_out * pair))
    meta = {
        "n_members": len(dictionary),
        "x_window": x_window,
        "x_step": x_step,
        "order": d + p,
    }
    return RNormReport(None, best ** (1.0 / p), None, meta)


def rnorm_both(
    field: ScalarField,
    p: int,
    d: int | None = None,
    smoothing: float | None = None,
    n_directions: int = 400,
    B: float = 8.0,
    h: float = 0.02,
    plane_step: float = 0.25,
    x_window: float = 6.0,
    x_step: float = 0.02,
    x_sphere: int = 800,
) -> RNormReport:
    """Direct value and the near-optimal-phi dual bound, with the gap."""
    d = field.dim if d is None else d
    img = radon(field, n_directions=n_directions, B=B, h=h, plane_step=plane_step)
    direct = rnorm_direct(field, p, d, image=img)
    phi = near_optimal_test_function(field, p, d, smoothing=smoothing, image=img)
    dual = rnorm_dual_estimate(
        field,
        p,
        d,
        dictionary=[phi],
        x_window=x_window,
        x_step=x_step,
        x_sphere=x_sphere,
    )
    dv, lb = direct.direct_value, dual.dual_lower_bound
    gap = (dv - lb) / dv if dv else None
    meta = dict(direct.grid)
    meta.update(dual.grid)
    return RNormReport(dv, lb, gap, meta)


def rnorm_of_net(net: RepuNet | MonomialNet, d: int, p: int) -> float:
    """Measure-side cost of a canonical finite network.

    Monomial coefficients contribute nothing: only the even part of the
    network's measure carries cost, and the monomial terms live
    entirely in the polynomial sector.
    """
    base = net.base if isinstance(net, MonomialNet) else net
    if base.p != p or base.dim != d:
        raise ValueError("net's (d, p) disagree with the arguments")
    mu, _ = to_measure(base)  # raises "canonicalize first" on non-unit rows
    even, _ = even_odd_decompose(mu)
    return weighted_tv_norm(even, WeightFn(p).reciprocal) ** (1.0 / p)
