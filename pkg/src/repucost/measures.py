"""Signed measures on the cylinder S^{d-1} x R.

Two concrete representations are supported: finite sums of Dirac atoms
(`AtomicMeasure`) and densities sampled on a direction/offset grid
(`GridMeasure`). Both carry total-variation and weighted total-variation
norms, and both split into even and odd parts under the reflection
(w, b) -> (-w, -b).

Antipodal labels are deliberately kept distinct: (w, b) and (-w, -b)
describe the same hyperplane but not the same ridge unit, and the even/odd
calculus needs both.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightFn",
    "AtomicMeasure",
    "GridMeasure",
    "sphere_area",
    "tv_norm",
    "weighted_tv_norm",
    "even_odd_decompose",
    "measure_to_dict",
    "measure_from_dict",
]

_UNIT_TOL = 1e-12


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} (2 for d=1, 4*pi for d=3)."""
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class WeightFn:
    """Offset weight psi(b) = 1 + |b|^(p-1) for odd p.

    At p = 1 the exponent is zero and |0|^0 is taken to be 1, so psi is
    identically 2. The reciprocal 1/psi is the weight used by cost
    computations.
    """

    p: int

    def __post_init__(self):
        if self.p < 1 or self.p % 2 == 0:
            raise ValueError("p must be an odd positive integer")

    def psi(self, b):
        b = np.asarray(b, dtype=float)
        if self.p == 1:
            return np.full_like(b, 2.0)
        return 1.0 + np.abs(b) ** (self.p - 1)

    def reciprocal(self, b):
        return 1.0 / self.psi(b)

    def __call__(self, b):
        return self.psi(b)


def _as_unit_rows(w: np.ndarray, tol: float = _UNIT_TOL) -> np.ndarray:
    norms = np.linalg.norm(w, axis=1)
    if not np.all(np.abs(norms - 1.0) <= tol):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ValueError(
            f"atom directions must be unit vectors (worst deviation {worst:.3e})"
        )
    return w


class AtomicMeasure:
    """Finite signed combination of Dirac atoms on S^{d-1} x R.

    Parameters
    ----------
    dim : int
        Ambient dimension d. Directions live on S^{d-1}.
    w : array_like, shape (n, dim)
        Unit direction of each atom (checked to 1e-12).
    b : array_like, shape (n,)
        Offset of each atom.
    mass : array_like, shape (n,)
        Signed mass of each atom.

    Construction normalizes the atom list: exactly coincident (w, b)
    pairs are merged by summing masses, then zero-mass atoms are dropped.
    Merging is exact (no tolerance) to avoid silent cancellation.
    """

    __slots__ = ("dim", "w", "b", "mass")

    def __init__(self, dim, w, b, mass):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        mass = np.atleast_1d(np.asarray(mass, dtype=float))
        if w.size == 0:
            w = w.reshape(0, dim)
        if w.shape[1] != dim:
            raise ValueError("direction rows must have length dim")
        if not (len(w) == len(b) == len(mass)):
            raise ValueError("w, b, mass must have equal lengths")
        if len(w):
            _as_unit_rows(w)
        w, b, mass = self._normalize(w, b, mass)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mass", mass)

    def __setattr__(self, *_):
        raise AttributeError("AtomicMeasure is immutable")

    @staticmethod
    def _normalize(w, b, mass):
        merged: dict[bytes, int] = {}
        out_w, out_b, out_m = [], [], []
        for i in range(len(b)):
            key = w[i].tobytes() + np.float64(b[i]).tobytes()
            if key in merged:
                out_m[merged[key]] += mass[i]
            else:
                merged[key] = len(out_m)
                out_w.append(w[i])
                out_b.append(b[i])
                out_m.append(mass[i])
        keep = [i for i, m in enumerate(out_m) if m != 0.0]
        if not keep:
            d = w.shape[1]
            return np.zeros((0, d)), np.zeros(0), np.zeros(0)
        return (
            np.array([out_w[i] for i in keep]),
            np.array([out_b[i] for i in keep]),
            np.array([out_m[i] for i in keep]),
        )

    @classmethod
    def empty(cls, dim: int) -> "AtomicMeasure":
        return cls(dim, np.zeros((0, dim)), [], [])

    @property
    def n_atoms(self) -> int:
        return len(self.mass)

    def scaled(self, alpha: float) -> "AtomicMeasure":
        return AtomicMeasure(self.dim, self.w, self.b, alpha * self.mass)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return AtomicMeasure(
            self.dim,
            np.vstack([self.w, other.w]),
            np.concatenate([self.b, other.b]),
            np.concatenate([self.mass, other.mass]),
        )

    def __repr__(self):
        return f"AtomicMeasure(dim={self.dim}, n_atoms={self.n_atoms})"


class GridMeasure:
    """Measure with a density sampled on a direction x offset grid.

    The direction set carries quadrature weights for the surface measure
    on S^{d-1} (they must sum to the sphere area within 1e-6). Offsets are
    a uniform grid on [-B, B] with spacing h; integrals in b use the
    trapezoid rule.

    density[i, j] is the value at (directions[i], offsets[j]).
    """

    __slots__ = ("dim", "directions", "direction_weights", "offsets", "density", "h")

    def __init__(self, dim, directions, direction_weights, offsets, density):
        directions = np.asarray(directions, dtype=float)
        direction_weights = np.asarray(direction_weights, dtype=float)
        offsets = np.asarray(offsets, dtype=float)
        density = np.asarray(density, dtype=float)
        if directions.ndim != 2 or directions.shape[1] != dim:
            raise ValueError("directions must be (n, dim)")
        _as_unit_rows(directions, tol=1e-9)
        area = sphere_area(dim)
        if abs(direction_weights.sum() - area) > 1e-6:
            raise ValueError(
                f"direction weights sum to {direction_weights.sum():.8f}, "
                f"expected sphere area {area:.8f}"
            )
        if len(offsets) < 2:
            raise ValueError("offset grid needs at least two nodes")
        steps = np.diff(offsets)
        h = steps[0]
        if h <= 0 or not np.allclose(steps, h, rtol=0, atol=1e-9 * max(1.0, abs(h))):
            raise ValueError("offsets must be a uniform increasing grid")
        if density.shape != (len(directions), len(offsets)):
            raise ValueError("density must be (n_directions, n_offsets)")
        if not np.all(np.isfinite(density)):
            raise ValueError("density values must be finite")
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "direction_weights", direction_weights)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "h", float(h))

    def __setattr__(self, *_):
        raise AttributeError("GridMeasure is immutable")

    @property
    def trapezoid_weights(self) -> np.ndarray:
        """Offset quadrature weights (h inside, h/2 at the two ends)."""
        tw = np.full(len(self.offsets), self.h)
        tw[0] *= 0.5
        tw[-1] *= 0.5
        return tw

    def with_density(self, density) -> "GridMeasure":
        return GridMeasure(
            self.dim, self.directions, self.direction_weights, self.offsets, density
        )

    def reflection_indices(self) -> np.ndarray:
        """Index map i -> j with directions[j] == -directions[i].

        Raises ValueError("grid not symmetric") when the direction set is
        not closed under w -> -w or the offset grid is not symmetric
        about 0.
        """
        if not np.allclose(self.offsets, -self.offsets[::-1], atol=1e-9):
            raise ValueError("grid not symmetric")
        neg = -self.directions
        # exact pairing with a tiny tolerance for sign arithmetic
        lookup = {self.directions[i].tobytes(): i for i in range(len(self.directions))}
        idx = np.empty(len(self.directions), dtype=int)
        for i in range(len(neg)):
            j = lookup.get(neg[i].tobytes())
            if j is None:
                match = np.where(
                    np.all(np.abs(self.directions - neg[i]) <= 1e-12, axis=1)
                )[0]
                if len(match) != 1:
                    raise ValueError("grid not symmetric")
                j = int(match[0])
            idx[i] = j
        return idx

    def __repr__(self):
        return (
            f"GridMeasure(dim={self.dim}, n_directions={len(self.directions)}, "
            f"n_offsets={len(self.offsets)})"
        )


def tv_norm(mu) -> float:
    """Total variation norm: sum of |mass| for atoms, quadrature of
    |density| for grids."""
    if isinstance(mu, AtomicMeasure):
        return float(np.sum(np.abs(mu.mass)))
    if isinstance(mu, GridMeasure):
        inner = np.abs(mu.density) @ mu.trapezoid_weights
        return float(mu.direction_weights @ inner)
    raise TypeError(f"not a measure: {type(mu)!r}")


def weighted_tv_norm(mu, weight) -> float:
    """Integral of weight(b) against |mu|.

    `weight` is any callable of the offset b (vectorized or scalar); pass
    `WeightFn(p).reciprocal` for the 1/psi weighting used by costs.
    """
    if isinstance(mu, AtomicMeasure):
        if mu.n_atoms == 0:
            return 0.0
        return float(np.sum(np.abs(mu.mass) * np.asarray(weight(mu.b), dtype=float)))
    if isinstance(mu, GridMeasure):
        wvals = np.asarray(weight(mu.offsets), dtype=float)
        inner = np.abs(mu.density) @ (mu.trapezoid_weights * wvals)
        return float(mu.direction_weights @ inner)
    raise TypeError(f"not a measure: {type(mu)!r}")


def even_odd_decompose(mu):
    """Split mu into its even and odd parts under (w, b) -> (-w, -b).

    Returns (mu_even, mu_odd) with mu = mu_even + mu_odd exactly. Each
    atom (w, b, m) contributes (w, b, m/2) and (-w, -b, m/2) to the even
    part, and (w, b, m/2), (-w, -b, -m/2) to the odd part. Grid densities
    use g_pm(w, b) = (g(w, b) +- g(-w, -b)) / 2 and require a
    reflection-closed grid.
    """
    if isinstance(mu, AtomicMeasure):
        if mu.n_atoms == 0:
            return mu, mu
        w2 = np.vstack([mu.w, -mu.w])
        b2 = np.concatenate([mu.b, -mu.b])
        half = 0.5 * mu.mass
        even = AtomicMeasure(mu.dim, w2, b2, np.concatenate([half, half]))
        odd = AtomicMeasure(mu.dim, w2, b2, np.concatenate([half, -half]))
        return even, odd
    if isinstance(mu, GridMeasure):
        idx = mu.reflection_indices()
        reflected = mu.density[idx][:, ::-1]
        even = mu.with_density(0.5 * (mu.density + reflected))
        odd = mu.with_density(0.5 * (mu.density - reflected))
        return even, odd
    raise TypeError(f"not a measure: {type(mu)!r}")


# ---------------------------------------------------------------------------
# JSON serialization


def measure_to_dict(mu) -> dict:
    """JSON-ready dict. Atom rows are flattened [w_1..w_d, b, mass]."""
    if isinstance(mu, AtomicMeasure):
        atoms = [
            list(map(float, mu.w[i])) + [float(mu.b[i]), float(mu.mass[i])]
            for i in range(mu.n_atoms)
        ]
        return {"dim": mu.dim, "atoms": atoms}
    if isinstance(mu, GridMeasure):
        lo, hi = float(mu.offsets[0]), float(mu.offsets[-1])
        return {
            "dim": mu.dim,
            "directions": mu.directions.tolist(),
            "direction_weights": mu.direction_weights.tolist(),
            "offsets": {"B": max(abs(lo), abs(hi)), "h": mu.h, "lo": lo, "hi": hi,
                        "n": len(mu.offsets)},
            "density": mu.density.tolist(),
        }
    raise TypeError(f"not a measure: {type(mu)!r}")


def measure_from_dict(spec: dict):
    if "atoms" in spec:
        d = int(spec["dim"])
        atoms = np.asarray(spec["atoms"], dtype=float)
        if atoms.size == 0:
            return AtomicMeasure.empty(d)
        atoms = atoms.reshape(-1, d + 2)
        return AtomicMeasure(d, atoms[:, :d], atoms[:, d], atoms[:, d + 1])
    if "density" in spec:
        off = spec["offsets"]
        offsets = np.linspace(off["lo"], off["hi"], int(off["n"]))
        return GridMeasure(
            int(spec["dim"]),
            spec["directions"],
            spec["direction_weights"],
            offsets,
            spec["density"],
        )
    raise ValueError("unrecognized measure JSON layout")


def save_measure(mu, path) -> None:
    with open(path, "w") as fh:
        json.dump(measure_to_dict(mu), fh)


def load_measure(path):
    with open(path) as fh:
        return measure_from_dict(json.load(fh))
