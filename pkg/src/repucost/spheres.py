"""Direction sets on S^{d-1} with equal-weight quadrature.

For d=3 the nodes are a Fibonacci lattice, symmetrized so the set is
closed under w -> -w (generate N/2 points on the upper half, append the
antipodes). Equal weights 4*pi/N. For d=1 the sphere is the two points
{+1, -1}, each with weight 1.
"""

from __future__ import annotations

import numpy as np

from .measures import sphere_area

__all__ = ["direction_set", "fibonacci_hemisphere", "orthonormal_frame"]

_GOLDEN = (1.0 + 5.0**0.5) / 2.0


def fibonacci_hemisphere(m: int) -> np.ndarray:
    """m quasi-uniform points on the open upper hemisphere (z > 0)."""
    i = np.arange(m, dtype=float) + 0.5
    # z covers (0, 1) uniformly; longitudes advance by the golden angle
    z = 1.0 - i / m
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    theta = 2.0 * np.pi * i / _GOLDEN
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def direction_set(d: int, n: int):
    """Quadrature nodes and weights for the surface measure on S^{d-1}.

    Returns (directions, weights) with weights summing to the sphere
    area exactly. For d=3, n must be even; the node set is antipodally
    symmetric with pair index i <-> i + n/2 (mod n).
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 3:
        if n < 2 or n % 2:
            raise ValueError("d=3 direction count must be a positive even number")
        upper = fibonacci_hemisphere(n // 2)
        dirs = np.vstack([upper, -upper])
        norms = np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = dirs / norms
        w = np.full(n, sphere_area(3) / n)
        return dirs, w
    raise ValueError("only d in {1, 3} is supported")


def orthonormal_frame(w: np.ndarray):
    """Two unit vectors (u, v) completing w to an orthonormal basis of R^3.

    The completion is reflection-compatible: u(-w) = u(w) and
    v(-w) = -v(w), so the hyperplane lattices used for (w, b) and
    (-w, -b) coincide point-for-point and evenness of hyperplane
    integrals holds to rounding.
    """
    w = np.asarray(w, dtype=float)
    axis = np.argmin(np.abs(w))
    e = np.zeros(3)
    e[axis] = 1.0
    u = e - (e @ w) * w
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    return u, v
