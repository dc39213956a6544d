"""Finite-width RePU networks and their weight costs.

A network of width k computes

    g(x) = sum_i a_i * [<w_i, x> - b_i]_+^p + c

with odd power p. The training objective charges
half the squared Frobenius norm of the inner weights plus half the
sum of |a_i|^(2/p); because each unit is p-homogeneous in its inner
weight row, the infimum of that charge over rescalings of a fixed
function is sum_i |a_i|^(1/p) * ||w_i||, attained when
|a_i|^(2/p) = ||w_i||^2 for every unit (AM-GM). `canonicalize`
normalizes rows to unit length instead, which leaves the balanced cost
unchanged and puts the network in the form required by `to_measure`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import AtomicMeasure, WeightFn

__all__ = [
    "RepuNet",
    "MonomialNet",
    "CostBreakdown",
    "eval_net",
    "cost",
    "canonicalize",
    "rebalance",
    "to_measure",
    "net_to_dict",
    "net_from_dict",
]


@dataclass(frozen=True)
class RepuNet:
    """Parameters (W, b, a, c) of a width-k RePU network with power p.

    W has shape (k, d) with rows w_i; b and a have length k.
    """

    p: int
    W: np.ndarray
    b: np.ndarray
    a: np.ndarray
    c: float

    def __post_init__(self):
        if self.p < 1 or self.p % 2 == 0:
            raise ValueError("p must be an odd positive integer")
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if len(W) != len(b) or len(W) != len(a):
            raise ValueError("W, b, a must agree on the width k")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", float(self.c))

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def dim(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class MonomialNet:
    """RepuNet plus unpenalized coordinatewise monomial terms.

    v has shape (d, p); column k-1 holds the coefficients of the
    coordinatewise power x^k, so the network computes
    base(x) + sum_k <v[:, k-1], x^k>.
    """

    base: RepuNet
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.base.dim, self.base.p):
            raise ValueError("v must have shape (d, p)")
        object.__setattr__(self, "v", v)

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def dim(self) -> int:
        return self.base.dim


def _ridge_terms(net: RepuNet, X: np.ndarray) -> np.ndarray:
    z = X @ net.W.T - net.b
    return np.maximum(z, 0.0) ** net.p


def eval_net(net, x):
    """Evaluate the network at x (shape (d,) or (m, d)).

    Returns a scalar for a single point, an array of length m for a
    batch.
    """
    base = net.base if isinstance(net, MonomialNet) else net
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != base.dim:
        raise ValueError(f"expected points in R^{base.dim}, got shape {x.shape}")
    out = _ridge_terms(base, X) @ base.a + base.c
    if isinstance(net, MonomialNet):
        powers = X[:, :, None] ** np.arange(1, base.p + 1)
        out = out + np.einsum("mdk,dk->m", powers, net.v)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class CostBreakdown:
    frobenius_term: float  # (1/2) ||W||_F^2
    outer_term: float  # (1/2) sum |a_i|^(2/p)
    balanced_cost: float  # sum |a_i|^(1/p) ||w_i||
    canonical_cost: float  # sum |a_i|^(1/p) after unit-row rescale

    @property
    def total(self) -> float:
        return self.frobenius_term + self.outer_term


def cost(net: RepuNet) -> CostBreakdown:
    """All four cost readings of a finite network.

    balanced_cost is the AM-GM lower bound on frobenius_term +
    outer_term over all per-unit rescalings; canonical_cost equals it
    up to rounding (computed from the unit-row form).
    """
    row_norms = np.linalg.norm(net.W, axis=1)
    frob = 0.5 * float(np.sum(row_norms**2))
    outer = 0.5 * float(np.sum(np.abs(net.a) ** (2.0 / net.p)))
    balanced = float(np.sum(np.abs(net.a) ** (1.0 / net.p) * row_norms))
    canonical = canonical_cost(canonicalize(net))
    return CostBreakdown(frob, outer, balanced, canonical)


def canonical_cost(net: RepuNet) -> float:
    return float(np.sum(np.abs(net.a) ** (1.0 / net.p)))


def canonicalize(net: RepuNet) -> RepuNet:
    """Rescale every unit so its inner weight row has unit norm.

    Uses r_i = 1/||w_i||, giving (w_i/||w_i||, b_i/||w_i||,
    a_i*||w_i||^p); by p-homogeneity of [t]_+^p the computed function is
    unchanged. Zero rows cannot be normalized: their constant
    contribution a_i*[-b_i]_+^p is folded into c and the unit dropped.
    Already-canonical networks are returned as-is.
    """
    norms = np.linalg.norm(net.W, axis=1)
    if np.all(np.abs(norms - 1.0) <= 1e-14):
        return net
    alive = norms > 0.0
    c = net.c
    if not np.all(alive):
        dead = ~alive
        c = c + float(
            np.sum(net.a[dead] * np.maximum(-net.b[dead], 0.0) ** net.p)
        )
    W, b, a, r = net.W[alive], net.b[alive], net.a[alive], norms[alive]
    return RepuNet(
        p=net.p,
        W=W / r[:, None],
        b=b / r,
        a=a * r**net.p,
        c=c,
    )


def rebalance(net: RepuNet) -> RepuNet:
    """Rescale each unit so |a_i|^(2/p) = ||w_i||^2.

    This is the rescale achieving the AM-GM equality, so afterwards
    frobenius_term + outer_term equals balanced_cost. Units with a_i = 0
    keep w_i = 0 after the rescale and are folded away via
    canonicalize's zero-row rule applied in reverse here: they are
    simply dropped (their function contribution is a constant
    a_i*[...]=0).
    """
    can = canonicalize(net)
    keep = can.a != 0.0
    a = can.a[keep]
    r = np.abs(a) ** (1.0 / (2.0 * can.p))
    return RepuNet(
        p=can.p,
        W=can.W[keep] * r[:, None],
        b=can.b[keep] * r,
        a=a / r**can.p,
        c=can.c,
    )


def to_measure(net: RepuNet):
    """Atomic measure representation (mu, c') of a canonical network.

    Each unit becomes the atom (w_i, b_i, a_i * psi(b_i)); c' is the
    network value at 0. Feeding the pair to `infinite.eval_H`
    reproduces g pointwise because the psi factors cancel and the
    [-b]_+^p correction inside the integrand is exactly what c'
    absorbs.
    """
    norms = np.linalg.norm(net.W, axis=1)
    if not np.all(np.abs(norms - 1.0) <= 1e-9):
        raise ValueError("canonicalize first")
    psi = WeightFn(net.p).psi(net.b)
    mu = AtomicMeasure(net.dim, net.W, net.b, net.a * psi)
    c_prime = eval_net(net, np.zeros(net.dim))
    return mu, c_prime


# ---------------------------------------------------------------------------
# JSON round trip


def net_to_dict(net) -> dict:
    base = net.base if isinstance(net, MonomialNet) else net
    out = {
        "p": base.p,
        "W": base.W.tolist(),
        "b": base.b.tolist(),
        "a": base.a.tolist(),
        "c": base.c,
    }
    if isinstance(net, MonomialNet):
        out["v"] = net.v.tolist()
    return out


def net_from_dict(spec: dict):
    base = RepuNet(
        p=int(spec["p"]),
        W=np.asarray(spec["W"], dtype=float),
        b=np.asarray(spec["b"], dtype=float),
        a=np.asarray(spec["a"], dtype=float),
        c=float(spec.get("c", 0.0)),
    )
    if spec.get("v") is not None:
        return MonomialNet(base, np.asarray(spec["v"], dtype=float))
    return base
