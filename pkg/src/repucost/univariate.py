"""Exact univariate representational cost and optimal measures.

Functions handled here are continuous piecewise polynomials of degree
at most p with C^{p-1} smoothness: exactly the class realizable by
finite RePU networks on the line. For such f the (p+1)-st
distributional derivative is a finite sum of Dirac terms at the
breakpoints, and the minimal weighted-TV cost over representing
measures has the closed form

    cost^p = max( (1/p!) sum |jumps of f^(p)| ,
                  (1/p!) |f^(p)(-inf) + f^(p)(+inf)| ).

The even part of any representing measure is pinned by the jumps. The
odd part is free up to p moment constraints (one per derivative order
0..p-1 anchored at 0 and at infinity), and minimizing its weighted TV
subject to those constraints is a finite linear program once the
offset axis is discretized. The LP here carries one unknown per grid
node plus one unknown per breakpoint, so the canonical minimizers
(mass sitting exactly on the breakpoints, or at b=0) are representable
without discretization error.

Offsets use the reparametrized ridge [w(x-b)]_+^p with w in {+1,-1};
conversion back to the standard [<w,x> - b]_+^p form maps a (-1, b)
label to the atom (w=-1, offset -b).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import comb, factorial

import numpy as np
import numpy.polynomial.polynomial as npp
from scipy.optimize import linprog

from .measures import AtomicMeasure, WeightFn, weighted_tv_norm
from .networks import RepuNet, canonicalize

__all__ = [
    "PiecewisePoly1D",
    "DistributionalDerivative",
    "CostReport",
    "MomentL1Problem",
    "repu_power",
    "monomial",
    "abs_power",
    "distributional_derivatives",
    "cost_1d",
    "solve_moment_problem",
    "build_optimal_measure",
    "verify_theorem_1d",
    "TheoremCheck",
]

_CONT_TOL = 1e-7


class PiecewisePoly1D:
    """Piecewise polynomial on R with m breakpoints and m+1 pieces.

    pieces[r] holds ascending-power coefficients valid on
    (breakpoints[r-1], breakpoints[r]); piece 0 extends to -inf and
    piece m to +inf. continuity_class is the highest derivative order
    that is continuous across every breakpoint (-1 if the value itself
    jumps), capped at the maximum piece degree.
    """

    __slots__ = ("breakpoints", "pieces", "continuity_class")

    def __init__(self, breakpoints, pieces):
        breakpoints = np.atleast_1d(np.asarray(breakpoints, dtype=float))
        if breakpoints.size and np.any(np.diff(breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        pieces = [np.trim_zeros(np.atleast_1d(np.asarray(c, dtype=float)), "b")
                  for c in pieces]
        pieces = [c if c.size else np.zeros(1) for c in pieces]
        if len(pieces) != len(breakpoints) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        self.breakpoints = breakpoints
        self.pieces = pieces
        self.continuity_class = self._continuity()

    def _continuity(self) -> int:
        max_deg = max(len(c) - 1 for c in self.pieces)
        cls = max_deg
        for j, t in enumerate(self.breakpoints):
            left, right = self.pieces[j], self.pieces[j + 1]
            for r in range(max_deg + 1):
                lv = npp.polyval(t, npp.polyder(left, r)) if r < len(left) else 0.0
                rv = npp.polyval(t, npp.polyder(right, r)) if r < len(right) else 0.0
                if abs(lv - rv) > _CONT_TOL * max(1.0, abs(lv), abs(rv)):
                    cls = min(cls, r - 1)
                    break
        return cls

    @property
    def degree(self) -> int:
        return max(len(c) - 1 for c in self.pieces)

    def evaluate(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.searchsorted(self.breakpoints, arr, side="right")
        out = np.empty(arr.shape)
        for r in range(len(self.pieces)):
            m = idx == r
            if np.any(m):
                out[m] = npp.polyval(arr[m], self.pieces[r])
        return float(out[0]) if np.asarray(x).ndim == 0 else out

    __call__ = evaluate

    def derivative(self, order: int = 1) -> "PiecewisePoly1D":
        return PiecewisePoly1D(
            self.breakpoints, [npp.polyder(c, order) for c in self.pieces]
        )

    def scaled(self, alpha: float) -> "PiecewisePoly1D":
        return PiecewisePoly1D(self.breakpoints, [alpha * c for c in self.pieces])

    def derivative_at_zero(self, order: int) -> float:
        """Value of the order-th derivative at x=0 (right-sided where it
        matters; callers only use orders within the continuity class)."""
        idx = int(np.searchsorted(self.breakpoints, 0.0, side="right"))
        return float(npp.polyval(0.0, npp.polyder(self.pieces[idx], order)))

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_net(cls, net: RepuNet) -> "PiecewisePoly1D":
        """Exact expansion of a width-k network on the line (d=1)."""
        if net.dim != 1:
            raise ValueError("from_net needs a 1-d network")
        can = canonicalize(net)  # folds zero rows; |w_i| = 1 afterwards
        w = can.W[:, 0]
        kinks = can.b * w  # kink of [w x - b]_+ is at x = b/w = b*w for |w|=1
        ts = np.unique(kinks)
        pieces = []
        for r in range(len(ts) + 1):
            if len(ts) == 0:
                mid = 0.0
            elif r == 0:
                mid = ts[0] - 1.0
            elif r == len(ts):
                mid = ts[-1] + 1.0
            else:
                mid = 0.5 * (ts[r - 1] + ts[r])
            coef = np.zeros(can.p + 1)
            coef[0] = can.c
            for i in range(can.k):
                if w[i] * mid - can.b[i] > 0:
                    # a * (w x - b)^p expanded in powers of x
                    for j in range(can.p + 1):
                        coef[j] += (
                            can.a[i]
                            * comb(can.p, j)
                            * w[i] ** j
                            * (-can.b[i]) ** (can.p - j)
                        )
            pieces.append(coef)
        return cls(ts, pieces)

    @classmethod
    def from_samples(cls, xs, ys, breakpoints, p: int) -> "PiecewisePoly1D":
        """Least-squares fit in the truncated power basis
        {1, x, ..., x^p, [x - t_j]_+^p}, which is C^{p-1} by
        construction."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        ts = np.atleast_1d(np.asarray(breakpoints, dtype=float))
        cols = [xs**j for j in range(p + 1)]
        cols += [np.maximum(xs - t, 0.0) ** p for t in ts]
        design = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
        poly_part = coef[: p + 1]
        ridge_part = coef[p + 1 :]
        pieces = [poly_part.copy()]
        running = poly_part.copy()
        for t, cj in zip(ts, ridge_part):
            add = np.array(
                [cj * comb(p, j) * (-t) ** (p - j) for j in range(p + 1)]
            )
            running = running + add
            pieces.append(running.copy())
        return cls(ts, pieces)


def repu_power(p: int, kink: float = 0.0, sign: float = 1.0, weight: float = 1.0):
    """weight * [sign * (x - kink)]_+^p as a PiecewisePoly1D."""
    s = 1.0 if sign > 0 else -1.0
    coef = np.array(
        [
            weight * comb(p, j) * s**j * (-s * kink) ** (p - j)
            for j in range(p + 1)
        ]
    )
    zero = np.zeros(1)
    if s > 0:
        return PiecewisePoly1D([kink], [zero, coef])
    return PiecewisePoly1D([kink], [coef, zero])


def monomial(p: int, weight: float = 1.0) -> PiecewisePoly1D:
    coef = np.zeros(p + 1)
    coef[p] = weight
    return PiecewisePoly1D([], [coef])


def abs_power(p: int, weight: float = 1.0) -> PiecewisePoly1D:
    up = np.zeros(p + 1)
    up[p] = weight
    down = np.zeros(p + 1)
    down[p] = weight * (-1.0) ** p
    return PiecewisePoly1D([0.0], [down, up])


@dataclass(frozen=True)
class DistributionalDerivative:
    """Atomic distribution: Dirac terms at breakpoint locations.

    regular_part is None here because inputs of degree <= p have a
    purely atomic (p+1)-st derivative.
    """

    atoms: tuple[tuple[float, float], ...]
    regular_part: PiecewisePoly1D | None = None

    def total_variation(self) -> float:
        return float(sum(abs(wt) for _, wt in self.atoms))


@dataclass(frozen=True)
class CostReport:
    integral_term: float  # (1/p!) * total jump mass of f^(p)
    boundary_term: float  # (1/p!) * |f^(p)(-inf) + f^(p)(+inf)|
    cost: float  # max of the two, p-th root
    active_case: str  # lambda_zero | lambda_negative | lambda_positive
    achieved_norm: float | None = None  # filled by build_optimal_measure


def _validated(f: PiecewisePoly1D, p: int) -> PiecewisePoly1D:
    if f.degree > p:
        raise ValueError(
            f"not RePU-representable at this p (piece degree {f.degree} > {p})"
        )
    if len(f.breakpoints) and f.continuity_class < p - 1:
        raise ValueError(
            "not RePU-representable at this p "
            f"(continuity class {f.continuity_class} < {p - 1})"
        )
    return f


def distributional_derivatives(f: PiecewisePoly1D, p: int):
    """(f^(p), f^(p+1), limits of f^(p) at -inf/+inf).

    f^(p) is piecewise constant; f^(p+1) is the atomic distribution of
    its jumps. Raises ValueError for pieces of degree above p or
    insufficient smoothness.
    """
    _validated(f, p)
    fp = f.derivative(p)
    consts = np.array([float(c[0]) for c in fp.pieces])
    scale = max(1.0, float(np.max(np.abs(consts))))
    atoms = []
    for j, t in enumerate(f.breakpoints):
        jump = consts[j + 1] - consts[j]
        if abs(jump) > 1e-10 * scale:
            atoms.append((float(t), float(jump)))
    fp1 = DistributionalDerivative(atoms=tuple(atoms))
    limits = (consts[0], consts[-1])
    return fp, fp1, limits


def cost_1d(f: PiecewisePoly1D, p: int) -> CostReport:
    """Closed-form minimal weighted-TV cost of f at power p."""
    _, fp1, limits = distributional_derivatives(f, p)
    pf = float(factorial(p))
    integral = fp1.total_variation() / pf
    s_signed = (limits[0] + limits[1]) / pf
    boundary = abs(s_signed)
    cost_val = max(integral, boundary) ** (1.0 / p)
    tie = 1e-12 * max(1.0, integral, boundary)
    if s_signed > integral + tie:
        case = "lambda_negative"
    elif s_signed < -integral - tie:
        case = "lambda_positive"
    else:
        case = "lambda_zero"
    return CostReport(integral, boundary, cost_val, case)


@dataclass(frozen=True)
class MomentL1Problem:
    """Discretized minimal-odd-part program and its solution.

    Unknowns are the odd density nu = (odd part)/psi at the grid nodes
    plus one weight beta_j per breakpoint atom; the objective is the
    quadrature of |nu| plus sum_j max(|a_j|, |beta_j|) with
    a_j = jump_j / p! the pinned even weights. Moment rows (one per
    derivative order 0..p-1) are equalities.
    """

    offsets: np.ndarray
    atom_locations: np.ndarray
    atom_weights: np.ndarray  # a_j = jumps of f^(p) divided by p!
    constraint_matrix: np.ndarray  # p rows, over [nu nodes | beta atoms]
    rhs: np.ndarray
    nu: np.ndarray  # solution density at nodes
    beta: np.ndarray  # solution atom weights
    multipliers: np.ndarray  # equality-row marginals from the solver
    objective: float

    def residuals(self) -> np.ndarray:
        x = np.concatenate([self.nu, self.beta])
        return self.constraint_matrix @ x - self.rhs


def _moment_rows(p: int, locs, weights, f: PiecewisePoly1D, limits):
    """Kernel exponents and right-hand sides of the p moment rows.

    Row for order k pairs the kernel b^(p-k) against the odd density;
    the k=0 row (kernel 1) pins the behaviour at infinity, rows for
    k >= 1 pin the derivatives of f at 0 given the even part.
    """
    pf = float(factorial(p))
    exps = [0]  # k = 0 row: kernel b^0 = 1
    rhs = [(limits[0] + limits[1]) / pf]
    for k in range(1, p):
        e = p - k
        exps.append(e)
        fk0 = f.derivative_at_zero(k)
        if k % 2 == 0:
            val = float(np.sum(weights * np.abs(locs) ** e)) / pf
            val -= 2.0 * factorial(e) / pf * fk0
        else:
            val = 2.0 * factorial(e) / pf * fk0
            val -= (
                float(
                    np.sum(
                        weights
                        * (np.maximum(-locs, 0.0) ** e - np.maximum(locs, 0.0) ** e)
                    )
                )
                / pf
            )
        rhs.append(val)
    return exps, np.array(rhs)


def solve_moment_problem(
    f: PiecewisePoly1D, p: int, B: float = 8.0, h: float = 0.01
) -> MomentL1Problem:
    """Solve the discretized minimal-odd-part program by LP.

    Split nu into nonnegative parts u - v; one extra pair
    (beta_j, s_j) per breakpoint with s_j >= max(|a_j|, |beta_j|)
    linearized as two inequalities plus a lower bound. HiGHS is
    deterministic for a fixed input.
    """
    _, fp1, limits = distributional_derivatives(f, p)
    pf = float(factorial(p))
    locs = np.array([t for t, _ in fp1.atoms])
    jumps = np.array([wt for _, wt in fp1.atoms])
    a = jumps / pf
    n_half = int(round(B / h))
    grid = np.linspace(-n_half * h, n_half * h, 2 * n_half + 1)
    qw = np.full(len(grid), h)
    qw[0] *= 0.5
    qw[-1] *= 0.5
    J = len(locs)
    n = len(grid)

    exps, rhs = _moment_rows(p, locs, jumps, f, limits)
    kern_grid = np.array([grid**e if e else np.ones(n) for e in exps])
    kern_atom = (
        np.array([locs**e if e else np.ones(J) for e in exps])
        if J
        else np.zeros((p, 0))
    )

    # variable order: [u (n), v (n), beta (J), s (J)]
    cvec = np.concatenate([qw, qw, np.zeros(J), np.ones(J)])
    A_eq = np.hstack(
        [kern_grid * qw, -(kern_grid * qw), kern_atom, np.zeros((p, J))]
    )
    if J:
        rows_ub = []
        for j in range(J):
            r1 = np.zeros(2 * n + 2 * J)
            r1[2 * n + j] = 1.0
            r1[2 * n + J + j] = -1.0
            rows_ub.append(r1)
            r2 = np.zeros(2 * n + 2 * J)
            r2[2 * n + j] = -1.0
            r2[2 * n + J + j] = -1.0
            rows_ub.append(r2)
        A_ub = np.array(rows_ub)
        b_ub = np.zeros(2 * J)
    else:
        A_ub, b_ub = None, None
    bounds = (
        [(0.0, None)] * (2 * n)
        + [(None, None)] * J
        + [(abs(aj), None) for aj in a]
    )
    res = linprog(
        cvec,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=rhs,
        bounds=bounds,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(
            f"increase truncation B (moment program ended with: {res.message})"
        )
    x = res.x
    nu = x[:n] - x[n : 2 * n]
    beta = x[2 * n : 2 * n + J]
    return MomentL1Problem(
        offsets=grid,
        atom_locations=locs,
        atom_weights=a,
        constraint_matrix=np.hstack([kern_grid * qw, kern_atom]),
        rhs=rhs,
        nu=nu,
        beta=beta,
        multipliers=np.asarray(res.eqlin.marginals, dtype=float),
        objective=float(res.fun),
    )


def build_optimal_measure(
    f: PiecewisePoly1D, p: int, B: float = 8.0, h: float = 0.01
):
    """Minimal-cost atomic measure representing f, in standard
    [<w,x> - b]_+^p coordinates on {+1,-1} x R.

    Returns (measure, c, CostReport) with c = f(0) and the report's
    achieved_norm set to the weighted TV norm of the returned measure.
    The even part sits on the breakpoints with the pinned weights; the
    odd part comes from the moment LP (grid mass converted to atoms
    through its quadrature weights, which leaves the moment equations
    satisfied identically, so the reconstruction error is solver
    feasibility, not grid resolution).
    """
    report = cost_1d(f, p)
    prob = solve_moment_problem(f, p, B=B, h=h)
    weight = WeightFn(p)

    qw = np.full(len(prob.offsets), h)
    qw[0] *= 0.5
    qw[-1] *= 0.5
    locs = np.concatenate([prob.atom_locations, prob.offsets])
    even = np.concatenate([prob.atom_weights, np.zeros(len(prob.offsets))])
    odd = np.concatenate([prob.beta, qw * prob.nu])

    keep = (np.abs(even) + np.abs(odd)) > 1e-14 * max(
        1.0, float(np.max(np.abs(even) + np.abs(odd), initial=0.0))
    )
    locs, even, odd = locs[keep], even[keep], odd[keep]
    psi = weight.psi(locs)
    plus_mass = 0.5 * psi * (even + odd)
    minus_mass = 0.5 * psi * (even - odd)

    w_col = np.concatenate([np.ones(len(locs)), -np.ones(len(locs))])
    b_col = np.concatenate([locs, -locs])  # (-1, b) relabels to offset -b
    mass = np.concatenate([plus_mass, minus_mass])
    mu = AtomicMeasure(1, w_col[:, None], b_col, mass)
    c = float(f.evaluate(0.0))
    achieved = weighted_tv_norm(mu, weight.reciprocal)
    return mu, c, replace(report, achieved_norm=achieved)


@dataclass(frozen=True)
class TheoremCheck:
    closed_form: float  # max(integral_term, boundary_term), before root
    lp_objective: float
    rel_error: float
    branch: str  # from the closed form; authoritative
    multiplier_branch: str  # what the LP equality marginals indicate
    multipliers: np.ndarray
    passed: bool


def verify_theorem_1d(
    f: PiecewisePoly1D, p: int, B: float = 8.0, h: float = 0.005
) -> TheoremCheck:
    """Closed form vs LP optimum, with branch diagnostics.

    The first equality marginal is the shadow price of the
    behaviour-at-infinity row; away from ties it is +-1 when the
    boundary term dominates and 0 when the integral term does. At exact
    ties it is degenerate, so the reported branch comes from the closed
    form and the marginal reading is informational.
    """
    report = cost_1d(f, p)
    prob = solve_moment_problem(f, p, B=B, h=h)
    closed = max(report.integral_term, report.boundary_term)
    denom = max(closed, 1e-30)
    rel = abs(prob.objective - closed) / denom
    lam0 = float(prob.multipliers[0]) if len(prob.multipliers) else 0.0
    if lam0 > 0.5:
        mbranch = "lambda_negative"
    elif lam0 < -0.5:
        mbranch = "lambda_positive"
    else:
        mbranch = "lambda_zero"
    return TheoremCheck(
        closed_form=closed,
        lp_objective=prob.objective,
        rel_error=rel,
        branch=report.active_case,
        multiplier_branch=mbranch,
        multipliers=prob.multipliers,
        passed=bool(rel <= 1e-4),
    )
