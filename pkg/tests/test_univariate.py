import numpy as np
import pytest

from repucost.infinite import InfiniteNet, eval_H
from repucost.networks import RepuNet, canonicalize
from repucost.univariate import (
    PiecewisePoly1D,
    abs_power,
    build_optimal_measure,
    cost_1d,
    distributional_derivatives,
    monomial,
    repu_power,
    solve_moment_problem,
    verify_theorem_1d,
)

from math import factorial


def random_canonical_net(p, k, rng):
    w = rng.choice([-1.0, 1.0], size=k)
    b = rng.uniform(-2.0, 2.0, size=k)
    a = rng.normal(0.0, 1.0, size=k)
    return canonicalize(RepuNet(p, w[:, None], b, a, float(rng.normal())))


# --- distributional derivatives ---

def test_derivatives_of_repu_power():
    for p in (1, 3):
        fp, fpp, limits = distributional_derivatives(repu_power(p), p)
        assert fpp.atoms == ((0.0, float(factorial(p))),)
        assert limits == (pytest.approx(0.0), pytest.approx(factorial(p)))


def test_derivatives_of_monomial():
    for p in (1, 3):
        fp, fpp, limits = distributional_derivatives(monomial(p), p)
        assert len(fpp.atoms) == 0
        assert limits == (pytest.approx(factorial(p)), pytest.approx(factorial(p)))


def test_derivatives_of_abs_power():
    for p in (1, 3):
        fp, fpp, limits = distributional_derivatives(abs_power(p), p)
        assert len(fpp.atoms) == 1
        loc, weight = fpp.atoms[0]
        assert loc == 0.0 and weight == pytest.approx(2.0 * factorial(p))
        assert limits == (pytest.approx(-factorial(p)), pytest.approx(factorial(p)))


def test_overdegree_rejected():
    with pytest.raises(ValueError):
        distributional_derivatives(monomial(3), 1)


# --- closed-form costs ---

def test_cost_repu_power():
    for p in (1, 3):
        rep = cost_1d(repu_power(p), p)
        assert rep.integral_term == pytest.approx(1.0)
        assert rep.boundary_term == pytest.approx(1.0)
        assert rep.cost == pytest.approx(1.0)


def test_cost_monomial_boundary_branch():
    for p in (1, 3):
        rep = cost_1d(monomial(p), p)
        assert rep.integral_term == pytest.approx(0.0)
        assert rep.boundary_term == pytest.approx(2.0)
        assert rep.cost == pytest.approx(2.0 ** (1.0 / p))
        assert rep.active_case == "lambda_negative"


def test_cost_abs_power_integral_branch():
    for p in (1, 3):
        rep = cost_1d(abs_power(p), p)
        assert rep.integral_term == pytest.approx(2.0)
        assert rep.boundary_term == pytest.approx(0.0)
        assert rep.cost == pytest.approx(2.0 ** (1.0 / p))
        assert rep.active_case == "lambda_zero"


def test_cost_scaling_is_homogeneous():
    rng = np.random.default_rng(2)
    net = random_canonical_net(3, 4, rng)
    f = PiecewisePoly1D.from_net(net)
    base = cost_1d(f, 3).cost ** 3
    for alpha in (0.5, 2.0, 7.0):
        scaled = cost_1d(f.scaled(alpha), 3).cost ** 3
        assert scaled == pytest.approx(alpha * base, rel=1e-12)


def test_cost_invariant_under_constant_shift():
    rng = np.random.default_rng(12)
    net = random_canonical_net(3, 3, rng)
    f = PiecewisePoly1D.from_net(net)
    def plus_const(c):
        c = np.asarray(c, dtype=float).copy()
        if c.size == 0:
            return np.array([11.0])
        c[0] += 11.0
        return c

    shifted = PiecewisePoly1D(f.breakpoints, [plus_const(c) for c in f.pieces])
    assert cost_1d(shifted, 3).cost == pytest.approx(cost_1d(f, 3).cost)


def test_one_signed_net_cost_is_exact_coefficient_sum():
    # all coefficients positive: cost^p = sum a_i exactly
    rng = np.random.default_rng(6)
    k = 5
    w = rng.choice([-1.0, 1.0], size=k)
    b = rng.uniform(-2, 2, size=k)
    a = rng.uniform(0.1, 2.0, size=k)
    net = RepuNet(3, w[:, None], b, a, 0.0)
    f = PiecewisePoly1D.from_net(net)
    assert cost_1d(f, 3).cost ** 3 == pytest.approx(float(np.sum(a)), rel=1e-12)


# --- LP cross-check ---

@pytest.mark.parametrize("p", [1, 3])
def test_lp_matches_closed_form_on_canonical_suite(p):
    for f in (repu_power(p), monomial(p), abs_power(p)):
        chk = verify_theorem_1d(f, p, B=8.0, h=0.005)
        assert chk.passed
        assert chk.rel_error < 1e-4


def test_lp_matches_closed_form_on_random_nets():
    rng = np.random.default_rng(11)
    for j in range(5):
        p = (1, 3)[j % 2]
        f = PiecewisePoly1D.from_net(random_canonical_net(p, 4, rng))
        chk = verify_theorem_1d(f, p, B=8.0, h=0.005)
        assert chk.rel_error < 1e-4, (j, p, chk)


def test_lp_branch_labels_on_canonical_suite():
    assert verify_theorem_1d(repu_power(3), 3).branch == "lambda_zero"
    assert verify_theorem_1d(monomial(3), 3).branch == "lambda_negative"
    assert verify_theorem_1d(abs_power(3), 3).branch == "lambda_zero"


def test_lp_objective_dominates_both_lower_bounds():
    rng = np.random.default_rng(21)
    for _ in range(3):
        f = PiecewisePoly1D.from_net(random_canonical_net(3, 3, rng))
        rep = cost_1d(f, 3)
        lp = solve_moment_problem(f, 3, B=8.0, h=0.01)
        assert lp.objective >= rep.integral_term - 1e-9
        assert lp.objective >= rep.boundary_term - 1e-9


def test_lp_constraint_residuals_small():
    f = PiecewisePoly1D.from_net(
        random_canonical_net(3, 4, np.random.default_rng(31))
    )
    lp = solve_moment_problem(f, 3, B=8.0, h=0.01)
    resid = lp.constraint_matrix @ np.concatenate([lp.nu, lp.beta]) - lp.rhs
    assert np.max(np.abs(resid)) < 1e-8


# --- reconstruction ---

@pytest.mark.parametrize("p", [1, 3])
def test_build_optimal_measure_achieves_cost(p):
    for f, want in ((repu_power(p), 1.0), (monomial(p), 2.0), (abs_power(p), 2.0)):
        mu, c0, rep = build_optimal_measure(f, p)
        assert rep.achieved_norm == pytest.approx(want, rel=1e-4)


@pytest.mark.parametrize("p", [1, 3])
def test_reconstruction_matches_function(p):
    xs = np.linspace(-5.0, 5.0, 501)
    for f in (repu_power(p), monomial(p), abs_power(p)):
        mu, c0, _ = build_optimal_measure(f, p)
        H = eval_H(InfiniteNet(mu, c0, p), xs[:, None])
        scale = 1.0 + float(np.max(np.abs(f(xs))))
        assert float(np.max(np.abs(H - f(xs)))) / scale < 1e-6


def test_poly_eval_and_breakpoint_continuity():
    f = PiecewisePoly1D.from_net(
        random_canonical_net(3, 4, np.random.default_rng(17))
    )
    for t in f.breakpoints:
        left = f(np.array([t - 1e-9]))[0]
        right = f(np.array([t + 1e-9]))[0]
        assert left == pytest.approx(right, abs=1e-6)
