import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repucost.measures import (
    AtomicMeasure,
    GridMeasure,
    WeightFn,
    even_odd_decompose,
    load_measure,
    measure_from_dict,
    measure_to_dict,
    save_measure,
    sphere_area,
    tv_norm,
    weighted_tv_norm,
)
from repucost.spheres import direction_set


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def test_tv_norm_two_atoms():
    w = np.tile(unit([1.0, 0.0, 0.0]), (2, 1))
    mu = AtomicMeasure(3, w, np.array([0.0, 1.0]), np.array([1.0, -2.0]))
    assert tv_norm(mu) == 3.0


def test_tv_norm_empty_measure():
    mu = AtomicMeasure(3, np.zeros((0, 3)), np.zeros(0), np.zeros(0))
    assert tv_norm(mu) == 0.0


def test_tv_norm_gaussian_grid_matches_quadrature_oracle():
    # density e^{-b^2/2} on the whole cylinder: integral is area(S^2) * sqrt(2 pi)
    dirs, dw = direction_set(3, 400)
    offsets = np.arange(-8.0, 8.0 + 1e-12, 0.01)
    dens = np.broadcast_to(np.exp(-offsets**2 / 2), (len(dirs), len(offsets))).copy()
    mu = GridMeasure(3, dirs, dw, offsets, dens)
    oracle = 4.0 * np.pi * np.sqrt(2.0 * np.pi)
    assert abs(tv_norm(mu) - oracle) / oracle < 1e-4


def test_weighted_tv_single_atom_p3():
    mu = AtomicMeasure(3, unit([0, 0, 1.0])[None, :], np.array([1.0]), np.array([2.0]))
    assert weighted_tv_norm(mu, WeightFn(3).reciprocal) == pytest.approx(1.0)


def test_weighted_tv_with_unit_weight_equals_tv():
    rng = np.random.default_rng(0)
    w = rng.normal(size=(6, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    mu = AtomicMeasure(3, w, rng.normal(size=6), rng.normal(size=6))
    assert weighted_tv_norm(mu, lambda b: np.ones_like(b)) == pytest.approx(tv_norm(mu))


def test_weighted_tv_antipodal_pair_p1():
    w = unit([1.0, 0, 0])
    mu = AtomicMeasure(
        3, np.vstack([w, -w]), np.array([0.0, 0.0]), np.array([1.0, 1.0])
    )
    # psi is identically 2 at p=1
    assert weighted_tv_norm(mu, WeightFn(1).reciprocal) == pytest.approx(1.0)


def test_weight_fn_even_and_at_least_one():
    b = np.linspace(-4, 4, 101)
    for p in (1, 3, 5):
        wf = WeightFn(p)
        psi = wf.psi(b)
        assert np.all(psi >= 1.0)
        np.testing.assert_array_equal(psi, wf.psi(-b))
    # |0|^0 convention makes p=1 the constant 2
    np.testing.assert_array_equal(WeightFn(1).psi(b), np.full_like(b, 2.0))


def test_even_odd_single_atom():
    w = unit([0.0, 1.0, 0.0])
    mu = AtomicMeasure(3, w[None, :], np.array([2.0]), np.array([1.0]))
    ev, od = even_odd_decompose(mu)
    assert ev.n_atoms == 2 and od.n_atoms == 2
    # even part carries half mass at (w,2) and half at (-w,-2)
    for part, signs in ((ev, (0.5, 0.5)), (od, (0.5, -0.5))):
        masses = dict()
        for wi, bi, mi in zip(part.w, part.b, part.mass):
            masses[(round(float(wi @ w), 6), round(float(bi), 6))] = mi
        assert masses[(1.0, 2.0)] == pytest.approx(signs[0])
        assert masses[(-1.0, -2.0)] == pytest.approx(signs[1])


def test_even_odd_even_input_has_zero_odd_part():
    w = unit([1.0, 2.0, 3.0])
    mu = AtomicMeasure(
        3, np.vstack([w, -w]), np.array([1.5, -1.5]), np.array([0.5, 0.5])
    )
    ev, od = even_odd_decompose(mu)
    assert tv_norm(od) == pytest.approx(0.0, abs=1e-15)
    assert tv_norm(ev) == pytest.approx(tv_norm(mu))


def test_even_odd_recombines_exactly():
    rng = np.random.default_rng(7)
    w = rng.normal(size=(10, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    mu = AtomicMeasure(3, w, rng.normal(size=10), rng.normal(size=10))
    ev, od = even_odd_decompose(mu)
    # recombined measure must act like mu on any weight function
    for fn in (lambda b: np.ones_like(b), lambda b: b**2, np.cos):
        recombined = sum(
            float(m) * fn(np.array([b]))[0] for b, m in zip(ev.b, ev.mass)
        ) + sum(float(m) * fn(np.array([b]))[0] for b, m in zip(od.b, od.mass))
        direct = sum(float(m) * fn(np.array([b]))[0] for b, m in zip(mu.b, mu.mass))
        assert recombined == pytest.approx(direct, abs=1e-12)


@settings(deadline=None, max_examples=50)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_even_odd_parts_never_exceed_total(k, seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(k, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    mu = AtomicMeasure(3, w, rng.normal(size=k), rng.normal(size=k))
    ev, od = even_odd_decompose(mu)
    t = tv_norm(mu)
    assert tv_norm(ev) <= t + 1e-12
    assert tv_norm(od) <= t + 1e-12


def test_weighted_tv_bounded_by_sup_times_tv():
    rng = np.random.default_rng(3)
    w = rng.normal(size=(8, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    b = rng.uniform(-3, 3, size=8)
    mu = AtomicMeasure(3, w, b, rng.normal(size=8))
    weight = lambda t: 1.0 / (1.0 + t**2)
    sup = float(np.max(weight(b)))
    assert weighted_tv_norm(mu, weight) <= sup * tv_norm(mu) + 1e-12


def test_tv_invariant_under_atom_split():
    w = unit([1.0, 1.0, 0.0])
    one = AtomicMeasure(3, w[None, :], np.array([0.3]), np.array([2.0]))
    two = AtomicMeasure(
        3, np.vstack([w, w]), np.array([0.3, 0.3]), np.array([1.25, 0.75])
    )
    assert tv_norm(one) == pytest.approx(tv_norm(two))


def test_zero_mass_atoms_dropped():
    w = np.tile(unit([1.0, 0, 0]), (3, 1))
    mu = AtomicMeasure(3, w, np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.0, -1.0]))
    assert mu.n_atoms == 2


def test_non_unit_direction_rejected():
    with pytest.raises(ValueError):
        AtomicMeasure(3, np.array([[1.0, 1.0, 0.0]]), np.array([0.0]), np.array([1.0]))


def test_grid_weights_must_cover_sphere():
    dirs, dw = direction_set(3, 100)
    offsets = np.linspace(-8, 8, 11)
    dens = np.zeros((len(dirs), 11))
    with pytest.raises(ValueError):
        GridMeasure(3, dirs, 0.5 * dw, offsets, dens)


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(3) == pytest.approx(4.0 * np.pi)


def test_grid_even_odd_requires_reflection_closed_directions():
    # drop one direction so the set has no antipodal pairing
    dirs, dw = direction_set(3, 100)
    bad = dirs[:-1]
    offsets = np.linspace(-2, 2, 5)
    dens = np.ones((len(bad), 5))
    weights = np.full(len(bad), sphere_area(3) / len(bad))
    mu = GridMeasure(3, bad, weights, offsets, dens)
    with pytest.raises(ValueError, match="symmetr"):
        even_odd_decompose(mu)


def test_json_round_trip_atomic(tmp_path):
    rng = np.random.default_rng(1)
    w = rng.normal(size=(4, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    mu = AtomicMeasure(3, w, rng.normal(size=4), rng.normal(size=4))
    path = tmp_path / "mu.json"
    save_measure(mu, path)
    back = load_measure(path)
    np.testing.assert_allclose(back.w, mu.w)
    np.testing.assert_allclose(back.b, mu.b)
    np.testing.assert_allclose(back.mass, mu.mass)


def test_json_round_trip_grid():
    dirs, dw = direction_set(3, 20)
    offsets = np.linspace(-4, 4, 9)
    dens = np.arange(20 * 9, dtype=float).reshape(20, 9)
    mu = GridMeasure(3, dirs, dw, offsets, dens)
    back = measure_from_dict(measure_to_dict(mu))
    assert isinstance(back, GridMeasure)
    np.testing.assert_allclose(back.density, dens)
    np.testing.assert_allclose(back.offsets, offsets)
