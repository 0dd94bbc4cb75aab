from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conezar import polar
from conezar.chow import preset
from conezar.cones import PolyhedralCone
from conezar.polar import (ConcaveFn, NotBigError, PolarOptions, curve_volume, derivative, kt_check, morse_check,
                           polar_eval, reverse_kt_check, simplex_projection, volume_function, young_fenchel_gap,
                           zariski)

PB = preset("proj-bundle-p1")
FAST = PolarOptions(multistart=3)
pos = st.floats(0.05, 5.0)


def closed_form(x, y):
    # proj-bundle curve volume in the (xi.f, xi^2) basis
    return (1.5 * x - y) * np.sqrt(y) if x >= 2 * y else x**1.5 / np.sqrt(2)


def brute_force(m, w, grid=20001):
    # scan the nef rays (s, 1 - s) . generators directly, no optimizer involved
    g = m.nef.G
    s = np.linspace(0, 1, grid)[:, None]
    v = s * g[0] + (1 - s) * g[1]
    wv = v @ m.P @ np.asarray(w, float)
    vol = np.einsum("ijk,ni,nj,nk->n", m.tensor, v, v, v)
    ok = vol > 1e-14
    return float(np.min(wv[ok] ** 1.5 / np.sqrt(vol[ok])))


@pytest.mark.parametrize("w, want", [((1, 1), 1 / np.sqrt(2)), ((3, 1), 3.5), ((4, 1), 5.0),
                                     ((2, 1), 2.0), ((1, 0), 0.0), ((-1, 1), 0.0)])
def test_proj_bundle_values(w, want):
    assert curve_volume(PB, w) == pytest.approx(want, rel=1e-9, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(pos, pos)
def test_optimizer_matches_brute_force_scan(x, y):
    v = curve_volume(PB, (x, y), FAST)
    assert v == pytest.approx(closed_form(x, y), rel=1e-7)
    assert v <= brute_force(PB, (x, y)) * (1 + 1e-12)
    assert v == pytest.approx(brute_force(PB, (x, y)), rel=1e-4)


@settings(max_examples=15, deadline=None)
@given(pos, pos, st.floats(0.1, 10.0))
def test_scaling_equivariance(x, y, t):
    a = curve_volume(PB, (t * x, t * y), FAST)
    assert a == pytest.approx(t**1.5 * curve_volume(PB, (x, y), FAST), rel=1e-8)


@settings(max_examples=15, deadline=None)
@given(pos, pos, pos, pos)
def test_young_fenchel(x, y, s, u):
    f = volume_function(PB)
    v = s * PB.nef.G[0] + u * PB.nef.G[1]
    assert young_fenchel_gap(f, PB.P, (x, y), v, FAST) >= -1e-9 * max(1.0, x + y)


def test_zariski_by_hand():
    z = zariski(PB, ["1", "1"])
    assert np.allclose(z.gamma, [0, 0.5], atol=1e-10)
    assert np.allclose(z.positive_part, [1, 0.5], atol=1e-10)
    assert abs(z.residuals["B_dot_gamma"]) < 1e-12
    assert z.gamma_movable_witness < 0


@pytest.mark.parametrize("t", [0.2, 0.5, 0.9])
def test_positive_part_is_stable_along_negative_part(t):
    z = zariski(PB, [1, 1])
    zt = zariski(PB, z.positive_part + t * z.gamma)
    assert np.allclose(zt.B, z.B, atol=1e-8)
    assert zt.value == pytest.approx(z.value, rel=1e-10)


def test_not_big_raises():
    with pytest.raises(NotBigError):
        zariski(PB, [1, 0])
    with pytest.raises(NotBigError):
        zariski(PB, [-1, 1])


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 0.9])
def test_derivative_closed_form(t):
    want = -3 * np.sqrt(1 - t) - 0.75 / np.sqrt(1 - t)
    assert derivative(PB, [3 - 2 * t, 1 - t], [-2, -1]) == pytest.approx(want, abs=1e-9)


def test_morse_example():
    r = morse_check(PB, ["3", "1"], ["1/2", "1/4"])
    assert r.criterion == pytest.approx(1.625, abs=1e-9)
    assert r.big and r.certificate_ok
    assert r.volhat_difference >= r.lower_bound


def test_reverse_kt_needs_movable_y():
    # on the blow-up, y = E is effective but not movable and breaks the inequality
    m = preset("quadratic-surface")
    eps = Fraction(1, 10)
    v, x, y = [1, -eps], [1, -1], [0, 1]
    assert m.eff_curve.contains(y) and not m.mov_curve.contains(y)
    assert not reverse_kt_check(m, v, x, y).ok
    assert reverse_kt_check(m, v, x, [1, 0]).ok


def test_kt_equality_for_proportional_classes():
    m = preset("diagonal-abelian(3)")
    rep, prop = kt_check(m, [1, 2, 3], [2, 4, 6])
    assert prop and abs(rep.slack) < 1e-9 * rep.lhs
    rep, prop = kt_check(m, [1, 2, 3], [3, 1, 1])
    assert not prop and rep.slack > 0


def test_concave_fn_validation():
    cone = PolyhedralCone([[1, 0], [0, 1]])
    with pytest.raises(ValueError, match="homogeneous"):
        ConcaveFn(2.0, cone, lambda v: float(v[0] * v[1]) ** 1.5)
    with pytest.raises(ValueError, match="s-concave"):
        ConcaveFn(2.0, cone, lambda v: float(v[0] ** 2 + v[1] ** 2))
    with pytest.raises(ValueError):
        ConcaveFn(1.0, cone, lambda v: float(v[0] + v[1]))


def test_polar_of_generic_function():
    # f = x y on the orthant has Hf(w) = 4 w1 w2 (the optimizer sees no tensor here)
    f = ConcaveFn(2.0, PolyhedralCone([[1, 0], [0, 1]]), lambda v: float(v[0] * v[1]))
    r = polar_eval(f, np.eye(2), [2.0, 3.0])
    assert r.value == pytest.approx(24.0, rel=1e-8)


def test_seed_determinism():
    a = polar_eval(volume_function(PB), PB.P, [1.3, 0.7], PolarOptions(seed=5))
    b = polar_eval(volume_function(PB), PB.P, [1.3, 0.7], PolarOptions(seed=5))
    assert a.value == b.value and np.array_equal(a.minimizer, b.minimizer)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_simplex_projection(y):
    p = simplex_projection(np.array(y))
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-12
    assert np.allclose(simplex_projection(p), p, atol=1e-12)


def test_sweep_header_and_rows():
    header, rows = polar.sweep(PB, [3, 1], [-2, -1], 0.0, 0.5, 5)
    assert header == ["t", "volhat", "B_xi", "B_f", "derivative"]
    assert len(rows) == 6
    for t, v, *_ in rows:
        assert v == pytest.approx((3.5 - 2 * t) * np.sqrt(1 - t), rel=1e-9)


def test_involution_on_proj_bundle():
    rep = polar.involution_check(volume_function(PB), PB.P, samples=4)
    assert rep.ok and rep.max_rel_error < 1e-6
