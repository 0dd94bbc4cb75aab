from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conezar.cones import PolyhedralCone, double_description, dual_cone

vec3 = st.lists(st.integers(-4, 4), min_size=3, max_size=3).filter(any)


def test_orthant_is_self_dual():
    c = PolyhedralCone([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert dual_cone(c).same_cone(c)
    assert c.full_dim and c.pointed


def test_planar_dual_by_hand():
    c = PolyhedralCone([[1, 0], [1, 1]])
    assert dual_cone(c).same_cone(PolyhedralCone([[0, 1], [1, -1]]))


def test_dual_with_pairing_matrix():
    # <v, w> = v^T P w with P = diag(1, -1)
    c = PolyhedralCone([[1, 0], [1, 1]])
    d = dual_cone(c, [[1, 0], [0, -1]])
    for g in c.generators:
        for h in d.generators:
            assert g[0] * h[0] - g[1] * h[1] >= 0
    assert d.same_cone(PolyhedralCone([[0, -1], [1, 1]]))


def test_flags():
    half_plane = PolyhedralCone([[1, 0], [-1, 0], [0, 1]])
    assert half_plane.full_dim and not half_plane.pointed
    ray = PolyhedralCone([[1, 2, 3]])
    assert ray.pointed and not ray.full_dim


def test_exact_membership_with_rationals():
    c = PolyhedralCone([[1, 0], [1, 1]])
    assert c.contains(["3/2", "3/2"])
    assert not c.contains(["1", "1000001/1000000"])
    assert c.interior_contains([Fraction(2), Fraction(1)])
    assert not c.interior_contains([Fraction(1), Fraction(1)])


def test_float_membership_tolerance():
    c = PolyhedralCone([[1, 0], [1, 1]])
    assert c.contains([1.0, 1.0 + 1e-12], 1e-9)
    assert not c.contains([1.0, 1.1], 1e-9)


def test_bad_input():
    with pytest.raises(ValueError):
        PolyhedralCone([[0, 0]])
    with pytest.raises(ValueError):
        PolyhedralCone([[1, 0], [1]])
    with pytest.raises(ValueError):
        PolyhedralCone([[1, 0], [0, 1]], facet_normals=[[1, 0]])


def test_double_description_square_cone():
    # x >= 0, y >= 0, z - x >= 0, z - y >= 0
    rays, lines = double_description([[1, 0, 0], [0, 1, 0], [-1, 0, 1], [0, -1, 1]], 3)
    assert not lines
    got = sorted(tuple(r) for r in rays)
    assert got == sorted([(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)])


@settings(max_examples=40, deadline=None)
@given(st.lists(vec3, min_size=3, max_size=6))
def test_dual_pairs_nonnegatively_and_is_involutive(gens):
    c = PolyhedralCone(gens)
    if not (c.full_dim and c.pointed):
        return
    d = dual_cone(c)
    for g in c.generators:
        for h in d.generators:
            assert sum(a * b for a, b in zip(g, h)) >= 0
    assert dual_cone(d).same_cone(c)


@settings(max_examples=30, deadline=None)
@given(st.lists(vec3, min_size=3, max_size=6), st.lists(vec3, min_size=1, max_size=5))
def test_exact_and_lp_membership_agree(gens, probes):
    # LP feasibility (scipy) is an independent route to membership
    c = PolyhedralCone(gens)
    for p in probes:
        exact = bool(c.contains(p))
        margin = c.margin(p)
        if abs(margin) > 1e-6:
            assert exact == bool(c.contains([float(x) for x in p], 1e-9))


def test_margin_sign():
    c = PolyhedralCone([[1, 0], [1, 1]])
    assert c.margin([2, 1]) > 0
    assert c.margin([1, 2]) < 0
    assert np.isclose(c.margin([1, 1]), 0.0)
