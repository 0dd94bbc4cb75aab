from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from conezar.polytopes import (HPolytope, UnboundedPolytopeError, minkowski_sum, mixed_volume,
                               mixed_volume_inclusion_exclusion)

SQUARE = [[1, 0], [0, 1], [-1, 0], [0, -1]]
HEXAGON = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]]
CUBE = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]


def test_unit_cube_and_simplex():
    assert HPolytope(CUBE, [0, 0, 0, 1, 1, 1]).volume == 1
    simplex = HPolytope([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]], [0, 0, 0, 1])
    assert simplex.volume == Fraction(1, 6)
    assert len(simplex.vertices) == 4


def test_square_vertices():
    p = HPolytope(SQUARE, [0, 0, 2, 3])
    assert sorted(map(tuple, p.vertices)) == [(0, 0), (0, 3), (2, 0), (2, 3)]
    assert p.volume == 6


def test_degenerate_polytope_has_zero_volume():
    seg = HPolytope(SQUARE, [0, 0, 2, 0])
    assert seg.degenerate and seg.volume == 0
    empty = HPolytope(SQUARE, [0, 0, -1, 0])
    assert empty.degenerate and empty.volume == 0


def test_unbounded_raises():
    with pytest.raises(UnboundedPolytopeError):
        HPolytope([[1, 0], [0, 1]], [0, 0])


def test_mixed_volume_of_equal_bodies_is_volume():
    p = HPolytope(CUBE, [1, 0, 2, 1, 3, 1])
    assert mixed_volume([p, p, p]) == p.volume


def test_box_mixed_volume():
    # mixed volume of three boxes with side lengths a_i, b_i, c_i is perm-average of products
    boxes = [HPolytope(CUBE, [0, 0, 0, *s]) for s in ([1, 2, 3], [2, 1, 1], [1, 1, 4])]
    sides = [[1, 2, 3], [2, 1, 1], [1, 1, 4]]
    from itertools import permutations
    want = sum(Fraction(sides[p[0]][0] * sides[p[1]][1] * sides[p[2]][2]) for p in permutations(range(3))) / 6
    assert mixed_volume(boxes) == want


hex_offsets = st.lists(st.integers(0, 4), min_size=6, max_size=6)


def _nef_hex(off):
    # hexagon support numbers are nef iff the polytope keeps every edge (nonnegative edge lengths)
    p = HPolytope(HEXAGON, off)
    return p if not p.degenerate else None


@settings(max_examples=40, deadline=None)
@given(hex_offsets)
def test_volume_matches_convex_hull(off):
    p = HPolytope(HEXAGON, off)
    if p.degenerate:
        return
    hull = ConvexHull(np.array([[float(x) for x in v] for v in p.vertices]))
    assert abs(float(p.volume) - hull.volume) < 1e-9


@settings(max_examples=25, deadline=None)
@given(hex_offsets, hex_offsets)
def test_planar_mixed_volume_routes_agree(a, b):
    p, q = _nef_hex(a), _nef_hex(b)
    if p is None or q is None:
        return
    p, q = HPolytope(HEXAGON, p.support_offsets()), HPolytope(HEXAGON, q.support_offsets())
    s = minkowski_sum(p, q)
    polar = (s.volume - p.volume - q.volume) / 2
    assert mixed_volume([p, q]) == polar == mixed_volume_inclusion_exclusion([p, q])


def test_scaling():
    p = HPolytope(CUBE, [1, 1, 1, 1, 2, 3])
    assert p.scaled(Fraction(3, 2)).volume == Fraction(27, 8) * p.volume


def test_every_vertex_is_tight_on_dim_facets():
    p = HPolytope(HEXAGON, [1, 1, 1, 1, 1, 1])
    for v in p.vertices:
        tight = [i for i, (n, a) in enumerate(zip(p.normals, p.offsets)) if sum(x * y for x, y in zip(v, n)) + a == 0]
        assert len(tight) >= 2
    assert any(len(c) == 2 for c in combinations(range(6), 2))
