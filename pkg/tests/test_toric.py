import json
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from conezar import toric
from conezar.chow import top_product
from conezar.polytopes import HPolytope


def hirzebruch(a: int) -> toric.Fan:
    return toric.Fan(2, [[1, 0], [0, 1], [-1, a], [0, -1]], [[0, 1], [1, 2], [2, 3], [3, 0]])


def test_projective_space_degrees():
    for n in (2, 3):
        m = toric.fan_to_chow(toric.projective_space_fan(n))
        assert m.rho == 1
        assert top_product(m, [[1]] * n) == 1


def test_hirzebruch_negative_section():
    f = hirzebruch(2)
    m = toric.fan_to_chow(f)
    assert m.rho == 2
    # v1 + v3 = a v2, so the ray (0,1) is the negative section, D^2 = -a
    e = m.toric.divisor_coords([0, 1, 0, 0])
    assert top_product(m, [e, e]) == -2
    fib = m.toric.divisor_coords([1, 0, 0, 0])
    assert top_product(m, [fib, fib]) == 0 and top_product(m, [fib, e]) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 3), st.lists(st.fractions(0, 5, max_denominator=4), min_size=2, max_size=2))
def test_self_intersection_is_twice_polygon_area(a, w):
    # independent route: area of the section polygon from scipy's convex hull
    m = toric.fan_to_chow(hirzebruch(a))
    nef = [np.array(g) for g in m.nef.generators]
    d = [w[0] * nef[0][i] + w[1] * nef[1][i] for i in range(2)]
    coeffs = m.toric.ray_coeffs(d)
    p = HPolytope(m.toric.fan.rays, coeffs)
    area = 0.0 if p.degenerate else ConvexHull(np.array([[float(x) for x in v] for v in p.vertices])).volume
    assert abs(float(top_product(m, [d, d])) - 2 * area) < 1e-9


def test_wall_pairing_rows_match_tensor():
    data = toric.cone_package(toric.preset_fan("toric-flip-3fold"))
    t = toric.intersection_tensor(data)
    toric.validate_tensor(data, t)  # raises on mismatch


def test_wall_labels():
    f = toric.preset_fan("fs-nonconvex")
    assert f.wall_label((0, 1)) == "C12"
    assert f.wall_label((0, 9)) == "C1_10"


@pytest.mark.parametrize("fan, problem", [
    ({"dim": 2, "rays": [[1, 0], [0, 1], [1, 0]], "max_cones": [[0, 1], [1, 2]]}, "duplicate rays"),
    ({"dim": 2, "rays": [[1, 0], [0, 0]], "max_cones": [[0, 1]]}, "zero ray"),
    # consecutive cones winding twice around the origin: every wall has two cofaces
    ({"dim": 2, "rays": [[1, 0], [-1, 1], [0, -1], [1, 1], [-1, 0], [1, -1]],
      "max_cones": [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0]]}, "overlap"),
    ({"dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1], [1, 2]]}, "cofaces"),
])
def test_invalid_fans_are_reported(fan, problem):
    report = toric.validate_fan(toric.Fan.from_json(fan))
    assert not report.valid and problem in report.problem
    with pytest.raises(toric.FanError):
        toric.fan_to_chow(toric.Fan.from_json(fan))


def test_non_primitive_ray_is_normalized_with_warning():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        f = toric.Fan(2, [[2, 0], [0, 1], [-1, -1]], [[0, 1], [1, 2], [2, 0]])
    assert f.rays[0] == [1, 0] and w


def test_fan_json_round_trip():
    f = toric.preset_fan("toric-flip-3fold")
    g = toric.Fan.from_json(json.loads(json.dumps(f.to_json())))
    assert g == f


def test_flip_cones_are_dual():
    m = toric.fan_to_chow(toric.preset_fan("toric-flip-3fold"))
    for g in m.nef.generators:
        for c in m.eff_curve.generators:
            assert sum(x * y for x, y in zip(np.array(m.pairing, dtype=object) @ np.array(c, dtype=object), g)) >= 0
    assert isinstance(m.tensor_exact.flat[0], Fraction)
