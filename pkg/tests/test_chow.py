import json
from fractions import Fraction

import numpy as np
import pytest

from conezar import chow
from conezar.chow import ModelError, curve_power, pair, preset, top_product, vol_nef


def test_proj_bundle_relations():
    m = chow.proj_bundle_p1()
    xi, f = [1, 0], [0, 1]
    assert top_product(m, [f, f, xi]) == 0
    assert top_product(m, [xi, xi, f]) == 1
    assert top_product(m, [xi, xi, xi]) == -1
    # (xi + f)^3 = -1 + 3 = 2
    assert vol_nef(m, [1, 1]) == 2


def test_curve_power_matches_pairing():
    m = chow.proj_bundle_p1()
    b = [Fraction(1), Fraction(2)]
    c = curve_power(m, b)
    for d in ([1, 0], [0, 1]):
        assert pair(m, d, c) == top_product(m, [b, b, d])


def test_vol_nef_rejects_non_nef():
    with pytest.raises(ModelError):
        vol_nef(chow.proj_bundle_p1(), [1, 0])


def test_diagonal_abelian_power_is_all_ones():
    for n in (2, 3, 4):
        m = chow.diagonal_abelian(n)
        assert curve_power(m, [1] * n) == [1] * n


def test_blowup_preset():
    m = preset("quadratic-surface")
    h, e = [1, 0], [0, 1]
    assert top_product(m, [h, h]) == 1 and top_product(m, [e, e]) == -1
    assert m.nef.same_cone(chow.PolyhedralCone([[1, 0], [1, -1]]))


def test_json_round_trip(tmp_path):
    m = chow.proj_bundle_p1()
    path = tmp_path / "m.json"
    path.write_text(json.dumps(m.to_json()))
    m2 = chow.load_model(str(path))
    assert np.array_equal(m2.tensor_exact, m.tensor_exact)
    assert m2.pairing == m.pairing and m2.nef.same_cone(m.nef)


def test_inconsistent_models_are_rejected():
    t = np.full((2, 2), Fraction(0), dtype=object)
    t[0, 1] = 1  # not symmetric
    cones = {"nef": chow.PolyhedralCone([[1, 0], [0, 1]]), "eff_div": chow.PolyhedralCone([[1, 0], [0, 1]])}
    with pytest.raises(ModelError):
        chow.ChowModel(2, ["a", "b"], ["a", "b"], [[1, 0], [0, 1]], t, cones)
    with pytest.raises(ModelError):
        chow.ChowModel(2, ["a", "b"], ["a", "b"], [[1, 1], [1, 1]], np.eye(2, dtype=int), cones)


def test_unknown_preset():
    with pytest.raises(ModelError, match="unknown preset"):
        preset("k3-surface")


def test_lift_to_blowup_keeps_volume():
    # Y = blow-up of X = P^2 at a point, pullback H -> H, pushforward (aH + bE) -> a
    y, x = preset("quadratic-surface"), preset("p2")
    a_y = chow.lift_zariski(y, x, [[1], [0]], [[1, 0]], [1], [0, 1])
    assert np.allclose(a_y, [1, 1])
    with pytest.raises(ModelError):
        chow.lift_zariski(y, x, [[1], [1]], [[1, 0]], [1], [0, 0])
