from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conezar import quadratic as qd
from conezar.chow import contract
from conezar.polar import PolarOptions, curve_volume

BLOWUP = qd.QuadraticModel([[1, 0], [0, -1]], [[1, 0], [1, -1]])


def test_signature():
    assert qd.signature([[1, 0], [0, -1]]) == (1, 1, 0)
    assert qd.signature(np.diag([1.0, -2.0, 0.0])) == (1, 1, 1)


def test_rejects_bad_forms():
    with pytest.raises(qd.QuadraticError, match="signature"):
        qd.QuadraticModel([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    with pytest.raises(qd.QuadraticError, match="negative"):
        qd.QuadraticModel([[1, 0], [0, -1]], [[1, 0], [0, 1]])
    with pytest.raises(qd.QuadraticError):
        qd.QuadraticModel([[1, 0], [0, -1]], [[1, 0], [1, -1]], n=3, mode="hyperkahler")


def test_blowup_decomposition_by_hand():
    # H + E = H + E, with E^2 = -1 and H.E = 0
    z = qd.zariski_q(BLOWUP, [1, 1])
    assert np.allclose(z.p, [1, 0]) and np.allclose(z.negative, [0, 1])
    assert z.value == pytest.approx(1.0)
    assert z.certificates["q_n_n"] < 0 and abs(z.certificates["q_p_n"]) < 1e-12


def test_value_inside_cone_is_q():
    assert qd.polar_closed_form(BLOWUP, [2, -1])[0] == pytest.approx(3.0)


def test_not_big_raises():
    with pytest.raises(qd.QuadraticError):
        qd.zariski_q(BLOWUP, [0, 1])


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_closed_form_matches_generic_optimizer(seed, k):
    rng = np.random.default_rng(seed)
    qm = qd.random_model(rng, k)
    w = qd.random_big_point(qm, rng)
    val, p = qd.polar_closed_form(qm, w, cross_check=True, opts=PolarOptions(multistart=2))
    if p is not None:
        assert qm.qf(p, w - p) == pytest.approx(0.0, abs=1e-7 * max(1.0, float(w @ w)))


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_hk_tensor_is_q_squared(d):
    q = [[Fraction(2), Fraction(1), 0], [Fraction(1), Fraction(-1), 0], [0, 0, Fraction(-2)]]
    t = qd.hk_tensor(q, 4)
    dv = [Fraction(x) for x in d]
    qdd = sum(dv[i] * q[i][j] * dv[j] for i in range(3) for j in range(3))
    assert contract(t, [dv] * 4)[()] == qdd**2


def test_hk_volume_two_routes():
    rng = np.random.default_rng(4)
    qm = qd.random_model(rng, 2, n=4, extra=1, exact=True)
    m = qm.chow_model()
    a = np.asarray(qm.cone.G.sum(axis=0), float)
    alpha = qd.psi(qm, a)
    want = qm.qf(a, a) ** (4 / 6)
    assert qd.hk_curve_volume(qm, alpha) == pytest.approx(want, rel=1e-10)
    assert curve_volume(m, alpha) == pytest.approx(want, rel=1e-6)
