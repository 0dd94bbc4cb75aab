"""Numerical models of varieties: divisor/curve bases, pairing, intersection tensor, cones.

A :class:`ChowModel` is the only thing the polar engine needs.  Models come
from fans (:mod:`conezar.toric`), from quadratic forms
(:mod:`conezar.quadratic`), from JSON files, or from :func:`preset`.
"""

from __future__ import annotations

import itertools
import json
import re
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Sequence

import numpy as np

from . import linalg as la
from .cones import PolyhedralCone, dual_cone

CONE_KEYS = ("nef", "eff_div", "eff_curve", "mov_curve")


class ModelError(ValueError):
    pass


def contract(t: np.ndarray, vecs: Sequence) -> np.ndarray:
    """Contract the leading modes of ``t`` with ``vecs`` (works for float and Fraction arrays)."""
    out = t
    for v in vecs:
        r = out.shape[0]
        out = (np.asarray(v, dtype=out.dtype) @ out.reshape(r, -1)).reshape(out.shape[1:])
    return out


def symmetrize(t: np.ndarray) -> np.ndarray:
    n = t.ndim
    perms = list(itertools.permutations(range(n)))
    acc = sum((np.transpose(t, p) for p in perms[1:]), np.transpose(t, perms[0]))
    return acc / len(perms) if t.dtype != object else acc * Fraction(1, len(perms))


class ChowModel:
    """Numerical intersection data of an n-dimensional variety.

    ``pairing[i][j]`` is ``D_i . C_j``; ``tensor`` is the symmetric n-form on
    N^1 with ``tensor[i1..in] = D_i1 ... D_in``.  Divisor and curve classes
    are coordinate vectors in ``div_labels`` / ``curve_labels``.
    """

    def __init__(self, n: int, div_labels, curve_labels, pairing, tensor, cones: dict,
                 provenance: str = "user-file", check: bool = True):
        self.n = int(n)
        self.div_labels = list(div_labels)
        self.curve_labels = list(curve_labels)
        self.rho = len(self.div_labels)
        if len(self.curve_labels) != self.rho:
            raise ModelError("N^1 and N_1 must have the same dimension")
        self.pairing = la.frac_matrix(pairing)
        if la.det(self.pairing) == 0:
            raise ModelError("pairing is not invertible")
        t = np.empty((self.rho,) * self.n, dtype=object)
        src = np.asarray(tensor, dtype=object)
        if src.shape != t.shape:
            raise ModelError(f"tensor shape {src.shape}, expected {t.shape}")
        for idx in itertools.product(range(self.rho), repeat=self.n):
            t[idx] = la.to_fraction(src[idx])
        self.tensor_exact = t
        self.cones = dict(cones)
        if "mov_curve" not in self.cones and "eff_div" in self.cones:
            self.cones["mov_curve"] = dual_cone(self.cones["eff_div"], self.pairing)
        if "eff_curve" not in self.cones and "nef" in self.cones:
            self.cones["eff_curve"] = dual_cone(self.cones["nef"], self.pairing)
        self.provenance = provenance
        if check:
            self.check()

    def __repr__(self):
        return f"ChowModel(n={self.n}, rho={self.rho}, provenance={self.provenance!r})"

    @cached_property
    def tensor(self) -> np.ndarray:
        return self.tensor_exact.astype(float)

    @cached_property
    def P(self) -> np.ndarray:
        return la.as_float(self.pairing)

    @cached_property
    def P_inv(self) -> np.ndarray:
        return np.linalg.inv(self.P)

    @cached_property
    def pairing_inverse(self):
        return la.inverse(self.pairing)

    @property
    def nef(self) -> PolyhedralCone:
        return self.cones["nef"]

    @property
    def eff_curve(self) -> PolyhedralCone:
        return self.cones["eff_curve"]

    @property
    def eff_div(self) -> PolyhedralCone:
        return self.cones["eff_div"]

    @property
    def mov_curve(self) -> PolyhedralCone:
        return self.cones["mov_curve"]

    def check(self):
        """Validate the model invariants (symmetry, positivity, cone duality)."""
        t = self.tensor_exact
        for p in itertools.permutations(range(self.n)):
            if not np.array_equal(np.transpose(t, p), t):
                raise ModelError("intersection tensor is not symmetric")
        probe = [sum(col, Fraction(0)) for col in zip(*self.nef.generators)]
        if not self.nef.full_dim:
            raise ModelError("nef cone is not full-dimensional (fan not projective for this toolkit)")
        if vol_nef(self, probe, check=False) <= 0:
            raise ModelError("volume of an interior nef probe is not positive")
        for g in self.nef.generators:
            for c in self.eff_curve.generators:
                if pair(self, g, c) < 0:
                    raise ModelError("a nef generator is negative on an effective curve")
        for d in range(self.rho):
            e = [Fraction(int(i == d)) for i in range(self.rho)]
            if pair(self, e, curve_power(self, probe)) != contract(t, [probe] * (self.n - 1) + [e])[()]:
                raise ModelError("pairing and tensor are inconsistent")

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        entries = []
        for idx in itertools.combinations_with_replacement(range(self.rho), self.n):
            val = self.tensor_exact[idx]
            if val != 0:
                entries.append({"index": list(idx), "value": la.fmt(val)})
        return {
            "n": self.n,
            "div_basis": self.div_labels,
            "curve_basis": self.curve_labels,
            "pairing": [[la.fmt(x) for x in row] for row in self.pairing],
            "tensor": entries,
            "cones": {
                "nef": self.nef.to_json(),
                "eff_div": self.eff_div.to_json(),
                "eff_curve": self.eff_curve.to_json(),
            },
        }

    @classmethod
    def from_json(cls, data: dict, provenance: str = "user-file") -> "ChowModel":
        n = int(data["n"])
        rho = len(data["div_basis"])
        t = np.full((rho,) * n, Fraction(0), dtype=object)
        for e in data["tensor"]:
            val = la.to_fraction(e["value"])
            for p in set(itertools.permutations(e["index"])):
                t[p] = val
        cones = {}
        for key in ("nef", "eff_div", "eff_curve"):
            if key in data["cones"]:
                cones[key] = PolyhedralCone(data["cones"][key], rho)
        if "eff_div" not in cones:
            raise ModelError("model file must list eff_div generators")
        return cls(n, data["div_basis"], data["curve_basis"], data["pairing"], t, cones, provenance)


def _vec(m: ChowModel, v):
    if len(v) != m.rho:
        raise ModelError(f"class has {len(v)} coordinates, model has rank {m.rho}")
    return v


def pair(m: ChowModel, d, c):
    """Intersection number ``D . C`` (exact for rational inputs)."""
    _vec(m, d), _vec(m, c)
    if la.is_exact(d) and la.is_exact(c):
        return la.dot(la.vecmat(la.frac_vector(d), m.pairing), la.frac_vector(c))
    return float(np.asarray(d, float) @ m.P @ np.asarray(c, float))


def top_product(m: ChowModel, classes: Sequence):
    """``D_1 ... D_n`` for n divisor classes."""
    if len(classes) != m.n:
        raise ModelError(f"need {m.n} classes")
    if all(la.is_exact(c) for c in classes):
        return contract(m.tensor_exact, [la.frac_vector(c) for c in classes])[()]
    return float(contract(m.tensor, [np.asarray(c, float) for c in classes]))


def vol_nef(m: ChowModel, b, tol: float = 1e-9, check: bool = True):
    """``B^n`` for a nef class B; raises if B is outside the nef cone."""
    _vec(m, b)
    if check:
        mem = m.nef.contains(b) if la.is_exact(b) else m.nef.contains(b, tol)
        if not mem:
            raise ModelError(f"class is not nef (margin {mem.margin:.3g})")
    return top_product(m, [b] * m.n)


def curve_functional(m: ChowModel, classes: Sequence):
    """The linear form ``D -> C_1 ... C_{n-1} . D`` on N^1."""
    if all(la.is_exact(c) for c in classes):
        return list(contract(m.tensor_exact, [la.frac_vector(c) for c in classes]))
    return contract(m.tensor, [np.asarray(c, float) for c in classes])


def curve_product(m: ChowModel, classes: Sequence):
    """Curve class of the product of n-1 divisor classes."""
    phi = curve_functional(m, classes)
    if isinstance(phi, list):
        return la.matvec(m.pairing_inverse, phi)
    return m.P_inv @ phi


def curve_power(m: ChowModel, b):
    """The curve class ``B^{n-1}``."""
    _vec(m, b)
    return curve_product(m, [b] * (m.n - 1))


# presets -----------------------------------------------------------------

def proj_bundle_p1() -> ChowModel:
    """P(O + O + O(-1)) over P^1.

    Divisor basis (xi, f), curve basis (xi.f, xi^2); relations
    f^2 = 0, xi^2 f = 1, xi^3 = -1.
    """
    # divisor index 0 = xi, 1 = f
    t = np.full((2, 2, 2), Fraction(0), dtype=object)
    for idx in itertools.product(range(2), repeat=3):
        nf = sum(idx)
        t[idx] = {0: Fraction(-1), 1: Fraction(1)}.get(nf, Fraction(0))
    pairing = [[1, -1], [0, 1]]
    cones = {
        "nef": PolyhedralCone([[0, 1], [1, 1]], labels=["f", "xi+f"]),
        "eff_div": PolyhedralCone([[0, 1], [1, 0]], labels=["f", "xi"]),
        "eff_curve": PolyhedralCone([[1, 0], [0, 1]], labels=["xi.f", "xi^2"]),
    }
    return ChowModel(3, ["xi", "f"], ["xi.f", "xi^2"], pairing, t, cones, provenance="preset")


def diagonal_abelian(n: int) -> ChowModel:
    """Diagonal slice of E^n for an elliptic curve E.

    N^1 = R^n with ``vol(l) = n! prod(l_j)``; the pairing is (n-1)! times the
    identity so that ``curve_power(1,...,1)`` has all coordinates 1.
    """
    if n < 2:
        raise ModelError("need n >= 2")
    t = np.full((n,) * n, Fraction(0), dtype=object)
    for p in itertools.permutations(range(n)):
        t[p] = Fraction(1)
    pairing = [[factorial(n - 1) if i == j else 0 for j in range(n)] for i in range(n)]
    orth = [[int(i == j) for j in range(n)] for i in range(n)]
    cones = {"nef": PolyhedralCone(orth), "eff_div": PolyhedralCone(orth), "eff_curve": PolyhedralCone(orth)}
    return ChowModel(n, [f"l{j + 1}" for j in range(n)], [f"c{j + 1}" for j in range(n)],
                     pairing, t, cones, provenance="preset")


BLOWUP_Q = [[1, 0], [0, -1]]
BLOWUP_EFF = [[0, 1], [1, -1]]


def surface_model(q, eff_curves, labels=None, provenance="preset") -> ChowModel:
    """Surface with intersection form ``q`` and effective cone ``eff_curves``.

    Divisors and curves share a basis; the nef cone is the q-dual of the
    effective cone.
    """
    q = la.frac_matrix(q)
    rho = len(q)
    labels = labels or [f"e{i + 1}" for i in range(rho)]
    eff = PolyhedralCone(eff_curves, rho)
    nef = dual_cone(eff, la.transpose(q))
    t = np.array(q, dtype=object)
    cones = {"nef": nef, "eff_div": eff, "eff_curve": PolyhedralCone(eff.generators, rho)}
    return ChowModel(2, labels, labels, q, t, cones, provenance=provenance)


def quadratic_surface(q=None, eff=None) -> ChowModel:
    """Surface preset; defaults to the blow-up of P^2 at a point (basis H, E)."""
    if q is None:
        return surface_model(BLOWUP_Q, BLOWUP_EFF, ["H", "E"])
    return surface_model(q, eff if eff is not None else _require_eff())


def _require_eff():
    raise ModelError("quadratic-surface with a custom q needs its effective cone")


def projective_plane() -> ChowModel:
    return surface_model([[1]], [[1]], ["H"])


PRESETS = ("proj-bundle-p1", "toric-flip-3fold", "fs-nonconvex", "diagonal-abelian(n)",
           "quadratic-surface", "p2")


def preset(name: str, **params) -> ChowModel:
    """Build a named model.

    Names: ``proj-bundle-p1``, ``toric-flip-3fold``, ``fs-nonconvex``,
    ``diagonal-abelian(n)`` (or ``diagonal-abelian`` with ``n=``),
    ``quadratic-surface`` (optional ``q=``, ``eff=``), ``p2``.
    """
    from . import toric

    key = name.strip().lower()
    m = re.fullmatch(r"diagonal-abelian(?:\((\d+)\))?", key)
    if m:
        n = int(m.group(1)) if m.group(1) else int(params.get("n", 3))
        return diagonal_abelian(n)
    if key == "proj-bundle-p1":
        return proj_bundle_p1()
    if key in toric.PRESET_FANS:
        return _toric_preset(key)
    if key == "quadratic-surface":
        return quadratic_surface(params.get("q"), params.get("eff"))
    if key == "p2":
        return projective_plane()
    raise ModelError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")


@lru_cache(maxsize=None)
def _toric_preset(key: str) -> ChowModel:
    # exact mixed volumes take seconds; models are never mutated, so share them
    from . import toric
    return toric.fan_to_chow(toric.preset_fan(key), provenance="preset")


def load_model(path: str) -> ChowModel:
    """Read a chow, fan or quadratic JSON file into a model."""
    with open(path) as fh:
        data = json.load(fh)
    if "rays" in data:
        from . import toric
        return toric.fan_to_chow(toric.Fan.from_json(data), provenance="fan-derived")
    if "q" in data:
        from . import quadratic
        return quadratic.QuadraticModel.from_json(data).chow_model()
    return ChowModel.from_json(data)


# birational lifting ------------------------------------------------------

def lift_zariski(m_y: ChowModel, m_x: ChowModel, pullback, pushforward, alpha, gamma_y,
                 tol: float = 1e-6, opts=None):
    """Lift a class on X to a class on Y with the same curve volume.

    ``pullback`` maps N^1(X) -> N^1(Y) (a rho_Y x rho_X matrix acting on
    coordinate columns), ``pushforward`` maps N_1(Y) -> N_1(X).  ``gamma_y``
    must be pseudo-effective and push forward to the negative part of alpha.
    Returns ``alpha_Y = (pullback B)^{n-1} + gamma_y``.
    """
    from .polar import zariski, curve_volume

    pull = np.asarray(la.as_float(pullback), dtype=float).reshape(m_y.rho, m_x.rho)
    push = np.asarray(la.as_float(pushforward), dtype=float).reshape(m_x.rho, m_y.rho)
    for i in range(m_x.rho):
        for j in range(m_y.rho):
            d = np.eye(m_x.rho)[i]
            c = np.eye(m_y.rho)[j]
            lhs = d @ m_x.P @ (push @ c)
            rhs = (pull @ d) @ m_y.P @ c
            if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs)):
                raise ModelError(f"projection formula fails on basis pair ({i}, {j})")
    gy = np.asarray([float(x) for x in gamma_y])
    if not m_y.eff_curve.contains(gy, 1e-9):
        raise ModelError("gamma_Y is not pseudo-effective")
    zx = zariski(m_x, alpha, opts)
    scale = max(1.0, float(np.max(np.abs(zx.alpha))))
    if np.max(np.abs(push @ gy - zx.gamma)) > tol * scale:
        raise ModelError("gamma_Y does not push forward to the negative part of alpha")
    b_y = pull @ zx.B
    alpha_y = np.asarray(curve_power(m_y, b_y), float) + gy
    if np.max(np.abs(push @ alpha_y - zx.alpha)) > tol * scale:
        raise ModelError("pushforward of the lift differs from alpha")
    vy = curve_volume(m_y, alpha_y, opts)
    if abs(vy - zx.value) > tol * max(1.0, zx.value):
        raise ModelError(f"volume changed under lifting: {vy} vs {zx.value}")
    return alpha_y
