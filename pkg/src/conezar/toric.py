"""Intersection theory of simplicial complete toric varieties from fan data.

The pipeline is: fan -> class group (N^1 as R^rays modulo characters) ->
wall curves (pairing rows from the wall relation) -> cones -> intersection
tensor, whose entries are n! times mixed volumes of nef polytopes.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import linalg as la
from .chow import ChowModel, ModelError
from .cones import PolyhedralCone, dual_cone
from .polytopes import HPolytope, mixed_volume


class FanError(ModelError):
    pass


@dataclass
class Fan:
    """A simplicial fan given by primitive rays and maximal cones (0-based indices).

    ``div_basis`` / ``curve_basis`` optionally fix the working bases: ray
    indices for divisors, wall labels such as ``"C12"`` for curves.
    """

    dim: int
    rays: list
    max_cones: list
    div_basis: list | None = None
    curve_basis: list | None = None

    def __post_init__(self):
        rays = []
        for r in self.rays:
            r = [int(x) for x in r]
            g = 0
            for x in r:
                g = gcd(g, abs(x))
            if g > 1:
                warnings.warn(f"ray {r} is not primitive; normalized", stacklevel=2)
                r = [x // g for x in r]
            rays.append(r)
        self.rays = rays
        self.max_cones = [tuple(sorted(int(i) for i in c)) for c in self.max_cones]

    @classmethod
    def from_json(cls, data: dict) -> "Fan":
        return cls(int(data["dim"]), data["rays"], data["max_cones"],
                   data.get("div_basis"), data.get("curve_basis"))

    def to_json(self) -> dict:
        out = {"dim": self.dim, "rays": self.rays, "max_cones": [list(c) for c in self.max_cones]}
        if self.div_basis is not None:
            out["div_basis"] = self.div_basis
        if self.curve_basis is not None:
            out["curve_basis"] = self.curve_basis
        return out

    def walls(self) -> dict[tuple, list[tuple]]:
        out: dict[tuple, list[tuple]] = {}
        for c in self.max_cones:
            for w in itertools.combinations(c, self.dim - 1):
                out.setdefault(w, []).append(c)
        return out

    def wall_label(self, wall: Sequence[int]) -> str:
        idx = [i + 1 for i in wall]
        if max(idx, default=0) >= 10:
            return "C" + "_".join(map(str, idx))
        return "C" + "".join(map(str, idx))


@dataclass
class FanReport:
    valid: bool
    problem: str | None = None
    witness: object = None

    def __bool__(self):
        return self.valid


def validate_fan(f: Fan) -> FanReport:
    """Check the fan invariants; report the first violation with a witness."""
    n = f.dim
    for i, r in enumerate(f.rays):
        if len(r) != n:
            return FanReport(False, "ray has wrong dimension", i)
        if all(x == 0 for x in r):
            return FanReport(False, "zero ray", i)
    seen = {}
    for i, r in enumerate(f.rays):
        if tuple(r) in seen:
            return FanReport(False, "duplicate rays", (seen[tuple(r)], i))
        seen[tuple(r)] = i
    for c in f.max_cones:
        if len(c) != n or len(set(c)) != n or any(not 0 <= i < len(f.rays) for i in c):
            return FanReport(False, "maximal cone is not a set of n ray indices", c)
        if la.det([f.rays[i] for i in c]) == 0:
            return FanReport(False, "maximal cone is not full-dimensional", c)
    for w, cofaces in f.walls().items():
        if len(cofaces) != 2:
            return FanReport(False, f"wall has {len(cofaces)} cofaces", w)
    for a, b in itertools.combinations(f.max_cones, 2):
        if _interiors_meet(f, a, b):
            return FanReport(False, "maximal cones overlap", (a, b))
    return FanReport(True)


def _interiors_meet(f: Fan, a, b) -> bool:
    # maximize s with lam_i, mu_j >= s, sum lam v - sum mu w = 0, sum lam + sum mu = 1
    va = np.array([f.rays[i] for i in a], float).T
    vb = np.array([f.rays[i] for i in b], float).T
    n = f.dim
    k = 2 * n + 1
    a_eq = np.zeros((n + 1, k))
    a_eq[:n, :n] = va
    a_eq[:n, n:2 * n] = -vb
    a_eq[n, :2 * n] = 1
    b_eq = np.zeros(n + 1)
    b_eq[n] = 1
    a_ub = np.zeros((2 * n, k))
    a_ub[:, :2 * n] = -np.eye(2 * n)
    a_ub[:, 2 * n] = 1
    cost = np.zeros(k)
    cost[-1] = -1
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(2 * n), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * (2 * n) + [(None, 1)], method="highs")
    return res.status == 0 and -res.fun > 1e-9


def _require_valid(f: Fan):
    rep = validate_fan(f)
    if not rep:
        raise FanError(f"invalid fan: {rep.problem} ({rep.witness})")


@dataclass
class ClassGroup:
    basis: list[int]
    coords: list[list[Fraction]]  # one row per ray: coordinates of D_ray in the basis

    @property
    def rank(self) -> int:
        return len(self.basis)


def class_groups(f: Fan, check: bool = True) -> ClassGroup:
    """N^1 = R^rays / image of M, with a basis of ray divisors."""
    if check:
        _require_valid(f)
    r = len(f.rays)
    n = f.dim
    rho = r - n
    if la.rank(f.rays) != n:
        raise FanError("rays do not span N_R")
    if f.div_basis is not None:
        candidates = [sorted(int(i) for i in f.div_basis)]
        basis_order = [int(i) for i in f.div_basis]
    else:
        candidates = (list(c) for c in itertools.combinations(range(r), rho))
        basis_order = None
    for basis in candidates:
        rest = [i for i in range(r) if i not in basis]
        if len(basis) != rho or la.det([f.rays[i] for i in rest]) == 0:
            continue
        order = basis_order or basis
        # relation columns: sum_i <e_j, v_i> D_i = 0  =>  D_rest = -(V_rest^T)^{-1} V_basis^T D_basis
        vrest_t = la.transpose([la.frac_vector(f.rays[i]) for i in rest])
        vbas_t = la.transpose([la.frac_vector(f.rays[i]) for i in order])
        m = la.matmul(la.inverse(vrest_t), vbas_t)
        coords = [[Fraction(0)] * rho for _ in range(r)]
        for k, i in enumerate(order):
            coords[i][k] = Fraction(1)
        for k, i in enumerate(rest):
            coords[i] = [-x for x in m[k]]
        return ClassGroup(list(order), coords)
    raise FanError("requested divisor basis is not a basis of N^1")


@dataclass
class WallCurve:
    wall: tuple
    adjacent: tuple
    pairing_row: list  # D_ray . C over all rays
    label: str = ""
    mult: Fraction = field(default=Fraction(1))


def _wall_multiplicity(vectors) -> Fraction:
    """Index of the lattice spanned by ``vectors`` in its saturation (gcd of maximal minors)."""
    k = len(vectors)
    n = len(vectors[0])
    g = 0
    for cols in itertools.combinations(range(n), k):
        g = gcd(g, abs(int(la.det([[v[c] for c in cols] for v in vectors]))))
    return Fraction(g)


def wall_curves(f: Fan, check: bool = True) -> list[WallCurve]:
    """Torus-invariant curves, one per wall, with their exact pairing rows."""
    if check:
        _require_valid(f)
    out = []
    for w, (s1, s2) in sorted(f.walls().items()):
        u0 = next(i for i in s1 if i not in w)
        u1 = next(i for i in s2 if i not in w)
        mt = _wall_multiplicity([f.rays[i] for i in w]) if w else Fraction(1)
        a = mt / abs(la.det([f.rays[i] for i in s1]))
        b = mt / abs(la.det([f.rays[i] for i in s2]))
        row = [Fraction(0)] * len(f.rays)
        row[u0], row[u1] = a, b
        if w:
            rhs = [-(a * x + b * y) for x, y in zip(f.rays[u0], f.rays[u1])]
            cols = la.transpose([la.frac_vector(f.rays[i]) for i in w])
            c = la.solve_least(cols, rhs)
            if c is None:
                raise FanError(f"wall relation not solvable for wall {w}")
            for i, val in zip(w, c):
                row[i] = val
        out.append(WallCurve(w, (u0, u1), row, f.wall_label(w), mt))
    return out


@dataclass
class ToricData:
    fan: Fan
    groups: ClassGroup
    walls: list[WallCurve]
    curve_walls: list[WallCurve]
    pairing: list[list[Fraction]]
    cones: dict

    def curve_coords(self, wall: WallCurve) -> list[Fraction]:
        phi = [wall.pairing_row[i] for i in self.groups.basis]
        return la.solve(self.pairing, phi)

    def divisor_coords(self, ray_coeffs: Sequence) -> list[Fraction]:
        """Class of ``sum a_i D_i`` in the divisor basis."""
        out = [Fraction(0)] * self.groups.rank
        for a, row in zip(ray_coeffs, self.groups.coords):
            a = la.to_fraction(a)
            out = [x + a * y for x, y in zip(out, row)]
        return out

    def ray_coeffs(self, d: Sequence) -> list[Fraction]:
        """A torus-invariant representative of the class ``d`` (supported on basis rays)."""
        out = [Fraction(0)] * len(self.fan.rays)
        for k, i in enumerate(self.groups.basis):
            out[i] = la.to_fraction(d[k])
        return out


def _choose_curve_basis(f: Fan, groups: ClassGroup, walls: list[WallCurve]) -> list[WallCurve]:
    by_label = {w.label: w for w in walls}
    if f.curve_basis is not None:
        chosen = []
        for lab in f.curve_basis:
            if lab not in by_label:
                raise FanError(f"unknown wall label {lab!r}")
            chosen.append(by_label[lab])
        return chosen
    phis = [[w.pairing_row[i] for i in groups.basis] for w in walls]
    rho = groups.rank
    cone = PolyhedralCone([p for p in phis if any(x != 0 for x in p)], rho)
    rays = cone.extremal_rays
    if len(rays) == rho and la.rank(rays) == rho:
        chosen = []
        for r in rays:
            match = [w for w, p in zip(walls, phis) if _proportional(p, r)]
            chosen.append(min(match, key=lambda w: w.wall))
        return sorted(chosen, key=lambda w: w.wall)
    chosen, rows = [], []
    for w, p in zip(walls, phis):
        if la.rank(rows + [p]) > len(rows):
            chosen.append(w)
            rows.append(p)
        if len(rows) == rho:
            return chosen
    raise FanError("wall curves do not span N_1")


def _proportional(p, r) -> bool:
    k = next(i for i, x in enumerate(r) if x != 0)
    if p[k] == 0 or (p[k] > 0) != (r[k] > 0):
        return False
    t = p[k] / r[k]
    return all(x == t * y for x, y in zip(p, r))


def cone_package(f: Fan, check: bool = True) -> ToricData:
    """Eff^1, Eff_1, Nef^1 and Mov_1 in the working bases."""
    if check:
        _require_valid(f)
    groups = class_groups(f, check=False)
    walls = wall_curves(f, check=False)
    basis_walls = _choose_curve_basis(f, groups, walls)
    pairing = [[cw.pairing_row[i] for cw in basis_walls] for i in groups.basis]
    if la.det(pairing) == 0:
        raise FanError("chosen curve basis is not dual to the divisor basis")
    data = ToricData(f, groups, walls, basis_walls, pairing, {})
    div_labels = [f"D{i + 1}" for i in groups.basis]
    eff_div = PolyhedralCone([c for c in groups.coords if any(x != 0 for x in c)], groups.rank)
    eff_curve_gens = {tuple(la.primitive(data.curve_coords(w))) for w in walls}
    eff_curve = PolyhedralCone(sorted(c for c in eff_curve_gens if any(x != 0 for x in c)), groups.rank)
    nef = dual_cone(eff_curve, la.transpose(pairing))
    if not nef.full_dim:
        raise FanError("fan not projective for this toolkit (nef cone not full-dimensional)")
    mov = dual_cone(eff_div, pairing)
    data.cones = {"nef": nef, "eff_div": eff_div, "eff_curve": eff_curve, "mov_curve": mov,
                  "div_labels": div_labels}
    return data


def nef_basis(data: ToricData) -> list[list[Fraction]]:
    """rho linearly independent nef generators (extremal rays, greedy order)."""
    chosen = []
    for g in data.cones["nef"].extremal_rays:
        if la.rank(chosen + [g]) > len(chosen):
            chosen.append(g)
    if len(chosen) < data.groups.rank:
        raise FanError("fewer than rho independent nef generators")
    return chosen


def nef_polytopes(data: ToricData, classes) -> list[HPolytope]:
    return [HPolytope(data.fan.rays, data.ray_coeffs(c)) for c in classes]


def intersection_tensor(data: ToricData) -> np.ndarray:
    """Exact symmetric n-form on N^1 from mixed volumes of nef polytopes."""
    n = data.fan.dim
    rho = data.groups.rank
    nb = nef_basis(data)
    polys = nef_polytopes(data, nb)
    t_nef = np.empty((rho,) * n, dtype=object)
    for idx in itertools.combinations_with_replacement(range(rho), n):
        val = factorial(n) * mixed_volume([polys[i] for i in idx])
        for p in set(itertools.permutations(idx)):
            t_nef[p] = val
    # columns of nmat are the nef generators; coordinates change by its inverse
    nmat = la.transpose(nb)
    ninv = np.array(la.inverse(nmat), dtype=object)
    t = t_nef
    for _ in range(n):
        t = np.tensordot(t, ninv, axes=(0, 0))
    return t


def validate_tensor(data: ToricData, t: np.ndarray):
    """Check ``D . C_wall = mult(wall) * D_wall_1 ... D_wall_{n-1} . D`` for every wall."""
    from .chow import contract

    rho = data.groups.rank
    for w in data.walls:
        ds = [data.groups.coords[i] for i in w.wall]
        phi = contract(t, ds)
        for k, i in enumerate(data.groups.basis):
            if w.mult * phi[k] != w.pairing_row[i]:
                raise FanError(f"tensor disagrees with wall curve {w.label}")
    return True


def fan_to_chow(f: Fan, provenance: str = "fan-derived") -> ChowModel:
    data = cone_package(f)
    t = intersection_tensor(data)
    validate_tensor(data, t)
    cones = {k: data.cones[k] for k in ("nef", "eff_div", "eff_curve", "mov_curve")}
    model = ChowModel(f.dim, data.cones["div_labels"], [w.label for w in data.curve_walls],
                      data.pairing, t, cones, provenance=provenance)
    model.toric = data
    return model


PRESET_FANS = {
    "toric-flip-3fold": {
        "dim": 3,
        "rays": [[1, 0, 0], [0, 1, 0], [1, 1, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]],
        "max_cones": [[0, 1, 2], [0, 1, 5], [0, 2, 4], [0, 4, 5],
                      [1, 2, 3], [1, 3, 5], [2, 3, 4], [3, 4, 5]],
        "div_basis": [0, 1, 2],
        "curve_basis": ["C12", "C13", "C23"],
    },
    "fs-nonconvex": {
        "dim": 3,
        "rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1],
                 [1, -1, -2], [1, 0, -1], [0, -1, -2], [0, 0, -1]],
        "max_cones": [[0, 1, 2], [0, 1, 5], [0, 2, 3], [0, 3, 4], [0, 4, 5], [1, 2, 3],
                      [1, 3, 7], [1, 4, 5], [1, 4, 7], [3, 4, 6], [3, 6, 7], [4, 6, 7]],
        "div_basis": [0, 4, 5, 6, 7],
        "curve_basis": ["C14", "C16", "C25", "C47", "C48"],
    },
}


def preset_fan(name: str) -> Fan:
    return Fan.from_json(PRESET_FANS[name])


def projective_space_fan(n: int) -> Fan:
    rays = [[int(i == j) for j in range(n)] for i in range(n)] + [[-1] * n]
    cones = list(itertools.combinations(range(n + 1), n))
    return Fan(n, rays, cones)
