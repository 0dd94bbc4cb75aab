"""Exact H-polytopes, volumes and mixed volumes.

Polytopes are ``{u : <u, n_i> + a_i >= 0}`` with integer normals ``n_i``
(for toric use, the rays of a fan) and rational offsets ``a_i``.  Vertices
come from a scan over facet subsets; volumes from the barycentric flag
triangulation, so every number is an exact :class:`~fractions.Fraction`.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Sequence

from . import linalg as la
from .cones import double_description

MAX_DIM = 4


class UnboundedPolytopeError(ValueError):
    pass


class HPolytope:
    """Polytope ``{u : <u, n_i> + a_i >= 0}``.

    Vertices are computed at construction; ``degenerate`` is set when the
    polytope is empty or not full-dimensional (its volume is then 0).
    """

    def __init__(self, normals: Sequence[Sequence], offsets: Sequence):
        self.normals = [la.frac_vector(n) for n in normals]
        self.offsets = la.frac_vector(offsets)
        if len(self.normals) != len(self.offsets):
            raise ValueError("one offset per normal required")
        self.dim = len(self.normals[0])
        if self.dim > MAX_DIM:
            raise ValueError(f"dimension {self.dim} exceeds the supported maximum {MAX_DIM}")
        rays, lines = double_description(self.normals, self.dim)
        if rays or lines:
            raise UnboundedPolytopeError("region is unbounded (normals do not positively span)")
        self._vertices, self._tight = _vertex_scan(tuple(map(tuple, self.normals)), tuple(self.offsets))

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, vertices={len(self._vertices)})"

    @property
    def vertices(self) -> list[list[Fraction]]:
        return [list(v) for v in self._vertices]

    @cached_property
    def affine_dim(self) -> int:
        if not self._vertices:
            return -1
        v0 = self._vertices[0]
        return la.rank([[a - b for a, b in zip(v, v0)] for v in self._vertices[1:]]) if len(self._vertices) > 1 else 0

    @property
    def degenerate(self) -> bool:
        return self.affine_dim < self.dim

    @cached_property
    def volume(self) -> Fraction:
        return _volume(tuple(map(tuple, self.normals)), tuple(self.offsets))

    def support_offsets(self) -> list[Fraction]:
        """Tight offsets ``-min_{u in P} <u, n_i>``; the same set, every inequality supporting."""
        if not self._vertices:
            raise ValueError("empty polytope has no support offsets")
        return [-min(la.dot(v, n) for v in self._vertices) for n in self.normals]

    def scaled(self, t) -> "HPolytope":
        t = la.to_fraction(t)
        return HPolytope(self.normals, [t * a for a in self.offsets])


@lru_cache(maxsize=256)
def _subset_inverses(normals):
    dim = len(normals[0])
    out = []
    for subset in itertools.combinations(range(len(normals)), dim):
        m = [list(normals[i]) for i in subset]
        if la.det(m) != 0:
            out.append((subset, la.inverse(m)))
    return out


def _vertex_scan(normals, offsets):
    found: dict[tuple, set] = {}
    for subset, inv in _subset_inverses(normals):
        rhs = [-offsets[i] for i in subset]
        u = [la.dot(row, rhs) for row in inv]
        vals = [la.dot(u, n) + a for n, a in zip(normals, offsets)]
        if any(x < 0 for x in vals):
            continue
        key = tuple(u)
        if key not in found:
            found[key] = {i for i, x in enumerate(vals) if x == 0}
    verts = sorted(found)
    return verts, [frozenset(found[v]) for v in verts]


@lru_cache(maxsize=200_000)
def _volume(normals, offsets) -> Fraction:
    verts, tight = _vertex_scan(normals, offsets)
    dim = len(normals[0])
    if len(verts) <= dim:
        return Fraction(0)
    if _affine_rank(verts, range(len(verts))) < dim:
        return Fraction(0)
    facets = [frozenset(j for j, t in enumerate(tight) if i in t) for i in range(len(normals))]
    bary_cache: dict[frozenset, list] = {}

    def bary(face):
        if face not in bary_cache:
            k = len(face)
            bary_cache[face] = [sum((verts[j][c] for j in face), Fraction(0)) / k for c in range(dim)]
        return bary_cache[face]

    sub_cache: dict[frozenset, list] = {}

    def subfaces(face, d):
        if face not in sub_cache:
            out = set()
            for f in facets:
                s = face & f
                if len(s) >= d and s != face and _affine_rank(verts, s) == d - 1:
                    out.add(s)
            sub_cache[face] = list(out)
        return sub_cache[face]

    top = frozenset(range(len(verts)))
    c = bary(top)
    total = Fraction(0)

    def walk(face, d, chain):
        nonlocal total
        if d == 0:
            rows = [[x - y for x, y in zip(b, c)] for b in chain]
            total += abs(la.det(rows))
            return
        for sub in subfaces(face, d):
            walk(sub, d - 1, chain + [bary(sub)])

    walk(top, dim, [])
    return total / factorial(dim)


def _affine_rank(verts, idx) -> int:
    idx = list(idx)
    if len(idx) <= 1:
        return 0
    v0 = verts[idx[0]]
    return la.rank([[a - b for a, b in zip(verts[j], v0)] for j in idx[1:]])


def polytope_from_divisor(fan, coeffs: Sequence) -> HPolytope:
    """Polytope ``{u : <u, v_i> + a_i >= 0}`` of the torus-invariant divisor ``sum a_i D_i``."""
    rays = fan.rays if hasattr(fan, "rays") else fan
    if len(coeffs) != len(rays):
        raise ValueError(f"expected {len(rays)} coefficients, got {len(coeffs)}")
    return HPolytope(rays, coeffs)


def vertices(p: HPolytope) -> list[list[Fraction]]:
    return p.vertices


def volume(p: HPolytope) -> Fraction:
    return p.volume


def minkowski_sum(p: HPolytope, q: HPolytope) -> HPolytope:
    """Minkowski sum of two polytopes sharing a normal set.

    Valid when both normal fans are coarsenings of the common normal set
    (e.g. nef toric divisors on one fan); this is certified by checking every
    vertex of the result is a sum of vertices.
    """
    _check_same_normals([p, q])
    out = HPolytope(p.normals, [a + b for a, b in zip(p.support_offsets(), q.support_offsets())])
    sums = {tuple(x + y for x, y in zip(u, v)) for u in p._vertices for v in q._vertices}
    if any(v not in sums for v in out._vertices):
        raise ValueError("Minkowski sum has facet normals outside the shared normal set")
    return out


def _check_same_normals(ps):
    n0 = ps[0].normals
    for p in ps[1:]:
        if p.dim != ps[0].dim:
            raise ValueError("dimension mismatch")
        if p.normals != n0:
            raise ValueError("polytopes must share the same normal vectors")


@lru_cache(maxsize=None)
def _interpolation_system(n: int):
    """Grid points in {1..n+1}^n unisolvent for degree-n forms, and the inverse Vandermonde."""
    monos = [m for m in itertools.product(range(n + 1), repeat=n) if sum(m) == n]
    points: list[tuple] = []
    rows: list[list[Fraction]] = []
    current_rank = 0
    for t in itertools.product(range(1, n + 2), repeat=n):
        row = [Fraction(_monomial(t, m)) for m in monos]
        r = la.rank(rows + [row])
        if r > current_rank:
            rows.append(row)
            points.append(t)
            current_rank = r
            if r == len(monos):
                break
    return monos, points, la.inverse(rows)


def _monomial(t, m):
    out = 1
    for ti, mi in zip(t, m):
        out *= ti**mi
    return out


def _certify_sum(ps, offs):
    total = HPolytope(ps[0].normals, [sum(col, Fraction(0)) for col in zip(*offs)])
    sums = {tuple([Fraction(0)] * ps[0].dim)}
    for p in ps:
        sums = {tuple(x + y for x, y in zip(s, v)) for s in sums for v in p._vertices}
    if any(v not in sums for v in total._vertices):
        raise ValueError("Minkowski sums leave the shared normal set; mixed volume undefined here")


def mixed_volume(ps: Sequence[HPolytope]) -> Fraction:
    """Mixed volume ``V(P_1, ..., P_n)`` by exact interpolation.

    ``vol(t_1 P_1 + ... + t_n P_n)`` is a form of degree n in t whose
    ``t_1...t_n`` coefficient is ``n! V``; it is recovered from volumes at
    grid points ``t in {1..n+1}^n``.
    """
    ps = list(ps)
    n = ps[0].dim
    if len(ps) != n:
        raise ValueError(f"need exactly {n} polytopes in dimension {n}")
    _check_same_normals(ps)
    offs = [p.support_offsets() for p in ps]
    _certify_sum(ps, offs)
    monos, points, vinv = _interpolation_system(n)
    normals = tuple(map(tuple, ps[0].normals))
    vols = []
    for t in points:
        o = tuple(sum((ti * a[i] for ti, a in zip(t, offs)), Fraction(0)) for i in range(len(normals)))
        vols.append(_volume(normals, o))
    target = monos.index(tuple([1] * n))
    coeff = la.dot(vinv[target], vols)
    return coeff / factorial(n)


def mixed_volume_inclusion_exclusion(ps: Sequence[HPolytope]) -> Fraction:
    """``n! V(P_1..P_n) = sum_S (-1)^(n-|S|) vol(sum_{i in S} P_i)``; independent check."""
    ps = list(ps)
    n = ps[0].dim
    _check_same_normals(ps)
    offs = [p.support_offsets() for p in ps]
    normals = tuple(map(tuple, ps[0].normals))
    total = Fraction(0)
    for r in range(1, n + 1):
        for subset in itertools.combinations(range(n), r):
            o = tuple(sum((offs[k][i] for k in subset), Fraction(0)) for i in range(len(normals)))
            total += (-1) ** (n - r) * _volume(normals, o)
    return total / factorial(n)
