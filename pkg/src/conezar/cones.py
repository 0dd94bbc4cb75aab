"""Polyhedral cones with exact rational duality.

A cone is stored by generators; its inequality description (facet normals
plus equations) is computed once, exactly, by the double description
method, and used for exact membership tests.  Float queries are answered by
an LP through :func:`scipy.optimize.linprog`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import linalg as la

FLOAT_TOL = 1e-9


def double_description(ineqs: Sequence[Sequence[Fraction]], dim: int):
    """Generators of ``{x : a.x >= 0 for a in ineqs}``.

    Returns ``(rays, lines)``: primitive integer rays (extreme, pointed part)
    and a basis of the lineality space.
    """
    lines = la.identity(dim)
    rays: list[list[Fraction]] = []
    tight: list[frozenset] = []
    for k, a in enumerate(ineqs):
        a = [Fraction(x) for x in a]
        if all(x == 0 for x in a):
            continue
        lvals = [la.dot(a, l) for l in lines]
        j = next((i for i, val in enumerate(lvals) if val != 0), None)
        if j is not None:
            l0 = lines.pop(j)
            a0 = lvals.pop(j)
            if a0 < 0:
                l0 = [-x for x in l0]
                a0 = -a0
            lines = [[x - (val / a0) * y for x, y in zip(l, l0)] for l, val in zip(lines, lvals)]
            new_rays = []
            for r in rays:
                val = la.dot(a, r)
                new_rays.append([x - (val / a0) * y for x, y in zip(r, l0)])
            rays = new_rays
            tight = [t | {k} for t in tight]
            rays.append(l0)
            tight.append(frozenset(range(k)))
            continue
        vals = [la.dot(a, r) for r in rays]
        pos = [i for i, val in enumerate(vals) if val > 0]
        neg = [i for i, val in enumerate(vals) if val < 0]
        zer = [i for i, val in enumerate(vals) if val == 0]
        new_rays = [rays[i] for i in pos] + [rays[i] for i in zer]
        new_tight = [tight[i] for i in pos] + [tight[i] | {k} for i in zer]
        min_common = dim - len(lines) - 2
        for p in pos:
            for q in neg:
                common = tight[p] & tight[q]
                if len(common) < min_common:
                    continue
                if any(common <= tight[r] for r in range(len(rays)) if r not in (p, q)):
                    continue
                ray = [vals[p] * y - vals[q] * x for x, y in zip(rays[p], rays[q])]
                new_rays.append(la.primitive(ray))
                new_tight.append(common | {k})
        rays, tight = new_rays, new_tight
    rays = _dedupe([la.primitive(r) for r in rays if any(x != 0 for x in r)])
    lines = [la.primitive(l) for l in lines]
    return rays, lines


def _dedupe(vectors):
    seen = set()
    out = []
    for v in vectors:
        key = tuple(v)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


@dataclass
class Membership:
    inside: bool
    margin: float

    def __bool__(self):
        return self.inside


class PolyhedralCone:
    """A finitely generated cone in a fixed coordinate basis.

    Args:
        generators: nonzero vectors (ints, Fractions, "p/q" strings or floats;
            floats are rationalized with denominator bound 10**6).
        ambient_dim: needed only when ``generators`` is empty.
        facet_normals: optional inequality description; it is checked
            against the one computed from the generators.
    """

    def __init__(self, generators, ambient_dim: int | None = None, facet_normals=None,
                 labels: Sequence[str] | None = None):
        gens = [la.frac_vector(g) for g in generators]
        if ambient_dim is None:
            if not gens:
                raise ValueError("ambient_dim required for a cone with no generators")
            ambient_dim = len(gens[0])
        for g in gens:
            if len(g) != ambient_dim:
                raise ValueError(f"generator {g} has wrong dimension (expected {ambient_dim})")
            if all(x == 0 for x in g):
                raise ValueError("zero generator")
        self.ambient_dim = ambient_dim
        self.generators = gens
        self.labels = list(labels) if labels is not None else None
        if facet_normals is not None:
            given = [la.frac_vector(h) for h in facet_normals]
            for g in gens:
                for h in given:
                    if la.dot(g, h) < 0:
                        raise ValueError("generator violates a supplied facet normal")
            mine = PolyhedralCone(self.facet_normals + self.equations + [[-x for x in e] for e in self.equations],
                                  ambient_dim)
            other = PolyhedralCone(given, ambient_dim) if given else PolyhedralCone([], ambient_dim)
            if not mine.same_cone(other):
                raise ValueError("facet_normals do not describe the cone of the generators")

    def __repr__(self):
        gens = ", ".join("(" + ",".join(la.fmt(x) for x in g) + ")" for g in self.generators)
        return f"PolyhedralCone<{gens}>"

    @cached_property
    def _hrep(self):
        return double_description(self.generators, self.ambient_dim)

    @property
    def facet_normals(self) -> list[list[Fraction]]:
        """Inward normals h with h.v >= 0 on the cone (standard dot product)."""
        return self._hrep[0]

    @property
    def equations(self) -> list[list[Fraction]]:
        """Basis of linear forms vanishing on the cone (nonempty iff not full-dimensional)."""
        return self._hrep[1]

    @cached_property
    def G(self) -> np.ndarray:
        """Generators as a float array (one per row)."""
        if not self.generators:
            return np.zeros((0, self.ambient_dim))
        return la.as_float(self.generators)

    @cached_property
    def _facets_unit(self) -> np.ndarray:
        if not self.facet_normals:
            return np.zeros((0, self.ambient_dim))
        h = la.as_float(self.facet_normals)
        return h / np.linalg.norm(h, axis=1)[:, None]

    @cached_property
    def _equations_unit(self) -> np.ndarray:
        if not self.equations:
            return np.zeros((0, self.ambient_dim))
        e = la.as_float(self.equations)
        return e / np.linalg.norm(e, axis=1)[:, None]

    @cached_property
    def full_dim(self) -> bool:
        return la.rank(self.generators) == self.ambient_dim

    @cached_property
    def pointed(self) -> bool:
        return not any(self.contains([-x for x in g]) for g in self.generators)

    @cached_property
    def extremal_rays(self) -> list[list[Fraction]]:
        """Primitive extremal rays (for a pointed cone, the minimal generators)."""
        ineqs = self.facet_normals + self.equations + [[-x for x in e] for e in self.equations]
        rays, lines = double_description(ineqs, self.ambient_dim)
        return rays + lines + [[-x for x in l] for l in lines]

    def margin(self, v) -> float:
        """Signed distance estimate of ``v`` (scaled to unit max-norm) to the boundary."""
        x = np.asarray([float(t) for t in v])
        scale = np.max(np.abs(x))
        if scale == 0:
            return 0.0
        x = x / scale
        m = np.inf
        if len(self._facets_unit):
            m = float(np.min(self._facets_unit @ x))
        if len(self._equations_unit):
            m = min(m, -float(np.max(np.abs(self._equations_unit @ x))))
        return m if np.isfinite(m) else 0.0

    def contains(self, v, tol: float | None = None) -> Membership:
        """Membership of ``v``.

        Exact (via the facet description) when ``v`` is rational and no
        tolerance is requested; otherwise an LP feasibility test with slack
        ``tol`` after normalizing ``v`` to unit max-norm.
        """
        if len(v) != self.ambient_dim:
            raise ValueError("dimension mismatch")
        if tol is None and la.is_exact(v):
            vf = la.frac_vector(v)
            ok = all(la.dot(h, vf) >= 0 for h in self.facet_normals) and \
                all(la.dot(e, vf) == 0 for e in self.equations)
            return Membership(ok, self.margin(vf))
        tol = FLOAT_TOL if tol is None else tol
        x = np.asarray([float(t) for t in v])
        scale = np.max(np.abs(x))
        if scale == 0:
            return Membership(True, 0.0)
        x = x / scale
        return Membership(self._lp_residual(x) <= tol, self.margin(x))

    def _lp_residual(self, x: np.ndarray) -> float:
        k = len(self.generators)
        d = self.ambient_dim
        if k == 0:
            return float(np.sum(np.abs(x)))
        gt = self.G.T / np.max(np.abs(self.G), axis=1)
        a_eq = np.hstack([gt, np.eye(d), -np.eye(d)])
        cost = np.concatenate([np.zeros(k), np.ones(2 * d)])
        res = linprog(cost, A_eq=a_eq, b_eq=x, bounds=(0, None), method="highs")
        if res.status != 0:
            return np.inf
        return float(res.fun)

    def interior_contains(self, v, tol: float | None = None) -> bool:
        """Strict interior membership: every facet normal pairs above ``tol``.

        Exact with ``tol = 0`` for rational ``v``; for floats the default
        tolerance is 1e-9 on unit-normalized data.
        """
        if not self.full_dim:
            raise ValueError("cone is not full-dimensional; its interior is empty")
        if len(v) != self.ambient_dim:
            raise ValueError("dimension mismatch")
        if tol is None and la.is_exact(v):
            vf = la.frac_vector(v)
            return all(la.dot(h, vf) > 0 for h in self.facet_normals)
        tol = FLOAT_TOL if tol is None else tol
        return self.margin(v) > tol

    def same_cone(self, other: "PolyhedralCone") -> bool:
        """Set equality by mutual containment of generators (exact)."""
        if other.ambient_dim != self.ambient_dim:
            return False
        return all(other.contains(g) for g in self.generators) and \
            all(self.contains(g) for g in other.generators)

    def to_json(self) -> list[list[str]]:
        return [[la.fmt(x) for x in g] for g in self.generators]


def dual_cone(c: PolyhedralCone, pairing=None, labels=None) -> PolyhedralCone:
    """The dual ``{w : <v, w> >= 0 for all v in c}`` with ``<v, w> = v^T P w``.

    ``pairing`` defaults to the identity.  The result lives in the column
    space of ``P`` and is returned by its extremal generators.
    """
    d = c.ambient_dim
    if pairing is None:
        pm = la.identity(d)
    else:
        pm = la.frac_matrix(pairing)
    if len(pm) != d:
        raise ValueError(f"pairing has {len(pm)} rows, cone lives in dimension {d}")
    out_dim = len(pm[0])
    if out_dim != d or la.det(pm) == 0:
        raise ValueError("degenerate pairing")
    if not (c.pointed or c.full_dim):
        raise ValueError("dual_cone needs a pointed or full-dimensional cone")
    ineqs = [la.vecmat(g, pm) for g in c.generators]
    rays, lines = double_description(ineqs, out_dim)
    gens = rays + lines + [[-x for x in l] for l in lines]
    return PolyhedralCone(gens, out_dim, labels=labels)
