"""Models governed by a bilinear form of signature (1, rho - 1).

Surfaces use ``f(v) = q(v, v)`` directly; hyperkahler models of dimension
n = 2m use ``D^n = q(D, D)^m``.  The polar transform and the Zariski
decomposition have closed forms here: the positive part of w is the
q-orthogonal projection of w onto the span of a face of C, found by
enumerating independent generator subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from . import linalg as la
from .chow import ChowModel, ModelError
from .cones import PolyhedralCone, dual_cone


class QuadraticError(ModelError):
    pass


def signature(q) -> tuple[int, int, int]:
    ev = np.linalg.eigvalsh(np.asarray(q, dtype=float))
    scale = max(1.0, float(np.max(np.abs(ev))))
    pos = int(np.sum(ev > 1e-12 * scale))
    neg = int(np.sum(ev < -1e-12 * scale))
    return pos, neg, len(ev) - pos - neg


class QuadraticModel:
    """Form ``q`` on R^rho with a cone C on which ``q(v, v) >= 0``.

    ``mode`` is ``"surface"`` (n = 2) or ``"hyperkahler"`` (even n).
    ``eff_div`` optionally overrides the divisor effective cone, which
    otherwise defaults to the q-dual of C.
    """

    def __init__(self, q, cone, n: int = 2, mode: str = "surface", eff_div=None):
        exact = la.is_exact(q)
        self.q_exact = la.frac_matrix(q) if exact else None
        self.q = np.array([[float(x) for x in row] for row in self.q_exact]) if exact else np.asarray(q, float)
        rho = len(self.q)
        if self.q.shape != (rho, rho) or not np.allclose(self.q, self.q.T):
            raise QuadraticError("q must be a symmetric square matrix")
        if signature(self.q) != (1, rho - 1, 0):
            raise QuadraticError(f"q has signature {signature(self.q)[:2]}, expected (1, {rho - 1})")
        if mode not in ("surface", "hyperkahler"):
            raise QuadraticError("mode must be 'surface' or 'hyperkahler'")
        if mode == "surface" and n != 2:
            raise QuadraticError("surface mode needs n = 2")
        if n % 2:
            raise QuadraticError("n must be even")
        self.n, self.mode, self.rho = int(n), mode, rho
        self.cone = cone if isinstance(cone, PolyhedralCone) else PolyhedralCone(cone, rho)
        if not self.cone.full_dim:
            raise QuadraticError("cone must be full-dimensional")
        for g in self.cone.G:
            if g @ self.q @ g < -1e-12 * max(1.0, float(g @ g)):
                raise QuadraticError("q is negative on a cone generator")
        self._eff_div = eff_div

    @classmethod
    def from_json(cls, data: dict) -> "QuadraticModel":
        return cls(data["q"], data["cone"], int(data.get("n", 2)), data.get("mode", "surface"),
                   data.get("eff_div"))

    def to_json(self) -> dict:
        q = [[la.fmt(x) for x in row] for row in self.q_exact] if self.q_exact else self.q.tolist()
        return {"n": self.n, "q": q, "cone": self.cone.to_json(), "mode": self.mode}

    def qf(self, a, b) -> float:
        return float(np.asarray(a, float) @ self.q @ np.asarray(b, float))

    def _qfrac(self):
        return self.q_exact if self.q_exact is not None else la.frac_matrix(self.q)

    @property
    def dual(self) -> PolyhedralCone:
        """C* identified with a cone in the same space through q."""
        if not hasattr(self, "_dual"):
            self._dual = dual_cone(self.cone, self._qfrac())
        return self._dual

    def chow_model(self) -> ChowModel:
        """Numerical model: surface (pairing q) or hyperkahler (pairing 1, tensor sym q^m)."""
        q = self._qfrac()
        if self.mode == "surface":
            eff = self.dual if self._eff_div is None else PolyhedralCone(self._eff_div, self.rho)
            cones = {"nef": self.cone, "eff_div": eff, "eff_curve": self.dual}
            labels = [f"e{i + 1}" for i in range(self.rho)]
            return ChowModel(2, labels, labels, q, np.array(q, dtype=object), cones, provenance="quadratic")
        t = hk_tensor(q, self.n)
        eff_div = self.dual if self._eff_div is None else PolyhedralCone(self._eff_div, self.rho)
        cones = {"nef": self.cone, "eff_div": eff_div,
                 "eff_curve": dual_cone(self.cone, la.identity(self.rho))}
        return ChowModel(self.n, [f"d{i + 1}" for i in range(self.rho)], [f"c{i + 1}" for i in range(self.rho)],
                         la.identity(self.rho), t, cones, provenance="quadratic")


def hk_tensor(q, n: int) -> np.ndarray:
    """Symmetrization of ``q^{(x) n/2}``, so that ``D^n = q(D, D)^{n/2}``."""
    q = la.frac_matrix(q)
    rho = len(q)
    m = n // 2
    t = np.full((rho,) * n, Fraction(0), dtype=object)
    # average over perfect matchings of the n slots
    matchings = list(_matchings(list(range(n))))
    w = Fraction(1, len(matchings))
    for idx in itertools.combinations_with_replacement(range(rho), n):
        val = Fraction(0)
        for mt in matchings:
            term = Fraction(1)
            for a, b in mt:
                term *= q[idx[a]][idx[b]]
            val += term
        val *= w
        for p in set(itertools.permutations(idx)):
            t[p] = val
    assert len(matchings) == factorial(n) // (factorial(m) * 2**m)
    return t


def _matchings(slots):
    if not slots:
        yield []
        return
    a = slots[0]
    for i in range(1, len(slots)):
        rest = slots[1:i] + slots[i + 1:]
        for mt in _matchings(rest):
            yield [(a, slots[i])] + mt


@dataclass
class QuadraticZariski:
    w: np.ndarray
    p: np.ndarray
    negative: np.ndarray
    value: float
    face: tuple
    certificates: dict


def zariski_q(qm: QuadraticModel, w, tol: float = 1e-9) -> QuadraticZariski:
    """``w = p + N`` with p in C, N in C*, ``q(p, N) = 0`` (w big in C*).

    For each independent set J of generators of C, p_J is the q-orthogonal
    projection of w to span(J); a p_J with nonnegative coefficients, w - p_J
    in C* and ``q(p_J, p_J) > 0`` is the unique answer, because
    ``q(w, v) >= q(p, v) >= q(p, p)^{1/2} q(v, v)^{1/2}`` on C.
    """
    wf = np.asarray([float(la.to_fraction(x)) if isinstance(x, str) else float(x) for x in w])
    q = qm.q
    G = qm.cone.G / np.max(np.abs(qm.cone.G), axis=1)[:, None]
    scale = max(1.0, float(np.max(np.abs(wf))))
    qg = G @ q @ wf
    if np.min(qg) <= tol * scale * max(1.0, float(np.max(np.abs(q)))):
        raise QuadraticError("w is not big (not interior to the dual cone)")
    k = len(G)
    best = None
    for size in range(min(k, qm.rho), 0, -1):
        for J in itertools.combinations(range(k), size):
            gj = G[list(J)]
            gram = gj @ q @ gj.T
            # Hadamard ratio: skip (nearly) degenerate spans
            if abs(np.linalg.det(gram)) <= 1e-10 * np.prod(np.linalg.norm(gram, axis=1)):
                continue
            a = np.linalg.solve(gram, gj @ q @ wf)
            if np.min(a) < -tol:
                continue
            p = a @ gj
            nvec = wf - p
            if np.min(G @ q @ nvec) < -tol * scale:
                continue
            qpp = float(p @ q @ p)
            if qpp <= 0:
                continue
            if best is None or qpp > best[0] + tol:
                best = (qpp, p, nvec, J)
        if best is not None:
            break
    if best is None:
        raise QuadraticError("no face of C yields a positive part (w not big?)")
    qpp, p, nvec, J = best
    qnn = float(nvec @ q @ nvec)
    cert = {
        "q_p_n": float(p @ q @ nvec),
        "q_n_n": qnn,
        "n_dual_margin": float(np.min(G @ q @ nvec)) / scale,
        "negative_definite_ok": bool(np.max(np.abs(nvec)) <= 1e-9 * scale or qnn < 0),
    }
    return QuadraticZariski(wf, p, nvec, qpp, J, cert)


def polar_closed_form(qm: QuadraticModel, w, cross_check: bool = False, opts=None):
    """``Hf(w)`` for ``f = q(v, v)`` on C, with w in the q-identified dual cone.

    Returns ``(value, minimizer)``; w in C gives ``q(w, w)`` at w itself.
    With ``cross_check`` the generic optimizer must agree within 1e-6.
    """
    wf = np.asarray(w, float)
    G = qm.cone.G / np.max(np.abs(qm.cone.G), axis=1)[:, None]
    if np.min(G @ qm.q @ wf) < -1e-12 * max(1.0, float(np.max(np.abs(wf)))):
        raise QuadraticError("w is outside the dual cone")
    if _in_cone(qm, wf):
        value, p = float(wf @ qm.q @ wf), wf
    else:
        try:
            z = zariski_q(qm, wf)
            value, p = z.value, z.p
        except QuadraticError:
            value, p = 0.0, None
    if cross_check:
        from .polar import polar_eval

        r = polar_eval(quadratic_function(qm), qm.q, wf, opts)
        if abs(r.value - value) > 1e-6 * max(1.0, value):
            raise QuadraticError(f"closed form {value} disagrees with optimizer {r.value}")
    return value, p


def _in_cone(qm: QuadraticModel, w) -> bool:
    if la.is_exact(list(w)):
        return bool(qm.cone.contains(w))
    return bool(qm.cone.contains(w, 1e-12))


def quadratic_function(qm: QuadraticModel):
    from .polar import ConcaveFn

    q = qm.q
    return ConcaveFn(2.0, qm.cone, lambda v: float(v @ q @ v), lambda v: 2 * q @ v, lambda v: 2 * q,
                     sublinear_boundary=False, form=q)


def psi(qm: QuadraticModel, d) -> np.ndarray:
    """``D -> q(D, .)`` as a curve class (hyperkahler models use the dual coordinate basis)."""
    return qm.q @ np.asarray(d, float)


def psi_inverse(qm: QuadraticModel, alpha) -> np.ndarray:
    return np.linalg.solve(qm.q, np.asarray(alpha, float))


def hk_curve_volume(qm: QuadraticModel, alpha) -> float:
    """Closed-form ``vol^(alpha) = q(p, p)^{n / (2(n-1))}`` with p the positive part of psi^{-1}(alpha)."""
    n = qm.n
    w = psi_inverse(qm, alpha)
    if _in_cone(qm, w):
        qpp = float(w @ qm.q @ w)
    else:
        qpp = zariski_q(qm, w).value
    return qpp ** (n / (2 * (n - 1)))


def random_model(rng, k: int, n: int = 2, extra: int = 2, exact: bool = False) -> QuadraticModel:
    """Random signature-(1, k) form with a cone of k + 1 + extra generators inside the positive cone.

    With ``exact`` the form and generators are rational, so cone duality is exact.
    """
    rho = k + 1
    mode = "surface" if n == 2 and not exact else "hyperkahler"
    if exact:
        while True:
            m = [[int(i == j) + int(rng.integers(-1, 2)) for j in range(rho)] for i in range(rho)]
            if la.det(m) != 0:
                break
        minv = la.inverse(m)
        d = [[Fraction(0)] * rho for _ in range(rho)]
        d[0][0] = Fraction(1)
        for i in range(1, rho):
            d[i][i] = Fraction(-1)
        q = la.matmul(la.transpose(minv), la.matmul(d, minv))
        gens = []
        for _ in range(rho + extra):
            u = [Fraction(int(x), 10) for x in rng.integers(-9, 10, size=k)]
            while sum(x * x for x in u) >= 1:
                u = [x / 2 for x in u]
            gens.append(la.matvec(m, [Fraction(1)] + u))
        return QuadraticModel(q, gens, n, mode)
    while True:
        m = np.eye(rho) + 0.3 * rng.normal(size=(rho, rho))
        if abs(np.linalg.det(m)) > 0.2:
            break
    d = np.diag([1.0] + [-1.0] * k)
    minv = np.linalg.inv(m)
    q = minv.T @ d @ minv  # q(M x, M y) = x^T d y
    gens = []
    for _ in range(rho + extra):
        u = rng.normal(size=k)
        u *= rng.uniform(0.2, 0.95) / np.linalg.norm(u)
        gens.append(m @ np.concatenate([[1.0], u]))
    gens = [np.round(g, 6) for g in gens]
    q = np.round((q + q.T) / 2, 9)
    return QuadraticModel(q, gens, n, mode)


def random_big_point(qm: QuadraticModel, rng) -> np.ndarray:
    """A point of the interior of C*, often outside C."""
    G = qm.cone.G
    while True:
        w = rng.normal(size=qm.rho)
        if np.min(G @ qm.q @ w) > 1e-3 * np.linalg.norm(w) * max(1.0, np.max(np.abs(G))):
            return w
