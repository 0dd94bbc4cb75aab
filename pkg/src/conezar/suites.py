"""Named verification suites, one per acceptance criterion.

Each suite returns a :class:`SuiteResult`; the CLI's ``verify-paper``
command and the acceptance tests run the same functions.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from . import linalg as la
from .chow import curve_power, curve_product, preset, top_product
from .cones import PolyhedralCone, dual_cone
from .polar import (PolarOptions, appendix_kt_check, ci_distance, curve_volume, derivative,
                    derivative_check, involution_check, is_big, kt_check, morse_check,
                    optimality_probe, polar_eval, reverse_kt_check, sample_interior, volume_function,
                    zariski)
from .polytopes import mixed_volume, mixed_volume_inclusion_exclusion
from . import quadratic as qd
from . import toric


@dataclass
class SuiteResult:
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.summary}"


def _rng(seed):
    return np.random.default_rng(seed)


def proj_bundle_volhat(x: float, y: float) -> float:
    """Closed-form curve volume on P(O + O + O(-1)) in coordinates (xi.f, xi^2)."""
    if x >= 2 * y:
        return (1.5 * x - y) * y ** 0.5
    return x ** 1.5 / 2 ** 0.5


def proj_bundle_closed_form(samples: int = 200, seed: int = 11, rtol: float = 1e-5) -> SuiteResult:
    m = preset("proj-bundle-p1")
    rng = _rng(seed)
    worst = 0.0
    f = volume_function(m)
    for _ in range(samples):
        x, y = rng.uniform(0.01, 10.0, size=2)
        got = polar_eval(f, m.P, [x, y]).value
        ref = proj_bundle_volhat(x, y)
        worst = max(worst, abs(got - ref) / ref)
    return SuiteResult("proj-bundle-closed-form", worst <= rtol,
                       f"{samples} random big classes, max relative error {worst:.2e} (tol {rtol:g})",
                       {"max_rel_error": worst})


def proj_bundle_derivative(ts=(0.0, 0.25, 0.5, 0.9), tol: float = 1e-4) -> SuiteResult:
    m = preset("proj-bundle-p1")
    rows = []
    ok = True
    for t in ts:
        alpha = [3 - 2 * t, 1 - t]
        ref = -3 * (1 - t) ** 0.5 - 0.75 * (1 - t) ** -0.5
        d = derivative(m, alpha, [-2, -1])
        chk = derivative_check(m, alpha, [-2, -1])
        good = abs(d - ref) <= tol and chk.agree
        ok &= good
        rows.append({"t": t, "derivative": d, "reference": ref, "fd": chk.finite_differences, "ok": good})
    worst = max(abs(r["derivative"] - r["reference"]) for r in rows)
    return SuiteResult("proj-bundle-derivative", ok,
                       f"t in {list(ts)}: max |error| {worst:.2e} (tol {tol:g}); finite differences agree: "
                       f"{all(r['ok'] for r in rows)}", {"rows": rows})


# toric flip ---------------------------------------------------------------

FLIP_PAIRING_ROWS = {"C12": (-1, -1, 1), "C13": (0, 1, 0), "C23": (1, 0, 0)}
FLIP_NEF = [(1, 0, 1), (0, 1, 1), (0, 0, 1)]
FLIP_EFF_CURVE = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
FLIP_EFF_DIV = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def flip_negative_coefficient(alpha) -> float:
    """The t in gamma = t C12 solving 4(y - x + t)(z - x + t) = (x - t)^2."""
    x, y, z = (float(a) for a in alpha)
    p, q = y - x, z - x
    # 3t^2 + (4(p + q) + 2x) t + 4pq - x^2 = 0
    roots = np.roots([3.0, 4 * (p + q) + 2 * x, 4 * p * q - x * x])
    lo = max(0.0, x - min(y, z))
    good = [float(r.real) for r in roots if abs(r.imag) < 1e-12 and lo - 1e-12 <= r.real <= x + 1e-12]
    if len(good) != 1:
        raise ValueError(f"no unique admissible root for {alpha}: {roots}")
    return good[0]


def toric_flip_zariski(samples: int = 50, seed: int = 5, tol: float = 1e-6) -> SuiteResult:
    m = preset("toric-flip-3fold")
    exact_ok = True
    problems = []
    rows = {lab: tuple(m.pairing[b][j] for b in range(3)) for j, lab in enumerate(m.curve_labels)}
    if m.curve_labels != ["C12", "C13", "C23"] or m.div_labels != ["D1", "D2", "D3"]:
        exact_ok = False
        problems.append("bases")
    for lab, row in FLIP_PAIRING_ROWS.items():
        if rows.get(lab) != tuple(Fraction(x) for x in row):
            exact_ok = False
            problems.append(f"row {lab}")
    for key, gens in (("nef", FLIP_NEF), ("eff_curve", FLIP_EFF_CURVE), ("eff_div", FLIP_EFF_DIV)):
        if not m.cones[key].same_cone(PolyhedralCone(gens)):
            exact_ok = False
            problems.append(key)
    for a, b in ((1, 1), (2, 3), (Fraction(1, 2), 5)):
        B = [a, b, a + b]
        want = [2 * a * b, a * a + 2 * a * b, b * b + 2 * a * b]
        if curve_power(m, B) != [Fraction(x) for x in want]:
            exact_ok = False
            problems.append(f"B_{a},{b} squared")
    rng = _rng(seed)
    worst = 0.0
    for _ in range(samples):
        a, b = rng.uniform(0.2, 3.0, size=2)
        t0 = rng.uniform(0.05, 3.0)
        alpha = np.array([2 * a * b + t0, a * a + 2 * a * b, b * b + 2 * a * b])
        t = flip_negative_coefficient(alpha)
        z = zariski(m, alpha)
        err = float(np.max(np.abs(z.gamma - np.array([t, 0.0, 0.0]))))
        worst = max(worst, err / max(1.0, t))
    passed = exact_ok and worst <= tol
    return SuiteResult("toric-flip-zariski", passed,
                       f"exact tables/cones {'match' if exact_ok else 'MISMATCH ' + ','.join(problems)}; "
                       f"{samples} non-CI classes, max |gamma - t C12| {worst:.2e} (tol {tol:g})",
                       {"max_error": worst, "problems": problems})


# appendix fan ---------------------------------------------------------------

NONCONVEX_NEF = [(1, 3, 2, 2, 1), (3, 6, 4, 4, 2), (6, 12, 9, 8, 4), (2, 4, 3, 2, 1), (4, 8, 6, 5, 2)]
E1, E2, E3, E4, E5 = (1, 3, 6, 2, 4), (9, 22, 45, 15, 30), (12, 30, 60, 20, 40), (4, 10, 20, 6, 13), \
    (16, 40, 80, 26, 52)
# coefficient of x_i x_j (i <= j, 0-based) in (sum x_i A_i)^2
NONCONVEX_EXPANSION = {
    (0, 0): E1, (0, 1): tuple(6 * e for e in E1), (0, 2): tuple(12 * e for e in E1),
    (0, 3): tuple(4 * e for e in E1), (0, 4): tuple(8 * e for e in E1),
    (1, 1): E2,
    (1, 3): E3, (1, 4): tuple(2 * e for e in E3), (1, 2): tuple(3 * e for e in E3),
    (2, 2): tuple(3 * e for e in E3), (2, 3): tuple(2 * e for e in E3), (2, 4): tuple(4 * e for e in E3),
    (3, 3): E4,
    (3, 4): E5, (4, 4): E5,
}
NONCONVEX_WITNESS = tuple(a + b for a, b in zip(E2, E4))


def appendix_nonconvex(margin: float = 0.01, opts: PolarOptions | None = None) -> SuiteResult:
    m = preset("fs-nonconvex")
    problems = []
    if not m.nef.same_cone(PolyhedralCone(NONCONVEX_NEF)):
        problems.append("nef cone")
    A = [la.frac_vector(a) for a in NONCONVEX_NEF]
    for i, j in itertools.combinations_with_replacement(range(5), 2):
        coeff = curve_product(m, [A[i], A[j]])
        if i != j:
            coeff = [2 * c for c in coeff]
        want = NONCONVEX_EXPANSION.get((i, j), (0, 0, 0, 0, 0))
        if coeff != [Fraction(w) for w in want]:
            problems.append(f"x{i + 1}x{j + 1}")
    dist, best = ci_distance(m, NONCONVEX_WITNESS, opts)
    tables_ok = not problems
    passed = tables_ok and dist > margin
    return SuiteResult("appendix-nonconvex", passed,
                       f"nef generators and (sum x_i A_i)^2 expansion {'exact match' if tables_ok else 'MISMATCH'}; "
                       f"min normalized distance of witness to CI cone {dist:.6f} (required > {margin:g})",
                       {"distance": dist, "closest_nef": best.tolist(), "problems": problems,
                        "tables_ok": tables_ok, "distance_positive": dist > 1e-4})


# Zariski certificates -------------------------------------------------------

ALL_PRESETS = ("proj-bundle-p1", "toric-flip-3fold", "fs-nonconvex", "diagonal-abelian(3)",
               "quadratic-surface", "p2")


def certify_decomposition(m, z, cos_tol: float = 1e-6) -> list[str]:
    out = []
    v = z.value
    if abs(z.residuals["B_dot_gamma"]) > 1e-6 * v:
        out.append("B.gamma")
    if not m.eff_curve.contains(z.gamma, 1e-7).inside and z.residuals["gamma_eff_margin"] < -1e-7:
        out.append("gamma not pseudo-effective")
    if z.residuals["vol_gap"] > 1e-6 * max(1.0, v):
        out.append("vol^ != B^n")
    bn = np.linalg.norm(z.B)
    for r in z.polar.restarts:
        if getattr(r, "v", None) is None or not r.converged:
            continue
        if r.v @ z.B / (np.linalg.norm(r.v) * bn) < 1 - cos_tol:
            out.append("restarts disagree on the B ray")
            break
    if z.gamma_movable_witness is not None and not z.gamma_movable_witness < 0:
        out.append("nonzero gamma is movable")
    return out


def zariski_certificates(per_preset: int = 100, seed: int = 17) -> SuiteResult:
    failures = []
    count = 0
    nonzero_gamma = 0
    for k, name in enumerate(ALL_PRESETS):
        m = preset(name)
        rng = _rng(seed + k)
        for alpha in sample_interior(m.eff_curve, rng, per_preset):
            z = zariski(m, alpha)
            count += 1
            nonzero_gamma += z.gamma_movable_witness is not None
            bad = certify_decomposition(m, z)
            if bad:
                failures.append((name, alpha.tolist(), bad))
    return SuiteResult("zariski-certificates", not failures,
                       f"{count} decompositions on {len(ALL_PRESETS)} presets ({nonzero_gamma} with gamma != 0), "
                       f"{len(failures)} certificate failures",
                       {"failures": failures[:10], "decompositions": count, "nonzero_gamma": nonzero_gamma})


# inequalities ----------------------------------------------------------------

def _rational(v, den=1000):
    return [Fraction(int(round(x * den)), den) for x in v]


def inequality_suite(samples: int = 200, seed: int = 23, tol: float = 1e-7,
                     presets=ALL_PRESETS) -> SuiteResult:
    report = {}
    ok = True
    for k, name in enumerate(presets):
        m = preset(name)
        rng = _rng(seed + k)
        n = m.n
        e = (n - 1) / n
        fails = {"kt": 0, "kt_equality": 0, "reverse_kt": 0, "appendix_kt": 0,
                 "log_concavity": 0, "log_equality": 0, "morse": 0}
        nefs = sample_interior(m.nef, rng, 3 * samples)
        effs = sample_interior(m.eff_curve, rng, 2 * samples)
        movs = sample_interior(m.mov_curve, rng, samples)
        for i in range(samples):
            a, b, c = nefs[3 * i], nefs[3 * i + 1], nefs[3 * i + 2]
            # Khovanskii-Teissier; every 4th pair is proportional to exercise the equality case
            bb = b if i % 4 else rng.uniform(0.3, 3.0) * a
            rep, prop = kt_check(m, a, bb, tol)
            equal = rep.slack <= 1e-6 * rep.rhs
            if not rep.ok:
                fails["kt"] += 1
            if equal != prop and m.rho > 1:
                fails["kt_equality"] += 1
            if not reverse_kt_check(m, a, b, movs[i], tol).ok:
                fails["reverse_kt"] += 1
            for kk in range(1, n):
                if not appendix_kt_check(m, a, b, c, kk, tol).ok:
                    fails["appendix_kt"] += 1
            # log-concavity of vol^ with its equality case
            al, be = effs[2 * i], effs[2 * i + 1]
            za = zariski(m, al)
            if i % 4 == 0:
                be = rng.uniform(0.2, 2.0) * al + rng.uniform(0.2, 2.0) * za.positive_part
            zb, zab = zariski(m, be), zariski(m, al + be)
            lhs = zab.value ** e
            rhs = za.value ** e + zb.value ** e
            if lhs - rhs < -tol * max(1.0, lhs):
                fails["log_concavity"] += 1
            equal = lhs - rhs <= 1e-6 * lhs
            cos = za.positive_part @ zb.positive_part / (
                np.linalg.norm(za.positive_part) * np.linalg.norm(zb.positive_part))
            # equality forces proportional positive parts; exactly proportional ones force equality
            if (equal and cos <= 1 - 1e-6) or (cos > 1 - 1e-12 and not equal):
                fails["log_equality"] += 1
            # Morse bigness with exact rational classes
            alpha = _rational(al)
            zq = zariski(m, alpha)
            mov = sample_interior(m.mov_curve, rng, 1)[0]
            scale = zq.value / (n * float(zq.B @ m.P @ mov)) * rng.uniform(0.3, 1.6)
            beta = _rational(scale * mov, 10**6)
            if not m.mov_curve.contains(beta):
                continue
            rep = morse_check(m, alpha, beta)
            if not rep.certificate_ok:
                fails["morse"] += 1
        report[name] = fails
        ok &= not any(fails.values())
    bad = {k: {kk: vv for kk, vv in v.items() if vv} for k, v in report.items() if any(v.values())}
    return SuiteResult("inequalities", ok,
                       f"{samples} instances x {len(presets)} presets (KT+equality, reverse KT, mixed KT, "
                       f"log-concavity+equality, Morse bigness); failures: {bad or 'none'}", {"report": report})


# involution -----------------------------------------------------------------

def involution_suite(samples: int = 20, tol: float = 1e-4) -> SuiteResult:
    models = {"proj-bundle-p1": preset("proj-bundle-p1"), "quadratic-surface": preset("quadratic-surface"),
              "diagonal-abelian(2)": preset("diagonal-abelian(2)")}
    worst = {}
    ok = True
    for name, m in models.items():
        rep = involution_check(volume_function(m), m.P, samples, tol=tol)
        worst[name] = rep.max_rel_error
        ok &= rep.ok
    return SuiteResult("involution", ok,
                       f"H(Hf) = f on {samples} interior samples per rank-2 model; max relative error "
                       + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (tol {tol:g})", {"worst": worst})


# mixed volumes ---------------------------------------------------------------

def mixed_volume_suite() -> SuiteResult:
    mism = []
    checked = 0
    for name in toric.PRESET_FANS:
        m = preset(name)
        data = m.toric
        nb = toric.nef_basis(data)
        polys = toric.nef_polytopes(data, nb)
        n = m.n
        for idx in itertools.combinations_with_replacement(range(len(nb)), n):
            entry = top_product(m, [nb[i] for i in idx])
            mv_ie = factorial(n) * mixed_volume_inclusion_exclusion([polys[i] for i in idx])
            mv_int = factorial(n) * mixed_volume([polys[i] for i in idx])
            checked += 1
            if not (entry == mv_ie == mv_int):
                mism.append((name, idx, entry, mv_ie, mv_int))
    return SuiteResult("mixed-volume", not mism,
                       f"{checked} nef-basis index tuples on toric presets: tensor == n! V exactly "
                       f"(interpolation and inclusion-exclusion); {len(mism)} mismatches", {"mismatches": mism})


# quadratic / hyperkahler --------------------------------------------------------

def quadratic_suite(samples: int = 1000, hk_samples: int = 40, seed: int = 29,
                    tol: float = 1e-7) -> SuiteResult:
    rng = _rng(seed)
    fails = {"q_p_gamma": 0, "q_gamma_gamma": 0, "Hf_on_C": 0, "generic_agreement": 0}
    opts = PolarOptions(multistart=2)
    for _ in range(samples):
        k = int(rng.integers(1, 7))
        qm = qd.random_model(rng, k)
        w = qd.random_big_point(qm, rng)
        z = qd.zariski_q(qm, w)
        scale = max(1.0, float(np.abs(w) @ np.abs(qm.q) @ np.abs(w)))
        if abs(z.certificates["q_p_n"]) > tol * scale:
            fails["q_p_gamma"] += 1
        if np.max(np.abs(z.negative)) > 1e-9 * np.max(np.abs(w)) and not z.certificates["q_n_n"] < 0:
            fails["q_gamma_gamma"] += 1
        r = polar_eval(qd.quadratic_function(qm), qm.q, w, opts)
        if abs(r.value - z.value) > 1e-6 * max(1.0, z.value):
            fails["generic_agreement"] += 1
        v = sample_interior(qm.cone, rng, 1)[0]
        hv = polar_eval(qd.quadratic_function(qm), qm.q, v, opts).value
        if abs(hv - float(v @ qm.q @ v)) > 1e-6 * max(1.0, float(v @ qm.q @ v)):
            fails["Hf_on_C"] += 1
    hk = {2: {"duality": 0, "volume": 0}, 4: {"duality": 0, "volume": 0}}
    for n in (2, 4):
        for _ in range(hk_samples):
            k = int(rng.integers(1, 4))
            qm = qd.random_model(rng, k, n=n, extra=1, exact=True)
            m = qm.chow_model()
            qinv = la.inverse(la.frac_matrix(qm.q))
            psi_nef = PolyhedralCone([qd.psi(qm, g) for g in qm.cone.G], qm.rho)
            if not dual_cone(psi_nef, qinv).same_cone(m.eff_curve):
                hk[n]["duality"] += 1
            A = sample_interior(qm.cone, rng, 1)[0]
            got = curve_volume(m, qd.psi(qm, A))
            want = float(A @ qm.q @ A) ** (n / (2 * (n - 1)))
            if abs(got - want) > 1e-6 * max(1.0, want):
                hk[n]["volume"] += 1
    ok = not any(fails.values()) and not any(v for d in hk.values() for v in d.values())
    return SuiteResult("quadratic", ok,
                       f"{samples} random signature-(1,k) instances: {fails}; hyperkahler n=2,4 "
                       f"({hk_samples} each): {hk}", {"fails": fails, "hk": hk})


# optimality of n -----------------------------------------------------------------

def optimality_suite() -> SuiteResult:
    w = optimality_probe(3, Fraction(1, 2))
    none = optimality_probe(3, 0)
    ok = w is not None and none is None
    desc = f"lambda = {[la.fmt(x) for x in w['lambda']]}" if w else "no witness"
    return SuiteResult("morse-optimality", ok,
                       f"n=3, eps=1/2: {desc}; eps=0: {'no witness (as required)' if none is None else 'WITNESS FOUND'}",
                       {"witness": w, "eps0": none})


SUITES = {
    "proj-bundle-closed-form": proj_bundle_closed_form,
    "proj-bundle-derivative": proj_bundle_derivative,
    "toric-flip-zariski": toric_flip_zariski,
    "appendix-nonconvex": appendix_nonconvex,
    "zariski-certificates": zariski_certificates,
    "inequalities": inequality_suite,
    "involution": involution_suite,
    "mixed-volume": mixed_volume_suite,
    "quadratic": quadratic_suite,
    "morse-optimality": optimality_suite,
}


def run(names=None) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        t = time.perf_counter()
        res = SUITES[name]()
        res.seconds = time.perf_counter() - t
        out.append(res)
    return out
