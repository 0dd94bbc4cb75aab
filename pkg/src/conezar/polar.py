"""Polar transforms of homogeneous s-concave functions and curve Zariski decompositions.

For f of weight s on a cone C,

    Hf(w) = inf_{v in C interior} (w.v / f(v)^(1/s))^(s/(s-1)),

and the curve volume is the polar transform of the divisor volume on the
nef cone.  The infimum is computed on the slice ``v = G^T x`` with x in the
probability simplex (G = cone generators), where ``log(w.v) - log(f(v))/s``
is quasi-convex: projected gradient with Armijo backtracking, a Newton
polish on the active face, and seeded multistart.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import numpy as np

from . import linalg as la
from .chow import ChowModel, ModelError, contract, curve_power, pair
from .cones import PolyhedralCone, dual_cone


class PolarConvergenceError(RuntimeError):
    """No restart converged; carries the best ratio seen and the restart trace."""

    def __init__(self, msg, best=None, trace=None):
        super().__init__(msg)
        self.best = best
        self.trace = trace or []


class NotBigError(ModelError):
    pass


@dataclass
class PolarOptions:
    multistart: int = 8
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 10_000
    kkt_tol: float = 1e-11
    stall_tol: float = 1e-10


def _opts(opts) -> PolarOptions:
    return opts if opts is not None else PolarOptions()


# concave functions -------------------------------------------------------

@dataclass
class ConcaveFn:
    """A weight-s homogeneous, s-concave function on a cone.

    ``form`` may hold a symmetric tensor of order s (integer s) with
    ``f(v) = form(v, ..., v)``; the optimizer then works with the form
    pulled back to the generator slice.
    """

    s: float
    domain: PolyhedralCone
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    hess: Callable[[np.ndarray], np.ndarray] | None = None
    sublinear_boundary: bool = False
    form: np.ndarray | None = None
    check: bool = True

    def __post_init__(self):
        if not self.s > 1:
            raise ValueError("weight s must exceed 1")
        if not self.domain.full_dim:
            raise ValueError("domain cone must be full-dimensional")
        if self.check:
            self.spot_check()

    def spot_check(self, trials: int = 8, tol: float = 1e-9):
        rng = np.random.default_rng(12345)
        pts = sample_interior(self.domain, rng, 2 * trials)
        for v, x in zip(pts[:trials], pts[trials:]):
            fv, fx = self.eval(v), self.eval(x)
            if not (fv > 0 and fx > 0):
                raise ValueError("function is not positive at an interior probe point")
            t = float(rng.uniform(0.3, 3.0))
            if abs(self.eval(t * v) - t**self.s * fv) > tol * max(1.0, abs(t**self.s * fv)):
                raise ValueError("function is not homogeneous of the declared weight")
            lhs = fv ** (1 / self.s) + fx ** (1 / self.s)
            rhs = self.eval(v + x) ** (1 / self.s)
            if lhs > rhs + tol * max(1.0, rhs):
                raise ValueError("function is not s-concave on the sampled pair")


def volume_function(m: ChowModel) -> ConcaveFn:
    """``D -> D^n`` on the nef cone, with closed-form derivatives."""
    fn = getattr(m, "_volume_fn", None)
    if fn is not None:
        return fn
    t = m.tensor
    n = m.n

    def ev(v):
        return float(contract(t, [v] * n))

    def gr(v):
        return n * contract(t, [v] * (n - 1))

    def he(v):
        return n * (n - 1) * contract(t, [v] * (n - 2))

    fn = ConcaveFn(float(n), m.nef, ev, gr, he, sublinear_boundary=True, form=t)
    m._volume_fn = fn
    return fn


def sample_interior(cone: PolyhedralCone, rng, count: int) -> list[np.ndarray]:
    """Random interior points: positive combinations of all generators."""
    g = cone.G / np.max(np.abs(cone.G), axis=1)[:, None]
    w = rng.exponential(size=(count, len(g))) + 1e-3
    return [row @ g for row in w]


# slice optimizer ----------------------------------------------------------

def simplex_projection(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1}."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(y) + 1)
    cond = u - css / idx > 0
    r = idx[cond][-1]
    theta = css[cond][-1] / r
    return np.maximum(y - theta, 0.0)


class _Slice:
    """``psi(x) = log(c.x) - log F(x) / s`` with ``F(x) = f(G^T x)``."""

    def __init__(self, f: ConcaveFn, G: np.ndarray, c: np.ndarray):
        self.f, self.G, self.c, self.s = f, G, c, f.s
        self.TG = None
        if f.form is not None:
            tg = f.form
            for _ in range(tg.ndim):
                tg = np.tensordot(tg, G.T, axes=(0, 0))
            self.TG = tg
        self.order = int(round(f.s)) if f.form is not None else None

    def F(self, x):
        if self.TG is not None:
            return float(contract(self.TG, [x] * self.order))
        return float(self.f.eval(self.G.T @ x))

    def dF(self, x):
        if self.TG is not None:
            return self.order * contract(self.TG, [x] * (self.order - 1))
        v = self.G.T @ x
        if self.f.grad is not None:
            return self.G @ self.f.grad(v)
        return _fd_grad(lambda y: self.F(y), x)

    def d2F(self, x):
        if self.TG is not None:
            k = self.order
            return k * (k - 1) * contract(self.TG, [x] * (k - 2))
        if self.f.hess is not None:
            return self.G @ self.f.hess(self.G.T @ x) @ self.G.T
        return _fd_jac(self.dF, x)

    def psi(self, x):
        cx = self.c @ x
        fx = self.F(x)
        if cx <= 0 or fx <= 0:
            return np.inf
        return np.log(cx) - np.log(fx) / self.s

    def grad(self, x):
        return self.c / (self.c @ x) - self.dF(x) / (self.s * self.F(x))

    def hess(self, x):
        cx = self.c @ x
        fx = self.F(x)
        d = self.dF(x)
        return -np.outer(self.c, self.c) / cx**2 - (self.d2F(x) / fx - np.outer(d, d) / fx**2) / self.s


def _fd_grad(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def _fd_jac(fun, x, h=1e-5):
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    j = np.array(cols).T
    return (j + j.T) / 2


def _kkt_residual(x, g):
    free = x > 0
    r = 0.0
    if free.any():
        r = float(np.max(np.abs(g[free])))
    if (~free).any():
        r = max(r, float(np.max(np.maximum(-g[~free], 0.0))))
    return r


def _face_basis(m: int) -> np.ndarray:
    # orthonormal basis of {d : sum d = 0} in R^m
    q, _ = np.linalg.qr(np.eye(m) - 1.0 / m)
    return q[:, : m - 1]


def _newton_polish(prob: _Slice, x, fx, steps: int = 30):
    idx = np.flatnonzero(x > 0)
    if len(idx) <= 1:
        return x, fx
    z = _face_basis(len(idx))
    for _ in range(steps):
        g = prob.grad(x)
        gz = z.T @ g[idx]
        if np.linalg.norm(gz) < 1e-15:
            break
        hz = z.T @ prob.hess(x)[np.ix_(idx, idx)] @ z
        dz = -np.linalg.lstsq(hz, gz, rcond=None)[0]
        d = np.zeros_like(x)
        d[idx] = z @ dz
        if g @ d >= 0:
            break
        neg = d < 0
        limit = np.min(-x[neg] / d[neg]) if neg.any() else np.inf
        t = min(1.0, 0.5 * limit) if limit <= 1.0 else 1.0
        accepted = False
        for _ in range(30):
            xn = x + t * d
            fn = prob.psi(xn)
            if fn <= fx + 1e-4 * t * (g @ d) or (abs(fn - fx) <= 1e-15 * max(1.0, abs(fx))
                                                and _kkt_residual(xn, prob.grad(xn)) < _kkt_residual(x, g)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        x, fx = xn / np.sum(xn), fn
    return x, fx


@dataclass
class RestartRecord:
    value: float
    x: np.ndarray
    iterations: int
    converged: bool
    kkt: float


def _descend(prob: _Slice, x0: np.ndarray, opts: PolarOptions) -> RestartRecord:
    x = x0
    fx = prob.psi(x)
    if not np.isfinite(fx):
        return RestartRecord(np.inf, x, 0, False, np.inf)
    step = 1.0
    hist = [fx]
    stable = 0
    prev_active = None
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        g = prob.grad(x)
        if _kkt_residual(x, g) < opts.kkt_tol:
            converged = True
            break
        t = step
        while True:
            xn = simplex_projection(x - t * g)
            d = xn - x
            fn = prob.psi(xn)
            if fn <= fx + 1e-4 * (g @ d):
                break
            t *= 0.5
            if t < 1e-20:
                xn, fn = x, fx
                break
        step = min(2.0 * t, 1e8)
        x, fx = xn, fn
        active = tuple(x <= 0)
        stable = stable + 1 if active == prev_active else 0
        prev_active = active
        if stable >= 2:
            x, fx = _newton_polish(prob, x, fx)
            stable = 0
        hist.append(fx)
        if len(hist) > 5 and abs(hist[-6] - fx) <= opts.stall_tol * max(1.0, abs(fx)):
            x, fx = _newton_polish(prob, x, fx)
            converged = True
            break
    kkt = _kkt_residual(x, prob.grad(x))
    return RestartRecord(float(np.exp(fx * prob.s / (prob.s - 1))), x, it, converged or kkt < opts.kkt_tol, kkt)


@dataclass
class PolarResult:
    value: float
    minimizer: np.ndarray | None
    slice_point: np.ndarray | None
    restarts: list = field(default_factory=list)
    spread: float = 0.0
    seed: int = 0
    on_boundary: bool = False

    def restart_minimizers(self) -> list[np.ndarray]:
        return [r.v for r in self.restarts if getattr(r, "v", None) is not None]


def _as_float(w) -> np.ndarray:
    return np.asarray([float(la.to_fraction(x)) if isinstance(x, str) else float(x) for x in w], dtype=float)


def polar_eval(f: ConcaveFn, pairing, w, opts: PolarOptions | None = None) -> PolarResult:
    """``Hf(w)`` and a minimizer ``v*`` rescaled so that ``f(v*) = Hf(w)``.

    ``pairing`` is the matrix with ``w.v = v^T P w``.  Returns value 0 for w
    outside the dual cone, and for w on its boundary when f vanishes to
    sublinear order there.
    """
    opts = _opts(opts)
    P = np.asarray(pairing, dtype=float)
    wf = _as_float(w)
    G = f.domain.G / np.max(np.abs(f.domain.G), axis=1)[:, None]
    c = G @ P @ wf
    scale = max(float(np.max(np.abs(c))), 1e-300)
    if np.all(wf == 0):
        return PolarResult(0.0, None, None, seed=opts.seed, on_boundary=True)
    if np.min(c) < -1e-12 * scale:
        return PolarResult(0.0, None, None, seed=opts.seed)
    if np.min(c) <= 1e-12 * scale and f.sublinear_boundary:
        return PolarResult(0.0, None, None, seed=opts.seed, on_boundary=True)
    prob = _Slice(f, G, c)
    k = len(G)
    rng = np.random.default_rng(opts.seed)
    starts = [np.full(k, 1.0 / k)] + [rng.dirichlet(np.ones(k)) for _ in range(max(0, opts.multistart - 1))]
    records = []
    for x0 in starts:
        rec = _descend(prob, x0, opts)
        if np.isfinite(rec.value):
            fx = prob.F(rec.x)
            rec.v = (rec.value / fx) ** (1 / f.s) * (G.T @ rec.x) if rec.value > 0 else None
        else:
            rec.v = None
        records.append(rec)
    ok = [r for r in records if r.converged and np.isfinite(r.value)]
    if not ok:
        finite = [r.value for r in records if np.isfinite(r.value)]
        raise PolarConvergenceError("no restart converged", min(finite) if finite else None, records)
    best = min(ok, key=lambda r: r.value)
    vals = [r.value for r in ok]
    spread = (max(vals) - min(vals)) / max(min(vals), 1e-300)
    return PolarResult(best.value, best.v, best.x, records, spread, opts.seed)


def curve_volume(m: ChowModel, alpha, opts: PolarOptions | None = None) -> float:
    """``vol^(alpha)``: 0 unless alpha is pseudo-effective."""
    return polar_eval(volume_function(m), m.P, alpha, opts).value


# Zariski decomposition ---------------------------------------------------

@dataclass
class ZariskiResult:
    alpha: np.ndarray
    B: np.ndarray
    positive_part: np.ndarray
    gamma: np.ndarray
    value: float
    residuals: dict
    restarts: int
    seed: int
    polar: PolarResult | None = None
    gamma_movable_witness: float | None = None

    def to_json(self) -> dict:
        fl = lambda a: [float(x) for x in a]  # noqa: E731
        return {
            "alpha": fl(self.alpha),
            "B": fl(self.B),
            "positive_part": fl(self.positive_part),
            "gamma": fl(self.gamma),
            "volhat": float(self.value),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "restarts": int(self.restarts),
            "seed": int(self.seed),
        }


def is_big(m: ChowModel, alpha, tol: float = 1e-9) -> bool:
    """Interior membership in Eff_1: exact for rational input."""
    if la.is_exact(list(alpha)) or all(isinstance(x, str) for x in alpha):
        return m.eff_curve.interior_contains(la.frac_vector(alpha))
    return m.eff_curve.interior_contains(_as_float(alpha), tol)


def zariski(m: ChowModel, alpha, opts: PolarOptions | None = None) -> ZariskiResult:
    """``alpha = B^{n-1} + gamma`` with B nef, gamma pseudo-effective, ``B.gamma = 0``."""
    opts = _opts(opts)
    if not is_big(m, alpha):
        raise NotBigError("decomposition defined only for big classes")
    a = _as_float(alpha)
    res = polar_eval(volume_function(m), m.P, a, opts)
    if res.minimizer is None or res.value <= 0:
        raise NotBigError("decomposition defined only for big classes")
    B = res.minimizer
    pp = np.asarray(curve_power(m, B), dtype=float)
    gamma = a - pp
    scale = max(1.0, float(np.max(np.abs(a))))
    gnorm = float(np.max(np.abs(gamma)))
    residuals = {
        "B_dot_gamma": float(B @ m.P @ gamma),
        "gamma_eff_margin": m.eff_curve.margin(gamma) if gnorm > 1e-12 * scale else 0.0,
        "vol_gap": abs(res.value - float(contract(m.tensor, [B] * m.n))),
        "spread": res.spread,
    }
    witness = None
    if gnorm > 1e-9 * scale:
        gu = gamma / np.linalg.norm(gamma)
        pairs = [float(np.asarray(d, float) / np.linalg.norm(np.asarray(d, float)) @ m.P @ gu)
                 for d in m.eff_div.generators]
        witness = min(pairs)
    return ZariskiResult(a, B, pp, gamma, res.value, residuals, len(res.restarts), opts.seed, res, witness)


def derivative(m: ChowModel, alpha, beta, opts: PolarOptions | None = None) -> float:
    """``d/dt vol^(alpha + t beta)`` at 0, equal to ``n/(n-1) B.beta``."""
    z = zariski(m, alpha, opts)
    return m.n / (m.n - 1) * float(z.B @ m.P @ _as_float(beta))


@dataclass
class DerivativeCheck:
    closed_form: float
    finite_differences: dict
    agree: bool


def derivative_check(m: ChowModel, alpha, beta, opts: PolarOptions | None = None,
                     hs: Sequence[float] = (1e-3, 1e-4, 1e-5)) -> DerivativeCheck:
    """Compare the closed form with central differences of vol^."""
    a, b = _as_float(alpha), _as_float(beta)
    d = derivative(m, alpha, beta, opts)
    fd = {}
    ok = True
    for h in hs:
        est = (curve_volume(m, a + h * b, opts) - curve_volume(m, a - h * b, opts)) / (2 * h)
        fd[h] = est
        if abs(est - d) > max(1e-4, 10 * h) * max(1.0, abs(d)):
            ok = False
    return DerivativeCheck(d, fd, ok)


# Morse-type bigness -------------------------------------------------------

@dataclass
class MorseReport:
    criterion: float
    big: bool | None
    certificate_ok: bool
    lower_bound: float
    strong_bound: float | None
    volhat_difference: float | None
    messages: list = field(default_factory=list)


def morse_check(m: ChowModel, alpha, beta, opts: PolarOptions | None = None) -> MorseReport:
    """Positivity criterion ``vol^(alpha) - n B.beta > 0 => alpha - beta big`` and its volume bounds."""
    msgs = []
    n = m.n
    exact = la.is_exact(list(alpha)) and la.is_exact(list(beta))
    if exact:
        if not m.mov_curve.contains(la.frac_vector(beta)):
            msgs.append("beta is not movable")
    elif not m.mov_curve.contains(_as_float(beta), 1e-9):
        msgs.append("beta is not movable")
    z = zariski(m, alpha, opts)
    bb = float(z.B @ m.P @ _as_float(beta))
    bn = float(contract(m.tensor, [z.B] * n))
    criterion = z.value - n * bb
    if exact:
        diff = [la.to_fraction(x) - la.to_fraction(y) for x, y in zip(alpha, beta)]
    else:
        diff = _as_float(alpha) - _as_float(beta)
    big = is_big(m, diff)
    ok = True
    if criterion > 0 and not big:
        ok = False
        msgs.append("criterion positive but alpha - beta is not big")
    lower = bn - n * n / (n - 1) * bb
    vd = curve_volume(m, _as_float(diff), opts) if big else None
    strong = (bn - n * bb) * bn ** (-1 / n)
    if vd is not None:
        if vd < lower - 1e-7 * max(1.0, abs(lower)):
            ok = False
            msgs.append("volume below the Morse lower bound")
        if vd ** ((n - 1) / n) < strong - 1e-7 * max(1.0, abs(strong)):
            ok = False
            msgs.append("volume below the sharpened Morse bound")
    return MorseReport(criterion, big, ok, lower, strong, vd, msgs)


def optimality_probe(n: int, epsilon, grid: Sequence | None = None, opts: PolarOptions | None = None):
    """Search for alpha, gamma on the diagonal abelian model with
    ``vol^(alpha) - (n - eps) B.gamma > 0`` but ``alpha - gamma`` not big.

    ``alpha = (1,...,1)^{n-1}`` and ``gamma = (lambda)^{n-1}``; returns a dict
    with the witness, or None when the grid is exhausted.
    """
    from .chow import diagonal_abelian

    eps = la.to_fraction(epsilon)
    if n < 2 or not 0 <= eps < n:
        raise ValueError("need n >= 2 and 0 <= epsilon < n")
    m = diagonal_abelian(n)
    ones = [Fraction(1)] * n
    alpha = curve_power(m, ones)
    volhat = Fraction(factorial(n))  # alpha is a complete intersection: vol^ = vol(1,...,1)
    z = zariski(m, alpha, opts)
    if abs(z.value - float(volhat)) > 1e-8 * float(volhat) or \
            np.max(np.abs(z.B - 1.0)) > 1e-6:
        raise RuntimeError("numerical decomposition of the probe class disagrees with the closed form")
    if grid is None:
        grid = [Fraction(k, 20) for k in range(1, 41)]
    for lam in itertools.combinations_with_replacement(sorted(set(grid), reverse=True), n):
        lam = list(lam)
        gamma = curve_power(m, lam)
        crit = volhat - (n - eps) * pair(m, ones, gamma)
        if crit <= 0:
            continue
        diff = [a - g for a, g in zip(alpha, gamma)]
        if not m.eff_curve.interior_contains(diff):
            return {"lambda": lam, "alpha": alpha, "gamma": gamma, "criterion": crit,
                    "criterion_float": z.value - float(n - eps) * float(z.B @ m.P @ la.as_float(gamma))}
    return None


# inequality checks --------------------------------------------------------

@dataclass
class InequalityReport:
    lhs: float
    rhs: float
    slack: float
    ok: bool


def _report(lhs, rhs, tol):
    slack = lhs - rhs
    ok = slack >= -tol * max(1.0, abs(float(lhs)), abs(float(rhs)))
    return InequalityReport(lhs, rhs, slack, bool(ok))


def reverse_kt_check(m: ChowModel, v, x, y, tol: float = 1e-7) -> InequalityReport:
    """``n (y.v)(v^{n-1}.x) >= vol(v)(y.x)`` for nef v, x and a movable curve class y.

    Movability of y is needed: the argument runs through the Morse
    inequality, whose conclusion is bigness in Eff^1 (dual to Mov_1).
    """
    n = m.n
    lhs = n * pair(m, v, y) * pair(m, x, curve_power(m, v))
    rhs = contract(m.tensor_exact if la.is_exact(list(v)) else m.tensor,
                   [v if la.is_exact(list(v)) else np.asarray(v, float)] * n)
    rhs = (rhs[()] if isinstance(rhs, np.ndarray) else rhs) * pair(m, x, y)
    return _report(lhs, rhs, tol)


def _mixed(m: ChowModel, classes):
    if all(la.is_exact(list(c)) for c in classes):
        return contract(m.tensor_exact, [la.frac_vector(c) for c in classes])[()]
    return float(contract(m.tensor, [np.asarray(c, float) for c in classes]))


def appendix_kt_check(m: ChowModel, alpha, beta, gamma, k: int, tol: float = 1e-7) -> InequalityReport:
    """``(b^k a^{n-k})(a^k c^{n-k}) >= k!(n-k)!/n! a^n (b^k c^{n-k})`` for nef a, b, c."""
    n = m.n
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    lhs = _mixed(m, [beta] * k + [alpha] * (n - k)) * _mixed(m, [alpha] * k + [gamma] * (n - k))
    coef = Fraction(factorial(k) * factorial(n - k), factorial(n))
    rhs = _mixed(m, [alpha] * n) * _mixed(m, [beta] * k + [gamma] * (n - k))
    rhs = coef * rhs if isinstance(rhs, Fraction) else float(coef) * rhs
    return _report(lhs, rhs, tol)


def kt_check(m: ChowModel, a, b, tol: float = 1e-7) -> tuple[InequalityReport, bool]:
    """Khovanskii-Teissier ``A^{n-1}.B >= (A^n)^{(n-1)/n} (B^n)^{1/n}``; also reports proportionality."""
    n = m.n
    af, bf = np.asarray(a, float), np.asarray(b, float)
    lhs = float(_mixed(m, [af] * (n - 1) + [bf]))
    an, bn = float(_mixed(m, [af] * n)), float(_mixed(m, [bf] * n))
    rhs = an ** ((n - 1) / n) * bn ** (1 / n)
    cos = af @ bf / (np.linalg.norm(af) * np.linalg.norm(bf))
    return _report(lhs, rhs, tol), bool(cos > 1 - 1e-12)


def young_fenchel_gap(f: ConcaveFn, pairing, w, v, opts: PolarOptions | None = None) -> float:
    """``w.v - Hf(w)^{(s-1)/s} f(v)^{1/s}``, nonnegative for all admissible pairs."""
    s = f.s
    wf, vf = _as_float(w), _as_float(v)
    hv = polar_eval(f, pairing, wf, opts).value
    return float(vf @ np.asarray(pairing, float) @ wf) - hv ** ((s - 1) / s) * f.eval(vf) ** (1 / s)


# involution ---------------------------------------------------------------

def polar_function(f: ConcaveFn, pairing, opts: PolarOptions | None = None) -> ConcaveFn:
    """``Hf`` as a concave function of weight ``s/(s-1)`` on the dual cone."""
    opts = _opts(opts)
    P = np.asarray(pairing, dtype=float)
    dual = dual_cone(f.domain, la.frac_matrix(pairing) if la.is_exact(np.asarray(pairing, object).ravel().tolist())
                     else la.frac_matrix(P))
    s = f.s

    def ev(w):
        return polar_eval(f, P, w, opts).value

    def gr(w):
        r = polar_eval(f, P, w, opts)
        if r.minimizer is None:
            return np.zeros_like(np.asarray(w, float))
        return s / (s - 1) * (P.T @ r.minimizer)

    return ConcaveFn(s / (s - 1), dual, ev, gr, None, sublinear_boundary=False, check=False)


@dataclass
class InvolutionReport:
    samples: list
    max_rel_error: float
    ok: bool


def involution_check(f: ConcaveFn, pairing, samples: int | Sequence = 20,
                     opts: PolarOptions | None = None, tol: float = 1e-4, seed: int = 7) -> InvolutionReport:
    """Nested evaluation of ``H(Hf)`` against f on interior points of the domain."""
    if f.domain.ambient_dim > 3:
        raise ValueError("nested optimization is limited to cones of dimension <= 3")
    opts = _opts(opts)
    inner = PolarOptions(multistart=2, seed=opts.seed, kkt_tol=1e-12, max_iter=opts.max_iter)
    outer = PolarOptions(multistart=2, seed=opts.seed, kkt_tol=1e-9, stall_tol=1e-13, max_iter=2000)
    hf = polar_function(f, pairing, inner)
    pts = sample_interior(f.domain, np.random.default_rng(seed), samples) if isinstance(samples, int) \
        else [np.asarray(p, float) for p in samples]
    rows = []
    worst = 0.0
    pt = np.asarray(pairing, float).T
    for v in pts:
        hh = polar_eval(hf, pt, v, outer).value
        fv = f.eval(v)
        err = abs(hh - fv) / fv
        worst = max(worst, err)
        rows.append((v, fv, hh, err))
    return InvolutionReport(rows, worst, worst <= tol)


# concavity and continuity -------------------------------------------------

def sample_big(m: ChowModel, rng, count: int) -> list[np.ndarray]:
    return sample_interior(m.eff_curve, rng, count)


def _cos(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def concavity_suite(m: ChowModel, trials: int = 20, opts: PolarOptions | None = None, seed: int = 3,
                    tol: float = 1e-7, eq_tol: float = 1e-6, cos_tol: float = 1e-6) -> dict:
    """Log-concavity of vol^ with its equality case, continuity of B, and linearity along positive parts."""
    rng = np.random.default_rng(seed)
    n = m.n
    e = (n - 1) / n
    out = {"log_concavity": [], "equality": [], "continuity": [], "linearity": [], "failures": []}
    alphas = sample_big(m, rng, trials)
    betas = sample_big(m, rng, trials)
    for a, b in zip(alphas, betas):
        za, zb, zab = zariski(m, a, opts), zariski(m, b, opts), zariski(m, a + b, opts)
        lhs = zab.value ** e
        rhs = za.value ** e + zb.value ** e
        slack = lhs - rhs
        out["log_concavity"].append(slack)
        if slack < -tol * max(1.0, lhs):
            out["failures"].append(("log_concavity", a, b, slack))
        equal = slack <= eq_tol * lhs
        cos = _cos(za.positive_part, zb.positive_part)
        out["equality"].append((equal, cos))
        if equal and cos <= 1 - cos_tol:
            out["failures"].append(("equality_case", a, b, slack))
        # same positive part ray: equality must hold
        c1, c2 = rng.uniform(0.2, 2.0, size=2)
        a2 = c1 * a + c2 * za.positive_part
        z2 = zariski(m, a2, opts)
        if _cos(z2.B, za.B) < 1 - cos_tol:
            out["failures"].append(("linearity", a, c1, c2))
        out["linearity"].append(_cos(z2.B, za.B))
        zsum = zariski(m, a + a2, opts)
        s2 = zsum.value ** e - za.value ** e - z2.value ** e
        if abs(s2) > eq_tol * zsum.value ** e:
            out["failures"].append(("equality_for_proportional", a, s2))
        # continuity: |B(a + d eta) - B(a)| / d stays bounded as d shrinks
        eta = rng.normal(size=len(a))
        eta /= np.linalg.norm(eta)
        ratios = []
        for d in (1e-2, 1e-3, 1e-4):
            if not is_big(m, a + d * eta):
                break
            ratios.append(np.linalg.norm(zariski(m, a + d * eta, opts).B - za.B) / d)
        out["continuity"].append(ratios)
        if len(ratios) == 3 and ratios[-1] > 10 * max(ratios[0], 1e-6) + 1e-3:
            out["failures"].append(("continuity", a, ratios))
    out["ok"] = not out["failures"]
    return out


# sweeps and open-question probes ------------------------------------------

SWEEP_HEADER_PREFIX = ("t", "volhat")


def sweep(m: ChowModel, alpha, direction, t0: float, t1: float, steps: int,
          opts: PolarOptions | None = None) -> tuple[list[str], list[list[float]]]:
    """Rows ``(t, vol^, B coordinates, d/dt vol^)`` along ``alpha + t * direction``."""
    a, d = _as_float(alpha), _as_float(direction)
    header = ["t", "volhat"] + [f"B_{lab}" for lab in m.div_labels] + ["derivative"]
    rows = []
    ts = np.linspace(t0, t1, steps + 1) if steps > 0 else np.array([t0])
    for t in ts:
        p = a + t * d
        if is_big(m, p):
            z = zariski(m, p, opts)
            der = m.n / (m.n - 1) * float(z.B @ m.P @ d)
            rows.append([float(t), z.value] + [float(x) for x in z.B] + [der])
        else:
            rows.append([float(t), curve_volume(m, p, opts)] + [float("nan")] * m.rho + [float("nan")])
    return header, rows


def morse_question_probe(m: ChowModel, alpha, beta, samples: int = 11,
                         opts: PolarOptions | None = None) -> dict:
    """Record (never assert) ``vol^(a-b) >= vol^(a) - n B.b`` and ``B_{a-sb}.b <= (n-1) B_a.b``."""
    a, b = _as_float(alpha), _as_float(beta)
    n = m.n
    za = zariski(m, a, opts)
    bb = float(za.B @ m.P @ b)
    diff = a - b
    vd = curve_volume(m, diff, opts)
    rows = []
    for s in np.linspace(0, 1, samples):
        p = a - s * b
        if not is_big(m, p):
            rows.append((float(s), None))
            continue
        rows.append((float(s), float(zariski(m, p, opts).B @ m.P @ b)))
    return {
        "question_gap": vd - (za.value - n * bb),
        "remark_values": rows,
        "remark_bound": (n - 1) * bb,
        "remark_holds": all(r is None or r <= (n - 1) * bb + 1e-9 for _, r in rows),
    }


# complete intersection cone ------------------------------------------------

def ci_distance(m: ChowModel, v, opts: PolarOptions | None = None) -> tuple[float, np.ndarray]:
    """Distance from the ray of v to the sampled cone ``{A^{n-1} : A nef}``, both unit-normalized.

    Minimizes over the nef generator simplex with multistart projected
    gradient; returns (distance, best nef class).
    """
    opts = _opts(opts)
    G = m.nef.G / np.max(np.abs(m.nef.G), axis=1)[:, None]
    target = _as_float(v)
    target = target / np.linalg.norm(target)
    n = m.n

    def cp(x):
        return m.P_inv @ contract(m.tensor, [G.T @ x] * (n - 1))

    def obj(x):
        c = cp(x)
        nc = np.linalg.norm(c)
        if nc == 0:
            return 4.0
        return float(np.sum((c / nc - target) ** 2))

    rng = np.random.default_rng(opts.seed)
    k = len(G)
    starts = [np.full(k, 1.0 / k)] + [rng.dirichlet(np.ones(k)) for _ in range(max(0, 4 * opts.multistart - 1))]
    starts += [np.eye(k)[i] * 0.9 + 0.1 / k for i in range(k)]
    best, best_x = np.inf, None
    for x in starts:
        fx = obj(x)
        step = 1.0
        hist = [fx]
        for _ in range(3000):
            g = _fd_grad(obj, x, 1e-7)
            t = step
            while True:
                xn = simplex_projection(x - t * g)
                fn = obj(xn)
                if fn <= fx + 1e-4 * (g @ (xn - x)) or t < 1e-16:
                    break
                t *= 0.5
            if t < 1e-16:
                break
            step = min(2 * t, 1e6)
            x, fx = xn, fn
            hist.append(fx)
            if len(hist) > 5 and abs(hist[-6] - fx) <= 1e-14:
                break
        if fx < best:
            best, best_x = fx, x
    return float(np.sqrt(best)), G.T @ best_x
