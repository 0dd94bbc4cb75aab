"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 math-level error (non-big class, invalid fan or model).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la
from .chow import ChowModel, ModelError, PRESETS, load_model, preset
from .polar import (PolarConvergenceError, PolarOptions, derivative_check, morse_check, polar_eval, sweep,
                    volume_function, zariski)

COMMANDS = ("fan2chow", "volume", "zariski", "derivative", "morse", "sweep", "verify-paper")

# sweep CSV columns: t, volhat, one B_<divisor label> per basis divisor, derivative
SIG_DIGITS = 12


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    model: str | None = None
    alpha: list | None = None
    beta: list | None = None
    direction: list | None = None
    t0: float = 0.0
    t1: float = 1.0
    steps: int = 10
    tol: float = 1e-6
    seed: int = 0
    multistart: int = 8
    format: str | None = None
    out: str | None = None
    suites: list = field(default_factory=list)

    @property
    def options(self) -> PolarOptions:
        return PolarOptions(multistart=self.multistart, seed=self.seed, tol=self.tol)


def parse_vector(text: str) -> list[Fraction]:
    """Comma-separated decimals or ``p/q`` rationals, kept exact."""
    try:
        return [la.to_fraction(part) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse vector {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conezar", description="Curve volumes and Zariski decompositions on cones.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--preset", help=f"named model: {', '.join(PRESETS)}")
    p.add_argument("--model", help="chow, fan or quadratic JSON file")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--dir", dest="direction")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=None, help="defaults to $CONEZAR_SEED, then 0")
    p.add_argument("--multistart", type=int, default=8)
    p.add_argument("--format", choices=("json", "csv", "pretty"))
    p.add_argument("--out")
    p.add_argument("--suite", action="append", default=[], help="verify-paper: run only this suite (repeatable)")
    return p


VALUE_FLAGS = ("--alpha", "--beta", "--dir", "--t0", "--t1")


def _join_negative(argv: list[str]) -> list[str]:
    # argparse reads "--dir -2,-1" as two flags; bind such values as "--dir=-2,-1"
    out, i = [], 0
    while i < len(argv):
        if argv[i] in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def config_from_args(argv=None) -> RunConfig:
    argv = list(sys.argv[1:] if argv is None else argv)
    a = build_parser().parse_args(_join_negative(argv))
    seed = a.seed
    if seed is None:
        env = os.environ.get("CONEZAR_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError as exc:
            raise ConfigError(f"CONEZAR_SEED must be an integer, got {env!r}") from exc
    return RunConfig(
        command=a.command, preset=a.preset, model=a.model,
        alpha=parse_vector(a.alpha) if a.alpha else None,
        beta=parse_vector(a.beta) if a.beta else None,
        direction=parse_vector(a.direction) if a.direction else None,
        t0=a.t0, t1=a.t1, steps=a.steps, tol=a.tol, seed=seed, multistart=a.multistart,
        format=a.format, out=a.out, suites=a.suite,
    )


def _model(cfg: RunConfig) -> ChowModel:
    if (cfg.preset is None) == (cfg.model is None):
        raise ConfigError("give exactly one of --preset and --model")
    if cfg.preset is not None:
        try:
            return preset(cfg.preset)
        except ModelError as exc:
            if "unknown preset" in str(exc):
                raise ConfigError(str(exc)) from exc
            raise
    if not os.path.exists(cfg.model):
        raise ConfigError(f"no such file: {cfg.model}")
    try:
        return load_model(cfg.model)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read model file {cfg.model}: {exc}") from exc


def _need(cfg: RunConfig, m: ChowModel, *names):
    for name in names:
        v = getattr(cfg, name)
        flag = "--dir" if name == "direction" else f"--{name}"
        if v is None:
            raise ConfigError(f"{cfg.command} needs {flag}")
        if len(v) != m.rho:
            raise ConfigError(f"{flag} has {len(v)} entries, the model has Picard rank {m.rho}")


def _num(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _fl(v) -> list:
    return [_num(x) for x in v]


def _fan2chow(cfg: RunConfig) -> dict:
    from . import toric

    if cfg.model is not None and cfg.preset is None:
        if not os.path.exists(cfg.model):
            raise ConfigError(f"no such file: {cfg.model}")
        with open(cfg.model) as fh:
            try:
                fan = toric.Fan.from_json(json.load(fh))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ConfigError(f"cannot read fan file {cfg.model}: {exc}") from exc
        return toric.fan_to_chow(fan).to_json()
    if cfg.preset is not None and cfg.model is None:
        if cfg.preset not in toric.PRESET_FANS:
            raise ConfigError(f"fan2chow presets: {', '.join(toric.PRESET_FANS)}")
        return preset(cfg.preset).to_json()
    raise ConfigError("give exactly one of --preset and --model")


def _volume(cfg: RunConfig, m: ChowModel) -> dict:
    _need(cfg, m, "alpha")
    r = polar_eval(volume_function(m), m.P, cfg.alpha, cfg.options)
    return {
        "alpha": [la.fmt(x) for x in cfg.alpha],
        "volhat": _num(r.value),
        "minimizer": _fl(r.minimizer) if r.minimizer is not None else None,
        "spread": _num(r.spread),
        "restarts": len(r.restarts),
        "seed": cfg.seed,
    }


def _derivative(cfg: RunConfig, m: ChowModel) -> dict:
    _need(cfg, m, "alpha", "beta")
    c = derivative_check(m, cfg.alpha, cfg.beta, cfg.options)
    return {
        "alpha": [la.fmt(x) for x in cfg.alpha],
        "beta": [la.fmt(x) for x in cfg.beta],
        "derivative": _num(c.closed_form),
        "finite_differences": {f"{h:g}": _num(v) for h, v in c.finite_differences.items()},
        "agree": bool(c.agree),
        "seed": cfg.seed,
    }


def _morse(cfg: RunConfig, m: ChowModel) -> dict:
    _need(cfg, m, "alpha", "beta")
    r = morse_check(m, cfg.alpha, cfg.beta, cfg.options)
    return {
        "criterion": _num(r.criterion),
        "alpha_minus_beta_big": r.big,
        "certificate_ok": r.certificate_ok,
        "lower_bound": _num(r.lower_bound),
        "strong_bound": _num(r.strong_bound) if r.strong_bound is not None else None,
        "volhat_difference": _num(r.volhat_difference) if r.volhat_difference is not None else None,
        "messages": list(r.messages),
        "seed": cfg.seed,
    }


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.{SIG_DIGITS}g}" for x in row])
    return buf.getvalue()


def _pretty(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k in sorted(obj):
        v = obj[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_pretty(v, indent + 1))
        elif isinstance(v, list) and v and all(isinstance(x, (int, float)) or x is None for x in v):
            lines.append(f"{pad}{k}: " + "  ".join("nan" if x is None else f"{x:.{SIG_DIGITS}g}" for x in v))
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)


def render(obj, fmt: str) -> str:
    if fmt == "pretty":
        return _pretty(obj) + "\n"
    if fmt == "csv":
        raise ConfigError("csv output is only available for sweep")
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verify(cfg: RunConfig) -> int:
    from . import suites

    unknown = [s for s in cfg.suites if s not in suites.SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {', '.join(unknown)}; known: {', '.join(suites.SUITES)}")
    results = suites.run(cfg.suites or None)
    if cfg.format == "json":
        text = render({"suites": [{"name": r.name, "passed": r.passed, "summary": r.summary} for r in results]},
                      "json")
    else:
        text = "".join(r.line() + "\n" for r in results)
    _emit(cfg, text)
    return 0 if all(r.passed for r in results) else 1


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        if cfg.command == "verify-paper":
            return _verify(cfg)
        if cfg.command == "fan2chow":
            _emit(cfg, render(_fan2chow(cfg), cfg.format or "json"))
            return 0
        m = _model(cfg)
        if cfg.command == "sweep":
            _need(cfg, m, "alpha", "direction")
            if cfg.steps < 0:
                raise ConfigError("--steps must be nonnegative")
            header, rows = sweep(m, cfg.alpha, cfg.direction, cfg.t0, cfg.t1, cfg.steps, cfg.options)
            fmt = cfg.format or "csv"
            if fmt == "csv":
                _emit(cfg, _csv(header, rows))
            else:
                _emit(cfg, render({"header": header, "rows": [_fl(r) for r in rows]}, fmt))
            return 0
        if cfg.command == "zariski":
            _need(cfg, m, "alpha")
            out = zariski(m, cfg.alpha, cfg.options).to_json()
        elif cfg.command == "volume":
            out = _volume(cfg, m)
        elif cfg.command == "derivative":
            out = _derivative(cfg, m)
        else:
            out = _morse(cfg, m)
        _emit(cfg, render(out, cfg.format or "json"))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, PolarConvergenceError) as exc:
        print(f"math error: {exc}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
