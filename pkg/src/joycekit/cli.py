"""Command line runner: residual suites and one-off computations with structured reports.

Usage examples::

    joycekit suite --model a1 --samples 8 --seed 3
    joycekit periods --a -1 --b 0
    joycekit monodromy --loop-around q

Numbers are printed with 15 significant digits and complex numbers as
``[re, im]``.  Exit codes: 0 success, 1 failed check or computation error,
2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import __version__
from .axiomcheck import (
    ResidualReport,
    closedness_residual,
    flatness_residual,
    heavenly2_residual,
    parallel_residual,
    sample_a2_states,
    sample_points,
    symmetry_residuals,
)
from .elliptic import Curve, abel_theta, complete_periods, legendre_residual, u_integral
from .errors import ConfigError, JoyceKitError
from .tensorcore import hk_tensors
from .twistor import descent_drift, twistor_line_residual

MODELS = ("a1", "a2", "flat", "synthetic-counterexample")
DEFAULT_EPS = (math.inf, 1.0, 1j, -0.5)
DEFAULT_STATE = (0.6 + 0.1j, 0.3 - 0.2j, 0.9 + 0.4j, 0.3 + 0.2j)  # (a, b, q, r)
DEFAULT_TOLERANCES = {
    "heavenly": 1e-10,
    "flatness": 1e-6,
    "closedness": 1e-8,
    "quaternion": 1e-12,
    "parallel": 1e-6,
    "symmetry": 1e-12,
    "twistor-line": 1e-8,
    "descent": 1e-6,
    "joyce-function": 1e-5,
    "joyce-metric": 1e-4,
    "monodromy": 1e-6,
}
TIMING_FIELDS = ("wall_clock",)


# -- serialization -----------------------------------------------------------------
def to_plain(value):
    """Convert numbers and arrays to JSON-ready values (15 significant digits, complex as pairs)."""
    if isinstance(value, ResidualReport):
        return {k: to_plain(getattr(value, k)) for k in value.__dataclass_fields__}
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return [_round(value.real), _round(value.imag)]
    return value


def _round(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(f"{x:.15g}")


def dumps(record) -> str:
    return json.dumps(to_plain(record), sort_keys=True)


def strip_timing(document: dict) -> dict:
    """Copy of a report document without wall-clock fields."""
    doc = json.loads(json.dumps(document))
    for check in doc.get("checks", []):
        for key in TIMING_FIELDS:
            check.pop(key, None)
    doc.pop("wall_clock", None)
    return doc


# -- configuration -----------------------------------------------------------------
@dataclass
class SuiteConfig:
    """Settings for :func:`run_suite`."""

    model: str = "flat"
    samples: int = 6
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    eps: tuple = DEFAULT_EPS
    out: Optional[str] = None
    format: str = "structured"
    workers: int = 4

    def validate(self) -> "SuiteConfig":
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.format not in ("text", "structured"):
            raise ConfigError(f"unknown format {self.format!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if not (v > 0):
                raise ConfigError(f"tolerance {k} must be positive")
        if any(e == 0 for e in self.eps):
            raise ConfigError("eps values must be nonzero")
        return self

    def echo(self) -> dict:
        return {"model": self.model, "samples": self.samples, "seed": self.seed,
                "tolerances": dict(sorted(self.tolerances.items())), "eps": list(self.eps),
                "format": self.format}


def parse_complex(text: str) -> complex:
    """Parse ``1``, ``-0.5``, ``1j``, ``0.3-0.2j`` or ``inf``."""
    t = str(text).strip().lower().replace(" ", "")
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    t = t.replace("i", "j")
    try:
        value = complex(t)
    except ValueError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc
    return value.real if value.imag == 0 else value


def parse_eps_list(text: str) -> tuple:
    return tuple(parse_complex(t) for t in str(text).split(",") if t.strip())


def load_config(path: str, base: Optional[SuiteConfig] = None) -> SuiteConfig:
    """Read a ``[suite]`` section of ``key = value`` lines.

    Recognized keys: ``model``, ``samples``, ``seed``, ``eps`` (comma list),
    ``out``, ``format``, ``workers`` and ``tol.<check>``.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not parser.has_section("suite"):
        raise ConfigError(f"{path} has no [suite] section")
    cfg = replace(base or SuiteConfig(), tolerances=dict((base or SuiteConfig()).tolerances))
    sec = parser["suite"]
    try:
        for key, value in sec.items():
            if key == "model":
                cfg.model = value.strip()
            elif key == "samples":
                cfg.samples = int(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "eps":
                cfg.eps = parse_eps_list(value)
            elif key == "out":
                cfg.out = value.strip()
            elif key == "format":
                cfg.format = value.strip()
            elif key == "workers":
                cfg.workers = int(value)
            elif key.startswith("tol."):
                cfg.tolerances[key[4:]] = float(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value in {path}: {exc}") from exc
    return cfg


# -- checks -------------------------------------------------------------------------
@dataclass(frozen=True)
class Check:
    name: str
    tol_key: str
    anchor: str
    run: Callable[[], tuple]  # returns (values, location)


def _worst(pairs):
    """Max of ``(value, location)`` pairs as ``(values, location_of_max)``."""
    values = [float(v) for v, _ in pairs]
    k = int(np.argmax(values))
    return values, pairs[k][1]


def _plebanski_checks(model, cfg: SuiteConfig) -> list:
    points = sample_points(model, cfg.samples, cfg.seed)
    eps_list = cfg.eps

    def heavenly():
        return _worst([(np.max(np.abs(heavenly2_residual(model, p))), p.x) for p in points])

    def flatness():
        return _worst([(flatness_residual(model, p, e), [p.x, e]) for p in points for e in eps_list])

    def closedness():
        return _worst([(closedness_residual(model, p, w), [p.x, w])
                       for p in points for w in ("plus", "I", "minus")])

    def quaternion():
        out = []
        for p in points:
            hk = hk_tensors(model, p)
            out.append((max(hk.quaternion_defect(), hk.compatibility_defect()), p.x))
        return _worst(out)

    def parallel():
        return _worst([(parallel_residual(model, p), p.x) for p in points])

    def twistor():
        finite = [e for e in eps_list if not math.isinf(abs(e))] or [1.0]
        return _worst([(twistor_line_residual(model, p, e), [p.x, e]) for p in points for e in finite])

    checks = [
        Check("heavenly", "heavenly", "second heavenly equations", heavenly),
        Check("flatness", "flatness", "flat pencil of connections", flatness),
        Check("closedness", "closedness", "closed two-forms", closedness),
        Check("quaternion", "quaternion", "quaternionic structure and compatible metric", quaternion),
        Check("parallel", "parallel", "complex structures parallel for the Levi-Civita connection", parallel),
        Check("twistor-line", "twistor-line", "twistor line tangency", twistor),
    ]
    if model.name == "a1":
        def symmetry():
            return _worst([(max(symmetry_residuals(model, p, np.zeros(model.n), 1.7 - 0.4j)[1:]), p.x)
                           for p in points])
        checks.append(Check("symmetry", "symmetry", "homogeneity and parity of the generating function",
                            symmetry))
    return checks


def _a2_checks(cfg: SuiteConfig) -> list:
    from .hamilton import OscillatorProblem, loop_around_q, oscillator_monodromy
    from .models import A2_CHART, a2_joyce_residual, a2_linear_joyce_data, a2_phi

    states = sample_a2_states(cfg.samples, cfg.seed)
    eps_list = cfg.eps

    def flatness():
        return _worst([(flatness_residual(A2_CHART, s.vector, e), [s.vector, e])
                       for s in states for e in eps_list])

    def descent():
        inv = [lambda x: a2_phi(x)[0], lambda x: a2_phi(x)[1]]
        return _worst([(descent_drift(A2_CHART, s.vector, math.inf, inv, 1.0), s.vector) for s in states])

    def joyce_function():
        return _worst([(a2_joyce_residual(s), s.vector) for s in states])

    def joyce_metric():
        a, b = DEFAULT_STATE[0], DEFAULT_STATE[1]
        g = a2_linear_joyce_data(a, b).metric
        target = np.array([[0.0, 0.2], [0.2, 0.0]])
        return [float(np.max(np.abs(g - target)))], [a, b]

    def monodromy():
        out = []
        for s in states:
            pr = OscillatorProblem(s, 1.0)
            M = oscillator_monodromy(pr, loop_around_q(pr))
            out.append((np.max(np.abs(M + np.eye(2))), s.vector))
        return _worst(out)

    return [
        Check("flatness", "flatness", "flat pencil of connections", flatness),
        Check("descent", "descent", "invariants constant along the flows", descent),
        Check("joyce-function", "joyce-function", "Joyce function generates the scaling action",
              joyce_function),
        Check("joyce-metric", "joyce-metric", "Joyce metric at the zero section", joyce_metric),
        Check("monodromy", "monodromy", "apparent singularity of the deformed cubic oscillator",
              monodromy),
    ]


def build_checks(cfg: SuiteConfig) -> list:
    """Registered checks for ``cfg.model`` in registration order."""
    from .models import a1_model, flat_model, synthetic_counterexample_model

    if cfg.model == "a2":
        return _a2_checks(cfg)
    model = {"a1": a1_model, "flat": flat_model,
             "synthetic-counterexample": synthetic_counterexample_model}[cfg.model]()
    return _plebanski_checks(model, cfg)


def _execute(check: Check, cfg: SuiteConfig) -> dict:
    tol = cfg.tolerances.get(check.tol_key, DEFAULT_TOLERANCES[check.tol_key])
    start = time.perf_counter()
    try:
        values, location = check.run()
        report = ResidualReport.build(check.name, values, location, tol, anchor=check.anchor)
        record = to_plain(report)
    except JoyceKitError as exc:
        record = {"name": check.name, "anchor": check.anchor, "passed": False, "max_abs": None,
                  "tolerance_used": tol, "error": type(exc).__name__, "message": str(exc)}
    record["wall_clock"] = round(time.perf_counter() - start, 6)
    return record


def run_suite(cfg: SuiteConfig) -> dict:
    """Run the registered checks (threaded, ordered by registration) and return the report."""
    cfg.validate()
    start = time.perf_counter()
    checks = build_checks(cfg)
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        records = list(pool.map(lambda c: _execute(c, cfg), checks))
    return {
        "tool": "joycekit",
        "version": __version__,
        "config": to_plain(cfg.echo()),
        "checks": records,
        "passed": all(r["passed"] for r in records),
        "wall_clock": round(time.perf_counter() - start, 6),
    }


# -- computations -------------------------------------------------------------------
def _state_from_args(args):
    from .models import A2State

    branch = None if args.p is None else parse_complex(args.p)
    return A2State.from_qr(parse_complex(args.a), parse_complex(args.b),
                           parse_complex(args.q), parse_complex(args.r), branch)


def compute_periods(args) -> dict:
    curve = Curve(parse_complex(args.a), parse_complex(args.b))
    curve.validate()
    pd = complete_periods(curve)
    return {"command": "periods", "anchor": "periods and quasi-periods of the elliptic curve",
            "a": curve.a, "b": curve.b, "roots": pd.roots, "omega": pd.omega, "eta": pd.eta,
            "z": pd.z, "legendre_residual": legendre_residual(curve)}


def compute_theta(args) -> dict:
    s = _state_from_args(args)
    curve = Curve(s.a, s.b)
    th = abel_theta(curve, s.q, s.p, s.r)
    return {"command": "theta", "anchor": "fibre coordinates from abelian integrals",
            "state": s.vector, "theta_a": th.theta_a, "theta_b": th.theta_b,
            "theta": [th.theta1, th.theta2], "base_point": th.base_point,
            "u": u_integral(curve, s.q, s.p)}


def compute_twistor_line(args) -> dict:
    from .models import a1_model, flat_model

    if args.model not in ("a1", "flat"):
        raise ConfigError("twistor-line supports --model a1 or flat")
    model = a1_model() if args.model == "a1" else flat_model()
    eps = parse_complex(args.eps)
    pts = sample_points(model, args.samples, args.seed)
    res = [twistor_line_residual(model, p, eps) for p in pts]
    return {"command": "twistor-line", "anchor": "twistor line tangency", "model": args.model,
            "eps": eps, "residuals": res, "max_abs": max(res)}


def compute_monodromy(args) -> dict:
    from .hamilton import CircleLoop, OscillatorProblem, loop_around_q, oscillator_monodromy

    s = _state_from_args(args)
    pr = OscillatorProblem(s, parse_complex(args.eps))
    if args.loop_around == "q":
        loop = loop_around_q(pr, args.radius)
    else:
        center = parse_complex(args.center) if args.center is not None else s.q + 5.0
        loop = CircleLoop(center, args.radius or 0.3)
    M = oscillator_monodromy(pr, loop)
    return {"command": "monodromy", "anchor": "apparent singularity of the deformed cubic oscillator",
            "state": s.vector, "loop": {"center": loop.center, "radius": loop.radius},
            "matrix": M, "det": np.linalg.det(M), "trace": np.trace(M)}


def compute_hamiltonian(args) -> dict:
    from .hamilton import (a2_closed_form_hamiltonian, a2_extraction, flat_extraction,
                           geometric_k_flow, k_flow)
    from .models import a2_phi

    eps = parse_complex(args.eps)
    if args.model == "flat":
        system = flat_extraction()
    elif args.model == "a2":
        s = _state_from_args(args)
        system = a2_extraction(s)
    else:
        raise ConfigError("hamiltonian supports --model flat or a2")
    ext = system.metadata["extraction"]
    seed = system.metadata["seed"]
    t0 = np.atleast_1d(ext.t0)
    q0, p0 = ext.fibre_coords(seed)
    H = system.hamiltonians(t0, q0, p0)
    t, q, p = k_flow(system, eps, (t0, q0, p0), args.direction, args.duration, tol=1e-9)
    gt, gq, gp = ext.to_system(geometric_k_flow(system, eps, seed, args.direction, args.duration))
    mismatch = float(np.max(np.abs(np.concatenate([t - gt, q - gq, p - gp]))))
    record = {"command": "hamiltonian", "anchor": "time-dependent Hamiltonian system",
              "model": args.model, "eps": eps, "H": H, "end": {"t": t, "q": q, "p": p},
              "geometric_end": {"t": gt, "q": gq, "p": gp}, "flow_mismatch": mismatch}
    if args.model == "a2":
        record["closed_form_H"] = a2_closed_form_hamiltonian(t0[0], q0[0], p0[0], a2_phi(s)[1])
    return record


COMMANDS = {
    "periods": compute_periods,
    "theta": compute_theta,
    "twistor-line": compute_twistor_line,
    "monodromy": compute_monodromy,
    "hamiltonian": compute_hamiltonian,
}


# -- argument parsing ---------------------------------------------------------------
def _add_state_args(p):
    a, b, q, r = DEFAULT_STATE
    p.add_argument("--a", default=str(a), help="curve coefficient a (complex, e.g. 0.6+0.1j)")
    p.add_argument("--b", default=str(b), help="curve coefficient b")
    p.add_argument("--q", default=str(q), help="point q on the curve")
    p.add_argument("--r", default=str(r), help="fibre coordinate r")
    p.add_argument("--p", default=None, help="branch hint for p = sqrt(q^3 + a q + b)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="joycekit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"joycekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("suite", help="run the residual checks for a model")
    s.add_argument("--config", help="key-value config file with a [suite] section")
    s.add_argument("--model", choices=MODELS)
    s.add_argument("--seed", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--eps", help="comma-separated pencil parameters, e.g. inf,1,1j,-0.5")
    s.add_argument("--out", help="write the aggregate report document here")
    s.add_argument("--format", choices=("text", "structured"))
    s.add_argument("--workers", type=int)
    for key in DEFAULT_TOLERANCES:
        s.add_argument(f"--tol-{key}", type=float, dest=f"tol_{key.replace('-', '_')}")

    p = sub.add_parser("periods", help="periods and quasi-periods of y^2 = x^3 + a x + b")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    t = sub.add_parser("theta", help="abelian-integral fibre coordinates of an A2 state")
    _add_state_args(t)

    w = sub.add_parser("twistor-line", help="twistor-line tangency residuals")
    w.add_argument("--model", default="a1", choices=MODELS)
    w.add_argument("--eps", default="1")
    w.add_argument("--samples", type=int, default=5)
    w.add_argument("--seed", type=int, default=0)

    m = sub.add_parser("monodromy", help="monodromy of the deformed cubic oscillator")
    _add_state_args(m)
    m.add_argument("--eps", default="1")
    m.add_argument("--loop-around", choices=("q", "none"), default="q")
    m.add_argument("--radius", type=float, default=None)
    m.add_argument("--center", default=None, help="loop center for --loop-around none")

    h = sub.add_parser("hamiltonian", help="extract and flow the time-dependent Hamiltonian system")
    h.add_argument("--model", default="flat", choices=MODELS)
    _add_state_args(h)
    h.add_argument("--eps", default="1")
    h.add_argument("--direction", type=int, default=0)
    h.add_argument("--duration", type=float, default=0.3)

    for sp in (p, t, w, m, h):
        sp.add_argument("--format", choices=("text", "structured"), default="structured")
    return parser


def config_from_args(args) -> SuiteConfig:
    cfg = load_config(args.config) if args.config else SuiteConfig()
    if args.model is not None:
        cfg.model = args.model
    if args.seed is not None:
        cfg.seed = args.seed
    if args.samples is not None:
        cfg.samples = args.samples
    if args.eps is not None:
        cfg.eps = parse_eps_list(args.eps)
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format
    if args.workers is not None:
        cfg.workers = args.workers
    for key in DEFAULT_TOLERANCES:
        value = getattr(args, f"tol_{key.replace('-', '_')}")
        if value is not None:
            cfg.tolerances[key] = value
    return cfg.validate()


def _emit_text(record: dict, out) -> None:
    for key, value in to_plain(record).items():
        print(f"{key}: {json.dumps(value)}", file=out)


def _emit_suite(report: dict, fmt: str, out) -> None:
    for rec in report["checks"]:
        if fmt == "structured":
            print(dumps(rec), file=out)
        else:
            status = "PASS" if rec["passed"] else "FAIL"
            detail = rec.get("error") or f"max_abs={rec['max_abs']:.3e} tol={rec['tolerance_used']:.1e}"
            print(f"{status} {rec['name']:<15} {detail}  [{rec['anchor']}]", file=out)
    summary = {"summary": "pass" if report["passed"] else "fail", "model": report["config"]["model"]}
    print(dumps(summary) if fmt == "structured" else f"SUMMARY {summary['summary'].upper()}", file=out)


def main(argv=None, out=None) -> int:
    """Entry point; returns the process exit code."""
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "suite":
            cfg = config_from_args(args)
            report = run_suite(cfg)
            _emit_suite(report, cfg.format, out)
            if cfg.out:
                with open(cfg.out, "w") as fh:
                    json.dump(report, fh, indent=2, sort_keys=True)
                    fh.write("\n")
            return 0 if report["passed"] else 1
        record = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(dumps({"error": "ConfigError", "message": str(exc)}), file=out)
        return 2
    except JoyceKitError as exc:
        print(dumps({"command": args.command, "error": type(exc).__name__, "message": str(exc)}), file=out)
        return 1
    if args.format == "text":
        _emit_text(record, out)
    else:
        print(dumps(record), file=out)
    return 0


def main_exit() -> None:
    """Console-script wrapper around :func:`main`."""
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
