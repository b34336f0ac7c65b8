"""Command-line front end: ``elab prove-rigidity | verify-identities | flow``.

Exit codes: 0 all checks pass, 1 usage or configuration error, 2 a
verification failed (reports are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

log = logging.getLogger("elab")

__all__ = ["RunConfig", "ConfigError", "parse_config", "main"]


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -----------------------------------------------------------------------------
# run configuration

FAMILIES = ("gerstner", "kirchhoff", "family1", "family2", "family3", "elliptic-inverse")


@dataclass
class RunConfig:
    family: str = "gerstner"
    k: float = 1.0
    s0: float = 0.5
    mu0: float = 1.0
    mu: float = 0.0
    theta: float = 1.0
    reflect1: bool = False
    reflect2: bool = False
    x0: str = "0.2,0,0,0.1,0.1,-0.2"
    h: float = 1e-3
    v_matrix: str = "1,0,0,1"
    coeffs: str = "0,1,0.5+0.25j"
    domain: str = ""
    grid: str = ""
    t: str = ""
    tol_euler: float = 1e-6
    tol_det: float = 1e-8
    tol_n12: float = 1e-6
    tol_system: float = 2e-2
    pressure_samples: int = 5
    pressure_panels: int = 4
    output: str = "elab_output"

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {', '.join(FAMILIES)}")
        for name in ("tol_euler", "tol_det", "tol_n12", "tol_system", "h"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.pressure_samples < 1 or self.pressure_panels < 1:
            raise ConfigError("pressure_samples and pressure_panels must be >= 1")
        if self.family in ("family2", "elliptic-inverse") and self.mu == self.theta:
            raise ConfigError("family2 needs mu != theta")
        if self.family == "kirchhoff" and self.mu0 == 0:
            raise ConfigError("kirchhoff needs mu0 != 0")
        if self.family == "gerstner" and self.k == 0:
            raise ConfigError("gerstner needs k != 0")
        self.times()
        self.floats("x0", 6)
        self.floats("v_matrix", 4)
        if self.domain:
            self.floats("domain", 4)
        return self

    def floats(self, name, n):
        try:
            vals = [float(x) for x in getattr(self, name).split(",")]
        except ValueError:
            raise ConfigError(f"{name} must be {n} comma-separated numbers") from None
        if len(vals) != n:
            raise ConfigError(f"{name} must be {n} comma-separated numbers")
        return vals

    def complex_coeffs(self):
        try:
            return [complex(x.strip().replace(" ", "")) for x in self.coeffs.split(",")]
        except ValueError:
            raise ConfigError("coeffs must be comma-separated complex numbers like 1+2j") from None

    def times(self):
        if not self.t:
            return None
        try:
            a, step, b = (float(x) for x in self.t.split(":"))
        except ValueError:
            raise ConfigError("t must look like start:step:stop") from None
        if not step > 0 or b < a:
            raise ConfigError("t needs step > 0 and stop >= start")
        n = int(math.floor((b - a) / step + 1e-9))
        return a + step * np.arange(n + 1)


_CONVERT = {f.name: f.type for f in fields(RunConfig)}


def _convert(key, raw: str):
    kind = _CONVERT[key]
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return {"float": float, "int": int, "str": str}[kind](raw.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    cfg = base or RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "preset":
            key = "family"
        if key not in _CONVERT:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _convert(key, value))
    return cfg


# -----------------------------------------------------------------------------
# commands


def cmd_prove_rigidity(args) -> int:
    from .jetlab import RigidityError, prove_affine_rigidity

    try:
        report = prove_affine_rigidity(args.order)
    except RigidityError as exc:
        print(f"rigidity pipeline failed at stage {exc.stage}: {exc}", file=sys.stderr)
        return 2
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    print(f"dimensions: {report.dimensions}; vanishing jets: {', '.join(report.vanishing_jets)}",
          file=sys.stderr)
    return 0


def _thm52():
    from .symflow import cr_reduction, derive_rotation_system, verify_rotation_identity

    ident = verify_rotation_identity()
    S = derive_rotation_system()
    _, _, M = cr_reduction(S)
    out = {
        "q1": ident["q1"],
        "q2": ident["q2"],
        "det": "det(dv) + det(dw) + (c1*c2 + s1*s2)*q1 + (s1*c2 - c1*s2)*q2",
        "n12": "(mu^2 - theta^2)*((c1*s2 - s1*c2)*q1 + (c1*c2 + s1*s2)*q2)",
        "cr_reduction": [[str(x) for x in row] for row in M],
    }
    lines = [f"q1 = {out['q1']}", f"q2 = {out['q2']}", f"det(dphi) = {out['det']}",
             f"N12 = {out['n12']}"]
    return out, lines


def _thm56():
    from .symflow import verify_thm56

    rep = verify_thm56()
    lines = [f"NF(f2, I1) = NF(f3, I1) = NF(f6, I1) = {rep.nf_f2}",
             f"f^1 + f^4 - f^5 = {rep.f_hat_relation}",
             f"N12 = {rep.n12_reduced}  (mod g4 + g5)",
             f"equations: {rep.equations[0]} = 0, {rep.equations[1]} = 0"]
    for d in rep.discrepancies:
        lines.append(f"printed {d['equation']} differs by {d['printed_minus_derived']}"
                     + (f" ({d['note']})" if "note" in d else ""))
    return rep.to_dict(), lines


def _reflections():
    from .symflow import derive_rotation_system

    out, lines = {}, []
    for r1 in (False, True):
        for r2 in (False, True):
            S = derive_rotation_system(r1, r2)
            key = f"reflect1={r1},reflect2={r2}"
            out[key] = S.to_dict()
            lines.append(f"{key}: q1 = {S.q1}; q2 = {S.q2}")
    return out, lines


def cmd_verify_identities(args) -> int:
    from .symflow import IdentityFailure

    run = {"thm52": _thm52, "thm56": _thm56, "reflections": _reflections}[args.which]
    try:
        data, lines = run()
    except IdentityFailure as exc:
        print(f"identity failed: {exc.what}", file=sys.stderr)
        print(f"offending polynomial: {exc.poly}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    if args.output:
        Path(args.output).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    print(f"{args.which}: all identities hold exactly")
    return 0


def _domain(cfg, default):
    from .fields import Domain

    if cfg.domain:
        a1, b1, a2, b2 = cfg.floats("domain", 4)
        return Domain(a1, b1, a2, b2)
    return default


def _family3_fields(domain):
    """Default inputs for the transport construction on ``domain``."""
    from .fields import closure_field

    a1, b1 = domain.a1, domain.b1
    L = b1 - a1

    def u3(a, b):
        return np.array([a + 0.3 * np.sin(np.pi * (a - a1) / L) * b])

    def j3(a, b):
        return np.array([[1 + 0.3 * np.pi / L * np.cos(np.pi * (a - a1) / L) * b,
                          0.3 * np.sin(np.pi * (a - a1) / L)]])

    f1 = closure_field(lambda a, b: np.array([b + 0.2 * np.sin(a)]), 1, domain,
                       lambda a, b: np.array([[0.2 * np.cos(a), np.ones_like(b)]]), name="u1")
    f3 = closure_field(u3, 1, domain, j3, name="u3")
    return f1, f3


def build_flow(cfg: RunConfig):
    """Return ``(flow, times, extras)`` for a validated configuration."""
    from . import flows
    from .fields import Domain, Grid, cr_pair_from_polynomial, gerstner_domain, linear_field
    from .sl2 import GeodesicState, integrate_geodesic

    extras = {}
    times = cfg.times()
    if not cfg.grid:
        cfg.grid = "16x16" if cfg.family == "family3" else "64x64"
    if cfg.family == "gerstner":
        dom = _domain(cfg, gerstner_domain(cfg.k))
        F = flows.gerstner(cfg.k, dom)
    elif cfg.family in ("kirchhoff", "family1"):
        dom = _domain(cfg, Domain(-1.0, 1.0, -1.0, 1.0))
        M = np.array(cfg.v_matrix and cfg.floats("v_matrix", 4)).reshape(2, 2)
        v = linear_field(M, (0.0, 0.0), dom)
        if cfg.family == "kirchhoff":
            F = flows.kirchhoff(cfg.s0, cfg.mu0, v)
        else:
            t1 = times[-1] if times is not None else 2.0
            path = integrate_geodesic(GeodesicState(*cfg.floats("x0", 6)), max(t1, cfg.h * 8), cfg.h)
            F = flows.family1(path, v)
            extras["path"] = path
    elif cfg.family == "family2":
        dom = _domain(cfg, Domain(0.2, 1.2, 0.1, 1.1))
        v, w = cr_pair_from_polynomial(cfg.complex_coeffs(), dom)
        F = flows.family2(cfg.mu, cfg.theta, v, w, cfg.reflect1, cfg.reflect2)
    elif cfg.family == "elliptic-inverse":
        from .ellsolve import solve_for_v

        dom = _domain(cfg, Domain(0.2, 1.2, 0.1, 1.1))
        v_true, w = cr_pair_from_polynomial(cfg.complex_coeffs(), dom)
        grid = Grid.parse(cfg.grid, dom)
        A1, A2 = grid.mesh()
        v = solve_for_v(w, grid, bc=lambda a, b: v_true(a, b)[0],
                        anchor_value=float(v_true(A1[0, 0], A2[0, 0])[1]))
        extras["v"] = v
        extras["solver_residual"] = v.residual
        F = flows.family2(cfg.mu, cfg.theta, v.as_label_field(), w, cfg.reflect1, cfg.reflect2,
                          tol=cfg.tol_system)
    else:
        dom = _domain(cfg, Domain(0.0, 1.0, 0.0, 1.0))
        t1 = times[-1] if times is not None else 2.0
        path = integrate_geodesic(GeodesicState(*cfg.floats("x0", 6)), max(t1, cfg.h * 8), cfg.h)
        u1, u3 = _family3_fields(dom)
        F = flows.family3(path, u1, u3)
        extras["path"] = path
    if times is None:
        # traced label fields are expensive; keep the default family3 run short
        n = 3 if cfg.family == "family3" else 33
        times = np.linspace(F.t0, min(F.t1, F.t0 + 2 * math.pi), n)

    return F, times, extras


def cmd_flow(args) -> int:
    from .fields import Grid
    from .flows import write_trajectories
    from .verify import (
        CurlTooLarge,
        det_drift,
        euler_residual,
        eulerian_divergence,
        n12_report,
        pressure_recover,
        with_recovered_pressure,
        ResidualReport,
    )

    cfg = RunConfig()
    try:
        if args.config:
            cfg = parse_config(Path(args.config).read_text(encoding="utf-8"), cfg)
        for key in ("family", "preset", "k", "s0", "mu0", "mu", "theta", "grid", "t", "output"):
            val = getattr(args, key, None)
            if val is not None:
                setattr(cfg, "family" if key == "preset" else key, val)
        cfg.validate()
        F, times, extras = build_flow(cfg)
        grid = Grid.parse(cfg.grid, F.domain)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"elab flow: {exc}", file=sys.stderr)
        return 1

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    reports = [det_drift(F, grid, times, cfg.tol_det), n12_report(F, grid, times, cfg.tol_n12)]
    idx = np.unique(np.linspace(0, len(times) - 1, min(cfg.pressure_samples, len(times))).round().astype(int))
    ptimes = times[idx]
    have_pressure = F.pressure is not None
    if not have_pressure:
        try:
            p0 = pressure_recover(F, grid, ptimes[0], curl_tol=cfg.tol_n12,
                                  panels=cfg.pressure_panels)
        except CurlTooLarge as exc:
            reports.append(ResidualReport("pressure_recovery", math.inf, float(ptimes[0]), None,
                                          cfg.tol_n12, {"error": str(exc)}))
        else:
            p0.to_csv(out / "pressure.csv")
            F = with_recovered_pressure(F, panels=cfg.pressure_panels)
            have_pressure = True
    if have_pressure:
        reports.append(euler_residual(F, grid, ptimes, cfg.tol_euler))
    if cfg.family == "gerstner":
        from .flows import gerstner_pressure

        rep = euler_residual(F.with_pressure(gerstner_pressure(cfg.k)), grid, times, cfg.tol_euler)
        rep.check = "euler_residual_closed_form"
        reports.append(rep)
    if F.kind == "family1":
        worst = max(eulerian_divergence(F, t) for t in times)
        reports.append(ResidualReport("eulerian_divergence", worst, None, None, 1e-10))
    if "v" in extras:
        extras["v"].to_csv(out / "v.csv")
    if "path" in extras or F.kind == "family1":
        (extras.get("path") or F.meta["path"]).to_csv(out / "path.csv")

    step1 = max(1, grid.n1 // 8)
    step2 = max(1, grid.n2 // 8)
    A1, A2 = grid.mesh()
    tstep = max(1, len(times) // 200)
    write_trajectories(F, out / "trajectories.csv", A1[::step1, ::step2], A2[::step1, ::step2],
                       times[::tstep], pressure=have_pressure)

    ok = all(r.passed for r in reports)
    summary = {
        "config": {f.name: getattr(cfg, f.name) for f in fields(RunConfig)},
        "kind": F.kind,
        "reports": [r.to_dict() for r in reports],
        "pass": ok,
    }
    if "solver_residual" in extras:
        summary["solver_residual"] = extras["solver_residual"]
    (out / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    for r in reports:
        print(r.line())
    print(f"{'PASS' if ok else 'FAIL'}: outputs in {out}")
    return 0 if ok else 2


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("prove-rigidity", help="area-preserving harmonic maps are affine")
    r.add_argument("-o", "--output", help="report path (default: stdout)")
    r.add_argument("--order", choices=("degrevlex", "lex"), default="degrevlex",
                   help="order inside the elimination blocks")
    r.set_defaults(func=cmd_prove_rigidity)

    v = sub.add_parser("verify-identities", help="exact symbolic identities")
    v.add_argument("which", choices=("thm52", "thm56", "reflections"))
    v.add_argument("-o", "--output", help="write the certificate as JSON")
    v.set_defaults(func=cmd_verify_identities)

    f = sub.add_parser("flow", help="build a flow, verify it and export CSV/JSON")
    f.add_argument("--config", help="key = value file")
    f.add_argument("--preset", choices=("gerstner", "kirchhoff"))
    f.add_argument("--family", choices=FAMILIES)
    f.add_argument("--k", type=float)
    f.add_argument("--s0", type=float)
    f.add_argument("--mu0", type=float)
    f.add_argument("--mu", type=float)
    f.add_argument("--theta", type=float)
    f.add_argument("--grid", help="NxM nodes, e.g. 64x64")
    f.add_argument("--t", help="start:step:stop")
    f.add_argument("-o", "--output", help="output directory")
    f.set_defaults(func=cmd_flow)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
