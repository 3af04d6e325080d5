"""Command-line driver: ``python -m cft_thermal <subcommand> ...``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import fockboson, fockfermion, suites
from .kmscheck import kms_residual_rows
from .moments import (MomentRequest, energy_density, npoint_J, q_geo, vir_classify,
                      VirasoroParams)
from .oneparticle import ThermalParams, geometric_norm_sq, thermal_norm_sq
from .sigfn import DomainError, bump, gaussian, load_fixture
from .suites import CheckReport, SuiteConfig, make_report, rel
from .weyl import W, gauge, gram_psd_check, kms_state

CSV_HEADER = ["name", "value_re", "value_im", "oracle_re", "oracle_im", "delta",
              "tolerance", "pass"]
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# config -------------------------------------------------------------------

@dataclass
class Config:
    beta: Optional[float] = None
    q: Optional[float] = None
    c: Optional[float] = None
    grid_n: Optional[int] = None
    tol: Optional[float] = None
    suite: Optional[List[str]] = None
    output: Optional[str] = None
    format: str = "json"

    def validate(self) -> None:
        if self.beta is not None and not (self.beta > 0 and math.isfinite(self.beta)):
            raise UsageError(f"beta must be positive, got {self.beta}")
        if self.q is not None and not math.isfinite(self.q):
            raise UsageError(f"q must be finite, got {self.q}")
        if self.c is not None and not self.c >= 1.0:
            raise UsageError(f"c must be >= 1, got {self.c}")
        if self.grid_n is not None and (self.grid_n <= 0 or self.grid_n & (self.grid_n - 1)):
            raise UsageError(f"grid size must be a power of two, got {self.grid_n}")
        if self.tol is not None and not self.tol >= 0:
            raise UsageError(f"tolerance must be non-negative, got {self.tol}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.suite is not None:
            unknown = [s for s in self.suite if s not in suites.SUITES and s != "all"]
            if unknown:
                raise UsageError(f"unknown suite(s): {', '.join(unknown)}")

    def thermal(self, default_beta: float = 1.0, default_q: float = 0.0) -> ThermalParams:
        beta = default_beta if self.beta is None else self.beta
        q = default_q if self.q is None else self.q
        return ThermalParams(beta, q)


_FILE_KEYS = {"beta": float, "q": float, "c": float, "grid_n": int, "tol": float,
              "suite": str, "output": str, "format": str}


def _split_suites(text: str) -> List[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def read_config_file(path: str) -> Dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FILE_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _split_suites(value) if key == "suite" else _FILE_KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from exc
    return out


def build_config(args: argparse.Namespace) -> Config:
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in ("beta", "q", "c", "grid_n", "tol", "output", "format"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "suite", None) is not None:
        values["suite"] = [s for item in args.suite for s in _split_suites(item)]
    cfg = Config(**values)
    cfg.validate()
    return cfg


# output -------------------------------------------------------------------

def _parts(v):
    if v is None:
        return "", ""
    v = complex(v)
    return repr(v.real), repr(v.imag)


def emit(reports: Sequence[CheckReport], fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps([r.as_dict() for r in reports], indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in reports:
            vr, vi = _parts(r.value)
            orr, oi = _parts(r.oracle_value)
            w.writerow([r.name, vr, vi, orr, oi, repr(float(r.delta)), repr(float(r.tolerance)),
                        "true" if r.passed else "false"])
        return buf.getvalue().encode()
    raise UsageError(f"unknown format {fmt!r}")


def parse_csv(data: bytes) -> List[Dict[str, object]]:
    rows = list(csv.DictReader(io.StringIO(data.decode())))
    out = []
    for row in rows:
        rec: Dict[str, object] = {"name": row["name"], "pass": row["pass"] == "true"}
        for key in CSV_HEADER[1:-1]:
            rec[key] = float(row[key]) if row[key] != "" else None
        out.append(rec)
    return out


def _write(data: bytes, output: Optional[str]) -> None:
    if output in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(output, "wb") as fh:
            fh.write(data)


def _finish(reports: Sequence[CheckReport], cfg: Config) -> int:
    _write(emit(reports, cfg.format), cfg.output)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _tol(cfg: Config, key: str) -> float:
    return suites.TOL[key] if cfg.tol is None else cfg.tol


def _fixture(spec: str, n: Optional[int]):
    if spec == "gaussian":
        return gaussian(n=n)
    if spec == "bump":
        return bump(n=n)
    if os.path.exists(spec):
        return load_fixture(spec)
    raise UsageError(f"fixture must be 'gaussian', 'bump' or a file path, got {spec!r}")


# subcommands --------------------------------------------------------------

def cmd_weyl_eval(args, cfg: Config) -> int:
    tp = cfg.thermal()
    f = _fixture(args.fixture, cfg.grid_n)
    t0 = time.perf_counter()
    val = kms_state(W(f), tp)
    oracle = kms_state(gauge(tp.q, W(f)), ThermalParams(tp.beta, 0.0))
    reports = [make_report("weyl-eval", {"beta": tp.beta, "q": tp.q, "fixture": args.fixture},
                           val, oracle, abs(val - oracle), _tol(cfg, "kms"), t0)]
    if args.gram:
        t0 = time.perf_counter()
        fs = suites.random_fixtures(np.random.default_rng(args.seed), args.gram, cfg.grid_n)
        low = gram_psd_check(fs, tp)
        reports.append(make_report("gram-psd", {"beta": tp.beta, "q": tp.q, "size": args.gram},
                                   low, 0.0, max(0.0, -low), _tol(cfg, "positivity"), t0))
    return _finish(reports, cfg)


def _pair(name: str, n):
    if name == "gaussian":
        return suites.gaussian_pair(n)
    if name == "bump":
        return suites.bump_pair(n)
    raise UsageError(f"unknown pair {name!r}")


def cmd_kms_check(args, cfg: Config) -> int:
    tp = cfg.thermal()
    if args.f and args.g:
        f, g = load_fixture(args.f), load_fixture(args.g)
    else:
        f, g = _pair(args.pair, cfg.grid_n)
    t_grid = np.linspace(-args.t_max, args.t_max, args.points) if args.t_max else None
    rows = kms_residual_rows(f, g, tp, t_grid)
    tol = _tol(cfg, "kms")
    ok = rows.sup <= tol
    summary = {"sup_residual": rows.sup, "tolerance": tol, "pass": bool(ok),
               "beta": tp.beta, "q": tp.q, "t_points": int(rows.t_grid.size)}
    if args.rows:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "abs_F", "residual"])
        for t, a, r in zip(rows.t_grid, rows.abs_F, rows.residual):
            w.writerow([repr(float(t)), repr(float(a)), repr(float(r))])
        _write(buf.getvalue().encode(), args.rows)
    _write((json.dumps(summary, indent=2) + "\n").encode(), cfg.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_npoint(args, cfg: Config) -> int:
    tp = cfg.thermal()
    if not 1 <= args.n <= 8:
        raise UsageError("n must be between 1 and 8")
    fs = suites.random_fixtures(np.random.default_rng(args.seed), args.n, cfg.grid_n)
    t0 = time.perf_counter()
    val = npoint_J(MomentRequest(fs, tp))
    if args.n <= 4:
        oracle = suites._fd_moment(fs, tp)
        delta = rel(val, oracle)
    else:
        oracle, delta = None, 0.0
    report = make_report(f"npoint[n={args.n}]", {"n": args.n, "beta": tp.beta, "q": tp.q,
                                                  "seed": args.seed},
                         val, oracle, delta, _tol(cfg, "moments"), t0)
    return _finish([report], cfg)


def cmd_energy_density(args, cfg: Config) -> int:
    sc = SuiteConfig(betas=(cfg.thermal().beta,), charges=(cfg.thermal().q,),
                     grid_n=cfg.grid_n, tol=cfg.tol)
    reports = [r for r in suites.suite_energy(sc) if not r.name.startswith("energy-decimal")]
    return _finish(reports, cfg)


def cmd_classify_vir(args, cfg: Config) -> int:
    tp = cfg.thermal()
    c = 1.0 if cfg.c is None else cfg.c
    vp = VirasoroParams(c=c)
    reports = []
    if args.e is not None:
        t0 = time.perf_counter()
        try:
            q = vir_classify(args.e, tp, vp)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        back = energy_density(ThermalParams(tp.beta, q))
        reports.append(make_report("classify-vir", {"e": args.e, "beta": tp.beta, "c": c},
                                   q, None, rel(back, args.e), _tol(cfg, "classify"), t0))
    t0 = time.perf_counter()
    qg = q_geo(c, tp.beta)
    eg = energy_density(ThermalParams(tp.beta, qg))
    target = math.pi * c / (12.0 * tp.beta**2)
    reports.append(make_report("q-geo", {"beta": tp.beta, "c": c}, qg, None, rel(eg, target),
                               _tol(cfg, "classify"), t0))
    return _finish(reports, cfg)


def cmd_geo_check(args, cfg: Config) -> int:
    tp = cfg.thermal()
    f = _fixture(args.fixture, cfg.grid_n)
    t0 = time.perf_counter()
    vac = geometric_norm_sq(f, tp, args.method)
    th = thermal_norm_sq(f, tp)
    report = make_report("geo-check", {"beta": tp.beta, "fixture": args.fixture,
                                       "method": args.method},
                         vac, th, rel(vac, th), _tol(cfg, "geometric"), t0)
    return _finish([report], cfg)


def cmd_fock_check(args, cfg: Config) -> int:
    M, L = args.max_mode, args.level
    modes = list(range(-M, M + 1))
    tol = _tol(cfg, "boson" if args.algebra == "boson" else "fermion")
    dev = np.zeros((len(modes), len(modes)))
    if args.algebra == "boson":
        cutoff = args.cutoff if args.cutoff is not None else max(14, L + 2 * M)
        levels = range(0, int(L) + 1)
        check = lambda a, b, lv: fockboson.check_virasoro(a, b, lv, int(cutoff))
        c_fit = fockboson.central_charge(cutoff=int(cutoff))
        c_target = 1.0
    else:
        cutoff = Fraction(args.cutoff) if args.cutoff is not None else \
            max(Fraction(21, 2), Fraction(L) + 2 * M + Fraction(1, 2))
        levels = [Fraction(k, 2) for k in range(0, int(2 * Fraction(L)) + 1)]
        check = lambda a, b, lv: fockfermion.check_virasoro_fermion(a, b, lv, cutoff)
        c_fit = fockfermion.central_charge()
        c_target = 0.5
    try:
        for i, a in enumerate(modes):
            for j, b in enumerate(modes):
                dev[i, j] = max(check(a, b, lv) for lv in levels)
    except fockboson.WindowError as exc:
        raise UsageError(str(exc)) from exc
    ok = bool(dev.max() <= tol and abs(c_fit - c_target) <= tol)
    out = {"algebra": args.algebra, "max_mode": M, "level": float(Fraction(L)),
           "cutoff": float(cutoff), "modes": modes, "deviations": dev.tolist(),
           "central_charge": c_fit, "tolerance": tol, "pass": ok}
    _write((json.dumps(out, indent=2) + "\n").encode(), cfg.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fermion_check(args, cfg: Config) -> int:
    sc = SuiteConfig(betas=(cfg.thermal().beta,), grid_n=cfg.grid_n, tol=cfg.tol)
    return _finish(suites.suite_fermion_kms(sc), cfg)


def cmd_run_suite(args, cfg: Config) -> int:
    names = ["all"] if cfg.suite is None else cfg.suite
    kwargs = {"grid_n": cfg.grid_n, "tol": cfg.tol}
    if cfg.beta is not None:
        kwargs["betas"] = (cfg.beta,)
    if cfg.q is not None:
        kwargs["charges"] = (cfg.q,)
    if cfg.c is not None:
        kwargs["central_charges"] = (cfg.c,)
    reports = suites.run_suites(names, SuiteConfig(**kwargs))
    return _finish(reports, cfg)


# parser -------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--beta", type=float, help="inverse temperature")
    common.add_argument("--q", type=float, help="charge density")
    common.add_argument("--c", type=float, help="central charge (>= 1)")
    common.add_argument("--grid-n", dest="grid_n", type=int, help="samples per test function")
    common.add_argument("--tol", type=float, help="override every check tolerance")
    common.add_argument("--suite", action="append", help="suite name(s), comma separated")
    common.add_argument("--output", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="report format")

    p = argparse.ArgumentParser(prog="cft-thermal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("weyl-eval", parents=[common], help="evaluate phi^q(W(f))")
    s.add_argument("--fixture", default="gaussian")
    s.add_argument("--gram", type=int, default=0, help="also check a Gram matrix of this size")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_weyl_eval)

    s = sub.add_parser("kms-check", parents=[common], help="KMS boundary residuals")
    s.add_argument("--pair", default="gaussian", choices=("gaussian", "bump"))
    s.add_argument("--f", help="fixture file for f")
    s.add_argument("--g", help="fixture file for g")
    s.add_argument("--t-max", dest="t_max", type=float, default=5.0)
    s.add_argument("--points", type=int, default=41)
    s.add_argument("--rows", help="write per-t CSV rows here")
    s.set_defaults(func=cmd_kms_check)

    s = sub.add_parser("npoint", parents=[common], help="current n-point function")
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_npoint)

    s = sub.add_parser("energy-density", parents=[common], help="energy density, two routes")
    s.set_defaults(func=cmd_energy_density)

    s = sub.add_parser("classify-vir", parents=[common], help="energy density -> |q|")
    s.add_argument("--e", type=float, help="energy density to classify")
    s.set_defaults(func=cmd_classify_vir)

    s = sub.add_parser("geo-check", parents=[common], help="geometric-state identity")
    s.add_argument("--fixture", default="bump")
    s.add_argument("--method", default="pullback", choices=("pullback", "image"))
    s.set_defaults(func=cmd_geo_check)

    s = sub.add_parser("fock-check", parents=[common], help="Virasoro brackets on Fock space")
    s.add_argument("--algebra", choices=("boson", "fermion"), default="boson")
    s.add_argument("--max-mode", dest="max_mode", type=int, default=3)
    s.add_argument("--level", type=Fraction, default=Fraction(8))
    s.add_argument("--cutoff", type=Fraction)
    s.set_defaults(func=cmd_fock_check)

    s = sub.add_parser("fermion-check", parents=[common], help="fermion thermal KMS relation")
    s.set_defaults(func=cmd_fermion_check)

    s = sub.add_parser("run-suite", parents=[common], help="run named acceptance suites")
    s.set_defaults(func=cmd_run_suite)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = build_config(args)
        if cfg.grid_n is not None:
            os.environ["CFT_THERMAL_GRID_N"] = str(cfg.grid_n)
        return args.func(args, cfg)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
