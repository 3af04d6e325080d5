"""Named verification suites producing :class:`CheckReport` records."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import fockboson, fockfermion
from .kmscheck import clustering_check, kms_residual
from .moments import (MomentRequest, _neville_at_zero, cocycle_rR, covariance_J, energy_density,
                      energy_density_momentum, energy_density_pointsplit,
                      generating_functional, geometric_energy_density, npoint_J,
                      q_geo, vir_classify)
from .oneparticle import ThermalParams, geometric_norm_sq, thermal_norm_sq
from .sigfn import (Diffeomorphism, GridFunction, bump, bump_profile, gaussian, integral)
from .weyl import gram_psd_check

BETAS = (0.5, 1.0, 2.0)
CHARGES_KMS = (0.0, 1.3)
CHARGES = (0.0, 1.0)
CENTRAL_CHARGES = (1.0, 1.5, 2.0)
T_GRID = np.linspace(-5.0, 5.0, 41)

TOL = {
    "kms": 1e-7,
    "geometric": 1e-6,
    "energy-bump": 1e-4,
    "energy-momentum": 1e-8,
    "energy-decimal": 5e-8,
    "cocycle": 1e-7,
    "classify": 1e-12,
    "classify-decimal": 5e-7,
    "boson": 1e-10,
    "fermion": 1e-10,
    "car": 1e-14,
    "partition": 0.0,
    "trace": 1e-8,
    "moments": 1e-5,
    "odd": 0.0,
    "positivity": 1e-9,
    "clustering": 1e-3,
    "fermion-kms": 1e-8,
}


@dataclass
class CheckReport:
    name: str
    inputs: Dict[str, object]
    value: object
    oracle_value: object
    delta: float
    tolerance: float
    passed: bool
    runtime_ms: int = 0

    def as_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "value": _jsonable(self.value),
            "oracle_value": _jsonable(self.oracle_value),
            "delta": float(self.delta),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "runtime_ms": int(self.runtime_ms),
        }


def _jsonable(v):
    if v is None:
        return None
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        if v.imag == 0.0:
            return v.real
        return {"re": v.real, "im": v.imag}
    return float(v)


def make_report(name: str, inputs: Dict[str, object], value, oracle, delta: float,
                tolerance: float, started: float) -> CheckReport:
    delta = float(delta)
    ok = bool(np.isfinite(delta) and delta <= tolerance)
    ms = int(round((time.perf_counter() - started) * 1000))
    return CheckReport(name, inputs, value, oracle, delta, tolerance, ok, ms)


def rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


@dataclass(frozen=True)
class SuiteConfig:
    betas: Tuple[float, ...] = BETAS
    charges: Optional[Tuple[float, ...]] = None
    central_charges: Tuple[float, ...] = CENTRAL_CHARGES
    grid_n: Optional[int] = None
    tol: Optional[float] = None
    seed: int = 20240611

    def tolerance(self, key: str) -> float:
        return TOL[key] if self.tol is None else self.tol

    def qs(self, default: Tuple[float, ...]) -> Tuple[float, ...]:
        return default if self.charges is None else self.charges


# fixtures -----------------------------------------------------------------

def gaussian_pair(n=None) -> Tuple[GridFunction, GridFunction]:
    return gaussian(0.0, 1.0, n=n), gaussian(0.5, 0.7, 0.8, n=n)


def bump_pair(n=None) -> Tuple[GridFunction, GridFunction]:
    return bump(0.0, 1.0, n=n), bump(0.3, 0.6, 1.5, n=n)


def geometric_bumps(n=None) -> List[GridFunction]:
    return [bump(0.0, 1.0, n=n), bump(0.3, 0.5, n=n), bump(-0.2, 0.8, 0.7, n=n)]


def random_fixtures(rng: np.random.Generator, count: int, n=None,
                    window: Tuple[float, float] = (-4.0, 4.0)) -> List[GridFunction]:
    """Random bumps sharing one grid, supported inside ``[-2, 2]``."""
    n = 4096 if n is None else n
    x0, width = window[0], window[1] - window[0]
    h = width / n
    x = x0 + h * np.arange(n)
    out = []
    for _ in range(count):
        c = rng.uniform(-1.0, 1.0)
        w = rng.uniform(0.4, 1.0)
        a = rng.uniform(-1.5, 1.5)
        out.append(GridFunction.from_samples(x0, h, a * bump_profile((x - c) / w)))
    return out


# suites -------------------------------------------------------------------

def suite_kms(cfg: SuiteConfig) -> List[CheckReport]:
    reports = []
    for label, pair in (("gaussian", gaussian_pair(cfg.grid_n)), ("bump", bump_pair(cfg.grid_n))):
        f, g = pair
        for beta in cfg.betas:
            for q in cfg.qs(CHARGES_KMS):
                t0 = time.perf_counter()
                r = kms_residual(f, g, ThermalParams(beta, q), T_GRID)
                reports.append(make_report(f"kms[{label},beta={beta},q={q}]",
                                           {"pair": label, "beta": beta, "q": q, "t_points": 41},
                                           r, 0.0, r, cfg.tolerance("kms"), t0))
    return reports


def suite_geometric(cfg: SuiteConfig) -> List[CheckReport]:
    reports = []
    for i, f in enumerate(geometric_bumps(cfg.grid_n)):
        for beta in cfg.betas:
            t0 = time.perf_counter()
            tp = ThermalParams(beta)
            vac = geometric_norm_sq(f, tp)
            th = thermal_norm_sq(f, tp)
            reports.append(make_report(f"geometric[bump{i},beta={beta}]",
                                       {"fixture": i, "beta": beta}, vac, th, rel(vac, th),
                                       cfg.tolerance("geometric"), t0))
    return reports


def suite_energy(cfg: SuiteConfig) -> List[CheckReport]:
    reports = []
    for beta in cfg.betas:
        for q in cfg.qs(CHARGES):
            tp = ThermalParams(beta, q)
            exact = energy_density(tp)
            t0 = time.perf_counter()
            widths = tuple(beta * w for w in (0.2, 0.1, 0.05))
            ps = energy_density_pointsplit(tp, widths, n=cfg.grid_n)
            reports.append(make_report(f"energy-bump[beta={beta},q={q}]",
                                       {"beta": beta, "q": q, "widths": list(widths)},
                                       ps.value, exact, rel(ps.value, exact),
                                       cfg.tolerance("energy-bump"), t0))
            t0 = time.perf_counter()
            m = energy_density_momentum(tp)
            reports.append(make_report(f"energy-momentum[beta={beta},q={q}]",
                                       {"beta": beta, "q": q}, m, exact, rel(m, exact),
                                       cfg.tolerance("energy-momentum"), t0))
    t0 = time.perf_counter()
    e = energy_density(ThermalParams(1.0, 0.0))
    reports.append(make_report("energy-decimal[beta=1,q=0]", {"beta": 1.0, "q": 0.0}, e,
                               0.2617994, abs(e - 0.2617994), cfg.tolerance("energy-decimal"), t0))
    return reports


def suite_cocycle(cfg: SuiteConfig) -> List[CheckReport]:
    reports = []
    f = bump(0.1, 0.8, n=cfg.grid_n)
    mass = integral(f)
    for c in cfg.central_charges:
        for beta in cfg.betas:
            t0 = time.perf_counter()
            r = cocycle_rR(Diffeomorphism.exponential(beta), f, c)
            target = math.pi * c / (12.0 * beta**2) * mass
            reports.append(make_report(f"cocycle[c={c},beta={beta}]", {"c": c, "beta": beta},
                                       r, target, rel(r, target), cfg.tolerance("cocycle"), t0))
    return reports


def suite_classify(cfg: SuiteConfig) -> List[CheckReport]:
    reports = []
    for beta in cfg.betas:
        t0 = time.perf_counter()
        tp = ThermalParams(beta)
        qs = np.linspace(0.0, 5.0, 101)
        err = max(abs(vir_classify(math.pi / (12 * beta**2) + q * q / 2, tp) - q) for q in qs)
        reports.append(make_report(f"classify-roundtrip[beta={beta}]",
                                   {"beta": beta, "q_range": [0.0, 5.0], "points": 101},
                                   err, 0.0, err, cfg.tolerance("classify"), t0))
    t0 = time.perf_counter()
    qg = q_geo(2.0, 1.0)
    reports.append(make_report("classify-qgeo[c=2,beta=1]", {"c": 2.0, "beta": 1.0}, qg,
                               0.723601, abs(qg - 0.723601), cfg.tolerance("classify-decimal"), t0))
    t0 = time.perf_counter()
    qg_exact = math.sqrt(math.pi / 6.0)
    reports.append(make_report("classify-qgeo-closed[c=2,beta=1]", {"c": 2.0, "beta": 1.0},
                               qg, qg_exact, abs(qg - qg_exact), cfg.tolerance("classify"), t0))
    t0 = time.perf_counter()
    e = energy_density(ThermalParams(1.0, qg))
    reports.append(make_report("classify-egeo[c=2,beta=1]", {"c": 2.0, "beta": 1.0}, e,
                               0.523599, abs(e - 0.523599), cfg.tolerance("classify-decimal"), t0))
    t0 = time.perf_counter()
    eg = geometric_energy_density(2.0, 1.0)
    reports.append(make_report("classify-egeo-closed[c=2,beta=1]", {"c": 2.0, "beta": 1.0}, e,
                               eg, abs(e - eg), cfg.tolerance("classify"), t0))
    return reports


def suite_boson(cfg: SuiteConfig) -> List[CheckReport]:
    t0 = time.perf_counter()
    worst = 0.0
    for m1 in range(-3, 4):
        for m2 in range(-3, 4):
            for level in range(0, 9):
                worst = max(worst, fockboson.check_virasoro(m1, m2, level, 14))
    reports = [make_report("boson-virasoro[N=14]",
                           {"max_mode": 3, "max_level": 8, "cutoff": 14}, worst, 0.0, worst,
                           cfg.tolerance("boson"), t0)]
    t0 = time.perf_counter()
    c = fockboson.central_charge(cutoff=14)
    reports.append(make_report("boson-central-charge", {"modes": [2, 3, 4]}, c, 1.0,
                               abs(c - 1.0), cfg.tolerance("boson"), t0))
    return reports


FERMION_BRACKET_CUTOFF = Fraction(29, 2)


def suite_fermion(cfg: SuiteConfig) -> List[CheckReport]:
    t0 = time.perf_counter()
    worst = 0.0
    for m1 in range(-3, 4):
        for m2 in range(-3, 4):
            for l2 in range(0, 17):
                worst = max(worst, fockfermion.check_virasoro_fermion(
                    m1, m2, Fraction(l2, 2), FERMION_BRACKET_CUTOFF))
    reports = [make_report("fermion-virasoro[R=29/2]",
                           {"max_mode": 3, "max_level": 8, "cutoff": 14.5}, worst, 0.0, worst,
                           cfg.tolerance("fermion"), t0)]
    t0 = time.perf_counter()
    c = fockfermion.central_charge()
    reports.append(make_report("fermion-central-charge", {"modes": [2, 3, 4]}, c, 0.5,
                               abs(c - 0.5), cfg.tolerance("fermion"), t0))
    t0 = time.perf_counter()
    v = float(fockfermion.vacuum_two_point_L(2))
    reports.append(make_report("fermion-L2L-2", {"m": 2}, v, 0.25, abs(v - 0.25),
                               cfg.tolerance("fermion"), t0))
    t0 = time.perf_counter()
    car = fockfermion.check_car(Fraction(21, 2))
    reports.append(make_report("fermion-car[R=21/2]", {"cutoff": 10.5}, car, 0.0, car,
                               cfg.tolerance("car"), t0))
    return reports


def suite_partition(cfg: SuiteConfig) -> List[CheckReport]:
    t0 = time.perf_counter()
    bad = max(abs(fockboson.partition_count(n) - sum(1 for _ in fockboson.partitions(n)))
              for n in range(31))
    reports = [make_report("partition-count[n<=30]", {"max_n": 30}, bad, 0, bad,
                           cfg.tolerance("partition"), t0)]
    t0 = time.perf_counter()
    a, b = fockboson.trace_heat(1.0, 30), fockboson.trace_heat(1.0, 60)
    reports.append(make_report("trace-heat[s=1,N=30..60]", {"s": 1.0, "N": [30, 60]}, a, b,
                               abs(a - b), cfg.tolerance("trace"), t0))
    return reports


def _fd_moment(fs: Sequence[GridFunction], tp: ThermalParams, step: float = 0.05,
               levels: int = 3) -> complex:
    """``(-i)^n d^n/ds_1..ds_n`` of the generating functional at ``s = 0``.

    Products of central differences are Richardson-extrapolated in ``step^2``.
    """
    n = len(fs)
    estimates = []
    steps = [step * 2**j for j in range(levels)]
    for s in steps:
        total = 0j
        for signs in np.ndindex(*(2,) * n):
            sv = [s if b == 0 else -s for b in signs]
            parity = (-1) ** sum(signs)
            total += parity * generating_functional(fs, sv, tp)
        estimates.append(total / (2 * s) ** n)
    xs = [s * s for s in steps]
    re, _ = _neville_at_zero(xs, [e.real for e in estimates])
    im, _ = _neville_at_zero(xs, [e.imag for e in estimates])
    return (-1j) ** n * complex(re, im)


def suite_moments(cfg: SuiteConfig) -> List[CheckReport]:
    rng = np.random.default_rng(cfg.seed)
    reports = []
    fs = random_fixtures(rng, 4, cfg.grid_n)
    for q in cfg.qs(CHARGES):
        tp = ThermalParams(1.0, q)
        # relative errors are taken against max(|oracle|, prod_k phi(J(f_k)^2)^(1/2))
        scales = np.sqrt([abs(covariance_J(f, f, tp)) for f in fs])
        for k in range(1, 5):
            t0 = time.perf_counter()
            val = npoint_J(MomentRequest(fs[:k], tp))
            fd = _fd_moment(fs[:k], tp)
            delta = abs(val - fd) / max(abs(fd), scales[:k].prod())
            reports.append(make_report(f"npoint[n={k},q={q}]", {"n": k, "beta": 1.0, "q": q},
                                       val, fd, delta, cfg.tolerance("moments"), t0))
    t0 = time.perf_counter()
    odd = npoint_J(MomentRequest(fs[:3], ThermalParams(1.0, 0.0)))
    reports.append(make_report("npoint-odd[n=3,q=0]", {"n": 3, "q": 0.0}, odd, 0.0, abs(odd),
                               cfg.tolerance("odd"), t0))
    return reports


def suite_positivity(cfg: SuiteConfig, draws: int = 20) -> List[CheckReport]:
    rng = np.random.default_rng(cfg.seed + 1)
    sets = [random_fixtures(rng, 6, cfg.grid_n) for _ in range(draws)]
    reports = []
    for beta in cfg.betas:
        for q in cfg.qs(CHARGES):
            t0 = time.perf_counter()
            tp = ThermalParams(beta, q)
            low = min(gram_psd_check(fs, tp) for fs in sets)
            reports.append(make_report(f"gram-psd[beta={beta},q={q}]",
                                       {"beta": beta, "q": q, "draws": draws, "size": 6},
                                       low, 0.0, max(0.0, -low), cfg.tolerance("positivity"), t0))
    return reports


def suite_clustering(cfg: SuiteConfig) -> List[CheckReport]:
    f = bump(0.0, 0.5, n=cfg.grid_n)
    g = bump(0.2, 0.5, 0.8, n=cfg.grid_n)
    reports = []
    for beta in cfg.betas:
        for q in cfg.qs((0.0,)):
            t0 = time.perf_counter()
            T = 50.0 * beta
            d = clustering_check(f, g, ThermalParams(beta, q), T)
            reports.append(make_report(f"clustering[beta={beta},q={q}]",
                                       {"beta": beta, "q": q, "T": T}, d, 0.0, d,
                                       cfg.tolerance("clustering"), t0))
    return reports


def suite_fermion_kms(cfg: SuiteConfig) -> List[CheckReport]:
    f, g = gaussian_pair(cfg.grid_n)
    reports = []
    for beta in cfg.betas:
        t0 = time.perf_counter()
        r = fockfermion.fermion_kms_residual(f, g, ThermalParams(beta), T_GRID)
        reports.append(make_report(f"fermion-kms[beta={beta}]", {"beta": beta, "t_points": 41},
                                   r, 0.0, r, cfg.tolerance("fermion-kms"), t0))
    return reports


SUITES: Dict[str, Callable[[SuiteConfig], List[CheckReport]]] = {
    "kms": suite_kms,
    "geometric": suite_geometric,
    "energy": suite_energy,
    "cocycle": suite_cocycle,
    "classify": suite_classify,
    "boson": suite_boson,
    "fermion": suite_fermion,
    "partition": suite_partition,
    "moments": suite_moments,
    "positivity": suite_positivity,
    "clustering": suite_clustering,
    "fermion-kms": suite_fermion_kms,
}


def run_suites(names: Sequence[str], cfg: SuiteConfig) -> List[CheckReport]:
    unknown = [n for n in names if n not in SUITES and n != "all"]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    if "all" in names:
        names = list(SUITES)
    reports: List[CheckReport] = []
    for name in names:
        reports.extend(SUITES[name](cfg))
    return reports
