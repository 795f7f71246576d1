"""The exchange's side of the problem: fee revenue under the market maker's
best response, and its maximization over a grid of tick pairs.

The revenue at the working point is ``v = c * E[N_a + N_b]`` over the
horizon.  Two routes compute it: ``"pde"`` solves the linear backward
equation for the expected fill counts next to the value function (same
cells, same steps), ``"mc"`` simulates paths under the solved policy and
uses the compensator of the fills.  ``"both"`` runs the two and insists they
agree.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalAssertionError
from .hjb.grid import build_grid
from .hjb.model import ModelParams
from .hjb.solver import solve
from .sim import SimConfig, exchange_revenue_estimators, run_paths
from .zones import TickConfig, eta_for_tick

log = logging.getLogger(__name__)

SCAN_LO = 0.0045
SCAN_HI = 0.05
SCAN_STEP = 0.0005
WORKING_PRICE = 10.5
METHODS = ("pde", "mc", "both")

CSV_COLUMNS = ("alpha_a", "alpha_b", "phi_minus", "v", "v_se", "h_mm", "Na_mean", "Nb_mean")


def large_tick_bounds(eta_0: float, alpha_0: float) -> float:
    """Smallest tick whose scaled eta stays within the large-tick cap of 1/2."""
    if not 0 <= eta_0 <= 0.5:
        raise DomainError(f"eta_0 must lie in [0, 1/2], got {eta_0}")
    if not alpha_0 > 0:
        raise DomainError(f"alpha_0 must be positive, got {alpha_0}")
    return alpha_0 * (eta_0 / 0.5) ** 2


def tick_axis(lo: float = SCAN_LO, hi: float = SCAN_HI, step: float = SCAN_STEP) -> tuple:
    """Ticks ``lo, lo + step, ..., hi`` as exact multiples of ``step``."""
    if not (lo > 0 and hi >= lo and step > 0):
        raise ConfigurationError(f"bad tick range [{lo}, {hi}] step {step}")
    k0 = round(lo / step)
    k1 = round(hi / step)
    return tuple(round(k * step, 12) for k in range(k0, k1 + 1))


def half_unit_axis(lo: float = SCAN_LO, hi: float = SCAN_HI) -> tuple:
    """Ticks ``0.5 / n`` in ``[lo, hi]``, increasing.

    These are exactly the ticks that put the working price 10.5 (and every
    half unit) on the grid.
    """
    if not (lo > 0 and hi >= lo):
        raise ConfigurationError(f"bad tick range [{lo}, {hi}]")
    n_hi = math.floor(0.5 / lo + 1e-9)
    n_lo = math.ceil(0.5 / hi - 1e-9)
    return tuple(0.5 / n for n in range(n_hi, n_lo - 1, -1))


def _on_grid(alpha: float) -> bool:
    r = 0.5 / alpha
    return abs(r - round(r)) < 1e-9 * r


@dataclass(frozen=True)
class ScanSpec:
    """Which tick pairs to evaluate, and how.

    ``symmetric`` pairs every ask tick with itself (``alpha_b`` is then
    ignored).  ``on_grid`` keeps only ticks with ``0.5 / alpha`` integer, so
    the working price sits on the grid.  The price mesh of each solve is
    ``min(alpha_a, alpha_b) / mesh_div``.
    """

    alpha_a: tuple = field(default_factory=tick_axis)
    alpha_b: tuple = field(default_factory=tick_axis)
    phi_minus: tuple = (0.0,)
    symmetric: bool = False
    on_grid: bool = False
    large_tick: bool = True
    method: str = "pde"
    eta_0: float = 0.3
    alpha_0: float = 0.01
    mesh_div: float = 8.0
    error_estimate: bool = False
    S0: float = WORKING_PRICE
    n_paths: int = 2000
    dt_sim: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        if any(not a > 0 for a in (*self.alpha_a, *self.alpha_b)):
            raise ConfigurationError("ticks must be positive")
        if not self.phi_minus:
            raise ConfigurationError("phi_minus list is empty")
        if not self.mesh_div > 0:
            raise ConfigurationError("mesh_div must be positive")

    def points(self) -> tuple[list, list]:
        """Retained ``(i, j, alpha_a, alpha_b)`` and rejected ``(alpha_a, alpha_b, reason)``."""
        keep, rejected = [], []
        if self.symmetric:
            pairs = [(i, i, a, a) for i, a in enumerate(self.alpha_a)]
        else:
            pairs = [(i, j, a, b) for i, a in enumerate(self.alpha_a)
                     for j, b in enumerate(self.alpha_b)]
        for i, j, a, b in pairs:
            reason = None
            if self.on_grid and not (_on_grid(a) and _on_grid(b)):
                reason = "0.5/alpha is not an integer"
            elif self.large_tick and max(eta_for_tick(self.eta_0, self.alpha_0, x)
                                         for x in (a, b)) > 0.5:
                reason = "small-tick regime (eta > 1/2)"
            if reason is None:
                keep.append((i, j, a, b))
            else:
                rejected.append((a, b, reason))
        return keep, rejected


@dataclass
class PlatformValue:
    v: float
    se: float
    h_mm: float
    Na: float
    Nb: float
    method: str
    dS: float
    dt: float
    elapsed: float
    v_pde: float = math.nan
    v_mc: float = math.nan


def point_seed(seed: int, i: int, j: int) -> int:
    """Deterministic per-point seed derived from ``(seed, i, j)``."""
    return int(np.random.SeedSequence([seed, i, j]).generate_state(1, np.uint64)[0] >> 1)


def platform_value(alpha_a: float, alpha_b: float, params: ModelParams, method: str = "pde", *,
                   eta_0: float = 0.3, alpha_0: float = 0.01, S0: float = WORKING_PRICE,
                   mesh_div: float = 8.0, error_estimate: bool = False, n_paths: int = 2000,
                   dt_sim: float = 1e-3, seed: int = 0) -> PlatformValue:
    """Exchange revenue and market-maker value at ``(t=0, S0, q=0)``.

    For ``"pde"`` the standard error is zero unless ``error_estimate`` asks
    for the gap to a solve on a twice coarser mesh, which then stands in for
    the discretization error.
    """
    if method not in METHODS:
        raise ConfigurationError(f"method must be one of {METHODS}, got {method!r}")
    for a in (alpha_a, alpha_b):
        if eta_for_tick(eta_0, alpha_0, a) > 0.5:
            raise DomainError(f"tick {a} is below the large-tick bound "
                              f"{large_tick_bounds(eta_0, alpha_0)}")
    t0 = time.perf_counter()
    cfg = TickConfig.from_ticks(alpha_a, alpha_b, eta_0, alpha_0)
    dS = min(alpha_a, alpha_b) / mesh_div
    grid = build_grid(cfg, params, S0, dS, periodic=True)
    want_pde = method != "mc"
    vg, _ = solve(cfg, params, grid, fee_flow=want_pde)
    h = vg.value_at(S0)
    out = PlatformValue(math.nan, math.nan, h, math.nan, math.nan, method, dS, grid.dt, 0.0)
    if want_pde:
        na, nb = vg.fills_at(S0)
        out.v_pde = vg.flow_at(S0)
        out.v, out.se, out.Na, out.Nb = out.v_pde, 0.0, na, nb
        if error_estimate:
            coarse = build_grid(cfg, params, S0, 2 * dS, periodic=True)
            vc, _ = solve(cfg, params, coarse, fee_flow=True)
            out.se = abs(out.v_pde - vc.flow_at(S0))
    if method != "pde":
        res = run_paths(vg, cfg, params, SimConfig(dt_sim=dt_sim, n_paths=n_paths, seed=seed,
                                                   S0=S0))
        _, rate = exchange_revenue_estimators(res)
        out.v_mc = rate.mean
        out.v, out.se = rate.mean, rate.se
        out.Na = res.mean_se(res.N_a)[0]
        out.Nb = res.mean_se(res.N_b)[0]
        if method == "both" and abs(out.v_mc - out.v_pde) > 3 * rate.se:
            raise NumericalAssertionError(
                f"mc revenue {out.v_mc:.4f} +/- {rate.se:.4f} disagrees with pde "
                f"{out.v_pde:.4f} at ticks ({alpha_a}, {alpha_b})")
    out.elapsed = time.perf_counter() - t0
    return out


@dataclass
class ScanRow:
    alpha_a: float
    alpha_b: float
    phi_minus: float
    v: float
    v_se: float
    h_mm: float
    Na_mean: float
    Nb_mean: float
    elapsed: float = 0.0


@dataclass
class ScanResult:
    spec: ScanSpec
    rows: list
    rejected: list

    def select(self, phi_minus: float | None = None) -> list:
        if phi_minus is None:
            return list(self.rows)
        return [r for r in self.rows if abs(r.phi_minus - phi_minus) < 1e-15]

    def argmax(self, phi_minus: float | None = None, key: str = "v") -> ScanRow:
        """Row with the largest ``key``; the first in scan order wins a tie."""
        rows = self.select(phi_minus)
        if not rows:
            raise ConfigurationError("no rows for the requested phi_minus")
        return max(rows, key=lambda r: getattr(r, key))

    def lookup(self, alpha_a: float, alpha_b: float, phi_minus: float) -> ScanRow:
        for r in self.rows:
            if (abs(r.alpha_a - alpha_a) < 1e-12 and abs(r.alpha_b - alpha_b) < 1e-12
                    and abs(r.phi_minus - phi_minus) < 1e-15):
                return r
        raise KeyError((alpha_a, alpha_b, phi_minus))

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([repr(float(getattr(r, k))) for k in CSV_COLUMNS])

    def argmax_summary(self) -> dict:
        out = {"method": self.spec.method, "n_points": len(self.rows),
               "n_rejected": len(self.rejected), "argmax": []}
        for phi in self.spec.phi_minus:
            if not self.select(phi):
                continue
            best_v = self.argmax(phi, "v")
            best_h = self.argmax(phi, "h_mm")
            out["argmax"].append({"phi_minus": phi, "v": asdict(best_v),
                                  "h_mm": asdict(best_h)})
        return out

    def write_argmax(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.argmax_summary(), indent=2) + "\n")


def grid_search(spec: ScanSpec, params: ModelParams,
                progress: Callable[[ScanRow], None] | None = None) -> ScanResult:
    """Evaluate every retained tick pair for every ``phi_minus`` in the spec."""
    keep, rejected = spec.points()
    if not keep:
        raise ConfigurationError("every point of the scan was rejected")
    for a, b, why in rejected:
        log.info("skipping (%g, %g): %s", a, b, why)
    rows = []
    for phi in spec.phi_minus:
        p = replace(params, phi_minus=phi)
        for i, j, a, b in keep:
            pv = platform_value(a, b, p, spec.method, eta_0=spec.eta_0, alpha_0=spec.alpha_0,
                                S0=spec.S0, mesh_div=spec.mesh_div,
                                error_estimate=spec.error_estimate, n_paths=spec.n_paths,
                                dt_sim=spec.dt_sim, seed=point_seed(spec.seed, i, j))
            if pv.v < 0:
                raise NumericalAssertionError(f"negative revenue {pv.v} at ({a}, {b})")
            row = ScanRow(a, b, phi, pv.v, pv.se, pv.h_mm, pv.Na, pv.Nb, pv.elapsed)
            rows.append(row)
            if progress is not None:
                progress(row)
    return ScanResult(spec, rows, rejected)
