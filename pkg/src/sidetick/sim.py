"""Monte Carlo simulation of the market under a solved quoting policy.

Each step moves the efficient price by a Gaussian increment, lets the fair
prices catch up through the zone rule, reads the presence flags from the
stored value slices and samples at most one fill per side.  Presence flags
come from the sign of the trade gain interpolated linearly between the two
price nodes bracketing ``S``; the fee-flow equation of the solver averages
the same interpolant over each node's cell, so both describe one policy.

Paths draw from independent generators seeded by ``(seed, path index)``,
which makes a result independent of how paths are batched.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numba as nb
import numpy as np

from .errors import ConfigurationError, DomainError
from .hjb.model import ModelParams
from .hjb.solver import ValueGrid
from .zones import TickConfig, Transaction, fair_index_update

log = logging.getLogger(__name__)

#: largest tolerated share of steps spent outside a non-periodic grid
MAX_FLAGGED_SHARE = 1e-3

# per-path outputs of the kernel
_X, _Q, _S, _NA, _NB, _PEN, _RATE, _QAVG, _QMIN, _QMAX, _FLAG, _NLA, _NLB = range(13)
_N_OUT = 13


@dataclass
class SimConfig:
    """Step size, path count, seed and initial state of a simulation.

    ``S_a0``/``S_b0`` default to the ticks nearest ``S0``.  ``log_changes``
    keeps up to ``max_changes`` fair-price changes per side for the first
    ``log_paths`` paths.
    """

    dt_sim: float = 1e-3
    n_paths: int = 1000
    seed: int = 0
    S0: float = 10.5
    S_a0: float | None = None
    S_b0: float | None = None
    Q0: int = 0
    T: float | None = None
    log_changes: bool = False
    log_paths: int = 1
    max_changes: int = 200_000

    def __post_init__(self):
        if not self.dt_sim > 0:
            raise ConfigurationError(f"dt_sim must be positive, got {self.dt_sim}")
        if self.n_paths < 1:
            raise ConfigurationError(f"n_paths must be >= 1, got {self.n_paths}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")


@dataclass
class MarketState:
    t: float
    S: float
    S_a: float
    S_b: float
    Q: int
    X: float = 0.0
    N_a: int = 0
    N_b: int = 0
    changes: list = field(default_factory=list)


@dataclass
class ChangeLog:
    """Fair-price changes of one path with the efficient price at the step they happened."""

    times: np.ndarray
    prices: np.ndarray
    sides: np.ndarray        # 'a' / 'b'
    S_at: np.ndarray
    step_move: np.ndarray    # |S increment| of the step of the change
    initial: tuple[float, float] = (math.nan, math.nan)

    def transactions(self) -> list[Transaction]:
        """Changes as transactions, preceded by the initial ask and bid at t = 0."""
        rows = [Transaction(0.0, self.initial[0], "a"), Transaction(0.0, self.initial[1], "b")]
        rows += [Transaction(float(t), float(p), str(s))
                 for t, p, s in zip(self.times, self.prices, self.sides)]
        return rows


@dataclass
class SimResult:
    """Per-path outcomes and their means with standard errors."""

    mm_objective: np.ndarray
    revenue_count: np.ndarray
    revenue_rate: np.ndarray
    N_a: np.ndarray
    N_b: np.ndarray
    Q_T: np.ndarray
    X_T: np.ndarray
    S_T: np.ndarray
    Q_mean: np.ndarray
    Q_min: np.ndarray
    Q_max: np.ndarray
    flagged_steps: np.ndarray
    n_steps: int
    dt_sim: float
    c: float
    logs: list = field(default_factory=list)
    log_overflow: int = 0

    @property
    def n_paths(self) -> int:
        return len(self.mm_objective)

    @property
    def kept(self) -> np.ndarray:
        return self.flagged_steps == 0

    def mean_se(self, x: np.ndarray) -> tuple[float, float]:
        x = np.asarray(x, dtype=float)[self.kept]
        if x.size == 0:
            return math.nan, math.nan
        se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
        return float(np.sum(x) / x.size), se

    def summary(self) -> dict:
        out = {"n_paths": self.n_paths, "n_kept": int(self.kept.sum()),
               "n_steps": self.n_steps, "dt_sim": self.dt_sim, "c": self.c,
               "flagged_share": float(self.flagged_steps.sum() / (self.n_paths * self.n_steps))}
        for name in ("mm_objective", "revenue_count", "revenue_rate", "N_a", "N_b", "Q_T",
                     "Q_mean"):
            m, se = self.mean_se(getattr(self, name))
            out[name] = {"mean": m, "se": se}
        return out


# ---------------------------------------------------------------------------
# policy lookup


@dataclass
class PolicyTables:
    """Flat arrays the path kernel needs to evaluate presence flags."""

    s: np.ndarray
    period: float          # 0 for a non-periodic grid
    ticks_a: int
    ticks_b: int
    idx_a: np.ndarray
    idx_b: np.ndarray
    of_full: np.ndarray
    w: np.ndarray
    times: np.ndarray
    q_max: int

    @classmethod
    def from_values(cls, vg: ValueGrid) -> "PolicyTables":
        g = vg.grid
        return cls(g.s, g.period or 0.0, g.sides[0].period_ticks, g.sides[1].period_ticks,
                   g.sides[0].idx, g.sides[1].idx, vg.layout.of_full.astype(np.int64),
                   vg.w, vg.times, g.q_max)

    @classmethod
    def empty(cls, q_max: int) -> "PolicyTables":
        z2 = np.zeros((1, 2), dtype=np.int64)
        return cls(np.zeros(1), 0.0, 0, 0, z2, z2, np.zeros((1, 2, 2), dtype=np.int64),
                   np.zeros((1, 1, 2 * q_max + 1)), np.zeros(1), q_max)


@nb.njit(cache=True)
def _locate(s, period, S, hint):
    """(node n with s[n] <= x < s[n+1], period shift); n = -1 / N-1 past the ends."""
    N = s.shape[0]
    shift = 0
    x = S
    if period > 0.0:
        shift = int(math.floor((S - s[0]) / period))
        x = S - shift * period
        if x >= s[0] + period:
            shift += 1
            x -= period
        elif x < s[0]:
            shift -= 1
            x += period
    if hint < 0 or hint >= N:
        n = np.searchsorted(s, x, side="right") - 1
    else:
        n = hint
        while n + 1 < N and s[n + 1] <= x:
            n += 1
        while n >= 0 and s[n] > x:
            n -= 1
    return n, shift, x


@nb.njit(cache=True, inline="always")
def _label(idx, n, i):
    if idx[n, 0] == i:
        return 0
    if idx[n, 1] == i:
        return 1
    # fair price not carried here (a jump is due at this node): nearest label
    return 0 if abs(idx[n, 0] - i) <= abs(idx[n, 1] - i) else 1


@nb.njit(cache=True, inline="always")
def _node_gains(idx_a, idx_b, of_full, w, j, nn, sh, xn, ticks_a, ticks_b, ia, ib,
                alpha_a, alpha_b, k):
    """Ask and bid gains at node ``nn`` (``sh`` periods away, price ``xn``)."""
    Q = w.shape[2]
    cell = of_full[nn, _label(idx_a, nn, ia - sh * ticks_a), _label(idx_b, nn, ib - sh * ticks_b)]
    wk = w[j, cell, k]
    g_a = -np.inf
    g_b = -np.inf
    if k > 0:
        g_a = ia * alpha_a - xn + w[j, cell, k - 1] - wk
    if k < Q - 1:
        g_b = xn - ib * alpha_b + w[j, cell, k + 1] - wk
    return g_a, g_b


@nb.njit(cache=True, inline="always")
def _interp(g0, g1, theta):
    if g0 == -np.inf or g1 == -np.inf:
        return -np.inf
    return (1.0 - theta) * g0 + theta * g1


@nb.njit(cache=True, inline="always")
def _bracket(s, period, n, shift):
    """Upper neighbour of node n (wrapping on periodic grids) and both node prices."""
    n1 = n + 1
    shift1 = shift
    if n1 == s.shape[0]:
        n1 = 0
        shift1 = shift + 1
    return n1, shift1, s[n] + shift * period, s[n1] + shift1 * period


@nb.njit(cache=True)
def _controls(s, period, ticks_a, ticks_b, idx_a, idx_b, of_full, w, times, t_end, S,
              ia, ib, q, alpha_a, alpha_b, q_max):
    """Presence flags at time ``t_end`` (first stored slice at or after it); -1 off-grid."""
    J = times.shape[0]
    j = 0
    while j < J - 1 and times[j] < t_end - 1e-12:
        j += 1
    n, shift, x = _locate(s, period, S, -1)
    N = s.shape[0]
    if period == 0.0 and (n < 0 or n >= N - 1):
        if n == N - 1 and x == s[N - 1]:
            n = N - 2
        else:
            return -1, -1
    n1, shift1, x0, x1 = _bracket(s, period, n, shift)
    k = q + q_max
    a0, b0 = _node_gains(idx_a, idx_b, of_full, w, j, n, shift, x0, ticks_a, ticks_b, ia, ib,
                         alpha_a, alpha_b, k)
    a1, b1 = _node_gains(idx_a, idx_b, of_full, w, j, n1, shift1, x1, ticks_a, ticks_b, ia, ib,
                         alpha_a, alpha_b, k)
    theta = (x + shift * period - x0) / (x1 - x0)
    ga = _interp(a0, a1, theta)
    gb = _interp(b0, b1, theta)
    return (1 if ga > 0.0 else 0), (1 if gb > 0.0 else 0)


@nb.njit(cache=True, inline="always")
def _fair_update(k, S, alpha, eta):
    reach = (0.5 + eta) * alpha
    while S - k * alpha > reach:
        k += 1
    while S - k * alpha < -reach:
        k -= 1
    return k


@nb.njit(cache=True)
def _run_path(rng, S0, ia0, ib0, Q0, n_steps, dt, sigma, alpha_a, eta_a, alpha_b, eta_b,
              p_a, p_b, c, A, phi, phi_minus, q_max, has_policy,
              s, period, ticks_a, ticks_b, idx_a, idx_b, of_full, w, times,
              log_t, log_p, log_side, log_S, log_move, out):
    N = s.shape[0]
    J = times.shape[0]
    S = S0
    ia = ia0
    ib = ib0
    Q = Q0
    X = 0.0
    na = 0
    nb_ = 0
    pen = 0.0
    rate = 0.0
    qsum = 0.0
    qmin = Q
    qmax_seen = Q
    flagged = 0
    n_log = 0
    cap = log_t.shape[0]
    overflow = 0
    vol = sigma * math.sqrt(dt)
    # node lookup: uniform buckets narrower than the smallest spacing
    span = 1.0
    if has_policy and N > 1:
        span = (s[N - 1] - s[0]) if period == 0.0 else period
    hmin = span
    for i in range(N - 1):
        hmin = min(hmin, s[i + 1] - s[i])
    nbk = int(span / hmin) + 1
    inv_hb = nbk / span
    bucket = np.empty(nbk + 1, dtype=np.int64)
    nn = 0
    for i in range(nbk + 1):
        xi = s[0] + i / inv_hb
        while nn + 1 < N and s[nn + 1] <= xi:
            nn += 1
        bucket[i] = nn
    # node gains are cached per node and invalidated whenever the slice, the
    # fair prices, the inventory or the period shift change
    ga_c = np.empty(N)
    gb_c = np.empty(N)
    stamp = np.zeros(N, dtype=np.int64)
    ver = 0
    key_j = -1
    key_ia = 0
    key_ib = 0
    key_q = 0
    key_shift = 0
    j = 0
    shift = 0
    if has_policy and period > 0.0:
        shift = int(math.floor((S - s[0]) / period))
    for m in range(n_steps):
        t_end = (m + 1) * dt
        qq = Q * Q
        pen += (phi * qq + (phi_minus * qq if Q < 0 else 0.0)) * dt
        qsum += Q * dt
        dS = vol * rng.standard_normal()
        S += dS
        ka = _fair_update(ia, S, alpha_a, eta_a)
        kb = _fair_update(ib, S, alpha_b, eta_b)
        if ka != ia:
            if n_log < cap:
                log_t[n_log] = t_end
                log_p[n_log] = ka * alpha_a
                log_side[n_log] = 0
                log_S[n_log] = S
                log_move[n_log] = abs(dS)
                n_log += 1
            elif cap > 0:
                overflow += 1
            ia = ka
        if kb != ib:
            if n_log < cap:
                log_t[n_log] = t_end
                log_p[n_log] = kb * alpha_b
                log_side[n_log] = 1
                log_S[n_log] = S
                log_move[n_log] = abs(dS)
                n_log += 1
            elif cap > 0:
                overflow += 1
            ib = kb
        ell_a = 0
        ell_b = 0
        if has_policy:
            while j < J - 1 and times[j] < t_end - 1e-12:
                j += 1
            x = S - shift * period
            if period > 0.0 and (x >= s[0] + period or x < s[0]):
                shift = int(math.floor((S - s[0]) / period))
                x = S - shift * period
                if x >= s[0] + period:
                    shift += 1
                    x -= period
                elif x < s[0]:
                    shift -= 1
                    x += period
            r = (x - s[0]) * inv_hb
            inside = True
            if r < 0.0:
                n = -1
                inside = False
            elif r >= nbk:
                n = N - 1
            else:
                n = bucket[int(r)]
            if inside:
                while n + 1 < N and s[n + 1] <= x:
                    n += 1
                while n > 0 and s[n] > x:
                    n -= 1
                if period == 0.0 and n >= N - 1:
                    if x == s[N - 1]:
                        n = N - 2
                    else:
                        inside = False
            if not inside:
                flagged += 1
            else:
                if (j != key_j or ia != key_ia or ib != key_ib or Q != key_q
                        or shift != key_shift):
                    ver += 1
                    key_j = j
                    key_ia = ia
                    key_ib = ib
                    key_q = Q
                    key_shift = shift
                k = Q + q_max
                n1, shift1, x0, x1 = _bracket(s, period, n, shift)
                if stamp[n] != ver:
                    ga_c[n], gb_c[n] = _node_gains(idx_a, idx_b, of_full, w, j, n, shift, x0,
                                                   ticks_a, ticks_b, ia, ib, alpha_a, alpha_b, k)
                    stamp[n] = ver
                if shift1 == shift:
                    if stamp[n1] != ver:
                        ga_c[n1], gb_c[n1] = _node_gains(idx_a, idx_b, of_full, w, j, n1, shift,
                                                         x1, ticks_a, ticks_b, ia, ib, alpha_a,
                                                         alpha_b, k)
                        stamp[n1] = ver
                    a1 = ga_c[n1]
                    b1 = gb_c[n1]
                else:
                    a1, b1 = _node_gains(idx_a, idx_b, of_full, w, j, n1, shift1, x1, ticks_a,
                                         ticks_b, ia, ib, alpha_a, alpha_b, k)
                theta = (x + shift * period - x0) / (x1 - x0)
                if _interp(ga_c[n], a1, theta) > 0.0:
                    ell_a = 1
                if _interp(gb_c[n], b1, theta) > 0.0:
                    ell_b = 1
        sell = ell_a == 1 and Q > -q_max
        buy = ell_b == 1 and Q < q_max
        if sell:
            rate += c * p_a
        if buy:
            rate += c * p_b
        fill_a = sell and rng.random() < p_a
        fill_b = buy and rng.random() < p_b
        if fill_a:
            X += ia * alpha_a
            Q -= 1
            na += 1
        if fill_b:
            X -= ib * alpha_b
            Q += 1
            nb_ += 1
        if Q < qmin:
            qmin = Q
        if Q > qmax_seen:
            qmax_seen = Q
    out[_X] = X
    out[_Q] = Q
    out[_S] = S
    out[_NA] = na
    out[_NB] = nb_
    out[_PEN] = pen
    out[_RATE] = rate
    out[_QAVG] = qsum / (n_steps * dt)
    out[_QMIN] = qmin
    out[_QMAX] = qmax_seen
    out[_FLAG] = flagged
    out[_NLA] = n_log
    out[_NLB] = overflow


def path_rng(seed: int, path: int) -> np.random.Generator:
    """Independent generator of one path, derived from ``(seed, path)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path,))))


def _initial_indices(cfg: TickConfig, simcfg: SimConfig) -> tuple[int, int]:
    out = []
    for side, given in (("a", simcfg.S_a0), ("b", simcfg.S_b0)):
        alpha, eta = cfg.side(side)
        k = round((simcfg.S0 if given is None else given) / alpha)
        if abs(simcfg.S0 - k * alpha) > (0.5 + eta) * alpha * (1 + 1e-12):
            raise DomainError(f"initial fair price {k * alpha} on side {side} is not admissible "
                              f"at S0={simcfg.S0}")
        out.append(k)
    return out[0], out[1]


def run_paths(policy: ValueGrid | None, cfg: TickConfig, params: ModelParams,
              simcfg: SimConfig) -> SimResult:
    """Simulate ``n_paths`` independent paths over ``[0, T]``.

    ``policy=None`` simulates a market without the market maker (no fills),
    which is all the price-change statistics need.
    """
    T = params.T if simcfg.T is None else simcfg.T
    n_steps = round(T / simcfg.dt_sim)
    if abs(n_steps * simcfg.dt_sim - T) > 1e-9 * T:
        raise ConfigurationError(f"dt_sim={simcfg.dt_sim} does not divide T={T}")
    if policy is not None:
        if policy.grid.cfg != cfg:
            raise ConfigurationError("policy was solved for a different tick configuration")
        if abs(policy.params.T - T) > 1e-12 or policy.params.q_max != params.q_max:
            raise ConfigurationError("policy horizon or inventory bound differs from params")
        spacing = float(np.max(np.diff(policy.times))) if len(policy.times) > 1 else T
        if simcfg.dt_sim > spacing * (1 + 1e-12):
            raise ConfigurationError(
                f"dt_sim={simcfg.dt_sim} is coarser than the stored policy spacing {spacing}")
        tables = PolicyTables.from_values(policy)
    else:
        tables = PolicyTables.empty(params.q_max)
    if abs(simcfg.Q0) > params.q_max:
        raise DomainError(f"|Q0| exceeds q_max={params.q_max}")
    ia0, ib0 = _initial_indices(cfg, simcfg)
    # per-step fill probabilities; summed over active steps they are the exact
    # compensator of the fill counts
    p_a = -math.expm1(-params.side_rate(cfg.alpha_a) * simcfg.dt_sim)
    p_b = -math.expm1(-params.side_rate(cfg.alpha_b) * simcfg.dt_sim)

    P = simcfg.n_paths
    res = np.empty((P, _N_OUT))
    logs = []
    overflow = 0
    empty_f = np.empty(0)
    empty_i = np.empty(0, dtype=np.int8)
    for p in range(P):
        keep = simcfg.log_changes and p < simcfg.log_paths
        if keep:
            cap = simcfg.max_changes
            lt, lp, lS, lm = (np.empty(cap) for _ in range(4))
            ls = np.empty(cap, dtype=np.int8)
        else:
            lt = lp = lS = lm = empty_f
            ls = empty_i
        _run_path(path_rng(simcfg.seed, p), simcfg.S0, ia0, ib0, simcfg.Q0, n_steps,
                  simcfg.dt_sim, params.sigma, cfg.alpha_a, cfg.eta_a, cfg.alpha_b, cfg.eta_b,
                  p_a, p_b, params.c, params.A, params.phi, params.phi_minus,
                  params.q_max, policy is not None, tables.s, tables.period, tables.ticks_a,
                  tables.ticks_b, tables.idx_a, tables.idx_b, tables.of_full, tables.w,
                  tables.times, lt, lp, ls, lS, lm, res[p])
        if keep:
            n = int(res[p, _NLA])
            overflow += int(res[p, _NLB])
            logs.append(ChangeLog(lt[:n].copy(), lp[:n].copy(),
                                  np.where(ls[:n] == 0, "a", "b"), lS[:n].copy(), lm[:n].copy(),
                                  (ia0 * cfg.alpha_a, ib0 * cfg.alpha_b)))
    Q_T = res[:, _Q]
    S_T = res[:, _S]
    X_T = res[:, _X]
    mm = X_T + Q_T * (S_T - params.A * Q_T) - res[:, _PEN]
    flagged = res[:, _FLAG].astype(np.int64)
    share = flagged.sum() / (P * n_steps)
    if share > 0:
        log.warning("%d paths left the grid (%.2e of steps); they are excluded",
                    int((flagged > 0).sum()), share)
    if share > MAX_FLAGGED_SHARE:
        raise ConfigurationError(
            f"{share:.2e} of steps fell outside the grid; widen the price domain")
    return SimResult(mm, params.c * (res[:, _NA] + res[:, _NB]), res[:, _RATE],
                     res[:, _NA].astype(np.int64), res[:, _NB].astype(np.int64),
                     Q_T.astype(np.int64), X_T, S_T, res[:, _QAVG],
                     res[:, _QMIN].astype(np.int64), res[:, _QMAX].astype(np.int64), flagged,
                     n_steps, simcfg.dt_sim, params.c, logs, overflow)


# ---------------------------------------------------------------------------
# single-step reference


class PolicyLookup:
    """Presence flags of a solved policy at arbitrary ``(t, S, S_a, S_b, Q)``."""

    def __init__(self, vg: ValueGrid | None, cfg: TickConfig, q_max: int):
        self.tables = PolicyTables.from_values(vg) if vg is not None else None
        self.cfg = cfg
        self.q_max = q_max

    def __call__(self, t_end: float, S: float, S_a: float, S_b: float, Q: int) -> tuple[int, int]:
        if self.tables is None:
            return 0, 0
        tb = self.tables
        ia = round(S_a / self.cfg.alpha_a)
        ib = round(S_b / self.cfg.alpha_b)
        ea, eb = _controls(tb.s, tb.period, tb.ticks_a, tb.ticks_b, tb.idx_a, tb.idx_b,
                           tb.of_full, tb.w, tb.times, t_end, S, ia, ib, Q,
                           self.cfg.alpha_a, self.cfg.alpha_b, self.q_max)
        if ea < 0:
            raise DomainError(f"S={S} lies outside the policy grid")
        return ea, eb


def step(state: MarketState, policy: PolicyLookup, cfg: TickConfig, params: ModelParams,
         dt_sim: float, rng: np.random.Generator) -> MarketState:
    """Advance one step; draws from ``rng`` in the same order as :func:`run_paths`."""
    t_end = state.t + dt_sim
    S = state.S + params.sigma * math.sqrt(dt_sim) * rng.standard_normal()
    ka = fair_index_update(round(state.S_a / cfg.alpha_a), S, cfg.alpha_a, cfg.eta_a)
    kb = fair_index_update(round(state.S_b / cfg.alpha_b), S, cfg.alpha_b, cfg.eta_b)
    S_a, S_b = ka * cfg.alpha_a, kb * cfg.alpha_b
    changes = list(state.changes)
    if S_a != state.S_a:
        changes.append(Transaction(t_end, S_a, "a"))
    if S_b != state.S_b:
        changes.append(Transaction(t_end, S_b, "b"))
    ell_a, ell_b = policy(t_end, S, S_a, S_b, state.Q)
    Q, X, na, nb_ = state.Q, state.X, state.N_a, state.N_b
    sell = ell_a == 1 and Q > -params.q_max
    buy = ell_b == 1 and Q < params.q_max
    fill_a = sell and rng.random() < -math.expm1(-params.side_rate(cfg.alpha_a) * dt_sim)
    fill_b = buy and rng.random() < -math.expm1(-params.side_rate(cfg.alpha_b) * dt_sim)
    if fill_a:
        X += S_a
        Q -= 1
        na += 1
    if fill_b:
        X -= S_b
        Q += 1
        nb_ += 1
    return MarketState(t_end, S, S_a, S_b, Q, X, na, nb_, changes)


# ---------------------------------------------------------------------------
# revenue estimators and export


@dataclass
class RevenueEstimate:
    mean: float
    se: float


def exchange_revenue_estimators(result: SimResult) -> tuple[RevenueEstimate, RevenueEstimate]:
    """Fee revenue from counted fills and from the integrated fill rate."""
    return (RevenueEstimate(*result.mean_se(result.revenue_count)),
            RevenueEstimate(*result.mean_se(result.revenue_rate)))


def write_summary(path: str | Path, result: SimResult, extra: dict | None = None) -> None:
    data = result.summary()
    count, rate = exchange_revenue_estimators(result)
    data["revenue_estimators"] = {"counting": asdict(count), "rate": asdict(rate)}
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True))


def write_paths(path: str | Path, result: SimResult) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["path", "mm_objective", "exchange_revenue", "N_a", "N_b", "Q_T"])
        for p in range(result.n_paths):
            wr.writerow([p, repr(float(result.mm_objective[p])),
                         repr(float(result.revenue_count[p])), int(result.N_a[p]),
                         int(result.N_b[p]), int(result.Q_T[p])])


def write_change_log(path: str | Path, changes: ChangeLog) -> None:
    """Price changes as a ``time,price,side`` transaction file."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["time", "price", "side"])
        for tr in changes.transactions():
            wr.writerow([repr(tr.time), repr(tr.price), tr.side])
