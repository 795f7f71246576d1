"""Brute-force dynamic program on a small lattice, used to certify the solver.

The lattice is the solver's own price mesh read as a Markov chain.  In one
time step exactly one of the following happens: the efficient price moves
to the upper or lower neighbour node (trinomial probabilities matched to
mean 0 and variance ``sigma^2 dt`` on the local spacings), an ask order
fills, a bid order fills, or nothing happens.  The value is obtained by
plain backward induction over the four presence pairs, working with the
absolute value ``h`` rather than the solver's shifted variable.

The oracle does its own successor bookkeeping (fair-price indices are
matched node by node) and shares only the zone-edge copy rule with the
solver.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .hjb.grid import StateGrid, build_grid
from .hjb.model import ModelParams, running_penalty
from .hjb.solver import ValueGrid
from .zones import TickConfig

log = logging.getLogger(__name__)

MAX_NODES = 200
MAX_STEPS = 400
MAX_Q = 2

CONTROL_PAIRS = tuple(itertools.product((0, 1), repeat=2))


@dataclass
class LatticeSpec:
    """A coarse grid plus the transition model read off it.

    ``fill`` selects the per-step fill probability: ``"linear"`` uses
    ``rate * dt`` (the weight of the explicit solver, so both compute the
    same chain), ``"exponential"`` uses ``1 - exp(-rate * dt)``.
    """

    grid: StateGrid
    params: ModelParams
    fill: str = "linear"

    def __post_init__(self):
        g = self.grid
        if g.periodic:
            raise ConfigurationError("the oracle lattice must be non-periodic")
        if g.n_nodes > MAX_NODES or g.n_steps > MAX_STEPS or g.q_max > MAX_Q:
            raise ConfigurationError(
                f"lattice too large for the oracle: {g.n_nodes} nodes, {g.n_steps} steps, "
                f"q_max={g.q_max} (limits {MAX_NODES}, {MAX_STEPS}, {MAX_Q})")
        if self.fill not in ("linear", "exponential"):
            raise ConfigurationError(f"unknown fill model {self.fill!r}")

    def move_probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        """Up and down probabilities per node (zero at the two end nodes)."""
        s = self.grid.s
        N = len(s)
        pu = np.zeros(N)
        pd = np.zeros(N)
        hm = s[1:-1] - s[:-2]
        hp = s[2:] - s[1:-1]
        var = self.params.sigma ** 2 * self.grid.dt
        # mean: pu*hp - pd*hm = 0 ; second moment: pu*hp^2 + pd*hm^2 = var
        pu[1:-1] = var / (hp * (hm + hp))
        pd[1:-1] = var / (hm * (hm + hp))
        return pu, pd

    def fill_probabilities(self) -> tuple[float, float]:
        cfg = self.grid.cfg
        dt = self.grid.dt
        out = []
        for alpha in (cfg.alpha_a, cfg.alpha_b):
            rate = self.params.lam / (1.0 + (self.params.kappa * alpha) ** 2)
            out.append(rate * dt if self.fill == "linear" else -math.expm1(-rate * dt))
        return out[0], out[1]

    def check(self) -> float:
        """Validate the chain; returns the worst moment-matching residual."""
        pu, pd = self.move_probabilities()
        pa, pb = self.fill_probabilities()
        s = self.grid.s
        stay = 1.0 - pu - pd - pa - pb
        for name, p in (("up", pu), ("down", pd), ("stay", stay)):
            if np.any(p < 0) or np.any(p > 1):
                raise ConfigurationError(f"{name} probability outside [0, 1]")
        hm = s[1:-1] - s[:-2]
        hp = s[2:] - s[1:-1]
        var = self.params.sigma ** 2 * self.grid.dt
        mean_res = np.abs(pu[1:-1] * hp - pd[1:-1] * hm) / np.sqrt(var)
        var_res = np.abs(pu[1:-1] * hp ** 2 + pd[1:-1] * hm ** 2 - var) / var
        return float(max(mean_res.max(initial=0.0), var_res.max(initial=0.0)))


@dataclass
class OracleTable:
    """Values ``(step, node, ask label, bid label, q)`` and chosen presence pairs."""

    times: np.ndarray
    values: np.ndarray
    ell_a: np.ndarray
    ell_b: np.ndarray


def _successor_labels(idx: np.ndarray, step: int) -> np.ndarray:
    """Label at node ``n + step`` carrying the fair index of each (node, label)."""
    N = idx.shape[0]
    out = np.empty((N, 2), dtype=np.int64)
    for n in range(N):
        j = min(max(n + step, 0), N - 1)
        for lab in range(2):
            hits = np.flatnonzero(idx[j] == idx[n, lab])
            if hits.size:
                out[n, lab] = hits[0]
            else:
                # only reachable from a label that is itself not admissible
                out[n, lab] = -1
    return out


def oracle_value(spec: LatticeSpec, cfg: TickConfig | None = None,
                 params: ModelParams | None = None) -> OracleTable:
    """Backward induction maximizing over the four presence pairs at every state."""
    g = spec.grid
    params = spec.params if params is None else params
    cfg = g.cfg if cfg is None else cfg
    spec.check()
    N, qm = g.n_nodes, g.q_max
    Q = 2 * qm + 1
    q = np.arange(-qm, qm + 1)
    ta, tb = g.sides
    fair_a = ta.idx * cfg.alpha_a
    fair_b = tb.idx * cfg.alpha_b
    pu, pd = spec.move_probabilities()
    pa, pb = spec.fill_probabilities()
    pen = np.array([running_penalty(int(x), params) for x in q]) * g.dt

    up_a, up_b = _successor_labels(ta.idx, 1), _successor_labels(tb.idx, 1)
    dn_a, dn_b = _successor_labels(ta.idx, -1), _successor_labels(tb.idx, -1)
    # admissible labels must always find their fair price at both neighbours
    for name, tab, vmask in (("ask", (up_a, dn_a), ta.valid), ("bid", (up_b, dn_b), tb.valid)):
        for t in tab:
            if np.any((t < 0) & vmask):
                raise ConfigurationError(f"{name} fair price lost between neighbouring nodes")
    up_a, dn_a = np.maximum(up_a, 0), np.maximum(dn_a, 0)
    up_b, dn_b = np.maximum(up_b, 0), np.maximum(dn_b, 0)

    post_a = np.where(ta.valid, np.arange(2), 1 - np.arange(2))
    post_b = np.where(tb.valid, np.arange(2), 1 - np.arange(2))

    def copy_rule(V):
        n = np.arange(N)[:, None, None]
        return V[n, post_a[:, :, None], post_b[:, None, :]]

    M = g.n_steps
    values = np.empty((M + 1, N, 2, 2, Q))
    ell_a = np.zeros((M + 1, N, 2, 2, Q), dtype=np.int8)
    ell_b = np.zeros((M + 1, N, 2, 2, Q), dtype=np.int8)
    V = np.broadcast_to(q * (g.s[:, None, None, None] - params.A * q), (N, 2, 2, Q)).copy()
    values[M] = V

    n_up = np.minimum(np.arange(N) + 1, N - 1)
    n_dn = np.maximum(np.arange(N) - 1, 0)
    ask_ok = q > -qm
    bid_ok = q < qm
    for m in range(M - 1, -1, -1):
        V_up = V[n_up[:, None, None], up_a[:, :, None], up_b[:, None, :]]
        V_dn = V[n_dn[:, None, None], dn_a[:, :, None], dn_b[:, None, :]]
        V_sold = np.empty_like(V)       # after an ask fill: q - 1
        V_sold[..., 1:] = V[..., :-1]
        V_sold[..., 0] = 0.0
        V_bought = np.empty_like(V)     # after a bid fill: q + 1
        V_bought[..., :-1] = V[..., 1:]
        V_bought[..., -1] = 0.0
        cash_a = fair_a[:, :, None, None]
        cash_b = fair_b[:, None, :, None]
        best = None
        for la, lb in CONTROL_PAIRS:
            qa = pa * la * ask_ok
            qb = pb * lb * bid_ok
            stay = 1.0 - pu[:, None, None, None] - pd[:, None, None, None] - qa - qb
            cand = (pu[:, None, None, None] * V_up + pd[:, None, None, None] * V_dn
                    + qa * (cash_a + V_sold) + qb * (V_bought - cash_b) + stay * V + pen)
            if best is None:
                best = cand
                ca = np.zeros(cand.shape, dtype=np.int8)
                cb = np.zeros(cand.shape, dtype=np.int8)
            else:
                better = cand > best
                best = np.where(better, cand, best)
                ca = np.where(better, la, ca).astype(np.int8)
                cb = np.where(better, lb, cb).astype(np.int8)
        V = copy_rule(best)
        values[m] = V
        ell_a[m + 1] = copy_rule(ca)
        ell_b[m + 1] = copy_rule(cb)
    times = np.arange(M + 1) * g.dt
    return OracleTable(times, values, ell_a, ell_b)


@dataclass
class Discrepancy:
    max_abs: float
    index: tuple[int, ...]
    oracle: float
    solver: float


def compare(table: OracleTable | np.ndarray, values: ValueGrid | np.ndarray) -> Discrepancy:
    """Largest absolute difference between two value tables and where it occurs.

    A :class:`ValueGrid` is expanded to its full layout; it must hold every
    time step of the lattice.
    """
    a = table.values if isinstance(table, OracleTable) else np.asarray(table)
    if isinstance(values, ValueGrid):
        b = np.stack([values.slice(j) for j in range(len(values.times))])
    else:
        b = np.asarray(values)
    if a.shape != b.shape:
        raise ConfigurationError(f"shape mismatch: oracle {a.shape} vs solver {b.shape}")
    diff = np.abs(a - b)
    k = int(np.argmax(diff))
    idx = tuple(int(i) for i in np.unravel_index(k, diff.shape))
    return Discrepancy(float(diff.flat[k]), idx, float(a.flat[k]), float(b.flat[k]))


def certification_lattice(alpha_a: float = 0.01, alpha_b: float = 0.00625, T: float = 3.0,
                          q_max: int = 2, phi_minus: float = 0.005, dS: float = 0.0025,
                          margin: float = 3.0, S_ref: float = 10.5, eta_0: float = 0.3,
                          alpha_0: float = 0.01,
                          params: ModelParams | None = None) -> LatticeSpec:
    """The small two-tick lattice the solver is certified on."""
    base = ModelParams() if params is None else params
    p = base.replace(T=T, q_max=q_max, phi_minus=phi_minus)
    cfg = TickConfig.from_ticks(alpha_a, alpha_b, eta_0, alpha_0)
    return LatticeSpec(build_grid(cfg, p, S_ref, dS, margin), p)
