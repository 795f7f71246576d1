"""Backward solution of the market maker's value function and its controls.

The solver works with ``w = h - q * S``: the terminal data becomes
``-A q^2``, the second difference is unchanged (``q * S`` is linear in S) and
the trade gains only involve the distance between fair and efficient price.
On periodic grids ``w`` is exactly periodic, which is what makes the
one-period domain legitimate.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..zones import TickConfig
from . import _kernels
from .grid import StateGrid
from .model import ModelParams, running_penalty

log = logging.getLogger(__name__)

#: default number of stored time slices (plus the terminal one)
DEFAULT_SLICES = 160


@dataclass
class CellLayout:
    """Active (canonical) cells of a grid and the maps into the full layout."""

    node: np.ndarray       # (C,) node of each active cell
    label_a: np.ndarray    # (C,)
    label_b: np.ndarray    # (C,)
    of_full: np.ndarray    # (N, 2, 2) active cell holding each (node, a, b)
    up: np.ndarray         # (C,) active cell one node up (self at a closed end)
    down: np.ndarray       # (C,)
    h_minus: np.ndarray    # (C,)
    h_plus: np.ndarray     # (C,)
    off_a: np.ndarray      # (C,) fair ask minus node price
    off_b: np.ndarray      # (C,) fair bid minus node price

    @property
    def n_cells(self) -> int:
        return len(self.node)


def cell_layout(grid: StateGrid) -> CellLayout:
    N = grid.n_nodes
    ta, tb = grid.sides
    n_ax = np.arange(N)[:, None, None]
    a_ax = np.arange(2)[None, :, None]
    b_ax = np.arange(2)[None, None, :]
    canon_cell = (ta.canon[:, :, None] == a_ax) & (tb.canon[:, None, :] == b_ax)
    full_id = (n_ax * 2 + a_ax) * 2 + b_ax
    active_full = full_id[canon_cell]
    compact = -np.ones(N * 4, dtype=np.int64)
    compact[active_full] = np.arange(active_full.size)
    ca = np.broadcast_to(ta.canon[:, :, None], (N, 2, 2))
    cb = np.broadcast_to(tb.canon[:, None, :], (N, 2, 2))
    of_full = compact[(n_ax * 2 + ca) * 2 + cb]
    if np.any(of_full < 0):
        raise ConfigurationError("canonical labels do not close on active cells")

    node = active_full // 4
    la = (active_full // 2) % 2
    lb = active_full % 2
    hm_node, hp_node = grid.h_minus, grid.h_plus
    if grid.periodic:
        n_up = (node + 1) % N
        n_dn = (node - 1) % N
    else:
        n_up = np.minimum(node + 1, N - 1)
        n_dn = np.maximum(node - 1, 0)
    up = of_full[n_up, ta.up[node, la], tb.up[node, lb]]
    down = of_full[n_dn, ta.down[node, la], tb.down[node, lb]]
    closed = ~grid.interior[node]
    own = np.arange(node.size)
    up = np.where(closed, own, up)
    down = np.where(closed, own, down)
    hm = np.where(closed, 1.0, hm_node[node])
    hp = np.where(closed, 1.0, hp_node[node])
    off_a = ta.idx[node, la] * ta.alpha - grid.s[node]
    off_b = tb.idx[node, lb] * tb.alpha - grid.s[node]
    return CellLayout(node, la, lb, of_full, up, down, hm, hp, off_a, off_b)


def _coefficients(grid: StateGrid, layout: CellLayout):
    closed = ~grid.interior[layout.node]
    hm, hp = layout.h_minus, layout.h_plus
    s2dt = grid.sigma ** 2 * grid.dt
    cu = np.where(closed, 0.0, s2dt / (hp * (hm + hp)))
    cd = np.where(closed, 0.0, s2dt / (hm * (hm + hp)))
    return cu, cd


def _check_cfl(grid: StateGrid, params: ModelParams) -> None:
    limit = grid.cfl_limit()
    if grid.dt > limit * (1 + 1e-12):
        raise ConfigurationError(f"time step {grid.dt:.3e} exceeds the stability bound {limit:.3e}")
    rates = sum(params.side_rate(a) for a in (grid.cfg.alpha_a, grid.cfg.alpha_b))
    if grid.dt * rates > 1.0:
        raise ConfigurationError(
            f"time step {grid.dt:.3e} makes the fill weight lambda*dt exceed one")


def _penalties(params: ModelParams, q_max: int) -> np.ndarray:
    return np.array([running_penalty(q, params) for q in range(-q_max, q_max + 1)])


@dataclass
class ValueGrid:
    """Stored time slices of the value function.

    ``w[j, cell, k]`` is ``h - q * s`` at time ``times[j]`` on active cell
    ``cell`` and inventory ``q = k - q_max``; :meth:`slice` expands a time
    slice to the full ``(node, ask label, bid label, q)`` layout, where
    non-admissible labels repeat the value they alias.
    """

    grid: StateGrid
    params: ModelParams
    layout: CellLayout
    times: np.ndarray
    w: np.ndarray
    fills: np.ndarray | None = None     # (J, side, C, Q) expected fill counts
    elapsed: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def q(self) -> np.ndarray:
        return self.grid.q

    @property
    def flow(self) -> np.ndarray | None:
        """Expected fee revenue ``c * (N_a + N_b)`` to the horizon, per cell."""
        if self.fills is None:
            return None
        return self.params.c * (self.fills[:, 0] + self.fills[:, 1])

    def time_index(self, t: float) -> int:
        """First stored slice at or after ``t``."""
        j = int(np.searchsorted(self.times, t - 1e-12 * max(1.0, self.grid.T)))
        return min(j, len(self.times) - 1)

    def slice_w(self, j: int) -> np.ndarray:
        return self.w[j][self.layout.of_full]

    def slice(self, j: int) -> np.ndarray:
        """Value ``h`` on the full ``(N, 2, 2, Q)`` layout at stored slice ``j``."""
        return self.slice_w(j) + self.grid.s[:, None, None, None] * self.q[None, None, None, :]

    def flow_slice(self, j: int) -> np.ndarray:
        if self.fills is None:
            raise ValueError("the fee flow was not computed for this solve")
        return (self.params.c * (self.fills[j, 0] + self.fills[j, 1]))[self.layout.of_full]

    def _cell(self, S: float, fair_a: float | None, fair_b: float | None):
        g = self.grid
        if not g.in_domain(S):
            raise DomainError(f"S={S} lies outside the grid [{g.s[0]}, {g.s[-1]}]")
        n, shift = g.locate(S)
        ia = round(S / g.cfg.alpha_a) if fair_a is None else round(fair_a / g.cfg.alpha_a)
        ib = round(S / g.cfg.alpha_b) if fair_b is None else round(fair_b / g.cfg.alpha_b)
        try:
            la = g.label_of("a", n, ia, shift)
            lb = g.label_of("b", n, ib, shift)
        except KeyError as exc:
            raise DomainError(f"fair prices not admissible at S={S}: {exc}") from None
        return int(self.layout.of_full[n, la, lb]), n, shift

    def value_at(self, S: float, q: int = 0, *, t: float = 0.0, fair_a: float | None = None,
                 fair_b: float | None = None) -> float:
        """``h`` at the node nearest ``S``; fair prices default to the nearest ticks."""
        cell, n, shift = self._cell(S, fair_a, fair_b)
        x = self.grid.s[n] + (shift * self.grid.period if shift else 0.0)
        return float(self.w[self.time_index(t), cell, q + self.grid.q_max] + q * x)

    def flow_at(self, S: float, q: int = 0, *, t: float = 0.0, fair_a: float | None = None,
                fair_b: float | None = None) -> float:
        a, b = self.fills_at(S, q, t=t, fair_a=fair_a, fair_b=fair_b)
        return self.params.c * (a + b)

    def fills_at(self, S: float, q: int = 0, *, t: float = 0.0, fair_a: float | None = None,
                 fair_b: float | None = None) -> tuple[float, float]:
        """Expected numbers of ask and bid fills from ``t`` to the horizon."""
        if self.fills is None:
            raise ValueError("the fee flow was not computed for this solve")
        cell, _, _ = self._cell(S, fair_a, fair_b)
        f = self.fills[self.time_index(t), :, cell, q + self.grid.q_max]
        return float(f[0]), float(f[1])


@dataclass
class PolicyGrid:
    """Presence flags on the stored slices of a :class:`ValueGrid`."""

    values: ValueGrid
    ell_a: np.ndarray  # (J, C, Q) bool
    ell_b: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.values.times

    def slice(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        of = self.values.layout.of_full
        return self.ell_a[j][of], self.ell_b[j][of]


def policy_from_values(vg: ValueGrid) -> PolicyGrid:
    """Bang-bang controls re-derived from every stored value slice."""
    J, C, Q = vg.w.shape
    ell_a = np.empty((J, C, Q), dtype=bool)
    ell_b = np.empty((J, C, Q), dtype=bool)
    ga = np.empty((C, Q))
    gb = np.empty((C, Q))
    for j in range(J):
        _kernels.gains(vg.w[j], vg.layout.off_a, vg.layout.off_b, ga, gb)
        ell_a[j] = ga > 0.0
        ell_b[j] = gb > 0.0
    return PolicyGrid(vg, ell_a, ell_b)


def solve(cfg: TickConfig, params: ModelParams, grid: StateGrid, *, fee_flow: bool = False,
          fractional: bool = True, slices: int = DEFAULT_SLICES) -> tuple[ValueGrid, PolicyGrid]:
    """Solve backward from the terminal condition.

    With ``fee_flow=True`` the expected fee revenue
    ``E int c * sum_side rate * ell dt`` under the optimal controls is solved
    alongside, on the same cells and steps.  ``fractional`` replaces the
    presence indicator in that equation by its average over each node's
    control cell (gains interpolated linearly between nodes), which removes
    the mesh-alignment noise of switching points.
    """
    if grid.cfg != cfg:
        raise ConfigurationError("grid was built for a different tick configuration")
    if (grid.sigma, grid.T, grid.q_max) != (params.sigma, params.T, params.q_max):
        raise ConfigurationError("grid was built for different model parameters")
    _check_cfl(grid, params)
    layout = cell_layout(grid)
    cu, cd = _coefficients(grid, layout)
    Q = grid.n_q
    q = grid.q.astype(float)
    stride = max(1, math.ceil(grid.n_steps / max(1, slices)))
    n_saved = math.ceil(grid.n_steps / stride) + 1
    w = np.repeat((-params.A * q * q)[None, :], layout.n_cells, axis=0)
    ua = np.zeros_like(w)
    ub = np.zeros_like(w)
    w_saved = np.empty((n_saved, layout.n_cells, Q))
    n_flow = n_saved if fee_flow else 1
    ua_saved = np.empty((n_flow, layout.n_cells, Q))
    ub_saved = np.empty((n_flow, layout.n_cells, Q))
    la = params.side_rate(cfg.alpha_a) * grid.dt
    lb = params.side_rate(cfg.alpha_b) * grid.dt
    pen_dt = _penalties(params, grid.q_max) * grid.dt
    t0 = time.perf_counter()
    _kernels.backward(w, ua, ub, layout.up, layout.down, cu, cd, layout.h_minus,
                      layout.h_plus, layout.off_a, layout.off_b, la, lb, pen_dt,
                      grid.n_steps, stride, fee_flow, fractional, w_saved, ua_saved, ub_saved)
    elapsed = time.perf_counter() - t0
    steps_left = grid.n_steps - stride * np.arange(n_saved)
    steps_left[-1] = 0
    times = (steps_left * grid.dt)[::-1].copy()
    times[0] = 0.0
    times[-1] = params.T
    w_saved = w_saved[::-1].copy()
    fills = np.stack([ua_saved[::-1], ub_saved[::-1]], axis=1) if fee_flow else None
    if not np.all(np.isfinite(w_saved[0])):
        raise ConfigurationError("solution is not finite")
    log.info("solved %d cells x %d steps in %.2fs", layout.n_cells, grid.n_steps, elapsed)
    vg = ValueGrid(grid, params, layout, times, w_saved, fills, elapsed,
                   {"dt": grid.dt, "n_steps": grid.n_steps, "stride": stride,
                    "fractional": fractional})
    return vg, policy_from_values(vg)


def backward_step(values: np.ndarray, grid: StateGrid, cfg: TickConfig,
                  params: ModelParams) -> np.ndarray:
    """One explicit step on a full ``(N, 2, 2, Q)`` slice of ``h``.

    The result is canonicalized: every non-admissible label (including the
    pre-jump label on a zone edge) carries the post-jump value.
    """
    _check_cfl(grid, params)
    layout = cell_layout(grid)
    cu, cd = _coefficients(grid, layout)
    qS = grid.s[:, None, None, None] * grid.q[None, None, None, :]
    w_full = np.asarray(values, dtype=float) - qS
    w = np.ascontiguousarray(w_full[layout.node, layout.label_a, layout.label_b])
    wn = np.empty_like(w)
    ga = np.empty_like(w)
    gb = np.empty_like(w)
    _kernels.value_step(w, wn, ga, gb, layout.up, layout.down, cu, cd,
                        layout.off_a, layout.off_b,
                        params.side_rate(cfg.alpha_a) * grid.dt,
                        params.side_rate(cfg.alpha_b) * grid.dt,
                        _penalties(params, grid.q_max) * grid.dt)
    return wn[layout.of_full] + qS


def terminal_slice(grid: StateGrid, params: ModelParams) -> np.ndarray:
    q = grid.q[None, None, None, :]
    s = grid.s[:, None, None, None]
    return np.broadcast_to(q * (s - params.A * q), grid.shape).copy()


def optimal_controls(values: np.ndarray, grid: StateGrid, node: int, label_a: int,
                     label_b: int, q: int) -> tuple[int, int]:
    """Presence flags from a full ``h`` slice: quote a side iff its gain is positive."""
    qm = grid.q_max
    if abs(q) > qm:
        raise DomainError(f"|q|={abs(q)} exceeds q_max={qm}")
    k = q + qm
    fa = grid.sides[0].idx[node, label_a] * grid.sides[0].alpha
    fb = grid.sides[1].idx[node, label_b] * grid.sides[1].alpha
    row = values[node, label_a, label_b]
    ell_a = int(q > -qm and fa + row[k - 1] - row[k] > 0)
    ell_b = int(q < qm and -fb + row[k + 1] - row[k] > 0)
    return ell_a, ell_b


# ---------------------------------------------------------------------------
# export


def export_csv(path: str | Path, vg: ValueGrid, pg: PolicyGrid, *,
               slices: list[int] | None = None) -> None:
    """Rows ``t,S,branch_a,branch_b,q,value,ell_a,ell_b`` for admissible cells.

    ``branch_a``/``branch_b`` are the fair prices; only canonical cells are
    written (aliased labels duplicate them).
    """
    g = vg.grid
    lay = vg.layout
    js = range(len(vg.times)) if slices is None else slices
    fa = g.sides[0].idx[lay.node, lay.label_a] * g.cfg.alpha_a
    fb = g.sides[1].idx[lay.node, lay.label_b] * g.cfg.alpha_b
    s = g.s[lay.node]
    with open(path, "w") as fh:
        fh.write("t,S,branch_a,branch_b,q,value,ell_a,ell_b\n")
        for j in js:
            t = vg.times[j]
            for ci in range(lay.n_cells):
                for k, q in enumerate(g.q):
                    h = vg.w[j, ci, k] + q * s[ci]
                    fh.write(f"{t:.10g},{s[ci]:.12g},{fa[ci]:.12g},{fb[ci]:.12g},{q},"
                             f"{h:.15g},{int(pg.ell_a[j, ci, k])},{int(pg.ell_b[j, ci, k])}\n")


def export_binary(path: str | Path, vg: ValueGrid) -> None:
    """Flat little-endian float64 array of ``h`` (J, N, 2, 2, Q) plus a JSON sidecar."""
    path = Path(path)
    full = np.stack([vg.slice(j) for j in range(len(vg.times))])
    full.astype("<f8").tofile(path)
    g = vg.grid
    meta = {
        "shape": list(full.shape),
        "axes": ["t", "node", "label_a", "label_b", "q"],
        "times": vg.times.tolist(),
        "nodes": g.s.tolist(),
        "fair_index_a": g.sides[0].idx.tolist(),
        "fair_index_b": g.sides[1].idx.tolist(),
        "dt": g.dt,
        "period": g.period,
        "params": vg.params.as_dict(),
        "ticks": {"alpha_a": g.cfg.alpha_a, "alpha_b": g.cfg.alpha_b,
                  "eta_a": g.cfg.eta_a, "eta_b": g.cfg.eta_b},
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=1))
