"""State grid for the branch-indexed value function.

Every price node carries two candidate fair prices per side: the rounding
down (label 0) and the rounding up (label 1) of the node price to that side's
tick grid.  Where only one of them is admissible, or where the node sits on a
zone edge, the other label is *canonicalized*: it aliases the admissible one.
On an edge the alias points at the post-jump fair price, which is exactly the
continuity (boundary) condition of the value function.

Nodes are stored in a flat cell layout ``cell = (node * 2 + label_a) * 2 +
label_b`` so that the numerical kernels can walk contiguous inventory rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import ConfigurationError
from ..zones import GRID_RTOL, TickConfig

#: two boundary points of different sides closer than ``snap * dS`` share a node
DEFAULT_SNAP = 0.5


@dataclass
class SideTables:
    """Per-node branch bookkeeping for one side of the book."""

    alpha: float
    eta: float
    idx: np.ndarray        # (N, 2) fair-price index of labels 0 / 1
    valid: np.ndarray      # (N, 2) label admissible (strictly inside its band)
    edge: np.ndarray       # (N,) +1 upper zone edge, -1 lower zone edge, 0 none
    canon: np.ndarray      # (N, 2) label holding the value of each label
    up: np.ndarray         # (N, 2) label of the same fair price at node n + 1
    down: np.ndarray       # (N, 2) label of the same fair price at node n - 1
    period_ticks: int = 0  # ticks per period (periodic grids only)


@dataclass
class StateGrid:
    """Price nodes, time step and branch tables for one tick configuration."""

    cfg: TickConfig
    sigma: float
    T: float
    q_max: int
    s: np.ndarray
    dt: float
    n_steps: int
    sides: tuple[SideTables, SideTables]
    S_ref: float
    dS: float
    period: float | None = None
    snapped: int = 0
    extra: dict = field(default_factory=dict)

    # ------------------------------------------------------------------ sizes
    @property
    def n_nodes(self) -> int:
        return len(self.s)

    @property
    def n_q(self) -> int:
        return 2 * self.q_max + 1

    @property
    def q(self) -> np.ndarray:
        return np.arange(-self.q_max, self.q_max + 1)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_nodes, 2, 2, self.n_q)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def periodic(self) -> bool:
        return self.period is not None

    # ---------------------------------------------------------------- spacing
    @property
    def h_minus(self) -> np.ndarray:
        h = np.empty(self.n_nodes)
        h[1:] = np.diff(self.s)
        h[0] = self.s[0] + self.period - self.s[-1] if self.periodic else np.nan
        return h

    @property
    def h_plus(self) -> np.ndarray:
        h = np.empty(self.n_nodes)
        h[:-1] = np.diff(self.s)
        h[-1] = self.s[0] + self.period - self.s[-1] if self.periodic else np.nan
        return h

    @property
    def interior(self) -> np.ndarray:
        """Nodes where the second difference is applied."""
        mask = np.ones(self.n_nodes, dtype=bool)
        if not self.periodic:
            mask[[0, -1]] = False
        return mask

    def fair_prices(self, side: str) -> np.ndarray:
        """(N, 2) fair prices carried by labels 0 / 1 of ``side``."""
        t = self.sides[0 if side == "a" else 1]
        return t.idx * t.alpha

    def boundary_nodes(self, side: str) -> np.ndarray:
        t = self.sides[0 if side == "a" else 1]
        return np.flatnonzero(t.edge != 0)

    # ---------------------------------------------------------------- lookup
    def locate(self, S: float) -> tuple[int, int]:
        """Nearest node to ``S`` and the number of periods it was shifted by."""
        shift = 0
        x = S
        if self.periodic:
            shift = math.floor((S - self.s[0]) / self.period)
            x = S - shift * self.period
            if x >= self.s[0] + self.period:
                shift += 1
                x -= self.period
        n = int(np.searchsorted(self.s, x))
        if n == 0:
            return 0, shift
        if n >= self.n_nodes:
            if self.periodic and (self.s[0] + self.period - x) < (x - self.s[-1]):
                return 0, shift + 1
            return self.n_nodes - 1, shift
        return (n - 1 if x - self.s[n - 1] <= self.s[n] - x else n), shift

    def label_of(self, side: str, node: int, index: int, shift: int = 0) -> int:
        """Label carrying fair-price ``index`` at ``node`` (``shift`` periods away).

        Raises ``KeyError`` when the index is not one of the node's two roundings.
        """
        t = self.sides[0 if side == "a" else 1]
        i = index - shift * t.period_ticks
        for lab in (0, 1):
            if t.idx[node, lab] == i:
                return lab
        raise KeyError(f"fair index {index} not carried at node {node} ({side})")

    def in_domain(self, S: float) -> bool:
        return self.periodic or (self.s[0] <= S <= self.s[-1])

    def cfl_limit(self) -> float:
        hm, hp = self.h_minus, self.h_plus
        inner = self.interior
        return 0.5 * float(np.min(hm[inner] * hp[inner])) / self.sigma**2


# ---------------------------------------------------------------------------
# construction


def common_period(alpha_a: float, alpha_b: float, max_ticks: int = 100000) -> float | None:
    """Smallest P that is an integer multiple of both ticks, if one exists."""
    ratio = Fraction(alpha_a / alpha_b).limit_denominator(max_ticks)
    if abs(float(ratio) - alpha_a / alpha_b) > 1e-12 * (alpha_a / alpha_b):
        return None
    # alpha_a / alpha_b = p / q  =>  q * alpha_a = p * alpha_b
    return ratio.denominator * alpha_a


def _edges(alpha: float, eta: float, lo: float, hi: float) -> list[tuple[float, int, int]]:
    """Zone edges ``(x, k, sign)`` with ``lo <= x <= hi``; sign +1 upper, -1 lower."""
    out = []
    for k in range(math.floor(lo / alpha) - 2, math.ceil(hi / alpha) + 2):
        for sign in (-1, 1):
            x = (k + 0.5 + sign * eta) * alpha
            if lo <= x <= hi:
                out.append((x, k, sign))
    return out


def build_grid(cfg: TickConfig, params, S_ref: float, dS: float, m: float = 5.0, *,
               periodic: bool = False, snap: float = DEFAULT_SNAP) -> StateGrid:
    """Nodes covering ``S_ref`` +/- (m sigma sqrt(T) + 2 max tick) with all zone edges.

    Zone edges of both sides are mandatory nodes; the gaps between
    consecutive mandatory nodes are split uniformly into cells no wider than
    ``dS``.  Edges of *different* sides closer than ``snap * dS`` are merged
    into one node at their midpoint (a simultaneous crossing), which keeps the
    explicit time step from collapsing.  ``snap=0`` keeps every edge exact.

    With ``periodic=True`` and commensurate ticks, the grid covers one common
    period ``P`` instead, using the exact identity
    ``h(S + P, shifted fair prices, q) = h(S, ., q) + q P``.  If no common
    period fits inside the truncated domain, the truncated domain is used.
    """
    if not dS > 0:
        raise ConfigurationError(f"base mesh dS must be positive, got {dS}")
    if m < 3:
        raise ConfigurationError(f"margin factor m must be >= 3, got {m}")
    half = m * params.sigma * math.sqrt(params.T) + 2 * max(cfg.alpha_a, cfg.alpha_b)
    period = None
    if periodic:
        P = common_period(cfg.alpha_a, cfg.alpha_b)
        if P is not None and P <= 2 * half:
            period = P
    sides_spec = ((cfg.alpha_a, cfg.eta_a), (cfg.alpha_b, cfg.eta_b))

    if period is None:
        lo, hi = S_ref - half, S_ref + half
        pts = []
        for side, (alpha, eta) in enumerate(sides_spec):
            pts += [(x, side, k, sg) for x, k, sg in _edges(alpha, eta, lo, hi)]
    else:
        pts = []
        for side, (alpha, eta) in enumerate(sides_spec):
            ticks = round(period / alpha)
            k0 = math.floor(S_ref / alpha)
            for k in range(k0, k0 + ticks):
                for sg in (-1, 1):
                    pts.append(((k + 0.5 + sg * eta) * alpha, side, k, sg))
        # place the cut in the middle of the widest gap between mandatory points
        rel = sorted(((x - S_ref) % period) for x, *_ in pts)
        rel = [0.0] + rel
        gaps = [(rel[i + 1] - rel[i], i) for i in range(len(rel) - 1)]
        gaps.append((period - rel[-1], len(rel) - 1))
        g, i = max(gaps)
        lo = S_ref + rel[i] + g / 2
        hi = lo + period
        wrapped = []
        for x, side, k, sg in pts:
            shift = math.floor((x - lo) / period)
            ticks = round(period / sides_spec[side][0])
            wrapped.append((x - shift * period, side, k - shift * ticks, sg))
        pts = wrapped
        if lo > S_ref:
            lo -= period
            hi -= period
            pts = [(x - period if x >= hi else x, side,
                    k - round(period / sides_spec[side][0]) if x >= hi else k, sg)
                   for x, side, k, sg in pts]
    pts.sort()

    # merge edges: exact coincidences always, cross-side near misses within snap*dS
    nodes: list[dict] = []
    snapped = 0
    for x, side, k, sg in pts:
        last = nodes[-1] if nodes else None
        if last is not None and last["edge"][side] is None and (
                abs(x - last["x"]) <= 1e-12 * max(1.0, abs(x))
                or x - last["xs"][0] < snap * dS):
            if abs(x - last["x"]) > 1e-12 * max(1.0, abs(x)):
                snapped += 1
            last["edge"][side] = (k, sg)
            last["xs"].append(x)
            last["x"] = 0.5 * (min(last["xs"]) + max(last["xs"]))
            continue
        nodes.append({"x": x, "xs": [x], "edge": [None, None]})
        nodes[-1]["edge"][side] = (k, sg)

    edge_x = np.array([nd["x"] for nd in nodes])

    def clear_of_edges(x: float) -> bool:
        return edge_x.size == 0 or np.min(np.abs(edge_x - x)) >= snap * dS

    anchors = []
    if period is None:
        lo_end = lo
        hi_end = hi
        while not clear_of_edges(lo_end):
            lo_end -= snap * dS
        while not clear_of_edges(hi_end):
            hi_end += snap * dS
        anchors += [lo_end, hi_end]
    if clear_of_edges(S_ref) or snap == 0:
        if edge_x.size == 0 or np.min(np.abs(edge_x - S_ref)) > 1e-12 * max(1.0, abs(S_ref)):
            anchors.append(S_ref)
    for x in anchors:
        nodes.append({"x": x, "xs": [x], "edge": [None, None]})
    nodes.sort(key=lambda nd: nd["x"])

    xs = [nd["x"] for nd in nodes]
    if period is not None:
        xs_closed = xs + [xs[0] + period]
    else:
        xs_closed = xs
    fill = []
    for x0, x1 in zip(xs_closed[:-1], xs_closed[1:]):
        gap = x1 - x0
        parts = max(1, math.ceil(gap / dS - 1e-9))
        for j in range(1, parts):
            fill.append({"x": x0 + gap * j / parts, "xs": [], "edge": [None, None]})
    nodes = sorted(nodes + fill, key=lambda nd: nd["x"])
    if len(nodes) < 3:
        raise ConfigurationError("grid has fewer than three nodes")
    s = np.array([nd["x"] for nd in nodes])
    if np.any(np.diff(s) <= 0):
        raise ConfigurationError("grid nodes are not strictly increasing")

    tables = tuple(_side_tables(s, nodes, side, alpha, eta, period)
                   for side, (alpha, eta) in enumerate(sides_spec))

    grid = StateGrid(cfg=cfg, sigma=params.sigma, T=params.T, q_max=params.q_max, s=s,
                     dt=0.0, n_steps=0, sides=tables, S_ref=S_ref, dS=dS,
                     period=period, snapped=snapped)
    lam_total = sum(params.lam / (1.0 + (params.kappa * a) ** 2)
                    for a in (cfg.alpha_a, cfg.alpha_b))
    dt_max = grid.cfl_limit()
    if lam_total > 0:
        dt_max = min(dt_max, 0.5 / lam_total)
    grid.n_steps = max(1, math.ceil(params.T / dt_max - 1e-12))
    grid.dt = params.T / grid.n_steps
    return grid


def _side_tables(s: np.ndarray, nodes: list[dict], side: int, alpha: float, eta: float,
                 period: float | None) -> SideTables:
    N = len(s)
    idx = np.zeros((N, 2), dtype=np.int64)
    valid = np.zeros((N, 2), dtype=bool)
    edge = np.zeros(N, dtype=np.int8)
    reach = (0.5 + eta) * alpha
    tol = GRID_RTOL * alpha
    for n, nd in enumerate(nodes):
        e = nd["edge"][side]
        if e is not None:
            k, sg = e
            idx[n] = (k, k + 1)
            # upper edge of zone k: index k is being left; lower edge: k + 1 is
            valid[n] = (sg < 0, sg > 0)
            edge[n] = sg
            continue
        r = s[n] / alpha
        f = math.floor(r + GRID_RTOL)
        c = math.ceil(r - GRID_RTOL)
        idx[n] = (f, c)
        for lab, i in enumerate((f, c)):
            valid[n, lab] = reach - abs(s[n] - i * alpha) > tol
        if not valid[n].any():
            raise ConfigurationError(f"node {s[n]} has no admissible fair price")
    canon = np.where(valid, np.arange(2)[None, :], 1 - np.arange(2)[None, :])
    ticks = round(period / alpha) if period is not None else 0

    def neighbour(n: int, lab: int, step: int) -> int:
        j = n + step
        shift = 0
        if period is not None:
            if j == N:
                j, shift = 0, -ticks
            elif j < 0:
                j, shift = N - 1, ticks
        else:
            j = min(max(j, 0), N - 1)
        i = idx[n, lab] + shift
        for cand in (0, 1):
            if idx[j, cand] == i:
                return cand
        return int(canon[j, lab])

    up = np.array([[neighbour(n, lab, 1) for lab in (0, 1)] for n in range(N)], dtype=np.int64)
    down = np.array([[neighbour(n, lab, -1) for lab in (0, 1)] for n in range(N)], dtype=np.int64)
    return SideTables(alpha, eta, idx, valid, edge, canon.astype(np.int64), up, down, ticks)
