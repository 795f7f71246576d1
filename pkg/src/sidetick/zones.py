"""Uncertainty-zone geometry and the statistics built on it.

A side with tick ``alpha`` and zone parameter ``eta`` trades on the grid
``{k * alpha}``.  Around every mid-tick ``(k + 1/2) * alpha`` sits a band of
half-width ``eta * alpha``; the traded (fair) price only moves to the next
tick once the efficient price leaves that band.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DomainError

log = logging.getLogger(__name__)

#: relative tolerance (in units of the tick) for grid and boundary membership
GRID_RTOL = 1e-9

SIDES = ("a", "b")


@dataclass(frozen=True)
class TickConfig:
    """Tick sizes and zone half-widths for the ask and bid grids.

    ``eta_0`` and ``alpha_0`` are the reference pair of the square-root
    scaling rule; they are only informational once the etas are set.
    """

    alpha_a: float
    alpha_b: float
    eta_a: float
    eta_b: float
    eta_0: float = 0.3
    alpha_0: float = 0.01

    def __post_init__(self):
        for name in ("alpha_a", "alpha_b", "alpha_0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("eta_a", "eta_b"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 0.5:
                raise DomainError(f"{name}={eta} is outside the large-tick range [0, 1/2]")

    @classmethod
    def from_ticks(cls, alpha_a: float, alpha_b: float, eta_0: float = 0.3,
                   alpha_0: float = 0.01) -> "TickConfig":
        """Build a config whose etas follow the square-root tick scaling."""
        return cls(alpha_a, alpha_b,
                   eta_for_tick(eta_0, alpha_0, alpha_a),
                   eta_for_tick(eta_0, alpha_0, alpha_b),
                   eta_0, alpha_0)

    def side(self, side: str) -> tuple[float, float]:
        """Return ``(alpha, eta)`` for side ``'a'`` or ``'b'``."""
        if side == "a":
            return self.alpha_a, self.eta_a
        if side == "b":
            return self.alpha_b, self.eta_b
        raise ValueError(f"unknown side {side!r}")

    def swapped(self) -> "TickConfig":
        return TickConfig(self.alpha_b, self.alpha_a, self.eta_b, self.eta_a,
                          self.eta_0, self.alpha_0)


def eta_for_tick(eta_0: float, alpha_0: float, alpha: float) -> float:
    """Zone parameter for tick ``alpha`` given the reference ``(eta_0, alpha_0)``.

    No clamping is applied: the result may exceed 1/2, and it is up to the
    caller to enforce the large-tick constraint.
    """
    if not alpha > 0 or not alpha_0 > 0:
        raise DomainError(f"tick sizes must be positive (alpha={alpha}, alpha_0={alpha_0})")
    if not 0.0 <= eta_0 <= 0.5:
        raise DomainError(f"eta_0={eta_0} outside [0, 1/2]")
    return eta_0 * math.sqrt(alpha_0 / alpha)


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 0.5:
        raise DomainError(f"eta={eta} outside [0, 1/2]")


def zone_bounds(k: int, alpha: float, eta: float) -> tuple[float, float]:
    """Lower and upper edge of the uncertainty zone around ``(k + 1/2) * alpha``."""
    _check_eta(eta)
    return (k + 0.5 - eta) * alpha, (k + 0.5 + eta) * alpha


def grid_index(price: float, alpha: float) -> int:
    """Index ``k`` of an on-grid price ``k * alpha``; raises if ``price`` is off-grid."""
    k = round(price / alpha)
    if abs(price - k * alpha) > GRID_RTOL * alpha * max(1.0, abs(k)):
        raise DomainError(f"price {price} is not on the grid of tick {alpha}")
    return int(k)


def fair_index_update(k: int, S: float, alpha: float, eta: float) -> int:
    """Move the fair-price index ``k`` one tick at a time until ``S`` is admissible."""
    reach = (0.5 + eta) * alpha
    while S - k * alpha > reach:
        k += 1
    while S - k * alpha < -reach:
        k -= 1
    return k


def fair_price_update(prev_fair: float, S: float, alpha: float, eta: float) -> float:
    """Fair price after the efficient price moved to ``S``.

    The fair price jumps by one tick when ``S`` leaves the band
    ``|S - fair| <= (1/2 + eta) * alpha``.  Larger moves (coarse time steps)
    are resolved by repeating the one-tick rule.
    """
    _check_eta(eta)
    k = grid_index(prev_fair, alpha)
    return fair_index_update(k, S, alpha, eta) * alpha


class Branches(NamedTuple):
    """Admissible fair-price indices at one efficient price."""

    indices: tuple[int, ...]
    on_boundary: bool


def valid_branches(S: float, alpha: float, eta: float) -> Branches:
    """Grid indices ``i`` with ``|S - i * alpha| < (1/2 + eta) * alpha``.

    On a zone edge the index being left is excluded and ``on_boundary`` is
    set; only the index on the interior side remains.  With ``eta == 0`` a
    mid-tick point is an edge for both neighbours, and both are returned.
    """
    _check_eta(eta)
    reach = (0.5 + eta) * alpha
    tol = GRID_RTOL * alpha
    i0 = round(S / alpha)
    inside, edge = [], []
    for i in (i0 - 1, i0, i0 + 1):
        margin = reach - abs(S - i * alpha)
        if margin > tol:
            inside.append(i)
        elif margin >= -tol:
            edge.append(i)
    if not inside:
        return Branches(tuple(edge), True)
    return Branches(tuple(inside), bool(edge))


def reconstruct_efficient_price(p_now: float, p_prev: float, alpha: float,
                                eta: float) -> float:
    """Efficient price at the instant a one-tick price change was observed."""
    _check_eta(eta)
    step = p_now - p_prev
    if abs(abs(step) - alpha) > GRID_RTOL * alpha * max(1.0, abs(p_now / alpha)):
        raise DomainError(
            f"price change {p_prev} -> {p_now} is not a single tick of {alpha}")
    return p_now - alpha * (0.5 - eta) * math.copysign(1.0, step)


# ---------------------------------------------------------------------------
# transaction data


class Transaction(NamedTuple):
    time: float
    price: float
    side: str


@dataclass
class PriceChangeSeries:
    """Successive one-tick price changes on one side of the book.

    ``prices[j]`` is the price after the ``j``-th change; ``initial_price`` is
    the level the first change moved away from.  ``linked[j]`` is False when
    change ``j`` follows a skipped multi-tick jump, in which case the pair
    ``(j - 1, j)`` is not an alternation or a continuation.
    """

    side: str
    alpha: float
    initial_price: float
    times: np.ndarray
    prices: np.ndarray
    linked: np.ndarray = field(default=None)
    directions: np.ndarray = field(default=None)
    skipped: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.prices = np.asarray(self.prices, dtype=float)
        if self.linked is None:
            self.linked = np.ones(len(self.prices), dtype=bool)
        self.linked = np.asarray(self.linked, dtype=bool)
        if self.directions is None:
            before = np.concatenate(([self.initial_price], self.prices[:-1]))
            self.directions = np.sign(self.prices - before)
        self.directions = np.asarray(self.directions, dtype=int)
        if len(self.prices) and np.any(np.abs(self.directions) != 1):
            raise DomainError("every change must move the price by one tick")

    def __len__(self):
        return len(self.prices)


def price_changes(transactions: Iterable[Transaction], side: str,
                  alpha: float) -> PriceChangeSeries:
    """Keep the transactions of ``side`` that moved the price.

    Rows whose move is not exactly one tick are logged and skipped; the
    reference level is reset to the new price so later changes still count.
    """
    times, prices, linked, dirs = [], [], [], []
    last = None
    initial = None
    skipped = 0
    broken = False
    for tr in transactions:
        if tr.side != side:
            continue
        if last is None:
            last = initial = tr.price
            continue
        ticks = (tr.price - last) / alpha
        n = round(ticks)
        if abs(ticks - n) > 1e-6:
            raise DomainError(f"price {tr.price} at t={tr.time} is off the grid of tick {alpha}")
        if n == 0:
            continue
        if abs(n) != 1:
            log.warning("side %s: %d-tick jump at t=%g skipped", side, n, tr.time)
            skipped += 1
            last = tr.price
            if not prices:
                initial = tr.price
            broken = True
            continue
        times.append(tr.time)
        prices.append(tr.price)
        linked.append(not broken)
        dirs.append(n)
        broken = False
        last = tr.price
    if initial is None:
        initial = math.nan
    return PriceChangeSeries(side, alpha, initial, np.array(times), np.array(prices),
                             np.array(linked, dtype=bool), np.array(dirs, dtype=int), skipped)


def count_alternations_continuations(series: PriceChangeSeries) -> tuple[int, int] | None:
    """Count consecutive change pairs in opposite (alternation) and same
    (continuation) directions.  Returns ``None`` with fewer than two changes.
    """
    if len(series) < 2:
        return None
    d = series.directions
    pairs = series.linked[1:]
    same = (d[1:] == d[:-1]) & pairs
    opposite = (d[1:] != d[:-1]) & pairs
    return int(opposite.sum()), int(same.sum())


def estimate_eta(n_cont: int, n_alt: int) -> float | None:
    """``n_cont / (2 n_alt)``; ``None`` when there is no alternation."""
    if n_alt <= 0:
        return None
    return n_cont / (2.0 * n_alt)


def read_transactions(path: str | Path) -> list[Transaction]:
    """Read a ``time,price,side`` CSV (side in ``{a, b}``)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"time", "price", "side"} - set(reader.fieldnames or ())
        if missing:
            raise DomainError(f"{path}: missing columns {sorted(missing)}")
        for lineno, rec in enumerate(reader, start=2):
            side = rec["side"].strip()
            if side not in SIDES:
                raise DomainError(f"{path}:{lineno}: side must be 'a' or 'b', got {side!r}")
            rows.append(Transaction(float(rec["time"]), float(rec["price"]), side))
    rows.sort(key=lambda r: r.time)
    return rows


def write_transactions(path: str | Path, rows: Iterable[Transaction]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "price", "side"])
        for r in rows:
            writer.writerow([repr(float(r.time)), repr(float(r.price)), r.side])


@dataclass
class EtaEstimate:
    side: str
    alpha: float
    eta_hat: float | None
    n_alt: int
    n_cont: int


def estimate_from_transactions(rows: list[Transaction], alpha_a: float,
                               alpha_b: float) -> list[EtaEstimate]:
    """Per-side eta estimates from raw transactions."""
    out = []
    for side, alpha in (("a", alpha_a), ("b", alpha_b)):
        series = price_changes(rows, side, alpha)
        counts = count_alternations_continuations(series)
        n_alt, n_cont = counts if counts is not None else (0, 0)
        out.append(EtaEstimate(side, alpha, estimate_eta(n_cont, n_alt), n_alt, n_cont))
    return out
