import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidetick.errors import DomainError
from sidetick.zones import (
    TickConfig,
    Transaction,
    count_alternations_continuations,
    estimate_eta,
    estimate_from_transactions,
    eta_for_tick,
    fair_price_update,
    price_changes,
    read_transactions,
    reconstruct_efficient_price,
    valid_branches,
    write_transactions,
    zone_bounds,
)


@pytest.mark.parametrize("eta0,a0,a,expected", [
    (0.3, 0.01, 0.01, 0.3),
    (0.3, 0.01, 0.04, 0.15),
    (0.3, 0.01, 0.0036, 0.5),
])
def test_eta_scaling(eta0, a0, a, expected):
    assert eta_for_tick(eta0, a0, a) == pytest.approx(expected, abs=1e-15)


def test_eta_scaling_rejects_bad_tick():
    with pytest.raises(DomainError):
        eta_for_tick(0.3, 0.01, 0.0)
    with pytest.raises(DomainError):
        eta_for_tick(0.3, -0.01, 0.01)


def test_eta_scaling_does_not_clamp():
    assert eta_for_tick(0.3, 0.01, 0.001) > 0.5


def test_zone_bounds_examples():
    assert zone_bounds(0, 0.01, 0.3) == pytest.approx((0.002, 0.008))
    lo, hi = zone_bounds(7, 0.01, 0.0)
    assert lo == hi == pytest.approx(0.075)
    # around the working price 10.5: band of tick 1050 centred at 10.505
    assert zone_bounds(1050, 0.01, 0.3) == pytest.approx((10.502, 10.508))


@given(k=st.integers(-10**6, 10**6), alpha=st.floats(1e-4, 1.0), eta=st.floats(0, 0.5))
def test_zone_width(k, alpha, eta):
    lo, hi = zone_bounds(k, alpha, eta)
    assert hi - lo == pytest.approx(2 * eta * alpha, rel=1e-9, abs=1e-9 * alpha * (abs(k) + 1))


@pytest.mark.parametrize("S,expected", [(10.509, 10.51), (10.507, 10.50), (10.491, 10.49)])
def test_fair_price_update_examples(S, expected):
    assert fair_price_update(10.50, S, 0.01, 0.3) == pytest.approx(expected, abs=1e-12)


def test_fair_price_update_off_grid():
    with pytest.raises(DomainError):
        fair_price_update(10.503, 10.5, 0.01, 0.3)


def test_fair_price_update_multi_tick():
    assert fair_price_update(10.50, 10.55, 0.01, 0.3) == pytest.approx(10.55)
    assert fair_price_update(10.50, 10.5479, 0.01, 0.3) == pytest.approx(10.54)


@settings(max_examples=200)
@given(k=st.integers(900, 1100), d1=st.floats(-0.05, 0.05), d2=st.floats(-0.05, 0.05),
       eta=st.floats(0, 0.5))
def test_fair_price_update_monotone_and_admissible(k, d1, d2, eta):
    alpha = 0.01
    prev = k * alpha
    S1, S2 = sorted((prev + d1, prev + d2))
    f1 = fair_price_update(prev, S1, alpha, eta)
    f2 = fair_price_update(prev, S2, alpha, eta)
    assert f1 <= f2 + 1e-12
    for S, f in ((S1, f1), (S2, f2)):
        assert abs(S - f) <= (0.5 + eta) * alpha + 1e-12


def test_valid_branches_examples():
    assert valid_branches(10.500, 0.01, 0.3) == ((1050,), False)
    assert valid_branches(10.505, 0.01, 0.3) == ((1050, 1051), False)
    # upper edge of the band around 10.505: only the tick above survives
    assert valid_branches(10.508, 0.01, 0.3) == ((1051,), True)
    assert valid_branches(10.502, 0.01, 0.3) == ((1050,), True)


@settings(max_examples=300)
@given(S=st.floats(9.0, 12.0), eta=st.floats(0.01, 0.5))
def test_valid_branches_count_matches_zone_membership(S, eta):
    alpha = 0.01
    k = round(S / alpha - 0.5)
    lo, hi = zone_bounds(k, alpha, eta)
    br = valid_branches(S, alpha, eta)
    tol = 1e-9 * alpha
    if lo + tol < S < hi - tol:
        assert len(br.indices) == 2
    elif not (abs(S - lo) <= tol or abs(S - hi) <= tol):
        assert len(br.indices) == 1 and not br.on_boundary


def test_reconstruction_examples():
    assert reconstruct_efficient_price(10.51, 10.50, 0.01, 0.3) == pytest.approx(10.508)
    assert reconstruct_efficient_price(10.50, 10.51, 0.01, 0.3) == pytest.approx(10.502)
    with pytest.raises(DomainError):
        reconstruct_efficient_price(10.52, 10.50, 0.01, 0.3)


@given(k=st.integers(500, 1500), up=st.booleans(), eta=st.floats(0, 0.5))
def test_reconstruction_is_the_crossing_point(k, up, eta):
    alpha = 0.01
    prev = k * alpha
    now = prev + (alpha if up else -alpha)
    edge = prev + (1 if up else -1) * (0.5 + eta) * alpha
    assert reconstruct_efficient_price(now, prev, alpha, eta) == pytest.approx(edge, abs=1e-12)


def _series(moves, alpha=0.01, start=10.0):
    rows = [Transaction(0.0, start, "a")]
    p = start
    for i, m in enumerate(moves, 1):
        p += m * alpha
        rows.append(Transaction(float(i), p, "a"))
        rows.append(Transaction(i + 0.5, p, "a"))   # repeated prints are ignored
    return price_changes(rows, "a", alpha)


@pytest.mark.parametrize("moves,expected", [
    ((1, -1, 1), (2, 0)),
    ((1, 1, 1), (0, 2)),
    ((1, 1, -1, -1, 1), (2, 2)),
])
def test_alternations_continuations(moves, expected):
    assert count_alternations_continuations(_series(moves)) == expected


def test_too_few_changes_is_empty():
    assert count_alternations_continuations(_series((1,))) is None


@given(st.lists(st.sampled_from((-1, 1)), min_size=2, max_size=60))
def test_counts_partition_pairs(moves):
    n_alt, n_cont = count_alternations_continuations(_series(moves))
    assert n_alt + n_cont == len(moves) - 1


def test_estimate_eta():
    assert estimate_eta(3, 5) == pytest.approx(0.3)
    assert estimate_eta(0, 7) == 0.0
    assert estimate_eta(4, 0) is None


def test_multi_tick_rows_are_skipped():
    rows = [Transaction(0, 10.0, "a"), Transaction(1, 10.01, "a"), Transaction(2, 10.04, "a"),
            Transaction(3, 10.05, "a"), Transaction(4, 10.04, "a")]
    s = price_changes(rows, "a", 0.01)
    assert s.skipped == 1
    # the pair spanning the skipped jump is not counted
    assert count_alternations_continuations(s) == (1, 0)


def test_transaction_csv_round_trip(tmp_path):
    rows = [Transaction(0.0, 10.5, "a"), Transaction(0.5, 10.49, "b"), Transaction(1.0, 10.51, "a")]
    path = tmp_path / "tx.csv"
    write_transactions(path, rows)
    assert path.read_text().splitlines()[0] == "time,price,side"
    assert read_transactions(path) == rows


def test_transaction_csv_rejects_bad_side(tmp_path):
    path = tmp_path / "tx.csv"
    path.write_text("time,price,side\n0,10.5,x\n")
    with pytest.raises(DomainError):
        read_transactions(path)


def test_estimate_from_transactions():
    rows = [Transaction(0.0, 10.0, "a")]
    p = 10.0
    for i, m in enumerate((1, -1, 1, 1, -1), 1):
        p += 0.01 * m
        rows.append(Transaction(float(i), p, "a"))
    est = {e.side: e for e in estimate_from_transactions(rows, 0.01, 0.01)}
    assert (est["a"].n_alt, est["a"].n_cont) == (3, 1)
    assert est["a"].eta_hat == pytest.approx(1 / 6)
    assert est["b"].eta_hat is None


def test_tick_config_validation():
    with pytest.raises(DomainError):
        TickConfig(0.01, 0.01, 0.6, 0.3)
    with pytest.raises(DomainError):
        TickConfig.from_ticks(0.001, 0.01)
    cfg = TickConfig.from_ticks(0.04, 0.01)
    assert cfg.eta_a == pytest.approx(0.15)
    assert cfg.swapped().alpha_a == 0.01


def test_config_side_lookup():
    cfg = TickConfig.from_ticks(0.01, 0.02)
    assert cfg.side("a") == (0.01, pytest.approx(0.3))
    assert cfg.side("b")[0] == 0.02
    assert np.isclose(cfg.side("b")[1], 0.3 * math.sqrt(0.5))
