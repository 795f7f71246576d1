import csv
import json
import math

import numpy as np
import pytest

from sidetick.errors import ConfigurationError, DomainError
from sidetick.hjb import ModelParams, build_grid, solve
from sidetick.sim import (
    MarketState,
    PolicyLookup,
    SimConfig,
    exchange_revenue_estimators,
    path_rng,
    run_paths,
    step,
    write_change_log,
    write_paths,
    write_summary,
)
from sidetick.zones import TickConfig, read_transactions

PARAMS = ModelParams(T=2.0, phi_minus=0.005, lam=40.0)


def _always(*_):
    return 1, 1


@pytest.fixture(scope="module")
def solved():
    cfg = TickConfig.from_ticks(0.01, 0.01)
    g = build_grid(cfg, PARAMS, 10.5, 0.01 / 8, periodic=True)
    vg, _ = solve(cfg, PARAMS, g, fee_flow=True)
    return cfg, vg


@pytest.fixture(scope="module")
def sample(solved):
    cfg, vg = solved
    return run_paths(vg, cfg, PARAMS, SimConfig(n_paths=1500, seed=3))


def test_fill_frequency_is_bernoulli():
    # rate * dt = 0.1 gives a fill probability of 1 - exp(-0.1) per step
    cfg = TickConfig.from_ticks(0.01, 0.01)
    p = ModelParams(lam=100.0 * (1 + 0.1 ** 2), q_max=10 ** 9)
    rng = np.random.default_rng(11)
    st = MarketState(0.0, 10.5, 10.5, 10.5, 0)
    n = 10 ** 6
    for _ in range(n):
        st = step(st, _always, cfg, p, 1e-3, rng)
    target = -math.expm1(-0.1)
    assert target == pytest.approx(0.09516, abs=1e-5)
    se = math.sqrt(target * (1 - target) / n)
    assert abs(st.N_a / n - target) < 3 * se
    assert abs(st.N_b / n - target) < 3 * se


def test_inventory_bound_blocks_the_full_side():
    cfg = TickConfig.from_ticks(0.01, 0.01)
    p = ModelParams(lam=200.0, q_max=2)
    rng = np.random.default_rng(0)
    st = MarketState(0.0, 10.5, 10.5, 10.5, 2)
    for _ in range(2000):
        st = step(st, _always, cfg, p, 1e-3, rng)
        assert -2 <= st.Q <= 2
    assert st.N_a > 0 and st.N_b > 0
    st = MarketState(0.0, 10.5, 10.5, 10.5, 2)
    pol = lambda *a: (0, 1)  # noqa: E731
    for _ in range(500):
        st = step(st, pol, cfg, p, 1e-3, rng)
    assert st.N_b == 0 and st.Q == 2


def test_fair_prices_stay_admissible_and_cash_adds_up(solved):
    cfg, vg = solved
    pol = PolicyLookup(vg, cfg, PARAMS.q_max)
    rng = path_rng(21, 0)
    st = MarketState(0.0, 10.5, 10.5, 10.5, 0)
    cash = 0.0
    for _ in range(2000):
        prev = st
        st = step(st, pol, cfg, PARAMS, 1e-3, rng)
        assert abs(st.S - st.S_a) <= (0.5 + cfg.eta_a) * cfg.alpha_a + 1e-12
        assert abs(st.S - st.S_b) <= (0.5 + cfg.eta_b) * cfg.alpha_b + 1e-12
        cash += (st.N_a - prev.N_a) * st.S_a - (st.N_b - prev.N_b) * st.S_b
    assert st.N_a + st.N_b > 0
    assert st.X == pytest.approx(cash, abs=1e-12)
    assert st.Q == st.N_b - st.N_a


def test_no_market_maker_is_a_pure_random_walk():
    cfg = TickConfig.from_ticks(0.01, 0.01)
    p = ModelParams(T=4.0, sigma=0.05)
    r = run_paths(None, cfg, p, SimConfig(n_paths=2000, seed=5))
    assert np.all(r.N_a == 0) and np.all(r.N_b == 0) and np.all(r.X_T == 0)
    assert np.all(r.mm_objective == 0)
    inc = r.S_T - 10.5
    assert abs(inc.mean()) < 3 * inc.std() / math.sqrt(inc.size)
    var_se = 0.05 ** 2 * 4.0 * math.sqrt(2 / inc.size)
    assert abs(inc.var() - 0.05 ** 2 * 4.0) < 4 * var_se


def test_zero_intensity_gives_zero_objective():
    p = PARAMS.replace(lam=0.0)
    cfg = TickConfig.from_ticks(0.01, 0.01)
    vg, _ = solve(cfg, p, build_grid(cfg, p, 10.5, 0.01 / 4, periodic=True))
    r = run_paths(vg, cfg, p, SimConfig(n_paths=200, seed=1))
    assert np.all(r.N_a + r.N_b == 0)
    assert np.all(r.mm_objective == 0) and np.all(r.revenue_rate == 0)
    assert abs(vg.value_at(10.5)) < 1e-12


def test_same_seed_same_paths(solved):
    cfg, vg = solved
    a = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=50, seed=9))
    b = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=50, seed=9))
    c = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=50, seed=10))
    assert np.array_equal(a.mm_objective, b.mm_objective)
    assert np.array_equal(a.N_a, b.N_a)
    assert not np.array_equal(a.S_T, c.S_T)
    # a path does not depend on how many others run with it
    d = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=10, seed=9))
    assert np.array_equal(a.mm_objective[:10], d.mm_objective)


def test_accounting_identities(sample):
    r = sample
    p = PARAMS
    assert np.array_equal(r.Q_T, r.N_b - r.N_a)
    assert np.all((r.Q_min >= -p.q_max) & (r.Q_max <= p.q_max))
    assert np.all((r.Q_min <= r.Q_T) & (r.Q_T <= r.Q_max))
    assert np.all(r.mm_objective <= r.X_T + r.Q_T * (r.S_T - p.A * r.Q_T) + 1e-12)
    assert np.all(r.revenue_count == p.c * (r.N_a + r.N_b))
    assert np.all(r.flagged_steps == 0)


def test_revenue_estimators_agree(sample):
    count, rate = exchange_revenue_estimators(sample)
    assert abs(count.mean - rate.mean) < 3 * math.hypot(count.se, rate.se)
    assert rate.se < count.se


def test_monte_carlo_matches_the_pde():
    # lam * dt_sim must stay small at lam = 40, so both sides run finer here
    cfg = TickConfig.from_ticks(0.01, 0.01)
    fine, _ = solve(cfg, PARAMS, build_grid(cfg, PARAMS, 10.5, 0.01 / 32, periodic=True),
                    fee_flow=True, slices=10_000)
    coarse, _ = solve(cfg, PARAMS, build_grid(cfg, PARAMS, 10.5, 0.01 / 16, periodic=True),
                      fee_flow=True)
    r = run_paths(fine, cfg, PARAMS, SimConfig(n_paths=2000, seed=3, dt_sim=4e-4))
    m, se = r.mean_se(r.mm_objective)
    h_err = abs(fine.value_at(10.5) - coarse.value_at(10.5))
    assert abs(m - fine.value_at(10.5)) < 3 * se + h_err
    _, rate = exchange_revenue_estimators(r)
    v_err = abs(fine.flow_at(10.5) - coarse.flow_at(10.5))
    assert abs(rate.mean - fine.flow_at(10.5)) < 3 * rate.se + v_err


def test_revenue_is_linear_in_fee(solved):
    cfg, vg = solved
    a = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=40, seed=2))
    b = run_paths(vg, cfg, PARAMS.replace(c=2.0), SimConfig(n_paths=40, seed=2))
    assert np.array_equal(b.revenue_count, 2 * a.revenue_count)
    np.testing.assert_allclose(b.revenue_rate, 2 * a.revenue_rate, rtol=1e-14)
    assert np.array_equal(a.mm_objective, b.mm_objective)


@pytest.mark.parametrize("ticks,periodic", [((0.01, 0.01), True), ((0.0045, 0.025), True),
                                            ((0.01, 0.00625), False)])
def test_kernel_matches_single_step_reference(ticks, periodic):
    a, b = ticks
    cfg = TickConfig.from_ticks(a, b)
    g = build_grid(cfg, PARAMS, 10.5, min(a, b) / 8, periodic=periodic)
    vg, _ = solve(cfg, PARAMS, g)
    r = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=3, seed=7))
    pol = PolicyLookup(vg, cfg, PARAMS.q_max)
    for path in range(3):
        rng = path_rng(7, path)
        st = MarketState(0.0, 10.5, round(10.5 / a) * a, round(10.5 / b) * b, 0)
        for _ in range(r.n_steps):
            st = step(st, pol, cfg, PARAMS, 1e-3, rng)
        assert (st.N_a, st.N_b, st.Q) == (r.N_a[path], r.N_b[path], r.Q_T[path])
        assert st.S == r.S_T[path]
        assert st.X == pytest.approx(r.X_T[path], abs=1e-9)


def test_change_log_matches_step_reference():
    cfg = TickConfig.from_ticks(0.01, 0.0125)
    p = ModelParams(T=5.0)
    r = run_paths(None, cfg, p, SimConfig(n_paths=1, seed=4, log_changes=True))
    log = r.logs[0]
    rng = path_rng(4, 0)
    st = MarketState(0.0, 10.5, 10.5, 10.5, 0)
    pol = PolicyLookup(None, cfg, p.q_max)
    for _ in range(r.n_steps):
        st = step(st, pol, cfg, p, 1e-3, rng)
    assert len(st.changes) == len(log.times) > 0
    for tr, t, price, side in zip(st.changes, log.times, log.prices, log.sides):
        assert (tr.side, tr.price) == (side, pytest.approx(price))
        assert tr.time == pytest.approx(t)


def test_configuration_checks(solved):
    cfg, vg = solved
    with pytest.raises(ConfigurationError):
        run_paths(vg, cfg, PARAMS, SimConfig(dt_sim=0.3))
    with pytest.raises(ConfigurationError):
        run_paths(vg, cfg, PARAMS, SimConfig(dt_sim=0.7e-3 * 3))
    with pytest.raises(ConfigurationError):
        run_paths(vg, TickConfig.from_ticks(0.01, 0.02), PARAMS, SimConfig())
    with pytest.raises(ConfigurationError):
        run_paths(vg, cfg, PARAMS.replace(q_max=3), SimConfig())
    with pytest.raises(DomainError):
        run_paths(vg, cfg, PARAMS, SimConfig(Q0=9))
    with pytest.raises(DomainError):
        run_paths(vg, cfg, PARAMS, SimConfig(S_a0=10.6))
    with pytest.raises(ConfigurationError):
        SimConfig(n_paths=0)


def test_exports(tmp_path, solved):
    cfg, vg = solved
    r = run_paths(vg, cfg, PARAMS, SimConfig(n_paths=20, seed=1, log_changes=True))
    write_paths(tmp_path / "paths.csv", r)
    rows = list(csv.reader(open(tmp_path / "paths.csv")))
    assert rows[0] == ["path", "mm_objective", "exchange_revenue", "N_a", "N_b", "Q_T"]
    assert len(rows) == 21
    assert float(rows[5][1]) == r.mm_objective[4]
    write_summary(tmp_path / "summary.json", r, {"note": 1})
    data = json.loads((tmp_path / "summary.json").read_text())
    assert data["n_paths"] == 20 and data["note"] == 1
    assert set(data["revenue_estimators"]) == {"counting", "rate"}
    write_change_log(tmp_path / "tx.csv", r.logs[0])
    tx = read_transactions(tmp_path / "tx.csv")
    assert len(tx) == len(r.logs[0].times) + 2
