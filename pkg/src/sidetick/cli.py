"""Command line front end: configuration, figure presets and file output.

Configuration is an INI file with the sections below; every key has a
typed default and unknown sections or keys are rejected.  ``--set
section.key=value`` overrides single entries.  Each run writes the fully
expanded configuration and the package version next to its outputs.

Exit codes: 0 success, 1 invalid input, 2 failed numerical assertion.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigurationError, DomainError, NumericalAssertionError
from .exchange import ScanSpec, grid_search, half_unit_axis, tick_axis
from .hjb import ModelParams, build_grid, solve
from .hjb.solver import export_csv
from .sim import SimConfig, run_paths, write_change_log, write_paths, write_summary
from .zones import TickConfig, estimate_from_transactions, read_transactions

log = logging.getLogger("sidetick")

PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "appendix", "custom")

DEFAULTS: dict[str, dict[str, object]] = {
    "model": {"sigma": 0.01, "lam": 4.0, "kappa": 10.0, "phi": 0.005, "phi_minus": 0.0,
              "A": 0.1, "q_max": 5, "T": 40.0, "c": 1.0},
    "ticks": {"alpha_a": 0.01, "alpha_b": 0.01, "eta_0": 0.3, "alpha_0": 0.01},
    "grid": {"S_ref": 10.5, "mesh_div": 32.0, "margin": 5.0, "periodic": True, "snap": 0.5,
             "slices": 160, "fractional": True, "export_slices": "0"},
    "sim": {"dt_sim": 1e-3, "n_paths": 1000, "S0": 10.5, "Q0": 0, "log_changes": False,
            "log_paths": 1},
    "scan": {"alpha_a": "0.0045:0.05:0.0005", "alpha_b": "0.0045:0.05:0.0005",
             "phi_minus": "0.0", "symmetric": False, "on_grid": False, "large_tick": True,
             "method": "pde", "mesh_div": 8.0, "error_estimate": False, "n_paths": 2000},
    "oracle": {"alpha_a": 0.01, "alpha_b": 0.00625, "T": 3.0, "q_max": 2,
               "phi_minus": 0.005, "dS": 0.0025, "margin": 3.0, "fill": "linear",
               "tolerance": 1e-8},
    "estimate": {"transactions": ""},
    "appendix": {"half_width": 0.03, "q": 0},
    "run": {"preset": "custom", "seed": 0, "out": "out", "threads": 1},
}

FIG_PHI = "0.0, 0.0005, 0.005"

# each preset is a set of overrides on top of the defaults
PRESET_OVERRIDES: dict[str, dict[str, dict[str, object]]] = {
    "fig1": {"scan": {"alpha_a": "0.5/n:0.0045:0.05", "symmetric": True, "on_grid": True,
                      "phi_minus": FIG_PHI, "mesh_div": 32.0}},
    "fig3": {"scan": {"alpha_b": "0.0124", "phi_minus": FIG_PHI}},
    "fig4": {"scan": {"alpha_a": "0.0045:0.0495:0.0025", "alpha_b": "0.0045:0.0495:0.0025",
                      "phi_minus": "0.0", "mesh_div": 6.0}},
    "fig5": {"scan": {"alpha_a": "0.0045:0.0495:0.0025", "alpha_b": "0.0045:0.0495:0.0025",
                      "phi_minus": "0.005", "mesh_div": 6.0}},
    "fig6": {"scan": {"alpha_a": "0.0045:0.0495:0.0025", "alpha_b": "0.0045:0.0495:0.0025",
                      "phi_minus": "0.0, 0.005", "mesh_div": 6.0}},
    "fig7": {"scan": {"alpha_a": "0.0045", "phi_minus": FIG_PHI, "mesh_div": 6.0}},
    "appendix": {"ticks": {"alpha_a": 0.01, "alpha_b": 0.00625},
                 "grid": {"periodic": False, "mesh_div": 16.0}},
}
PRESET_OVERRIDES["fig2"] = PRESET_OVERRIDES["fig1"]


# --------------------------------------------------------------------------- config

def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _coerce(section: str, key: str, raw: object) -> object:
    default = DEFAULTS[section][key]
    if not isinstance(raw, str):
        raw = str(raw)
    try:
        if isinstance(default, bool):
            return _parse_bool(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigurationError(
            f"[{section}] {key}: cannot read {raw!r} as {type(default).__name__}") from None


class Config:
    """Typed view of the configuration sections."""

    def __init__(self, values: dict[str, dict[str, object]]):
        self.values = values

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    @classmethod
    def load(cls, path: str | None = None, overrides: list[str] = (),
             preset: str | None = None) -> "Config":
        values = {s: dict(d) for s, d in DEFAULTS.items()}

        def put(section, key, raw):
            if section not in DEFAULTS:
                raise ConfigurationError(f"unknown section [{section}]")
            if key not in DEFAULTS[section]:
                raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
            values[section][key] = _coerce(section, key, raw)

        file_values = []
        if path is not None:
            parser = configparser.ConfigParser(interpolation=None)
            parser.optionxform = str
            try:
                with open(path) as fh:
                    parser.read_file(fh)
            except (OSError, configparser.Error) as exc:
                raise ConfigurationError(f"cannot read config {path}: {exc}") from None
            for section in parser.sections():
                for key, raw in parser.items(section):
                    file_values.append((section, key, raw))
        sets = []
        for item in overrides:
            name, sep, raw = item.partition("=")
            section, dot, key = name.strip().partition(".")
            if not sep or not dot:
                raise ConfigurationError(f"--set expects section.key=value, got {item!r}")
            sets.append((section, key, raw))
        # the preset is resolved first so file entries and --set win over it
        for section, key, raw in file_values + sets:
            if (section, key) == ("run", "preset"):
                put(section, key, raw)
        name = preset or values["run"]["preset"]
        if name not in PRESETS:
            raise ConfigurationError(f"unknown preset {name!r}; choose from {PRESETS}")
        values["run"]["preset"] = name
        for section, entries in PRESET_OVERRIDES.get(name, {}).items():
            for key, raw in entries.items():
                put(section, key, raw)
        for section, key, raw in file_values + sets:
            put(section, key, raw)
        cfg = cls(values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        self.model_params()
        self.ticks()
        self.scan_spec()
        g = self["grid"]
        if not g["mesh_div"] > 0:
            raise ConfigurationError("[grid] mesh_div must be positive")
        if g["slices"] < 1:
            raise ConfigurationError("[grid] slices must be >= 1")
        if self["run"]["threads"] < 1:
            raise ConfigurationError("[run] threads must be >= 1")
        if self["oracle"]["fill"] not in ("linear", "exponential"):
            raise ConfigurationError("[oracle] fill must be 'linear' or 'exponential'")

    def dump(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for section, entries in self.values.items():
            parser[section] = {k: _fmt(v) for k, v in entries.items()}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    # -- typed builders
    def model_params(self, **changes) -> ModelParams:
        try:
            return ModelParams(**{**self["model"], **changes})
        except DomainError as exc:
            raise ConfigurationError(f"[model] {exc}") from None

    def ticks(self) -> TickConfig:
        t = self["ticks"]
        try:
            return TickConfig.from_ticks(t["alpha_a"], t["alpha_b"], t["eta_0"], t["alpha_0"])
        except DomainError as exc:
            raise ConfigurationError(f"[ticks] {exc}") from None

    def scan_spec(self) -> ScanSpec:
        s = self["scan"]
        return ScanSpec(alpha_a=_axis("alpha_a", s["alpha_a"]),
                        alpha_b=_axis("alpha_b", s["alpha_b"]),
                        phi_minus=_floats("phi_minus", s["phi_minus"]),
                        symmetric=s["symmetric"], on_grid=s["on_grid"],
                        large_tick=s["large_tick"], method=s["method"],
                        eta_0=self["ticks"]["eta_0"], alpha_0=self["ticks"]["alpha_0"],
                        mesh_div=s["mesh_div"], error_estimate=s["error_estimate"],
                        S0=self["grid"]["S_ref"], n_paths=s["n_paths"],
                        dt_sim=self["sim"]["dt_sim"], seed=self["run"]["seed"])


def _fmt(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _floats(key: str, text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigurationError(f"[scan] {key}: expected a comma separated list") from None


def _axis(key: str, text: str) -> tuple:
    """``lo:hi:step``, ``0.5/n:lo:hi`` or a comma separated list of ticks."""
    if text.strip().startswith("0.5/n"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"[scan] {key}: expected 0.5/n:lo:hi, got {text!r}")
        try:
            lo, hi = float(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigurationError(f"[scan] {key}: bad number in {text!r}") from None
        return half_unit_axis(lo, hi)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"[scan] {key}: expected lo:hi:step, got {text!r}")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigurationError(f"[scan] {key}: bad number in {text!r}") from None
        return tick_axis(lo, hi, step)
    values = _floats(key, text)
    if not values:
        raise ConfigurationError(f"[scan] {key} is empty")
    return values


# --------------------------------------------------------------------------- outputs

def _prepare_out(cfg: Config) -> Path:
    out = Path(cfg["run"]["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.dump())
    (out / "VERSION").write_text(f"sidetick {__version__}\n")
    return out


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, str) else repr(x) if isinstance(x, float) else x
                        for x in r])


def _solve(cfg: Config, fee_flow: bool = True):
    params = cfg.model_params()
    ticks = cfg.ticks()
    g = cfg["grid"]
    dS = min(ticks.alpha_a, ticks.alpha_b) / g["mesh_div"]
    grid = build_grid(ticks, params, g["S_ref"], dS, g["margin"], periodic=g["periodic"],
                      snap=g["snap"])
    vg, pg = solve(ticks, params, grid, fee_flow=fee_flow, fractional=g["fractional"],
                   slices=g["slices"])
    return params, ticks, grid, vg, pg


def _solve_summary(vg, grid, S: float) -> dict:
    na, nb = vg.fills_at(S)
    return {"S": S, "h": vg.value_at(S), "v": vg.flow_at(S), "Na": na, "Nb": nb,
            "dt": grid.dt, "n_steps": grid.n_steps, "n_nodes": grid.n_nodes,
            "dS": grid.dS, "period": grid.period}


# --------------------------------------------------------------------------- commands

def cmd_solve(cfg: Config, args) -> int:
    out = _prepare_out(cfg)
    _, _, grid, vg, pg = _solve(cfg)
    which = cfg["grid"]["export_slices"].strip()
    if which == "all":
        slices = None
    else:
        try:
            slices = [int(x) for x in which.split(",") if x.strip()]
        except ValueError:
            raise ConfigurationError("[grid] export_slices: 'all' or a list of slice numbers")
        if any(not 0 <= j < len(vg.times) for j in slices):
            raise ConfigurationError(f"[grid] export_slices outside 0..{len(vg.times) - 1}")
    export_csv(out / "values.csv", vg, pg, slices=slices)
    # timings stay out of the files so reruns are byte-identical
    log.info("solved in %.2fs", vg.elapsed)
    _write_json(out / "summary.json", _solve_summary(vg, grid, cfg["grid"]["S_ref"]))
    return 0


def cmd_simulate(cfg: Config, args) -> int:
    out = _prepare_out(cfg)
    params, ticks, grid, vg, _ = _solve(cfg)
    s = cfg["sim"]
    simcfg = SimConfig(dt_sim=s["dt_sim"], n_paths=s["n_paths"], seed=cfg["run"]["seed"],
                       S0=s["S0"], Q0=s["Q0"], log_changes=s["log_changes"],
                       log_paths=s["log_paths"])
    res = run_paths(vg, ticks, params, simcfg)
    pde = {"h": vg.value_at(s["S0"], s["Q0"]), "v": vg.flow_at(s["S0"], s["Q0"])}
    write_summary(out / "summary.json", res, {"pde": pde, "seed": simcfg.seed})
    write_paths(out / "paths.csv", res)
    for p, chg in enumerate(res.logs):
        write_change_log(out / f"changes_{p}.csv", chg)
    return 0


def cmd_scan(cfg: Config, args) -> int:
    out = _prepare_out(cfg)
    res = grid_search(cfg.scan_spec(), cfg.model_params(), progress=_progress)
    res.write_csv(out / "scan.csv")
    res.write_argmax(out / "argmax.json")
    return 0


def _progress(row) -> None:
    log.info("alpha=(%.5g, %.5g) phi_minus=%g  v=%.4f  h=%.6f  (%.1fs)", row.alpha_a,
             row.alpha_b, row.phi_minus, row.v, row.h_mm, row.elapsed)


def cmd_estimate_eta(cfg: Config, args) -> int:
    path = args.transactions or cfg["estimate"]["transactions"]
    if not path:
        raise ConfigurationError("no transaction file: pass one or set [estimate] transactions")
    out = _prepare_out(cfg)
    try:
        rows = read_transactions(path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    t = cfg["ticks"]
    est = estimate_from_transactions(rows, t["alpha_a"], t["alpha_b"])
    _write_rows(out / "eta.csv", ["side", "alpha", "eta_hat", "n_alt", "n_cont"],
                [(e.side, e.alpha, "" if e.eta_hat is None else e.eta_hat, e.n_alt, e.n_cont)
                 for e in est])
    return 0


def cmd_oracle_check(cfg: Config, args) -> int:
    from .oracle import certification_lattice, compare, oracle_value

    out = _prepare_out(cfg)
    o = cfg["oracle"]
    try:
        spec = certification_lattice(o["alpha_a"], o["alpha_b"], o["T"], o["q_max"],
                                     o["phi_minus"], o["dS"], o["margin"],
                                     cfg["grid"]["S_ref"], cfg["ticks"]["eta_0"],
                                     cfg["ticks"]["alpha_0"], cfg.model_params())
    except DomainError as exc:
        raise ConfigurationError(f"[oracle] {exc}") from None
    spec.fill = o["fill"]
    grid, params = spec.grid, spec.params
    vg, _ = solve(grid.cfg, params, grid, slices=grid.n_steps)
    table = oracle_value(spec)
    d = compare(table, vg)
    ok = d.max_abs <= o["tolerance"]
    _write_json(out / "oracle.json", {
        "max_abs": d.max_abs, "index": list(d.index), "oracle": d.oracle, "solver": d.solver,
        "tolerance": o["tolerance"], "pass": ok, "n_nodes": grid.n_nodes,
        "n_steps": grid.n_steps, "moment_residual": spec.check()})
    print(f"oracle-check: max |oracle - solver| = {d.max_abs:.3e} at {d.index} "
          f"({'PASS' if ok else 'FAIL'}, tolerance {o['tolerance']:g})")
    if not ok:
        raise NumericalAssertionError("solver disagrees with the oracle")
    return 0


# ----------------------------------------------------------------------------- figures

def _series(res, key_alpha: str) -> list:
    return [(getattr(r, key_alpha), r.phi_minus, r.h_mm, r.v) for r in res.rows]


def _difference_rows(res, key_alpha: str, base_phi: float = 0.0) -> list:
    """Rows of ``phi_minus != base`` minus the aligned ``base`` row."""
    base = {(r.alpha_a, r.alpha_b): r for r in res.select(base_phi)}
    rows = []
    for r in res.rows:
        if r.phi_minus == base_phi:
            continue
        b = base[(r.alpha_a, r.alpha_b)]
        rows.append((getattr(r, key_alpha), r.phi_minus, r.h_mm - b.h_mm, r.v - b.v))
    return rows


def _figure_scan(cfg: Config, out: Path):
    res = grid_search(cfg.scan_spec(), cfg.model_params(), progress=_progress)
    res.write_csv(out / "scan.csv")
    res.write_argmax(out / "argmax.json")
    return res


def cmd_figure(cfg: Config, args) -> int:
    name = cfg["run"]["preset"]
    out = _prepare_out(cfg)
    if name == "appendix":
        return _figure_appendix(cfg, out)
    res = _figure_scan(cfg, out)
    if name == "fig1":
        _write_rows(out / "fig1.csv", ["alpha", "phi_minus", "h", "v"], _series(res, "alpha_a"))
    elif name == "fig2":
        _write_rows(out / "fig2.csv", ["alpha", "phi_minus", "dh", "dv"],
                    _difference_rows(res, "alpha_a"))
    elif name == "fig3":
        _write_rows(out / "fig3.csv", ["alpha_a", "phi_minus", "h", "v"],
                    _series(res, "alpha_a"))
    elif name in ("fig4", "fig5"):
        _write_rows(out / f"{name}.csv", ["alpha_a", "alpha_b", "h", "v", "Na", "Nb"],
                    [(r.alpha_a, r.alpha_b, r.h_mm, r.v, r.Na_mean, r.Nb_mean)
                     for r in res.rows])
    elif name == "fig6":
        phis = sorted(set(r.phi_minus for r in res.rows))
        rows = []
        base = {(r.alpha_a, r.alpha_b): r for r in res.select(phis[0])}
        for r in res.select(phis[-1]):
            b = base[(r.alpha_a, r.alpha_b)]
            rows.append((r.alpha_a, r.alpha_b, r.h_mm - b.h_mm, r.v - b.v))
        _write_rows(out / "fig6.csv", ["alpha_a", "alpha_b", "dh", "dv"], rows)
    elif name == "fig7":
        _write_rows(out / "fig7.csv", ["alpha_b", "phi_minus", "h", "v"],
                    _series(res, "alpha_b"))
        _write_json(out / "fig7_summary.json", compensation_summary(res))
    return 0


def compensation_summary(res, keep_alpha_b: float | None = None) -> dict:
    """Revenue lost by the exchange when the short penalty is switched on.

    Compares the best revenue without penalty with the best revenue under the
    largest penalty (ticks re-optimized) and with the revenue at the old
    optimal tick (ticks kept).
    """
    phis = sorted(set(r.phi_minus for r in res.rows))
    lo, hi = phis[0], phis[-1]
    best_lo = res.argmax(lo)
    best_hi = res.argmax(hi)
    keep = best_lo.alpha_b if keep_alpha_b is None else keep_alpha_b
    kept = res.lookup(best_lo.alpha_a, keep, hi)
    return {"phi_minus": [lo, hi],
            "argmax_alpha_b": {str(lo): best_lo.alpha_b, str(hi): best_hi.alpha_b},
            "v_best": {str(lo): best_lo.v, str(hi): best_hi.v},
            "kept_alpha_b": keep,
            "loss_reoptimized": 1.0 - best_hi.v / best_lo.v,
            "loss_kept": 1.0 - kept.v / best_lo.v}


def appendix_rows(vg, grid, S_ref: float, half_width: float, q: int = 0) -> list:
    """Value of every admissible branch pair at each node near ``S_ref``.

    Columns: ``S``, number of admissible pairs, the four values (empty when a
    pair is not admissible), the fair prices of both labels and zone-edge
    markers of both sides.
    """
    h = vg.slice(vg.time_index(0.0))
    ta, tb = grid.sides
    k = q + grid.q_max
    rows = []
    for n, s in enumerate(grid.s):
        if abs(s - S_ref) > half_width:
            continue
        vals = []
        count = 0
        for la in (0, 1):
            for lb in (0, 1):
                if ta.valid[n, la] and tb.valid[n, lb]:
                    vals.append(float(h[n, la, lb, k]))
                    count += 1
                else:
                    vals.append("")
        rows.append([float(s), count, *vals,
                     float(ta.idx[n, 0] * ta.alpha), float(ta.idx[n, 1] * ta.alpha),
                     float(tb.idx[n, 0] * tb.alpha), float(tb.idx[n, 1] * tb.alpha),
                     int(ta.edge[n]), int(tb.edge[n])])
    return rows


APPENDIX_HEADER = ["S", "n_branches", "h_lo_lo", "h_lo_hi", "h_hi_lo", "h_hi_hi",
                   "ask_lo", "ask_hi", "bid_lo", "bid_hi", "edge_a", "edge_b"]


def _figure_appendix(cfg: Config, out: Path) -> int:
    _, _, grid, vg, _ = _solve(cfg, fee_flow=False)
    a = cfg["appendix"]
    rows = appendix_rows(vg, grid, cfg["grid"]["S_ref"], a["half_width"], a["q"])
    _write_rows(out / "appendix.csv", APPENDIX_HEADER, rows)
    counts = sorted(set(r[1] for r in rows))
    _write_json(out / "appendix_summary.json", {"branch_counts": counts, "n_rows": len(rows)})
    return 0


COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate, "scan": cmd_scan,
            "estimate-eta": cmd_estimate_eta, "oracle-check": cmd_oracle_check,
            "figure": cmd_figure}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration entry (repeatable)")
    common.add_argument("--seed", type=int, help="random seed (same as --set run.seed=N)")
    common.add_argument("--out", help="output directory (same as --set run.out=DIR)")
    common.add_argument("--threads", type=int, help="worker threads for compiled kernels")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sidetick", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"sidetick {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve the market maker's problem")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo under the solved policy")
    sub.add_parser("scan", parents=[common], help="evaluate the exchange revenue on a tick grid")
    e = sub.add_parser("estimate-eta", parents=[common], help="estimate eta from transactions")
    e.add_argument("transactions", nargs="?", help="time,price,side CSV")
    sub.add_parser("oracle-check", parents=[common], help="compare the solver with the oracle")
    f = sub.add_parser("figure", parents=[common], help="data behind one figure")
    f.add_argument("preset", choices=PRESETS)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"run.seed={args.seed}")
        if args.out is not None:
            overrides.append(f"run.out={args.out}")
        if args.threads is not None:
            overrides.append(f"run.threads={args.threads}")
        cfg = Config.load(args.config, overrides, getattr(args, "preset", None))
        _set_threads(cfg["run"]["threads"])
        return COMMANDS[args.command](cfg, args)
    except NumericalAssertionError as exc:
        print(f"sidetick: numerical check failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, DomainError, ValueError) as exc:
        print(f"sidetick: {exc}", file=sys.stderr)
        return 1


def _set_threads(n: int) -> None:
    # the kernels are serial; only touch the threading layer when asked to
    if n <= 1:
        return
    import warnings

    import numba

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


if __name__ == "__main__":
    sys.exit(main())
