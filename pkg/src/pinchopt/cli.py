"""Command-line front-end: solve, sweep and figures.

Configuration is one JSON document with sections mirroring the library
types; any key can be overridden on the command line with repeated
``--set section.key=value`` flags (values are parsed as JSON fragments).
Exit codes are stable for scripting: 0 success/feasible, 2 infeasible,
1 usage, configuration or I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

from .channel import SystemParams, UserPosition
from .noma import QosTargets
from .oracle import OracleConfig
from .placement import AlgoConfig, bisection_solve
from .sim import (
    Scenario,
    SweepSpec,
    run_delta_sweep,
    run_oracle_comparison,
    run_power_sweep,
    sample_scenario,
    trial_rng,
    write_table,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    qos: QosTargets
    algo: AlgoConfig
    oracle: OracleConfig
    sweep: SweepSpec
    scenario: Scenario | None = None


_SECTIONS = ("system", "qos", "algo", "oracle", "sweep", "scenario")


def _build(cls, section: dict, name: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    for key in section:
        if key not in fields:
            raise ConfigError(f"unknown key: {name}.{key}")
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name} section: {exc}") from exc


def _build_scenario(section: dict | None) -> Scenario | None:
    if section is None:
        return None
    known = {"user1", "user2", "seed_id"}
    for key in section:
        if key not in known:
            raise ConfigError(f"unknown key: scenario.{key}")
    try:
        u1 = UserPosition(**section["user1"])
        u2 = UserPosition(**section["user2"])
        return Scenario(u1, u2, int(section.get("seed_id", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario section: {exc}") from exc


def build_config(doc: dict) -> RunConfig:
    for key in doc:
        if key not in _SECTIONS:
            raise ConfigError(f"unknown key: {key}")
    sweep_raw = dict(doc.get("sweep", {}))
    for key in ("pt_dbm_values", "d_values", "schemes"):
        if key in sweep_raw:
            sweep_raw[key] = tuple(sweep_raw[key])
    if "delta_pairs" in sweep_raw:
        sweep_raw["delta_pairs"] = tuple(tuple(p) for p in sweep_raw["delta_pairs"])
    return RunConfig(
        system=_build(SystemParams, doc.get("system", {}), "system"),
        qos=_build(QosTargets, doc.get("qos", {}), "qos"),
        algo=_build(AlgoConfig, doc.get("algo", {}), "algo"),
        oracle=_build(OracleConfig, doc.get("oracle", {}), "oracle"),
        sweep=_build(SweepSpec, sweep_raw, "sweep"),
        scenario=_build_scenario(doc.get("scenario")),
    )


def effective_config(cfg: RunConfig) -> dict:
    doc = {
        "system": dataclasses.asdict(cfg.system),
        "qos": dataclasses.asdict(cfg.qos),
        "algo": dataclasses.asdict(cfg.algo),
        "oracle": dataclasses.asdict(cfg.oracle),
        "sweep": {
            "pt_dbm_values": list(cfg.sweep.pt_dbm_values),
            "d_values": list(cfg.sweep.d_values),
            "delta_pairs": [list(p) for p in cfg.sweep.delta_pairs],
            "trials": cfg.sweep.trials,
            "seed": cfg.sweep.seed,
            "schemes": list(cfg.sweep.schemes),
        },
        "scenario": None,
    }
    if cfg.scenario is not None:
        doc["scenario"] = {
            "user1": {"x": cfg.scenario.user1.x, "y": cfg.scenario.user1.y},
            "user2": {"x": cfg.scenario.user2.x, "y": cfg.scenario.user2.y},
            "seed_id": cfg.scenario.seed_id,
        }
    return doc


def _set_path(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = doc
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = {}
            node[part] = nxt
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot override inside non-object key {part!r}")
        node = nxt
    node[parts[-1]] = value


def load_config(path: str | None, overrides: list[str], seed: int | None) -> RunConfig:
    doc: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"config root in {path} must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_path(doc, key, value)
    if seed is not None:
        _set_path(doc, "sweep.seed", seed)
    return build_config(doc)


def _echo_config(cfg: RunConfig, directory: str) -> None:
    path = os.path.join(directory or ".", "config.json")
    with open(path, "w") as fh:
        json.dump(effective_config(cfg), fh, indent=2)
        fh.write("\n")


def cmd_solve(cfg: RunConfig) -> int:
    if cfg.scenario is not None:
        scenario = cfg.scenario
    else:
        scenario = sample_scenario(
            trial_rng(cfg.sweep.seed, 0), cfg.system.side_d
        )
    sol = bisection_solve(
        cfg.system, (scenario.user1, scenario.user2), cfg.qos, cfg.algo
    )
    rep = sol.feasibility
    out = {
        "scenario": {
            "user1": {"x": scenario.user1.x, "y": scenario.user1.y},
            "user2": {"x": scenario.user2.x, "y": scenario.user2.y},
        },
        "antenna_xs": list(sol.layout.xs),
        "feed_x": sol.layout.feed_x,
        "alpha1": sol.split.alpha1,
        "alpha2": sol.split.alpha2,
        "alpha_clamped": sol.alpha_clamped,
        "rates": {
            "r1": sol.rates.r1,
            "r2": sol.rates.r2,
            "r2_to_1": sol.rates.r2_to_1,
            "sum": sol.rates.sum_rate,
        },
        "feasible": sol.feasible_found,
        "feasibility": {
            "spacing": rep.spacing,
            "r1_qos": rep.r1_qos,
            "r2_qos": rep.r2_qos,
            "sic": rep.sic,
            "order_alpha": rep.order_alpha,
            "order_channel": rep.order_channel,
        },
        "iterations": sol.iterations,
        "pinned_antennas": list(sol.pinned_antennas),
    }
    print(json.dumps(out, indent=2))
    return 0 if sol.feasible_found else 2


def cmd_sweep(cfg: RunConfig, which: str, out_path: str, threads: int) -> int:
    if which == "power":
        result = run_power_sweep(
            cfg.system, cfg.qos, cfg.algo, cfg.sweep, cfg.oracle, threads
        )
    elif which == "delta":
        result = run_delta_sweep(cfg.system, cfg.qos, cfg.algo, cfg.sweep, threads)
    elif which == "oracle":
        result = run_oracle_comparison(
            cfg.system, cfg.qos, cfg.algo, cfg.sweep, cfg.oracle, threads
        )
    else:
        raise ConfigError(f"unknown sweep {which!r}; expected power, delta or oracle")
    fmt = "json" if out_path.endswith(".json") else "csv"
    write_table(result.table, out_path, fmt)
    _echo_config(cfg, os.path.dirname(out_path))
    print(
        f"wrote {out_path}: {len(result.table.rows)} rows "
        f"({which} sweep, seed {cfg.sweep.seed})"
    )
    return 0


def cmd_figures(cfg: RunConfig, out_dir: str, threads: int) -> int:
    os.makedirs(out_dir, exist_ok=True)
    power = run_power_sweep(
        cfg.system, cfg.qos, cfg.algo, cfg.sweep, cfg.oracle, threads
    )
    delta = run_delta_sweep(cfg.system, cfg.qos, cfg.algo, cfg.sweep, threads)
    oracle = run_oracle_comparison(
        cfg.system, cfg.qos, cfg.algo, cfg.sweep, cfg.oracle, threads
    )
    for name, result in (("fig2", power), ("fig3", delta), ("fig4", oracle)):
        write_table(result.table, os.path.join(out_dir, f"{name}.csv"), "csv")
    _echo_config(cfg, out_dir)
    print(f"wrote fig2.csv, fig3.csv, fig4.csv to {out_dir} (seed {cfg.sweep.seed})")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1; code 2 is reserved for infeasible solves
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", default=None,
                   help="JSON configuration file (defaults apply when omitted)")
    p.add_argument("--seed", type=int, default=None, help="override sweep.seed")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override a config key (repeatable)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes for sweeps; 0 = auto "
                        "(default: PINCH_THREADS or 1)")


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("PINCH_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"PINCH_THREADS must be an integer, got {env!r}") from exc
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="pinch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="optimise one scenario and print JSON")
    _add_common(p_solve)

    p_sweep = sub.add_parser("sweep", help="run one experiment sweep to a table")
    p_sweep.add_argument("which", choices=("power", "delta", "oracle"))
    _add_common(p_sweep)
    p_sweep.add_argument("--out", metavar="PATH", required=True,
                         help="output table (.csv or .json)")

    p_fig = sub.add_parser("figures", help="run all three sweeps into a directory")
    _add_common(p_fig)
    p_fig.add_argument("--out", metavar="DIR", required=True, dest="out_dir")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = load_config(args.config, args.overrides, args.seed)
        threads = _resolve_threads(args.threads)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.which, args.out, threads)
        return cmd_figures(cfg, args.out_dir, threads)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
