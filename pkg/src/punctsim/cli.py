"""Config ingestion, sweep execution and CSV emission.

Config files are JSON objects whose keys mirror SimConfig field names; absent
keys fall back to the built-in defaults and unknown keys are rejected.  Flags
override file values, file values override defaults.  Exit codes: 0 success,
2 configuration error, 3 runtime invariant violation.
"""

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from .engine import ANTENNA_MODES, CellKey, SimConfig, SweepResult, run_sweep
from .errors import ConfigurationError, InvariantViolation

_LIST_KEYS = {"policies", "loss_shapes", "antenna_modes", "lambdas"}
_POLICY_SERIES_ORDER = ("proposed", "ps", "rs", "eds")


def parse_config(path) -> SimConfig:
    """Load a SimConfig from a JSON file; empty files mean all defaults."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {p}: {exc}") from exc
    if not text.strip():
        return SimConfig().validate()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"malformed JSON in {p} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"config root in {p} must be a JSON object")
    return config_from_dict(data)


def config_from_dict(data: dict) -> SimConfig:
    known = {f.name for f in fields(SimConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(
            f"unknown config keys: {', '.join(unknown)}; known keys: {', '.join(sorted(known))}"
        )
    normalized = {}
    for key, value in data.items():
        if key in _LIST_KEYS:
            if not isinstance(value, (list, tuple)):
                raise ConfigurationError(f"config key {key!r} must be a list")
            normalized[key] = tuple(value)
        else:
            normalized[key] = value
    try:
        config = SimConfig(**normalized)
    except TypeError as exc:
        raise ConfigurationError(f"bad config value: {exc}") from exc
    return config.validate()


def dump_config(config: SimConfig) -> dict:
    """JSON-ready dict that parse_config round-trips back to the same config."""
    out = {}
    for f in fields(SimConfig):
        value = getattr(config, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


CSV_HEADER = (
    "policy,loss_shape,antenna_mode,lambda,mean_min_rate_mbps,min_rate_stderr,"
    "embb_reliability,urllc_outage,trials,seed"
)


def emit_csv(sweep: SweepResult, path) -> None:
    """One row per sweep cell, 6 significant digits, stable order and bytes."""
    lines = [CSV_HEADER]
    for cell in sweep.cell_keys():
        stats = sweep.cells[cell]
        row = (
            cell.policy,
            cell.loss_shape,
            cell.antenna_mode,
            _fmt(cell.lam),
            _fmt(stats.mean_min_rate_bps / 1e6),
            _fmt(stats.min_rate_stderr_bps / 1e6),
            _fmt(stats.embb_reliability),
            _fmt(stats.urllc_outage),
            str(stats.trials),
            str(sweep.config.seed),
        )
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def _series_policies(sweep: SweepResult):
    return [p for p in _POLICY_SERIES_ORDER if p in sweep.config.policies]


def emit_plotdata(sweep: SweepResult, figure: str, out_dir) -> list:
    """Write per-figure data files; returns the paths written.

    fig3: one file per (loss shape, antenna mode) regime with the min-rate
    series of every policy.  fig4: one file of eMBB reliability series in the
    (convex_quadratic, miso) regime.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    policies = _series_policies(sweep)
    lams = list(sweep.config.lambdas)
    written = []

    def _cell(policy, shape, mode, lam) -> CellKey:
        key = CellKey(policy, shape, mode, float(lam))
        if key not in sweep.cells:
            raise ConfigurationError(
                f"sweep is missing cell (policy={policy}, loss_shape={shape}, "
                f"antenna_mode={mode}, lambda={lam}) required for {figure}"
            )
        return key

    if figure == "fig3":
        for shape in sweep.config.loss_shapes:
            for mode in sweep.config.antenna_modes:
                lines = ["lambda," + ",".join(policies)]
                for lam in lams:
                    vals = [
                        _fmt(sweep.cells[_cell(p, shape, mode, lam)].mean_min_rate_bps / 1e6)
                        for p in policies
                    ]
                    lines.append(",".join([_fmt(float(lam))] + vals))
                path = out_dir / f"fig3_{shape}_{mode}.csv"
                path.write_text("\n".join(lines) + "\n")
                written.append(path)
    elif figure == "fig4":
        lines = ["lambda," + ",".join(policies)]
        for lam in lams:
            vals = [
                _fmt(sweep.cells[_cell(p, "convex_quadratic", "miso", lam)].embb_reliability)
                for p in policies
            ]
            lines.append(",".join([_fmt(float(lam))] + vals))
        path = out_dir / "fig4_reliability.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    else:
        raise ConfigurationError(f"unknown figure {figure!r}; choose fig3 or fig4")
    return written


def _apply_flag_overrides(config: SimConfig, args) -> SimConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.policies is not None:
        overrides["policies"] = tuple(p.strip() for p in args.policies.split(",") if p.strip())
    if overrides:
        config = replace(config, **overrides).validate()
    return config


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="punctsim",
        description="eMBB/URLLC coexistence sweep: puncturing schedulers on a 5G-NR grid",
    )
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--out", type=str, default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="root seed override")
    parser.add_argument("--trials", type=int, default=None, help="trials per sweep cell")
    parser.add_argument("--workers", type=int, default=None, help="parallel trial workers")
    parser.add_argument(
        "--policies", type=str, default=None, help="comma list: proposed,ps,rs,eds"
    )
    parser.add_argument(
        "--figure",
        type=str,
        default="none",
        choices=("fig3", "fig4", "none"),
        help="also emit plot-ready series for the given figure",
    )
    parser.add_argument(
        "--dump-config", type=str, default=None, help="write the effective config as JSON and exit"
    )
    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config = parse_config(args.config) if args.config else SimConfig().validate()
        config = _apply_flag_overrides(config, args)
        if args.dump_config:
            Path(args.dump_config).write_text(json.dumps(dump_config(config), indent=2) + "\n")
            return 0

        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        n_cells = (
            len(config.policies)
            * len(config.loss_shapes)
            * len(config.antenna_modes)
            * len(config.lambdas)
        )

        def progress(trial, total):
            if (trial + 1) % max(1, total // 20) == 0 or trial + 1 == total:
                print(
                    f"trials {trial + 1}/{total} ({n_cells} cells each)",
                    file=sys.stderr,
                    flush=True,
                )

        sweep = run_sweep(config, progress=progress)
        emit_csv(sweep, out_dir / "results.csv")
        print(f"wrote {out_dir / 'results.csv'}", file=sys.stderr)
        if args.figure != "none":
            for path in emit_plotdata(sweep, args.figure, out_dir):
                print(f"wrote {path}", file=sys.stderr)
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
