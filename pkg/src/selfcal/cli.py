"""Command-line interface.

Subcommands: crlb (per-antenna bound table), schedule (parallel
measurement plan), simulate (synthesize or replay measurement sets),
sweep (Monte-Carlo SNR sweep), verify (exhaustive wiring checks).

Exit codes: 0 success, 1 usage error, 2 validation error, 3 a
verification report did not pass.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .crlb import (
    ScenarioParams,
    budgeted_average_crlb,
    crlb_closed_form,
)
from .errors import ConfigError
from .estimator import (
    collapse_repetitions,
    estimates_to_dict,
    estimation_error,
    ml_estimate,
)
from .harness import (
    ExperimentConfig,
    run_snr_sweep,
    verify_daisy_optimality,
    verify_star_optimality,
    verify_time_bounds,
    write_sweep_output,
)
from .simulate import (
    draw_gains,
    measurements_from_dict,
    measurements_to_dict,
    synthesize,
)
from .topology import (
    make_daisy,
    make_star,
    measurement_schedule,
    schedule_to_dict,
    topology_from_dict,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_ACCEPTANCE = 3


class _Parser(argparse.ArgumentParser):
    # argparse defaults to exit code 2 on usage errors; keep 2 for
    # validation failures and use 1 here instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Grid syntax lo:hi:step in dB, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) == 3:
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad SNR grid {text!r}")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(lo + k * step for k in range(count))
    raise ConfigError(f"bad SNR grid {text!r}, expected lo:hi:step")


def parse_budget(text: str) -> tuple[str, float | None]:
    """Budget syntax: 'measurements' or 'time:<slot durations>'."""
    if text == "measurements":
        return "measurements", None
    if text.startswith("time:"):
        return "time", float(text[len("time:"):])
    raise ConfigError(f"bad budget {text!r}, expected measurements or time:N")


def _load_topology(kind: str, m: int | None, reference: int | None):
    if kind == "star" or kind == "daisy":
        if m is None or reference is None:
            raise ConfigError(f"--topology {kind} needs --m and --ref")
        return make_star(m, reference) if kind == "star" else make_daisy(m, reference)
    if kind.startswith("file:"):
        with open(kind[len("file:"):], encoding="utf-8") as fh:
            return topology_from_dict(json.load(fh))
    raise ConfigError(f"unknown topology {kind!r}")


def _scenario_from_args(args) -> ScenarioParams:
    noise = args.noise_var
    if args.snr_db is not None:
        signal = (args.tx_amp * args.rx_amp * abs(args.line_gain)) ** 2
        noise = signal * 10.0 ** (-args.snr_db / 10.0)
    return ScenarioParams(line_gain=args.line_gain, noise_variance=noise,
                          tx_amplitude=args.tx_amp, rx_amplitude=args.rx_amp,
                          slot_duration=args.slot)


def _add_topology_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", required=True,
                   help="star, daisy, or file:<path to topology JSON>")
    p.add_argument("--m", type=int, help="antenna count")
    p.add_argument("--ref", type=int, help="reference antenna index")


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--line-gain", type=complex, default=1 + 0j,
                   help="known common line gain h (complex literal)")
    p.add_argument("--noise-var", type=float, default=1.0,
                   help="per-measurement complex noise variance")
    p.add_argument("--snr-db", type=float, default=None,
                   help="set the noise variance from an SNR in dB instead")
    p.add_argument("--tx-amp", type=float, default=1.0)
    p.add_argument("--rx-amp", type=float, default=1.0)
    p.add_argument("--slot", type=float, default=1.0,
                   help="seconds per measurement slot")


def _write_text(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="selfcal",
                     description="Self-calibration wiring analysis and simulation")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_crlb = sub.add_parser("crlb", help="per-antenna bound table")
    _add_topology_args(p_crlb)
    _add_scenario_args(p_crlb)
    p_crlb.add_argument("--budget", default="measurements",
                        help="measurements (one round) or time:N slot durations")
    p_crlb.add_argument("--format", choices=("csv", "json"), default="csv")
    p_crlb.add_argument("--out", default=None)

    p_sched = sub.add_parser("schedule", help="parallel measurement plan")
    _add_topology_args(p_sched)
    p_sched.add_argument("--slot", type=float, default=1.0)
    p_sched.add_argument("--out", default=None)

    p_sim = sub.add_parser("simulate",
                           help="synthesize or replay sounding measurements")
    _add_topology_args(p_sim)
    _add_scenario_args(p_sim)
    p_sim.add_argument("--reps", type=int, default=1,
                       help="independent repetitions per direction")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--in", dest="input_path", default=None,
                       help="replay a dumped measurement set instead of synthesizing")
    p_sim.add_argument("--estimate", action="store_true",
                       help="also run the ML estimator and report errors")
    p_sim.add_argument("--out", default=None,
                       help="measurement set (or estimate) JSON output")

    p_sweep = sub.add_parser("sweep", help="Monte-Carlo SNR sweep")
    p_sweep.add_argument("--config", default=None,
                         help="JSON file with ExperimentConfig fields; flags override")
    p_sweep.add_argument("--topology", default=None)
    p_sweep.add_argument("--m", type=int, default=None)
    p_sweep.add_argument("--ref", type=int, default=None)
    p_sweep.add_argument("--snr", default=None, help="grid lo:hi:step in dB")
    p_sweep.add_argument("--trials", type=int, default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--budget", default=None,
                         help="measurements or time:N slot durations")
    p_sweep.add_argument("--format", choices=("csv", "json"), default=None)
    p_sweep.add_argument("--out", default=None)

    p_ver = sub.add_parser("verify", help="exhaustive wiring checks")
    p_ver.add_argument("--prop", type=int, choices=(1, 2, 3), required=True,
                       help="1 star optimality, 2 time bounds, 3 chain optimality")
    p_ver.add_argument("--m", type=int, default=None)
    p_ver.add_argument("--ref", type=int, default=1)
    p_ver.add_argument("--m-range", default=None,
                       help="lo:hi antenna counts for --prop 3")
    p_ver.add_argument("--cap", type=int, default=8,
                       help="enumeration cap on the antenna count")
    return parser


def _cmd_crlb(args) -> int:
    topo = _load_topology(args.topology, args.m, args.ref)
    scenario = _scenario_from_args(args)
    mode, value = parse_budget(args.budget)
    if mode == "time":
        report = budgeted_average_crlb(topo, scenario,
                                       value * scenario.slot_duration)
    else:
        report = crlb_closed_form(topo, scenario)
    if args.format == "json":
        _write_text(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        lines = [",".join(report.CSV_HEADER)]
        lines += [",".join(row) for row in report.csv_rows()]
        _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_schedule(args) -> int:
    topo = _load_topology(args.topology, args.m, args.ref)
    schedule = measurement_schedule(topo, args.slot)
    _write_text(args.out,
                json.dumps(schedule_to_dict(schedule), indent=2) + "\n")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    topo = _load_topology(args.topology, args.m, args.ref)
    scenario = _scenario_from_args(args)
    seq = np.random.SeedSequence(args.seed)
    gains_seed, noise_seed = seq.spawn(2)
    gains = draw_gains(topo.m, scenario, gains_seed)
    if args.input_path:
        with open(args.input_path, encoding="utf-8") as fh:
            measured = measurements_from_dict(json.load(fh))
    else:
        measured = synthesize(topo, gains, scenario, repetitions=args.reps,
                              seed=noise_seed)
    if args.estimate:
        est = ml_estimate(collapse_repetitions(measured), topo, scenario,
                          ref_alpha=gains.alpha[topo.reference - 1],
                          ref_beta=gains.beta[topo.reference - 1])
        payload = estimates_to_dict(est)
        if not args.input_path:
            err = estimation_error(est, gains)
            payload["average_sq_error_alpha"] = err.average_alpha
            payload["average_sq_error_beta"] = err.average_beta
        _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    else:
        _write_text(args.out,
                    json.dumps(measurements_to_dict(measured)) + "\n")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    fields: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            fields.update(json.load(fh))
    if isinstance(fields.get("snr_grid_db"), str):
        fields["snr_grid_db"] = parse_snr_grid(fields["snr_grid_db"])
    if isinstance(fields.get("snr_grid_db"), list):
        fields["snr_grid_db"] = tuple(fields["snr_grid_db"])
    if args.topology is not None:
        fields["topology_kind"] = args.topology
    if args.m is not None:
        fields["m"] = args.m
    if args.ref is not None:
        fields["reference"] = args.ref
    if args.snr is not None:
        fields["snr_grid_db"] = parse_snr_grid(args.snr)
    if args.trials is not None:
        fields["trials"] = args.trials
    if args.seed is not None:
        fields["master_seed"] = args.seed
    if args.budget is not None:
        mode, value = parse_budget(args.budget)
        fields["budget_mode"] = mode
        fields["budget_value"] = value
    if args.format is not None:
        fields["output_format"] = args.format
    if args.out is not None:
        fields["output_path"] = args.out
    unknown = set(fields) - set(ExperimentConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    cfg = ExperimentConfig(**fields)
    rows = run_snr_sweep(cfg)
    text = write_sweep_output(rows, cfg)
    if not cfg.output_path:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.prop == 1:
        if args.m is None:
            raise ConfigError("--prop 1 needs --m")
        report = verify_star_optimality(args.m, args.ref, cap=args.cap)
        print(f"star optimality m={args.m} ref={args.ref}: "
              f"{report.tree_count} trees, min mean distance "
              f"{report.min_mean_distance} attained {report.minimizer_count}x, "
              f"star attains: {report.star_attains_minimum}")
    elif args.prop == 2:
        if args.m is None:
            raise ConfigError("--prop 2 needs --m")
        report = verify_time_bounds(args.m, cap=args.cap)
        print(f"time bounds m={args.m}: {report.tree_count} trees, slots in "
              f"[{report.min_slots}, {report.max_slots}], "
              f"{report.chain_count} chains, {report.star_count} stars, "
              f"schedules valid: {report.schedules_valid}")
    else:
        if args.m_range:
            lo, hi = (int(x) for x in args.m_range.split(":"))
            m_values = range(lo, hi + 1)
        elif args.m is not None:
            m_values = [args.m]
        else:
            raise ConfigError("--prop 3 needs --m or --m-range")
        report = verify_daisy_optimality(m_values, brute_force_cap=args.cap)
        for entry in report.entries:
            brute = (f", brute-force min {entry.brute_min}"
                     if entry.brute_forced else "")
            print(f"m={entry.m}: chain/star ratio {entry.ratio} "
                  f"({float(entry.ratio):.6f}), beats star: "
                  f"{entry.beats_star}{brute}")
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "crlb": _cmd_crlb,
            "schedule": _cmd_schedule,
            "simulate": _cmd_simulate,
            "sweep": _cmd_sweep,
            "verify": _cmd_verify,
        }[args.command]
        return handler(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(f"selfcal: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
