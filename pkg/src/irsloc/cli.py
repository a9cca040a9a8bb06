"""Command-line entry point.

Subcommands:
  simulate  synthesize one trial's received signals and ground truth to disk
  run       full Monte Carlo run: estimates, spectra, metrics
  sweep     one aggregated run per value of a parameter axis
  report    pretty-print the metrics/sweep CSVs of a previous run

Exit codes: 0 success, 1 configuration error, 2 runtime error.

Configuration layering, later layers winning: built-in defaults, --preset,
--config file, --override (repeatable), --seed. Every file-writing command
drops a manifest.json holding the fully resolved config; passing that
manifest back via --config reproduces the run bit-exactly.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, Resolved, apply_overrides, load_config_file, merge_config, resolve
from .harness import run_many, run_trial, sweep, synthesize_trial
from .io_formats import (
    read_csv_dicts,
    save_tensor,
    write_estimates_csv,
    write_events_csv,
    write_grid_sizes_csv,
    write_manifest,
    write_metrics_csv,
    write_spectra_csvs,
    write_sweep_csv,
    write_truth_csv,
)
from .presets import get_preset


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; per the interface contract bad
    # arguments are configuration errors (exit 1), so surface them as such
    def error(self, message):
        raise ConfigError(message)


def _add_common(parser: argparse.ArgumentParser, out_required: bool) -> None:
    parser.add_argument("--config", metavar="PATH", help="TOML or JSON config (or a manifest.json)")
    parser.add_argument("--preset", metavar="NAME", help="named base configuration")
    parser.add_argument("--out", metavar="DIR", required=out_required, help="output directory")
    parser.add_argument("--seed", metavar="U64", type=int, help="override harness.seed")
    parser.add_argument(
        "--override", metavar="KEY=VAL", action="append", default=[],
        help="dotted-key config override, repeatable (e.g. subspace.q0=4)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="irsloc", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"irsloc {__version__}")
    subs = parser.add_subparsers(dest="cmd")
    _add_common(subs.add_parser("simulate", help="write one trial's signal tensors"), True)
    _add_common(subs.add_parser("run", help="full run with estimates and metrics"), True)
    _add_common(subs.add_parser("sweep", help="aggregated runs over a parameter axis"), True)
    report = subs.add_parser("report", help="print a previous run's metrics")
    report.add_argument("--out", metavar="DIR", required=True, help="directory of a previous run")
    return parser


def _resolve_args(args) -> Resolved:
    layered: dict = {}
    if args.preset:
        layered = merge_config(layered, get_preset(args.preset))
    if args.config:
        layered = merge_config(layered, load_config_file(args.config))
    if args.override:
        layered = apply_overrides(layered, args.override)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must fit in an unsigned 64-bit integer")
        layered.setdefault("harness", {})["seed"] = args.seed
    return resolve(layered)


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _prob(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.6f}"


def cmd_simulate(args) -> int:
    resolved = _resolve_args(args)
    out = _prepare_out(args)
    cfg = resolved.trial
    synth = synthesize_trial(cfg, 0)

    save_tensor(out / "rx.tensor", "rx", synth.observations, ("v", "q", "n", "m_b"))
    save_tensor(out / "pilots.tensor", "pilots", synth.pilots, ("v", "q", "n"))
    save_tensor(out / "cir.tensor", "cir", synth.cir, ("v", "q", "l", "m_b"))
    write_truth_csv(out / "truth.csv", [(0, t) for t in synth.truths], cfg.irs_pos)
    write_manifest(out / "manifest.json", resolved.raw, __version__)

    for name in ("rx.tensor", "pilots.tensor", "cir.tensor", "truth.csv", "manifest.json"):
        print(f"wrote {out / name}")
    return 0


def cmd_run(args) -> int:
    resolved = _resolve_args(args)
    out = _prepare_out(args)
    cfg = resolved.trial
    outcome = run_many(cfg, workers=resolved.workers, keep_spectra_trial=0)

    write_estimates_csv(out / "estimates.csv", (
        (trial, e)
        for trial, res in enumerate(outcome.results)
        for e in res.estimates
    ))
    write_truth_csv(out / "truth.csv", (
        (trial, t)
        for trial, res in enumerate(outcome.results)
        for t in res.truths
    ), cfg.irs_pos)

    reports = [("music", outcome.report)]
    if outcome.baseline_report is not None:
        reports.append(("somp", outcome.baseline_report))
        write_estimates_csv(out / "estimates_somp.csv", (
            (trial, e)
            for trial, res in enumerate(outcome.results)
            for e in res.baseline_estimates
        ))
    write_metrics_csv(out / "metrics.csv", reports)
    spectra = outcome.results[0].spectra if outcome.results else ()
    write_spectra_csvs(out, spectra)
    if spectra:
        write_grid_sizes_csv(out / "grid_sizes.csv", spectra)
    if resolved.log_events:
        def event_rows():
            for trial, res in enumerate(outcome.results):
                yield trial, "music", res.events
                if res.baseline_events is not None:
                    yield trial, "somp", res.baseline_events
        write_events_csv(out / "events.csv", event_rows())
    write_manifest(out / "manifest.json", resolved.raw, __version__)

    print(f"wrote {out / 'estimates.csv'} and {out / 'metrics.csv'}")
    for method, report in reports:
        print(
            f"{method}: p_md_near={_prob(report.p_md_near)} p_md_far={_prob(report.p_md_far)} "
            f"p_fa_near={_prob(report.p_fa_near)} p_fa_far={_prob(report.p_fa_far)} "
            f"({report.num_trials} trials, {outcome.seconds:.1f}s)"
        )
    return 0


def cmd_sweep(args) -> int:
    resolved = _resolve_args(args)
    if resolved.sweep_axis is None:
        raise ConfigError("sweep needs sweep.axis and sweep.values (try --preset fig6)")
    out = _prepare_out(args)

    points = sweep(resolved.sweep_axis, resolved.sweep_values, resolved.trial,
                   workers=resolved.workers)
    axis_label = (
        resolved.sweep_axis if isinstance(resolved.sweep_axis, str)
        else "/".join(resolved.sweep_axis)
    )
    write_sweep_csv(out / "sweep.csv", axis_label, points)
    write_manifest(out / "manifest.json", resolved.raw, __version__)

    print(f"wrote {out / 'sweep.csv'}")
    for pt in points:
        report = pt.outcome.report
        print(
            f"{axis_label}={pt.value}: p_md_near={_prob(report.p_md_near)} "
            f"p_md_far={_prob(report.p_md_far)} p_fa_near={_prob(report.p_fa_near)} "
            f"p_fa_far={_prob(report.p_fa_far)}"
        )
    return 0


def _print_table(path: Path) -> None:
    rows = read_csv_dicts(path)
    if not rows:
        print(f"{path}: empty")
        return
    columns = list(rows[0].keys())
    widths = {c: max(len(c), *(len(r[c]) for r in rows)) for c in columns}
    print(f"{path}:")
    print("  " + "  ".join(c.ljust(widths[c]) for c in columns))
    for r in rows:
        print("  " + "  ".join(r[c].ljust(widths[c]) for c in columns))


def cmd_report(args) -> int:
    out = Path(args.out)
    if not out.is_dir():
        raise ConfigError(f"not a directory: {out}")
    shown = 0
    for name in ("metrics.csv", "sweep.csv"):
        path = out / name
        if path.is_file():
            _print_table(path)
            shown += 1
    if not shown:
        raise FileNotFoundError(f"{out} holds neither metrics.csv nor sweep.csv")
    return 0


_HANDLERS = {
    "simulate": cmd_simulate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.cmd is None:
            parser.print_usage(sys.stderr)
            return 1
        return _HANDLERS[args.cmd](args)
    except ConfigError as exc:
        print(f"irsloc: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - contract: runtime failures exit 2
        print(f"irsloc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
