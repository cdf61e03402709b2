"""Command-line front end.

Subcommands: generate, run, blinded-summary, unblind-fit, report. Each takes
--config <path> and --out <dir>. Exit codes: 0 success, 2 config error,
3 I/O error, 4 contract violation (bad data, blinding discipline, mismatched
key, ...).
"""

import argparse
import os
import sys

from . import analysis, blinding, pipeline, signal, sources
from .config import ConfigError, RunConfig, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_CONTRACT = 4


def _bits_path(out: str, sid: str) -> str:
    return os.path.join(out, f"bits_{sid}.txt")


def _write_histogram_csv(path: str, hist: analysis.HistogramResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("bin_left,bin_right,count,overlay_density\n")
        for left, right, count, dens in zip(
            hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts, hist.overlay_density
        ):
            fh.write(f"{left:.15e},{right:.15e},{count},{dens:.15e}\n")


def _format_summary(tag: str, s: analysis.GaussianSummary) -> str:
    return (
        f"{tag}: n={s.n}  mean={s.mean:.6e} V  sd={s.sd:.6e} V  sem={s.sem:.6e} V"
    )


def cmd_generate(config: RunConfig, out: str) -> int:
    strings = pipeline.generate_bits(config)
    for bs in strings:
        sources.write_bits(bs, _bits_path(out, bs.source.id))
    for bs in strings:
        print(f"wrote {_bits_path(out, bs.source.id)} ({bs.source.count} bits)")
    return EXIT_OK


def cmd_run(config: RunConfig, out: str) -> int:
    strings = []
    for spec in config.sources:
        path = _bits_path(out, spec.id)
        if os.path.exists(path):
            bs = sources.ingest_bits(path)
            if bs.source != spec:
                raise ValueError(
                    f"{path}: header {bs.source} does not match configured source {spec}"
                )
            strings.append(bs)
        else:
            strings = None
            break
    if strings is None:
        strings = pipeline.generate_bits(config)

    blinded_bits, key = pipeline.blind(config, strings)
    readings = pipeline.acquire(config, blinded_bits, key)
    readings_path = os.path.join(out, "readings.csv")
    key_path = os.path.join(out, "key.csv")
    signal.write_readings(readings, readings_path)
    blinding.write_key(key, key_path)
    print(f"wrote {readings_path} ({len(readings)} readings)")
    print(f"wrote {key_path} (keep sealed until unblinding)")
    return EXIT_OK


def cmd_blinded_summary(config: RunConfig, out: str, key: str | None = None) -> int:
    if key is not None:
        raise ValueError(
            "blinded-summary refuses to accept a permutation key: "
            "unblinding is a separate, explicit step"
        )
    readings = signal.read_readings(os.path.join(out, "readings.csv"))
    summary = pipeline.blinded_summary(readings, config)
    _write_histogram_csv(os.path.join(out, "histogram_blinded_low.csv"), summary.low_hist)
    lines = [
        f"blinded summary of {summary.n_total} readings "
        f"(threshold {config.analysis.threshold} V)",
        _format_summary("low ", summary.low),
        _format_summary("high", summary.high),
    ]
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out, "blinded_summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


def _write_fit_outputs(out: str, result: pipeline.UnblindResult, config: RunConfig) -> str:
    fit, mc = result.fit, result.mc
    with open(os.path.join(out, "fit.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("parameter,value,sigma\n")
        fh.write(f"intercept_volts,{fit.intercept:.15e},{fit.sigma_intercept:.15e}\n")
        fh.write(f"slope_volts,{fit.slope:.15e},{fit.sigma_slope:.15e}\n")
        fh.write(f"eps,{fit.eps:.15e},{fit.sigma_eps:.15e}\n")
        fh.write(f"bound_{int(round(config.analysis.cl * 100))},{fit.bound_90:.15e},\n")
        fh.write(f"mc_sd_slope_volts,{mc.sd_slope:.15e},\n")
        fh.write(f"mc_sd_intercept_volts,{mc.sd_intercept:.15e},\n")
    with open(os.path.join(out, "band.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,fit,lo,hi\n")
        for x, f, lo, hi in zip(mc.band_x, mc.band_fit, mc.band_lo, mc.band_hi):
            fh.write(f"{x:.15e},{f:.15e},{lo:.15e},{hi:.15e}\n")
    for sid, hist in result.per_source_hist.items():
        _write_histogram_csv(os.path.join(out, f"histogram_{sid}_low.csv"), hist)

    lines = ["unblinded per-source low-voltage summaries:"]
    for sid, s in result.per_source_low.items():
        lines.append("  " + _format_summary(sid, s))
    lines += [
        "weighted linear fit of mean low voltage vs (fidelity - 1/2):",
        f"  intercept = {fit.intercept:.6e} +- {fit.sigma_intercept:.6e} V",
        f"  slope     = {fit.slope:.6e} +- {fit.sigma_slope:.6e} V",
        f"  eps       = {fit.eps:.6e} +- {fit.sigma_eps:.6e}",
        f"  Monte Carlo ({mc.n_realizations} realizations): "
        f"sd_slope = {mc.sd_slope:.6e} V, sd_intercept = {mc.sd_intercept:.6e} V",
        f"  {config.analysis.cl * 100:.0f}% CL bound ({config.analysis.bound_rule}): "
        f"|eps| < {fit.bound_90:.6e}",
    ]
    return "\n".join(lines) + "\n"


def cmd_unblind_fit(config: RunConfig, out: str) -> int:
    readings = signal.read_readings(os.path.join(out, "readings.csv"))
    key = blinding.read_key(os.path.join(out, "key.csv"))
    result = pipeline.unblind_fit(readings, key, config)
    text = _write_fit_outputs(out, result, config)
    with open(os.path.join(out, "unblind_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


def cmd_report(config: RunConfig, out: str) -> int:
    readings, key, summary, result = pipeline.run_pipeline(config)
    signal.write_readings(readings, os.path.join(out, "readings.csv"))
    blinding.write_key(key, os.path.join(out, "key.csv"))
    _write_histogram_csv(os.path.join(out, "histogram_blinded_low.csv"), summary.low_hist)
    blinded_text = "\n".join(
        [
            f"blinded summary of {summary.n_total} readings",
            _format_summary("low ", summary.low),
            _format_summary("high", summary.high),
        ]
    )
    fit_text = _write_fit_outputs(out, result, config)
    text = blinded_text + "\n\n" + fit_text
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qvolt",
        description="Simulate and analyze the qubit-controlled voltage switch experiment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate", "run", "blinded-summary", "unblind-fit", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", required=True, help="output directory")
        if name == "blinded-summary":
            p.add_argument(
                "--key",
                default=None,
                help="not accepted: the blinded summary must not see the key",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        os.makedirs(args.out, exist_ok=True)
        if args.command == "generate":
            return cmd_generate(config, args.out)
        if args.command == "run":
            return cmd_run(config, args.out)
        if args.command == "blinded-summary":
            return cmd_blinded_summary(config, args.out, key=args.key)
        if args.command == "unblind-fit":
            return cmd_unblind_fit(config, args.out)
        if args.command == "report":
            return cmd_report(config, args.out)
        raise AssertionError(args.command)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
