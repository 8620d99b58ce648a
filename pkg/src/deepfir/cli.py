"""Command-line interface: process audio, evaluate, and report latency/compute.

Subcommands: process, eval, latency, bench, inspect-weights. Reports are
JSON with a stable key order and a ``schema`` version; wall-clock numbers
are isolated under a ``timing`` key so that everything else is
deterministic for identical inputs and flags. Errors print one
``error: ...`` line on stderr; exit codes are 0 (success), 1 (processing
error), 2 (usage error).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__, latency, metrics
from .engine import StreamConfig, build_engine, process_stream
from .errors import DeepFirError
from .model import HEAD_TAPS, load_weights_file
from .wavio import WavAudio, read_wav, write_wav

SCHEMA = 1
LINEAR_PHASE_DELAY = 64  # documented engine delay in samples: taps/2

log = logging.getLogger("deepfir")


def main(argv=None) -> int:
    # DEEPFIR_LOG is the only environment variable read by this tool
    logging.basicConfig(level=os.environ.get("DEEPFIR_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DeepFirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepfir",
        description="Streaming speech enhancement with recurrently predicted FIR filters.",
    )
    parser.add_argument("--version", action="version", version=f"deepfir {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "process",
        help="enhance a WAV file",
        description="Enhance a mono 16 kHz PCM16 WAV file. The final partial hop "
                    "is zero-padded and the output truncated to the input length.",
    )
    p.add_argument("--input", required=True, help="input WAV (mono PCM16 16 kHz)")
    p.add_argument("--output", required=True, help="output WAV path")
    p.add_argument("--weights", required=True, help="DFW1 weight file")
    p.add_argument("--mode", choices=("deepfir", "lstw", "ola"), default="deepfir")
    p.add_argument("--synthesis-ms", type=float, default=None,
                   help="synthesis window in ms (default 1 for deepfir, 2 for lstw, 16 for ola)")
    p.add_argument("--taps", type=int, default=128, help="FIR tap count (deepfir mode)")
    minphase = p.add_mutually_exclusive_group()
    minphase.add_argument("--min-phase", dest="min_phase", action="store_true", default=True,
                          help="convert predicted filters to minimum phase (default)")
    minphase.add_argument("--no-min-phase", dest="min_phase", action="store_false")
    p.add_argument("--hardware-ms", type=float, default=latency.DEFAULT_HARDWARE_MS,
                   help="assumed hardware latency for the report")
    p.add_argument("--report", help="write a JSON run report to this path")
    p.set_defaults(func=_cmd_process)

    p = sub.add_parser("eval", help="score an enhanced file against a reference")
    p.add_argument("--ref", required=True, help="clean reference WAV")
    p.add_argument("--est", required=True, help="estimate (processed) WAV")
    p.add_argument("--mix", help="unprocessed mixture WAV (enables SI-SDR improvement)")
    p.add_argument("--align", default="best",
                   help="'best' (lag search over ±128 samples, flagged in the report; "
                        "use for min-phase output), 'none', or a fixed delay in "
                        f"samples ({LINEAR_PHASE_DELAY} compensates the linear-phase "
                        "engine's half-filter delay)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("latency", help="latency decomposition calculator")
    p.add_argument("--mode", choices=("deepfir", "lstw", "ola"), default="deepfir")
    p.add_argument("--synthesis-ms", type=float, default=1.0)
    p.add_argument("--group-delay-ms", type=float, default=0.25)
    p.add_argument("--hardware-ms", type=float, default=latency.DEFAULT_HARDWARE_MS)
    p.add_argument("--hop-ms", type=float, default=None,
                   help="default: synthesis window (deepfir) or half of it (lstw/ola)")
    p.add_argument("--table1", action="store_true",
                   help="print the full reproduction of the published latency table "
                        "with discrepancy flags")
    p.set_defaults(func=_cmd_latency)

    p = sub.add_parser("bench", help="wall-clock per-hop benchmark")
    p.add_argument("--weights", required=True, help="DFW1 weight file (tap head)")
    p.add_argument("--seconds", type=float, default=10.0)
    p.add_argument("--synthesis-ms", type=float, default=1.0)
    p.add_argument("--taps", type=int, default=128)
    minphase = p.add_mutually_exclusive_group()
    minphase.add_argument("--min-phase", dest="min_phase", action="store_true", default=True)
    minphase.add_argument("--no-min-phase", dest="min_phase", action="store_false")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("inspect-weights", help="print DFW1 header dims and parameter count")
    p.add_argument("weights", help="DFW1 weight file")
    p.set_defaults(func=_cmd_inspect)

    return parser


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _stream_config(mode: str, synthesis_ms: float | None, taps: int,
                   min_phase: bool) -> StreamConfig:
    if mode == "deepfir":
        return StreamConfig.deepfir(synthesis_ms if synthesis_ms is not None else 1.0,
                                    taps=taps, min_phase=min_phase)
    if mode == "lstw":
        return StreamConfig.lstw(synthesis_ms if synthesis_ms is not None else 2.0)
    if synthesis_ms is not None and synthesis_ms != 16.0:
        raise DeepFirError(f"ola mode has a fixed 16 ms synthesis window, got {synthesis_ms}")
    return StreamConfig.ola()


def _weights_info(path) -> tuple:
    with open(path, "rb") as fh:
        raw = fh.read()
    from .model import load_weights

    weights = load_weights(raw)
    return weights, hashlib.sha256(raw).hexdigest()


def _cmd_process(args) -> int:
    config = _stream_config(args.mode, args.synthesis_ms, args.taps, args.min_phase)
    weights, digest = _weights_info(args.weights)
    audio = read_wav(args.input)
    log.info("processing %s: %d samples, mode=%s hop=%d",
             args.input, audio.samples.shape[0], config.mode, config.hop)
    out, trace = process_stream(config, weights, audio.samples)
    write_wav(args.output, WavAudio(out, audio.sample_rate))
    log.info("wrote %s (%d hops)", args.output, trace.hops)

    if args.report:
        measured_gd = trace.mean_group_delay_ms() if trace.group_delay_ms else 0.0
        lat = latency.end_to_end_latency(config.mode, config.synthesis_ms, config.hop_ms,
                                         measured_gd, args.hardware_ms)
        times = trace.hop_times_us()
        report = {
            "schema": SCHEMA,
            "engine_version": __version__,
            "command": "process",
            "config": {
                "mode": config.mode,
                "sample_rate": config.sample_rate,
                "analysis_window": config.analysis_window,
                "synthesis_window": config.synthesis_window,
                "hop": config.hop,
                "taps": config.taps,
                "min_phase": config.min_phase,
            },
            "weights": {
                "path": str(args.weights),
                "sha256": digest,
                "parameters": weights.param_count,
                "head": weights.head,
            },
            "input_samples": int(audio.samples.shape[0]),
            "hops": trace.hops,
            "group_delay": {
                "mean_ms": measured_gd,
                "weighting": "magnitude",
                "measured_per_hop": bool(trace.group_delay_ms),
            },
            "latency": lat.to_dict(),
            "timing": {
                "mean_us": float(np.mean(times)) if trace.hops else 0.0,
                "max_us": float(np.max(times)) if trace.hops else 0.0,
            },
        }
        _write_json(args.report, report)
    return 0


def _cmd_eval(args) -> int:
    ref = read_wav(args.ref).samples
    est = read_wav(args.est).samples
    if ref.shape != est.shape:
        raise DeepFirError(
            f"reference has {ref.shape[0]} samples but estimate has {est.shape[0]}")

    flagged = False
    if args.align == "best":
        score, lag = metrics.best_lag_si_sdr(ref, est)
        flagged = True
        alignment = {"mode": "best-lag", "lag_samples": lag, "flagged": True}
    elif args.align == "none":
        score, lag = metrics.si_sdr(ref, est), 0
        alignment = {"mode": "none", "lag_samples": 0, "flagged": False}
    else:
        try:
            lag = int(args.align)
        except ValueError:
            raise DeepFirError(f"--align must be 'best', 'none', or an integer, "
                               f"got {args.align!r}") from None
        score = metrics.shifted_si_sdr(ref, est, lag)
        alignment = {"mode": "fixed", "lag_samples": lag, "flagged": False}

    if lag > 0:
        ref_a, est_a = ref[:-lag], est[lag:]
    elif lag < 0:
        ref_a, est_a = ref[-lag:], est[:lag]
    else:
        ref_a, est_a = ref, est
    loss = metrics.compressed_spectral_loss(metrics.stft(ref_a), metrics.stft(est_a))

    report = {
        "schema": SCHEMA,
        "engine_version": __version__,
        "command": "eval",
        "metrics": {
            "si_sdr_db": score,
            "compressed_spectral_loss": loss,
            "alignment": alignment,
        },
    }
    if args.mix:
        mix = read_wav(args.mix).samples
        if mix.shape != ref.shape:
            raise DeepFirError(
                f"mixture has {mix.shape[0]} samples but reference has {ref.shape[0]}")
        report["metrics"]["si_sdr_mix_db"] = metrics.si_sdr(ref, mix)
        report["metrics"]["si_sdr_improvement_db"] = score - report["metrics"]["si_sdr_mix_db"]
    print(json.dumps(report, indent=2))
    return 0


def _cmd_latency(args) -> int:
    if args.table1:
        rows = latency.reference_latency_rows(args.hardware_ms)
        print(f"{'mode':8} {'syn ms':>7} {'hop ms':>7} {'alg ms':>8} {'pub alg':>8} "
              f"{'e2e ms':>8} {'pub e2e':>8}  flag")
        for row in rows:
            flag = "DISCREPANT" if row["discrepant"] else "ok"
            print(f"{row['mode']:8} {row['synthesis_ms']:>7g} {row['hop_ms']:>7g} "
                  f"{row['computed_algorithmic_ms']:>8.4f} {row['published_algorithmic_ms']:>8g} "
                  f"{row['computed_end_to_end_ms']:>8.4f} {row['published_end_to_end_ms']:>8g}"
                  f"  {flag}")
        return 0
    hop_ms = args.hop_ms
    if hop_ms is None:
        hop_ms = args.synthesis_ms if args.mode == "deepfir" else args.synthesis_ms / 2.0
    rep = latency.end_to_end_latency(args.mode, args.synthesis_ms, hop_ms,
                                     args.group_delay_ms, args.hardware_ms)
    print(json.dumps({"schema": SCHEMA, "command": "latency", "latency": rep.to_dict()},
                     indent=2))
    return 0


def _cmd_bench(args) -> int:
    weights, digest = _weights_info(args.weights)
    config = _stream_config("deepfir", args.synthesis_ms, args.taps, args.min_phase)
    engine = build_engine(config, weights, track_group_delay=False)
    report = latency.measure_realtime(engine, args.seconds)
    print(json.dumps({
        "schema": SCHEMA,
        "command": "bench",
        "weights_sha256": digest,
        "config": {"mode": config.mode, "synthesis_ms": config.synthesis_ms,
                   "hop": config.hop, "taps": config.taps, "min_phase": config.min_phase},
        "timing": report.to_dict(),
    }, indent=2))
    return 0


def _cmd_inspect(args) -> int:
    weights, digest = _weights_info(args.weights)
    print(json.dumps({
        "schema": SCHEMA,
        "command": "inspect-weights",
        "path": str(args.weights),
        "sha256": digest,
        "feature_dim": weights.feature_dim,
        "hidden": weights.hidden,
        "fc_dim": weights.fc_dim,
        "out_dim": weights.out_dim,
        "num_layers": 2,
        "head": "sigmoid-taps" if weights.head == HEAD_TAPS else "sigmoid-mask",
        "parameters": weights.param_count,
    }, indent=2))
    return 0


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    sys.exit(main())
