"""
Command-line entry point: ``dualsiso <subcommand> ...``.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 ok, 1 usage,
2 verification failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .channel import ChannelConfig
from .convcode import parse_code
from .dual import _resolve
from .dualspec import dual_taps, terminate
from .errors import AllZeroMass, DualSisoError
from .galois import parse_field

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def parse_ebn0(text: str) -> list[float]:
    """``"a:b:step"`` (inclusive) or a comma list such as ``"0,2.5,5"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad Eb/N0 range {text!r}; expected start:stop[:step]")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0 or stop < start:
            raise UsageError(f"bad Eb/N0 range {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad Eb/N0 list {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from None


# -- subcommands -----------------------------------------------------------------

def cmd_codes(args) -> int:
    for text in harness.BUILTIN_CODES:
        d = dual_taps(parse_code(text))
        print(f"{text}\tN={d.N}\tc={d.feedback_coeff}\ttaps={','.join(map(str, d.out_taps))}")
    return EXIT_OK


def cmd_encode(args) -> int:
    code = parse_code(args.code)
    dual = dual_taps(code)
    if args.info is not None:
        info = np.array(_int_list(args.info), dtype=np.int64)
        if info.size and (info.min() < 0 or info.max() >= code.q):
            raise UsageError(f"information symbols must lie in 0..{code.q - 1}")
    elif args.random is not None:
        info = np.random.default_rng(args.seed).integers(0, code.q, args.random)
    else:
        raise UsageError("encode needs --info or --random")
    frame = terminate(dual, info)
    json.dump({"code": code.descriptor, "tail_len": dual.N, "info": frame.info.tolist(),
               "full_info": frame.full_info.tolist(), "codeword": frame.codeword.tolist()},
              sys.stdout)
    print()
    return EXIT_OK


def cmd_decode(args) -> int:
    code = parse_code(args.code)
    dual = dual_taps(code)
    data = _load_json(args.pmfs_in)
    if isinstance(data, dict):
        data = data.get("pmfs")
    try:
        pmfs = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise UsageError("pmfs must be a T x q array of numbers") from None
    if pmfs.ndim != 2 or pmfs.shape[1] != code.q:
        raise UsageError(f"pmfs must have shape (T, {code.q}), got {pmfs.shape}")
    if pmfs.shape[0] <= dual.N:
        raise UsageError(f"frame must include the {dual.N} tail symbols")
    if np.any(pmfs < 0) or not np.all(np.isfinite(pmfs)):
        raise UsageError("pmfs must be finite and nonnegative")
    post = harness.run_decoder(args.decoder, dual, pmfs[None], _resolve(args.transform_mode))[0]
    json.dump({"code": code.descriptor, "decoder": args.decoder, "posteriors": post.tolist(),
               "decisions": harness.hard_decision(post).tolist()}, sys.stdout)
    print()
    return EXIT_OK


def _sim_config(args) -> harness.SimConfig:
    data = dict(_load_json(args.config)) if args.config else {}
    overrides = {
        "code": args.code, "decoder": args.decoder, "frame_len": args.frame_len,
        "max_frames": args.frames, "target_errors": args.target_errors, "seed": args.seed,
        "chunk": args.chunk,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.ebn0 is not None:
        data["ebn0"] = parse_ebn0(args.ebn0)
    if args.transform_mode is not None:
        data["transform_mode"] = args.transform_mode
    if "transform_mode" in data:
        data["transform_mode"] = _resolve(data["transform_mode"])
    if args.no_timing:
        data["timing"] = False
    for key in ("code", "seed"):
        if key not in data:
            raise UsageError(f"simulate needs --{key} (or '{key}' in --config)")
    try:
        return harness.SimConfig.from_dict(data)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    cfg = _sim_config(args)
    _err(f"# stop rule: {cfg.target_errors} bit errors or {cfg.max_frames} frames per point")
    records = []
    for e in cfg.ebn0:
        rec = harness.run_point(cfg, e)
        lo, hi = rec.ber_interval()
        ecn0 = ChannelConfig(e, 1, cfg.frame_len, dual_taps(parse_code(cfg.code)).N).ecn0_db
        _err(f"{cfg.code} {cfg.decoder} {e:g} dB (Ec/N0 {ecn0:.2f} dB): BER {rec.ber:.3e} [{lo:.2e}, {hi:.2e}] "
             f"over {rec.frames} frames" + (f", {rec.failed_frames} failed" if rec.failed_frames else ""))
        records.append(rec)
    if args.out:
        script = harness.write_records(args.out, records)
        _err(f"wrote {args.out} and {script}")
    else:
        sys.stdout.write(harness.format_csv(r.row() for r in records))
    return EXIT_NUMERIC if any(r.failed_frames for r in records) else EXIT_OK


def cmd_verify(args) -> int:
    if args.all:
        codes = list(harness.BUILTIN_CODES)
    elif args.code:
        codes = args.code
    else:
        raise UsageError("verify needs --all or at least one --code")
    report = harness.verify_theorems(codes, args.frames, args.seed, args.length, args.ebn0)
    print(report.format())
    if not report.ok:
        _err("verification FAILED")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_bench(args) -> int:
    q = parse_field(args.field).q
    report = harness.bench_complexity(q, _int_list(args.memories), args.frames, args.length,
                                      args.rounds, seed=args.seed)
    text = report.csv()
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    if len(report.rows) < 3:
        return EXIT_OK
    ratios = report.bcjr_ratios
    _err(f"dual time vs N: R^2 direct {report.r2_direct:.4f}, fft {report.r2_fft:.4f}")
    _err("bcjr growth per register: " + ", ".join(f"x{r:.1f}" for r in ratios))
    ok = report.r2_direct > 0.99 and report.r2_fft > 0.99 and all(r > q / 2 for r in ratios)
    if not ok:
        _err("complexity check FAILED")
        return EXIT_VERIFY
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dualsiso", description="Soft dual-encoder decoding of rate-1 codes over GF(q).")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sub.add_parser("codes", help="list the built-in codes")

    e = sub.add_parser("encode", help="encode and terminate information symbols")
    e.add_argument("--code", required=True)
    e.add_argument("--info", help="comma-separated symbols")
    e.add_argument("--random", type=int, metavar="L", help="encode L random symbols")
    e.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("decode", help="posterior pmfs for one terminated frame")
    d.add_argument("--code", required=True)
    d.add_argument("--pmfs-in", required=True, help="JSON (T x q) array or {\"pmfs\": ...}; '-' for stdin")
    d.add_argument("--decoder", choices=harness.DECODERS, default="dual-combined")
    d.add_argument("--transform-mode", default="direct")

    s = sub.add_parser("simulate", help="Monte Carlo BER over AWGN")
    s.add_argument("--config", help="JSON file with SimConfig fields; flags override it")
    s.add_argument("--code")
    s.add_argument("--decoder", choices=harness.DECODERS)
    s.add_argument("--ebn0", help="start:stop[:step] inclusive, or a comma list")
    s.add_argument("--frame-len", type=int)
    s.add_argument("--frames", type=int, help="maximum frames per point")
    s.add_argument("--target-errors", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--chunk", type=int)
    s.add_argument("--transform-mode")
    s.add_argument("--no-timing", action="store_true", help="record 0 seconds (byte-stable CSV)")
    s.add_argument("--out", help="CSV path; merged if it exists, plot script written beside it")

    v = sub.add_parser("verify", help="check the dual decoders against the BCJR reference")
    v.add_argument("--all", action="store_true", help="all built-in codes")
    v.add_argument("--code", action="append")
    v.add_argument("--frames", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--length", type=int, default=32)
    v.add_argument("--ebn0", type=float, default=2.0)

    b = sub.add_parser("bench", help="decode time against memory length")
    b.add_argument("--field", default="gf4")
    b.add_argument("--memories", default="1,2,3")
    b.add_argument("--frames", type=int, default=4)
    b.add_argument("--length", type=int, default=16)
    b.add_argument("--rounds", type=int, default=150)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    return p


COMMANDS = {"codes": cmd_codes, "encode": cmd_encode, "decode": cmd_decode,
            "simulate": cmd_simulate, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand; try --help")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except AllZeroMass as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except (DualSisoError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
