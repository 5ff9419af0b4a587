"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 infeasible delay or failed
verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .bitsource import SeededBits
from .channel import ConfigError, TraceError, generate_sequence, read_trace, serialize_trace
from .codec_delayed import decode_delayed, run_encoder_delayed
from .codec_zero import (
    IncompleteError,
    decode_zero,
    generate_keys,
    pack_bits,
    run_encoder_zero,
    split_message,
    unpack_bits,
)
from .delay import RateSpec, one_block_bounds
from .secrecy import DEFAULT_CAP, BudgetExceeded, SchemeUnderTest, check_achievability

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text, 0)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be positive")
    return value


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rate(args):
    try:
        return RateSpec(args.blocklen, args.msgbits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_delay(args):
    rate = _rate(args)
    seq = read_trace(args.trace)
    lower, upper = one_block_bounds(rate, seq)
    if args.format == "json":
        _emit(json.dumps({
            "S": rate.S,
            "d_star": lower.d,
            "d_prime": upper.d,
            "counts_at_horizon": lower.counts_at_horizon,
        }, indent=2) + "\n", args.out)
    else:
        lines = [f"S={rate.S}", f"D*={lower}", f"D'={upper}"]
        if not lower.feasible:
            on_off, off_on = lower.counts_at_horizon
            lines.append(f"infeasible within {seq.horizon} blocks: on-off={on_off} off-on={off_on}, need {rate.S} each")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if lower.feasible else EXIT_FAIL


def cmd_simulate(args):
    rate = _rate(args)
    seq = read_trace(args.trace)
    source = SeededBits(args.seed)
    if args.message is not None:
        if len(args.message) != rate.L or set(args.message) - {"0", "1"}:
            raise UsageError(f"--message must be {rate.L} binary digits")
        message = pack_bits(args.message)
    else:
        message = source.draw(rate.L)
    msg = split_message(message, rate, source)
    status = EXIT_OK
    try:
        if args.codec == "zero":
            tr = run_encoder_zero(msg, generate_keys(rate, source), seq)
            decoded = decode_zero(tr.y_blocks(), seq, rate)
        else:
            tr = run_encoder_delayed(msg, seq, source)
            decoded = decode_delayed(tr.y_blocks(), seq, rate)
    except IncompleteError as exc:
        tr, decoded, status = exc.transcript, None, EXIT_FAIL
    if args.format == "json":
        doc = json.loads(tr.to_json())
        doc["message"] = unpack_bits(message, rate.L)
        doc["decoded"] = None if decoded is None else unpack_bits(decoded, rate.L)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = tr.to_text()
        text += f"message={unpack_bits(message, rate.L)}\n"
        if decoded is None:
            text += "achieved delay: incomplete\n"
        else:
            text += f"decoded={unpack_bits(decoded, rate.L)}\nachieved delay: {tr.completion_block}\n"
    _emit(text, args.out)
    return status


def cmd_verify(args):
    rate = _rate(args)
    seq = read_trace(args.trace)
    try:
        report = check_achievability(SchemeUnderTest(args.codec, rate, seq), cap=args.cap)
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_sweep(args):
    text = Path(args.config).read_text(encoding="utf-8")
    config = harness.parse_sweep_config(
        text, out=args.out, format=args.format, seed=args.seed, trials=args.trials, horizon=args.horizon,
    )
    try:
        result = harness.sweep(config)
    except harness.InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not config.out:
        sys.stdout.write(result.render())
    print(json.dumps(result.summary), file=sys.stderr)
    return EXIT_OK


def cmd_gen_trace(args):
    spec = harness.generator_from_options(args.mode, args.probs, args.pattern, args.kind, args.trace, args.seed)
    seq = generate_sequence(spec, args.horizon)
    _emit(serialize_trace(seq, f"mode={spec.mode.value} seed={args.seed} horizon={args.horizon}"), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relaysec", description="Delay-optimal secure delivery over a two-relay erasure network.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def rate_args(sp):
        sp.add_argument("--blocklen", type=_positive, required=True, help="channel uses per block (N)")
        sp.add_argument("--msgbits", type=_positive, required=True, help="message length in bits (L)")

    sp = sub.add_parser("delay", help="optimal delay D* and upper bound D' for a trace")
    sp.add_argument("--trace", required=True)
    rate_args(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_delay)

    sp = sub.add_parser("simulate", help="run an encoder over a trace and print the transcript")
    sp.add_argument("--trace", required=True)
    rate_args(sp)
    sp.add_argument("--codec", choices=("zero", "delayed"), default="zero")
    sp.add_argument("--seed", type=_u64, default=0)
    sp.add_argument("--message", help="message bits; random from --seed if omitted")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="exhaustive secrecy and reliability check")
    sp.add_argument("--trace", required=True)
    rate_args(sp)
    sp.add_argument("--codec", choices=("zero", "delayed"), default="zero")
    sp.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="maximum enumeration size")
    sp.add_argument("--format", choices=("json",), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="randomized delay sweep from a key=value config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=_u64)
    sp.add_argument("--trials", type=_positive)
    sp.add_argument("--horizon", type=_positive)
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gen-trace", help="write a generated state sequence as a trace file")
    sp.add_argument("--mode", choices=("iid", "periodic", "constant", "trace-file"), default="iid")
    sp.add_argument("--probs", help="on-off,off-on,on-on,off-off probabilities (iid)")
    sp.add_argument("--pattern", help="comma-separated block kinds (periodic)")
    sp.add_argument("--kind", help="block kind (constant)")
    sp.add_argument("--trace", help="source trace (trace-file)")
    sp.add_argument("--seed", type=_u64, default=0)
    sp.add_argument("--horizon", type=_positive, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen_trace)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, TraceError) as exc:
        print(f"relaysec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"relaysec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
