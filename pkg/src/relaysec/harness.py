"""Randomized sweeps comparing achieved delays with the closed-form values.

Each trial draws a state sequence and a message, computes the optimal delay
``D*`` and the upper bound ``D'``, runs the selected encoders and decoders,
and checks:

* the zero-delay encoder finishes exactly at ``D*``;
* the delayed encoder finishes within ``[D*, D']``;
* both decoders return the message;
* neither encoder finishes when ``D*`` does not exist within the horizon.

A failed check dumps the trace and seed, then aborts the sweep.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .bitsource import SeededBits
from .channel import ConfigError, GeneratorSpec, StateSequence, generate_sequence, write_trace
from .codec_delayed import decode_delayed, run_encoder_delayed
from .codec_zero import IncompleteError, decode_zero, generate_keys, run_encoder_zero, split_message
from .delay import RateSpec, one_block_bounds

log = logging.getLogger(__name__)

CODEC_NAMES = ("zero", "delayed")
CSV_FIELDS = ("trial", "seed", "d_star", "d_prime", "achieved_zero", "achieved_delayed", "gap_delayed")


class InvariantViolation(AssertionError):
    def __init__(self, message, dump_path=None):
        if dump_path is not None:
            message = f"{message} (counterexample written to {dump_path})"
        super().__init__(message)
        self.dump_path = dump_path


@dataclass(frozen=True)
class SweepConfig:
    rate: RateSpec
    generator: GeneratorSpec
    trials: int
    horizon: int
    codecs: tuple = CODEC_NAMES
    out: Optional[str] = None
    format: str = "csv"
    dump_dir: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be at least 1, got {self.horizon}")
        bad = [c for c in self.codecs if c not in CODEC_NAMES]
        if bad:
            raise ConfigError(f"unknown codecs {bad}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"sweep output format must be csv or json, got {self.format!r}")


@dataclass
class SweepRecord:
    trial: int
    seed: int
    d_star: Optional[int]
    d_prime: Optional[int]
    achieved_zero: Optional[int] = None
    achieved_delayed: Optional[int] = None

    @property
    def feasible(self) -> bool:
        return self.d_star is not None

    @property
    def gap_delayed(self) -> Optional[int]:
        if self.achieved_delayed is None or self.d_star is None:
            return None
        return self.achieved_delayed - self.d_star

    def as_row(self) -> dict:
        row = asdict(self)
        row["gap_delayed"] = self.gap_delayed
        return row


@dataclass
class SweepResult:
    config: SweepConfig
    records: List[SweepRecord] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        feasible = [r for r in self.records if r.feasible]
        gaps = [r.gap_delayed for r in feasible if r.gap_delayed is not None]
        return {
            "trials": len(self.records),
            "feasible": len(feasible),
            "infeasible": len(self.records) - len(feasible),
            "zero_equals_d_star": sum(r.achieved_zero == r.d_star for r in feasible if r.achieved_zero is not None),
            "delayed_equals_d_star": sum(r.achieved_delayed == r.d_star for r in feasible if r.achieved_delayed is not None),
            "delayed_equals_d_prime": sum(
                r.achieved_delayed == r.d_prime for r in feasible if r.achieved_delayed is not None
            ),
            "mean_gap_delayed": (sum(gaps) / len(gaps)) if gaps else None,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: ("" if v is None else v) for k, v in r.as_row().items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"records": [r.as_row() for r in self.records], "summary": self.summary}, indent=2)

    def render(self) -> str:
        return self.to_csv() if self.config.format == "csv" else self.to_json()


def trial_seed(master_seed: int, trial: int) -> int:
    ss = np.random.SeedSequence([master_seed, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _violation(config, trial, seed, seq, message):
    dump_dir = Path(config.dump_dir or (Path(config.out).parent if config.out else "."))
    dump_dir.mkdir(parents=True, exist_ok=True)
    path = dump_dir / f"counterexample-trial{trial}-seed{seed}.txt"
    write_trace(path, seq, f"trial={trial} seed={seed} N={config.rate.N} L={config.rate.L}\n{message}")
    return InvariantViolation(f"trial {trial}: {message}", path)


def run_trial(config: SweepConfig, trial: int) -> SweepRecord:
    rate = config.rate
    seed = trial_seed(config.generator.seed, trial)
    seq = generate_sequence(replace(config.generator, seed=seed), config.horizon)
    lower, upper = one_block_bounds(rate, seq)
    rec = SweepRecord(trial, seed, lower.d, upper.d)
    source = SeededBits([seed, 1])
    message = source.draw(rate.L)

    if "zero" in config.codecs:
        msg = split_message(message, rate, source)
        keys = generate_keys(rate, source)
        try:
            tr = run_encoder_zero(msg, keys, seq)
        except IncompleteError:
            if lower.feasible:
                raise _violation(config, trial, seed, seq, f"zero-delay encoder incomplete although D*={lower.d}")
        else:
            rec.achieved_zero = tr.completion_block
            if tr.completion_block != lower.d:
                raise _violation(config, trial, seed, seq,
                                 f"zero-delay encoder finished at {tr.completion_block}, D*={lower}")
            if decode_zero(tr.y_blocks(), seq, rate) != message:
                raise _violation(config, trial, seed, seq, "zero-delay decoder returned the wrong message")

    if "delayed" in config.codecs:
        msg = split_message(message, rate, source)
        try:
            tr = run_encoder_delayed(msg, seq, source)
        except IncompleteError:
            if upper.feasible:
                raise _violation(config, trial, seed, seq, f"delayed encoder incomplete although D'={upper.d}")
        else:
            rec.achieved_delayed = tr.completion_block
            if not (lower.feasible and upper.feasible and lower.d <= tr.completion_block <= upper.d):
                raise _violation(config, trial, seed, seq,
                                 f"delayed encoder finished at {tr.completion_block} outside [{lower}, {upper}]")
            if decode_delayed(tr.y_blocks(), seq, rate) != message:
                raise _violation(config, trial, seed, seq, "delayed decoder returned the wrong message")
    return rec


def sweep(config: SweepConfig) -> SweepResult:
    result = SweepResult(config)
    for trial in range(config.trials):
        result.records.append(run_trial(config, trial))
    log.info("sweep summary: %s", result.summary)
    if config.out:
        try:
            Path(config.out).write_text(result.render(), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write sweep output to {config.out}: {exc}") from exc
    return result


# -- config files -------------------------------------------------------------------

_INT_KEYS = {"blocklen", "msgbits", "seed", "trials", "horizon"}


def parse_sweep_config(text: str, **overrides) -> SweepConfig:
    """Build a :class:`SweepConfig` from flat ``key=value`` lines.

    Recognized keys: ``blocklen``, ``msgbits``, ``mode``, ``probs``,
    ``pattern``, ``kind``, ``trace``, ``seed``, ``trials``, ``horizon``,
    ``codecs``, ``out``, ``format``, ``dump_dir``.  Keyword overrides win
    over the file when not ``None``.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    raw.update({k: v for k, v in overrides.items() if v is not None})

    known = _INT_KEYS | {"mode", "probs", "pattern", "kind", "trace", "codecs", "out", "format", "dump_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("blocklen", "msgbits", "trials", "horizon"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    try:
        ints = {k: int(raw[k]) for k in _INT_KEYS if k in raw}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    generator = generator_from_options(
        raw.get("mode", "iid"), raw.get("probs"), raw.get("pattern"),
        raw.get("kind"), raw.get("trace"), ints.get("seed", 0),
    )
    codecs = raw.get("codecs", ",".join(CODEC_NAMES))
    if not isinstance(codecs, (list, tuple)):
        codecs = [c.strip() for c in codecs.split(",") if c.strip()]
    try:
        rate = RateSpec(ints["blocklen"], ints["msgbits"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return SweepConfig(
        rate=rate,
        generator=generator,
        trials=ints["trials"],
        horizon=ints["horizon"],
        codecs=tuple(codecs),
        out=raw.get("out"),
        format=raw.get("format", "csv"),
        dump_dir=raw.get("dump_dir"),
    )


def generator_from_options(mode, probs=None, pattern=None, kind=None, trace=None, seed=0) -> GeneratorSpec:
    """Build a generator spec from the textual options shared by the CLI and config files."""
    spec_mode = str(mode).strip().lower()
    if spec_mode == "iid":
        if probs is None:
            probs = "0.25,0.25,0.25,0.25"
        try:
            values = tuple(float(p) for p in str(probs).split(","))
        except ValueError:
            raise ConfigError(f"bad probability list {probs!r}") from None
        return GeneratorSpec.iid(values, seed=seed)
    if spec_mode in ("periodic", "periodic-pattern"):
        if not pattern:
            raise ConfigError("periodic mode needs a pattern")
        return GeneratorSpec.periodic([p for p in str(pattern).split(",") if p.strip()], seed=seed)
    if spec_mode == "constant":
        if not kind:
            raise ConfigError("constant mode needs a kind")
        return GeneratorSpec.constant(kind, seed=seed)
    if spec_mode == "trace-file":
        if not trace:
            raise ConfigError("trace-file mode needs a trace path")
        return GeneratorSpec.trace_file(trace, seed=seed)
    raise ConfigError(f"unknown generator mode {mode!r}")
