"""Command-line front end.

    qsdc-sim teleport     --trials 1000 --seed 1
    qsdc-sim teleport-std --trials 1000
    qsdc-sim qsdc         --message 00101011 --eve none --seed 7
    qsdc-sim verify-stats --eve intercept-z --trials 100000

Exit codes: 0 success / verification passed, 1 usage error, 2 tampering
detected.  ``--format structured`` writes one JSON event per line (each
tagged with its trial number) followed by a single summary record.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, TextIO

from .protocols import (
    Message,
    qsdc_send_message,
    resource_counts,
    teleport_cnot,
    teleport_standard,
)
from .qsim import random_unknown_qubit
from .rng import DEFAULT_SEED, U64_MAX, entropy_seed, make_rng
from .security import (
    EveModel,
    VerificationConfig,
    Verdict,
    detection_probability_oracle,
    distribute_epr,
    verify_channel,
)
from .transcript import Transcript, write_summary, write_trial

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TAMPERING = 2

COMMANDS = ("teleport", "teleport-std", "qsdc", "verify-stats")
# Flags each command accepts beyond --seed/--entropy/--format.
ALLOWED = {
    "teleport": {"trials", "workers"},
    "teleport-std": {"trials", "workers"},
    "qsdc": {"message", "eve", "sample_fraction"},
    "verify-stats": {"trials", "eve", "workers"},
}
DEFAULT_TRIALS = {"teleport": 100, "teleport-std": 100, "verify-stats": 10000}

# Stream key used for the cnot-ancilla reference run in teleport-std.
_REFERENCE_STREAM = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    trials: int = 1
    message: str | None = None
    eve: EveModel = EveModel.NONE
    sample_fraction: float = 0.5
    output_format: str = "text"
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not 0 <= self.seed <= U64_MAX:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if not 0.0 < self.sample_fraction < 1.0:
            raise UsageError("--sample-fraction must lie strictly between 0 and 1")
        if self.output_format not in ("text", "structured"):
            raise UsageError("--format must be text or structured")
        if self.command == "qsdc":
            if not self.message:
                raise UsageError("qsdc requires --message")
            if set(self.message) - {"0", "1"}:
                raise UsageError("--message may contain only '0' and '1'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsdc-sim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, default=None,
                       help=f"u64 root seed (default {DEFAULT_SEED})")
        p.add_argument("--entropy", action="store_true",
                       help="draw the root seed from the OS instead of the default")
        p.add_argument("--format", dest="output_format", choices=("text", "structured"),
                       default="text")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--message", default=None)
        p.add_argument("--eve", choices=[m.value for m in EveModel], default=None)
        p.add_argument("--sample-fraction", dest="sample_fraction", type=float, default=None)
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    given = {k for k in ("trials", "workers", "message", "eve", "sample_fraction")
             if getattr(ns, k) is not None}
    extra = given - ALLOWED[ns.command]
    if extra:
        flags = ", ".join("--" + k.replace("_", "-") for k in sorted(extra))
        raise UsageError(f"{ns.command} does not accept {flags}")
    if ns.entropy and ns.seed is not None:
        raise UsageError("--seed and --entropy are mutually exclusive")
    seed = entropy_seed() if ns.entropy else (DEFAULT_SEED if ns.seed is None else ns.seed)
    kwargs = {k: getattr(ns, k) for k in given}
    if "eve" in kwargs:
        kwargs["eve"] = EveModel(kwargs["eve"])
    kwargs.setdefault("trials", DEFAULT_TRIALS.get(ns.command, 1))
    return RunConfig(ns.command, seed=seed, output_format=ns.output_format, **kwargs)


def _fan_out(cfg: RunConfig, fn: Callable[[int], tuple]) -> Iterator[tuple]:
    """Run ``fn(trial)`` for every trial, yielding results in trial order."""
    if cfg.workers == 1:
        yield from map(fn, range(cfg.trials))
        return
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        yield from pool.map(fn, range(cfg.trials), chunksize=64)


def _counts_dict(c) -> dict:
    return {
        "qubits_sent": c.qubits_sent,
        "classical_bits_sent": c.classical_bits_sent,
        "particles_total": c.particles_total,
        "acknowledgments": c.acknowledgments,
    }


def _run_teleport(cfg: RunConfig, out: TextIO) -> int:
    protocol = teleport_cnot if cfg.command == "teleport" else teleport_standard
    structured = cfg.output_format == "structured"

    def trial(k: int):
        rng = make_rng(cfg.seed, 0, k)
        result = protocol(random_unknown_qubit(rng), rng)
        return result.fidelity_vs_input, result.transcript

    fids, counts = [], None
    for k, (fid, t) in enumerate(_fan_out(cfg, trial)):
        fids.append(fid)
        c = resource_counts(t)
        if counts is not None and c != counts:
            raise RuntimeError(f"trial {k} used different resources: {c} vs {counts}")
        counts = c
        if structured:
            write_trial(out, k, t)

    summary = {
        "command": cfg.command,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "min_fidelity": min(fids),
        "mean_fidelity": math.fsum(fids) / len(fids),
        "resources": _counts_dict(counts),
    }
    if cfg.command == "teleport-std":
        ref_rng = make_rng(cfg.seed, _REFERENCE_STREAM)
        ref = teleport_cnot(random_unknown_qubit(ref_rng), ref_rng)
        summary["cnot_ancilla_resources"] = _counts_dict(resource_counts(ref.transcript))

    if structured:
        write_summary(out, summary)
        return EXIT_OK
    name = "CNOT-ancilla teleportation" if cfg.command == "teleport" else "standard teleportation"
    out.write(f"{name}: {cfg.trials} Haar-random inputs, seed {cfg.seed}\n")
    out.write(f"fidelity  min {summary['min_fidelity']:.12f}  mean {summary['mean_fidelity']:.12f}\n")
    r = summary["resources"]
    out.write(
        f"per run   qubits sent {r['qubits_sent']}, classical bits {r['classical_bits_sent']}, "
        f"particles {r['particles_total']}, receipt acks {r['acknowledgments']}\n"
    )
    if cfg.command == "teleport-std":
        c = summary["cnot_ancilla_resources"]
        out.write("\n")
        out.write(f"{'':<22}{'cnot-ancilla':>14}{'standard':>10}\n")
        for key, title in (
            ("qubits_sent", "qubits sent"),
            ("classical_bits_sent", "classical bits sent"),
            ("particles_total", "particles"),
            ("acknowledgments", "receipt acks"),
        ):
            out.write(f"{title:<22}{c[key]:>14}{r[key]:>10}\n")
    return EXIT_OK


def pairs_needed(message_len: int, cfg: VerificationConfig) -> int:
    """Smallest pair count whose unsampled remainder covers the message."""
    n = message_len
    while n - cfg.sample_size(n) < message_len:
        n += 1
    return n


def _run_qsdc(cfg: RunConfig, out: TextIO) -> int:
    msg = Message.from_string(cfg.message)
    vcfg = VerificationConfig(sample_fraction=cfg.sample_fraction)
    rng = make_rng(cfg.seed, 0, 0)
    t = Transcript()
    pairs = distribute_epr(pairs_needed(len(msg), vcfg), cfg.eve, rng, t)
    report, surviving = verify_channel(pairs, vcfg, rng, t)

    summary = {
        "command": cfg.command,
        "seed": cfg.seed,
        "eve": cfg.eve.value,
        "message": str(msg),
        "pairs_distributed": len(pairs),
        "pairs_checked": report.pairs_checked,
        "mismatches": report.mismatches,
        "qber_estimate": report.qber_estimate,
        "verdict": report.verdict.value,
    }
    if report.verdict is Verdict.PASS:
        before = resource_counts(t).classical_bits_sent
        result = qsdc_send_message(msg, surviving, rng, t)
        summary["decoded"] = str(result.decoded)
        summary["bit_errors"] = result.bit_errors(msg)
        summary["message_classical_bits"] = resource_counts(t).classical_bits_sent - before
    code = EXIT_OK if report.verdict is Verdict.PASS else EXIT_TAMPERING

    if cfg.output_format == "structured":
        write_trial(out, 0, t)
        write_summary(out, summary)
        return code
    out.write(f"QSDC session, seed {cfg.seed}, eavesdropper {cfg.eve.value}\n")
    out.write(
        f"verification: {report.pairs_checked} of {len(pairs)} pairs checked, "
        f"{report.mismatches} mismatches, qber {report.qber_estimate:.6f}, "
        f"verdict {report.verdict.value}\n"
    )
    if code == EXIT_TAMPERING:
        out.write("tampering detected: pairs discarded, nothing sent\n")
        return code
    out.write(f"message:  {msg}\n")
    out.write(f"decoded:  {summary['decoded']}\n")
    out.write(f"bit errors: {summary['bit_errors']}\n")
    out.write(f"classical bits (message phase): {summary['message_classical_bits']}\n")
    return code


def _run_verify_stats(cfg: RunConfig, out: TextIO) -> int:
    vcfg = VerificationConfig()
    structured = cfg.output_format == "structured"

    # One pair per trial: ceil(fraction * 1) = 1, so every trial checks exactly one pair.
    def trial(k: int):
        rng = make_rng(cfg.seed, 0, k)
        pairs = distribute_epr(1, cfg.eve, rng, Transcript())
        report, _ = verify_channel(pairs, vcfg, rng)
        return report

    checked = mismatches = 0
    for k, report in enumerate(_fan_out(cfg, trial)):
        checked += report.pairs_checked
        mismatches += report.mismatches
        if structured:
            write_trial(out, k, Transcript([report.to_event()]))

    oracle = 0.0 if cfg.eve is EveModel.NONE else detection_probability_oracle(cfg.eve, vcfg)
    empirical = mismatches / checked
    tolerance = 4 * math.sqrt(oracle * (1 - oracle) / checked)
    summary = {
        "command": cfg.command,
        "seed": cfg.seed,
        "eve": cfg.eve.value,
        "trials": cfg.trials,
        "pairs_checked": checked,
        "mismatches": mismatches,
        "empirical_detection": empirical,
        "oracle_detection": oracle,
        "tolerance_4sigma": tolerance,
        "within_tolerance": abs(empirical - oracle) <= tolerance,
    }
    if structured:
        write_summary(out, summary)
        return EXIT_OK
    out.write(f"verification statistics, eavesdropper {cfg.eve.value}, seed {cfg.seed}\n")
    out.write(f"checked pairs: {checked}, mismatches: {mismatches}\n")
    out.write(f"detection per pair: empirical {empirical:.6f}, oracle {oracle:.6f}, "
              f"4-sigma band {tolerance:.6f}\n")
    out.write(f"agreement: {'yes' if summary['within_tolerance'] else 'no'}\n")
    return EXIT_OK


def run(cfg: RunConfig, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    if cfg.command in ("teleport", "teleport-std"):
        return _run_teleport(cfg, out)
    if cfg.command == "qsdc":
        return _run_qsdc(cfg, out)
    return _run_verify_stats(cfg, out)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"qsdc-sim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
