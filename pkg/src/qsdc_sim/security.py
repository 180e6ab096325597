"""EPR distribution with intercept-resend eavesdroppers, and the channel check.

The check sacrifices a random sample of the distributed pairs.  Each sampled
pair is measured on both sides in one shared basis, chosen per pair as
Z(x)Z or X(x)X.  An ideal ``|Phi+>`` always gives equal outcomes in either
basis, so any disagreement counts as a mismatch.  The channel is rejected
when mismatches exceed ``mismatch_threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyInput, InvalidFraction, UnsupportedModel
from .protocols import EprPair, prepare_bell_phi_plus
from .qsim import CNOT, H, Basis, PureState, branch_decomposition, collapse, measure
from .transcript import (
    ALICE,
    BOB,
    EVE,
    GateApplied,
    Measured,
    QubitSent,
    Transcript,
    VerificationSummary,
)


class EveModel(Enum):
    NONE = "none"
    INTERCEPT_Z = "intercept-z"
    INTERCEPT_RANDOM = "intercept-rand"

    def basis_weights(self) -> list[tuple[Basis, float]]:
        if self is EveModel.INTERCEPT_Z:
            return [(Basis.COMPUTATIONAL, 1.0)]
        if self is EveModel.INTERCEPT_RANDOM:
            return [(Basis.COMPUTATIONAL, 0.5), (Basis.PLUS_MINUS, 0.5)]
        return []


class BasisPolicy(Enum):
    UNIFORM = "uniform"
    COMPUTATIONAL_ONLY = "computational"
    PLUS_MINUS_ONLY = "plus_minus"

    def basis_weights(self) -> list[tuple[Basis, float]]:
        if self is BasisPolicy.UNIFORM:
            return [(Basis.COMPUTATIONAL, 0.5), (Basis.PLUS_MINUS, 0.5)]
        if self is BasisPolicy.COMPUTATIONAL_ONLY:
            return [(Basis.COMPUTATIONAL, 1.0)]
        return [(Basis.PLUS_MINUS, 1.0)]


def _draw_basis(weights: list[tuple[Basis, float]], rng: np.random.Generator) -> Basis:
    # Fixed policies consume no randomness; the uniform one consumes one draw.
    if len(weights) == 1:
        return weights[0][0]
    return Basis.COMPUTATIONAL if rng.random() < 0.5 else Basis.PLUS_MINUS


class Verdict(Enum):
    PASS = "pass"
    TAMPERING_DETECTED = "tampering_detected"


@dataclass(frozen=True)
class VerificationConfig:
    sample_fraction: float = 0.5
    mismatch_threshold: int = 0
    basis_policy: BasisPolicy = BasisPolicy.UNIFORM

    def __post_init__(self):
        if not 0.0 < self.sample_fraction < 1.0:
            raise InvalidFraction(f"sample_fraction must be in (0, 1), got {self.sample_fraction}")
        if self.mismatch_threshold < 0:
            raise ValueError("mismatch_threshold must be >= 0")

    def sample_size(self, n: int) -> int:
        return math.ceil(self.sample_fraction * n)


@dataclass(frozen=True)
class VerificationReport:
    pairs_checked: int
    mismatches: int
    qber_estimate: float
    verdict: Verdict

    def to_event(self) -> VerificationSummary:
        return VerificationSummary(
            ALICE, self.pairs_checked, self.mismatches, self.qber_estimate, self.verdict.value
        )


def distribute_epr(
    n: int, eve: EveModel, rng: np.random.Generator, transcript: Transcript
) -> list[EprPair]:
    """Alice prepares ``n`` pairs and sends each B half to Bob.

    With an eavesdropper, every B half is measured in transit (Z, or a fresh
    uniform Z/X choice for the random-basis model) and forwarded in the
    observed eigenstate.
    """
    if n < 1:
        raise ValueError(f"need at least one pair, got {n}")
    weights = eve.basis_weights()
    pairs = []
    for i in range(n):
        state = prepare_bell_phi_plus()
        pair = EprPair(state, i)
        transcript.append(GateApplied(ALICE, H.name, (pair.alice_label,)))
        transcript.append(GateApplied(ALICE, CNOT.name, (pair.alice_label, pair.bob_label)))
        transcript.append(QubitSent(ALICE, BOB, pair.bob_label))
        if weights:
            basis = _draw_basis(weights, rng)
            outcome, state = collapse(state, "B", basis, rng)
            transcript.append(Measured(EVE, pair.bob_label, basis.value, outcome.value))
            pair = EprPair(state, i)
        pairs.append(pair)
    return pairs


def verify_channel(
    pairs: list[EprPair],
    cfg: VerificationConfig,
    rng: np.random.Generator,
    transcript: Transcript | None = None,
) -> tuple[VerificationReport, list[EprPair]]:
    """Check a random sample of ``pairs``; return the report and the unsampled pairs.

    Surviving pairs keep their order and are marked verified only on a pass.
    """
    if not pairs:
        raise EmptyInput("no pairs to verify")
    n = len(pairs)
    k = cfg.sample_size(n)
    sampled = set(int(i) for i in rng.choice(n, size=k, replace=False))
    weights = cfg.basis_policy.basis_weights()
    mismatches = 0
    for i in sorted(sampled):
        basis = _draw_basis(weights, rng)
        a, rest = measure(pairs[i].state, "A", basis, rng)
        b, _ = measure(rest, "B", basis, rng)
        mismatches += a.outcome is not b.outcome

    verdict = Verdict.TAMPERING_DETECTED if mismatches > cfg.mismatch_threshold else Verdict.PASS
    report = VerificationReport(k, mismatches, mismatches / k if k else 0.0, verdict)
    ok = verdict is Verdict.PASS
    surviving = [
        EprPair(p.state, p.index, verified=ok) for i, p in enumerate(pairs) if i not in sampled
    ]
    if transcript is not None:
        transcript.append(report.to_event())
    return report, surviving


def mismatch_probability(state: PureState, basis: Basis) -> float:
    """Exact probability that A and B disagree when both are measured in ``basis``."""
    total = 0.0
    for a in branch_decomposition(state, "A", basis):
        for b in branch_decomposition(a.residual, "B", basis):
            if a.outcome is not b.outcome:
                total += a.probability * b.probability
    return total


def detection_probability_oracle(eve: EveModel, cfg: VerificationConfig) -> float:
    """Per-checked-pair mismatch probability by exhaustive enumeration.

    Sums over Eve's basis, Eve's outcome, the verifiers' basis and both
    verifier outcomes, using exact branch probabilities.
    """
    if eve is EveModel.NONE:
        raise UnsupportedModel("the oracle needs an eavesdropper model")
    phi = prepare_bell_phi_plus()
    total = 0.0
    for eve_basis, w_eve in eve.basis_weights():
        for branch in branch_decomposition(phi, "B", eve_basis):
            _, forwarded = collapse(phi, "B", eve_basis, None, force=branch.outcome)
            for check_basis, w_check in cfg.basis_policy.basis_weights():
                total += (
                    w_eve * branch.probability * w_check
                    * mismatch_probability(forwarded, check_basis)
                )
    return total
