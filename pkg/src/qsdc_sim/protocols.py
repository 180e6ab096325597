"""Teleportation and secure direct communication protocols.

``teleport_cnot`` sends an unknown qubit with one CNOT, one transmitted
ancilla and one classical bit.  ``teleport_standard`` is the usual
three-particle, two-bit scheme kept as a baseline for resource comparison.
The QSDC functions encode message bits as I / Z on Alice's half of a shared
``|Phi+>`` pair and ship them to Bob with the CNOT-ancilla method.

Every run logs to a :class:`~qsdc_sim.transcript.Transcript`; resource
figures are folds over that log, never separate counters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ChannelNotVerified, InsufficientPairs, LabelMismatch
from .qsim import (
    CNOT,
    H,
    I,
    X,
    Z,
    Basis,
    Gate,
    Outcome,
    PureState,
    UnknownQubit,
    apply_gate,
    fidelity,
    ket,
    measure,
    tensor,
)
from .transcript import (
    ALICE,
    BOB,
    ClassicalBitSent,
    GateApplied,
    Measured,
    QubitSent,
    ReceiptAcknowledged,
    Transcript,
)

PAIR_LABELS = ("A", "B")

# Bob's fix-up after Alice's PlusMinus outcome.  Both gates are self-inverse.
CORRECTION_RULE: dict[Outcome, Gate] = {Outcome.PLUS: I, Outcome.MINUS: Z}


def correction_for_outcome(outcome: Outcome) -> Gate:
    try:
        return CORRECTION_RULE[outcome]
    except KeyError:
        raise ValueError(f"no correction defined for outcome {outcome}") from None


@dataclass(frozen=True)
class TeleportResult:
    bob_state: PureState
    alice_outcome: Outcome | tuple[Outcome, Outcome]
    transcript: Transcript
    fidelity_vs_input: float


@dataclass(frozen=True)
class ResourceCounts:
    qubits_sent: int
    classical_bits_sent: int
    particles_total: int
    acknowledgments: int = 0

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.qubits_sent, self.classical_bits_sent, self.particles_total)


def resource_counts(t: Transcript) -> ResourceCounts:
    """Fold a transcript into transmission costs.

    Receipt acknowledgments are tallied on their own and are not part of
    ``classical_bits_sent``.  ``particles_total`` counts distinct qubit labels
    that appear in any transmission, gate or measurement.
    """
    qubits = bits = acks = 0
    particles: set[str] = set()
    for e in t:
        if isinstance(e, QubitSent):
            qubits += 1
            particles.add(e.label)
        elif isinstance(e, ClassicalBitSent):
            bits += 1
        elif isinstance(e, ReceiptAcknowledged):
            acks += 1
        elif isinstance(e, GateApplied):
            particles.update(e.labels)
        elif isinstance(e, Measured):
            particles.add(e.label)
    return ResourceCounts(qubits, bits, len(particles), acks)


@lru_cache(maxsize=None)
def prepare_bell_phi_plus(labels: tuple[str, str] = PAIR_LABELS) -> PureState:
    """``(|00> + |11>)/sqrt(2)`` built as Hadamard on the first qubit then CNOT."""
    a, b = labels
    s = apply_gate(ket("00", labels), H, a)
    return apply_gate(s, CNOT, (a, b))


def teleport_cnot(
    input: UnknownQubit, rng: np.random.Generator | None, force: Outcome | None = None
) -> TeleportResult:
    """Teleport ``input`` from Alice (particle 1) onto Bob's ancilla (particle 2).

    ``force`` pins Alice's PlusMinus outcome instead of sampling it.
    """
    if not isinstance(input, UnknownQubit):
        input = UnknownQubit(*input)
    t = Transcript()
    state = tensor(input.as_state("1"), ket("0", ("2",)))
    state = apply_gate(state, CNOT, ("1", "2"))
    t.append(GateApplied(ALICE, CNOT.name, ("1", "2")))
    t.append(QubitSent(ALICE, BOB, "2"))
    t.append(ReceiptAcknowledged(BOB))

    branch, bob = measure(state, "1", Basis.PLUS_MINUS, rng, force)
    t.append(Measured(ALICE, "1", Basis.PLUS_MINUS.value, branch.outcome.value))
    t.append(ClassicalBitSent(ALICE, BOB, branch.outcome.bit))

    gate = correction_for_outcome(branch.outcome)
    bob = apply_gate(bob, gate, "2")
    t.append(GateApplied(BOB, gate.name, ("2",)))
    return TeleportResult(bob, branch.outcome, t, fidelity(bob, input.as_state("2")))


def standard_correction(m1: int, m2: int) -> list[Gate]:
    """Bob's gates, in application order, for Bell outcome bits ``(m1, m2)``.

    ``m1`` comes from the input particle after CNOT and Hadamard, ``m2`` from
    Alice's half of the pair: 00 -> I, 01 -> X, 10 -> Z, 11 -> Z.X (X first).
    """
    gates = []
    if m2:
        gates.append(X)
    if m1:
        gates.append(Z)
    return gates or [I]


def teleport_standard(
    input: UnknownQubit,
    rng: np.random.Generator | None,
    force: tuple[Outcome, Outcome] | None = None,
) -> TeleportResult:
    """Three-particle teleportation with a two-bit Bell measurement result."""
    if not isinstance(input, UnknownQubit):
        input = UnknownQubit(*input)
    t = Transcript()
    pair = prepare_bell_phi_plus(("2", "3"))
    t.append(GateApplied(ALICE, H.name, ("2",)))
    t.append(GateApplied(ALICE, CNOT.name, ("2", "3")))
    t.append(QubitSent(ALICE, BOB, "3"))

    state = tensor(input.as_state("1"), pair)
    state = apply_gate(state, CNOT, ("1", "2"))
    t.append(GateApplied(ALICE, CNOT.name, ("1", "2")))
    state = apply_gate(state, H, "1")
    t.append(GateApplied(ALICE, H.name, ("1",)))

    f1, f2 = force if force is not None else (None, None)
    b1, state = measure(state, "1", Basis.COMPUTATIONAL, rng, f1)
    t.append(Measured(ALICE, "1", Basis.COMPUTATIONAL.value, b1.outcome.value))
    b2, bob = measure(state, "2", Basis.COMPUTATIONAL, rng, f2)
    t.append(Measured(ALICE, "2", Basis.COMPUTATIONAL.value, b2.outcome.value))
    t.append(ClassicalBitSent(ALICE, BOB, b1.outcome.bit))
    t.append(ClassicalBitSent(ALICE, BOB, b2.outcome.bit))

    for gate in standard_correction(b1.outcome.bit, b2.outcome.bit):
        bob = apply_gate(bob, gate, "3")
        t.append(GateApplied(BOB, gate.name, ("3",)))
    return TeleportResult(
        bob, (b1.outcome, b2.outcome), t, fidelity(bob, input.as_state("3"))
    )


@dataclass(frozen=True)
class Message:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"message bits must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "Message":
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"message must be a nonempty string of 0/1, got {s!r}")
        return cls(tuple(int(c) for c in s))

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class EprPair:
    """One shared pair; ``index`` is the position both parties agree on."""

    state: PureState
    index: int
    verified: bool = False

    @property
    def alice_label(self) -> str:
        return f"A{self.index}"

    @property
    def bob_label(self) -> str:
        return f"B{self.index}"


@dataclass(frozen=True)
class QsdcResult:
    decoded: Message
    per_bit_outcomes: list[tuple[Outcome, Outcome]]
    transcript: Transcript = field(repr=False)

    def bit_errors(self, sent: Message) -> int:
        return sum(a != b for a, b in zip(sent, self.decoded))


def encoding_gate(bit: int) -> Gate:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return Z if bit else I


def qsdc_encode_bit(pair: PureState, bit: int) -> PureState:
    """Alice's encoding: I on A for 0, Z on A for 1 (``|Phi+>`` becomes ``|Phi->``)."""
    if pair.labels != PAIR_LABELS:
        raise LabelMismatch(f"expected pair labels {PAIR_LABELS}, got {pair.labels}")
    gate = encoding_gate(bit)
    return pair if gate is I else apply_gate(pair, gate, "A")


def _qsdc_round(
    pair: EprPair,
    bit: int,
    rng: np.random.Generator | None,
    transcript: Transcript,
    force: Outcome | None = None,
) -> tuple[int, Outcome, Outcome]:
    if not pair.verified:
        raise ChannelNotVerified(f"pair {pair.index} has not passed verification")
    a, b = pair.alice_label, pair.bob_label
    state = qsdc_encode_bit(pair.state, bit)
    transcript.append(GateApplied(ALICE, encoding_gate(bit).name, (a,)))

    alice, bob = measure(state, "A", Basis.PLUS_MINUS, rng, force)
    transcript.append(Measured(ALICE, a, Basis.PLUS_MINUS.value, alice.outcome.value))
    transcript.append(ClassicalBitSent(ALICE, BOB, alice.outcome.bit))

    gate = correction_for_outcome(alice.outcome)
    bob = apply_gate(bob, gate, "B")
    transcript.append(GateApplied(BOB, gate.name, (b,)))
    read, _ = measure(bob, "B", Basis.PLUS_MINUS, rng)
    transcript.append(Measured(BOB, b, Basis.PLUS_MINUS.value, read.outcome.value))
    return read.outcome.bit, alice.outcome, read.outcome


def qsdc_round(
    pair: EprPair,
    bit: int,
    rng: np.random.Generator | None,
    transcript: Transcript,
    force: Outcome | None = None,
) -> int:
    """Send one message bit over one verified pair and return Bob's decoded bit.

    Bob reads Plus as 0 and Minus as 1.
    """
    return _qsdc_round(pair, bit, rng, transcript, force)[0]


def qsdc_send_message(
    msg: Message | str,
    pairs: Sequence[EprPair],
    rng: np.random.Generator,
    transcript: Transcript | None = None,
) -> QsdcResult:
    """Send ``msg`` bit by bit over ``pairs[:len(msg)]`` in index order.

    Events are appended to ``transcript`` when one is given, otherwise to a
    fresh transcript returned in the result.
    """
    if isinstance(msg, str):
        msg = Message.from_string(msg)
    if len(msg) == 0:
        raise ValueError("cannot send an empty message")
    if len(pairs) < len(msg):
        raise InsufficientPairs(f"{len(msg)} bits need {len(msg)} pairs, have {len(pairs)}")
    used = pairs[: len(msg)]
    bad = [p.index for p in used if not p.verified]
    if bad:
        raise ChannelNotVerified(f"unverified pairs: {bad[:5]}")
    t = transcript if transcript is not None else Transcript()
    decoded, outcomes = [], []
    for pair, bit in zip(used, msg):
        d, alice, bob = _qsdc_round(pair, bit, rng, t)
        decoded.append(d)
        outcomes.append((alice, bob))
    return QsdcResult(Message(tuple(decoded)), outcomes, t)
