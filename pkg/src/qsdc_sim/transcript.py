"""Protocol transcripts and their line-delimited serialization.

A transcript is an append-only list of events; an event's sequence number is
its position.  Each serialized line is a JSON object with keys in the fixed
order ``seq, event_kind, party, payload``.  Streams written by the CLI add a
trailing ``trial`` key and end with a ``summary`` record, see
:func:`write_trial` and :func:`read_stream`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import ClassVar, Iterable, Iterator, TextIO

ALICE = "alice"
BOB = "bob"
EVE = "eve"


@dataclass(frozen=True)
class QubitSent:
    kind: ClassVar[str] = "qubit_sent"
    sender: str
    receiver: str
    label: str

    @property
    def party(self) -> str:
        return self.sender

    def payload(self) -> dict:
        return {"to": self.receiver, "label": self.label}

    @classmethod
    def from_payload(cls, party: str, payload: dict) -> "QubitSent":
        return cls(party, payload["to"], payload["label"])


@dataclass(frozen=True)
class ClassicalBitSent:
    kind: ClassVar[str] = "classical_bit_sent"
    sender: str
    receiver: str
    bit: int

    @property
    def party(self) -> str:
        return self.sender

    def payload(self) -> dict:
        return {"to": self.receiver, "bit": self.bit}

    @classmethod
    def from_payload(cls, party: str, payload: dict) -> "ClassicalBitSent":
        return cls(party, payload["to"], payload["bit"])


@dataclass(frozen=True)
class GateApplied:
    kind: ClassVar[str] = "gate_applied"
    party: str
    gate: str
    labels: tuple[str, ...]

    def payload(self) -> dict:
        return {"gate": self.gate, "labels": list(self.labels)}

    @classmethod
    def from_payload(cls, party: str, payload: dict) -> "GateApplied":
        return cls(party, payload["gate"], tuple(payload["labels"]))


@dataclass(frozen=True)
class Measured:
    kind: ClassVar[str] = "measured"
    party: str
    label: str
    basis: str
    outcome: str

    def payload(self) -> dict:
        return {"label": self.label, "basis": self.basis, "outcome": self.outcome}

    @classmethod
    def from_payload(cls, party: str, payload: dict) -> "Measured":
        return cls(party, payload["label"], payload["basis"], payload["outcome"])


@dataclass(frozen=True)
class ReceiptAcknowledged:
    """Bob's notice that a qubit arrived; not counted as message-bearing classical cost."""

    kind: ClassVar[str] = "receipt_acknowledged"
    party: str

    def payload(self) -> dict:
        return {}

    @classmethod
    def from_payload(cls, party: str, payload: dict) -> "ReceiptAcknowledged":
        return cls(party)


@dataclass(frozen=True)
class VerificationSummary:
    kind: ClassVar[str] = "verification_summary"
    party: str
    pairs_checked: int
    mismatches: int
    qber_estimate: float
    verdict: str

    def payload(self) -> dict:
        return {
            "pairs_checked": self.pairs_checked,
            "mismatches": self.mismatches,
            "qber_estimate": self.qber_estimate,
            "verdict": self.verdict,
        }

    @classmethod
    def from_payload(cls, party: str, payload: dict) -> "VerificationSummary":
        return cls(
            party,
            payload["pairs_checked"],
            payload["mismatches"],
            payload["qber_estimate"],
            payload["verdict"],
        )


Event = (
    QubitSent
    | ClassicalBitSent
    | GateApplied
    | Measured
    | ReceiptAcknowledged
    | VerificationSummary
)

EVENT_TYPES = {
    cls.kind: cls
    for cls in (
        QubitSent,
        ClassicalBitSent,
        GateApplied,
        Measured,
        ReceiptAcknowledged,
        VerificationSummary,
    )
}


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=True, separators=(",", ":"), allow_nan=False)


class Transcript:
    """Append-only event log owned by a single protocol run."""

    def __init__(self, events: Iterable[Event] = ()):
        self._events: list[Event] = []
        for e in events:
            self.append(e)

    def append(self, event: Event) -> int:
        if type(event) not in EVENT_TYPES.values():
            raise TypeError(f"not a transcript event: {event!r}")
        self._events.append(event)
        return len(self._events) - 1

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(self._events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __eq__(self, other):
        if not isinstance(other, Transcript):
            return NotImplemented
        return self._events == other._events

    def of_kind(self, cls) -> list:
        return [e for e in self._events if isinstance(e, cls)]

    def records(self) -> Iterator[dict]:
        for seq, e in enumerate(self._events):
            yield {"seq": seq, "event_kind": e.kind, "party": e.party, "payload": e.payload()}

    def to_lines(self) -> list[str]:
        return [_dumps(r) for r in self.records()]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.to_lines())

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "Transcript":
        t = cls()
        for expected, rec in enumerate(records):
            if rec["seq"] != expected:
                raise ValueError(f"sequence gap: expected {expected}, got {rec['seq']}")
            event_cls = EVENT_TYPES[rec["event_kind"]]
            t.append(event_cls.from_payload(rec["party"], rec["payload"]))
        return t

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        return cls.from_records(json.loads(line) for line in text.splitlines() if line.strip())


def write_trial(out: TextIO, trial: int, transcript: Transcript) -> None:
    for rec in transcript.records():
        rec["trial"] = trial
        out.write(_dumps(rec) + "\n")


def write_summary(out: TextIO, summary: dict) -> None:
    out.write(_dumps({"event_kind": "summary", **summary}) + "\n")


def read_stream(text: str) -> tuple[dict[int, Transcript], dict | None]:
    """Parse a CLI structured stream into per-trial transcripts and the summary."""
    by_trial: dict[int, list[dict]] = {}
    summary = None
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec["event_kind"] == "summary":
            summary = {k: v for k, v in rec.items() if k != "event_kind"}
            continue
        trial = rec.pop("trial")
        by_trial.setdefault(trial, []).append(rec)
    return {k: Transcript.from_records(v) for k, v in by_trial.items()}, summary
