import io
import json

import pytest

from qsdc_sim.protocols import teleport_standard
from qsdc_sim.qsim import UnknownQubit
from qsdc_sim.rng import make_rng
from qsdc_sim.transcript import (
    ClassicalBitSent,
    GateApplied,
    Measured,
    QubitSent,
    ReceiptAcknowledged,
    Transcript,
    VerificationSummary,
    read_stream,
    write_summary,
    write_trial,
)


def sample_transcript():
    return Transcript([
        QubitSent("alice", "bob", "2"),
        ReceiptAcknowledged("bob"),
        GateApplied("alice", "CNOT", ("1", "2")),
        Measured("alice", "1", "plus_minus", "-"),
        ClassicalBitSent("alice", "bob", 1),
        VerificationSummary("alice", 4, 1, 0.25, "tampering_detected"),
    ])


def test_line_format_golden():
    lines = sample_transcript().to_lines()
    assert lines[0] == '{"seq":0,"event_kind":"qubit_sent","party":"alice","payload":{"to":"bob","label":"2"}}'
    assert lines[4] == '{"seq":4,"event_kind":"classical_bit_sent","party":"alice","payload":{"to":"bob","bit":1}}'
    for seq, line in enumerate(lines):
        rec = json.loads(line)
        assert list(rec) == ["seq", "event_kind", "party", "payload"]
        assert rec["seq"] == seq


def test_round_trip():
    t = sample_transcript()
    back = Transcript.loads(t.dumps())
    assert back == t
    assert back.dumps() == t.dumps()


def test_round_trip_protocol_transcript():
    t = teleport_standard(UnknownQubit(0.6, 0.8), make_rng(3)).transcript
    assert Transcript.loads(t.dumps()) == t


def test_sequence_gaps_rejected():
    text = sample_transcript().dumps().splitlines()
    with pytest.raises(ValueError):
        Transcript.loads("\n".join(text[1:]))


def test_append_only_rejects_foreign_objects():
    t = Transcript()
    with pytest.raises(TypeError):
        t.append({"seq": 0})
    assert t.append(ReceiptAcknowledged("bob")) == 0
    assert len(t.events) == 1


def test_stream_round_trip():
    buf = io.StringIO()
    write_trial(buf, 0, sample_transcript())
    write_trial(buf, 1, Transcript([ReceiptAcknowledged("bob")]))
    write_summary(buf, {"command": "teleport", "seed": 1})
    trials, summary = read_stream(buf.getvalue())
    assert summary == {"command": "teleport", "seed": 1}
    assert trials[0] == sample_transcript()
    assert len(trials[1]) == 1
