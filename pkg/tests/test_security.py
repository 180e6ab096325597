import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import detection_probability_dm
from qsdc_sim.errors import ChannelNotVerified, EmptyInput, InvalidFraction, UnsupportedModel
from qsdc_sim.protocols import Message, prepare_bell_phi_plus, qsdc_send_message, resource_counts
from qsdc_sim.qsim import Basis, fidelity, ket
from qsdc_sim.rng import make_rng
from qsdc_sim.security import (
    BasisPolicy,
    EveModel,
    Verdict,
    VerificationConfig,
    detection_probability_oracle,
    distribute_epr,
    mismatch_probability,
    verify_channel,
)
from qsdc_sim.transcript import Measured, QubitSent, Transcript

EVES = [EveModel.INTERCEPT_Z, EveModel.INTERCEPT_RANDOM]


def within_4_sigma(freq, p, n):
    return abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / n)


class TestDistribution:
    def test_no_eve_gives_phi_plus(self):
        (pair,) = distribute_epr(1, EveModel.NONE, make_rng(0), Transcript())
        assert fidelity(pair.state, prepare_bell_phi_plus()) == pytest.approx(1.0, abs=1e-12)
        assert not pair.verified

    def test_intercept_z_collapses_to_00_or_11(self):
        seen = {"00": 0, "11": 0}
        n = 4000
        rng = make_rng(1)
        for _ in range(n):
            (pair,) = distribute_epr(1, EveModel.INTERCEPT_Z, rng, Transcript())
            for bits in seen:
                if pair.state.allclose(ket(bits, ("A", "B"))):
                    seen[bits] += 1
        assert sum(seen.values()) == n
        assert within_4_sigma(seen["00"] / n, 0.5, n)

    def test_logs_one_qubit_sent_per_pair(self):
        t = Transcript()
        distribute_epr(8, EveModel.NONE, make_rng(0), t)
        assert len(t.of_kind(QubitSent)) == 8
        assert resource_counts(t).qubits_sent == 8
        assert not t.of_kind(Measured)

    def test_eve_measurements_are_logged(self):
        t = Transcript()
        distribute_epr(3, EveModel.INTERCEPT_RANDOM, make_rng(0), t)
        assert [m.party for m in t.of_kind(Measured)] == ["eve"] * 3

    def test_rejects_zero_pairs(self):
        with pytest.raises(ValueError):
            distribute_epr(0, EveModel.NONE, make_rng(0), Transcript())


class TestVerification:
    def test_ideal_pairs_pass(self):
        rng = make_rng(0)
        pairs = distribute_epr(100, EveModel.NONE, rng, Transcript())
        report, surviving = verify_channel(pairs, VerificationConfig(sample_fraction=0.5), rng)
        assert report.pairs_checked == 50
        assert report.mismatches == 0
        assert report.qber_estimate == 0.0
        assert report.verdict is Verdict.PASS
        assert len(surviving) == 50
        assert all(p.verified for p in surviving)

    def test_sampled_and_surviving_partition_pairs(self):
        rng = make_rng(1)
        pairs = distribute_epr(37, EveModel.NONE, rng, Transcript())
        report, surviving = verify_channel(pairs, VerificationConfig(sample_fraction=0.3), rng)
        assert report.pairs_checked == math.ceil(0.3 * 37)
        assert report.pairs_checked + len(surviving) == 37
        idx = [p.index for p in surviving]
        assert idx == sorted(set(idx))

    def test_tampered_pairs_stay_unverified(self):
        rng = make_rng(3)
        pairs = distribute_epr(200, EveModel.INTERCEPT_Z, rng, Transcript())
        report, surviving = verify_channel(pairs, VerificationConfig(), rng)
        assert report.verdict is Verdict.TAMPERING_DETECTED
        assert report.qber_estimate == report.mismatches / report.pairs_checked
        assert not any(p.verified for p in surviving)
        with pytest.raises(ChannelNotVerified):
            qsdc_send_message("0", surviving, rng)

    def test_threshold(self):
        rng = make_rng(3)
        pairs = distribute_epr(40, EveModel.INTERCEPT_Z, rng, Transcript())
        report, _ = verify_channel(pairs, VerificationConfig(mismatch_threshold=1000), rng)
        assert report.mismatches > 0
        assert report.verdict is Verdict.PASS

    def test_summary_event_logged(self):
        rng = make_rng(0)
        t = Transcript()
        pairs = distribute_epr(4, EveModel.NONE, rng, t)
        report, _ = verify_channel(pairs, VerificationConfig(), rng, t)
        assert t.events[-1].kind == "verification_summary"
        assert t.events[-1].verdict == "pass"
        assert t.events[-1].pairs_checked == report.pairs_checked == 2

    def test_errors(self):
        with pytest.raises(EmptyInput):
            verify_channel([], VerificationConfig(), make_rng(0))
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(InvalidFraction):
                VerificationConfig(sample_fraction=bad)

    @settings(max_examples=60, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(1, 60),
        fraction=st.floats(0.01, 0.99),
        policy=st.sampled_from(list(BasisPolicy)),
    )
    def test_no_eve_never_mismatches(self, seed, n, fraction, policy):
        rng = make_rng(seed)
        pairs = distribute_epr(n, EveModel.NONE, rng, Transcript())
        cfg = VerificationConfig(sample_fraction=fraction, basis_policy=policy)
        report, surviving = verify_channel(pairs, cfg, rng)
        assert report.mismatches == 0
        assert report.verdict is Verdict.PASS
        assert report.pairs_checked + len(surviving) == n

    def test_message_phase_after_pass(self):
        rng = make_rng(21)
        t = Transcript()
        pairs = distribute_epr(64, EveModel.NONE, rng, t)
        report, surviving = verify_channel(pairs, VerificationConfig(), rng, t)
        assert report.verdict is Verdict.PASS
        msg = Message(tuple(rng.integers(0, 2, size=len(surviving))))
        res = qsdc_send_message(msg, surviving, rng, t)
        assert res.bit_errors(msg) == 0


class TestOracle:
    @pytest.mark.parametrize("eve", EVES)
    @pytest.mark.parametrize("policy", list(BasisPolicy))
    def test_matches_density_matrix(self, eve, policy):
        cfg = VerificationConfig(basis_policy=policy)
        weights = [(b.value, w) for b, w in policy.basis_weights()]
        assert detection_probability_oracle(eve, cfg) == pytest.approx(
            detection_probability_dm(eve.value, weights), abs=1e-12
        )

    def test_documented_values(self):
        uniform = VerificationConfig()
        assert detection_probability_oracle(EveModel.INTERCEPT_Z, uniform) == pytest.approx(0.25)
        assert detection_probability_oracle(EveModel.INTERCEPT_RANDOM, uniform) == pytest.approx(0.25)
        z_only = VerificationConfig(basis_policy=BasisPolicy.COMPUTATIONAL_ONLY)
        assert detection_probability_oracle(EveModel.INTERCEPT_Z, z_only) == 0.0
        x_only = VerificationConfig(basis_policy=BasisPolicy.PLUS_MINUS_ONLY)
        assert detection_probability_oracle(EveModel.INTERCEPT_Z, x_only) == pytest.approx(0.5)

    def test_unsupported(self):
        with pytest.raises(UnsupportedModel):
            detection_probability_oracle(EveModel.NONE, VerificationConfig())

    def test_phi_plus_has_no_mismatch(self):
        for basis in Basis:
            assert mismatch_probability(prepare_bell_phi_plus(), basis) == pytest.approx(0, abs=1e-15)


def empirical_rate(eve, policy, n_checked, seed):
    rng = make_rng(seed)
    pairs = distribute_epr(2 * n_checked, eve, rng, Transcript())
    report, _ = verify_channel(pairs, VerificationConfig(basis_policy=policy), rng)
    assert report.pairs_checked == n_checked
    return report.mismatches / n_checked


def test_intercept_z_in_plus_minus_basis_statistics():
    n = 20_000
    rate = empirical_rate(EveModel.INTERCEPT_Z, BasisPolicy.PLUS_MINUS_ONLY, n, seed=5)
    assert within_4_sigma(rate, 0.5, n)


def test_intercept_random_monte_carlo_agrees_with_oracle():
    n = 100_000
    p = detection_probability_oracle(EveModel.INTERCEPT_RANDOM, VerificationConfig())
    rate = empirical_rate(EveModel.INTERCEPT_RANDOM, BasisPolicy.UNIFORM, n, seed=6)
    assert within_4_sigma(rate, p, n)


def test_escape_probability_scales_geometrically():
    # Eight pairs per session, half sampled: Eve escapes only if all four checks agree.
    sessions, k = 5000, 4
    p = detection_probability_oracle(EveModel.INTERCEPT_Z, VerificationConfig())
    rng = make_rng(8)
    escapes = 0
    for _ in range(sessions):
        pairs = distribute_epr(2 * k, EveModel.INTERCEPT_Z, rng, Transcript())
        report, _ = verify_channel(pairs, VerificationConfig(), rng)
        assert report.pairs_checked == k
        escapes += report.verdict is Verdict.PASS
    assert within_4_sigma(escapes / sessions, (1 - p) ** k, sessions)
