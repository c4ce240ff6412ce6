// Copyright 2026 The bqml-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bqml/protocol.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

using namespace bqml;

namespace {

PolarizationVector vec(double alpha, double beta, double magnitude = 1.0) {
    return PolarizationVector{alpha, beta, magnitude};
}

const double kR = 0.7071067811865476;

SessionConfig small_config(uint64_t seed = 1) {
    SessionConfig c;
    c.n_pairs_per_source = 200;
    c.check_fraction = 0.5;
    c.u = vec(kR, kR);
    c.v_a = vec(1, 0);
    c.v_b = vec(0, 1);
    c.shots = 60;
    c.seed = seed;
    return c;
}

/// Many message pairs, a single checking pair.
SessionConfig wide_config(size_t n, uint64_t seed = 1) {
    SessionConfig c = small_config(seed);
    c.n_pairs_per_source = n;
    c.check_fraction = 1.0 / static_cast<double>(n);
    c.shots = n - 1;
    return c;
}

std::vector<size_t> range(size_t from, size_t to) {
    std::vector<size_t> v(to - from);
    std::iota(v.begin(), v.end(), from);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

TEST(SessionConfig, CheckingSplit) {
    SessionConfig c = small_config();
    EXPECT_EQ(c.checking_pairs(), 100u);
    EXPECT_EQ(c.message_pairs(), 100u);
    c.check_fraction = 0.25;
    EXPECT_EQ(c.checking_pairs(), 50u);
    EXPECT_EQ(c.message_pairs(), 150u);
}

TEST(SessionConfig, ShotsBeyondMessageGroupRejected) {
    SessionConfig c = small_config();
    c.shots = 101;
    EXPECT_THROW(Session(c, ChannelSet{}), ConfigError);
    c.shots = 100;
    EXPECT_NO_THROW(Session(c, ChannelSet{}));
}

TEST(SessionConfig, AllViolationsListed) {
    SessionConfig c = small_config();
    c.check_fraction = 0.0;
    c.ci_level = 1.5;
    c.u = vec(1, 1);
    try {
        c.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_EQ(e.violations().size(), 3u);
        EXPECT_NE(std::string(e.what()).find("vectors.u"), std::string::npos);
    }
}

TEST(SessionConfig, ChannelErrorsBecomeConfigErrors) {
    ChannelSet ch;
    ch.set_loss(ChannelName::C_a2b2, 2.0);
    EXPECT_THROW(Session(small_config(), ch), ConfigError);
}

TEST(Session, TranscriptHashDeterministic) {
    const uint64_t h1 = transcript_hash(run_session(small_config(9), ChannelSet{}).transcript);
    const uint64_t h2 = transcript_hash(run_session(small_config(9), ChannelSet{}).transcript);
    const uint64_t h3 = transcript_hash(run_session(small_config(10), ChannelSet{}).transcript);
    EXPECT_EQ(h1, h2);
    EXPECT_NE(h1, h3);
}

// ---------------------------------------------------------------------------
// Distribution and checking

TEST(DistributePairs, AllPairsBell) {
    Session s(small_config(), ChannelSet{});
    auto records = s.distribute_pairs();
    EXPECT_EQ(records.size(), 600u);
    const StateVector bell = bell_phi_plus(QubitId("a2"), QubitId("b2"));
    for (const auto &r : records) {
        EXPECT_FALSE(r.lost);
    }
    EXPECT_NEAR(fidelity(s.pair_state(Source::S2, 17), bell), 1.0, 1e-12);
    EXPECT_TRUE(s.interception_log().empty());
    EXPECT_THROW(s.distribute_pairs(), ProtocolError);
}

TEST(DistributePairs, AttackLogsEveryPairOnItsChannel) {
    ChannelSet ch;
    ch.set_attack(ChannelName::C_a3b3, InterceptResend{});
    Session s(small_config(), ch);
    s.distribute_pairs();
    ASSERT_EQ(s.interception_log().size(), 200u);
    for (const auto &e : s.interception_log()) {
        EXPECT_EQ(e.channel, ChannelName::C_a3b3);
    }
}

TEST(EavesdropCheck, HonestChannelNeverMismatches) {
    Session s(small_config(), ChannelSet{});
    s.distribute_pairs();
    const auto idx = range(0, 200);
    for (Source src : kAllSources) {
        CheckReport r = s.eavesdrop_check(src, idx);
        EXPECT_EQ(r.n_checked, 200u);
        EXPECT_EQ(r.n_mismatch, 0u);
    }
    EXPECT_THROW(s.eavesdrop_check(Source::S1, std::vector<size_t>{3}), ProtocolError);
}

TEST(EavesdropCheck, MismatchRatesMatchOracle) {
    for (AttackStrategy attack : {AttackStrategy{InterceptResend{}}, AttackStrategy{FakePhoton{Outcome::Plus}}}) {
        ChannelSet ch;
        ch.set_attack(ChannelName::C_a1b1, attack);
        SessionConfig c = small_config(3);
        c.n_pairs_per_source = 4000;
        c.shots = 10;
        Session s(c, ch);
        s.distribute_pairs();
        CheckReport r = s.eavesdrop_check(Source::S1, range(0, 4000));
        // sigma <= 0.008
        EXPECT_NEAR(r.mismatch_rate(), detection_probability_oracle(attack), 0.03) << describe(attack);
    }
}

TEST(EavesdropCheck, LostPairsSkipped) {
    ChannelSet ch;
    ch.set_loss(ChannelName::C_a2b2, 1.0);
    Session s(small_config(), ch);
    s.distribute_pairs();
    CheckReport r = s.eavesdrop_check(Source::S2, range(0, 50));
    EXPECT_EQ(r.n_lost, 50u);
    EXPECT_EQ(r.n_checked, 0u);
    EXPECT_EQ(r.mismatch_rate(), 0.0);
}

// ---------------------------------------------------------------------------
// Control and target preparation

TEST(PrepareControl, CollapsesBobHalfToAliceResult) {
    Session s(wide_config(4001), ChannelSet{});
    s.distribute_pairs();
    const size_t before = s.transcript().size();
    size_t computational = 0;
    for (size_t i = 1; i < 4001; i++) {
        ControlRecord r = s.prepare_control(i);
        EXPECT_EQ(basis_of(r.prepared_outcome), r.basis);
        const StateVector st = s.pair_state(Source::S1, i);
        EXPECT_NEAR(outcome_probability(st, QubitId("b1"), r.prepared_outcome), 1.0, 1e-12);
        computational += r.basis == MeasBasis::Computational;
    }
    EXPECT_NEAR(computational / 4000.0, 0.5, 0.02);
    // Alice keeps her basis and result private.
    EXPECT_EQ(s.transcript().size(), before);
    EXPECT_THROW(s.prepare_control(5), ProtocolError);
    EXPECT_THROW(s.prepare_control(0), ProtocolError);
}

TEST(RemotePrepare, BobHoldsTargetForEitherOutcome) {
    Session s(wide_config(4001), ChannelSet{});
    s.distribute_pairs();
    Rng rng(21);
    size_t v_count = 0;
    for (size_t i = 1; i < 4001; i++) {
        auto [a, b] = bqml::testing::random_real_direction(rng);
        const size_t msgs = s.transcript().size();
        PrepRecord r = s.remote_prepare(vec(a, b), Source::S2, i);
        const Projection p = project(s.pair_state(Source::S2, i), QubitId("b2"), Ket2{a, b});
        EXPECT_NEAR(p.probability, 1.0, 1e-10);
        EXPECT_EQ(r.correction_requested, r.alice_outcome == Outcome::V);
        EXPECT_EQ(s.transcript().size(), msgs + (r.correction_requested ? 1 : 0));
        v_count += r.alice_outcome == Outcome::V;
    }
    EXPECT_NEAR(v_count / 4000.0, 0.5, 0.02);
    EXPECT_THROW(s.remote_prepare(vec(1, 0), Source::S1, 2), ProtocolError);
    EXPECT_THROW(s.remote_prepare(vec(1, 0), Source::S2, 2), ProtocolError);
    EXPECT_THROW(s.remote_prepare(vec(1, 1), Source::S3, 2), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Controlled swap

namespace {

/// Drives one trial up to the returned control, retrying until the control
/// lands on `want`.
ControlRecord prepared_trial(Session &s, size_t &next, Outcome want, const PolarizationVector &u,
                             const PolarizationVector &v) {
    while (true) {
        const size_t i = next++;
        ControlRecord c = s.prepare_control(i);
        s.remote_prepare(u, Source::S2, i);
        s.remote_prepare(v, Source::S3, i);
        EXPECT_TRUE(s.server_fredkin_and_return(i, i, i));
        if (c.prepared_outcome == want) {
            return c;
        }
        s.client_measure_control(c, Reference::A);
    }
}

}  // namespace

TEST(ServerFredkin, ComputationalControlSwapsOnlyOnV) {
    Session s(wide_config(400), ChannelSet{});
    s.distribute_pairs();
    size_t next = 1;
    const PolarizationVector u = vec(0.6, 0.8), v = vec(1, 0);
    const QubitId b2("b2"), b3("b3");

    ControlRecord h = prepared_trial(s, next, Outcome::H, u, v);
    EXPECT_NEAR(project(*s.active_trial(), b2, u.ket()).probability, 1.0, 1e-12);
    EXPECT_NEAR(project(*s.active_trial(), b3, v.ket()).probability, 1.0, 1e-12);
    EXPECT_EQ(s.client_measure_control(h, Reference::A).kind, TrialKind::SecurityPass);

    ControlRecord vc = prepared_trial(s, next, Outcome::V, u, v);
    EXPECT_NEAR(project(*s.active_trial(), b2, v.ket()).probability, 1.0, 1e-12);
    EXPECT_NEAR(project(*s.active_trial(), b3, u.ket()).probability, 1.0, 1e-12);
    EXPECT_EQ(s.client_measure_control(vc, Reference::A).kind, TrialKind::SecurityPass);
    EXPECT_FALSE(s.active_trial().has_value());
}

TEST(ServerFredkin, IdenticalTargetsLeaveDiagonalControlUntouched) {
    Session s(wide_config(400), ChannelSet{});
    s.distribute_pairs();
    size_t next = 1;
    const PolarizationVector u = vec(0.6, -0.8);
    for (Outcome want : {Outcome::Plus, Outcome::Minus}) {
        ControlRecord c = prepared_trial(s, next, want, u, u);
        EXPECT_NEAR(outcome_probability(*s.active_trial(), QubitId("b1"), want == Outcome::Plus ? Outcome::Minus : Outcome::Plus), 0.0, 1e-12);
        EXPECT_EQ(s.client_measure_control(c, Reference::B).kind, TrialKind::Same);
    }
}

TEST(ServerFredkin, OrderingEnforced) {
    Session s(wide_config(400), ChannelSet{});
    s.distribute_pairs();
    EXPECT_THROW(s.server_fredkin_and_return(1, 1, 1), ProtocolError);
    ControlRecord c = s.prepare_control(1);
    s.remote_prepare(vec(1, 0), Source::S2, 1);
    s.remote_prepare(vec(1, 0), Source::S3, 1);
    ASSERT_TRUE(s.server_fredkin_and_return(1, 1, 1));
    s.prepare_control(2);
    s.remote_prepare(vec(1, 0), Source::S2, 2);
    s.remote_prepare(vec(1, 0), Source::S3, 2);
    EXPECT_THROW(s.server_fredkin_and_return(2, 2, 2), ProtocolError);
    ControlRecord wrong{2, Outcome::H, MeasBasis::Computational};
    EXPECT_THROW(s.client_measure_control(wrong, Reference::A), ProtocolError);
    s.client_measure_control(c, Reference::A);
    EXPECT_THROW(s.client_measure_control(c, Reference::A), ProtocolError);
}

// ---------------------------------------------------------------------------
// Full runs

TEST(RunSession, IdenticalSeedsIdenticalResults) {
    const SessionResult a = run_session(small_config(5), ChannelSet{});
    const SessionResult b = run_session(small_config(5), ChannelSet{});
    EXPECT_EQ(a.trials, b.trials);
    EXPECT_EQ(transcript_hash(a.transcript), transcript_hash(b.transcript));
}

TEST(RunSession, HonestRunStructure) {
    const SessionResult r = run_session(small_config(6), ChannelSet{});
    ASSERT_FALSE(r.aborted) << r.abort_reason;
    EXPECT_EQ(r.trials.size(), 60u);
    EXPECT_TRUE(r.discarded.empty());
    EXPECT_EQ(r.security_fail_count, 0u);
    size_t a = 0;
    for (const auto &t : r.trials) {
        a += t.reference == Reference::A;
    }
    EXPECT_EQ(a, 30u);
    // Three round-1 reports, three spot checks over the 40 spare message pairs.
    ASSERT_EQ(r.check_reports.size(), 6u);
    EXPECT_EQ(r.check_reports[0].n_checked, 100u);
    EXPECT_EQ(r.check_reports[3].round, 2);
    EXPECT_EQ(r.check_reports[3].n_checked, 40u);
    ASSERT_TRUE(r.estimates);
}

TEST(RunSession, NoSecurityFailuresWhenHonest) {
    SessionConfig c = wide_config(3001, 7);
    c.u = vec(0.28, 0.96);
    c.v_a = vec(-0.6, 0.8);
    const SessionResult r = run_session(c, ChannelSet{});
    ASSERT_FALSE(r.aborted);
    EXPECT_GT(r.computational_trials, 1300u);
    EXPECT_EQ(r.security_fail_count, 0u);
}

TEST(RunSession, InterceptResendAborts) {
    ChannelSet ch;
    ch.set_attack(ChannelName::C_a2b2, InterceptResend{});
    const SessionResult r = run_session(small_config(8), ch);
    EXPECT_TRUE(r.aborted);
    EXPECT_EQ(r.abort_reason, kAbortEavesdropper);
    EXPECT_TRUE(r.trials.empty());
    EXPECT_FALSE(r.estimates);
    ASSERT_FALSE(r.transcript.empty());
    EXPECT_TRUE(std::holds_alternative<msg::AbortNotice>(r.transcript.back().body));
}

TEST(RunSession, TamperedReturnFailsSecurityCheck) {
    ChannelSet ch;
    ch.set_attack(ChannelName::C_a4b4, InterceptResend{BasisPolicy::FixedDiagonal});
    const SessionResult r = run_session(small_config(9), ch);
    EXPECT_TRUE(r.aborted);
    EXPECT_EQ(r.abort_reason, kAbortSecurityFail);
    EXPECT_GT(r.security_fail_count, 0u);
}

TEST(RunSession, LossDiscardsTrials) {
    ChannelSet ch;
    ch.set_loss(ChannelName::C_a4b4, 0.3);
    ch.set_loss(ChannelName::C_a3b3, 0.1);
    SessionConfig c = small_config(10);
    c.n_pairs_per_source = 1000;
    c.shots = 400;
    const SessionResult r = run_session(c, ch);
    ASSERT_FALSE(r.aborted) << r.abort_reason;
    EXPECT_EQ(r.trials.size() + r.discarded.size(), 400u);
    EXPECT_GT(r.discarded.size(), 80u);
    size_t before_control = 0;
    for (const auto &d : r.discarded) {
        before_control += !d.control_basis.has_value();
    }
    EXPECT_GT(before_control, 0u);
    EXPECT_LT(before_control, r.discarded.size());
    EXPECT_GT(r.check_reports[2].n_lost, 0u);
}

TEST(RunSession, OnlyOnce) {
    Session s(small_config(), ChannelSet{});
    s.run();
    EXPECT_THROW(s.run(), ProtocolError);
}

// ---------------------------------------------------------------------------
// Returned reference check

TEST(VerifyReturnedReference, RequiresCompletedSession) {
    Session fresh(small_config(), ChannelSet{});
    EXPECT_THROW(fresh.verify_returned_reference(), ProtocolError);

    ChannelSet ch;
    ch.set_attack(ChannelName::C_a1b1, FakePhoton{Outcome::H});
    Session aborted(small_config(), ch);
    ASSERT_TRUE(aborted.run().aborted);
    EXPECT_THROW(aborted.verify_returned_reference(), ProtocolError);
}

TEST(VerifyReturnedReference, HonestServerPasses) {
    SessionConfig c = wide_config(2001, 11);
    c.u = vec(0.6, 0.8);
    c.v_a = vec(0.8, -0.6);
    c.v_b = vec(kR, kR);
    Session s(c, ChannelSet{});
    const SessionResult r = s.run();
    ASSERT_FALSE(r.aborted);
    const HonestyReport h = s.verify_returned_reference();
    EXPECT_EQ(h.n_returned, 2 * r.computational_trials);
    EXPECT_EQ(h.n_checked, h.n_returned);
    EXPECT_EQ(h.n_suspicious, 0u);
    // Carriers are handed back once.
    EXPECT_EQ(s.verify_returned_reference().n_returned, 0u);
}

TEST(VerifyReturnedReference, MeasuringServerCaught) {
    // A computational measurement of real (alpha, beta) passes Alice's
    // projection with alpha^4 + beta^4, so each carrier is flagged with
    // 2 alpha^2 beta^2.
    SessionConfig c = wide_config(8001, 12);
    c.u = vec(0.6, 0.8);
    c.v_a = vec(kR, kR);
    c.v_b = vec(1, 0);
    c.server_behavior = ServerBehavior::MeasureTargetsBeforeReturn;
    auto flag = [](const PolarizationVector &p) { return 2 * p.alpha * p.alpha * p.beta * p.beta; };
    const double expected = (flag(c.u) + 0.5 * (flag(c.v_a) + flag(c.v_b))) / 2;
    Session s(c, ChannelSet{});
    ASSERT_FALSE(s.run().aborted);
    const HonestyReport h = s.verify_returned_reference();
    EXPECT_GT(h.n_checked, 7000u);
    EXPECT_NEAR(h.suspicion_rate(), expected, 0.015);
}

TEST(VerifyReturnedReference, EmptyWhenNoComputationalTrials) {
    SessionConfig c = small_config(13);
    c.shots = 2;
    for (uint64_t seed = 13;; seed++) {
        c.seed = seed;
        Session s(c, ChannelSet{});
        const SessionResult r = s.run();
        if (!r.aborted && r.computational_trials == 0) {
            const HonestyReport h = s.verify_returned_reference();
            EXPECT_EQ(h.n_returned, 0u);
            EXPECT_EQ(h.suspicion_rate(), 0.0);
            return;
        }
    }
}
