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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqml/adversary_channel.h"
#include "bqml/estimator.h"
#include "bqml/protocol_types.h"
#include "bqml/quantum_core.h"
#include "bqml/rng.h"

namespace bqml {

/// Invalid session or experiment configuration. what() lists every violation.
class ConfigError : public std::invalid_argument {
   public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string> &violations() const { return violations_; }

   private:
    std::vector<std::string> violations_;
};

/// A protocol step was invoked out of order or on a consumed pair.
class ProtocolError : public std::logic_error {
   public:
    using std::logic_error::logic_error;
};

enum class ServerBehavior {
    Honest,
    /// Bob measures every retained target in the computational basis before
    /// returning it.
    MeasureTargetsBeforeReturn,
};

inline constexpr const char *kAbortEavesdropper = "eavesdropper-suspected";
inline constexpr const char *kAbortSecurityFail = "control-check-failure";
inline constexpr const char *kAbortInsufficientData = "insufficient-data";

struct SessionConfig {
    /// Bell pairs prepared by each of the three sources.
    size_t n_pairs_per_source = 200;
    /// Fraction of each source's pairs forming the checking group.
    double check_fraction = 0.5;
    PolarizationVector u;
    PolarizationVector v_a;
    PolarizationVector v_b;
    /// Total Fredkin trials; references alternate A, B, A, ...
    size_t shots = 100;
    /// Largest tolerated checking-mismatch or control-failure rate before abort.
    double check_threshold = 0.0;
    uint64_t seed = 0;
    double ci_level = 0.95;
    double tie_epsilon = kDefaultTieEpsilon;
    bool record_transcript = true;
    ServerBehavior server_behavior = ServerBehavior::Honest;

    size_t checking_pairs() const;
    size_t message_pairs() const { return n_pairs_per_source - checking_pairs(); }

    /// Throws ConfigError listing all violations.
    void validate() const;
};

struct TransmissionRecord {
    Source source;
    size_t pair_index;
    bool lost;
};

struct CheckReport {
    Source source = Source::S1;
    ChannelName channel = ChannelName::C_a1b1;
    /// 1 for the checking group, 2 for the spot check of message pairs.
    int round = 1;
    size_t n_checked = 0;
    size_t n_mismatch = 0;
    size_t n_lost = 0;

    double mismatch_rate() const {
        return n_checked == 0 ? 0.0 : static_cast<double>(n_mismatch) / static_cast<double>(n_checked);
    }
};

/// A scheduled trial dropped because one of its photons was lost.
struct DiscardedTrial {
    size_t pair_index = 0;
    Reference reference = Reference::A;
    /// Empty when the triple was lost before the control was prepared.
    std::optional<MeasBasis> control_basis;
};

struct SessionEstimates {
    OverlapEstimate overlap_a;
    OverlapEstimate overlap_b;
    ClusterAssignment assignment;
};

struct SessionResult {
    std::vector<CheckReport> check_reports;
    std::vector<TrialOutcome> trials;
    std::vector<DiscardedTrial> discarded;
    size_t computational_trials = 0;
    size_t security_fail_count = 0;
    bool aborted = false;
    std::string abort_reason;
    std::optional<SessionEstimates> estimates;
    std::vector<ProtocolMessage> transcript;
    InterceptionLog interception_log;
};

struct HonestyReport {
    size_t n_returned = 0;
    size_t n_checked = 0;
    size_t n_suspicious = 0;
    size_t n_lost = 0;

    double suspicion_rate() const {
        return n_checked == 0 ? 0.0 : static_cast<double>(n_suspicious) / static_cast<double>(n_checked);
    }
};

/// One protocol run between Alice (client) and Bob (server).
///
/// Each source's pairs live in independent two-qubit states labeled a1/b1,
/// a2/b2, a3/b3; a trial merges one pair of each source into a six-qubit
/// state, so at most one joint state is alive at a time. The individual
/// steps are public so tests can drive them in isolation; run() executes
/// them in protocol order.
class Session {
   public:
    /// Validates the configuration and channels and derives one random
    /// stream per party and per channel from config.seed.
    Session(SessionConfig config, ChannelSet channels);

    const SessionConfig &config() const { return config_; }
    const ChannelSet &channels() const { return channels_; }

    /// Bob prepares |phi+> for every pair of every source and sends the
    /// Alice half through the source's channel.
    std::vector<TransmissionRecord> distribute_pairs();

    /// Bob measures his halves in random bases and announces basis and
    /// result; Alice measures in the same basis and counts disagreements.
    /// Lost pairs are skipped. Consumes the pairs.
    CheckReport eavesdrop_check(Source source, std::span<const size_t> indices, int round = 1);

    /// Alice measures her S1 half in a random basis; only she learns the result.
    ControlRecord prepare_control(size_t pair_index);

    /// Alice rotates and measures her half so Bob's half becomes `target`,
    /// requesting Pauli corrections when she sees V.
    PrepRecord remote_prepare(const PolarizationVector &target, Source source, size_t pair_index);

    /// Bob applies the controlled swap (control b1, targets b2 and b3) and
    /// returns the control through C_a4b4. Returns false if it was lost.
    bool server_fredkin_and_return(size_t control_index, size_t u_index, size_t v_index);

    /// Alice measures the returned control in her private basis.
    TrialOutcome client_measure_control(const ControlRecord &record, Reference reference);

    /// Full protocol: distribution, both checking rounds, the trial loop and
    /// estimation. May be called once.
    SessionResult run();

    /// Bob sends back the target carriers of Computational-control trials;
    /// Alice projects each onto the vector she knows it must hold.
    HonestyReport verify_returned_reference();

    const std::vector<ProtocolMessage> &transcript() const { return transcript_; }
    const InterceptionLog &interception_log() const { return log_; }

    /// Current two-qubit state of one pair (for inspection).
    StateVector pair_state(Source source, size_t pair_index) const;
    /// Six-qubit state of the trial in flight, if any.
    const std::optional<StateVector> &active_trial() const { return active_state_; }

   private:
    enum class Use { Fresh, Checked, Control, Target, Trial };

    struct PairSlot {
        std::array<Amplitude, 4> amps{};
        bool distributed = false;
        bool lost = false;
        Use use = Use::Fresh;
    };

    struct RetainedCarrier {
        size_t control_index;
        Reference reference;
        Outcome control;
        StateVector targets;  // qubits b2, b3
    };

    struct Client {
        explicit Client(Rng r) : rng(r) {}
        Rng rng;
        std::vector<ControlRecord> controls;
        std::vector<PrepRecord> preparations;
    };

    struct Server {
        explicit Server(Rng r) : rng(r) {}
        Rng rng;
        std::array<std::vector<PairSlot>, 3> pairs;
        std::vector<RetainedCarrier> retained;
    };

    PairSlot &slot(Source s, size_t i);
    const PairSlot &slot(Source s, size_t i) const;
    PairSlot &fresh_message_slot(Source s, size_t i, const char *op);
    void store(Source s, size_t i, const StateVector &state);
    Rng &channel_rng(ChannelName c) { return channel_rngs_[static_cast<size_t>(c)]; }
    void send(Party from, MessageBody body);
    void abort(SessionResult &result, const char *reason);

    SessionConfig config_;
    ChannelSet channels_;
    Client alice_;
    Server bob_;
    std::array<Rng, 4> channel_rngs_;
    std::vector<ProtocolMessage> transcript_;
    uint64_t next_seq_ = 0;
    InterceptionLog log_;
    std::optional<StateVector> active_state_;
    size_t active_control_ = 0;
    bool ran_ = false;
    bool completed_ = false;
};

ChannelName channel_of(Source s);
QubitId alice_qubit(Source s);
QubitId bob_qubit(Source s);

/// Convenience wrapper: Session(config, channels).run().
SessionResult run_session(const SessionConfig &config, const ChannelSet &channels);

}  // namespace bqml
