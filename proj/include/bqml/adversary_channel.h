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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bqml/quantum_core.h"
#include "bqml/rng.h"

namespace bqml {

enum class ChannelName { C_a1b1, C_a2b2, C_a3b3, C_a4b4 };

inline constexpr std::array<ChannelName, 4> kAllChannels = {ChannelName::C_a1b1, ChannelName::C_a2b2,
                                                            ChannelName::C_a3b3, ChannelName::C_a4b4};

std::string_view to_string(ChannelName c);
std::optional<ChannelName> parse_channel_name(std::string_view s);

enum class BasisPolicy { RandomUniform, FixedComputational, FixedDiagonal };

std::string_view to_string(BasisPolicy p);

struct NoAttack {};
struct InterceptResend {
    BasisPolicy basis_policy = BasisPolicy::RandomUniform;
};
struct FakePhoton {
    Outcome replacement = Outcome::H;
};
struct Depolarize {
    double p = 0.0;
};

using AttackStrategy = std::variant<NoAttack, InterceptResend, FakePhoton, Depolarize>;

std::string describe(const AttackStrategy &a);

struct ChannelModel {
    ChannelName name = ChannelName::C_a1b1;
    AttackStrategy attack = NoAttack{};
    double loss_p = 0.0;

    /// Throws std::invalid_argument on out-of-range probabilities.
    void validate() const;
};

/// The four channels of one session, indexed by ChannelName.
class ChannelSet {
   public:
    ChannelSet();

    ChannelModel &operator[](ChannelName c) { return channels_[static_cast<size_t>(c)]; }
    const ChannelModel &operator[](ChannelName c) const { return channels_[static_cast<size_t>(c)]; }

    void set_attack(ChannelName c, AttackStrategy a) { (*this)[c].attack = a; }
    void set_loss(ChannelName c, double p) { (*this)[c].loss_p = p; }
    void validate() const;

   private:
    std::array<ChannelModel, 4> channels_;
};

enum class Pauli { I, X, Y, Z };

std::string_view to_string(Pauli p);

/// Eve's private record of one transmission.
struct LogEntry {
    ChannelName channel = ChannelName::C_a1b1;
    size_t pair_index = 0;
    std::optional<MeasBasis> eve_basis;
    std::optional<Outcome> eve_outcome;
    bool replaced = false;
    std::optional<Pauli> pauli_applied;
    bool lost = false;
};

using InterceptionLog = std::vector<LogEntry>;

struct TransmitResult {
    StateVector state;
    /// Present only for attacked or lossy channels.
    std::optional<LogEntry> entry;

    bool lost() const { return entry && entry->lost; }
};

/// Sends qubit q of `state` through `channel`. The adversary acts first,
/// then the loss draw is made.
TransmitResult transmit(StateVector state, const QubitId &q, const ChannelModel &channel, size_t pair_index,
                        Rng &rng);

/// Exact per-pair mismatch probability of the Bell-pair checking procedure
/// under `attack`, by enumeration over Eve's basis, the check basis and all
/// outcomes with Born weights. Supports InterceptResend and FakePhoton only.
double detection_probability_oracle(const AttackStrategy &attack);

}  // namespace bqml
