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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bqml/quantum_core.h"

namespace bqml {

/// Entanglement sources; S1 feeds the control, S2 and S3 the two targets.
enum class Source { S1, S2, S3 };

inline constexpr std::array<Source, 3> kAllSources = {Source::S1, Source::S2, Source::S3};

std::string_view to_string(Source s);

enum class Reference { A, B };

std::string_view to_string(Reference r);

enum class Party { Alice, Bob };

std::string_view to_string(Party p);

/// Classical description of a vector: direction (alpha, beta) and length.
struct PolarizationVector {
    double alpha = 1.0;
    double beta = 0.0;
    double magnitude = 1.0;

    /// Throws std::invalid_argument naming `what` on violation.
    void validate(std::string_view what) const;
    Ket2 ket() const { return {alpha, beta}; }
};

enum class TrialKind { SecurityPass, SecurityFail, Same, Flip };

std::string_view to_string(TrialKind k);

struct TrialOutcome {
    size_t pair_index = 0;
    TrialKind kind = TrialKind::Same;
    Reference reference = Reference::A;

    bool operator==(const TrialOutcome &) const = default;
};

/// Alice's private knowledge of one control qubit.
struct ControlRecord {
    size_t pair_index = 0;
    Outcome prepared_outcome = Outcome::H;
    MeasBasis basis = MeasBasis::Computational;
};

struct PrepRecord {
    Source source = Source::S2;
    size_t pair_index = 0;
    Outcome alice_outcome = Outcome::H;
    bool correction_requested = false;
};

namespace msg {
struct BasisAnnouncement {
    Source source;
    size_t index;
    MeasBasis basis;
};
struct ResultAnnouncement {
    Source source;
    size_t index;
    Outcome outcome;
};
struct CorrectionRequest {
    Source source;
    size_t index;
    bool apply_x;
    bool apply_z;
};
struct FredkinRequest {
    size_t control_index;
    std::array<size_t, 2> target_indices;
};
struct ReturnRequest {
    std::vector<size_t> indices;
};
struct AbortNotice {
    std::string reason;
};
}  // namespace msg

using MessageBody = std::variant<msg::BasisAnnouncement, msg::ResultAnnouncement, msg::CorrectionRequest,
                                 msg::FredkinRequest, msg::ReturnRequest, msg::AbortNotice>;

struct ProtocolMessage {
    uint64_t seq = 0;
    Party from = Party::Alice;
    MessageBody body;
};

/// One JSON object per message, keys in fixed order.
std::string to_json_line(const ProtocolMessage &m);

uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL);

/// Hash over the serialized transcript; equal transcripts hash equal.
uint64_t transcript_hash(const std::vector<ProtocolMessage> &transcript);

}  // namespace bqml
