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

#include "bqml/protocol_types.h"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace bqml {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view to_string(Source s) {
    switch (s) {
        case Source::S1:
            return "S1";
        case Source::S2:
            return "S2";
        case Source::S3:
            return "S3";
    }
    return "?";
}

std::string_view to_string(Reference r) { return r == Reference::A ? "A" : "B"; }

std::string_view to_string(Party p) { return p == Party::Alice ? "alice" : "bob"; }

std::string_view to_string(TrialKind k) {
    switch (k) {
        case TrialKind::SecurityPass:
            return "security_pass";
        case TrialKind::SecurityFail:
            return "security_fail";
        case TrialKind::Same:
            return "same";
        case TrialKind::Flip:
            return "flip";
    }
    return "?";
}

void PolarizationVector::validate(std::string_view what) const {
    const std::string w(what);
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument(w + ": alpha and beta must be finite");
    }
    if (std::abs(alpha * alpha + beta * beta - 1.0) > kNormTolerance) {
        throw std::invalid_argument(w + ": alpha^2 + beta^2 must equal 1 (got " +
                                    std::to_string(alpha * alpha + beta * beta) + ")");
    }
    if (!std::isfinite(magnitude) || magnitude < 0.0) {
        throw std::invalid_argument(w + ": magnitude must be finite and nonnegative");
    }
}

std::string to_json_line(const ProtocolMessage &m) {
    nlohmann::ordered_json j;
    j["seq"] = m.seq;
    j["from"] = to_string(m.from);
    std::visit(overloaded{
                   [&](const msg::BasisAnnouncement &b) {
                       j["type"] = "basis_announcement";
                       j["source"] = to_string(b.source);
                       j["index"] = b.index;
                       j["basis"] = to_string(b.basis);
                   },
                   [&](const msg::ResultAnnouncement &r) {
                       j["type"] = "result_announcement";
                       j["source"] = to_string(r.source);
                       j["index"] = r.index;
                       j["outcome"] = to_string(r.outcome);
                   },
                   [&](const msg::CorrectionRequest &c) {
                       j["type"] = "correction_request";
                       j["source"] = to_string(c.source);
                       j["index"] = c.index;
                       j["apply_x"] = c.apply_x;
                       j["apply_z"] = c.apply_z;
                   },
                   [&](const msg::FredkinRequest &f) {
                       j["type"] = "fredkin_request";
                       j["control_index"] = f.control_index;
                       j["target_indices"] = f.target_indices;
                   },
                   [&](const msg::ReturnRequest &r) {
                       j["type"] = "return_request";
                       j["indices"] = r.indices;
                   },
                   [&](const msg::AbortNotice &a) {
                       j["type"] = "abort_notice";
                       j["reason"] = a.reason;
                   },
               },
               m.body);
    return j.dump();
}

uint64_t fnv1a64(std::string_view data, uint64_t h) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t transcript_hash(const std::vector<ProtocolMessage> &transcript) {
    uint64_t h = fnv1a64("");
    for (const auto &m : transcript) {
        h = fnv1a64(to_json_line(m), h);
        h = fnv1a64("\n", h);
    }
    return h;
}

}  // namespace bqml
