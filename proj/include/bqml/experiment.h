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
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bqml/adversary_channel.h"
#include "bqml/protocol.h"

namespace bqml {

/// Malformed config text; carries the 1-based line and the offending key.
class ParseError : public std::runtime_error {
   public:
    ParseError(size_t line, std::string key, const std::string &message);
    size_t line() const { return line_; }
    const std::string &key() const { return key_; }

   private:
    size_t line_;
    std::string key_;
};

class IoError : public std::runtime_error {
   public:
    IoError(const std::filesystem::path &path, const std::string &message);
    const std::filesystem::path &path() const { return path_; }

   private:
    std::filesystem::path path_;
};

struct ExperimentConfig {
    SessionConfig session;
    ChannelSet channels;
    size_t repetitions = 1;
    std::filesystem::path output_dir = "bqml-out";
    bool emit_transcript = false;
    /// Worker threads for repetitions; results are folded in repetition order.
    size_t threads = 1;

    void validate() const;
    /// Canonical text of every field that affects results.
    std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical().
    std::string hash() const;
};

/// Parses `key = value` config text. Throws ParseError for syntax problems
/// and unknown keys, ConfigError listing every semantic violation.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path &path);

struct RepetitionSummary {
    size_t repetition = 0;
    uint64_t seed = 0;
    SessionResult result;
};

struct ReferenceAggregate {
    size_t n = 0;
    double p_minus_hat_mean = 0;
    double p_minus_hat_std = 0;
    double overlap_mag_mean = 0;
    double distance_mean = 0;
    double ci_level = 0;
    double ci_low_mean = 0;
    double ci_high_mean = 0;
};

struct ChannelSecurity {
    size_t checked = 0;
    size_t mismatches = 0;
    size_t security_fail_count = 0;
};

struct RunReport {
    std::string config_hash;
    size_t repetitions = 0;
    size_t aborted_count = 0;
    std::array<ReferenceAggregate, 2> per_reference{};
    std::array<size_t, 3> assignment_histogram{};  // A, B, Tie
    std::array<ChannelSecurity, 4> security{};
    double wall_clock_s = 0;
    std::vector<RepetitionSummary> runs;
};

/// Runs `repetitions` sessions, repetition i seeded with seed + i, and
/// aggregates them. Individual aborts are recorded, not fatal.
RunReport run_experiment(const ExperimentConfig &config);

/// summary.json text (two-space indent, fixed key order, trailing newline).
std::string summary_json(const RunReport &report);
/// Throws std::invalid_argument if `text` does not follow the summary schema.
void validate_summary_schema(std::string_view text);
std::string trials_csv(const RunReport &report);
std::string transcript_jsonl(const RunReport &report);

/// Writes summary.json, trials.csv and, when requested, transcript.jsonl.
std::vector<std::filesystem::path> emit_report(const RunReport &report, const std::filesystem::path &dir,
                                               bool emit_transcript);

}  // namespace bqml
