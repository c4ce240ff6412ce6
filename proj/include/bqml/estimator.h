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

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>

#include "bqml/protocol_types.h"

namespace bqml {

class InsufficientDataError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct OverlapEstimate {
    double p_minus_hat = 0;  // flip frequency among Diagonal-control trials
    size_t n_diag = 0;
    size_t n_flip = 0;
    double overlap_mag = 0;  // sqrt(max(0, 1 - 2 p_minus_hat))
    double ci_level = 0;
    double ci_low = 0;
    double ci_high = 0;
};

struct DistanceEstimate {
    double d = 0;
    double mag_u = 0;
    double mag_v = 0;
    double overlap_mag = 0;
    /// Set when sampling noise drove the radicand negative and it was clamped.
    bool clamped = false;
};

enum class Assignment { A, B, Tie };

std::string_view to_string(Assignment a);

struct ClusterAssignment {
    Assignment chosen = Assignment::Tie;
    DistanceEstimate d_a;
    DistanceEstimate d_b;
    double margin = 0;
};

inline constexpr double kDefaultTieEpsilon = 1e-9;

/// Wilson score interval for a binomial proportion.
std::pair<double, double> score_interval(size_t successes, size_t n, double level);

/// Flip frequency and overlap magnitude for one reference. Throws
/// InsufficientDataError when the reference has no Diagonal-control trials.
OverlapEstimate estimate_flip_probability(std::span<const TrialOutcome> trials, Reference reference, double level);

/// sqrt(|u|^2 + |v|^2 - 2|u||v| overlap), clamping a negative radicand to 0.
DistanceEstimate distance(double mag_u, double mag_v, double overlap_mag);

ClusterAssignment assign_cluster(const DistanceEstimate &d_a, const DistanceEstimate &d_b,
                                 double tie_epsilon = kDefaultTieEpsilon);

}  // namespace bqml
