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

#include "bqml/estimator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/normal.hpp>

namespace bqml {

std::string_view to_string(Assignment a) {
    switch (a) {
        case Assignment::A:
            return "A";
        case Assignment::B:
            return "B";
        case Assignment::Tie:
            return "Tie";
    }
    return "?";
}

std::pair<double, double> score_interval(size_t successes, size_t n, double level) {
    if (n == 0 || successes > n) {
        throw std::invalid_argument("score_interval: need 0 <= successes <= n and n >= 1");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("score_interval: level must lie in (0, 1)");
    }
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    double low = successes == 0 ? 0.0 : center - half;
    double high = successes == n ? 1.0 : center + half;
    return {std::clamp(std::min(low, p), 0.0, 1.0), std::clamp(std::max(high, p), 0.0, 1.0)};
}

OverlapEstimate estimate_flip_probability(std::span<const TrialOutcome> trials, Reference reference, double level) {
    size_t flips = 0, same = 0;
    for (const auto &t : trials) {
        if (t.reference != reference) {
            continue;
        }
        if (t.kind == TrialKind::Flip) {
            flips++;
        } else if (t.kind == TrialKind::Same) {
            same++;
        }
    }
    const size_t n = flips + same;
    if (n == 0) {
        throw InsufficientDataError("no Diagonal-control trials for reference " + std::string(to_string(reference)));
    }
    OverlapEstimate e;
    e.n_diag = n;
    e.n_flip = flips;
    e.p_minus_hat = static_cast<double>(flips) / static_cast<double>(n);
    e.overlap_mag = std::sqrt(std::max(0.0, 1.0 - 2.0 * e.p_minus_hat));
    e.ci_level = level;
    std::tie(e.ci_low, e.ci_high) = score_interval(flips, n, level);
    return e;
}

DistanceEstimate distance(double mag_u, double mag_v, double overlap_mag) {
    if (!(mag_u >= 0.0) || !(mag_v >= 0.0) || !std::isfinite(mag_u) || !std::isfinite(mag_v)) {
        throw std::invalid_argument("distance: magnitudes must be finite and nonnegative");
    }
    if (!(overlap_mag >= 0.0 && overlap_mag <= 1.0)) {
        throw std::invalid_argument("distance: overlap magnitude must lie in [0, 1]");
    }
    const double radicand = mag_u * mag_u + mag_v * mag_v - 2.0 * mag_u * mag_v * overlap_mag;
    DistanceEstimate d{.mag_u = mag_u, .mag_v = mag_v, .overlap_mag = overlap_mag};
    d.clamped = radicand < 0.0;
    d.d = std::sqrt(std::max(0.0, radicand));
    return d;
}

ClusterAssignment assign_cluster(const DistanceEstimate &d_a, const DistanceEstimate &d_b, double tie_epsilon) {
    ClusterAssignment c{.d_a = d_a, .d_b = d_b, .margin = std::abs(d_a.d - d_b.d)};
    if (c.margin <= tie_epsilon) {
        c.chosen = Assignment::Tie;
    } else {
        c.chosen = d_a.d < d_b.d ? Assignment::A : Assignment::B;
    }
    return c;
}

}  // namespace bqml
