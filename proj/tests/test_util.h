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

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "bqml/quantum_core.h"
#include "bqml/rng.h"

namespace bqml::testing {

inline double gaussian(Rng &rng) {
    // Box-Muller; uniform() is in [0, 1), so shift away from log(0).
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Haar-ish random state over the given labels.
inline StateVector random_state(const std::vector<std::string> &labels, Rng &rng) {
    std::vector<QubitId> qs;
    for (const auto &l : labels) {
        qs.emplace_back(l);
    }
    std::vector<Amplitude> amps(size_t{1} << labels.size());
    double n = 0;
    for (auto &a : amps) {
        a = {gaussian(rng), gaussian(rng)};
        n += std::norm(a);
    }
    for (auto &a : amps) {
        a /= std::sqrt(n);
    }
    return StateVector(std::move(qs), std::move(amps));
}

inline Unitary2 random_unitary(Rng &rng) {
    // Columns from a random ket and its orthogonal complement, times a phase.
    Amplitude a{gaussian(rng), gaussian(rng)}, b{gaussian(rng), gaussian(rng)};
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    const Amplitude phase = std::polar(1.0, 2.0 * M_PI * rng.uniform());
    return Unitary2(a, -std::conj(b) * phase, b, std::conj(a) * phase);
}

/// Random real unit 2-vector (alpha, beta).
inline std::pair<double, double> random_real_direction(Rng &rng) {
    const double theta = 2.0 * M_PI * rng.uniform();
    return {std::cos(theta), std::sin(theta)};
}

}  // namespace bqml::testing
