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
#include <cstdint>
#include <random>

namespace bqml {

/// splitmix64 finalizer; used to decorrelate derived seeds.
uint64_t splitmix64(uint64_t x);

/// Seeded random stream with platform-independent conversions.
///
/// The engine output of std::mt19937_64 is fixed by the standard, but the
/// std::*_distribution adaptors are not, so every derived quantity is
/// computed here by hand. Two streams built from the same seed produce the
/// same sequence on every conforming toolchain.
class Rng {
   public:
    explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

    uint64_t seed() const { return seed_; }
    uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    size_t below(size_t n);

    /// Independent child stream. The same (seed, stream id) always yields the
    /// same child regardless of how much of this stream was consumed.
    Rng fork(uint64_t stream_id) const { return Rng(splitmix64(seed_ ^ splitmix64(stream_id + 1))); }

   private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace bqml
