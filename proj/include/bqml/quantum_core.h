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
#include <complex>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bqml/rng.h"

namespace bqml {

using Amplitude = std::complex<double>;

/// Single-qubit ket (amplitude on |H>, amplitude on |V>).
using Ket2 = std::array<Amplitude, 2>;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Label of one qubit (one spatial mode) inside a joint state.
struct QubitId {
    std::string label;

    QubitId() = default;
    explicit QubitId(std::string l) : label(std::move(l)) {}
    explicit QubitId(const char *l) : label(l) {}

    auto operator<=>(const QubitId &) const = default;
};

enum class MeasBasis { Computational, Diagonal };

enum class Outcome { H, V, Plus, Minus };

MeasBasis basis_of(Outcome o);
/// The two outcomes of a basis, first one being H or Plus.
std::array<Outcome, 2> outcomes_of(MeasBasis b);
Ket2 eigenstate(Outcome o);
/// Orthogonal complement of a normalized ket, (-conj(b), conj(a)).
Ket2 orthogonal(const Ket2 &k);

std::string_view to_string(MeasBasis b);
std::string_view to_string(Outcome o);

/// Normalized amplitude array over an ordered list of labeled qubits.
///
/// Basis ordering: |H> is bit 0, |V> is bit 1, and the first listed qubit
/// is the most significant bit of the amplitude index.
class StateVector {
   public:
    /// Validates distinct labels, length 2^n, finite entries and unit norm.
    StateVector(std::vector<QubitId> qubits, std::vector<Amplitude> amplitudes);

    /// Product of single-qubit kets, one per label.
    static StateVector product(std::vector<QubitId> qubits, std::span<const Ket2> kets);
    static StateVector single(QubitId q, const Ket2 &ket);

    size_t num_qubits() const { return qubits_.size(); }
    size_t dimension() const { return amplitudes_.size(); }
    const std::vector<QubitId> &qubits() const { return qubits_; }
    const std::vector<Amplitude> &amplitudes() const { return amplitudes_; }
    const Amplitude &operator[](size_t i) const { return amplitudes_[i]; }

    bool contains(const QubitId &q) const;
    /// Position of q in the qubit list; throws std::invalid_argument if absent.
    size_t position(const QubitId &q) const;
    /// Bit mask selecting q inside an amplitude index.
    size_t mask(const QubitId &q) const;

    double norm_squared() const;

   private:
    // Gate kernels in quantum_core.cc mutate amplitudes in place.
    friend struct StateAccess;

    std::vector<QubitId> qubits_;
    std::vector<Amplitude> amplitudes_;
};

/// 2x2 unitary; unitarity is checked at construction.
class Unitary2 {
   public:
    Unitary2(Amplitude m00, Amplitude m01, Amplitude m10, Amplitude m11);

    static Unitary2 identity();
    /// Half-wave plate: |H> -> |+>, |V> -> |->.
    static Unitary2 hwp();
    static Unitary2 pauli_x();
    static Unitary2 pauli_y();
    static Unitary2 pauli_z();

    const Amplitude &at(size_t row, size_t col) const { return m_[2 * row + col]; }
    Ket2 apply(const Ket2 &k) const;
    Unitary2 dagger() const;
    /// Matrix product; (a * b) applies b first.
    friend Unitary2 operator*(const Unitary2 &a, const Unitary2 &b);

   private:
    std::array<Amplitude, 4> m_;
};

/// |H> -> alpha|H> + beta|V>, |V> -> beta|H> - alpha|V>, for real alpha, beta.
Unitary2 rotation(double alpha, double beta);

StateVector bell_phi_plus(const QubitId &a, const QubitId &b);

/// Kronecker product; the result lists a's qubits then b's.
StateVector tensor(const StateVector &a, const StateVector &b);

StateVector apply_single_qubit(StateVector state, const QubitId &q, const Unitary2 &u);

/// Controlled swap of two equal-length registers: when the control bit is V,
/// reg_a[i] and reg_b[i] exchange values for every i.
StateVector apply_fredkin(StateVector state, const QubitId &control, std::span<const QubitId> reg_a,
                          std::span<const QubitId> reg_b);

/// Deterministic projection of q onto the ket e. `state` is empty when the
/// branch has zero probability.
struct Projection {
    double probability;
    std::optional<StateVector> state;
};
Projection project(const StateVector &state, const QubitId &q, const Ket2 &e);

/// Born probability that measuring q in basis(o) yields o.
double outcome_probability(const StateVector &state, const QubitId &q, Outcome o);

struct Measurement {
    Outcome outcome;
    StateVector state;
};
/// Projective measurement with Born sampling. The qubit stays in the register,
/// collapsed onto the outcome eigenstate.
Measurement measure(const StateVector &state, const QubitId &q, MeasBasis basis, Rng &rng);

/// Measurement in an arbitrary orthonormal single-qubit basis {e0, e1}.
struct BasisMeasurement {
    int index;
    StateVector state;
};
BasisMeasurement measure_in(const StateVector &state, const QubitId &q, const Ket2 &e0, const Ket2 &e1, Rng &rng);

/// <a|b>, conjugating a. Registers must carry the same labels in the same order.
Amplitude inner_product(const StateVector &a, const StateVector &b);

/// |<a|b>|^2; equality up to global phase is fidelity 1.
double fidelity(const StateVector &a, const StateVector &b);

/// Squared Schmidt coefficients across the {q} | {rest} cut, descending.
std::array<double, 2> schmidt_coefficients(const StateVector &state, const QubitId &q);

/// Drops q from the register. q must be in a product state with the rest
/// (second Schmidt coefficient below tolerance).
StateVector remove_qubit(const StateVector &state, const QubitId &q);

/// Reduced ket of q when q is in a product state with the rest.
Ket2 factor_of(const StateVector &state, const QubitId &q);

}  // namespace bqml
