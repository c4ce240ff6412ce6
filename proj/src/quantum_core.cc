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

#include "bqml/quantum_core.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace bqml {

struct StateAccess {
    static std::vector<Amplitude> &amps(StateVector &s) { return s.amplitudes_; }

    static StateVector make(std::vector<QubitId> qubits, std::vector<Amplitude> amps) {
        StateVector s = StateVector::single(QubitId("_"), Ket2{1.0, 0.0});
        s.qubits_ = std::move(qubits);
        s.amplitudes_ = std::move(amps);
        return s;
    }

    // Unitary kernels must not drift; a violation here is a bug, not bad input.
    static void check_norm(const StateVector &s, const char *op) {
        if (std::abs(s.norm_squared() - 1.0) > kNormTolerance) {
            throw std::logic_error(std::string(op) + ": norm drifted beyond tolerance");
        }
    }
};

namespace {

bool finite(const Amplitude &a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

std::vector<Amplitude> normalize(std::vector<Amplitude> amps) {
    double n = 0;
    for (const auto &a : amps) {
        n += std::norm(a);
    }
    const double s = 1.0 / std::sqrt(n);
    for (auto &a : amps) {
        a *= s;
    }
    return amps;
}

}  // namespace

MeasBasis basis_of(Outcome o) {
    return (o == Outcome::H || o == Outcome::V) ? MeasBasis::Computational : MeasBasis::Diagonal;
}

std::array<Outcome, 2> outcomes_of(MeasBasis b) {
    if (b == MeasBasis::Computational) {
        return {Outcome::H, Outcome::V};
    }
    return {Outcome::Plus, Outcome::Minus};
}

Ket2 eigenstate(Outcome o) {
    switch (o) {
        case Outcome::H:
            return {1.0, 0.0};
        case Outcome::V:
            return {0.0, 1.0};
        case Outcome::Plus:
            return {kInvSqrt2, kInvSqrt2};
        case Outcome::Minus:
            return {kInvSqrt2, -kInvSqrt2};
    }
    throw std::invalid_argument("eigenstate: bad outcome");
}

Ket2 orthogonal(const Ket2 &k) { return {-std::conj(k[1]), std::conj(k[0])}; }

std::string_view to_string(MeasBasis b) { return b == MeasBasis::Computational ? "computational" : "diagonal"; }

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::H:
            return "H";
        case Outcome::V:
            return "V";
        case Outcome::Plus:
            return "plus";
        case Outcome::Minus:
            return "minus";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::vector<QubitId> qubits, std::vector<Amplitude> amplitudes)
    : qubits_(std::move(qubits)), amplitudes_(std::move(amplitudes)) {
    if (qubits_.empty()) {
        throw std::invalid_argument("StateVector: at least one qubit required");
    }
    if (qubits_.size() >= 8 * sizeof(size_t) - 1) {
        throw std::invalid_argument("StateVector: too many qubits");
    }
    std::set<QubitId> seen(qubits_.begin(), qubits_.end());
    if (seen.size() != qubits_.size()) {
        throw std::invalid_argument("StateVector: duplicate qubit label");
    }
    if (amplitudes_.size() != (size_t{1} << qubits_.size())) {
        throw std::invalid_argument("StateVector: amplitude count must be 2^n");
    }
    if (!std::all_of(amplitudes_.begin(), amplitudes_.end(), finite)) {
        throw std::invalid_argument("StateVector: non-finite amplitude");
    }
    if (std::abs(norm_squared() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("StateVector: amplitudes are not normalized");
    }
}

StateVector StateVector::product(std::vector<QubitId> qubits, std::span<const Ket2> kets) {
    if (qubits.size() != kets.size() || qubits.empty()) {
        throw std::invalid_argument("StateVector::product: one ket per qubit required");
    }
    std::vector<Amplitude> amps{1.0};
    for (const auto &k : kets) {
        std::vector<Amplitude> next(amps.size() * 2);
        for (size_t i = 0; i < amps.size(); i++) {
            next[2 * i] = amps[i] * k[0];
            next[2 * i + 1] = amps[i] * k[1];
        }
        amps = std::move(next);
    }
    return StateVector(std::move(qubits), std::move(amps));
}

StateVector StateVector::single(QubitId q, const Ket2 &ket) {
    std::vector<QubitId> qs{std::move(q)};
    return product(std::move(qs), std::span<const Ket2>(&ket, 1));
}

bool StateVector::contains(const QubitId &q) const {
    return std::find(qubits_.begin(), qubits_.end(), q) != qubits_.end();
}

size_t StateVector::position(const QubitId &q) const {
    auto it = std::find(qubits_.begin(), qubits_.end(), q);
    if (it == qubits_.end()) {
        throw std::invalid_argument("unknown qubit label '" + q.label + "'");
    }
    return static_cast<size_t>(it - qubits_.begin());
}

size_t StateVector::mask(const QubitId &q) const { return size_t{1} << (qubits_.size() - 1 - position(q)); }

double StateVector::norm_squared() const {
    double n = 0;
    for (const auto &a : amplitudes_) {
        n += std::norm(a);
    }
    return n;
}

// ---------------------------------------------------------------------------
// Unitary2

Unitary2::Unitary2(Amplitude m00, Amplitude m01, Amplitude m10, Amplitude m11) : m_{m00, m01, m10, m11} {
    for (const auto &a : m_) {
        if (!finite(a)) {
            throw std::invalid_argument("Unitary2: non-finite entry");
        }
    }
    // (U^dagger U)_{ij} = sum_k conj(U_ki) U_kj
    double worst = 0;
    for (size_t i = 0; i < 2; i++) {
        for (size_t j = 0; j < 2; j++) {
            Amplitude s = std::conj(at(0, i)) * at(0, j) + std::conj(at(1, i)) * at(1, j);
            worst = std::max(worst, std::abs(s - Amplitude(i == j ? 1.0 : 0.0)));
        }
    }
    if (worst > kNormTolerance) {
        throw std::invalid_argument("Unitary2: matrix is not unitary");
    }
}

Unitary2 Unitary2::identity() { return {1.0, 0.0, 0.0, 1.0}; }
Unitary2 Unitary2::hwp() { return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2}; }
Unitary2 Unitary2::pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
Unitary2 Unitary2::pauli_y() { return {0.0, Amplitude(0, -1), Amplitude(0, 1), 0.0}; }
Unitary2 Unitary2::pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

Ket2 Unitary2::apply(const Ket2 &k) const {
    return {at(0, 0) * k[0] + at(0, 1) * k[1], at(1, 0) * k[0] + at(1, 1) * k[1]};
}

Unitary2 Unitary2::dagger() const {
    return {std::conj(at(0, 0)), std::conj(at(1, 0)), std::conj(at(0, 1)), std::conj(at(1, 1))};
}

Unitary2 operator*(const Unitary2 &a, const Unitary2 &b) {
    auto e = [&](size_t r, size_t c) { return a.at(r, 0) * b.at(0, c) + a.at(r, 1) * b.at(1, c); };
    return {e(0, 0), e(0, 1), e(1, 0), e(1, 1)};
}

Unitary2 rotation(double alpha, double beta) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || std::abs(alpha * alpha + beta * beta - 1.0) > kNormTolerance) {
        throw std::invalid_argument("rotation: alpha^2 + beta^2 must equal 1");
    }
    // Columns are the images of |H> and |V>.
    return {alpha, beta, beta, -alpha};
}

// ---------------------------------------------------------------------------
// Operations

StateVector bell_phi_plus(const QubitId &a, const QubitId &b) {
    if (a == b) {
        throw std::invalid_argument("bell_phi_plus: qubit labels must differ");
    }
    return StateVector({a, b}, {kInvSqrt2, 0.0, 0.0, kInvSqrt2});
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    std::vector<QubitId> qubits = a.qubits();
    for (const auto &q : b.qubits()) {
        if (a.contains(q)) {
            throw std::invalid_argument("tensor: qubit label '" + q.label + "' appears in both states");
        }
        qubits.push_back(q);
    }
    std::vector<Amplitude> amps(a.dimension() * b.dimension());
    for (size_t i = 0; i < a.dimension(); i++) {
        for (size_t j = 0; j < b.dimension(); j++) {
            amps[i * b.dimension() + j] = a[i] * b[j];
        }
    }
    return StateVector(std::move(qubits), std::move(amps));
}

StateVector apply_single_qubit(StateVector state, const QubitId &q, const Unitary2 &u) {
    const size_t m = state.mask(q);
    auto &amps = StateAccess::amps(state);
    for (size_t i = 0; i < amps.size(); i++) {
        if (i & m) {
            continue;
        }
        const Amplitude a0 = amps[i];
        const Amplitude a1 = amps[i | m];
        amps[i] = u.at(0, 0) * a0 + u.at(0, 1) * a1;
        amps[i | m] = u.at(1, 0) * a0 + u.at(1, 1) * a1;
    }
    StateAccess::check_norm(state, "apply_single_qubit");
    return state;
}

StateVector apply_fredkin(StateVector state, const QubitId &control, std::span<const QubitId> reg_a,
                          std::span<const QubitId> reg_b) {
    if (reg_a.empty() || reg_a.size() != reg_b.size()) {
        throw std::invalid_argument("apply_fredkin: registers must have equal nonzero length");
    }
    std::set<QubitId> distinct{control};
    distinct.insert(reg_a.begin(), reg_a.end());
    distinct.insert(reg_b.begin(), reg_b.end());
    if (distinct.size() != 1 + 2 * reg_a.size()) {
        throw std::invalid_argument("apply_fredkin: control and register qubits must be distinct");
    }
    const size_t cm = state.mask(control);
    std::vector<std::pair<size_t, size_t>> masks;
    for (size_t k = 0; k < reg_a.size(); k++) {
        masks.emplace_back(state.mask(reg_a[k]), state.mask(reg_b[k]));
    }
    auto &amps = StateAccess::amps(state);
    for (size_t i = 0; i < amps.size(); i++) {
        if (!(i & cm)) {
            continue;
        }
        size_t j = i;
        for (const auto &[ma, mb] : masks) {
            const bool ba = j & ma;
            const bool bb = j & mb;
            if (ba != bb) {
                j ^= ma | mb;
            }
        }
        // Visit each transposition once.
        if (j > i) {
            std::swap(amps[i], amps[j]);
        }
    }
    StateAccess::check_norm(state, "apply_fredkin");
    return state;
}

Projection project(const StateVector &state, const QubitId &q, const Ket2 &e) {
    const size_t m = state.mask(q);
    const auto &src = state.amplitudes();
    std::vector<Amplitude> amps(src.size());
    double p = 0;
    for (size_t i = 0; i < src.size(); i++) {
        if (i & m) {
            continue;
        }
        const Amplitude c = std::conj(e[0]) * src[i] + std::conj(e[1]) * src[i | m];
        amps[i] = e[0] * c;
        amps[i | m] = e[1] * c;
        p += std::norm(c);
    }
    p = std::clamp(p, 0.0, 1.0);
    if (p <= 0.0) {
        return {0.0, std::nullopt};
    }
    return {p, StateVector(state.qubits(), normalize(std::move(amps)))};
}

double outcome_probability(const StateVector &state, const QubitId &q, Outcome o) {
    const Ket2 e = eigenstate(o);
    const size_t m = state.mask(q);
    double p = 0;
    for (size_t i = 0; i < state.dimension(); i++) {
        if (!(i & m)) {
            p += std::norm(std::conj(e[0]) * state[i] + std::conj(e[1]) * state[i | m]);
        }
    }
    return std::clamp(p, 0.0, 1.0);
}

BasisMeasurement measure_in(const StateVector &state, const QubitId &q, const Ket2 &e0, const Ket2 &e1, Rng &rng) {
    Projection first = project(state, q, e0);
    if (first.state && rng.uniform() < first.probability) {
        return {0, std::move(*first.state)};
    }
    Projection second = project(state, q, e1);
    if (!second.state) {
        // Only reachable when the first branch carried all the weight and the
        // draw landed in the rounding gap above it.
        return {0, std::move(*first.state)};
    }
    return {1, std::move(*second.state)};
}

Measurement measure(const StateVector &state, const QubitId &q, MeasBasis basis, Rng &rng) {
    const auto outcomes = outcomes_of(basis);
    auto r = measure_in(state, q, eigenstate(outcomes[0]), eigenstate(outcomes[1]), rng);
    return {outcomes[static_cast<size_t>(r.index)], std::move(r.state)};
}

Amplitude inner_product(const StateVector &a, const StateVector &b) {
    if (a.qubits() != b.qubits()) {
        throw std::invalid_argument("inner_product: registers differ");
    }
    Amplitude s = 0;
    for (size_t i = 0; i < a.dimension(); i++) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

double fidelity(const StateVector &a, const StateVector &b) { return std::norm(inner_product(a, b)); }

std::array<double, 2> schmidt_coefficients(const StateVector &state, const QubitId &q) {
    // Gram matrix of the 2 x 2^(n-1) reshaping; its eigenvalues are the
    // squared singular values.
    const size_t m = state.mask(q);
    double g00 = 0, g11 = 0;
    Amplitude g01 = 0;
    for (size_t i = 0; i < state.dimension(); i++) {
        if (i & m) {
            continue;
        }
        g00 += std::norm(state[i]);
        g11 += std::norm(state[i | m]);
        g01 += state[i] * std::conj(state[i | m]);
    }
    const double mean = (g00 + g11) / 2;
    const double rad = std::sqrt((g00 - g11) * (g00 - g11) / 4 + std::norm(g01));
    return {mean + rad, std::max(0.0, mean - rad)};
}

Ket2 factor_of(const StateVector &state, const QubitId &q) {
    if (schmidt_coefficients(state, q)[1] > kNormTolerance) {
        throw std::invalid_argument("factor_of: qubit '" + q.label + "' is entangled with the register");
    }
    const size_t m = state.mask(q);
    size_t best = 0;
    double best_w = -1;
    for (size_t i = 0; i < state.dimension(); i++) {
        if (i & m) {
            continue;
        }
        const double w = std::norm(state[i]) + std::norm(state[i | m]);
        if (w > best_w) {
            best_w = w;
            best = i;
        }
    }
    const double s = 1.0 / std::sqrt(best_w);
    return {state[best] * s, state[best | m] * s};
}

StateVector remove_qubit(const StateVector &state, const QubitId &q) {
    const Ket2 k = factor_of(state, q);
    if (state.num_qubits() == 1) {
        throw std::invalid_argument("remove_qubit: cannot empty the register");
    }
    const size_t pos = state.position(q);
    const size_t m = state.mask(q);
    std::vector<QubitId> qubits = state.qubits();
    qubits.erase(qubits.begin() + static_cast<std::ptrdiff_t>(pos));
    // Rest = <k|_q psi.
    std::vector<Amplitude> amps;
    amps.reserve(state.dimension() / 2);
    const size_t low = m - 1;
    for (size_t r = 0; r < state.dimension() / 2; r++) {
        const size_t i = ((r & ~low) << 1) | (r & low);
        amps.push_back(std::conj(k[0]) * state[i] + std::conj(k[1]) * state[i | m]);
    }
    return StateVector(std::move(qubits), normalize(std::move(amps)));
}

}  // namespace bqml
