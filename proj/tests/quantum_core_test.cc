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

#include <cmath>
#include <map>

#include "gtest/gtest.h"
#include "test_util.h"

using namespace bqml;
using bqml::testing::random_state;
using bqml::testing::random_unitary;

namespace {

const QubitId A("a"), B("b"), C("c");
constexpr double kEps = 1e-12;

void expect_amplitudes(const StateVector &s, const std::vector<Amplitude> &expected, double tol = kEps) {
    ASSERT_EQ(s.dimension(), expected.size());
    for (size_t i = 0; i < expected.size(); i++) {
        EXPECT_NEAR(std::abs(s[i] - expected[i]), 0.0, tol) << "index " << i;
    }
}

StateVector ket(const QubitId &q, Outcome o) { return StateVector::single(q, eigenstate(o)); }

}  // namespace

TEST(BellPhiPlus, Amplitudes) {
    const StateVector s = bell_phi_plus(A, B);
    expect_amplitudes(s, {0.7071067811865476, 0, 0, 0.7071067811865476});
    EXPECT_NEAR(std::abs(inner_product(s, s) - 1.0), 0.0, kEps);
    EXPECT_THROW(bell_phi_plus(A, A), std::invalid_argument);
}

TEST(BellPhiPlus, ComputationalSamplesAreCorrelated) {
    Rng rng(11);
    std::map<std::pair<Outcome, Outcome>, int> counts;
    const int shots = 20000;
    for (int i = 0; i < shots; i++) {
        auto ma = measure(bell_phi_plus(A, B), A, MeasBasis::Computational, rng);
        auto mb = measure(ma.state, B, MeasBasis::Computational, rng);
        counts[{ma.outcome, mb.outcome}]++;
    }
    EXPECT_EQ((counts[{Outcome::H, Outcome::V}]), 0);
    EXPECT_EQ((counts[{Outcome::V, Outcome::H}]), 0);
    // 1/2 +- 4 sigma, sigma = sqrt(0.25 / 20000).
    EXPECT_NEAR((counts[{Outcome::H, Outcome::H}]) / double(shots), 0.5, 0.0142);
}

TEST(Tensor, BasisAndNorm) {
    expect_amplitudes(tensor(ket(A, Outcome::H), ket(B, Outcome::H)), {1, 0, 0, 0});
    Rng rng(3);
    const StateVector t = tensor(random_state({"a", "b"}, rng), random_state({"c"}, rng));
    EXPECT_NEAR(t.norm_squared(), 1.0, 1e-12);
    EXPECT_EQ(t.qubits(), (std::vector<QubitId>{A, B, C}));
}

TEST(Tensor, BellWithHOnlyHhhAndVvh) {
    // Kronecker expansion by hand: (HH + VV)/sqrt2 x H = (HHH + VVH)/sqrt2,
    // indices 0b000 and 0b110.
    const StateVector t = tensor(bell_phi_plus(A, B), ket(C, Outcome::H));
    expect_amplitudes(t, {kInvSqrt2, 0, 0, 0, 0, 0, kInvSqrt2, 0});
}

TEST(Tensor, LabelCollision) {
    EXPECT_THROW(tensor(ket(A, Outcome::H), bell_phi_plus(A, B)), std::invalid_argument);
}

TEST(StateVector, RejectsBadInput) {
    EXPECT_THROW(StateVector({A, A}, {1, 0, 0, 0}), std::invalid_argument);
    EXPECT_THROW(StateVector({A}, {1, 0, 0}), std::invalid_argument);
    EXPECT_THROW(StateVector({A}, {1, 1}), std::invalid_argument);
    EXPECT_THROW(StateVector({A}, {NAN, 0}), std::invalid_argument);
}

TEST(ApplySingleQubit, Examples) {
    expect_amplitudes(apply_single_qubit(ket(A, Outcome::H), A, Unitary2::hwp()), {kInvSqrt2, kInvSqrt2});
    Rng rng(5);
    const StateVector s = random_state({"a", "b", "c"}, rng);
    expect_amplitudes(apply_single_qubit(s, B, Unitary2::identity()), s.amplitudes(), 0.0);
    expect_amplitudes(apply_single_qubit(ket(A, Outcome::H), A, rotation(0.6, 0.8)), {0.6, 0.8});
    EXPECT_THROW(apply_single_qubit(s, QubitId("zz"), Unitary2::hwp()), std::invalid_argument);
}

TEST(ApplySingleQubit, TargetsTheRightFactor) {
    // X on the middle qubit of |HHH> gives |HVH>, index 0b010.
    StateVector s = tensor(tensor(ket(A, Outcome::H), ket(B, Outcome::H)), ket(C, Outcome::H));
    s = apply_single_qubit(std::move(s), B, Unitary2::pauli_x());
    expect_amplitudes(s, {0, 0, 1, 0, 0, 0, 0, 0});
}

TEST(Rotation, MatrixLayout) {
    const Unitary2 id_like = rotation(1, 0);
    expect_amplitudes(apply_single_qubit(ket(A, Outcome::H), A, id_like), {1, 0});
    expect_amplitudes(apply_single_qubit(ket(A, Outcome::V), A, id_like), {0, -1});
    expect_amplitudes(apply_single_qubit(ket(A, Outcome::V), A, rotation(0.6, 0.8)), {0.8, -0.6});
    const Unitary2 r = rotation(kInvSqrt2, kInvSqrt2);
    const Unitary2 h = Unitary2::hwp();
    for (size_t i = 0; i < 2; i++) {
        for (size_t j = 0; j < 2; j++) {
            EXPECT_NEAR(std::abs(r.at(i, j) - h.at(i, j)), 0.0, kEps);
        }
    }
    EXPECT_THROW(rotation(0.6, 0.9), std::invalid_argument);
    EXPECT_THROW(rotation(NAN, 0), std::invalid_argument);
}

TEST(Unitary2, ConstructionCheck) {
    EXPECT_THROW(Unitary2(1, 1, 0, 1), std::invalid_argument);
    EXPECT_NO_THROW(Unitary2::pauli_y());
    Rng rng(8);
    for (int i = 0; i < 100; i++) {
        EXPECT_NO_THROW(random_unitary(rng) * random_unitary(rng));
    }
}

TEST(Fredkin, ControlHLeavesTargets) {
    Rng rng(21);
    const StateVector targets = random_state({"b", "c"}, rng);
    const StateVector s = tensor(ket(A, Outcome::H), targets);
    const QubitId ra[] = {B}, rb[] = {C};
    expect_amplitudes(apply_fredkin(s, A, ra, rb), s.amplitudes(), 0.0);
}

TEST(Fredkin, ControlVSwapsTargets) {
    Rng rng(22);
    const StateVector u = random_state({"b"}, rng);
    const Ket2 uk{u[0], u[1]};
    const Ket2 vk{0.6, 0.8};
    const QubitId ra[] = {B}, rb[] = {C};
    const StateVector before = tensor(ket(A, Outcome::V), tensor(u, StateVector::single(C, vk)));
    const StateVector expected = tensor(ket(A, Outcome::V), tensor(StateVector::single(B, vk), StateVector::single(C, uk)));
    expect_amplitudes(apply_fredkin(before, A, ra, rb), expected.amplitudes());
}

TEST(Fredkin, RegisterValidation) {
    Rng rng(1);
    const StateVector s = random_state({"a", "b", "c", "d"}, rng);
    const QubitId one[] = {B};
    const QubitId two[] = {C, QubitId("d")};
    const QubitId overlap[] = {A};
    EXPECT_THROW(apply_fredkin(s, A, one, two), std::invalid_argument);
    EXPECT_THROW(apply_fredkin(s, A, one, one), std::invalid_argument);
    EXPECT_THROW(apply_fredkin(s, A, one, overlap), std::invalid_argument);
    EXPECT_THROW(apply_fredkin(s, A, std::span<const QubitId>(), std::span<const QubitId>()), std::invalid_argument);
}

TEST(Fredkin, MatchesBitStringOracle) {
    // Oracle: rewrite each basis label as a character string and swap
    // characters directly; compare with the bit-mask kernel.
    Rng rng(31);
    const std::vector<std::string> labels = {"q0", "q1", "q2", "q3", "q4"};
    const StateVector s = random_state(labels, rng);
    const QubitId control("q2");
    const QubitId ra[] = {QubitId("q0"), QubitId("q4")};
    const QubitId rb[] = {QubitId("q3"), QubitId("q1")};
    const StateVector out = apply_fredkin(s, control, ra, rb);
    const size_t n = labels.size();
    for (size_t i = 0; i < s.dimension(); i++) {
        std::string bits;
        for (size_t k = 0; k < n; k++) {
            bits += ((i >> (n - 1 - k)) & 1) ? 'V' : 'H';
        }
        if (bits[2] == 'V') {
            std::swap(bits[0], bits[3]);
            std::swap(bits[4], bits[1]);
        }
        size_t j = 0;
        for (char c : bits) {
            j = 2 * j + (c == 'V');
        }
        EXPECT_EQ(out[j], s[i]);
    }
}

TEST(Fredkin, InvolutionOnRandomStates) {
    Rng rng(41);
    for (size_t n = 3; n <= 5; n++) {
        std::vector<std::string> labels;
        for (size_t k = 0; k < n; k++) {
            labels.push_back("q" + std::to_string(k));
        }
        for (int rep = 0; rep < 50; rep++) {
            const StateVector s = random_state(labels, rng);
            const size_t c = rng.below(n);
            size_t a = rng.below(n - 1);
            a += a >= c;
            size_t b;
            do {
                b = rng.below(n);
            } while (b == a || b == c);
            const QubitId ra[] = {QubitId(labels[a])}, rb[] = {QubitId(labels[b])};
            const StateVector twice = apply_fredkin(apply_fredkin(s, QubitId(labels[c]), ra, rb), QubitId(labels[c]), ra, rb);
            expect_amplitudes(twice, s.amplitudes(), 1e-12);
        }
    }
}

TEST(Measure, Eigenstates) {
    Rng rng(2);
    for (int i = 0; i < 100; i++) {
        auto h = measure(ket(A, Outcome::H), A, MeasBasis::Computational, rng);
        EXPECT_EQ(h.outcome, Outcome::H);
        expect_amplitudes(h.state, {1, 0});
        auto p = measure(ket(A, Outcome::Plus), A, MeasBasis::Diagonal, rng);
        EXPECT_EQ(p.outcome, Outcome::Plus);
        EXPECT_NEAR(fidelity(p.state, ket(A, Outcome::Plus)), 1.0, 1e-12);
    }
}

TEST(Measure, BellPartnerCollapsesToSameLetter) {
    Rng rng(4);
    for (MeasBasis basis : {MeasBasis::Computational, MeasBasis::Diagonal}) {
        for (int i = 0; i < 200; i++) {
            auto m = measure(bell_phi_plus(A, B), B, basis, rng);
            EXPECT_NEAR(outcome_probability(m.state, A, m.outcome), 1.0, 1e-12);
            // Measured qubit stays in the register.
            EXPECT_EQ(m.state.num_qubits(), 2u);
        }
    }
}

TEST(Measure, BornConsistency) {
    // 0.6|H> + 0.8|V>: P(H) = 0.36; sigma at 1e5 shots is 0.0015.
    const StateVector psi = StateVector::single(A, {0.6, 0.8});
    Rng rng(1234);
    int h = 0;
    const int shots = 100000;
    for (int i = 0; i < shots; i++) {
        h += measure(psi, A, MeasBasis::Computational, rng).outcome == Outcome::H;
    }
    EXPECT_NEAR(h / double(shots), 0.36, 0.005);
}

TEST(Measure, BellCorrelationInBothBases) {
    Rng rng(77);
    for (MeasBasis basis : {MeasBasis::Computational, MeasBasis::Diagonal}) {
        for (int i = 0; i < 5000; i++) {
            auto mb = measure(bell_phi_plus(A, B), B, basis, rng);
            auto ma = measure(mb.state, A, basis, rng);
            ASSERT_EQ(ma.outcome, mb.outcome);
        }
    }
}

TEST(Measure, SwapTestFlipFrequency) {
    // Flip frequency of a |+> control must match (1 - |<u|v>|^2) / 2.
    Rng rng(99);
    const QubitId ra[] = {B}, rb[] = {C};
    for (int rep = 0; rep < 5; rep++) {
        const StateVector u = random_state({"b"}, rng);
        const StateVector v = random_state({"c"}, rng);
        const double overlap2 = std::norm(std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1]);
        const StateVector post = apply_fredkin(tensor(ket(A, Outcome::Plus), tensor(u, v)), A, ra, rb);
        int flips = 0;
        const int shots = 100000;
        for (int i = 0; i < shots; i++) {
            flips += measure(post, A, MeasBasis::Diagonal, rng).outcome == Outcome::Minus;
        }
        EXPECT_NEAR(flips / double(shots), (1 - overlap2) / 2, 0.005);
    }
}

TEST(InnerProduct, Examples) {
    Rng rng(6);
    const StateVector u = random_state({"a", "b"}, rng);
    EXPECT_NEAR(std::abs(inner_product(u, u) - 1.0), 0.0, 1e-12);
    EXPECT_EQ(inner_product(ket(A, Outcome::H), ket(A, Outcome::V)), Amplitude(0));
    EXPECT_NEAR(std::abs(inner_product(ket(A, Outcome::H), StateVector::single(A, {0.6, 0.8})) - 0.6), 0.0, 1e-15);
    EXPECT_THROW(inner_product(ket(A, Outcome::H), ket(B, Outcome::H)), std::invalid_argument);
    // Conjugation falls on the first argument.
    const StateVector i_ket = StateVector::single(A, {0, Amplitude(0, 1)});
    EXPECT_NEAR(std::abs(inner_product(i_ket, ket(A, Outcome::V)) - Amplitude(0, -1)), 0.0, 1e-15);
}

TEST(Schmidt, ProductVersusBell) {
    Rng rng(9);
    const StateVector prod = tensor(random_state({"a"}, rng), random_state({"b", "c"}, rng));
    EXPECT_LT(schmidt_coefficients(prod, A)[1], 1e-12);
    const auto bell = schmidt_coefficients(bell_phi_plus(A, B), A);
    EXPECT_NEAR(bell[0], 0.5, 1e-12);
    EXPECT_NEAR(bell[1], 0.5, 1e-12);
}

TEST(RemoveQubit, KeepsRestUpToPhase) {
    Rng rng(10);
    const StateVector rest = random_state({"b", "c"}, rng);
    const StateVector joint = tensor(random_state({"a"}, rng), rest);
    EXPECT_NEAR(fidelity(remove_qubit(joint, A), rest), 1.0, 1e-12);
    EXPECT_THROW(remove_qubit(bell_phi_plus(A, B), A), std::invalid_argument);
    // Middle qubit removal keeps the order of the others.
    const StateVector mid = tensor(tensor(ket(A, Outcome::V), ket(B, Outcome::Plus)), ket(C, Outcome::H));
    const StateVector ac = remove_qubit(mid, B);
    EXPECT_EQ(ac.qubits(), (std::vector<QubitId>{A, C}));
    expect_amplitudes(ac, {0, 0, 1, 0});
}

TEST(Invariants, NormPreservedOverRandomCircuits) {
    Rng rng(2024);
    const std::vector<std::string> labels = {"q0", "q1", "q2", "q3", "q4"};
    StateVector s = random_state(labels, rng);
    for (int op = 0; op < 2000; op++) {
        if (rng.bernoulli(0.7)) {
            s = apply_single_qubit(std::move(s), QubitId(labels[rng.below(5)]), random_unitary(rng));
        } else {
            const QubitId ra[] = {QubitId(labels[1])}, rb[] = {QubitId(labels[3])};
            s = apply_fredkin(std::move(s), QubitId(labels[rng.below(2) ? 0 : 4]), ra, rb);
        }
        ASSERT_NEAR(s.norm_squared(), 1.0, 1e-10);
    }
}
