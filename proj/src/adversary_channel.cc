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

#include "bqml/adversary_channel.h"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace bqml {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Maps |H> onto the eigenstate of `o`.
Unitary2 preparation_from_h(Outcome o) {
    switch (o) {
        case Outcome::H:
            return Unitary2::identity();
        case Outcome::V:
            return Unitary2::pauli_x();
        case Outcome::Plus:
            return Unitary2::hwp();
        case Outcome::Minus:
            return Unitary2::hwp() * Unitary2::pauli_x();
    }
    throw std::invalid_argument("preparation_from_h: bad outcome");
}

// Replaces q's factor with the eigenstate of `replacement`. q must already
// be collapsed onto the computational outcome `captured`.
StateVector overwrite(StateVector state, const QubitId &q, Outcome captured, Outcome replacement) {
    if (captured == Outcome::V) {
        state = apply_single_qubit(std::move(state), q, Unitary2::pauli_x());
    }
    return apply_single_qubit(std::move(state), q, preparation_from_h(replacement));
}

}  // namespace

std::string_view to_string(ChannelName c) {
    switch (c) {
        case ChannelName::C_a1b1:
            return "C_a1b1";
        case ChannelName::C_a2b2:
            return "C_a2b2";
        case ChannelName::C_a3b3:
            return "C_a3b3";
        case ChannelName::C_a4b4:
            return "C_a4b4";
    }
    return "?";
}

std::optional<ChannelName> parse_channel_name(std::string_view s) {
    for (ChannelName c : kAllChannels) {
        if (to_string(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

std::string_view to_string(BasisPolicy p) {
    switch (p) {
        case BasisPolicy::RandomUniform:
            return "random";
        case BasisPolicy::FixedComputational:
            return "computational";
        case BasisPolicy::FixedDiagonal:
            return "diagonal";
    }
    return "?";
}

std::string_view to_string(Pauli p) {
    switch (p) {
        case Pauli::I:
            return "I";
        case Pauli::X:
            return "X";
        case Pauli::Y:
            return "Y";
        case Pauli::Z:
            return "Z";
    }
    return "?";
}

std::string describe(const AttackStrategy &a) {
    return std::visit(overloaded{
                          [](const NoAttack &) { return std::string("none"); },
                          [](const InterceptResend &x) {
                              return "intercept_resend(" + std::string(to_string(x.basis_policy)) + ")";
                          },
                          [](const FakePhoton &x) {
                              return "fake_photon(" + std::string(to_string(x.replacement)) + ")";
                          },
                          [](const Depolarize &x) { return "depolarize(" + std::to_string(x.p) + ")"; },
                      },
                      a);
}

void ChannelModel::validate() const {
    const std::string name_s(to_string(name));
    if (!std::isfinite(loss_p) || loss_p < 0.0 || loss_p > 1.0) {
        throw std::invalid_argument(name_s + ": loss_p must lie in [0, 1]");
    }
    if (const auto *d = std::get_if<Depolarize>(&attack)) {
        if (!std::isfinite(d->p) || d->p < 0.0 || d->p > 1.0) {
            throw std::invalid_argument(name_s + ": depolarizing p must lie in [0, 1]");
        }
    }
}

ChannelSet::ChannelSet() {
    for (ChannelName c : kAllChannels) {
        (*this)[c].name = c;
    }
}

void ChannelSet::validate() const {
    for (ChannelName c : kAllChannels) {
        (*this)[c].validate();
    }
}

TransmitResult transmit(StateVector state, const QubitId &q, const ChannelModel &channel, size_t pair_index,
                        Rng &rng) {
    std::optional<LogEntry> entry;
    auto log = [&]() -> LogEntry & {
        if (!entry) {
            entry.emplace();
            entry->channel = channel.name;
            entry->pair_index = pair_index;
        }
        return *entry;
    };

    std::visit(overloaded{
                   [](const NoAttack &) {},
                   [&](const InterceptResend &a) {
                       MeasBasis b = MeasBasis::Computational;
                       switch (a.basis_policy) {
                           case BasisPolicy::RandomUniform:
                               b = rng.bernoulli(0.5) ? MeasBasis::Computational : MeasBasis::Diagonal;
                               break;
                           case BasisPolicy::FixedComputational:
                               b = MeasBasis::Computational;
                               break;
                           case BasisPolicy::FixedDiagonal:
                               b = MeasBasis::Diagonal;
                               break;
                       }
                       // The collapsed qubit is what gets resent.
                       auto m = measure(state, q, b, rng);
                       state = std::move(m.state);
                       log().eve_basis = b;
                       log().eve_outcome = m.outcome;
                   },
                   [&](const FakePhoton &a) {
                       auto m = measure(state, q, MeasBasis::Computational, rng);
                       state = overwrite(std::move(m.state), q, m.outcome, a.replacement);
                       auto &e = log();
                       e.eve_basis = MeasBasis::Computational;
                       e.eve_outcome = m.outcome;
                       e.replaced = true;
                   },
                   [&](const Depolarize &a) {
                       Pauli p = Pauli::I;
                       if (rng.bernoulli(a.p)) {
                           p = static_cast<Pauli>(1 + rng.below(3));
                           const Unitary2 u = p == Pauli::X   ? Unitary2::pauli_x()
                                              : p == Pauli::Y ? Unitary2::pauli_y()
                                                              : Unitary2::pauli_z();
                           state = apply_single_qubit(std::move(state), q, u);
                       }
                       log().pauli_applied = p;
                   },
               },
               channel.attack);

    if (channel.loss_p > 0.0) {
        log().lost = rng.bernoulli(channel.loss_p);
    }
    return {std::move(state), std::move(entry)};
}

namespace {

// Probability that the check on (alice, bob) disagrees, averaged over the
// two check bases. Bob measures first and announces.
double check_mismatch(const StateVector &pair, const QubitId &alice, const QubitId &bob) {
    double mismatch = 0;
    for (MeasBasis c : {MeasBasis::Computational, MeasBasis::Diagonal}) {
        for (Outcome bob_out : outcomes_of(c)) {
            Projection pb = project(pair, bob, eigenstate(bob_out));
            if (!pb.state) {
                continue;
            }
            for (Outcome alice_out : outcomes_of(c)) {
                if (alice_out == bob_out) {
                    continue;
                }
                mismatch += 0.5 * pb.probability * outcome_probability(*pb.state, alice, alice_out);
            }
        }
    }
    return mismatch;
}

}  // namespace

double detection_probability_oracle(const AttackStrategy &attack) {
    const QubitId alice("a"), bob("b");
    const StateVector bell = bell_phi_plus(alice, bob);

    if (const auto *ir = std::get_if<InterceptResend>(&attack)) {
        std::vector<std::pair<MeasBasis, double>> eve_bases;
        switch (ir->basis_policy) {
            case BasisPolicy::RandomUniform:
                eve_bases = {{MeasBasis::Computational, 0.5}, {MeasBasis::Diagonal, 0.5}};
                break;
            case BasisPolicy::FixedComputational:
                eve_bases = {{MeasBasis::Computational, 1.0}};
                break;
            case BasisPolicy::FixedDiagonal:
                eve_bases = {{MeasBasis::Diagonal, 1.0}};
                break;
        }
        double total = 0;
        for (const auto &[eb, w] : eve_bases) {
            for (Outcome eo : outcomes_of(eb)) {
                Projection pe = project(bell, alice, eigenstate(eo));
                if (pe.state) {
                    total += w * pe.probability * check_mismatch(*pe.state, alice, bob);
                }
            }
        }
        return total;
    }
    if (const auto *fp = std::get_if<FakePhoton>(&attack)) {
        double total = 0;
        for (Outcome eo : outcomes_of(MeasBasis::Computational)) {
            Projection pe = project(bell, alice, eigenstate(eo));
            if (pe.state) {
                StateVector faked = overwrite(std::move(*pe.state), alice, eo, fp->replacement);
                total += pe.probability * check_mismatch(faked, alice, bob);
            }
        }
        return total;
    }
    throw std::invalid_argument("detection_probability_oracle: only intercept_resend and fake_photon are supported");
}

}  // namespace bqml
