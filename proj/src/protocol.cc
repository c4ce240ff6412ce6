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

#include "bqml/protocol.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace bqml {

namespace {

std::string join(const std::vector<std::string> &items) {
    std::string out = "invalid configuration:";
    for (const auto &s : items) {
        out += "\n  - " + s;
    }
    return out;
}

constexpr uint64_t kAliceStream = 1;
constexpr uint64_t kBobStream = 2;
constexpr uint64_t kChannelStreamBase = 16;

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

ChannelName channel_of(Source s) {
    switch (s) {
        case Source::S1:
            return ChannelName::C_a1b1;
        case Source::S2:
            return ChannelName::C_a2b2;
        case Source::S3:
            return ChannelName::C_a3b3;
    }
    return ChannelName::C_a1b1;
}

QubitId alice_qubit(Source s) { return QubitId("a" + std::to_string(static_cast<int>(s) + 1)); }
QubitId bob_qubit(Source s) { return QubitId("b" + std::to_string(static_cast<int>(s) + 1)); }

// ---------------------------------------------------------------------------
// SessionConfig

size_t SessionConfig::checking_pairs() const {
    const double c = std::llround(check_fraction * static_cast<double>(n_pairs_per_source));
    return static_cast<size_t>(std::clamp(c, 0.0, static_cast<double>(n_pairs_per_source)));
}

void SessionConfig::validate() const {
    std::vector<std::string> errors;
    if (n_pairs_per_source == 0) {
        errors.emplace_back("session.n_pairs_per_source must be positive");
    }
    if (!(check_fraction > 0.0 && check_fraction <= 1.0)) {
        errors.emplace_back("session.check_fraction must lie in (0, 1]");
    }
    if (shots == 0) {
        errors.emplace_back("session.shots must be positive");
    }
    if (!(check_threshold >= 0.0 && check_threshold <= 1.0)) {
        errors.emplace_back("session.check_threshold must lie in [0, 1]");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        errors.emplace_back("report.ci_level must lie in (0, 1)");
    }
    if (!(tie_epsilon >= 0.0) || !std::isfinite(tie_epsilon)) {
        errors.emplace_back("report.tie_epsilon must be finite and nonnegative");
    }
    const std::pair<const PolarizationVector *, const char *> vectors[] = {
        {&u, "vectors.u"}, {&v_a, "vectors.v_a"}, {&v_b, "vectors.v_b"}};
    for (const auto &[vec, name] : vectors) {
        try {
            vec->validate(name);
        } catch (const std::invalid_argument &e) {
            errors.emplace_back(e.what());
        }
    }
    if (errors.empty() && shots > message_pairs()) {
        errors.emplace_back("session.shots (" + std::to_string(shots) + ") exceeds the message group size (" +
                            std::to_string(message_pairs()) + ")");
    }
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
}

// ---------------------------------------------------------------------------
// Session

Session::Session(SessionConfig config, ChannelSet channels)
    : config_(std::move(config)),
      channels_(std::move(channels)),
      alice_(Rng(config_.seed).fork(kAliceStream)),
      bob_(Rng(config_.seed).fork(kBobStream)),
      channel_rngs_{Rng(config_.seed).fork(kChannelStreamBase + 0), Rng(config_.seed).fork(kChannelStreamBase + 1),
                    Rng(config_.seed).fork(kChannelStreamBase + 2), Rng(config_.seed).fork(kChannelStreamBase + 3)} {
    config_.validate();
    try {
        channels_.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError({e.what()});
    }
    for (auto &queue : bob_.pairs) {
        queue.resize(config_.n_pairs_per_source);
    }
}

Session::PairSlot &Session::slot(Source s, size_t i) {
    auto &queue = bob_.pairs[static_cast<size_t>(s)];
    if (i >= queue.size()) {
        throw ProtocolError("pair index " + std::to_string(i) + " out of range for " + std::string(to_string(s)));
    }
    return queue[i];
}

const Session::PairSlot &Session::slot(Source s, size_t i) const {
    return const_cast<Session *>(this)->slot(s, i);
}

Session::PairSlot &Session::fresh_message_slot(Source s, size_t i, const char *op) {
    PairSlot &p = slot(s, i);
    const std::string where = std::string(op) + ": " + std::string(to_string(s)) + " pair " + std::to_string(i);
    if (!p.distributed) {
        throw ProtocolError(where + " has not been distributed");
    }
    if (i < config_.checking_pairs()) {
        throw ProtocolError(where + " belongs to the checking group");
    }
    if (p.lost) {
        throw ProtocolError(where + " was lost in transit");
    }
    if (p.use != Use::Fresh) {
        throw ProtocolError(where + " was already consumed");
    }
    return p;
}

StateVector Session::pair_state(Source s, size_t i) const {
    const PairSlot &p = slot(s, i);
    return StateVector({alice_qubit(s), bob_qubit(s)}, {p.amps.begin(), p.amps.end()});
}

void Session::store(Source s, size_t i, const StateVector &state) {
    if (state.qubits() != std::vector<QubitId>{alice_qubit(s), bob_qubit(s)}) {
        throw std::logic_error("store: unexpected register layout");
    }
    std::copy(state.amplitudes().begin(), state.amplitudes().end(), slot(s, i).amps.begin());
}

void Session::send(Party from, MessageBody body) {
    const uint64_t seq = next_seq_++;
    if (config_.record_transcript) {
        transcript_.push_back(ProtocolMessage{seq, from, std::move(body)});
    }
}

void Session::abort(SessionResult &result, const char *reason) {
    result.aborted = true;
    result.abort_reason = reason;
    send(Party::Alice, msg::AbortNotice{reason});
}

std::vector<TransmissionRecord> Session::distribute_pairs() {
    std::vector<TransmissionRecord> records;
    records.reserve(3 * config_.n_pairs_per_source);
    for (Source s : kAllSources) {
        const ChannelModel &channel = channels_[channel_of(s)];
        const QubitId a = alice_qubit(s);
        const QubitId b = bob_qubit(s);
        for (size_t i = 0; i < config_.n_pairs_per_source; i++) {
            PairSlot &p = slot(s, i);
            if (p.distributed) {
                throw ProtocolError("distribute_pairs: pairs were already distributed");
            }
            TransmitResult sent = transmit(bell_phi_plus(a, b), a, channel, i, channel_rng(channel.name));
            store(s, i, sent.state);
            p.distributed = true;
            p.lost = sent.lost();
            if (sent.entry) {
                log_.push_back(*sent.entry);
            }
            records.push_back({s, i, p.lost});
        }
    }
    return records;
}

CheckReport Session::eavesdrop_check(Source source, std::span<const size_t> indices, int round) {
    CheckReport report{.source = source, .channel = channel_of(source), .round = round};
    const QubitId a = alice_qubit(source);
    const QubitId b = bob_qubit(source);
    for (size_t i : indices) {
        PairSlot &p = slot(source, i);
        if (!p.distributed || p.use != Use::Fresh) {
            throw ProtocolError("eavesdrop_check: " + std::string(to_string(source)) + " pair " + std::to_string(i) +
                                " is not available for checking");
        }
        p.use = Use::Checked;
        if (p.lost) {
            report.n_lost++;
            continue;
        }
        const MeasBasis basis = bob_.rng.bernoulli(0.5) ? MeasBasis::Computational : MeasBasis::Diagonal;
        Measurement bob_m = measure(pair_state(source, i), b, basis, bob_.rng);
        send(Party::Bob, msg::BasisAnnouncement{source, i, basis});
        send(Party::Bob, msg::ResultAnnouncement{source, i, bob_m.outcome});
        Measurement alice_m = measure(bob_m.state, a, basis, alice_.rng);
        store(source, i, alice_m.state);
        report.n_checked++;
        if (alice_m.outcome != bob_m.outcome) {
            report.n_mismatch++;
        }
    }
    return report;
}

ControlRecord Session::prepare_control(size_t pair_index) {
    PairSlot &p = fresh_message_slot(Source::S1, pair_index, "prepare_control");
    const MeasBasis basis = alice_.rng.bernoulli(0.5) ? MeasBasis::Computational : MeasBasis::Diagonal;
    Measurement m = measure(pair_state(Source::S1, pair_index), alice_qubit(Source::S1), basis, alice_.rng);
    store(Source::S1, pair_index, m.state);
    p.use = Use::Control;
    ControlRecord record{pair_index, m.outcome, basis};
    alice_.controls.push_back(record);
    return record;
}

PrepRecord Session::remote_prepare(const PolarizationVector &target, Source source, size_t pair_index) {
    if (source == Source::S1) {
        throw ProtocolError("remote_prepare: S1 carries the control, not a target");
    }
    target.validate("remote_prepare target");
    PairSlot &p = fresh_message_slot(source, pair_index, "remote_prepare");
    const QubitId a = alice_qubit(source);
    StateVector state = apply_single_qubit(pair_state(source, pair_index), a, rotation(target.alpha, target.beta));
    Measurement m = measure(state, a, MeasBasis::Computational, alice_.rng);
    state = std::move(m.state);
    PrepRecord record{source, pair_index, m.outcome, m.outcome == Outcome::V};
    if (record.correction_requested) {
        send(Party::Alice, msg::CorrectionRequest{source, pair_index, true, true});
        const QubitId b = bob_qubit(source);
        // X then Z; leaves Bob's half at -|target>.
        state = apply_single_qubit(std::move(state), b, Unitary2::pauli_x());
        state = apply_single_qubit(std::move(state), b, Unitary2::pauli_z());
    }
    store(source, pair_index, state);
    p.use = Use::Target;
    alice_.preparations.push_back(record);
    return record;
}

bool Session::server_fredkin_and_return(size_t control_index, size_t u_index, size_t v_index) {
    if (active_state_) {
        throw ProtocolError("server_fredkin_and_return: previous trial still in flight");
    }
    PairSlot &c = slot(Source::S1, control_index);
    PairSlot &pu = slot(Source::S2, u_index);
    PairSlot &pv = slot(Source::S3, v_index);
    if (c.use != Use::Control || pu.use != Use::Target || pv.use != Use::Target) {
        throw ProtocolError("server_fredkin_and_return: control and both targets must be prepared first");
    }
    send(Party::Alice, msg::FredkinRequest{control_index, {u_index, v_index}});
    c.use = pu.use = pv.use = Use::Trial;

    StateVector joint = tensor(tensor(pair_state(Source::S1, control_index), pair_state(Source::S2, u_index)),
                               pair_state(Source::S3, v_index));
    const QubitId b1 = bob_qubit(Source::S1);
    const QubitId b2 = bob_qubit(Source::S2);
    const QubitId b3 = bob_qubit(Source::S3);
    joint = apply_fredkin(std::move(joint), b1, std::span(&b2, 1), std::span(&b3, 1));

    const ChannelModel &back = channels_[ChannelName::C_a4b4];
    TransmitResult sent = transmit(std::move(joint), b1, back, control_index, channel_rng(back.name));
    if (sent.entry) {
        log_.push_back(*sent.entry);
    }
    if (sent.lost()) {
        return false;
    }
    active_state_ = std::move(sent.state);
    active_control_ = control_index;
    return true;
}

TrialOutcome Session::client_measure_control(const ControlRecord &record, Reference reference) {
    if (!active_state_ || active_control_ != record.pair_index) {
        throw ProtocolError("client_measure_control: no returned control for pair " +
                            std::to_string(record.pair_index));
    }
    Measurement m = measure(*active_state_, bob_qubit(Source::S1), record.basis, alice_.rng);
    active_state_.reset();
    const bool same = m.outcome == record.prepared_outcome;
    TrialOutcome out{.pair_index = record.pair_index, .reference = reference};
    if (record.basis == MeasBasis::Computational) {
        out.kind = same ? TrialKind::SecurityPass : TrialKind::SecurityFail;
        // Every qubit except b2, b3 is now collapsed, so the carriers factor out.
        StateVector carriers = std::move(m.state);
        for (Source s : kAllSources) {
            carriers = remove_qubit(carriers, alice_qubit(s));
        }
        carriers = remove_qubit(carriers, bob_qubit(Source::S1));
        bob_.retained.push_back({record.pair_index, reference, record.prepared_outcome, std::move(carriers)});
    } else {
        out.kind = same ? TrialKind::Same : TrialKind::Flip;
    }
    return out;
}

SessionResult Session::run() {
    if (ran_) {
        throw ProtocolError("run: a session can only be run once");
    }
    ran_ = true;
    SessionResult result;
    distribute_pairs();

    const size_t n_check = config_.checking_pairs();
    std::vector<size_t> checking(n_check);
    std::iota(checking.begin(), checking.end(), size_t{0});
    auto check_all = [&](std::span<const size_t> indices, int round) {
        bool failed = false;
        for (Source s : kAllSources) {
            CheckReport r = eavesdrop_check(s, indices, round);
            failed = failed || r.mismatch_rate() > config_.check_threshold;
            result.check_reports.push_back(r);
        }
        return failed;
    };

    auto finish = [&] {
        result.transcript = transcript_;
        result.interception_log = log_;
        return result;
    };

    if (check_all(checking, 1)) {
        abort(result, kAbortEavesdropper);
        return finish();
    }

    // Message pairs beyond what the trials need are spot-checked, chosen at
    // random by a partial Fisher-Yates shuffle.
    std::vector<size_t> message(config_.message_pairs());
    std::iota(message.begin(), message.end(), n_check);
    const size_t spare = message.size() - config_.shots;
    for (size_t k = 0; k < spare; k++) {
        std::swap(message[k], message[k + bob_.rng.below(message.size() - k)]);
    }
    std::vector<size_t> spot(message.begin(), message.begin() + static_cast<std::ptrdiff_t>(spare));
    std::vector<size_t> trial_pairs(message.begin() + static_cast<std::ptrdiff_t>(spare), message.end());
    std::sort(spot.begin(), spot.end());
    std::sort(trial_pairs.begin(), trial_pairs.end());
    if (!spot.empty() && check_all(spot, 2)) {
        abort(result, kAbortEavesdropper);
        return finish();
    }

    result.trials.reserve(trial_pairs.size());
    for (size_t k = 0; k < trial_pairs.size(); k++) {
        const size_t idx = trial_pairs[k];
        const Reference ref = k % 2 == 0 ? Reference::A : Reference::B;
        const bool lost = std::any_of(kAllSources.begin(), kAllSources.end(),
                                      [&](Source s) { return slot(s, idx).lost; });
        if (lost) {
            result.discarded.push_back({idx, ref, std::nullopt});
            continue;
        }
        const ControlRecord control = prepare_control(idx);
        remote_prepare(config_.u, Source::S2, idx);
        remote_prepare(ref == Reference::A ? config_.v_a : config_.v_b, Source::S3, idx);
        if (!server_fredkin_and_return(idx, idx, idx)) {
            result.discarded.push_back({idx, ref, control.basis});
            continue;
        }
        const TrialOutcome t = client_measure_control(control, ref);
        if (t.kind == TrialKind::SecurityPass || t.kind == TrialKind::SecurityFail) {
            result.computational_trials++;
            result.security_fail_count += t.kind == TrialKind::SecurityFail;
        }
        result.trials.push_back(t);
    }

    if (static_cast<double>(result.security_fail_count) >
        config_.check_threshold * static_cast<double>(result.computational_trials)) {
        abort(result, kAbortSecurityFail);
        return finish();
    }

    try {
        SessionEstimates est;
        est.overlap_a = estimate_flip_probability(result.trials, Reference::A, config_.ci_level);
        est.overlap_b = estimate_flip_probability(result.trials, Reference::B, config_.ci_level);
        est.assignment = assign_cluster(distance(config_.u.magnitude, config_.v_a.magnitude, est.overlap_a.overlap_mag),
                                        distance(config_.u.magnitude, config_.v_b.magnitude, est.overlap_b.overlap_mag),
                                        config_.tie_epsilon);
        result.estimates = est;
    } catch (const InsufficientDataError &) {
        abort(result, kAbortInsufficientData);
        return finish();
    }
    completed_ = true;
    return finish();
}

HonestyReport Session::verify_returned_reference() {
    if (!completed_) {
        throw ProtocolError("verify_returned_reference: session has not completed without abort");
    }
    HonestyReport report;
    if (bob_.retained.empty()) {
        return report;
    }
    std::vector<size_t> indices;
    for (const auto &c : bob_.retained) {
        indices.push_back(c.control_index);
    }
    send(Party::Alice, msg::ReturnRequest{std::move(indices)});

    const ChannelModel &back = channels_[ChannelName::C_a4b4];
    const QubitId b2 = bob_qubit(Source::S2);
    const QubitId b3 = bob_qubit(Source::S3);
    for (auto &carrier : bob_.retained) {
        StateVector state = std::move(carrier.targets);
        if (config_.server_behavior == ServerBehavior::MeasureTargetsBeforeReturn) {
            state = measure(state, b2, MeasBasis::Computational, bob_.rng).state;
            state = measure(state, b3, MeasBasis::Computational, bob_.rng).state;
        }
        // Alice knows which vector sits on which wire: a V control swapped them.
        const PolarizationVector &ref = carrier.reference == Reference::A ? config_.v_a : config_.v_b;
        const bool swapped = carrier.control == Outcome::V;
        const std::pair<QubitId, Ket2> expected[] = {{b2, swapped ? ref.ket() : config_.u.ket()},
                                                     {b3, swapped ? config_.u.ket() : ref.ket()}};
        for (const auto &[q, ket] : expected) {
            report.n_returned++;
            TransmitResult sent = transmit(std::move(state), q, back, carrier.control_index, channel_rng(back.name));
            state = std::move(sent.state);
            if (sent.entry) {
                log_.push_back(*sent.entry);
            }
            if (sent.lost()) {
                report.n_lost++;
                continue;
            }
            BasisMeasurement m = measure_in(state, q, ket, orthogonal(ket), alice_.rng);
            state = std::move(m.state);
            report.n_checked++;
            report.n_suspicious += m.index == 1;
        }
    }
    bob_.retained.clear();
    return report;
}

SessionResult run_session(const SessionConfig &config, const ChannelSet &channels) {
    return Session(config, channels).run();
}

}  // namespace bqml
