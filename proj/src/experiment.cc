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

#include "bqml/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace bqml {

using ordered_json = nlohmann::ordered_json;

ParseError::ParseError(size_t line, std::string key, const std::string &message)
    : std::runtime_error("line " + std::to_string(line) + (key.empty() ? "" : ", key '" + key + "'") + ": " +
                         message),
      line_(line),
      key_(std::move(key)) {}

IoError::IoError(const std::filesystem::path &path, const std::string &message)
    : std::runtime_error(path.string() + ": " + message), path_(path) {}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Value {
    size_t line;
    std::string key;
    std::string text;

    [[noreturn]] void fail(const std::string &msg) const { throw ParseError(line, key, msg); }

    double as_double() const {
        double v = 0;
        const char *end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc() || ptr != end) {
            fail("expected a number, got '" + text + "'");
        }
        return v;
    }

    uint64_t as_uint() const {
        uint64_t v = 0;
        const char *end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc() || ptr != end) {
            fail("expected a nonnegative integer, got '" + text + "'");
        }
        return v;
    }

    bool as_bool() const {
        if (text == "true") {
            return true;
        }
        if (text == "false") {
            return false;
        }
        fail("expected true or false, got '" + text + "'");
    }

    // `{alpha = 0.6, beta = 0.8, magnitude = 1}`
    std::map<std::string, Value> as_table() const {
        if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
            fail("expected an inline table {alpha = ..., beta = ..., magnitude = ...}");
        }
        std::map<std::string, Value> out;
        std::string_view body(text.data() + 1, text.size() - 2);
        while (!trim(body).empty()) {
            const auto comma = body.find(',');
            std::string_view item = trim(body.substr(0, comma));
            body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                fail("table entry '" + std::string(item) + "' is missing '='");
            }
            std::string k(trim(item.substr(0, eq)));
            Value v{line, key + "." + k, std::string(trim(item.substr(eq + 1)))};
            if (!out.emplace(k, v).second) {
                fail("duplicate table entry '" + k + "'");
            }
        }
        return out;
    }
};

std::map<std::string, Value> tokenize(std::string_view text) {
    std::map<std::string, Value> entries;
    size_t line_no = 0;
    while (!text.empty()) {
        line_no++;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_no, std::string(line), "expected 'key = value'");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ParseError(line_no, "", "empty key");
        }
        if (value.empty()) {
            throw ParseError(line_no, key, "missing value");
        }
        if (entries.count(key)) {
            throw ParseError(line_no, key, "duplicate key (first set on line " + std::to_string(entries.at(key).line) +
                                               ")");
        }
        entries.emplace(key, Value{line_no, key, std::move(value)});
    }
    return entries;
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    if (s == "H") return Outcome::H;
    if (s == "V") return Outcome::V;
    if (s == "plus") return Outcome::Plus;
    if (s == "minus") return Outcome::Minus;
    return std::nullopt;
}

std::optional<BasisPolicy> parse_policy(std::string_view s) {
    if (s == "random") return BasisPolicy::RandomUniform;
    if (s == "computational") return BasisPolicy::FixedComputational;
    if (s == "diagonal") return BasisPolicy::FixedDiagonal;
    return std::nullopt;
}

struct ChannelKeys {
    std::optional<Value> attack, basis, replacement, p, loss_p;
};

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
    const auto entries = tokenize(text);
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    bool have_pairs = false, have_shots = false;
    std::map<std::string, bool> have_vector{{"u", false}, {"v_a", false}, {"v_b", false}};
    std::map<ChannelName, ChannelKeys> channel_keys;

    for (const auto &[key, value] : entries) {
        if (key == "session.n_pairs_per_source") {
            cfg.session.n_pairs_per_source = value.as_uint();
            have_pairs = true;
        } else if (key == "session.check_fraction") {
            cfg.session.check_fraction = value.as_double();
        } else if (key == "session.shots") {
            cfg.session.shots = value.as_uint();
            have_shots = true;
        } else if (key == "session.check_threshold") {
            cfg.session.check_threshold = value.as_double();
        } else if (key == "session.seed") {
            cfg.session.seed = value.as_uint();
        } else if (key == "report.ci_level") {
            cfg.session.ci_level = value.as_double();
        } else if (key == "report.tie_epsilon") {
            cfg.session.tie_epsilon = value.as_double();
        } else if (key == "report.repetitions") {
            cfg.repetitions = value.as_uint();
        } else if (key == "report.output_dir") {
            cfg.output_dir = value.text;
        } else if (key == "report.emit_transcript") {
            cfg.emit_transcript = value.as_bool();
        } else if (key == "report.threads") {
            cfg.threads = value.as_uint();
        } else if (key.rfind("vectors.", 0) == 0) {
            const std::string name = key.substr(8);
            if (!have_vector.count(name)) {
                value.fail("unknown vector (expected u, v_a or v_b)");
            }
            PolarizationVector &vec = name == "u" ? cfg.session.u : name == "v_a" ? cfg.session.v_a : cfg.session.v_b;
            vec.magnitude = 1.0;
            bool have_alpha = false, have_beta = false;
            for (const auto &[field, fv] : value.as_table()) {
                if (field == "alpha") {
                    vec.alpha = fv.as_double();
                    have_alpha = true;
                } else if (field == "beta") {
                    vec.beta = fv.as_double();
                    have_beta = true;
                } else if (field == "magnitude") {
                    vec.magnitude = fv.as_double();
                } else {
                    fv.fail("unknown vector field (expected alpha, beta, magnitude)");
                }
            }
            if (!have_alpha || !have_beta) {
                errors.push_back(key + ": alpha and beta are required");
            }
            have_vector[name] = true;
        } else if (key.rfind("channels.", 0) == 0) {
            const std::string rest = key.substr(9);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) {
                value.fail("expected channels.<name>.<field>");
            }
            const std::string cname = rest.substr(0, dot);
            const std::string field = rest.substr(dot + 1);
            const auto channel = parse_channel_name(cname);
            if (!channel) {
                errors.push_back(key + ": unknown channel '" + cname + "' (expected C_a1b1, C_a2b2, C_a3b3, C_a4b4)");
                continue;
            }
            ChannelKeys &ck = channel_keys[*channel];
            if (field == "attack") {
                ck.attack = value;
            } else if (field == "basis") {
                ck.basis = value;
            } else if (field == "replacement") {
                ck.replacement = value;
            } else if (field == "p") {
                ck.p = value;
            } else if (field == "loss_p") {
                ck.loss_p = value;
            } else {
                value.fail("unknown channel field (expected attack, basis, replacement, p, loss_p)");
            }
        } else {
            value.fail("unknown key");
        }
    }

    for (const auto &[name, present] : have_vector) {
        if (!present) {
            errors.push_back("vectors." + name + " is required");
        }
    }
    if (!have_shots) {
        errors.emplace_back("session.shots is required");
    }
    if (!have_pairs && have_shots && cfg.session.check_fraction > 0.0 && cfg.session.check_fraction < 1.0) {
        // Smallest source size whose message group holds every shot.
        size_t n = cfg.session.shots;
        cfg.session.n_pairs_per_source = n;
        while (cfg.session.message_pairs() < cfg.session.shots) {
            cfg.session.n_pairs_per_source = ++n;
        }
    }

    for (const auto &[channel, ck] : channel_keys) {
        const std::string prefix = "channels." + std::string(to_string(channel)) + ".";
        ChannelModel &model = cfg.channels[channel];
        if (ck.loss_p) {
            model.loss_p = ck.loss_p->as_double();
        }
        const std::string attack = ck.attack ? ck.attack->text : "none";
        auto reject = [&](const std::optional<Value> &v, const char *field) {
            if (v) {
                errors.push_back(prefix + field + " does not apply to attack '" + attack + "'");
            }
        };
        if (attack == "none") {
            model.attack = NoAttack{};
            reject(ck.basis, "basis");
            reject(ck.replacement, "replacement");
            reject(ck.p, "p");
        } else if (attack == "intercept_resend") {
            InterceptResend ir;
            if (ck.basis) {
                const auto policy = parse_policy(ck.basis->text);
                if (!policy) {
                    errors.push_back(prefix + "basis must be random, computational or diagonal");
                } else {
                    ir.basis_policy = *policy;
                }
            }
            model.attack = ir;
            reject(ck.replacement, "replacement");
            reject(ck.p, "p");
        } else if (attack == "fake_photon") {
            FakePhoton fp;
            if (ck.replacement) {
                const auto o = parse_outcome(ck.replacement->text);
                if (!o) {
                    errors.push_back(prefix + "replacement must be H, V, plus or minus");
                } else {
                    fp.replacement = *o;
                }
            }
            model.attack = fp;
            reject(ck.basis, "basis");
            reject(ck.p, "p");
        } else if (attack == "depolarize") {
            if (!ck.p) {
                errors.push_back(prefix + "p is required for attack 'depolarize'");
            }
            model.attack = Depolarize{ck.p ? ck.p->as_double() : 0.0};
            reject(ck.basis, "basis");
            reject(ck.replacement, "replacement");
        } else {
            errors.push_back(prefix + "attack must be none, intercept_resend, fake_photon or depolarize");
        }
    }

    try {
        cfg.validate();
    } catch (const ConfigError &e) {
        errors.insert(errors.end(), e.violations().begin(), e.violations().end());
    }
    if (!errors.empty()) {
        // Drop duplicates that both passes report (e.g. a missing vector).
        std::vector<std::string> unique;
        for (auto &e : errors) {
            if (std::find(unique.begin(), unique.end(), e) == unique.end()) {
                unique.push_back(std::move(e));
            }
        }
        throw ConfigError(std::move(unique));
    }
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path, "cannot open config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void ExperimentConfig::validate() const {
    std::vector<std::string> errors;
    try {
        session.validate();
    } catch (const ConfigError &e) {
        errors = e.violations();
    }
    for (ChannelName c : kAllChannels) {
        try {
            channels[c].validate();
        } catch (const std::invalid_argument &e) {
            errors.push_back("channels." + std::string(e.what()));
        }
    }
    if (repetitions == 0) {
        errors.emplace_back("report.repetitions must be a positive integer");
    }
    if (threads == 0) {
        errors.emplace_back("report.threads must be a positive integer");
    }
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
}

std::string ExperimentConfig::canonical() const {
    ordered_json j;
    const auto &s = session;
    j["session"] = {{"n_pairs_per_source", s.n_pairs_per_source},
                    {"check_fraction", s.check_fraction},
                    {"shots", s.shots},
                    {"check_threshold", s.check_threshold},
                    {"seed", s.seed}};
    auto vec = [](const PolarizationVector &v) {
        return ordered_json{{"alpha", v.alpha}, {"beta", v.beta}, {"magnitude", v.magnitude}};
    };
    j["vectors"] = {{"u", vec(s.u)}, {"v_a", vec(s.v_a)}, {"v_b", vec(s.v_b)}};
    ordered_json ch = ordered_json::object();
    for (ChannelName c : kAllChannels) {
        ch[std::string(to_string(c))] = {{"attack", describe(channels[c].attack)}, {"loss_p", channels[c].loss_p}};
    }
    j["channels"] = ch;
    j["report"] = {{"ci_level", s.ci_level}, {"tie_epsilon", s.tie_epsilon}, {"repetitions", repetitions}};
    return j.dump();
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

// ---------------------------------------------------------------------------
// Experiment

namespace {

void aggregate(RunReport &report) {
    for (Reference ref : {Reference::A, Reference::B}) {
        ReferenceAggregate &agg = report.per_reference[static_cast<size_t>(ref)];
        std::vector<double> p;
        for (const auto &run : report.runs) {
            if (!run.result.estimates) {
                continue;
            }
            const auto &est = *run.result.estimates;
            const OverlapEstimate &o = ref == Reference::A ? est.overlap_a : est.overlap_b;
            const DistanceEstimate &d = ref == Reference::A ? est.assignment.d_a : est.assignment.d_b;
            p.push_back(o.p_minus_hat);
            agg.overlap_mag_mean += o.overlap_mag;
            agg.distance_mean += d.d;
            agg.ci_level = o.ci_level;
            agg.ci_low_mean += o.ci_low;
            agg.ci_high_mean += o.ci_high;
        }
        agg.n = p.size();
        if (agg.n == 0) {
            continue;
        }
        const double n = static_cast<double>(agg.n);
        for (double x : p) {
            agg.p_minus_hat_mean += x;
        }
        agg.p_minus_hat_mean /= n;
        agg.overlap_mag_mean /= n;
        agg.distance_mean /= n;
        agg.ci_low_mean /= n;
        agg.ci_high_mean /= n;
        if (agg.n > 1) {
            double ss = 0;
            for (double x : p) {
                ss += (x - agg.p_minus_hat_mean) * (x - agg.p_minus_hat_mean);
            }
            agg.p_minus_hat_std = std::sqrt(ss / (n - 1));
        }
    }

    for (const auto &run : report.runs) {
        const SessionResult &r = run.result;
        report.aborted_count += r.aborted;
        if (r.estimates) {
            report.assignment_histogram[static_cast<size_t>(r.estimates->assignment.chosen)]++;
        }
        for (const auto &c : r.check_reports) {
            auto &sec = report.security[static_cast<size_t>(c.channel)];
            sec.checked += c.n_checked;
            sec.mismatches += c.n_mismatch;
        }
        // Computational-control checks ride on the return channel.
        auto &back = report.security[static_cast<size_t>(ChannelName::C_a4b4)];
        back.checked += r.computational_trials;
        back.mismatches += r.security_fail_count;
        back.security_fail_count += r.security_fail_count;
    }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig &config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.config_hash = config.hash();
    report.repetitions = config.repetitions;
    report.runs.resize(config.repetitions);

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < config.repetitions; i = next++) {
            SessionConfig sc = config.session;
            sc.seed = config.session.seed + i;
            sc.record_transcript = config.emit_transcript;
            report.runs[i] = {i, sc.seed, run_session(sc, config.channels)};
        }
    };
    const size_t n_threads = std::min(config.threads, config.repetitions);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (size_t t = 0; t < n_threads; t++) {
            pool.emplace_back(worker);
        }
    }

    aggregate(report);
    report.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ---------------------------------------------------------------------------
// Reports

std::string summary_json(const RunReport &report) {
    ordered_json j;
    j["config_hash"] = report.config_hash;
    j["repetitions"] = report.repetitions;
    j["aborted_count"] = report.aborted_count;
    ordered_json per = ordered_json::object();
    for (Reference ref : {Reference::A, Reference::B}) {
        const auto &a = report.per_reference[static_cast<size_t>(ref)];
        ordered_json r;
        auto num = [&](double v) { return a.n == 0 ? ordered_json(nullptr) : ordered_json(v); };
        r["p_minus_hat_mean"] = num(a.p_minus_hat_mean);
        r["p_minus_hat_std"] = num(a.p_minus_hat_std);
        r["overlap_mag_mean"] = num(a.overlap_mag_mean);
        r["distance_mean"] = num(a.distance_mean);
        r["ci_level"] = num(a.ci_level);
        r["ci_low_mean"] = num(a.ci_low_mean);
        r["ci_high_mean"] = num(a.ci_high_mean);
        per[std::string(to_string(ref))] = r;
    }
    j["per_reference"] = per;
    j["assignment_histogram"] = {{"A", report.assignment_histogram[0]},
                                 {"B", report.assignment_histogram[1]},
                                 {"Tie", report.assignment_histogram[2]}};
    ordered_json sec = ordered_json::object();
    for (ChannelName c : kAllChannels) {
        const auto &s = report.security[static_cast<size_t>(c)];
        sec[std::string(to_string(c))] = {
            {"checked", s.checked}, {"mismatches", s.mismatches}, {"security_fail_count", s.security_fail_count}};
    }
    j["security"] = sec;
    j["wall_clock_s"] = report.wall_clock_s;
    return j.dump(2) + "\n";
}

void validate_summary_schema(std::string_view text) {
    const ordered_json j = ordered_json::parse(text);
    auto fail = [](const std::string &m) { throw std::invalid_argument("summary.json: " + m); };
    auto expect_keys = [&](const ordered_json &obj, const std::vector<std::string> &keys, const std::string &where) {
        if (!obj.is_object() || obj.size() != keys.size()) {
            fail(where + " must be an object with " + std::to_string(keys.size()) + " keys");
        }
        size_t k = 0;
        for (auto it = obj.begin(); it != obj.end(); ++it, ++k) {
            if (it.key() != keys[k]) {
                fail(where + ": expected key '" + keys[k] + "' at position " + std::to_string(k) + ", found '" +
                     it.key() + "'");
            }
        }
    };
    auto expect_count = [&](const ordered_json &v, const std::string &where) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
            fail(where + " must be a nonnegative integer");
        }
    };
    expect_keys(j,
                {"config_hash", "repetitions", "aborted_count", "per_reference", "assignment_histogram", "security",
                 "wall_clock_s"},
                "top level");
    if (!j["config_hash"].is_string()) {
        fail("config_hash must be a string");
    }
    expect_count(j["repetitions"], "repetitions");
    expect_count(j["aborted_count"], "aborted_count");
    expect_keys(j["per_reference"], {"A", "B"}, "per_reference");
    for (const char *r : {"A", "B"}) {
        const auto &pr = j["per_reference"][r];
        expect_keys(pr,
                    {"p_minus_hat_mean", "p_minus_hat_std", "overlap_mag_mean", "distance_mean", "ci_level",
                     "ci_low_mean", "ci_high_mean"},
                    std::string("per_reference.") + r);
        for (auto it = pr.begin(); it != pr.end(); ++it) {
            if (!it->is_number() && !it->is_null()) {
                fail(std::string("per_reference.") + r + "." + it.key() + " must be a number or null");
            }
        }
    }
    expect_keys(j["assignment_histogram"], {"A", "B", "Tie"}, "assignment_histogram");
    for (const auto &v : j["assignment_histogram"]) {
        expect_count(v, "assignment_histogram entry");
    }
    expect_keys(j["security"], {"C_a1b1", "C_a2b2", "C_a3b3", "C_a4b4"}, "security");
    for (auto it = j["security"].begin(); it != j["security"].end(); ++it) {
        expect_keys(*it, {"checked", "mismatches", "security_fail_count"}, "security." + it.key());
        for (const auto &v : *it) {
            expect_count(v, "security." + it.key() + " entry");
        }
    }
    if (!j["wall_clock_s"].is_number()) {
        fail("wall_clock_s must be a number");
    }
}

std::string trials_csv(const RunReport &report) {
    std::string out = "repetition,pair_index,reference,control_basis,outcome_kind,discarded_loss\n";
    auto row = [&](size_t rep, size_t idx, Reference ref, std::string_view basis, std::string_view kind, int lost) {
        out += std::to_string(rep) + "," + std::to_string(idx) + "," + std::string(to_string(ref)) + "," +
               std::string(basis) + "," + std::string(kind) + "," + std::to_string(lost) + "\n";
    };
    for (const auto &run : report.runs) {
        const auto &trials = run.result.trials;
        const auto &dropped = run.result.discarded;
        // Both lists are in ascending pair order; merge to keep schedule order.
        size_t i = 0, k = 0;
        while (i < trials.size() || k < dropped.size()) {
            if (k == dropped.size() || (i < trials.size() && trials[i].pair_index < dropped[k].pair_index)) {
                const auto &t = trials[i++];
                const bool comp = t.kind == TrialKind::SecurityPass || t.kind == TrialKind::SecurityFail;
                row(run.repetition, t.pair_index, t.reference, comp ? "computational" : "diagonal", to_string(t.kind),
                    0);
            } else {
                const auto &d = dropped[k++];
                row(run.repetition, d.pair_index, d.reference, d.control_basis ? to_string(*d.control_basis) : "none",
                    "none", 1);
            }
        }
    }
    return out;
}

std::string transcript_jsonl(const RunReport &report) {
    std::string out;
    for (const auto &run : report.runs) {
        const std::string prefix = "{\"repetition\":" + std::to_string(run.repetition) + ",";
        for (const auto &m : run.result.transcript) {
            out += prefix + to_json_line(m).substr(1) + "\n";
        }
    }
    return out;
}

std::vector<std::filesystem::path> emit_report(const RunReport &report, const std::filesystem::path &dir,
                                               bool emit_transcript) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError(dir, "cannot create output directory: " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    auto write = [&](const char *name, const std::string &content) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(path, "cannot open for writing");
        }
        out << content;
        out.close();
        if (!out) {
            throw IoError(path, "write failed");
        }
        written.push_back(path);
    };
    write("summary.json", summary_json(report));
    write("trials.csv", trials_csv(report));
    if (emit_transcript) {
        write("transcript.jsonl", transcript_jsonl(report));
    }
    return written;
}

}  // namespace bqml
