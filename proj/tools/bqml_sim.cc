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

// bqml-sim: run blind swap-test classification experiments from a config file.
//
// Exit codes: 0 completed, 2 every session aborted, 3 configuration error,
// 4 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bqml/adversary_channel.h"
#include "bqml/experiment.h"
#include "bqml/protocol.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAllAborted = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;

int print_oracle(const std::string &attack, const std::string &basis, const std::string &replacement) {
    using namespace bqml;
    AttackStrategy strategy;
    if (attack == "intercept_resend") {
        BasisPolicy policy = BasisPolicy::RandomUniform;
        if (basis == "computational") {
            policy = BasisPolicy::FixedComputational;
        } else if (basis == "diagonal") {
            policy = BasisPolicy::FixedDiagonal;
        } else if (basis != "random") {
            std::cerr << "error: --basis must be random, computational or diagonal\n";
            return kExitConfig;
        }
        strategy = InterceptResend{policy};
    } else if (attack == "fake_photon") {
        Outcome o;
        if (replacement == "H") {
            o = Outcome::H;
        } else if (replacement == "V") {
            o = Outcome::V;
        } else if (replacement == "plus") {
            o = Outcome::Plus;
        } else if (replacement == "minus") {
            o = Outcome::Minus;
        } else {
            std::cerr << "error: --replacement must be H, V, plus or minus\n";
            return kExitConfig;
        }
        strategy = FakePhoton{o};
    } else {
        std::cerr << "error: oracle supports intercept_resend and fake_photon\n";
        return kExitConfig;
    }
    std::printf("%s %.17g\n", describe(strategy).c_str(), detection_probability_oracle(strategy));
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Blind quantum machine learning protocol simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<size_t> repetitions;
    std::optional<std::string> output;
    std::optional<size_t> threads;
    bool emit_transcript = false;

    auto *run = app.add_subcommand("run", "Run an experiment and write reports");
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Override session.seed");
    run->add_option("--repetitions", repetitions, "Override report.repetitions");
    run->add_option("--output", output, "Override report.output_dir");
    run->add_option("--threads", threads, "Worker threads for repetitions");
    run->add_flag("--emit-transcript", emit_transcript, "Also write transcript.jsonl");

    std::string attack, basis = "random", replacement = "H";
    auto *oracle = app.add_subcommand("oracle", "Print the exact checking-mismatch probability of an attack");
    oracle->add_option("--attack", attack, "intercept_resend or fake_photon")->required();
    oracle->add_option("--basis", basis, "Eve's basis policy for intercept_resend");
    oracle->add_option("--replacement", replacement, "Substituted photon for fake_photon");

    auto *validate = app.add_subcommand("validate", "Check a config file and exit");
    validate->add_option("--config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (oracle->parsed()) {
        return print_oracle(attack, basis, replacement);
    }

    try {
        bqml::ExperimentConfig cfg = bqml::parse_config(config_path);
        if (validate->parsed()) {
            std::cout << "ok " << cfg.hash() << "\n";
            return kExitOk;
        }
        if (seed) cfg.session.seed = *seed;
        if (repetitions) cfg.repetitions = *repetitions;
        if (output) cfg.output_dir = *output;
        if (threads) cfg.threads = *threads;
        cfg.emit_transcript = cfg.emit_transcript || emit_transcript;
        cfg.validate();

        const bqml::RunReport report = bqml::run_experiment(cfg);
        for (const auto &path : bqml::emit_report(report, cfg.output_dir, cfg.emit_transcript)) {
            std::cout << "wrote " << path.string() << "\n";
        }
        std::cout << "repetitions " << report.repetitions << ", aborted " << report.aborted_count
                  << ", assignments A=" << report.assignment_histogram[0] << " B=" << report.assignment_histogram[1]
                  << " Tie=" << report.assignment_histogram[2] << "\n";
        return report.aborted_count == report.repetitions ? kExitAllAborted : kExitOk;
    } catch (const bqml::IoError &e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const bqml::ParseError &e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const bqml::ConfigError &e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }
}
