// SPDX-License-Identifier: Apache-2.0
//
// lolrnet: batch CLI for network ranking, clearing, control regions, optimal
// lending rates and Monte Carlo verification.
//
//   lolrnet regions  --config data/case_study.json
//   lolrnet simulate --config data/case_study.json --paths 100000 --seed 7
//   lolrnet rank     --config data/case_study.json --matrix-override data/reference_google.json
#include "lolrnet/lolrnet.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

unsigned threads_from_env() {
    const char* env = std::getenv("LOLRNET_THREADS");
    if (!env || !*env) return 0;
    try {
        const long v = std::stol(env);
        return v > 0 ? static_cast<unsigned>(v) : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lender-of-last-resort analytics for interbank networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path;
    std::string format = "table";
    lolrnet::CommandOptions opt;
    std::string override_path;

    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help = {
        {"rank", "Liability-weighted PageRank and survival targets"},
        {"clearing", "Clearing payment vector at --time"},
        {"regions", "No-action thresholds and region per bank"},
        {"control", "Optimal lending rates and expected costs"},
        {"simulate", "Monte Carlo default frequencies and costs"},
    };
    for (auto name : lolrnet::kCommands) {
        const std::string n(name);
        auto* sub = app.add_subcommand(n, help.at(n));
        sub->add_option("--config", config_path, "Network config (JSON)")->required();
        sub->add_option("--output", output_path, "Write output here instead of stdout");
        sub->add_option("--format", format, "table (CSV) or doc (JSON)")
            ->check(CLI::IsMember({"table", "doc"}));
        subs[n] = sub;
    }
    subs["clearing"]->add_option("--time", opt.time, "Evaluation time in years");
    subs["rank"]->add_option("--matrix-override", override_path,
                             "Use this Google matrix instead of computing one");
    auto* sim = subs["simulate"];
    sim->add_option("--seed", opt.seed, "RNG seed");
    sim->add_option("--paths", opt.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    sim->add_option("--steps", opt.steps, "Time steps per path")->check(CLI::PositiveNumber);
    sim->add_flag("--dump-paths", opt.dump_paths, "Append per-path trajectories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << lolrnet::error_document("usage_error", e.what());
        return lolrnet::kExitUsage;
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) command = name;
    }
    opt.format = format == "doc" ? lolrnet::OutputFormat::Doc : lolrnet::OutputFormat::Table;
    if (!override_path.empty()) opt.matrix_override = override_path;
    opt.threads = threads_from_env();

    lolrnet::CommandOutput result;
    try {
        const auto cfg = lolrnet::load_config(config_path);
        result = lolrnet::run_command(command, cfg, opt);
    } catch (const std::exception& e) {
        result = lolrnet::error_output(e);
    }

    if (result.exit_code != 0) {
        std::cerr << result.err;
        return result.exit_code;
    }
    if (output_path.empty()) {
        std::cout << result.out;
    } else {
        std::ofstream out(output_path, std::ios::binary);
        if (!out) {
            std::cerr << lolrnet::error_document("io_error", "cannot write " + output_path);
            return lolrnet::kExitComputation;
        }
        out << result.out;
    }
    return 0;
}
