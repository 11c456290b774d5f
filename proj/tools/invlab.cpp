/*
   Copyright 2026 The invlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// invlab <subcommand> --config <path> --out <dir> [--seed S] [--threads K] [--mode strict|relaxed]
//
// Exit codes: 0 no failed verdict, 1 some verdict failed, 2 configuration
// error, 3 numeric or solver error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "invlab/cli_io.hpp"
#include "invlab/errors.hpp"

namespace fs = std::filesystem;
using namespace invlab;

namespace {

std::vector<ResultRecord> dispatch(const RunConfig& run, Lab& lab) {
    const std::string& sub = run.subcommand;
    if (sub == "make-data") {
        return run_make_data(lab, [&](const std::string& name, const VectorField& v) {
            write_field(run.out_dir / "data" / (name + ".spf"), v);
        });
    }
    if (run.save_trajectories || sub == "evolve") {
        lab.sink = [&](const std::string& id, const Trajectory& tr) { write_trajectory(run.out_dir, id, tr); };
    }
    if (sub == "evolve") return run_evolve(lab);
    if (sub == "prop31") return run_prop31(lab);
    if (sub == "prop32") return run_prop32(lab);
    if (sub == "prop33") return run_prop33(lab);
    if (sub == "thm12") return run_thm12(lab);
    if (sub == "thm11-limit") return run_thm11_limit(lab);
    if (sub == "thm13") return run_thm13(lab);
    if (sub == "validate") return run_validation_suite(lab);
    throw ArgumentError("unknown subcommand " + sub);
}

int execute(const RunConfig& run) {
    ExperimentConfig cfg = run.config_path ? parse_config(*run.config_path) : parse_config_text("{}");
    run.apply(cfg);
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    if (ec || !fs::is_directory(run.out_dir)) throw ArgumentError("cannot create output directory " + run.out_dir.string());
    Lab lab(cfg);
    write_config_echo(lab.config(), run.out_dir);

    std::vector<ResultRecord> records = dispatch(run, lab);
    records.push_back({"run", std::nullopt, std::nullopt, std::nullopt, "seed", static_cast<double>(cfg.seed),
                       Verdict::info});
    const ReportPaths paths = write_report(records, run.out_dir, cfg.seed);

    std::map<Verdict, int> tally;
    for (const auto& r : records) ++tally[r.verdict];
    for (const auto& r : records) {
        if (r.verdict == Verdict::fail) std::cerr << "FAIL " << r.experiment << " " << r.quantity << "\n";
    }
    std::printf("%s: %d pass, %d fail, %d info -> %s\n", run.subcommand.c_str(), tally[Verdict::pass],
                tally[Verdict::fail], tally[Verdict::info], paths.csv.string().c_str());
    return tally[Verdict::fail] > 0 ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    reuse_large_allocations();
    CLI::App app{"Inviscid-limit numerical laboratory"};
    app.require_subcommand(1);
    RunConfig run;
    std::string config_path, mode;
    std::uint64_t seed = 0;
    int threads = 0;

    for (const char* name :
         {"make-data", "evolve", "prop31", "prop32", "prop33", "thm12", "thm11-limit", "thm13", "validate"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", run.out_dir, "Output directory");
        sub->add_option("--seed", seed, "Random seed (overrides the configuration)");
        sub->add_option("--threads", threads, "Transform threads")->check(CLI::PositiveNumber);
        sub->add_option("--mode", mode, "Tolerance mode")->check(CLI::IsMember({"strict", "relaxed"}));
        sub->add_flag("--save-trajectories", run.save_trajectories, "Write trajectory snapshots");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    run.subcommand = app.get_subcommands().front()->get_name();
    const CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) run.config_path = config_path;
    if (sub->count("--seed")) run.seed = seed;
    if (sub->count("--threads")) run.threads = threads;
    if (!mode.empty()) run.mode = mode == "strict" ? Strictness::strict : Strictness::relaxed;

    try {
        return execute(run);
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
