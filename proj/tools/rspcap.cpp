// Copyright 2026 The rspcap Authors
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

// rspcap analyze | sweep | bloch-cloud | mc
//
// Exit codes: 0 success, 2 invalid input, 3 solver failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rspcap/commands.hpp"
#include "rspcap/rspcap.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

struct Options {
    std::string state = "singlet";
    double phi = 0.0;
    std::string out;
    std::uint64_t seed = 0;
    std::uint64_t samples = 100000;
    std::uint64_t sweep_samples = 0;
    std::string grid = "0:1:0.05";
    std::string model = "phi-mixture";
    std::string format = "csv";
    std::size_t count = 98;
    unsigned threads = 0;
    bool measures_only = false;
    bool heralded = false;
    bool exact = false;
};

void emit(const Options& o, const std::string& text) {
    if (o.out.empty() || o.out == "-") {
        std::cout << text;
    } else {
        rspcap::io::write_text_file(o.out, text);
    }
}

rspcap::ProtocolMode mode_of(const Options& o) {
    return o.heralded ? rspcap::ProtocolMode::heralded : rspcap::ProtocolMode::deterministic;
}

int run_analyze(const Options& o) {
    using namespace rspcap;
    const DensityMatrix state = commands::load_state(o.state);
    const auto a = commands::analyze_state(state, o.phi, mode_of(o), o.measures_only, classical_tolerance_from_env());
    emit(o, commands::analysis_to_json(a, o.state).dump(2) + "\n");
    return a.solver_failed() ? kExitSolver : kExitOk;
}

int run_sweep(const Options& o) {
    using namespace rspcap;
    if (o.format != "csv" && o.format != "json") throw ValidationError("format must be csv or json");
    commands::SweepConfig cfg;
    cfg.model = commands::model_from_string(o.model);
    cfg.base = commands::load_state(o.state);
    cfg.grid = commands::parse_grid(o.grid);
    cfg.phi = o.phi;
    cfg.mode = mode_of(o);
    cfg.seed = o.seed;
    if (o.sweep_samples > 0) cfg.samples = o.sweep_samples;
    cfg.tol = classical_tolerance_from_env();
    cfg.threads = o.threads;
    const auto rows = commands::run_sweep(cfg);
    emit(o, o.format == "csv" ? commands::sweep_csv(rows) : commands::sweep_json(rows).dump(2) + "\n");
    return kExitOk;
}

int run_cloud(const Options& o) {
    using namespace rspcap;
    const DensityMatrix state = commands::load_state(o.state);
    const ProjectedProcess process = rsp_process_tomography({o.phi, state, mode_of(o), std::nullopt, 0});
    const auto cloud = commands::bloch_cloud(process.projected, o.phi, o.count, o.seed);
    emit(o, commands::cloud_to_json(cloud, o.state).dump(2) + "\n");
    return kExitOk;
}

int run_mc(const Options& o) {
    using namespace rspcap;
    if (o.samples < 1) throw ValidationError("--samples must be at least 1");
    const DensityMatrix state = commands::load_state(o.state);
    bool failed = false;
    const auto j = commands::mc_report(state, o.state, o.phi, mode_of(o), o.samples, o.seed, classical_tolerance_from_env(),
                                       o.exact, failed);
    emit(o, j.dump(2) + "\n");
    return failed ? kExitSolver : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Remote-state-preparation capability analysis"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* c) {
        c->add_option("--state", o.state, "builtin (singlet, rho-expt, rho-expt-p40) or density-matrix JSON file");
        c->add_option("--phi", o.phi, "rotation angle of the target R(phi), radians");
        c->add_option("--out", o.out, "output path (stdout when omitted)");
        c->add_flag("--heralded", o.heralded, "keep only the heralding branch");
    };

    auto* analyze = app.add_subcommand("analyze", "capability report for one shared state");
    common(analyze);
    analyze->add_flag("--measures-only", o.measures_only, "only discord and steerable weight");

    auto* sweep = app.add_subcommand("sweep", "CSV/JSON sweep over a noise parameter");
    common(sweep);
    sweep->add_option("--grid", o.grid, "start:stop:step within [0,1]");
    sweep->add_option("--model", o.model, "werner | phi-mixture");
    sweep->add_option("--format", o.format, "csv | json");
    sweep->add_option("--samples", o.sweep_samples, "sampled tomography with this many shots (exact when omitted)");
    sweep->add_option("--seed", o.seed, "seed for sampled sweeps");
    sweep->add_option("--threads", o.threads, "worker threads (0: all cores)");

    auto* cloud = app.add_subcommand("bloch-cloud", "output Bloch vectors for random pure inputs");
    common(cloud);
    cloud->add_option("--count", o.count, "number of inputs");
    cloud->add_option("--seed", o.seed, "input sampling seed");

    auto* mc = app.add_subcommand("mc", "capability report from sampled tomography");
    common(mc);
    mc->add_option("--samples", o.samples, "shots per (input, Bob setting)");
    mc->add_option("--seed", o.seed, "sampling seed");
    mc->add_flag("--exact", o.exact, "also run the exact pipeline and report deltas");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*analyze) return run_analyze(o);
        if (*sweep) return run_sweep(o);
        if (*cloud) return run_cloud(o);
        if (*mc) return run_mc(o);
    } catch (const rspcap::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}
