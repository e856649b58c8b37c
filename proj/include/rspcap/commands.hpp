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

// Pipelines behind the command-line tool: state -> protocol tomography ->
// capability measures and correlation measures, plus sweeps and Bloch clouds.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rspcap/builtin_states.hpp"
#include "rspcap/capability.hpp"
#include "rspcap/channels.hpp"
#include "rspcap/correlations.hpp"
#include "rspcap/io.hpp"
#include "rspcap/protocol.hpp"
#include "rspcap/states.hpp"

namespace rspcap::commands {

using json = nlohmann::json;

/// Builtin name or path to a density-matrix JSON file.
inline DensityMatrix load_state(const std::string& spec) {
    if (builtin::is_builtin(spec)) return builtin::by_name(spec);
    if (!std::filesystem::exists(spec)) {
        throw ValidationError("'" + spec + "' is neither a builtin state nor an existing file");
    }
    DensityMatrix rho = io::density_from_json(io::read_json_file(spec));
    if (rho.dim() != 4) throw ValidationError("shared state must be a two-qubit (dim 4) density matrix");
    return rho;
}

struct Analysis {
    ProtocolMode mode = ProtocolMode::deterministic;
    double phi = 0.0;
    std::optional<ProjectedProcess> process;  ///< absent in measures-only runs
    std::optional<CapabilityReport> capability;
    std::optional<double> discord;
    std::optional<double> steerable_weight;
    std::string steering_status = "not run";

    bool solver_failed() const {
        return (capability && !capability->complete()) || (steering_status != "optimal" && steering_status != "not run");
    }
};

inline void add_correlations(const DensityMatrix& state, Analysis& a) {
    a.discord = geometric_discord(state);
    try {
        a.steerable_weight = steerable_weight(state).value;
        a.steering_status = "optimal";
    } catch (const SolverError& e) {
        a.steering_status = e.what();
    }
}

inline Analysis analyze_process(ProjectedProcess process, double phi, ProtocolMode mode, double tol) {
    Analysis a;
    a.mode = mode;
    a.phi = phi;
    a.capability = rspcap::analyze(process.projected.normalized_copy(), rotation_unitary(phi), tol);
    a.process = std::move(process);
    return a;
}

inline Analysis analyze_state(const DensityMatrix& state, double phi, ProtocolMode mode, bool measures_only, double tol) {
    Analysis a;
    if (!measures_only) {
        ProtocolConfig cfg{phi, state, mode, std::nullopt, 0};
        a = analyze_process(rsp_process_tomography(cfg), phi, mode, tol);
    }
    a.phi = phi;
    a.mode = mode;
    add_correlations(state, a);
    return a;
}

inline json analysis_to_json(const Analysis& a, const std::string& state_label) {
    json j = {{"state", state_label}, {"phi", a.phi}, {"mode", io::to_string(a.mode)}};
    if (a.capability) {
        const json cap = io::capability_to_json(*a.capability);
        for (const auto& [k, v] : cap.items()) j[k] = v;
    }
    if (a.process) {
        j["process_matrix"] = io::process_to_json(a.process->projected);
        j["process_matrix_raw"] = io::matrix_to_json(a.process->raw);
    }
    j["discord"] = io::optional_to_json(a.discord);
    j["steerable_weight"] = io::optional_to_json(a.steerable_weight);
    j["steerable_weight_status"] = a.steering_status;
    return j;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class NoiseModel { werner, phi_mixture };

inline NoiseModel model_from_string(const std::string& s) {
    if (s == "werner") return NoiseModel::werner;
    if (s == "phi-mixture" || s == "phi_mixture") return NoiseModel::phi_mixture;
    throw ValidationError("unknown noise model '" + s + "' (expected werner or phi-mixture)");
}

/// "start:stop:step" within [0, 1], ascending; the stop value is included
/// when the step lands on it within 1e-9.
inline std::vector<double> parse_grid(const std::string& text) {
    double a = 0, b = 0, s = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &s, &tail) != 3) {
        throw ValidationError("grid must be start:stop:step, got '" + text + "'");
    }
    if (!(a >= 0 && b <= 1 && a <= b)) throw ValidationError("grid must satisfy 0 <= start <= stop <= 1");
    if (!(s > 0)) throw ValidationError("grid step must be positive");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((b - a) / s + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::min(b, a + static_cast<double>(i) * s));
    return out;
}

struct SweepConfig {
    NoiseModel model = NoiseModel::phi_mixture;
    DensityMatrix base = states::singlet();
    std::vector<double> grid;
    double phi = 0.0;
    ProtocolMode mode = ProtocolMode::deterministic;
    std::optional<std::uint64_t> samples;  ///< Monte-Carlo tomography when set
    std::uint64_t seed = 0;
    double tol = kDefaultClassicalTol;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

struct SweepRow {
    double param = 0.0;
    std::optional<double> alpha, beta;
    std::optional<double> avg_state_fidelity;
    std::optional<double> discord, steerable_weight;
    std::string status = "ok";
};

inline DensityMatrix sweep_state(const SweepConfig& cfg, double p) {
    return cfg.model == NoiseModel::werner ? states::werner(p, cfg.base) : states::phi_mixture(p, cfg.base);
}

inline SweepRow sweep_point(const SweepConfig& cfg, std::size_t index) {
    SweepRow row;
    row.param = cfg.grid[index];
    std::vector<std::string> problems;
    try {
        const DensityMatrix state = sweep_state(cfg, row.param);
        ProtocolConfig pc{cfg.phi, state, cfg.mode, cfg.samples, CounterRng::mix(cfg.seed ^ index)};
        ProjectedProcess process = cfg.samples ? [&] {
            SampledProcess sp = sampled_process_tomography(pc);
            return ProjectedProcess{std::move(sp.raw), std::move(sp.chi)};
        }()
                                               : rsp_process_tomography(pc);
        Analysis a = analyze_process(std::move(process), cfg.phi, cfg.mode, cfg.tol);
        add_correlations(state, a);
        row.alpha = a.capability->alpha;
        row.beta = a.capability->beta;
        row.avg_state_fidelity = a.capability->avg_state_fidelity;
        row.discord = a.discord;
        row.steerable_weight = a.steerable_weight;
        if (!row.alpha) problems.push_back("alpha: " + a.capability->alpha_diag.status);
        if (!row.beta) problems.push_back("beta: " + a.capability->beta_diag.status);
        if (!a.capability->classical_avg_fidelity) problems.push_back("bound: " + a.capability->bound_diag.status);
        if (!row.steerable_weight) problems.push_back("sw: " + a.steering_status);
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    if (!problems.empty()) {
        row.status.clear();
        for (const auto& p : problems) row.status += (row.status.empty() ? "" : "; ") + p;
    }
    return row;
}

/// Grid points run on a small thread pool; rows come back in grid order.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    std::vector<SweepRow> rows(cfg.grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = sweep_point(cfg, i);
    };
    unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1)));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    return rows;
}

inline std::string format_number(const std::optional<double>& v) {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", *v);
    return buf;
}

inline std::string csv_field(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

inline constexpr const char* kSweepHeader = "param,alpha,beta,avg_state_fidelity,discord,steerable_weight,status";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto& r : rows) {
        out += format_number(r.param) + "," + format_number(r.alpha) + "," + format_number(r.beta) + "," +
               format_number(r.avg_state_fidelity) + "," + format_number(r.discord) + "," +
               format_number(r.steerable_weight) + "," + csv_field(r.status) + "\n";
    }
    return out;
}

inline json sweep_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"param", r.param},
                       {"alpha", io::optional_to_json(r.alpha)},
                       {"beta", io::optional_to_json(r.beta)},
                       {"avg_state_fidelity", io::optional_to_json(r.avg_state_fidelity)},
                       {"discord", io::optional_to_json(r.discord)},
                       {"steerable_weight", io::optional_to_json(r.steerable_weight)},
                       {"status", r.status}});
    }
    return {{"rows", arr}};
}

/// Parses CSV written by sweep_csv.
inline std::vector<SweepRow> sweep_from_csv(const std::string& text) {
    std::vector<SweepRow> rows;
    std::size_t pos = text.find('\n');
    if (pos == std::string::npos || text.substr(0, pos) != kSweepHeader) throw ValidationError("unexpected sweep CSV header");
    auto num = [](const std::string& f) -> std::optional<double> {
        if (f.empty()) return std::nullopt;
        return std::stod(f);
    };
    while (++pos < text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::string line = text.substr(pos, end - pos);
        std::vector<std::string> f;
        std::size_t a = 0;
        for (int k = 0; k < 6; ++k) {
            const std::size_t c = line.find(',', a);
            if (c == std::string::npos) throw ValidationError("sweep CSV row has too few fields");
            f.push_back(line.substr(a, c - a));
            a = c + 1;
        }
        f.push_back(line.substr(a));
        SweepRow r;
        r.param = std::stod(f[0]);
        r.alpha = num(f[1]);
        r.beta = num(f[2]);
        r.avg_state_fidelity = num(f[3]);
        r.discord = num(f[4]);
        r.steerable_weight = num(f[5]);
        r.status = f[6];
        rows.push_back(std::move(r));
        if (end == std::string::npos) break;
        pos = end;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Bloch cloud

struct CloudPoint {
    BlochVector input, output, classical;
};

struct BlochCloud {
    double phi = 0.0;
    std::uint64_t seed = 0;
    std::vector<CloudPoint> points;
    double mean_length = 0.0;
    double mean_length_classical = 0.0;
};

/// Uniform point on the sphere from two uniforms.
inline BlochVector uniform_sphere_point(CounterRng& rng) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double az = 2.0 * std::numbers::pi * rng.uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(az), r * std::sin(az), z};
}

inline BlochVector output_bloch(const ComplexMatrix& chi, const BlochVector& in) {
    const ComplexMatrix rho = (pauli::identity() + in.s1 * pauli::x() + in.s2 * pauli::y() + in.s3 * pauli::z()) / 2.0;
    ComplexMatrix out = apply_chi_matrix(chi, rho);
    out /= real_trace(out);
    return {(pauli::x() * out).trace().real(), (pauli::y() * out).trace().real(), (pauli::z() * out).trace().real()};
}

/// Outputs of the measured process and of the best classical process (the
/// fidelity-bound witness) for `count` random pure inputs.
inline BlochCloud bloch_cloud(const ProcessMatrix& chi, double phi, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("point count must be at least 1");
    const ProcessMatrix measured = chi.normalized_copy();
    const FidelityBound bound = classical_fidelity_bound(ideal_rsp_chi(rotation_unitary(phi)));
    const ComplexMatrix classical = classical_chi_matrix(bound.detail.witness);
    BlochCloud c;
    c.phi = phi;
    c.seed = seed;
    CounterRng rng(seed, 0);
    for (std::size_t i = 0; i < count; ++i) {
        CloudPoint p;
        p.input = uniform_sphere_point(rng);
        p.output = output_bloch(measured.chi(), p.input);
        p.classical = output_bloch(classical, p.input);
        c.mean_length += p.output.norm() / static_cast<double>(count);
        c.mean_length_classical += p.classical.norm() / static_cast<double>(count);
        c.points.push_back(p);
    }
    return c;
}

inline json bloch_to_json(const BlochVector& v) { return json::array({v.s1, v.s2, v.s3}); }

inline BlochVector bloch_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ValidationError("Bloch vector must have 3 entries");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json cloud_to_json(const BlochCloud& c, const std::string& state_label) {
    json pts = json::array();
    for (const auto& p : c.points) {
        pts.push_back({{"input", bloch_to_json(p.input)}, {"output", bloch_to_json(p.output)}, {"classical", bloch_to_json(p.classical)}});
    }
    return {{"state", state_label},
            {"phi", c.phi},
            {"seed", c.seed},
            {"count", c.points.size()},
            {"mean_length", c.mean_length},
            {"mean_length_classical", c.mean_length_classical},
            {"points", pts}};
}

inline BlochCloud cloud_from_json(const json& j) {
    try {
        BlochCloud c;
        c.phi = j.at("phi").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.mean_length = j.at("mean_length").get<double>();
        c.mean_length_classical = j.at("mean_length_classical").get<double>();
        for (const auto& p : j.at("points")) {
            c.points.push_back({bloch_from_json(p.at("input")), bloch_from_json(p.at("output")), bloch_from_json(p.at("classical"))});
        }
        if (c.points.size() != j.at("count").get<std::size_t>()) throw ValidationError("point count mismatch");
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bloch cloud: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo report

inline json mc_report(const DensityMatrix& state, const std::string& state_label, double phi, ProtocolMode mode,
                      std::uint64_t samples, std::uint64_t seed, double tol, bool with_exact, bool& solver_failed) {
    ProtocolConfig cfg{phi, state, mode, samples, seed};
    SampledProcess sp = sampled_process_tomography(cfg);
    Analysis sampled = analyze_process({sp.raw, sp.chi}, phi, mode, tol);
    json j = analysis_to_json(sampled, state_label);
    j["shots"] = samples;
    j["seed"] = seed;
    j["tomography"] = io::tomography_to_json(sp.data);
    solver_failed = sampled.solver_failed();
    if (with_exact) {
        Analysis exact = analyze_process(rsp_process_tomography({phi, state, mode, std::nullopt, 0}), phi, mode, tol);
        solver_failed = solver_failed || exact.solver_failed();
        auto delta = [](const std::optional<double>& a, const std::optional<double>& b) {
            return a && b ? json(*a - *b) : json(nullptr);
        };
        const auto& s = *sampled.capability;
        const auto& e = *exact.capability;
        j["exact"] = {{"alpha", io::optional_to_json(e.alpha)},
                      {"beta", io::optional_to_json(e.beta)},
                      {"avg_state_fidelity", e.avg_state_fidelity}};
        j["deltas"] = {{"alpha", delta(s.alpha, e.alpha)},
                       {"beta", delta(s.beta, e.beta)},
                       {"avg_state_fidelity", s.avg_state_fidelity - e.avg_state_fidelity},
                       {"process_trace_distance",
                        trace_distance(sampled.process->projected.chi(), exact.process->projected.chi())}};
    }
    return j;
}

}  // namespace rspcap::commands
