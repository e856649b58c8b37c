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

// JSON encodings:
//   density matrix   {"dim": n, "re": [[...]], "im": [[...]]}
//   process matrix   {"basis": ["I","X","-iY","Z"], "re": ..., "im": ..., "normalized": bool}
//   tomography data  {"shots", "seed", "phi", "mode", "inputs": [...], "counts": {"n,m|a|m',b": int}}
//   classical model  {"rho_tilde": [{"re", "im"} x 8], "weights": [...]}

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rspcap/capability.hpp"
#include "rspcap/channels.hpp"
#include "rspcap/errors.hpp"
#include "rspcap/protocol.hpp"
#include "rspcap/sdp.hpp"
#include "rspcap/states.hpp"

namespace rspcap::io {

using json = nlohmann::json;

inline json matrix_part(const ComplexMatrix& m, bool imag) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(imag ? m(i, j).imag() : m(i, j).real());
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json matrix_to_json(const ComplexMatrix& m) { return {{"re", matrix_part(m, false)}, {"im", matrix_part(m, true)}}; }

/// Reads {"re", "im"} (im optional) as an n x n matrix.
inline ComplexMatrix matrix_from_json(const json& j, int n) {
    if (!j.is_object() || !j.contains("re")) throw ValidationError("matrix object needs a \"re\" field");
    const json& re = j.at("re");
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    auto check_rows = [n](const json& part, const char* what) {
        if (!part.is_array() || static_cast<int>(part.size()) != n) {
            throw ValidationError(std::string("\"") + what + "\" must have " + std::to_string(n) + " rows");
        }
        for (const auto& row : part) {
            if (!row.is_array() || static_cast<int>(row.size()) != n) {
                throw ValidationError(std::string("\"") + what + "\" rows must have " + std::to_string(n) + " entries");
            }
            for (const auto& v : row)
                if (!v.is_number()) throw ValidationError(std::string("\"") + what + "\" entries must be numbers");
        }
    };
    check_rows(re, "re");
    if (im) check_rows(*im, "im");
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double r = re[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
            const double c = im ? (*im)[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>() : 0.0;
            m(i, k) = cplx(r, c);
        }
    }
    if (!all_finite(m)) throw ValidationError("matrix has non-finite entries");
    return m;
}

inline json density_to_json(const DensityMatrix& rho) {
    json j = matrix_to_json(rho.matrix());
    j["dim"] = rho.dim();
    return j;
}

/// Hermitian, PSD and unit trace within 1e-6, then projected by nearest_density.
inline DensityMatrix density_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.at("dim").is_number_integer()) {
        throw ValidationError("density matrix needs an integer \"dim\"");
    }
    const int n = j.at("dim").get<int>();
    if (n != 2 && n != 4) throw ValidationError("density matrix dimension must be 2 or 4");
    const ComplexMatrix m = matrix_from_json(j, n);
    if (!is_hermitian(m, kSampledTol)) throw ValidationError("density matrix is not Hermitian within 1e-6");
    if (min_eigenvalue(hermitian_part(m)) < -kSampledTol) throw ValidationError("density matrix has negative eigenvalues");
    if (std::abs(real_trace(m) - 1.0) > kSampledTol) throw ValidationError("density matrix trace is not 1 within 1e-6");
    return nearest_density(m);
}

inline json process_to_json(const ProcessMatrix& chi) {
    json j = matrix_to_json(chi.chi());
    j["basis"] = {"I", "X", "-iY", "Z"};
    j["normalized"] = chi.normalized();
    return j;
}

inline ProcessMatrix process_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("process matrix must be a JSON object");
    if (j.contains("basis") && j.at("basis") != json({"I", "X", "-iY", "Z"})) {
        throw ValidationError("process matrix basis must be [\"I\",\"X\",\"-iY\",\"Z\"]");
    }
    try {
        ProcessMatrix chi = ProcessMatrix::from_matrix(matrix_from_json(j, 4), kSampledTol);
        if (j.contains("normalized") && j.at("normalized").is_boolean() && j.at("normalized").get<bool>() && !chi.normalized()) {
            throw ValidationError("process matrix marked normalized has trace != 1");
        }
        return chi;
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

inline const char* to_string(ProtocolMode m) { return m == ProtocolMode::heralded ? "heralded" : "deterministic"; }

inline ProtocolMode mode_from_string(const std::string& s) {
    if (s == "deterministic") return ProtocolMode::deterministic;
    if (s == "heralded") return ProtocolMode::heralded;
    throw ValidationError("unknown protocol mode '" + s + "'");
}

inline json tomography_to_json(const TomographyData& d) {
    json inputs = json::array();
    for (const auto& s : all_settings()) inputs.push_back(std::to_string(s.n) + "," + std::to_string(s.m));
    json counts = json::object();
    for (const auto& [k, v] : d.counts) counts[k.str()] = v;
    return {{"shots", d.shots}, {"seed", d.seed}, {"phi", d.phi}, {"mode", to_string(d.mode)}, {"inputs", inputs}, {"counts", counts}};
}

inline TomographyData tomography_from_json(const json& j) {
    if (!j.is_object() || !j.contains("counts") || !j.at("counts").is_object()) {
        throw ValidationError("tomography data needs a \"counts\" object");
    }
    TomographyData d;
    try {
        d.shots = j.at("shots").get<std::uint64_t>();
        d.seed = j.value("seed", std::uint64_t{0});
        d.phi = j.value("phi", 0.0);
        d.mode = mode_from_string(j.value("mode", std::string("deterministic")));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("tomography header: ") + e.what());
    }
    for (const auto& [k, v] : j.at("counts").items()) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ValidationError("count '" + k + "' must be a non-negative integer");
        }
        d.counts[CountKey::parse(k)] = v.get<std::uint64_t>();
    }
    d.validate();
    return d;
}

inline json model_to_json(const ClassicalModel& m) {
    json states = json::array();
    for (const auto& r : m.rho_tilde) states.push_back(matrix_to_json(r));
    const auto w = m.weights();
    return {{"rho_tilde", states}, {"weights", json(std::vector<double>(w.begin(), w.end()))}};
}

inline ClassicalModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rho_tilde") || !j.at("rho_tilde").is_array() || j.at("rho_tilde").size() != 8) {
        throw ValidationError("classical model needs 8 \"rho_tilde\" matrices");
    }
    ClassicalModel m;
    for (std::size_t l = 0; l < 8; ++l) m.rho_tilde[l] = matrix_from_json(j.at("rho_tilde")[l], 2);
    return m;
}

template <class T>
json optional_to_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json diagnostics_to_json(const SolverDiagnostics& d) {
    return {{"status", d.status},
            {"gap", std::isfinite(d.gap) ? json(d.gap) : json(nullptr)},
            {"shift", d.shift},
            {"newton_steps", d.newton_steps},
            {"facial_reductions", d.facial_reductions},
            {"certified", d.certified}};
}

inline json capability_to_json(const CapabilityReport& r) {
    json witnesses = json::object();
    if (r.alpha_witness) witnesses["alpha"] = model_to_json(*r.alpha_witness);
    if (r.beta_witness) witnesses["beta"] = model_to_json(*r.beta_witness);
    if (r.bound_witness) witnesses["fidelity_bound"] = model_to_json(*r.bound_witness);
    return {{"alpha", optional_to_json(r.alpha)},
            {"beta", optional_to_json(r.beta)},
            {"avg_state_fidelity", r.avg_state_fidelity},
            {"classical_process_fidelity", optional_to_json(r.classical_process_fidelity)},
            {"classical_avg_fidelity", optional_to_json(r.classical_avg_fidelity)},
            {"published_fidelity_bound", kPublishedFidelityBound},
            {"classical_flag", optional_to_json(r.classical_flag)},
            {"fidelity_nonclassical_flag", r.fidelity_nonclassical_flag},
            {"tolerance", r.tolerance},
            {"diagnostics",
             {{"alpha", diagnostics_to_json(r.alpha_diag)},
              {"beta", diagnostics_to_json(r.beta_diag)},
              {"fidelity_bound", diagnostics_to_json(r.bound_diag)}}},
            {"witnesses", witnesses}};
}

template <class T>
std::optional<T> optional_from_json(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

inline SolverDiagnostics diagnostics_from_json(const json& j) {
    SolverDiagnostics d;
    d.status = j.value("status", std::string());
    d.gap = j.contains("gap") && !j.at("gap").is_null() ? j.at("gap").get<double>() : NAN;
    d.shift = j.value("shift", 0.0);
    d.newton_steps = j.value("newton_steps", 0);
    d.facial_reductions = j.value("facial_reductions", 0);
    d.certified = j.value("certified", false);
    return d;
}

inline CapabilityReport capability_from_json(const json& j) {
    try {
        CapabilityReport r;
        r.alpha = optional_from_json<double>(j, "alpha");
        r.beta = optional_from_json<double>(j, "beta");
        r.avg_state_fidelity = j.at("avg_state_fidelity").get<double>();
        r.classical_process_fidelity = optional_from_json<double>(j, "classical_process_fidelity");
        r.classical_avg_fidelity = optional_from_json<double>(j, "classical_avg_fidelity");
        r.classical_flag = optional_from_json<bool>(j, "classical_flag");
        r.fidelity_nonclassical_flag = j.at("fidelity_nonclassical_flag").get<bool>();
        r.tolerance = j.value("tolerance", kDefaultClassicalTol);
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            if (d.contains("alpha")) r.alpha_diag = diagnostics_from_json(d.at("alpha"));
            if (d.contains("beta")) r.beta_diag = diagnostics_from_json(d.at("beta"));
            if (d.contains("fidelity_bound")) r.bound_diag = diagnostics_from_json(d.at("fidelity_bound"));
        }
        if (j.contains("witnesses")) {
            const auto& w = j.at("witnesses");
            if (w.contains("alpha")) r.alpha_witness = model_from_json(w.at("alpha"));
            if (w.contains("beta")) r.beta_witness = model_from_json(w.at("beta"));
            if (w.contains("fidelity_bound")) r.bound_witness = model_from_json(w.at("fidelity_bound"));
        }
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("capability report: ") + e.what());
    }
}

/// Problem dump for debugging and cross-checking with other solvers.
inline json problem_to_json(const sdp::Problem& p) {
    auto scalar = [](const sdp::AffineScalar& s) {
        json terms = json::object();
        for (const auto& [k, v] : s.terms) terms[std::to_string(k)] = v;
        return json{{"constant", s.constant}, {"terms", terms}};
    };
    json vars = json::array();
    for (const auto& v : p.variables()) vars.push_back({{"name", v.name}, {"dim", v.dim}, {"offset", v.offset}});
    json eqs = json::array();
    for (const auto& e : p.equalities()) eqs.push_back({{"name", e.name}, {"lhs", scalar(e.lhs)}, {"target", e.target}});
    json psd = json::array();
    for (const auto& c : p.psd_constraints()) {
        json terms = json::object();
        for (const auto& [k, m] : c.expr.terms()) terms[std::to_string(k)] = matrix_to_json(m);
        psd.push_back({{"name", c.name}, {"dim", c.expr.rows()}, {"constant", matrix_to_json(c.expr.constant())}, {"terms", terms}});
    }
    return {{"sense", p.sense() == sdp::Sense::maximize ? "maximize" : "minimize"},
            {"coordinates", p.num_coordinates()},
            {"coordinate_layout", "per block: diagonal entries, then Re/Im of each upper entry (i<j, row-major)"},
            {"variables", vars},
            {"objective", scalar(p.objective())},
            {"equalities", eqs},
            {"psd", psd}};
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

/// Writes to a sibling temporary file and renames, so a failed run never
/// leaves a partial file behind.
inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << text;
        if (!out) throw ValidationError("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace rspcap::io
