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

// Classical preparation model and the three capability measures.
//
// A classical sender holds one of eight predetermined outcome triples v_lambda
// (one sign per Pauli basis) and the receiver holds a matching state rho_lambda.
// With rho~_lambda = 2 p(lambda) rho_lambda, the receiver's state for input
// |n>_m is the sum of rho~_lambda over the four lambda with v_lambda[m] = (-1)^n.

#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rspcap/channels.hpp"
#include "rspcap/errors.hpp"
#include "rspcap/linalg.hpp"
#include "rspcap/sdp.hpp"
#include "rspcap/states.hpp"

namespace rspcap {

inline constexpr int kNumHidden = 8;

/// v_lambda[m] for lambda in 1..8, m in 1..3, ordered (+++), (++-), ..., (---).
inline int outcome_sign(int lambda, int m) {
    if (lambda < 1 || lambda > kNumHidden) throw DomainError("lambda must be in 1..8");
    if (m < 1 || m > 3) throw DomainError("Pauli index must be 1, 2 or 3");
    return ((lambda - 1) >> (3 - m)) & 1 ? -1 : 1;
}

/// True when lambda contributes to the receiver state for setting s.
inline bool contributes(int lambda, const MeasurementSetting& s) { return outcome_sign(lambda, s.m) == s.value(); }

struct ClassicalModel {
    std::array<ComplexMatrix, kNumHidden> rho_tilde;  ///< 2 p(lambda) rho_lambda

    static ClassicalModel from_weights(const std::array<double, kNumHidden>& p,
                                       const std::array<DensityMatrix, kNumHidden>& rho) {
        ClassicalModel m;
        for (std::size_t l = 0; l < kNumHidden; ++l) {
            if (p[l] < 0) throw DomainError("hidden-variable weights must be non-negative");
            if (rho[l].dim() != 2 || !rho[l].is_normalized(1e-9)) throw DomainError("hidden states must be normalized qubit states");
            m.rho_tilde[l] = 2.0 * p[l] * rho[l].matrix();
        }
        return m;
    }

    /// p(lambda) = tr(rho~_lambda) / 2
    std::array<double, kNumHidden> weights() const {
        std::array<double, kNumHidden> p{};
        for (std::size_t l = 0; l < kNumHidden; ++l) p[l] = real_trace(rho_tilde[l]) / 2.0;
        return p;
    }

    double total_weight() const {
        const auto p = weights();
        double s = 0;
        for (double v : p) s += v;
        return s;
    }

    /// Hermitian and PSD within `tol`.
    void validate(double tol = 1e-9) const {
        for (const auto& r : rho_tilde) {
            if (r.rows() != 2 || r.cols() != 2) throw ModelInconsistencyError("hidden states must be 2x2");
            if (!is_hermitian(r, tol) || min_eigenvalue(r) < -tol) {
                throw ModelInconsistencyError("hidden state is not positive semidefinite");
            }
        }
    }
};

template <class M>
std::array<M, 6> conditional_sums(std::span<const M, kNumHidden> rho_tilde) {
    std::array<M, 6> out;
    for (const auto& s : all_settings()) {
        M acc = M(ComplexMatrix::Zero(2, 2));
        for (int l = 1; l <= kNumHidden; ++l)
            if (contributes(l, s)) acc = acc + rho_tilde[static_cast<std::size_t>(l - 1)];
        out[static_cast<std::size_t>(s.index())] = acc;
    }
    return out;
}

/// The six unnormalized receiver states, indexed by MeasurementSetting::index().
inline BasisOutputs classical_conditional_states(const ClassicalModel& model) {
    return conditional_sums<ComplexMatrix>(std::span<const ComplexMatrix, kNumHidden>(model.rho_tilde));
}

/// Process matrix of the model without range checks on its trace.
inline ComplexMatrix classical_chi_matrix(const ClassicalModel& model) {
    return chi_matrix_from_basis_outputs(classical_conditional_states(model));
}

inline ProcessMatrix classical_chi(const ClassicalModel& model) {
    model.validate();
    const ComplexMatrix chi = classical_chi_matrix(model);
    if (min_eigenvalue(chi) < -1e-9) throw ModelInconsistencyError("classical process matrix is not PSD");
    if (model.total_weight() > 1.0 + 1e-9) throw ModelInconsistencyError("hidden-variable weights exceed 1");
    return ProcessMatrix::from_matrix(chi, 1e-9);
}

/// Output for a single-qubit input; the identity term averages the three bases.
inline DensityMatrix classical_output_state(const ClassicalModel& model, const DensityMatrix& rho_s0) {
    const ComplexMatrix out = apply_by_decomposition_matrix(classical_conditional_states(model), density_to_bloch(rho_s0));
    return DensityMatrix::from_matrix(out, 1e-9);
}

// ---------------------------------------------------------------------------
// SDP formulations

/// Variables and the constraints shared by all three programs.
struct ClassicalProgram {
    sdp::Problem problem;
    std::array<sdp::AffineMatrix, kNumHidden> rho_tilde;
    sdp::AffineMatrix chi;

    ClassicalProgram() {
        for (int l = 0; l < kNumHidden; ++l) {
            rho_tilde[static_cast<std::size_t>(l)] = problem.add_variable("rho_tilde_" + std::to_string(l + 1), 2);
            problem.add_psd("rho_tilde_" + std::to_string(l + 1) + " >= 0", rho_tilde[static_cast<std::size_t>(l)]);
        }
        const auto cond = conditional_sums<sdp::AffineMatrix>(std::span<const sdp::AffineMatrix, kNumHidden>(rho_tilde));
        chi = sdp::lift(
            [](std::span<const ComplexMatrix> six) {
                BasisOutputs o;
                std::copy(six.begin(), six.end(), o.begin());
                return chi_matrix_from_basis_outputs(o);
            },
            cond);
        problem.add_psd("chi_c >= 0", chi);
        for (int m = 1; m <= 3; ++m) {
            problem.add_equality("balance m=" + std::to_string(m),
                                 sdp::real_trace(cond[static_cast<std::size_t>(MeasurementSetting(0, m).index())]) -
                                     sdp::real_trace(cond[static_cast<std::size_t>(MeasurementSetting(1, m).index())]),
                                 0.0);
        }
    }

    ClassicalModel witness(const sdp::Solution& sol) const {
        ClassicalModel m;
        for (std::size_t l = 0; l < kNumHidden; ++l) m.rho_tilde[l] = hermitian_part(sol.value_of(rho_tilde[l]));
        return m;
    }
};

struct MeasureResult {
    double value = 0.0;  ///< clamped to the measure's range
    ClassicalModel witness;
    sdp::Solution solution;
    sdp::Certificate certificate;
};

namespace detail {

inline MeasureResult run_measure(const ClassicalProgram& prog, const char* what) {
    MeasureResult r;
    r.solution = sdp::solve(prog.problem);
    if (!r.solution.optimal()) {
        throw SolverError(std::string(what) + ": " + sdp::to_string(r.solution.status) + " (" + r.solution.message + ")");
    }
    r.certificate = sdp::verify(prog.problem, r.solution);
    r.witness = prog.witness(r.solution);
    return r;
}

inline void require_normalized(const ProcessMatrix& chi) {
    if (!chi.normalized()) throw DomainError("capability measures require a normalized process matrix");
}

}  // namespace detail

/// Smallest non-classical share: minimize 1 - tr chi_c with chi_E - chi_c >= 0.
inline MeasureResult rsp_composition_alpha(const ProcessMatrix& chi_e) {
    detail::require_normalized(chi_e);
    ClassicalProgram prog;
    prog.problem.minimize(1.0 - sdp::real_trace(prog.chi));
    prog.problem.add_psd("chi_E - chi_c >= 0", sdp::AffineMatrix(chi_e.chi()) - prog.chi);
    MeasureResult r = detail::run_measure(prog, "alpha");
    r.value = std::clamp(r.solution.value, 0.0, 1.0);
    return r;
}

/// Smallest noise weight: minimize tr chi_c - 1 with chi_c - chi_E >= 0, tr chi_c >= 1.
inline MeasureResult rsp_robustness_beta(const ProcessMatrix& chi_e) {
    detail::require_normalized(chi_e);
    ClassicalProgram prog;
    prog.problem.minimize(sdp::real_trace(prog.chi) - 1.0);
    prog.problem.add_psd("chi_c - chi_E >= 0", prog.chi - sdp::AffineMatrix(chi_e.chi()));
    prog.problem.add_nonnegative("tr chi_c >= 1", sdp::real_trace(prog.chi) - 1.0);
    MeasureResult r = detail::run_measure(prog, "beta");
    r.value = std::max(r.solution.value, 0.0);
    return r;
}

struct FidelityBound {
    double process_fidelity = 0.0;  ///< F_Ec
    double avg_state_fidelity = 0.0;
    MeasureResult detail;
};

/// Best classical process fidelity with a unitary target.
inline FidelityBound classical_fidelity_bound(const ProcessMatrix& target) {
    detail::require_normalized(target);
    if (!target.is_rank_one()) throw UnsupportedComparisonError("fidelity bound requires a pure (rank-1) target process");
    ClassicalProgram prog;
    prog.problem.maximize(sdp::inner(prog.chi, target.chi()));
    prog.problem.add_equality("tr chi_c = 1", sdp::real_trace(prog.chi), 1.0);
    MeasureResult r = detail::run_measure(prog, "fidelity bound");
    r.value = std::clamp(r.solution.value, 0.0, 1.0);
    return {r.value, avg_state_fidelity_from_process(r.value), std::move(r)};
}

inline double avg_state_fidelity_of(const ProcessMatrix& chi_e, const UnitaryGate& u) {
    detail::require_normalized(chi_e);
    const double f = std::clamp((chi_e.chi() * ideal_rsp_chi(u).chi()).trace().real(), 0.0, 1.0);
    return avg_state_fidelity_from_process(f);
}

/// Printed value of the classical average-fidelity limit.
inline constexpr double kPublishedFidelityBound = 0.789;
inline constexpr double kDefaultClassicalTol = 1e-5;

/// RSPCAP_TOL, or the default when unset or unparsable.
inline double classical_tolerance_from_env() {
    const char* env = std::getenv("RSPCAP_TOL");
    if (!env) return kDefaultClassicalTol;
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || !(v > 0) || !std::isfinite(v)) return kDefaultClassicalTol;
    return v;
}

struct SolverDiagnostics {
    std::string status;  ///< "optimal", solver status, or the error text
    double gap = NAN;
    double shift = 0.0;
    int newton_steps = 0;
    int facial_reductions = 0;
    bool certified = false;
};

struct CapabilityReport {
    std::optional<double> alpha;
    std::optional<double> beta;
    double avg_state_fidelity = 0.0;
    std::optional<double> classical_process_fidelity;
    std::optional<double> classical_avg_fidelity;  ///< threshold for the fidelity flag
    std::optional<bool> classical_flag;            ///< alpha <= tol and beta <= tol
    bool fidelity_nonclassical_flag = false;
    double tolerance = kDefaultClassicalTol;
    SolverDiagnostics alpha_diag, beta_diag, bound_diag;
    std::optional<ClassicalModel> alpha_witness, beta_witness, bound_witness;

    bool complete() const { return alpha && beta && classical_avg_fidelity; }
};

namespace detail {

inline SolverDiagnostics diagnostics_of(const MeasureResult& r) {
    const sdp::Solution& s = r.solution;
    return {sdp::to_string(s.status), s.gap, s.shift, s.newton_steps, s.facial_reductions, r.certificate.ok};
}

}  // namespace detail

/// Runs all three measures; a failing measure leaves its field empty and
/// records the failure in its diagnostics.
inline CapabilityReport analyze(const ProcessMatrix& chi_e, const UnitaryGate& target, double tol = kDefaultClassicalTol) {
    detail::require_normalized(chi_e);
    CapabilityReport rep;
    rep.tolerance = tol;
    rep.avg_state_fidelity = avg_state_fidelity_of(chi_e, target);
    try {
        auto a = rsp_composition_alpha(chi_e);
        rep.alpha = a.value;
        rep.alpha_diag = detail::diagnostics_of(a);
        rep.alpha_witness = a.witness;
    } catch (const SolverError& e) {
        rep.alpha_diag.status = e.what();
    }
    try {
        auto b = rsp_robustness_beta(chi_e);
        rep.beta = b.value;
        rep.beta_diag = detail::diagnostics_of(b);
        rep.beta_witness = b.witness;
    } catch (const SolverError& e) {
        rep.beta_diag.status = e.what();
    }
    try {
        auto f = classical_fidelity_bound(ideal_rsp_chi(target));
        rep.classical_process_fidelity = f.process_fidelity;
        rep.classical_avg_fidelity = f.avg_state_fidelity;
        rep.bound_diag = detail::diagnostics_of(f.detail);
        rep.bound_witness = f.detail.witness;
    } catch (const SolverError& e) {
        rep.bound_diag.status = e.what();
    }
    if (rep.alpha && rep.beta) rep.classical_flag = *rep.alpha <= tol && *rep.beta <= tol;
    rep.fidelity_nonclassical_flag = rep.avg_state_fidelity > rep.classical_avg_fidelity.value_or(kPublishedFidelityBound);
    return rep;
}

}  // namespace rspcap
