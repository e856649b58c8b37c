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

// Static correlation measures of a two-qubit state: geometric discord
// (measurement on A) and steerable weight of the Pauli assemblage on B.

#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "rspcap/capability.hpp"
#include "rspcap/errors.hpp"
#include "rspcap/linalg.hpp"
#include "rspcap/protocol.hpp"
#include "rspcap/sdp.hpp"
#include "rspcap/states.hpp"

namespace rspcap {

struct BlochCorrelation {
    Eigen::Vector3d x;  ///< x_i = tr(rho (sigma_i (x) I))
    Eigen::Matrix3d a;  ///< A_ij = tr(rho (sigma_i (x) sigma_j))
};

inline BlochCorrelation bloch_correlation_decomposition(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw DomainError("correlation tensor requires a two-qubit state");
    if (!rho.is_normalized(1e-9)) throw DomainError("correlation tensor requires a normalized state");
    BlochCorrelation c;
    for (int i = 1; i <= 3; ++i) {
        c.x(i - 1) = (rho.matrix() * kron(pauli::sigma(i), pauli::identity())).trace().real();
        for (int j = 1; j <= 3; ++j) {
            c.a(i - 1, j - 1) = (rho.matrix() * kron(pauli::sigma(i), pauli::sigma(j))).trace().real();
        }
    }
    return c;
}

/// (1/4)[|x|^2 + tr(A^T A) - k_max], k_max the top eigenvalue of x x^T + A A^T.
inline double geometric_discord(const DensityMatrix& rho) {
    const BlochCorrelation c = bloch_correlation_decomposition(rho);
    const Eigen::Matrix3d k = c.x * c.x.transpose() + c.a * c.a.transpose();
    const double k_max = hermitian_eigen(k.cast<cplx>()).values(0);
    return std::max(0.0, 0.25 * (c.x.squaredNorm() + (c.a.transpose() * c.a).trace() - k_max));
}

/// Unnormalized receiver states after outcome n of sigma_m on A, indexed by
/// MeasurementSetting::index(); the trace of each is p(n|m).
class Assemblage {
  public:
    static Assemblage from_states(const std::array<DensityMatrix, 6>& states, double tol = kExactTol) {
        Assemblage a(states);
        a.validate(tol);
        return a;
    }

    const DensityMatrix& operator[](const MeasurementSetting& s) const { return states_[static_cast<std::size_t>(s.index())]; }
    const std::array<DensityMatrix, 6>& states() const { return states_; }

    /// Each basis sums to a unit-trace state, the same for every basis.
    void validate(double tol) const {
        ComplexMatrix first;
        for (int m = 1; m <= 3; ++m) {
            const ComplexMatrix sum = (*this)[{0, m}].matrix() + (*this)[{1, m}].matrix();
            if (std::abs(real_trace(sum) - 1.0) > tol) throw ValidationError("assemblage basis does not sum to trace 1");
            if (m == 1) {
                first = sum;
            } else if ((sum - first).cwiseAbs().maxCoeff() > tol) {
                throw ValidationError("assemblage violates no-signaling");
            }
        }
    }

    /// t * this + (1 - t) * other
    Assemblage mixed_with(const Assemblage& other, double t) const {
        states::check_unit_interval(t, "mixing weight");
        std::array<DensityMatrix, 6> out = states_;
        for (std::size_t i = 0; i < 6; ++i) {
            out[i] = DensityMatrix::from_matrix(t * states_[i].matrix() + (1.0 - t) * other.states_[i].matrix(), 1e-9);
        }
        return Assemblage(out);
    }

  private:
    explicit Assemblage(std::array<DensityMatrix, 6> s) : states_(std::move(s)) {}

    std::array<DensityMatrix, 6> states_;
};

inline Assemblage pauli_assemblage(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw DomainError("assemblage requires a two-qubit state");
    if (!rho.is_normalized(1e-9)) throw DomainError("assemblage requires a normalized state");
    auto branch = [&](int i) {
        return DensityMatrix::from_matrix(unnormalized_branch(rho, pauli_projector(MeasurementSetting::from_index(i))), 1e-9);
    };
    const std::array<DensityMatrix, 6> out{branch(0), branch(1), branch(2), branch(3), branch(4), branch(5)};
    return Assemblage::from_states(out, 1e-9);
}

struct SteeringResult {
    double value = 0.0;  ///< steerable weight in [0, 1]
    std::array<ComplexMatrix, kNumHidden> lhs_states;
    sdp::Solution solution;
    sdp::Certificate certificate;
};

/// 1 - max sum_lambda tr(sigma_lambda) over local-hidden-state models that
/// fit under the assemblage: rho'_nm - sum_{lambda: v_lambda[m] = (-1)^n} sigma_lambda >= 0.
inline SteeringResult steerable_weight(const Assemblage& assemblage) {
    sdp::Problem p;
    std::array<sdp::AffineMatrix, kNumHidden> sigma;
    sdp::AffineScalar total;
    for (int l = 0; l < kNumHidden; ++l) {
        sigma[static_cast<std::size_t>(l)] = p.add_variable("sigma_" + std::to_string(l + 1), 2);
        p.add_psd("sigma_" + std::to_string(l + 1) + " >= 0", sigma[static_cast<std::size_t>(l)]);
        total += sdp::real_trace(sigma[static_cast<std::size_t>(l)]);
    }
    const auto sums = conditional_sums<sdp::AffineMatrix>(std::span<const sdp::AffineMatrix, kNumHidden>(sigma));
    for (const auto& s : all_settings()) {
        p.add_psd("rho'_" + std::to_string(s.n) + std::to_string(s.m) + " - lhs >= 0",
                  sdp::AffineMatrix(assemblage[s].matrix()) - sums[static_cast<std::size_t>(s.index())]);
    }
    p.maximize(total);

    SteeringResult r;
    r.solution = sdp::solve(p);
    if (!r.solution.optimal()) {
        throw SolverError(std::string("steerable weight: ") + sdp::to_string(r.solution.status) + " (" + r.solution.message + ")");
    }
    r.certificate = sdp::verify(p, r.solution);
    for (std::size_t l = 0; l < kNumHidden; ++l) r.lhs_states[l] = hermitian_part(r.solution.value_of(sigma[l]));
    r.value = std::clamp(1.0 - r.solution.value, 0.0, 1.0);
    return r;
}

inline SteeringResult steerable_weight(const DensityMatrix& rho) { return steerable_weight(pauli_assemblage(rho)); }

}  // namespace rspcap
