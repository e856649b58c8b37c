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

// Single-qubit process matrices in the operator basis
//   E_0 = I, E_1 = X, E_2 = -iY, E_3 = Z,
// so that a process acts as  rho -> sum_{mn} chi_{mn} E_m rho E_n^dagger.

#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "rspcap/errors.hpp"
#include "rspcap/linalg.hpp"
#include "rspcap/states.hpp"

namespace rspcap {

/// Outputs E(|n>_m<n|) indexed by MeasurementSetting::index().
using BasisOutputs = std::array<ComplexMatrix, 6>;

inline const std::array<ComplexMatrix, 4>& operator_basis() {
    static const std::array<ComplexMatrix, 4> basis = {pauli::identity(), pauli::x(), ComplexMatrix(-1i * pauli::y()),
                                                       pauli::z()};
    return basis;
}

class ProcessMatrix {
  public:
    /// Validates a 4x4 Hermitian PSD matrix with trace <= 1 (all within `tol`).
    static ProcessMatrix from_matrix(const ComplexMatrix& chi, double tol = 1e-9) {
        if (chi.rows() != 4 || chi.cols() != 4) throw DomainError("process matrix must be 4x4");
        if (!all_finite(chi)) throw ValidationError("process matrix has non-finite entries");
        if (!is_hermitian(chi, std::max(tol, 1e-10))) throw ValidationError("process matrix is not Hermitian");
        ComplexMatrix h = hermitian_part(chi);
        if (min_eigenvalue(h) < -tol) throw ValidationError("process matrix is not positive semidefinite");
        const double tr = real_trace(h);
        if (tr > 1.0 + tol) throw ValidationError("process matrix trace exceeds 1");
        return ProcessMatrix(std::move(h), std::abs(tr - 1.0) <= tol);
    }

    const ComplexMatrix& chi() const { return chi_; }
    double trace() const { return real_trace(chi_); }
    bool normalized() const { return normalized_; }

    ProcessMatrix normalized_copy() const {
        const double tr = trace();
        if (tr < 1e-12) throw ValidationError("cannot normalize a zero process matrix");
        return ProcessMatrix(chi_ / tr, true);
    }

    /// Largest eigenvalue carries (almost) all of the trace.
    bool is_rank_one(double tol = 1e-8) const {
        const auto eig = hermitian_eigen(chi_);
        return eig.values.size() > 1 && eig.values(1) <= tol * std::max(1.0, trace());
    }

  private:
    ProcessMatrix(ComplexMatrix chi, bool normalized) : chi_(std::move(chi)), normalized_(normalized) {}

    ComplexMatrix chi_;
    bool normalized_ = false;
};

class UnitaryGate {
  public:
    explicit UnitaryGate(const ComplexMatrix& u, double tol = 1e-12) : u_(u) {
        if (u.rows() != 2 || u.cols() != 2) throw DomainError("unitary gate must be 2x2");
        if ((u.adjoint() * u - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > tol) {
            throw DomainError("gate is not unitary");
        }
    }

    const ComplexMatrix& matrix() const { return u_; }

    static UnitaryGate identity() { return UnitaryGate(ComplexMatrix::Identity(2, 2)); }

  private:
    ComplexMatrix u_;
};

/// R(phi) = (|0><0| + e^{i phi}|1><0| + |0><1| - e^{i phi}|1><1|)/sqrt2
inline UnitaryGate rotation_unitary(double phi) {
    if (!std::isfinite(phi)) throw DomainError("rotation angle must be finite");
    const cplx e = std::polar(1.0, phi);
    const double r = 1.0 / std::sqrt(2.0);
    ComplexMatrix u(2, 2);
    u << r, r, r * e, -r * e;
    return UnitaryGate(u);
}

/// Lambda = (1/2) [[I, X], [X, -I]]
inline const ComplexMatrix& lambda_matrix() {
    static const ComplexMatrix lam = [] {
        ComplexMatrix l(4, 4);
        l.block(0, 0, 2, 2) = pauli::identity();
        l.block(0, 2, 2, 2) = pauli::x();
        l.block(2, 0, 2, 2) = pauli::x();
        l.block(2, 2, 2, 2) = -pauli::identity();
        return ComplexMatrix(l / 2.0);
    }();
    return lam;
}

/// Lambda [[rho00, rho01], [rho10, rho11]] Lambda for the four images of the
/// matrix units |i><j|.
inline ComplexMatrix sandwich_matrix_units(const ComplexMatrix& e00, const ComplexMatrix& e01, const ComplexMatrix& e10,
                                           const ComplexMatrix& e11) {
    ComplexMatrix center(4, 4);
    center.block(0, 0, 2, 2) = e00;
    center.block(0, 2, 2, 2) = e01;
    center.block(2, 0, 2, 2) = e10;
    center.block(2, 2, 2, 2) = e11;
    return lambda_matrix() * center * lambda_matrix();
}

/// Process matrix assembled from the six tomography outputs. Only the
/// |0>_3, |1>_3, |0>_1 and |0>_2 outputs enter; the image of |0><1| is
/// E(|0>_1) + i E(|0>_2) - (1+i)/2 [E(|0>_3) + E(|1>_3)], and the image of
/// |1><0| is formed literally as well, so inconsistent (non-Hermitian) input
/// shows up as a non-Hermitian result.
inline ComplexMatrix chi_matrix_from_basis_outputs(const BasisOutputs& out) {
    const auto& z0 = out[MeasurementSetting(0, 3).index()];
    const auto& z1 = out[MeasurementSetting(1, 3).index()];
    const auto& x0 = out[MeasurementSetting(0, 1).index()];
    const auto& y0 = out[MeasurementSetting(0, 2).index()];
    for (const auto& m : out) {
        if (m.rows() != 2 || m.cols() != 2) throw DomainError("tomography outputs must be 2x2");
    }
    const ComplexMatrix sum_z = z0 + z1;
    const ComplexMatrix e01 = x0 + 1i * y0 - (1.0 + 1i) / 2.0 * sum_z;
    const ComplexMatrix e10 = x0 - 1i * y0 - (1.0 - 1i) / 2.0 * sum_z;
    ComplexMatrix chi = sandwich_matrix_units(z0, e01, e10, z1);
    if (hermiticity_error(chi) > 1e-8) {
        throw InconsistentTomographyError("tomography outputs do not yield a Hermitian process matrix");
    }
    return hermitian_part(chi);
}

inline ProcessMatrix chi_from_basis_outputs(const BasisOutputs& out, double tol = 1e-9) {
    return ProcessMatrix::from_matrix(chi_matrix_from_basis_outputs(out), tol);
}

inline BasisOutputs to_basis_outputs(const std::array<DensityMatrix, 6>& states) {
    BasisOutputs out;
    for (std::size_t i = 0; i < 6; ++i) out[i] = states[i].matrix();
    return out;
}

/// Noisy tomography: the raw Eq.-(5) matrix, plus its PSD projection
/// (negative eigenvalues clipped, trace renormalized to 1).
struct ProjectedProcess {
    ComplexMatrix raw;
    ProcessMatrix projected;
};

inline ProjectedProcess project_process(const ComplexMatrix& raw) {
    const ComplexMatrix clipped = psd_clip(raw);
    const double tr = real_trace(clipped);
    if (tr <= 1e-14) throw ValidationError("process matrix has no positive part");
    return {raw, ProcessMatrix::from_matrix(hermitian_part(clipped / tr), 1e-9).normalized_copy()};
}

inline ComplexMatrix apply_chi_matrix(const ComplexMatrix& chi, const ComplexMatrix& rho) {
    const auto& e = operator_basis();
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int m = 0; m < 4; ++m) {
        for (int n = 0; n < 4; ++n) {
            if (chi(m, n) == cplx(0)) continue;
            out += chi(m, n) * e[static_cast<std::size_t>(m)] * rho * e[static_cast<std::size_t>(n)].adjoint();
        }
    }
    return out;
}

inline DensityMatrix apply_chi(const ProcessMatrix& chi, const DensityMatrix& rho) {
    if (rho.dim() != 2) throw DomainError("apply_chi requires a single-qubit state");
    return DensityMatrix::from_matrix(apply_chi_matrix(chi.chi(), rho.matrix()), 1e-9);
}

/// Output via Pauli decomposition of the input:
///   (1/2)[E(I) + sum_m s_m E(sigma_m)],
/// with E(I) averaged over the three bases and E(sigma_m) = sum_n v_nm E(|n>_m<n|).
inline ComplexMatrix apply_by_decomposition_matrix(const BasisOutputs& out, const BlochVector& s) {
    ComplexMatrix e_identity = ComplexMatrix::Zero(2, 2);
    ComplexMatrix result = ComplexMatrix::Zero(2, 2);
    for (int m = 1; m <= 3; ++m) {
        const auto& o0 = out[MeasurementSetting(0, m).index()];
        const auto& o1 = out[MeasurementSetting(1, m).index()];
        e_identity += (o0 + o1) / 3.0;
        result += s[m] * (o0 - o1);
    }
    return (e_identity + result) / 2.0;
}

inline DensityMatrix apply_by_decomposition(const BasisOutputs& out, const DensityMatrix& rho_s0) {
    return DensityMatrix::from_matrix(apply_by_decomposition_matrix(out, density_to_bloch(rho_s0)), 1e-9);
}

/// Tomography of an arbitrary linear map on the six Pauli eigenstates.
inline BasisOutputs basis_outputs_of(const std::function<ComplexMatrix(const ComplexMatrix&)>& map) {
    BasisOutputs out;
    for (const auto& s : all_settings()) out[static_cast<std::size_t>(s.index())] = map(pauli_projector(s));
    return out;
}

/// Process matrix of rho -> U rho U^dagger via the matrix-unit sandwich.
inline ProcessMatrix ideal_rsp_chi(const UnitaryGate& gate) {
    const auto& u = gate.matrix();
    auto image = [&](int i, int j) {
        ComplexMatrix unit = ComplexMatrix::Zero(2, 2);
        unit(i, j) = 1.0;
        return ComplexMatrix(u * unit * u.adjoint());
    };
    return ProcessMatrix::from_matrix(sandwich_matrix_units(image(0, 0), image(0, 1), image(1, 0), image(1, 1)));
}

/// Sequential map: `first`, then `second`.
inline ProcessMatrix compose(const ProcessMatrix& second, const ProcessMatrix& first) {
    const BasisOutputs out = basis_outputs_of(
        [&](const ComplexMatrix& rho) { return apply_chi_matrix(second.chi(), apply_chi_matrix(first.chi(), rho)); });
    return ProcessMatrix::from_matrix(chi_matrix_from_basis_outputs(out), 1e-9);
}

/// tr(chi_a chi_b); one of the two must be a pure (rank-1) process.
inline double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
    if (!a.normalized() || !b.normalized()) throw DomainError("process fidelity requires normalized process matrices");
    if (!a.is_rank_one() && !b.is_rank_one()) {
        throw UnsupportedComparisonError("process fidelity is only defined here against a pure target process");
    }
    return (a.chi() * b.chi()).trace().real();
}

/// (2 F + 1) / 3
inline double avg_state_fidelity_from_process(double process_fid) {
    if (!(process_fid >= -1e-12 && process_fid <= 1.0 + 1e-12)) {
        throw DomainError("process fidelity must be in [0, 1]");
    }
    return (2.0 * process_fid + 1.0) / 3.0;
}

}  // namespace rspcap
