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

// Single- and two-qubit density matrices. Two-qubit operators are ordered
// A (x) B with A as the slow index, so |01> means A=0, B=1.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "rspcap/errors.hpp"
#include "rspcap/linalg.hpp"

namespace rspcap {

/// Hermitian PSD matrix of dimension 2 or 4. The trace is kept as
/// `trace_weight`; it is 1 for normalized states and smaller for the
/// subnormalized outputs of heralded or conditional preparations.
class DensityMatrix {
  public:
    /// Validates Hermiticity, positivity and trace (<= 1) within `tol`.
    static DensityMatrix from_matrix(const ComplexMatrix& m, double tol = kExactTol) {
        if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
            throw DomainError("density matrix must be 2x2 or 4x4");
        }
        if (!all_finite(m)) throw ValidationError("density matrix has non-finite entries");
        if (!is_hermitian(m, tol)) throw ValidationError("density matrix is not Hermitian");
        ComplexMatrix h = hermitian_part(m);
        if (min_eigenvalue(h) < -tol) throw ValidationError("density matrix is not positive semidefinite");
        const double tr = real_trace(h);
        if (tr > 1.0 + tol) throw ValidationError("density matrix trace exceeds 1");
        return DensityMatrix(std::move(h), std::max(tr, 0.0));
    }

    /// As `from_matrix`, additionally requiring unit trace.
    static DensityMatrix normalized_from(const ComplexMatrix& m, double tol = kExactTol) {
        DensityMatrix d = from_matrix(m, tol);
        if (std::abs(d.trace_weight() - 1.0) > tol) throw ValidationError("density matrix trace is not 1");
        return d;
    }

    static DensityMatrix pure(const ComplexVector& psi) {
        if (std::abs(psi.norm() - 1.0) > 1e-12) throw DomainError("state vector is not normalized");
        return from_matrix(outer(psi));
    }

    const ComplexMatrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double trace_weight() const { return trace_; }
    bool is_normalized(double tol = kExactTol) const { return std::abs(trace_ - 1.0) <= tol; }

    DensityMatrix normalized() const {
        if (trace_ < 1e-12) throw ZeroProbabilityBranchError("cannot normalize a zero-trace state");
        return DensityMatrix(m_ / trace_, 1.0);
    }

    /// Scales by `w` in [0, 1]; used for subnormalized branch bookkeeping.
    DensityMatrix scaled(double w) const {
        if (w < 0 || w > 1.0 + 1e-12) throw DomainError("scale weight must be in [0, 1]");
        return DensityMatrix(m_ * w, trace_ * w);
    }

  private:
    DensityMatrix(ComplexMatrix m, double tr) : m_(std::move(m)), trace_(tr) {}

    ComplexMatrix m_;
    double trace_ = 1.0;
};

struct BlochVector {
    double s1 = 0, s2 = 0, s3 = 0;

    double operator[](int m) const { return m == 1 ? s1 : m == 2 ? s2 : s3; }
    double norm() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }
};

/// Outcome n of the Pauli observable sigma_m, with eigenvalue (-1)^n.
struct MeasurementSetting {
    int n = 0;
    int m = 3;

    MeasurementSetting() = default;
    MeasurementSetting(int outcome, int pauli) : n(outcome), m(pauli) {
        if (n < 0 || n > 1) throw DomainError("outcome index must be 0 or 1");
        if (m < 1 || m > 3) throw DomainError("Pauli index must be 1, 2 or 3");
    }

    int value() const { return n == 0 ? 1 : -1; }
    /// Position in the canonical six-element order (0,1),(1,1),(0,2),(1,2),(0,3),(1,3).
    int index() const { return 2 * (m - 1) + n; }
    static MeasurementSetting from_index(int i) { return {i % 2, i / 2 + 1}; }

    friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;
};

inline std::array<MeasurementSetting, 6> all_settings() {
    std::array<MeasurementSetting, 6> out;
    for (int i = 0; i < 6; ++i) out[static_cast<std::size_t>(i)] = MeasurementSetting::from_index(i);
    return out;
}

/// |n>_m as a vector: |n>_1 = (|0> + v|1>)/sqrt2, |n>_2 = (|0> + i v|1>)/sqrt2.
inline ComplexVector pauli_eigenvector(int n, int m) {
    const MeasurementSetting s(n, m);
    ComplexVector v(2);
    const double r = 1.0 / std::sqrt(2.0);
    switch (s.m) {
        case 1: v << r, r * s.value(); break;
        case 2: v << r, 1i * (r * s.value()); break;
        default: v << (n == 0 ? 1.0 : 0.0), (n == 0 ? 0.0 : 1.0); break;
    }
    return v;
}

inline DensityMatrix pauli_eigenstate(int n, int m) { return DensityMatrix::from_matrix(outer(pauli_eigenvector(n, m))); }

inline ComplexMatrix pauli_projector(const MeasurementSetting& s) { return outer(pauli_eigenvector(s.n, s.m)); }

inline BlochVector density_to_bloch(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw DomainError("Bloch vector requires a single-qubit state");
    if (!rho.is_normalized(1e-9)) throw DomainError("Bloch vector requires a normalized state");
    const auto& m = rho.matrix();
    return {(pauli::x() * m).trace().real(), (pauli::y() * m).trace().real(), (pauli::z() * m).trace().real()};
}

inline DensityMatrix bloch_to_density(const BlochVector& s) {
    if (s.norm() > 1.0 + 1e-9) throw DomainError("Bloch vector longer than 1");
    ComplexMatrix m = (pauli::identity() + s.s1 * pauli::x() + s.s2 * pauli::y() + s.s3 * pauli::z()) / 2.0;
    return DensityMatrix::from_matrix(m, 1e-9);
}

/// <psi|rho|psi>. Accepts raw matrices so printed (unnormalized) data can be
/// evaluated as published.
inline double fidelity_with_pure(const ComplexMatrix& rho, const ComplexVector& psi) {
    if (rho.rows() != psi.size() || rho.cols() != psi.size()) throw DomainError("fidelity: dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > 1e-12) throw DomainError("fidelity: state vector is not normalized");
    return (psi.adjoint() * rho * psi)(0, 0).real();
}

inline double fidelity_with_pure(const DensityMatrix& rho, const ComplexVector& psi) {
    return fidelity_with_pure(rho.matrix(), psi);
}

enum class Subsystem { A, B };

/// Traces out `traced` from a 4x4 operator; works for any (not necessarily
/// Hermitian) operator so it also serves conditional-state formulas.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, Subsystem traced) {
    if (rho.rows() != 4 || rho.cols() != 4) throw DomainError("partial trace requires a 4x4 operator");
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                out(i, j) += traced == Subsystem::A ? rho(2 * k + i, 2 * k + j) : rho(2 * i + k, 2 * j + k);
            }
        }
    }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced) {
    if (rho.dim() != 4) throw DomainError("partial trace requires a two-qubit state");
    return DensityMatrix::from_matrix(partial_trace(rho.matrix(), traced), 1e-9);
}

/// Hermitize, clip negative eigenvalues, renormalize to unit trace.
inline DensityMatrix nearest_density(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw DomainError("nearest_density: matrix is not square");
    if (!all_finite(m)) throw ValidationError("nearest_density: non-finite entries");
    const ComplexMatrix clipped = psd_clip(m);
    const double tr = real_trace(clipped);
    if (tr <= 1e-14) throw ValidationError("nearest_density: no positive part to normalize");
    return DensityMatrix::from_matrix(hermitian_part(clipped / tr), 1e-9).normalized();
}

namespace states {

/// (|01> - |10>)/sqrt2
inline ComplexVector psi_minus_vector() {
    ComplexVector v = ComplexVector::Zero(4);
    v(1) = 1.0 / std::sqrt(2.0);
    v(2) = -1.0 / std::sqrt(2.0);
    return v;
}

inline ComplexVector psi_plus_vector() {
    ComplexVector v = ComplexVector::Zero(4);
    v(1) = 1.0 / std::sqrt(2.0);
    v(2) = 1.0 / std::sqrt(2.0);
    return v;
}

inline DensityMatrix singlet() { return DensityMatrix::pure(psi_minus_vector()); }
inline DensityMatrix psi_plus() { return DensityMatrix::pure(psi_plus_vector()); }

/// (|01><01| + |10><10|)/2
inline DensityMatrix rho_sep() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(1, 1) = 0.5;
    m(2, 2) = 0.5;
    return DensityMatrix::from_matrix(m);
}

inline void check_unit_interval(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must be in [0, 1]");
}

/// (1 - p) base + p I/4
inline DensityMatrix werner(double p_noise, const DensityMatrix& base) {
    check_unit_interval(p_noise, "noise weight");
    if (base.dim() != 4) throw DomainError("werner: base must be a two-qubit state");
    return DensityMatrix::from_matrix((1.0 - p_noise) * base.matrix() + (p_noise / 4.0) * ComplexMatrix::Identity(4, 4));
}

inline DensityMatrix werner(double p_noise) { return werner(p_noise, singlet()); }

/// p base + (1 - p) rho_sep
inline DensityMatrix phi_mixture(double p, const DensityMatrix& base) {
    check_unit_interval(p, "mixing weight");
    if (base.dim() != 4) throw DomainError("phi_mixture: base must be a two-qubit state");
    return DensityMatrix::from_matrix(p * base.matrix() + (1.0 - p) * rho_sep().matrix());
}

inline DensityMatrix product(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix::from_matrix(kron(a.matrix(), b.matrix()), 1e-9);
}

}  // namespace states

/// Named two-qubit constructors.
struct TwoQubitSpec {
    enum class Kind { singlet, psi_plus, rho_sep, werner, phi_mixture, from_matrix };

    Kind kind = Kind::singlet;
    double param = 0.0;                   ///< p_noise for werner, p_phi for phi_mixture
    std::optional<DensityMatrix> base;    ///< defaults to the singlet
    std::optional<ComplexMatrix> matrix;  ///< for from_matrix
};

inline DensityMatrix make_two_qubit_state(const TwoQubitSpec& spec) {
    using K = TwoQubitSpec::Kind;
    const DensityMatrix base = spec.base.value_or(states::singlet());
    switch (spec.kind) {
        case K::singlet: return states::singlet();
        case K::psi_plus: return states::psi_plus();
        case K::rho_sep: return states::rho_sep();
        case K::werner: return states::werner(spec.param, base);
        case K::phi_mixture: return states::phi_mixture(spec.param, base);
        case K::from_matrix: {
            if (!spec.matrix) throw DomainError("from_matrix spec without a matrix");
            if (spec.matrix->rows() != 4) throw DomainError("two-qubit state must be 4x4");
            DensityMatrix d = DensityMatrix::from_matrix(*spec.matrix, kSampledTol);
            if (std::abs(d.trace_weight() - 1.0) > kSampledTol) throw ValidationError("state trace is not 1");
            return nearest_density(d.matrix());
        }
    }
    throw DomainError("unknown two-qubit state kind");
}

}  // namespace rspcap
