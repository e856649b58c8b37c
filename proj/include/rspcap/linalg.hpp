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

// Dense complex linear algebra shared by every module. Matrices are Eigen
// dynamic-size types; all dimensions in this library are at most 16.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rspcap/errors.hpp"

namespace rspcap {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

using namespace std::complex_literals;

/// Tolerance for pipelines fed by exact (noise-free) data.
inline constexpr double kExactTol = 1e-10;
/// Tolerance for pipelines fed by sampled or printed data.
inline constexpr double kSampledTol = 1e-6;

namespace pauli {

inline ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

inline ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0, -1i, 1i, 0;
    return m;
}

inline ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

/// sigma_m for m in {1,2,3}; sigma_0 is the identity.
inline ComplexMatrix sigma(int m) {
    switch (m) {
        case 0: return identity();
        case 1: return x();
        case 2: return y();
        case 3: return z();
        default: throw DomainError("pauli index must be in 0..3, got " + std::to_string(m));
    }
}

}  // namespace pauli

inline ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline ComplexMatrix outer(const ComplexVector& v) { return v * v.adjoint(); }

inline double hermiticity_error(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return INFINITY;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) { return hermiticity_error(m) <= tol; }

inline bool all_finite(const ComplexMatrix& m) {
    return std::all_of(m.data(), m.data() + m.size(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

inline double real_trace(const ComplexMatrix& m) { return m.trace().real(); }

struct HermitianEigen {
    RealVector values;      ///< descending
    ComplexMatrix vectors;  ///< column i pairs with values[i]
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Each rotation first removes the phase of the pivot element and
/// then applies the classical real Jacobi rotation.
inline HermitianEigen hermitian_eigen(const ComplexMatrix& input, double hermitian_tol = 1e-8) {
    if (input.rows() != input.cols()) throw DomainError("hermitian_eigen: matrix is not square");
    if (!all_finite(input)) throw DomainError("hermitian_eigen: non-finite entries");
    const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
    if (hermiticity_error(input) > hermitian_tol * scale) {
        throw DomainError("hermitian_eigen: matrix is not Hermitian");
    }
    const Eigen::Index n = input.rows();
    ComplexMatrix a = hermitian_part(input);
    ComplexMatrix v = ComplexMatrix::Identity(n, n);

    auto off_norm = [&] {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    const double frob = std::max(a.norm(), 1e-300);
    for (int sweep = 0; sweep < 100 && off_norm() > 1e-15 * frob; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag <= 1e-300) continue;
                const cplx phase = a(p, q) / mag;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // Rotation V acting on columns p, q: V = D R with D = diag(1, e^{-i phi}).
                const cplx vpp = c, vpq = s, vqp = -s * std::conj(phase), vqq = c * std::conj(phase);
                for (Eigen::Index k = 0; k < n; ++k) {  // A <- A V
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * vpp + akq * vqp;
                    a(k, q) = akp * vpq + akq * vqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {  // A <- V^H A
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(vpp) * apk + std::conj(vqp) * aqk;
                    a(q, k) = std::conj(vpq) * apk + std::conj(vqq) * aqk;
                }
                a(p, q) = 0;
                a(q, p) = 0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (Eigen::Index k = 0; k < n; ++k) {  // V_acc <- V_acc V
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * vpp + vkq * vqp;
                    v(k, q) = vkp * vpq + vkq * vqq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
    HermitianEigen out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

inline double min_eigenvalue(const ComplexMatrix& m) {
    const auto eig = hermitian_eigen(m, 1e-6);
    return eig.values(eig.values.size() - 1);
}

inline double max_eigenvalue(const ComplexMatrix& m) { return hermitian_eigen(m, 1e-6).values(0); }

/// Clips negative eigenvalues to zero; trace is not touched.
inline ComplexMatrix psd_clip(const ComplexMatrix& m) {
    const auto eig = hermitian_eigen(hermitian_part(m), INFINITY);
    const RealVector clipped = eig.values.cwiseMax(0.0);
    return eig.vectors * clipped.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    const auto eig = hermitian_eigen(hermitian_part(a - b), INFINITY);
    return 0.5 * eig.values.cwiseAbs().sum();
}

}  // namespace rspcap
