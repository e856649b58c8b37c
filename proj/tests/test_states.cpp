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

#include <random>

#include <gtest/gtest.h>

#include "rspcap/builtin_states.hpp"
#include "rspcap/states.hpp"

namespace rspcap {
namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
    return hermitian_part(m);
}

ComplexMatrix random_density(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
    ComplexMatrix r = a * a.adjoint();
    return r / real_trace(r);
}

void expect_close(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    ASSERT_EQ(a.rows(), b.rows());
    ASSERT_EQ(a.cols(), b.cols());
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "a=\n" << a << "\nb=\n" << b;
}

TEST(PauliEigenstate, ComputationalBasis) {
    ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
    expected(0, 0) = 1;
    expect_close(pauli_eigenstate(0, 3).matrix(), expected, 1e-15);
}

TEST(PauliEigenstate, XPlus) {
    ComplexMatrix expected = ComplexMatrix::Constant(2, 2, 0.5);
    expect_close(pauli_eigenstate(0, 1).matrix(), expected, 1e-15);
}

TEST(PauliEigenstate, YMinus) {
    ComplexMatrix expected(2, 2);
    expected << 0.5, cplx(0, 0.5), cplx(0, -0.5), 0.5;
    expect_close(pauli_eigenstate(1, 2).matrix(), expected, 1e-15);
}

TEST(PauliEigenstate, EigenvalueMatchesSign) {
    for (const auto& s : all_settings()) {
        const ComplexVector v = pauli_eigenvector(s.n, s.m);
        const ComplexVector sv = pauli::sigma(s.m) * v;
        EXPECT_LE((sv - static_cast<double>(s.value()) * v).norm(), 1e-15);
        EXPECT_NEAR(real_trace(pauli_eigenstate(s.n, s.m).matrix()), 1.0, 1e-15);
    }
}

TEST(PauliEigenstate, RejectsBadIndices) {
    EXPECT_THROW(pauli_eigenstate(2, 1), DomainError);
    EXPECT_THROW(pauli_eigenstate(0, 0), DomainError);
    EXPECT_THROW(pauli_eigenstate(0, 4), DomainError);
}

TEST(Bloch, KnownVectors) {
    auto b = density_to_bloch(pauli_eigenstate(0, 3));
    EXPECT_NEAR(b.s3, 1.0, 1e-15);
    b = density_to_bloch(DensityMatrix::from_matrix(pauli::identity() / 2.0));
    EXPECT_NEAR(b.norm(), 0.0, 1e-15);
    b = density_to_bloch(pauli_eigenstate(0, 1));
    EXPECT_NEAR(b.s1, 1.0, 1e-15);
    EXPECT_NEAR(b.s2, 0.0, 1e-15);
    EXPECT_NEAR(b.s3, 0.0, 1e-15);
}

TEST(Bloch, RejectsTwoQubitState) { EXPECT_THROW(density_to_bloch(states::singlet()), DomainError); }

TEST(Bloch, RoundTripRandomStates) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const DensityMatrix rho = DensityMatrix::from_matrix(random_density(rng, 2));
        expect_close(bloch_to_density(density_to_bloch(rho)).matrix(), rho.matrix(), 1e-12);
    }
}

TEST(TwoQubit, WernerAtOneIsMaximallyMixed) {
    expect_close(states::werner(1.0).matrix(), ComplexMatrix::Identity(4, 4) / 4.0, 1e-15);
}

TEST(TwoQubit, PhiMixtureAtOneIsBase) {
    const DensityMatrix base = builtin::rho_expt();
    expect_close(states::phi_mixture(1.0, base).matrix(), base.matrix(), 1e-15);
}

TEST(TwoQubit, RhoSep) {
    ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
    expected(1, 1) = 0.5;  // |01>
    expected(2, 2) = 0.5;  // |10>
    expect_close(make_two_qubit_state({TwoQubitSpec::Kind::rho_sep}).matrix(), expected, 0);
}

TEST(TwoQubit, ParameterOutsideUnitInterval) {
    EXPECT_THROW(states::werner(-0.1), DomainError);
    EXPECT_THROW(states::phi_mixture(1.5, states::singlet()), DomainError);
    EXPECT_THROW(make_two_qubit_state({TwoQubitSpec::Kind::werner, 2.0}), DomainError);
}

TEST(TwoQubit, FromMatrixRejectsNonPsd) {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    TwoQubitSpec spec{TwoQubitSpec::Kind::from_matrix};
    spec.matrix = m;
    EXPECT_THROW(make_two_qubit_state(spec), ValidationError);
}

TEST(TwoQubit, ConstructorInvariants) {
    using K = TwoQubitSpec::Kind;
    for (double p : {0.0, 0.3, 0.77, 1.0}) {
        for (K k : {K::singlet, K::psi_plus, K::rho_sep, K::werner, K::phi_mixture}) {
            const DensityMatrix d = make_two_qubit_state({k, p, builtin::rho_expt()});
            EXPECT_LE(hermiticity_error(d.matrix()), 1e-10);
            EXPECT_GE(min_eigenvalue(d.matrix()), -1e-10);
            EXPECT_NEAR(real_trace(d.matrix()), d.trace_weight(), 1e-10);
            EXPECT_NEAR(d.trace_weight(), 1.0, 1e-10);
        }
    }
}

TEST(Fidelity, SingletWithItself) {
    EXPECT_NEAR(fidelity_with_pure(states::singlet(), states::psi_minus_vector()), 1.0, 1e-15);
}

TEST(Fidelity, WernerFamilyClosedForm) {
    for (int k = 0; k <= 10; ++k) {
        const double p = k / 10.0;
        EXPECT_NEAR(fidelity_with_pure(states::werner(p), states::psi_minus_vector()), 1.0 - 0.75 * p, 1e-12) << p;
    }
}

TEST(PrintedDataStates, MeasuredStateFidelity) {
    EXPECT_NEAR(fidelity_with_pure(builtin::printed_rho_expt(), states::psi_minus_vector()), 0.985, 0.005);
}

TEST(Fidelity, DimensionMismatch) {
    EXPECT_THROW(fidelity_with_pure(pauli_eigenstate(0, 3), states::psi_minus_vector()), DomainError);
}

TEST(PartialTrace, SingletMarginal) {
    expect_close(partial_trace(states::singlet(), Subsystem::A).matrix(), pauli::identity() / 2.0, 1e-15);
    expect_close(partial_trace(states::rho_sep(), Subsystem::A).matrix(), pauli::identity() / 2.0, 1e-15);
}

TEST(PartialTrace, ProductRecoversFactor) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const DensityMatrix a = DensityMatrix::from_matrix(random_density(rng, 2));
        const DensityMatrix b = DensityMatrix::from_matrix(random_density(rng, 2));
        const DensityMatrix ab = states::product(a, b);
        expect_close(partial_trace(ab, Subsystem::B).matrix(), a.matrix(), 1e-12);
        expect_close(partial_trace(ab, Subsystem::A).matrix(), b.matrix(), 1e-12);
    }
}

TEST(PartialTrace, PreservesTrace) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) {
        const DensityMatrix rho = DensityMatrix::from_matrix(random_density(rng, 4) * 0.7);
        EXPECT_NEAR(partial_trace(rho, Subsystem::A).trace_weight(), 0.7, 1e-12);
        EXPECT_NEAR(partial_trace(rho, Subsystem::B).trace_weight(), 0.7, 1e-12);
    }
}

TEST(PartialTrace, WrongDimension) { EXPECT_THROW(partial_trace(pauli::identity(), Subsystem::A), DomainError); }

TEST(NearestDensity, ValidStateUnchanged) {
    std::mt19937_64 rng(7);
    const ComplexMatrix rho = random_density(rng, 4);
    expect_close(nearest_density(rho).matrix(), rho, 1e-12);
}

TEST(NearestDensity, ClipsNegativeEigenvalue) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
    expected(0, 0) = 1.0;
    expect_close(nearest_density(m).matrix(), expected, 1e-15);
}

TEST(NearestDensity, IdempotentAndValid) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const ComplexMatrix h = random_hermitian(rng, 4);
        const DensityMatrix once = nearest_density(h + 3.0 * ComplexMatrix::Identity(4, 4) * (i % 2));
        const DensityMatrix twice = nearest_density(once.matrix());
        expect_close(twice.matrix(), once.matrix(), 1e-12);
        EXPECT_GE(min_eigenvalue(once.matrix()), -1e-12);
        EXPECT_NEAR(once.trace_weight(), 1.0, 1e-12);
    }
}

TEST(NearestDensity, ZeroMatrix) { EXPECT_THROW(nearest_density(ComplexMatrix::Zero(2, 2)), ValidationError); }

TEST(HermitianEigen, Diagonal) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1;
    m(1, 1) = 3;
    const auto e = hermitian_eigen(m);
    EXPECT_NEAR(e.values(0), 3.0, 1e-15);
    EXPECT_NEAR(e.values(1), 1.0, 1e-15);
}

TEST(HermitianEigen, PauliX) {
    const auto e = hermitian_eigen(pauli::x());
    EXPECT_NEAR(e.values(0), 1.0, 1e-15);
    EXPECT_NEAR(e.values(1), -1.0, 1e-15);
    // |v0| = (|0> + |1>)/sqrt2 up to phase
    EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(std::abs(e.vectors.col(0).dot(pauli_eigenvector(0, 1))), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(e.vectors.col(1).dot(pauli_eigenvector(1, 1))), 1.0, 1e-12);
}

TEST(HermitianEigen, MatchesEigenSolverAndReconstructs) {
    std::mt19937_64 rng(9);
    for (int n : {2, 3, 4, 8, 16}) {
        for (int rep = 0; rep < 20; ++rep) {
            const ComplexMatrix h = random_hermitian(rng, n);
            const auto e = hermitian_eigen(h);
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> ref(h);
            for (int k = 0; k < n; ++k) EXPECT_NEAR(e.values(k), ref.eigenvalues()(n - 1 - k), 1e-10);
            for (int k = 0; k + 1 < n; ++k) EXPECT_GE(e.values(k), e.values(k + 1));
            for (int k = 0; k < n; ++k) {
                EXPECT_LE((h * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm(), 1e-9);
            }
            const ComplexMatrix rebuilt = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
            expect_close(rebuilt, h, 1e-9);
        }
    }
}

TEST(HermitianEigen, RejectsNonHermitian) {
    ComplexMatrix m = pauli::x();
    m(0, 1) = 2.0;
    EXPECT_THROW(hermitian_eigen(m), DomainError);
}

TEST(Builtin, PrintedTablesReadHermitian) {
    EXPECT_EQ(hermiticity_error(builtin::printed_rho_expt()), 0.0);
    EXPECT_EQ(hermiticity_error(builtin::printed_rho_expt_p40()), 0.0);
    EXPECT_NEAR(real_trace(builtin::printed_rho_expt()), 1.019, 1e-12);
    EXPECT_NEAR(real_trace(builtin::printed_rho_expt_p40()), 0.998, 1e-12);
}

TEST(Builtin, RegistryStatesAreValid) {
    for (const auto& name : builtin::names()) {
        const DensityMatrix d = builtin::by_name(name);
        EXPECT_EQ(d.dim(), 4);
        EXPECT_NEAR(d.trace_weight(), 1.0, 1e-12);
        EXPECT_GE(min_eigenvalue(d.matrix()), -1e-12);
    }
    EXPECT_THROW(builtin::by_name("nope"), ValidationError);
}

}  // namespace
}  // namespace rspcap
