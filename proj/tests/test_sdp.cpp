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

#include <array>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rspcap/io.hpp"
#include "rspcap/sdp.hpp"

namespace rspcap::sdp {
namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
    return hermitian_part(m);
}

void expect_certified(const Problem& p, const Solution& s) {
    ASSERT_TRUE(s.optimal()) << s.message;
    const Certificate c = verify(p, s);
    EXPECT_TRUE(c.ok) << c.detail << " (" << s.message << ")";
}

ComplexMatrix bloch_op(const std::array<double, 3>& v) {
    return v[0] * pauli::x() + v[1] * pauli::y() + v[2] * pauli::z();
}

TEST(Embedding, RealSymmetricIsBlockDiagonal) {
    RealMatrix r(2, 2);
    r << 1, 2, 2, -3;
    const RealMatrix e = hermitian_to_real_embedding(r.cast<cplx>());
    RealMatrix expected = RealMatrix::Zero(4, 4);
    expected.block(0, 0, 2, 2) = r;
    expected.block(2, 2, 2, 2) = r;
    EXPECT_EQ(e, expected);
}

TEST(Embedding, PauliY) {
    const RealMatrix e = hermitian_to_real_embedding(pauli::y());
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(e);
    EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(1), -1.0, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(2), 1.0, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(3), 1.0, 1e-15);
}

TEST(Embedding, EigenvaluesDoubled) {
    std::mt19937_64 rng(51);
    for (int n : {1, 2, 4, 8}) {
        const ComplexMatrix h = random_hermitian(rng, n);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> ref(h);
        Eigen::SelfAdjointEigenSolver<RealMatrix> emb(hermitian_to_real_embedding(h));
        EXPECT_TRUE(emb.eigenvectors().allFinite());
        for (int k = 0; k < n; ++k) {
            EXPECT_NEAR(emb.eigenvalues()(2 * k), ref.eigenvalues()(k), 1e-12);
            EXPECT_NEAR(emb.eigenvalues()(2 * k + 1), ref.eigenvalues()(k), 1e-12);
        }
    }
}

TEST(Embedding, RejectsNonHermitian) {
    ComplexMatrix m = pauli::x();
    m(0, 1) = 1i;
    EXPECT_THROW(hermitian_to_real_embedding(m), DomainError);
}

TEST(Modeling, CoordinateBasisSpansHermitian) {
    std::mt19937_64 rng(52);
    const ComplexMatrix h = random_hermitian(rng, 3);
    Problem p;
    const AffineMatrix x = p.add_variable("X", 3);
    EXPECT_EQ(p.num_coordinates(), 9);
    // Layout: diagonals, then Re/Im of each upper entry.
    RealVector y(9);
    y << h(0, 0).real(), h(1, 1).real(), h(2, 2).real(), h(0, 1).real(), h(0, 1).imag(), h(0, 2).real(), h(0, 2).imag(),
        h(1, 2).real(), h(1, 2).imag();
    EXPECT_LE((x.evaluate(y) - h).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Modeling, ArithmeticAndLift) {
    std::mt19937_64 rng(53);
    Problem p;
    const AffineMatrix a = p.add_variable("A", 2);
    const AffineMatrix b = p.add_variable("B", 2);
    const ComplexMatrix l = random_hermitian(rng, 2);
    RealVector y = RealVector::Random(8);
    const ComplexMatrix av = a.evaluate(y), bv = b.evaluate(y);
    EXPECT_LE(((a + b).evaluate(y) - (av + bv)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(((a - 2.0 * b).evaluate(y) - (av - 2.0 * bv)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(((l * a * l).evaluate(y) - l * av * l).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((adjoint(cplx(0, 1) * a).evaluate(y) - (1i * av).adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(real_trace(a + b).evaluate(y), (av + bv).trace().real(), 1e-14);
    EXPECT_NEAR(inner(a, l).evaluate(y), (av * l).trace().real(), 1e-14);

}

TEST(Modeling, LiftOfLinearMap) {
    Problem p;
    const AffineMatrix a = p.add_variable("A", 2);
    const AffineMatrix b = p.add_variable("B", 2);
    const std::vector<AffineMatrix> args = {a, b};
    auto blockdiag = [](std::span<const ComplexMatrix> m) {
        ComplexMatrix out = ComplexMatrix::Zero(4, 4);
        out.block(0, 0, 2, 2) = m[0] + m[1];
        out.block(2, 2, 2, 2) = m[0] - 3.0 * m[1];
        return out;
    };
    const AffineMatrix lifted = lift(blockdiag, args);
    RealVector y = RealVector::Random(8);
    const std::array<ComplexMatrix, 2> vals = {a.evaluate(y), b.evaluate(y)};
    EXPECT_LE((lifted.evaluate(y) - blockdiag(vals)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Modeling, Validation) {
    Problem p;
    EXPECT_THROW(p.add_variable("big", 17), DomainError);
    EXPECT_THROW(p.add_variable("empty", 0), DomainError);
    const AffineMatrix x = p.add_variable("X", 2);
    EXPECT_THROW(p.add_psd("skew", cplx(0, 1) * x), DomainError);
    EXPECT_THROW(p.add_psd("rect", AffineMatrix(ComplexMatrix::Zero(2, 3))), DomainError);
    EXPECT_THROW(real_trace(cplx(0, 1) * AffineMatrix(ComplexMatrix(pauli::identity()))), DomainError);
    AffineScalar bad;
    bad.terms[99] = 1.0;
    EXPECT_THROW(p.minimize(bad), DomainError);
    EXPECT_THROW(p.add_equality("bad", bad, 0.0), DomainError);
}

TEST(Solve, TraceAboveIdentity) {
    Problem p;
    const AffineMatrix x = p.add_variable("X", 2);
    p.add_psd("X >= I", x - AffineMatrix(ComplexMatrix(pauli::identity())));
    p.minimize(real_trace(x));
    const Solution s = solve(p);
    expect_certified(p, s);
    EXPECT_NEAR(s.value, 2.0, 1e-7);
    EXPECT_LE((s.variable_values[0] - pauli::identity()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Solve, InfeasibleScalarBlock) {
    Problem p;
    const AffineMatrix x = p.add_variable("X", 2);
    p.add_psd("X >= I", x - AffineMatrix(ComplexMatrix(pauli::identity())));
    p.add_nonnegative("tr X <= 1", 1.0 - real_trace(x));
    p.minimize(0.0);
    const Solution s = solve(p);
    EXPECT_EQ(s.status, Status::infeasible);
    EXPECT_FALSE(verify(p, s).ok);
}

TEST(Solve, InconsistentEqualities) {
    Problem p;
    const AffineMatrix x = p.add_variable("X", 2);
    p.add_equality("a", real_trace(x), 1.0);
    p.add_equality("b", 2.0 * real_trace(x), 3.0);
    p.minimize(0.0);
    EXPECT_EQ(solve(p).status, Status::infeasible);
}

TEST(Solve, UnboundedIsNumericalFailure) {
    Problem p;
    const AffineMatrix x = p.add_variable("X", 2);
    p.add_psd("X <= I", AffineMatrix(ComplexMatrix(pauli::identity())) - x);
    p.minimize(real_trace(x));
    const Solution s = solve(p);
    EXPECT_EQ(s.status, Status::numerical_failure);
    EXPECT_FALSE(s.message.empty());
    EXPECT_STREQ(to_string(s.status), "numerical-failure");
}

TEST(Solve, SinglePointFeasibleSet) {
    Problem p;
    const AffineMatrix x = p.add_variable("x", 1);
    p.add_equality("fix", real_trace(x), 0.25);
    p.add_psd("x >= 0", x);
    p.maximize(real_trace(x));
    const Solution s = solve(p);
    expect_certified(p, s);
    EXPECT_NEAR(s.value, 0.25, 1e-12);
}

// min/max <X, C> over density matrices is the extreme eigenvalue of C.
TEST(Solve, DensityMatrixEigenvalueProblems) {
    std::mt19937_64 rng(54);
    for (int n : {2, 3, 4, 6}) {
        for (Sense sense : {Sense::minimize, Sense::maximize}) {
            const ComplexMatrix c = random_hermitian(rng, n);
            Problem p;
            const AffineMatrix x = p.add_variable("rho", n);
            p.add_psd("rho >= 0", x);
            p.add_equality("trace", real_trace(x), 1.0);
            p.set_objective(sense, inner(x, c));
            const Solution s = solve(p);
            expect_certified(p, s);
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
            const double expected = sense == Sense::minimize ? es.eigenvalues()(0) : es.eigenvalues()(n - 1);
            EXPECT_NEAR(s.value, expected, 1e-7);
        }
    }
}

// Minimize b.r over the Bloch ball cut by a.r >= h.
struct CutBallProblem {
    std::array<double, 3> a, b;
    double h;
};

Solution solve_cut_ball(const CutBallProblem& q, Problem& p) {
    const AffineMatrix x = p.add_variable("rho", 2);
    p.add_psd("rho >= 0", x);
    p.add_equality("trace", real_trace(x), 1.0);
    p.add_nonnegative("cut", inner(x, bloch_op(q.a)) - q.h);
    p.minimize(inner(x, bloch_op(q.b)));
    return solve(p);
}

double brute_cut_ball(const CutBallProblem& q) {
    constexpr double step = 1e-3;
    auto dot = [](const std::array<double, 3>& u, const std::array<double, 3>& v) {
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    };
    double best = INFINITY;
    // Sphere.
    for (double th = 0; th <= std::numbers::pi; th += step) {
        for (double ph = 0; ph < 2 * std::numbers::pi; ph += step) {
            const std::array<double, 3> r = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
            if (dot(q.a, r) >= q.h) best = std::min(best, dot(q.b, r));
        }
    }
    // Flat face of the cut.
    const double na = std::sqrt(dot(q.a, q.a));
    const std::array<double, 3> n = {q.a[0] / na, q.a[1] / na, q.a[2] / na};
    const double d = q.h / na;
    if (std::abs(d) < 1) {
        std::array<double, 3> u = std::abs(n[0]) < 0.9 ? std::array<double, 3>{1, 0, 0} : std::array<double, 3>{0, 1, 0};
        const double un = dot(u, n);
        for (int i = 0; i < 3; ++i) u[i] -= un * n[i];
        const double nu = std::sqrt(dot(u, u));
        for (auto& ui : u) ui /= nu;
        const std::array<double, 3> w = {n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]};
        const double rad = std::sqrt(1 - d * d);
        for (double rr = 0; rr <= rad; rr += step) {
            for (double ph = 0; ph < 2 * std::numbers::pi; ph += step) {
                std::array<double, 3> r{};
                for (int i = 0; i < 3; ++i) r[i] = d * n[i] + rr * (std::cos(ph) * u[i] + std::sin(ph) * w[i]);
                best = std::min(best, dot(q.b, r));
            }
        }
    }
    return best;
}

TEST(Solve, BracketedByBlochGridSearch) {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 3; ++rep) {
        CutBallProblem q{{g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng)}, 0.0};
        const double na = std::sqrt(q.a[0] * q.a[0] + q.a[1] * q.a[1] + q.a[2] * q.a[2]);
        q.h = 0.3 * na;
        Problem p;
        const Solution s = solve_cut_ball(q, p);
        expect_certified(p, s);
        const double brute = brute_cut_ball(q);
        EXPECT_GE(brute, s.value - 1e-7);
        EXPECT_LE(brute - s.value, 5e-3);
    }
}

TEST(Solve, AddingConstraintNeverImproves) {
    std::mt19937_64 rng(56);
    for (int rep = 0; rep < 10; ++rep) {
        const ComplexMatrix c = random_hermitian(rng, 3);
        const ComplexMatrix d = random_hermitian(rng, 3);
        Problem loose;
        const AffineMatrix x = loose.add_variable("rho", 3);
        loose.add_psd("rho >= 0", x);
        loose.add_equality("trace", real_trace(x), 1.0);
        loose.minimize(inner(x, c));
        Problem tight = loose;
        // Feasible: the maximally mixed state satisfies it with margin.
        tight.add_nonnegative("extra", inner(x, d) - (d.trace().real() / 3.0 - 0.1));
        const Solution a = solve(loose), b = solve(tight);
        expect_certified(loose, a);
        expect_certified(tight, b);
        EXPECT_GE(b.value, a.value - 1e-7);
    }
}

TEST(Solve, ObjectiveScaling) {
    std::mt19937_64 rng(57);
    for (double scale : {0.01, 3.0, 250.0}) {
        const ComplexMatrix c = random_hermitian(rng, 3);
        const ComplexMatrix w = random_hermitian(rng, 3);
        auto build = [&](double k) {
            Problem p;
            const AffineMatrix x = p.add_variable("rho", 3);
            p.add_psd("rho >= 0", x);
            p.add_psd("rho <= I/2", AffineMatrix(ComplexMatrix(ComplexMatrix::Identity(3, 3) / 2.0)) - x);
            p.add_equality("trace", real_trace(x), 1.0);
            p.minimize(k * inner(x, c + 0.1 * w));
            return p;
        };
        const Problem p1 = build(1.0), pk = build(scale);
        const Solution s1 = solve(p1), sk = solve(pk);
        expect_certified(p1, s1);
        expect_certified(pk, sk);
        EXPECT_NEAR(sk.value, scale * s1.value, 1e-7 * std::max(1.0, scale));
        EXPECT_LE((sk.variable_values[0] - s1.variable_values[0]).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Solve, ThinFeasibleSetSinglePoint) {
    // rho >= 0 with rho = |0><0| forced by <rho, Z> >= 1: no strict interior.
    Problem p;
    const AffineMatrix x = p.add_variable("rho", 2);
    p.add_psd("rho >= 0", x);
    p.add_equality("trace", real_trace(x), 1.0);
    p.add_nonnegative("pole", inner(x, pauli::z()) - 1.0);
    p.maximize(inner(x, pauli::x()));
    const Solution s = solve(p);
    expect_certified(p, s);
    EXPECT_TRUE(s.facial_reductions > 0 || s.shift > 0.0);
    EXPECT_NEAR(s.value, 0.0, 1e-6);
}

TEST(Solve, ThinFeasibleSetFace) {
    // X >= 0 (3x3), tr X = 1, X_22 <= 0: the feasible set is the density
    // matrices on the first two levels, so max <X, W> is the top eigenvalue of
    // the leading 2x2 block of W.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
        ComplexMatrix w(3, 3);
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) w(i, j) = cplx(normal(rng), normal(rng));
        w = hermitian_part(w);
        ComplexMatrix e22 = ComplexMatrix::Zero(3, 3);
        e22(2, 2) = 1.0;
        Problem p;
        const AffineMatrix x = p.add_variable("X", 3);
        p.add_psd("X >= 0", x);
        p.add_equality("trace", real_trace(x), 1.0);
        p.add_nonnegative("corner", -1.0 * inner(x, e22));
        p.maximize(inner(x, w));
        const Solution s = solve(p);
        expect_certified(p, s);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(w.topLeftCorner(2, 2));
        EXPECT_NEAR(s.value, es.eigenvalues().maxCoeff(), 1e-6);
    }
}

TEST(Verify, DetectsTamperedSolution) {
    Problem p;
    const AffineMatrix x = p.add_variable("X", 2);
    p.add_psd("X >= I", x - AffineMatrix(ComplexMatrix(pauli::identity())));
    p.minimize(real_trace(x));
    Solution s = solve(p);
    ASSERT_TRUE(verify(p, s).ok);
    s.variable_values[0] = 0.5 * pauli::identity();
    EXPECT_FALSE(verify(p, s).ok);
}

TEST(ProblemDump, Shape) {
    Problem p;
    const AffineMatrix x = p.add_variable("rho", 2);
    p.add_psd("rho >= 0", x);
    p.add_equality("trace", real_trace(x), 1.0);
    p.maximize(inner(x, pauli::z()));
    const auto j = io::problem_to_json(p);
    EXPECT_EQ(j["sense"], "maximize");
    EXPECT_EQ(j["coordinates"], 4);
    EXPECT_EQ(j["variables"][0]["name"], "rho");
    EXPECT_EQ(j["equalities"][0]["target"], 1.0);
    EXPECT_EQ(j["psd"][0]["terms"].size(), 4u);
    EXPECT_EQ(j["objective"]["terms"]["0"], 1.0);
    EXPECT_EQ(j["objective"]["terms"]["1"], -1.0);
}

}  // namespace
}  // namespace rspcap::sdp
