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

// Small dense semidefinite programs over Hermitian matrix variables.
//
// A problem is written with affine matrix expressions: every Hermitian
// variable block of dimension d owns d*d real coordinates (d diagonal
// entries, then Re/Im of each strictly-upper entry), and an expression is a
// constant matrix plus one coefficient matrix per coordinate it depends on.
//
// The solver is a log-barrier path-following method:
//   1. equality constraints are eliminated by a particular solution plus an
//      orthonormal nullspace basis (modified Gram-Schmidt);
//   2. every Hermitian block is lowered to its real symmetric embedding;
//   3. phase 1 minimizes a uniform slack s with F_j(z) + s I >= 0 to find a
//      strictly feasible point; the problem is infeasible when s* > 1e-7;
//   3a. when s* is ~0 (no interior) the minimal face is located by facial
//      reduction: the inverse barrier Hessian blocks at the phase-1 point
//      expose directions every feasible F_j annihilates, these become extra
//      equalities, the blocks are compressed, and phase 1 is repeated. If no
//      reduction succeeds the constraints are relaxed by a 1e-8 multiple of
//      the identity instead;
//   4. phase 2 follows the central path with damped Newton steps, raising the
//      barrier weight by 10x per outer iteration until the gap bound m/t is
//      below the tolerance, taken relative to max(1, |objective|).

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rspcap/errors.hpp"
#include "rspcap/linalg.hpp"

namespace rspcap::sdp {

/// [[Re H, -Im H], [Im H, Re H]]; H >= 0 iff the embedding is >= 0.
inline RealMatrix hermitian_to_real_embedding(const ComplexMatrix& h, bool check = true) {
    if (h.rows() != h.cols()) throw DomainError("embedding requires a square matrix");
    if (check && !is_hermitian(h, 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()))) {
        throw DomainError("embedding requires a Hermitian matrix");
    }
    const Eigen::Index d = h.rows();
    RealMatrix out(2 * d, 2 * d);
    out.block(0, 0, d, d) = h.real();
    out.block(0, d, d, d) = -h.imag();
    out.block(d, 0, d, d) = h.imag();
    out.block(d, d, d, d) = h.real();
    return out;
}

/// Hermitian basis element for local coordinate k of a d x d block.
inline ComplexMatrix coordinate_basis(int d, int k) {
    ComplexMatrix b = ComplexMatrix::Zero(d, d);
    if (k < d) {
        b(k, k) = 1.0;
        return b;
    }
    int idx = k - d;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (idx == 0) {
                b(i, j) = 1.0;
                b(j, i) = 1.0;
                return b;
            }
            if (idx == 1) {
                b(i, j) = 1i;
                b(j, i) = -1i;
                return b;
            }
            idx -= 2;
        }
    }
    throw DomainError("coordinate index out of range");
}

/// Real-valued affine functional: constant + sum_k coeff_k y_k.
struct AffineScalar {
    double constant = 0.0;
    std::map<int, double> terms;

    AffineScalar() = default;
    AffineScalar(double c) : constant(c) {}  // NOLINT: implicit constants read naturally

    double evaluate(const RealVector& y) const {
        double v = constant;
        for (const auto& [k, c] : terms) v += c * y(k);
        return v;
    }

    AffineScalar& operator+=(const AffineScalar& o) {
        constant += o.constant;
        for (const auto& [k, c] : o.terms) terms[k] += c;
        return *this;
    }
    AffineScalar& operator*=(double s) {
        constant *= s;
        for (auto& [k, c] : terms) c *= s;
        return *this;
    }
    friend AffineScalar operator+(AffineScalar a, const AffineScalar& b) { return a += b; }
    friend AffineScalar operator-(AffineScalar a, AffineScalar b) { return a += (b *= -1.0); }
    friend AffineScalar operator*(double s, AffineScalar a) { return a *= s; }
    friend AffineScalar operator-(AffineScalar a) { return a *= -1.0; }
};

/// Affine complex matrix expression: constant + sum_k y_k coeff_k.
class AffineMatrix {
  public:
    AffineMatrix() = default;
    AffineMatrix(Eigen::Index rows, Eigen::Index cols) : constant_(ComplexMatrix::Zero(rows, cols)) {}
    AffineMatrix(ComplexMatrix constant) : constant_(std::move(constant)) {}  // NOLINT

    Eigen::Index rows() const { return constant_.rows(); }
    Eigen::Index cols() const { return constant_.cols(); }
    const ComplexMatrix& constant() const { return constant_; }
    const std::map<int, ComplexMatrix>& terms() const { return terms_; }

    void add_term(int coordinate, const ComplexMatrix& coeff) {
        auto [it, inserted] = terms_.try_emplace(coordinate, coeff);
        if (!inserted) it->second += coeff;
    }

    ComplexMatrix coefficient(int coordinate) const {
        auto it = terms_.find(coordinate);
        return it == terms_.end() ? ComplexMatrix::Zero(rows(), cols()) : it->second;
    }

    ComplexMatrix evaluate(const RealVector& y) const {
        ComplexMatrix v = constant_;
        for (const auto& [k, c] : terms_) v += y(k) * c;
        return v;
    }

    /// Applies a linear map (on constant and coefficients alike).
    template <class F>
    AffineMatrix transform(F&& f) const {
        AffineMatrix out(f(constant_));
        for (const auto& [k, c] : terms_) out.terms_.emplace(k, f(c));
        return out;
    }

    AffineMatrix& operator+=(const AffineMatrix& o) {
        check_shape(o);
        constant_ += o.constant_;
        for (const auto& [k, c] : o.terms_) add_term(k, c);
        return *this;
    }
    AffineMatrix& operator-=(const AffineMatrix& o) { return *this += -o; }

    friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
    friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
    friend AffineMatrix operator-(const AffineMatrix& a) {
        return a.transform([](const ComplexMatrix& m) { return ComplexMatrix(-m); });
    }
    friend AffineMatrix operator*(cplx s, const AffineMatrix& a) {
        return a.transform([s](const ComplexMatrix& m) { return ComplexMatrix(s * m); });
    }
    friend AffineMatrix operator*(const ComplexMatrix& l, const AffineMatrix& a) {
        return a.transform([&l](const ComplexMatrix& m) { return ComplexMatrix(l * m); });
    }
    friend AffineMatrix operator*(const AffineMatrix& a, const ComplexMatrix& r) {
        return a.transform([&r](const ComplexMatrix& m) { return ComplexMatrix(m * r); });
    }

  private:
    void check_shape(const AffineMatrix& o) const {
        if (o.rows() != rows() || o.cols() != cols()) throw DomainError("affine expression shape mismatch");
    }

    ComplexMatrix constant_;
    std::map<int, ComplexMatrix> terms_;
};

inline AffineMatrix adjoint(const AffineMatrix& a) {
    return a.transform([](const ComplexMatrix& m) { return ComplexMatrix(m.adjoint()); });
}

/// Re tr(expr); throws when the trace of some coefficient is not real.
inline AffineScalar real_trace(const AffineMatrix& a) {
    auto take = [](const ComplexMatrix& m) {
        const cplx t = m.trace();
        if (std::abs(t.imag()) > 1e-12 * std::max(1.0, std::abs(t))) {
            throw DomainError("trace of expression is not real-valued");
        }
        return t.real();
    };
    AffineScalar s(take(a.constant()));
    for (const auto& [k, c] : a.terms()) {
        const double v = take(c);
        if (v != 0.0) s.terms[k] = v;
    }
    return s;
}

/// Re tr(expr * w) for a constant Hermitian weight w.
inline AffineScalar inner(const AffineMatrix& a, const ComplexMatrix& w) { return real_trace(a * w); }

/// Lifts a linear map of constant matrices to affine expressions: the map is
/// applied to the constant parts and, for every coordinate, to that
/// coordinate's coefficients (zero where an argument does not depend on it).
inline AffineMatrix lift(const std::function<ComplexMatrix(std::span<const ComplexMatrix>)>& linear_map,
                         std::span<const AffineMatrix> args) {
    std::vector<ComplexMatrix> parts;
    parts.reserve(args.size());
    for (const auto& a : args) parts.push_back(a.constant());
    AffineMatrix out(linear_map(parts));
    std::map<int, bool> coords;
    for (const auto& a : args)
        for (const auto& [k, c] : a.terms()) coords[k] = true;
    for (const auto& [k, unused] : coords) {
        for (std::size_t i = 0; i < args.size(); ++i) parts[i] = args[i].coefficient(k);
        out.add_term(k, linear_map(parts));
    }
    return out;
}

enum class Sense { minimize, maximize };

struct VariableBlock {
    std::string name;
    int dim = 0;
    int offset = 0;  ///< first real coordinate
};

struct EqualityConstraint {
    std::string name;
    AffineScalar lhs;
    double target = 0.0;
};

struct PsdConstraint {
    std::string name;
    AffineMatrix expr;
};

/// Cone program: optimize a real affine objective over Hermitian variable
/// blocks subject to affine equalities and affine PSD constraints.
class Problem {
  public:
    AffineMatrix add_variable(std::string name, int dim) {
        if (dim < 1 || dim > 16) throw DomainError("variable dimension must be in 1..16");
        VariableBlock block{std::move(name), dim, num_coordinates_};
        AffineMatrix x(dim, dim);
        for (int k = 0; k < dim * dim; ++k) x.add_term(block.offset + k, coordinate_basis(dim, k));
        num_coordinates_ += dim * dim;
        variables_.push_back(std::move(block));
        return x;
    }

    void set_objective(Sense sense, AffineScalar objective) {
        check_coordinates(objective);
        sense_ = sense;
        objective_ = std::move(objective);
    }
    void minimize(AffineScalar objective) { set_objective(Sense::minimize, std::move(objective)); }
    void maximize(AffineScalar objective) { set_objective(Sense::maximize, std::move(objective)); }

    void add_equality(std::string name, AffineScalar lhs, double target) {
        check_coordinates(lhs);
        equalities_.push_back({std::move(name), std::move(lhs), target});
    }

    void add_psd(std::string name, AffineMatrix expr) {
        if (expr.rows() != expr.cols() || expr.rows() < 1 || expr.rows() > 16) {
            throw DomainError("PSD constraint '" + name + "' must be square with dimension <= 16");
        }
        auto check = [&](const ComplexMatrix& m) {
            if (!is_hermitian(m, 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
                throw DomainError("PSD constraint '" + name + "' is not Hermitian-valued");
            }
        };
        check(expr.constant());
        for (const auto& [k, c] : expr.terms()) {
            if (k < 0 || k >= num_coordinates_) throw DomainError("PSD constraint references unknown variable");
            check(c);
        }
        psd_.push_back({std::move(name), std::move(expr)});
    }

    /// Scalar inequality expr >= 0, stored as a 1x1 PSD block.
    void add_nonnegative(std::string name, const AffineScalar& expr) {
        check_coordinates(expr);
        AffineMatrix m(ComplexMatrix::Constant(1, 1, expr.constant));
        for (const auto& [k, c] : expr.terms) m.add_term(k, ComplexMatrix::Constant(1, 1, c));
        add_psd(std::move(name), std::move(m));
    }

    int num_coordinates() const { return num_coordinates_; }
    const std::vector<VariableBlock>& variables() const { return variables_; }
    Sense sense() const { return sense_; }
    const AffineScalar& objective() const { return objective_; }
    const std::vector<EqualityConstraint>& equalities() const { return equalities_; }
    const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }

  private:
    void check_coordinates(const AffineScalar& s) const {
        for (const auto& [k, c] : s.terms) {
            if (k < 0 || k >= num_coordinates_) throw DomainError("functional references unknown variable");
        }
    }

    int num_coordinates_ = 0;
    std::vector<VariableBlock> variables_;
    Sense sense_ = Sense::minimize;
    AffineScalar objective_;
    std::vector<EqualityConstraint> equalities_;
    std::vector<PsdConstraint> psd_;
};

enum class Status { optimal, infeasible, numerical_failure };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

struct Solution {
    Status status = Status::numerical_failure;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::vector<ComplexMatrix> variable_values;
    RealVector coordinates;
    double gap = std::numeric_limits<double>::infinity();  ///< duality-gap bound of the solved problem
    double shift = 0.0;                                    ///< identity relaxation used when no interior exists
    double phase1_slack = 0.0;                             ///< optimal uniform violation found by phase 1
    int newton_steps = 0;
    int facial_reductions = 0;  ///< face compressions applied before phase 2
    std::string message;

    bool optimal() const { return status == Status::optimal; }
    ComplexMatrix value_of(const AffineMatrix& e) const { return e.evaluate(coordinates); }
    double value_of(const AffineScalar& e) const { return e.evaluate(coordinates); }
};

struct SolverOptions {
    double gap_tol = 1e-8;
    int max_newton_steps = 500;  ///< per phase
    double mu = 10.0;
    double infeasibility_tol = 1e-7;
    double interior_shift = 1e-8;
    double box_radius = 1e6;  ///< phase-1 coordinate bound
};

namespace detail {

/// Real symmetric LMI block F(x) = constant + sum_l x_l * terms[l].
struct LmiBlock {
    RealMatrix constant;
    std::vector<std::pair<int, RealMatrix>> terms;

    RealMatrix evaluate(const RealVector& x) const {
        RealMatrix f = constant;
        for (const auto& [l, g] : terms) f += x(l) * g;
        return f;
    }
};

struct BarrierProblem {
    int n = 0;
    std::vector<LmiBlock> blocks;
    RealVector c;

    double barrier_degree() const {
        double m = 0;
        for (const auto& b : blocks) m += static_cast<double>(b.constant.rows());
        return m;
    }
};

/// log det F(x) for every block, or nullopt when some block is not PD.
inline std::optional<double> log_det_sum(const BarrierProblem& p, const RealVector& x) {
    double total = 0.0;
    for (const auto& b : p.blocks) {
        Eigen::LLT<RealMatrix> llt(b.evaluate(x));
        if (llt.info() != Eigen::Success) return std::nullopt;
        const auto& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < l.rows(); ++i) {
            const double d = l(i, i);
            if (!(d > 0) || !std::isfinite(d)) return std::nullopt;
            total += 2.0 * std::log(d);
        }
    }
    return total;
}

struct NewtonStep {
    RealVector gradient;
    RealVector dx;
};

/// Gradient and Newton direction of  t c.x - sum_j log det F_j(x).
/// Hessian entries are <W_l, W_m> with W_l = L^{-1} G_l L^{-T}, F = L L^T.
inline std::optional<NewtonStep> newton_step(const BarrierProblem& p, const RealVector& x, double t) {
    const int n = p.n;
    RealVector g = t * p.c;
    RealMatrix h = RealMatrix::Zero(n, n);
    for (const auto& b : p.blocks) {
        const RealMatrix f = b.evaluate(x);
        Eigen::LLT<RealMatrix> llt(f);
        if (llt.info() != Eigen::Success) return std::nullopt;
        const RealMatrix linv = llt.matrixL().solve(RealMatrix::Identity(f.rows(), f.cols()));
        std::vector<RealMatrix> w;
        std::vector<int> idx;
        w.reserve(b.terms.size());
        for (const auto& [l, gl] : b.terms) {
            w.push_back(linv * gl * linv.transpose());
            idx.push_back(l);
            g(l) -= w.back().trace();
        }
        for (std::size_t a = 0; a < w.size(); ++a) {
            for (std::size_t c = a; c < w.size(); ++c) {
                const double v = w[a].cwiseProduct(w[c]).sum();
                h(idx[a], idx[c]) += v;
                if (c != a) h(idx[c], idx[a]) += v;
            }
        }
    }
    // Jacobi scaling first: near a thin feasible set the diagonal spans many
    // orders of magnitude.
    const double dmax = std::max(h.diagonal().maxCoeff(), 1e-300);
    const RealVector d = h.diagonal().cwiseMax(1e-20 * dmax).cwiseSqrt().cwiseInverse();
    const RealMatrix hs = d.asDiagonal() * h * d.asDiagonal();
    Eigen::LDLT<RealMatrix> ldlt(hs + 1e-14 * RealMatrix::Identity(n, n));
    RealVector dx = -(d.asDiagonal() * ldlt.solve(d.asDiagonal() * g)).eval();
    if (!dx.allFinite()) return std::nullopt;
    return NewtonStep{std::move(g), std::move(dx)};
}

/// Duality gap at x from the dual point Z_j = (F_j^{-1} - F_j^{-1} dF_j F_j^{-1}) / t,
/// dF_j the Newton displacement. Z satisfies the dual equalities exactly and is
/// PSD when the Newton decrement is below 1; otherwise nullopt.
inline std::optional<double> dual_gap(const BarrierProblem& p, const RealVector& x, double t) {
    const auto nt = newton_step(p, x, t);
    if (!nt) return std::nullopt;
    double gap = 0.0;
    for (const auto& b : p.blocks) {
        const RealMatrix f = b.evaluate(x);
        RealMatrix df = RealMatrix::Zero(f.rows(), f.cols());
        for (const auto& [l, gl] : b.terms) df += nt->dx(l) * gl;
        const RealMatrix finv = f.inverse();
        RealMatrix z = (finv - finv * df * finv) / t;
        z = (z + z.transpose()).eval() / 2.0;
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(z, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
            return std::nullopt;
        }
        gap += (f * z).trace();
    }
    return std::abs(gap);
}

struct CenteringOutcome {
    bool converged = false;
    bool diverged = false;
    int steps = 0;
};

/// Damped Newton on  t c.x - sum_j log det F_j(x)  from a strictly feasible x.
/// `early_exit` is checked after each step and may stop the iteration.
inline CenteringOutcome center(const BarrierProblem& p, RealVector& x, double t, int step_budget,
                               const std::function<bool(const RealVector&)>& early_exit = {}) {
    CenteringOutcome out;
    auto current_logdet = log_det_sum(p, x);
    if (!current_logdet) return out;
    while (out.steps < step_budget) {
        const auto nt = newton_step(p, x, t);
        if (!nt) return out;
        const RealVector& g = nt->gradient;
        const RealVector& dx = nt->dx;
        const double decrement_sq = -g.dot(dx);
        if (decrement_sq / 2.0 <= 1e-9 || !(decrement_sq > 0)) {
            out.converged = true;
            return out;
        }
        const double slope = g.dot(dx);
        double step = 1.0;
        std::optional<double> next_logdet;
        bool accepted = false;
        for (int k = 0; k < 80; ++k, step *= 0.5) {
            next_logdet = log_det_sum(p, x + step * dx);
            if (!next_logdet) continue;
            const double delta = t * step * p.c.dot(dx) - (*next_logdet - *current_logdet);
            if (delta <= 0.01 * step * slope) {
                accepted = true;
                break;
            }
        }
        ++out.steps;
        if (!accepted) {
            // No decrease along the Newton direction: accept the current
            // point when it is centered to rounding precision.
            out.converged = decrement_sq < 1e-4;
            return out;
        }
        const double moved = step * dx.norm();
        x += step * dx;
        current_logdet = next_logdet;
        if (moved <= 1e-13 * (1.0 + x.norm())) {
            // Step no longer changes x: centered as far as rounding allows.
            out.converged = decrement_sq < 1e-4;
            return out;
        }
        if (x.norm() > 1e10) {
            out.diverged = true;
            return out;
        }
        if (early_exit && early_exit(x)) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

struct Reduction {
    RealVector particular;  ///< y0
    RealMatrix nullspace;   ///< columns span {y : A y = 0}
    bool consistent = true;
    double residual = 0.0;
};

/// Eliminates A y = b with modified Gram-Schmidt (two passes per vector).
inline Reduction reduce_equalities(const RealMatrix& a, const RealVector& b, int n) {
    Reduction red;
    std::vector<RealVector> q;
    std::vector<double> beta;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        RealVector v = a.row(i).transpose();
        double target = b(i);
        const double scale = std::max(v.norm(), 1e-300);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < q.size(); ++k) {
                const double coef = q[k].dot(v);
                v -= coef * q[k];
                target -= coef * beta[k];
            }
        }
        const double norm = v.norm();
        if (norm <= 1e-10 * scale) {
            if (std::abs(target) > 1e-9 * std::max(1.0, std::abs(b(i)))) red.consistent = false;
            continue;
        }
        q.push_back(v / norm);
        beta.push_back(target / norm);
    }
    red.particular = RealVector::Zero(n);
    for (std::size_t k = 0; k < q.size(); ++k) red.particular += beta[k] * q[k];
    red.residual = a.rows() ? (a * red.particular - b).cwiseAbs().maxCoeff() : 0.0;

    std::vector<RealVector> basis = q;
    std::vector<RealVector> null;
    for (int i = 0; i < n && static_cast<int>(q.size() + null.size()) < n; ++i) {
        RealVector v = RealVector::Unit(n, i);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : basis) v -= u.dot(v) * u;
        }
        const double norm = v.norm();
        if (norm > 1e-8) {
            basis.push_back(v / norm);
            null.push_back(v / norm);
        }
    }
    red.nullspace = RealMatrix::Zero(n, static_cast<Eigen::Index>(null.size()));
    for (std::size_t k = 0; k < null.size(); ++k) red.nullspace.col(static_cast<Eigen::Index>(k)) = null[k];
    return red;
}

struct PhaseOne {
    enum class Outcome { interior, boundary, infeasible, failure };
    Outcome outcome = Outcome::failure;
    RealVector z;
    double slack = 0.0;
    double t = 1.0;
};

/// Minimizes a uniform slack s with F_j(z) + s I >= 0 inside the box |z_l| <= R.
/// Stops early once s is comfortably negative; `steps` accumulates Newton steps.
inline PhaseOne phase_one(const BarrierProblem& reduced, const SolverOptions& opt, int& steps) {
    const int k = reduced.n;
    BarrierProblem phase1;
    phase1.n = k + 1;
    phase1.c = RealVector::Unit(k + 1, k);
    double worst = 0.0;
    for (const auto& blk : reduced.blocks) {
        LmiBlock b1{blk.constant, blk.terms};
        b1.terms.emplace_back(k, RealMatrix::Identity(blk.constant.rows(), blk.constant.cols()));
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(blk.constant);
        worst = std::max(worst, -es.eigenvalues().minCoeff());
        phase1.blocks.push_back(std::move(b1));
    }
    phase1.blocks.push_back({RealMatrix::Constant(1, 1, 1.0), {{k, RealMatrix::Constant(1, 1, 1.0)}}});
    for (int l = 0; l < k; ++l) {
        phase1.blocks.push_back({RealMatrix::Constant(1, 1, opt.box_radius), {{l, RealMatrix::Constant(1, 1, 1.0)}}});
        phase1.blocks.push_back({RealMatrix::Constant(1, 1, opt.box_radius), {{l, RealMatrix::Constant(1, 1, -1.0)}}});
    }
    RealVector x1 = RealVector::Zero(k + 1);
    x1(k) = worst + 1.0;

    const double comfortable = 1e-3;
    const double m1 = phase1.barrier_degree();
    PhaseOne out;
    for (;;) {
        const auto res =
            center(phase1, x1, out.t, opt.max_newton_steps - steps, [&](const RealVector& x) { return x(k) < -comfortable; });
        steps += res.steps;
        out.z = x1.head(k);
        out.slack = x1(k);
        if (x1(k) < -comfortable) {
            out.outcome = PhaseOne::Outcome::interior;
            return out;
        }
        if (!res.converged) {
            out.outcome = PhaseOne::Outcome::failure;
            return out;
        }
        if (x1(k) - m1 / out.t > opt.infeasibility_tol) {
            out.outcome = PhaseOne::Outcome::infeasible;
            return out;
        }
        if (m1 / out.t < 0.1 * opt.infeasibility_tol || steps >= opt.max_newton_steps) break;
        out.t *= opt.mu;
    }
    out.outcome = PhaseOne::Outcome::boundary;
    return out;
}

struct FaceReduction {
    BarrierProblem problem;  ///< over w, with z = particular + nullspace * w
    RealVector particular;
    RealMatrix nullspace;
};

/// Eigendecompositions of Z_j = (F_j(z) + s I)^{-1} at the end of a phase 1
/// that stopped on the boundary (slack ~ 0). Up to scale these approximate a
/// dual certificate with sum_j <Z_j, F_j(z)> = 0 on the feasible set, so
/// their dominant eigenvectors span directions every feasible F_j(z)
/// annihilates.
struct Exposure {
    std::vector<Eigen::SelfAdjointEigenSolver<RealMatrix>> eig;
    std::vector<double> cuts;  ///< candidate thresholds, widest spectral gap first
};

inline std::optional<Exposure> exposure(const BarrierProblem& reduced, const PhaseOne& p1) {
    Exposure out;
    double top = 0.0;
    for (const auto& blk : reduced.blocks) {
        RealMatrix f = blk.evaluate(p1.z);
        f.diagonal().array() += p1.slack;
        Eigen::LLT<RealMatrix> llt(f);
        if (llt.info() != Eigen::Success) return std::nullopt;
        const RealMatrix inv = llt.solve(RealMatrix::Identity(f.rows(), f.cols()));
        out.eig.emplace_back((inv + inv.transpose()) / 2.0);
        top = std::max(top, out.eig.back().eigenvalues().maxCoeff());
    }
    // Gaps of at least two decades among eigenvalues within eight decades of the top.
    std::vector<double> all;
    for (const auto& es : out.eig)
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()(i) > 1e-8 * top) all.push_back(es.eigenvalues()(i));
    std::sort(all.begin(), all.end(), std::greater<>());
    std::vector<std::pair<double, double>> gaps;  // (ratio, cut)
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        if (all[i] / all[i + 1] > 1e2) gaps.emplace_back(all[i] / all[i + 1], std::sqrt(all[i] * all[i + 1]));
    }
    std::sort(gaps.begin(), gaps.end(), std::greater<>());
    for (const auto& g : gaps) out.cuts.push_back(g.second);
    if (!all.empty()) out.cuts.push_back(1e-8 * top);
    return out;
}

/// One facial-reduction step: the eigenvectors V_j of Z_j above `cut` give the
/// linear equalities F_j(z) V_j = 0 (solved by a rank-revealing SVD), and each
/// block is compressed onto the complement of V_j. Returns nullopt when
/// nothing is exposed or the equalities are inconsistent.
inline std::optional<FaceReduction> reduce_face(const BarrierProblem& reduced, const Exposure& ex, double cut) {
    const int k = reduced.n;
    struct Split {
        RealMatrix keep, exposed;
    };
    std::vector<Split> split;
    Eigen::Index total_rows = 0;
    bool any = false;
    for (const auto& es : ex.eig) {
        const RealVector& ev = es.eigenvalues();  // ascending
        Eigen::Index r = 0;
        while (r < ev.size() && ev(ev.size() - 1 - r) > cut) ++r;
        const Eigen::Index nb = ev.size();
        split.push_back({es.eigenvectors().leftCols(nb - r), es.eigenvectors().rightCols(r)});
        total_rows += nb * r;
        any |= r > 0;
    }
    if (!any) return std::nullopt;

    RealMatrix a = RealMatrix::Zero(total_rows, k);
    RealVector b = RealVector::Zero(total_rows);
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < reduced.blocks.size(); ++j) {
        const RealMatrix& v = split[j].exposed;
        if (v.cols() == 0) continue;
        const auto& blk = reduced.blocks[j];
        const Eigen::Index len = blk.constant.rows() * v.cols();
        b.segment(row, len) = -(blk.constant * v).reshaped();
        for (const auto& [l, g] : blk.terms) a.block(row, l, len, 1) += (g * v).reshaped();
        row += len;
    }
    Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-6 * smax) ++rank;
    if (rank == 0) return std::nullopt;

    FaceReduction out;
    out.particular = svd.matrixV().leftCols(rank) *
                     (sv.head(rank).cwiseInverse().asDiagonal() * (svd.matrixU().leftCols(rank).transpose() * b));
    if ((a * out.particular - b).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff())) return std::nullopt;
    out.nullspace = svd.matrixV().rightCols(k - rank);

    const int k2 = static_cast<int>(k - rank);
    out.problem.n = k2;
    out.problem.c = out.nullspace.transpose() * reduced.c;
    for (std::size_t j = 0; j < reduced.blocks.size(); ++j) {
        const RealMatrix& u = split[j].keep;
        if (u.cols() == 0) continue;
        const auto& blk = reduced.blocks[j];
        LmiBlock nb{u.transpose() * blk.evaluate(out.particular) * u, {}};
        nb.constant = (nb.constant + nb.constant.transpose()).eval() / 2.0;
        for (int m = 0; m < k2; ++m) {
            RealMatrix h = RealMatrix::Zero(blk.constant.rows(), blk.constant.cols());
            for (const auto& [l, g] : blk.terms) h += out.nullspace(l, m) * g;
            RealMatrix hc = u.transpose() * h * u;
            hc = (hc + hc.transpose()).eval() / 2.0;
            if (hc.cwiseAbs().maxCoeff() > 1e-14) nb.terms.emplace_back(m, std::move(hc));
        }
        out.problem.blocks.push_back(std::move(nb));
    }
    return out;
}

}  // namespace detail

inline Solution solve(const Problem& problem, const SolverOptions& opt = {}) {
    using detail::BarrierProblem;
    using detail::LmiBlock;

    Solution sol;
    const int n = problem.num_coordinates();
    const double sign = problem.sense() == Sense::maximize ? -1.0 : 1.0;

    RealVector c = RealVector::Zero(n);
    for (const auto& [k, v] : problem.objective().terms) c(k) = sign * v;

    const auto& eqs = problem.equalities();
    RealMatrix a = RealMatrix::Zero(static_cast<Eigen::Index>(eqs.size()), n);
    RealVector b(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        for (const auto& [k, v] : eqs[i].lhs.terms) a(static_cast<Eigen::Index>(i), k) = v;
        b(static_cast<Eigen::Index>(i)) = eqs[i].target - eqs[i].lhs.constant;
    }
    const detail::Reduction red = detail::reduce_equalities(a, b, n);
    if (!red.consistent) {
        sol.status = Status::infeasible;
        sol.message = "equality constraints are inconsistent";
        return sol;
    }
    const int k = static_cast<int>(red.nullspace.cols());

    // Reduced, embedded constraint blocks F_j(z) = C_j + sum_l z_l H_jl.
    BarrierProblem reduced;
    reduced.n = k;
    reduced.c = red.nullspace.transpose() * c;
    for (const auto& con : problem.psd_constraints()) {
        ComplexMatrix c0 = con.expr.constant();
        for (const auto& [i, g] : con.expr.terms()) c0 += red.particular(i) * g;
        LmiBlock block{hermitian_to_real_embedding(hermitian_part(c0), false), {}};
        for (int l = 0; l < k; ++l) {
            ComplexMatrix h = ComplexMatrix::Zero(con.expr.rows(), con.expr.cols());
            bool any = false;
            for (const auto& [i, g] : con.expr.terms()) {
                const double w = red.nullspace(i, l);
                if (w != 0.0) {
                    h += w * g;
                    any = true;
                }
            }
            if (any && h.cwiseAbs().maxCoeff() > 1e-14) {
                block.terms.emplace_back(l, hermitian_to_real_embedding(hermitian_part(h), false));
            }
        }
        reduced.blocks.push_back(std::move(block));
    }

    RealVector y_base = red.particular;  // y = y_base + y_map * z
    RealMatrix y_map = red.nullspace;

    auto finish = [&](const RealVector& z, double t, Status status, std::string msg) {
        sol.status = status;
        sol.message = std::move(msg);
        sol.coordinates = y_base + y_map * z;
        sol.value = problem.objective().evaluate(sol.coordinates);
        sol.variable_values.clear();
        for (const auto& v : problem.variables()) {
            ComplexMatrix m = ComplexMatrix::Zero(v.dim, v.dim);
            for (int q = 0; q < v.dim * v.dim; ++q) m += sol.coordinates(v.offset + q) * coordinate_basis(v.dim, q);
            sol.variable_values.push_back(m);
        }
        if (t > 0) sol.gap = detail::dual_gap(reduced, z, t).value_or(INFINITY);
        return sol;
    };

    auto single_point = [&] {
        double worst = INFINITY;
        for (const auto& blk : reduced.blocks) {
            Eigen::SelfAdjointEigenSolver<RealMatrix> es(blk.constant);
            worst = std::min(worst, es.eigenvalues().minCoeff());
        }
        if (worst < -opt.infeasibility_tol) return finish(RealVector(0), 0, Status::infeasible, "unique point violates PSD");
        sol.gap = 0.0;
        return finish(RealVector(0), 0, Status::optimal, "feasible set is a single point");
    };

    if (reduced.n == 0) return single_point();

    int steps = 0;
    detail::PhaseOne p1 = detail::phase_one(reduced, opt, steps);
    auto report_phase_one = [&](const detail::PhaseOne& r) {
        sol.newton_steps = steps;
        if (r.outcome == detail::PhaseOne::Outcome::failure) {
            return finish(r.z, 0, Status::numerical_failure, "phase 1 did not converge");
        }
        sol.phase1_slack = r.slack;
        sol.status = Status::infeasible;
        sol.message = "no point satisfies the PSD constraints (phase-1 slack " + std::to_string(r.slack) + ")";
        return sol;
    };
    using Outcome = detail::PhaseOne::Outcome;
    if (p1.outcome == Outcome::failure || p1.outcome == Outcome::infeasible) return report_phase_one(p1);

    // Facial reduction while phase 1 ends on the boundary. A reduced face that
    // turns out empty, or collapses onto a non-PSD point, means too much was
    // exposed: the next candidate cut is tried, and the identity shift is the
    // last resort.
    while (p1.outcome == Outcome::boundary && p1.slack > -opt.interior_shift && sol.facial_reductions < 4) {
        const auto ex = detail::exposure(reduced, p1);
        if (!ex) break;
        bool reduced_once = false;
        for (const double cut : ex->cuts) {
            auto face = detail::reduce_face(reduced, *ex, cut);
            if (!face) continue;
            const RealVector base = y_base + y_map * face->particular;
            const RealMatrix map = y_map * face->nullspace;
            if (face->problem.n == 0) {
                bool psd = true;
                for (const auto& blk : face->problem.blocks) {
                    Eigen::SelfAdjointEigenSolver<RealMatrix> es(blk.constant, Eigen::EigenvaluesOnly);
                    psd = psd && es.eigenvalues().minCoeff() >= -opt.infeasibility_tol;
                }
                if (!psd) continue;
                y_base = base;
                y_map = map;
                reduced = std::move(face->problem);
                ++sol.facial_reductions;
                sol.newton_steps = steps;
                return single_point();
            }
            detail::PhaseOne next = detail::phase_one(face->problem, opt, steps);
            if (next.outcome == Outcome::failure || next.outcome == Outcome::infeasible) continue;
            y_base = base;
            y_map = map;
            reduced = std::move(face->problem);
            p1 = std::move(next);
            ++sol.facial_reductions;
            reduced_once = true;
            break;
        }
        if (!reduced_once) break;
    }
    sol.phase1_slack = p1.slack;
    RealVector z = p1.z;

    if (p1.outcome != Outcome::interior && p1.slack > -opt.interior_shift) {
        sol.shift = std::max(p1.slack, 0.0) + opt.interior_shift;
        for (auto& blk : reduced.blocks) {
            for (Eigen::Index i = 0; i < blk.constant.rows(); ++i) blk.constant(i, i) += sol.shift;
        }
    }

    // Phase 2.
    const double m2 = reduced.barrier_degree();
    double t = 1.0;
    int steps2 = 0;
    for (;;) {
        const auto res = detail::center(reduced, z, t, opt.max_newton_steps - steps2);
        steps2 += res.steps;
        if (res.diverged) {
            sol.newton_steps = steps + steps2;
            return finish(z, 0, Status::numerical_failure, "objective appears unbounded");
        }
        if (!res.converged) {
            sol.newton_steps = steps + steps2;
            const bool close = m2 / t < 1e-6;
            return finish(z, t, Status::numerical_failure,
                          close ? "Newton centering stalled near the optimum" : "Newton centering failed");
        }
        const double value = problem.objective().evaluate(y_base + y_map * z);
        if (m2 / t < opt.gap_tol * std::max(1.0, std::abs(value))) break;
        t *= opt.mu;
    }
    sol.newton_steps = steps + steps2;
    finish(z, t, Status::optimal, "");
    if (sol.shift > 0) {
        sol.message = "no strict interior; constraints relaxed by " + std::to_string(sol.shift);
    } else if (sol.facial_reductions > 0) {
        sol.message = "solved on a face after " + std::to_string(sol.facial_reductions) + " facial reduction(s)";
    }
    return sol;
}

/// Independent re-check of a returned optimum against the original problem
/// data: every PSD expression is re-evaluated from the variable values and
/// eigen-decomposed; equalities are re-evaluated; the reported gap is checked.
struct Certificate {
    bool ok = false;
    double min_psd_eigenvalue = INFINITY;
    double max_equality_residual = 0.0;
    double gap = INFINITY;
    std::string detail;
};

inline Certificate verify(const Problem& problem, const Solution& sol, double tol = 1e-7) {
    Certificate cert;
    if (!sol.optimal()) {
        cert.detail = std::string("status is ") + to_string(sol.status);
        return cert;
    }
    RealVector y = RealVector::Zero(problem.num_coordinates());
    for (std::size_t i = 0; i < problem.variables().size(); ++i) {
        const auto& v = problem.variables()[i];
        const auto& m = sol.variable_values.at(i);
        int q = 0;
        for (int d = 0; d < v.dim; ++d) y(v.offset + q++) = m(d, d).real();
        for (int r = 0; r < v.dim; ++r) {
            for (int s = r + 1; s < v.dim; ++s) {
                y(v.offset + q++) = m(r, s).real();
                y(v.offset + q++) = m(r, s).imag();
            }
        }
    }
    for (const auto& con : problem.psd_constraints()) {
        const ComplexMatrix f = hermitian_part(con.expr.evaluate(y));
        cert.min_psd_eigenvalue = std::min(cert.min_psd_eigenvalue, min_eigenvalue(f));
    }
    for (const auto& eq : problem.equalities()) {
        cert.max_equality_residual = std::max(cert.max_equality_residual, std::abs(eq.lhs.evaluate(y) - eq.target));
    }
    cert.gap = sol.gap;
    cert.ok = cert.min_psd_eigenvalue >= -tol && cert.max_equality_residual <= tol &&
              cert.gap <= tol * std::max(1.0, std::abs(sol.value));
    if (!cert.ok) {
        cert.detail = "min eig " + std::to_string(cert.min_psd_eigenvalue) + ", eq residual " +
                      std::to_string(cert.max_equality_residual) + ", gap " + std::to_string(cert.gap);
    }
    return cert;
}

}  // namespace rspcap::sdp
