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

// Two-party preparation protocol on a shared two-qubit state.
//
// To prepare U|n>_m on Bob's side, Alice measures her qubit in the basis
// {U|n>_m, U|1-n>_m}. Outcome a = 1 (projection on U|1-n>_m) leaves Bob with
// the target for a singlet and is the heralding outcome. Outcome a = 0 is
// fixed by Bob with C_m = U P_m U^dagger, where P_3 = X and P_1 = P_2 = Z;
// for m = 3 and U = R(phi) this is the Z rotation, up to a global phase.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include "rspcap/channels.hpp"
#include "rspcap/errors.hpp"
#include "rspcap/linalg.hpp"
#include "rspcap/states.hpp"

namespace rspcap {

enum class ProtocolMode { deterministic, heralded };

struct ProtocolConfig {
    double phi = 0.0;
    DensityMatrix shared_state = states::singlet();
    ProtocolMode mode = ProtocolMode::deterministic;
    std::optional<std::uint64_t> samples;  ///< nullopt: exact probabilities
    std::uint64_t seed = 0;

    UnitaryGate gate() const { return rotation_unitary(phi); }

    void validate() const {
        if (shared_state.dim() != 4) throw DomainError("shared state must be a two-qubit state");
        if (samples && *samples < 1) throw DomainError("sample count must be at least 1");
        if (!std::isfinite(phi)) throw DomainError("phi must be finite");
    }
};

struct ConditionalState {
    double probability = 0.0;
    DensityMatrix state;
};

/// tr_A(rho (M (x) I)) without normalization.
inline ComplexMatrix unnormalized_branch(const DensityMatrix& rho_ab, const ComplexMatrix& effect) {
    if (rho_ab.dim() != 4) throw DomainError("conditional state requires a two-qubit state");
    if (effect.rows() != 2 || effect.cols() != 2) throw DomainError("effect must be 2x2");
    return hermitian_part(partial_trace(ComplexMatrix(rho_ab.matrix() * kron(effect, pauli::identity())), Subsystem::A));
}

inline ConditionalState conditional_state(const DensityMatrix& rho_ab, const ComplexMatrix& effect) {
    if (effect.rows() != 2 || effect.cols() != 2) throw DomainError("effect must be 2x2");
    const auto eig = hermitian_eigen(effect);
    if (eig.values(1) < -1e-10 || eig.values(0) > 1.0 + 1e-10) throw DomainError("effect must satisfy 0 <= M <= I");
    const ComplexMatrix branch = unnormalized_branch(rho_ab, effect);
    const double p = real_trace(branch);
    if (p < 1e-12) throw ZeroProbabilityBranchError("measurement outcome has zero probability");
    return {p, DensityMatrix::from_matrix(branch / p, 1e-9)};
}

/// Alice's projector for outcome a given the requested input.
inline ComplexMatrix alice_effect(const UnitaryGate& gate, const MeasurementSetting& input, int a) {
    if (a != 0 && a != 1) throw DomainError("Alice outcome must be 0 or 1");
    const auto& u = gate.matrix();
    const int n = a == 1 ? 1 - input.n : input.n;
    const ComplexVector v = u * pauli_eigenvector(n, input.m);
    return outer(v);
}

/// Bob's correction after outcome a = 0.
inline ComplexMatrix correction(const UnitaryGate& gate, const MeasurementSetting& input) {
    const auto& u = gate.matrix();
    const ComplexMatrix flip = input.m == 3 ? pauli::x() : pauli::z();
    return u * flip * u.adjoint();
}

struct ProtocolBranches {
    std::array<double, 2> probability{};
    std::array<ComplexMatrix, 2> bob;  ///< unnormalized, after correction
};

inline ProtocolBranches protocol_branches(const ProtocolConfig& cfg, const MeasurementSetting& input) {
    cfg.validate();
    const UnitaryGate gate = cfg.gate();
    const ComplexMatrix c = correction(gate, input);
    ProtocolBranches br;
    for (int a = 0; a < 2; ++a) {
        ComplexMatrix b = unnormalized_branch(cfg.shared_state, alice_effect(gate, input, a));
        if (a == 0) b = c * b * c.adjoint();
        br.probability[static_cast<std::size_t>(a)] = real_trace(b);
        br.bob[static_cast<std::size_t>(a)] = hermitian_part(b);
    }
    return br;
}

/// Deterministic: the probability-weighted mixture of both (corrected)
/// branches. Heralded: the a = 1 branch, trace equal to its probability.
inline DensityMatrix rsp_output(const ProtocolConfig& cfg, const MeasurementSetting& input) {
    const ProtocolBranches br = protocol_branches(cfg, input);
    if (cfg.mode == ProtocolMode::heralded) {
        if (br.probability[1] < 1e-12) throw ZeroProbabilityBranchError("heralding outcome has zero probability");
        return DensityMatrix::from_matrix(br.bob[1], 1e-9);
    }
    return DensityMatrix::from_matrix(br.bob[0] + br.bob[1], 1e-9);
}

inline BasisOutputs rsp_basis_outputs(const ProtocolConfig& cfg) {
    BasisOutputs out;
    for (const auto& s : all_settings()) out[static_cast<std::size_t>(s.index())] = rsp_output(cfg, s).matrix();
    return out;
}

/// Exact tomography. For shared states other than the singlet the six
/// corrected outputs are not the images of one linear map, and the raw matrix
/// can have small negative eigenvalues; it is then projected like sampled data.
inline ProjectedProcess rsp_process_tomography(const ProtocolConfig& cfg) {
    ComplexMatrix raw = chi_matrix_from_basis_outputs(rsp_basis_outputs(cfg));
    if (min_eigenvalue(raw) >= -1e-9) {
        ProcessMatrix chi = ProcessMatrix::from_matrix(raw, 1e-9);
        return {std::move(raw), std::move(chi)};
    }
    return project_process(raw);
}

// ---------------------------------------------------------------------------
// Sampling

/// Counter-based generator: value k of stream s is a splitmix64 hash of
/// (seed, s, k), so every (input, Bob setting) pair draws independently.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct CountKey {
    int input = 0;        ///< MeasurementSetting::index() of the prepared state
    int alice = 0;        ///< a
    int bob_setting = 1;  ///< m'
    int bob = 0;          ///< b

    auto operator<=>(const CountKey&) const = default;

    /// "n,m|a|m',b"
    std::string str() const {
        const auto s = MeasurementSetting::from_index(input);
        return std::to_string(s.n) + "," + std::to_string(s.m) + "|" + std::to_string(alice) + "|" +
               std::to_string(bob_setting) + "," + std::to_string(bob);
    }

    static CountKey parse(const std::string& text) {
        int n = -1, m = -1, a = -1, mp = -1, b = -1;
        char tail = 0;
        if (std::sscanf(text.c_str(), "%d,%d|%d|%d,%d%c", &n, &m, &a, &mp, &b, &tail) != 5) {
            throw ValidationError("malformed count key '" + text + "'");
        }
        if (a < 0 || a > 1 || b < 0 || b > 1 || mp < 1 || mp > 3) throw ValidationError("count key out of range '" + text + "'");
        try {
            return {MeasurementSetting(n, m).index(), a, mp, b};
        } catch (const DomainError&) {
            throw ValidationError("count key out of range '" + text + "'");
        }
    }
};

struct TomographyData {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double phi = 0.0;
    ProtocolMode mode = ProtocolMode::deterministic;
    std::map<CountKey, std::uint64_t> counts;

    bool has_setting(int input, int bob_setting) const {
        return counts.contains({input, 0, bob_setting, 0}) || counts.contains({input, 0, bob_setting, 1}) ||
               counts.contains({input, 1, bob_setting, 0}) || counts.contains({input, 1, bob_setting, 1});
    }

    std::uint64_t count(const CountKey& k) const {
        auto it = counts.find(k);
        return it == counts.end() ? 0 : it->second;
    }

    /// Every present (input, Bob setting) pair sums to the shot budget.
    void validate() const {
        for (int in = 0; in < 6; ++in) {
            for (int mp = 1; mp <= 3; ++mp) {
                if (!has_setting(in, mp)) continue;
                std::uint64_t total = 0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) total += count({in, a, mp, b});
                if (total != shots) {
                    throw ValidationError("counts for " + CountKey{in, 0, mp, 0}.str() + " do not sum to the shot budget");
                }
            }
        }
    }
};

/// Joint Born probabilities P(a, b) for Bob measuring sigma_{m'} after correction.
inline std::array<std::array<double, 2>, 2> joint_probabilities(const ProtocolConfig& cfg, const MeasurementSetting& input,
                                                                int bob_setting) {
    const ProtocolBranches br = protocol_branches(cfg, input);
    std::array<std::array<double, 2>, 2> p{};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const ComplexMatrix proj = pauli_projector(MeasurementSetting(b, bob_setting));
            p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                std::max(0.0, (br.bob[static_cast<std::size_t>(a)] * proj).trace().real());
        }
    }
    return p;
}

/// Multinomial draw of N joint (a, b) events; inserts all four cells.
inline void sample_counts(const ProtocolConfig& cfg, const MeasurementSetting& input, int bob_setting,
                          TomographyData& data) {
    if (!cfg.samples) throw DomainError("sample_counts requires a sample count");
    if (bob_setting < 1 || bob_setting > 3) throw DomainError("Bob setting must be 1, 2 or 3");
    const auto p = joint_probabilities(cfg, input, bob_setting);
    std::array<double, 4> cdf{};
    double acc = 0;
    for (int k = 0; k < 4; ++k) {
        acc += p[static_cast<std::size_t>(k / 2)][static_cast<std::size_t>(k % 2)];
        cdf[static_cast<std::size_t>(k)] = acc;
    }
    std::array<std::uint64_t, 4> n{};
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(input.index() * 3 + (bob_setting - 1)));
    for (std::uint64_t i = 0; i < *cfg.samples; ++i) {
        const double u = rng.uniform() * acc;
        int k = 0;
        while (k < 3 && u >= cdf[static_cast<std::size_t>(k)]) ++k;
        ++n[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < 4; ++k) data.counts[{input.index(), k / 2, bob_setting, k % 2}] = n[static_cast<std::size_t>(k)];
}

inline TomographyData sample_tomography(const ProtocolConfig& cfg) {
    cfg.validate();
    if (!cfg.samples) throw DomainError("sampled tomography requires a sample count");
    TomographyData data{*cfg.samples, cfg.seed, cfg.phi, cfg.mode, {}};
    for (const auto& s : all_settings())
        for (int mp = 1; mp <= 3; ++mp) sample_counts(cfg, s, mp, data);
    return data;
}

/// rho = (I + sum_m s_m sigma_m)/2 from outcome frequencies f[m-1][b]; a
/// setting with no events contributes s_m = 0. Projected by nearest_density.
inline DensityMatrix reconstruct_from_frequencies(const std::array<std::array<double, 2>, 3>& f) {
    ComplexMatrix m = pauli::identity();
    for (int k = 0; k < 3; ++k) {
        const double total = f[static_cast<std::size_t>(k)][0] + f[static_cast<std::size_t>(k)][1];
        if (total <= 0) continue;
        const double s = (f[static_cast<std::size_t>(k)][0] - f[static_cast<std::size_t>(k)][1]) / total;
        m += s * pauli::sigma(k + 1);
    }
    return nearest_density(m / 2.0);
}

/// Bob's state for one input and Alice outcome.
inline DensityMatrix reconstruct_state(const TomographyData& data, const MeasurementSetting& input, int alice) {
    std::array<std::array<double, 2>, 3> f{};
    for (int mp = 1; mp <= 3; ++mp) {
        if (!data.has_setting(input.index(), mp)) {
            throw IncompleteDataError("no counts for Bob setting " + std::to_string(mp) + " of input " +
                                      CountKey{input.index(), alice, mp, 0}.str());
        }
        for (int b = 0; b < 2; ++b) {
            f[static_cast<std::size_t>(mp - 1)][static_cast<std::size_t>(b)] =
                static_cast<double>(data.count({input.index(), alice, mp, b}));
        }
    }
    return reconstruct_from_frequencies(f);
}

/// Empirical p_A(a) over all three Bob settings.
inline double alice_frequency(const TomographyData& data, const MeasurementSetting& input, int alice) {
    double hit = 0, total = 0;
    for (int mp = 1; mp <= 3; ++mp) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const auto c = static_cast<double>(data.count({input.index(), a, mp, b}));
                total += c;
                if (a == alice) hit += c;
            }
        }
    }
    return total > 0 ? hit / total : 0.0;
}

struct SampledProcess {
    TomographyData data;
    BasisOutputs outputs;  ///< weighted by the measured p_A
    ComplexMatrix raw;     ///< before PSD projection
    ProcessMatrix chi;     ///< projected and normalized
};

inline SampledProcess process_from_data(const TomographyData& data) {
    data.validate();
    BasisOutputs out;
    for (const auto& s : all_settings()) {
        ComplexMatrix o = ComplexMatrix::Zero(2, 2);
        const int first = data.mode == ProtocolMode::heralded ? 1 : 0;
        for (int a = first; a < 2; ++a) {
            const double p = alice_frequency(data, s, a);
            if (p > 0) o += p * reconstruct_state(data, s, a).matrix();
        }
        out[static_cast<std::size_t>(s.index())] = o;
    }
    ComplexMatrix raw = chi_matrix_from_basis_outputs(out);
    ProjectedProcess proj = project_process(raw);
    return {data, out, std::move(proj.raw), std::move(proj.projected)};
}

inline SampledProcess sampled_process_tomography(const ProtocolConfig& cfg) {
    return process_from_data(sample_tomography(cfg));
}

}  // namespace rspcap
