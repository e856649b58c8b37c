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

#pragma once

#include <stdexcept>
#include <string>

namespace rspcap {

/// Argument outside the mathematical domain of an operation (bad index,
/// wrong dimension, parameter out of range).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Input data failed a physical validity check (non-Hermitian, non-PSD,
/// malformed file).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Tomography outputs do not assemble into a Hermitian process matrix.
struct InconsistentTomographyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Conditioning on a measurement outcome that never occurs.
struct ZeroProbabilityBranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Process fidelity requested between two mixed processes.
struct UnsupportedComparisonError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ModelInconsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The SDP solver did not return an optimal point.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rspcap
