// Copyright 2026 The qkrr Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qkrr {

/// Invalid argument shapes, values, or malformed input files.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds a hard resource guard (for example the qubit count cap
/// of the Pauli-basis routines).
class ResourceLimitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to meet its accuracy contract.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The deterministic-equivalent risk diverges: eta -> 1 at the
/// interpolation peak. Carries the solved kappa and eta so callers can
/// report the censored cell.
class SingularityError : public std::runtime_error {
  public:
    SingularityError(double kappa, double eta, const std::string& what)
        : std::runtime_error(what), kappa_(kappa), eta_(eta) {}

    double kappa() const noexcept { return kappa_; }
    double eta() const noexcept { return eta_; }

  private:
    double kappa_;
    double eta_;
};

}  // namespace qkrr
