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

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "qkrr/errors.hpp"

namespace qkrr::qsim {

enum class CircuitFamily { HEA, TPA };

std::string family_name(CircuitFamily family);          // "hea" / "tpa"
CircuitFamily family_from_name(const std::string& name);

/**
 * @brief Data-encoding circuit description.
 *
 * `depth` is the layer count L (default: n_qubits) and `input_dim` the
 * classical input dimension d (default: 2 * n_qubits). Input entries are
 * assigned to qubits cyclically: entry j (1-based) acts on qubit
 * ((j - 1) mod n) + 1.
 *
 * Rotation convention: R_X(t) = exp(-i t X / 2), R_Z(t) = exp(-i t Z / 2).
 * Each HEA layer applies, for j = 1..d in index order, R_X(u_j) then
 * R_Z(u_j) on the assigned qubit, followed by the CX chain
 * CX_{1,2}, CX_{2,3}, ..., CX_{n-1,n} (control above target). A TPA layer
 * applies only the R_X rotations.
 */
struct AnsatzSpec {
    CircuitFamily family = CircuitFamily::HEA;
    int n_qubits = 1;
    int depth = 1;
    int input_dim = 2;

    /// Builds a spec; depth/input_dim <= 0 select the defaults L = n, d = 2n.
    static AnsatzSpec make(CircuitFamily family, int n_qubits, int depth = 0,
                           int input_dim = 0);

    void validate() const;

    std::int64_t state_dim() const;      // 2^n
    std::int64_t ambient_dim() const;    // 4^n
    std::int64_t effective_dim() const;  // 4^n for HEA, 3^n for TPA
};

/// Pure n-qubit state. Amplitude index bits are ordered with qubit 1 as
/// the most significant bit.
struct StateVector {
    int n_qubits = 0;
    Eigen::VectorXcd amplitudes;
};

/// Coefficients of a state in the normalized Pauli basis
/// (Tr[P_i P_j] = delta_ij, each tensor factor divided by sqrt(2)),
/// indexed lexicographically over {I, X, Y, Z} per qubit with qubit 1 as
/// the most significant base-4 digit. Pure states have unit-norm
/// coefficient vectors and all-identity coefficient 1 / sqrt(2^n).
struct PauliVector {
    int n_qubits = 0;
    Eigen::VectorXd coefficients;
};

/// Encodes u into the normalized statevector U(u)|0...0>.
StateVector build_state(const AnsatzSpec& ansatz, const Eigen::VectorXd& u);

/// Fidelity kernel k(u, v) = |<psi(u)|psi(v)>|^2, computed from the two
/// statevectors' overlap (never via density matrices).
double kernel_value(const AnsatzSpec& ansatz, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v);

/// Gram matrix of the fidelity kernel over the input rows. The upper
/// triangle is computed and mirrored, so the result is exactly symmetric;
/// diagonal entries are exactly 1.
Eigen::MatrixXd kernel_matrix(const AnsatzSpec& ansatz,
                              const Eigen::MatrixXd& inputs);

/// Cross-kernel block: entry (i, j) = k(test_i, train_j).
Eigen::MatrixXd cross_kernel(const AnsatzSpec& ansatz,
                             const Eigen::MatrixXd& train,
                             const Eigen::MatrixXd& test);

/// Pauli coefficient vector r(u), r_i = Tr[rho(u) P_i]. Guarded to
/// n_qubits <= 6 (4^n coefficients).
PauliVector pauli_vector(const AnsatzSpec& ansatz, const Eigen::VectorXd& u);

/// Draws `sample_count` inputs from N(0, I_d), forms the sample second
/// moment of their Pauli vectors and counts eigenvalues above
/// rel_tol * largest. Recovers the effective feature dimension of the
/// circuit family.
int effective_rank_probe(const AnsatzSpec& ansatz, int sample_count,
                         std::uint64_t seed, double rel_tol = 1e-10);

/// Debug dump: one "index,pauli_string,coefficient" row per basis element,
/// preceded by a comment line documenting the index order.
void dump_pauli_csv(const PauliVector& pauli, std::ostream& out);

// Statevector-level building blocks. The harness precomputes encoded
// states once and derives many kernel blocks from them.

/// Row i is the statevector of input row i (N x 2^n).
Eigen::MatrixXcd encode_states(const AnsatzSpec& ansatz,
                               const Eigen::MatrixXd& inputs);

/// Gram of precomputed states; exactly symmetric with unit diagonal.
Eigen::MatrixXd gram_from_states(const Eigen::MatrixXcd& states);

/// Cross block from precomputed states: entry (i, j) uses test row i and
/// train row j.
Eigen::MatrixXd cross_from_states(const Eigen::MatrixXcd& test_states,
                                  const Eigen::MatrixXcd& train_states);

}  // namespace qkrr::qsim
