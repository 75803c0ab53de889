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

#include "qkrr/qsim.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <ostream>

#include "qkrr/estimate.hpp"
#include "qkrr/rng.hpp"
#include "qkrr/textio.hpp"

namespace qkrr::qsim {

namespace {

using complex = std::complex<double>;

constexpr int kMaxPauliQubits = 6;  // 4^n coefficient guard

// Bit position of a 1-based qubit index; qubit 1 is the most significant.
inline int bit_of(int n_qubits, int qubit) { return n_qubits - qubit; }

void apply_rx(Eigen::VectorXcd& amp, int n_qubits, int qubit, double theta) {
    const std::int64_t bit = std::int64_t{1} << bit_of(n_qubits, qubit);
    const double c = std::cos(0.5 * theta);
    const complex mis(0.0, -std::sin(0.5 * theta));
    const std::int64_t dim = amp.size();
    for (std::int64_t b = 0; b < dim; ++b) {
        if ((b & bit) != 0) {
            continue;
        }
        const complex a0 = amp[b];
        const complex a1 = amp[b | bit];
        amp[b] = c * a0 + mis * a1;
        amp[b | bit] = mis * a0 + c * a1;
    }
}

void apply_rz(Eigen::VectorXcd& amp, int n_qubits, int qubit, double theta) {
    const std::int64_t bit = std::int64_t{1} << bit_of(n_qubits, qubit);
    const complex p0 = std::polar(1.0, -0.5 * theta);
    const complex p1 = std::polar(1.0, 0.5 * theta);
    const std::int64_t dim = amp.size();
    for (std::int64_t b = 0; b < dim; ++b) {
        amp[b] *= ((b & bit) != 0) ? p1 : p0;
    }
}

void apply_cx(Eigen::VectorXcd& amp, int n_qubits, int control, int target) {
    const std::int64_t cbit = std::int64_t{1} << bit_of(n_qubits, control);
    const std::int64_t tbit = std::int64_t{1} << bit_of(n_qubits, target);
    const std::int64_t dim = amp.size();
    for (std::int64_t b = 0; b < dim; ++b) {
        if ((b & cbit) != 0 && (b & tbit) == 0) {
            std::swap(amp[b], amp[b | tbit]);
        }
    }
}

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= base;
    }
    return v;
}

void check_input_dim(const AnsatzSpec& ansatz, const Eigen::VectorXd& u,
                     const char* where) {
    if (u.size() != ansatz.input_dim) {
        throw InputError(std::string(where) + ": input has length " +
                         std::to_string(u.size()) + ", ansatz expects " +
                         std::to_string(ansatz.input_dim));
    }
}

void check_pauli_guard(const AnsatzSpec& ansatz) {
    if (ansatz.n_qubits > kMaxPauliQubits) {
        throw ResourceLimitError(
            "pauli_vector: n_qubits = " + std::to_string(ansatz.n_qubits) +
            " exceeds the 4^n guard (max " + std::to_string(kMaxPauliQubits) +
            ")");
    }
}

}  // namespace

std::string family_name(CircuitFamily family) {
    return family == CircuitFamily::HEA ? "hea" : "tpa";
}

CircuitFamily family_from_name(const std::string& name) {
    if (name == "hea" || name == "HEA") {
        return CircuitFamily::HEA;
    }
    if (name == "tpa" || name == "TPA") {
        return CircuitFamily::TPA;
    }
    throw InputError("unknown circuit family '" + name +
                     "' (expected hea or tpa)");
}

AnsatzSpec AnsatzSpec::make(CircuitFamily family, int n_qubits, int depth,
                            int input_dim) {
    AnsatzSpec spec;
    spec.family = family;
    spec.n_qubits = n_qubits;
    spec.depth = depth > 0 ? depth : n_qubits;
    spec.input_dim = input_dim > 0 ? input_dim : 2 * n_qubits;
    spec.validate();
    return spec;
}

void AnsatzSpec::validate() const {
    if (n_qubits < 1) {
        throw InputError("AnsatzSpec: n_qubits must be >= 1");
    }
    if (n_qubits > 12) {
        throw ResourceLimitError("AnsatzSpec: n_qubits > 12 is unsupported");
    }
    if (depth < 1) {
        throw InputError("AnsatzSpec: depth must be >= 1");
    }
    if (input_dim < 1) {
        throw InputError("AnsatzSpec: input_dim must be >= 1");
    }
}

std::int64_t AnsatzSpec::state_dim() const { return ipow(2, n_qubits); }

std::int64_t AnsatzSpec::ambient_dim() const { return ipow(4, n_qubits); }

std::int64_t AnsatzSpec::effective_dim() const {
    return family == CircuitFamily::HEA ? ipow(4, n_qubits)
                                        : ipow(3, n_qubits);
}

StateVector build_state(const AnsatzSpec& ansatz, const Eigen::VectorXd& u) {
    ansatz.validate();
    check_input_dim(ansatz, u, "build_state");

    const int n = ansatz.n_qubits;
    StateVector state;
    state.n_qubits = n;
    state.amplitudes = Eigen::VectorXcd::Zero(ansatz.state_dim());
    state.amplitudes[0] = 1.0;

    for (int layer = 0; layer < ansatz.depth; ++layer) {
        for (int j = 1; j <= ansatz.input_dim; ++j) {
            const int qubit = ((j - 1) % n) + 1;
            apply_rx(state.amplitudes, n, qubit, u[j - 1]);
            if (ansatz.family == CircuitFamily::HEA) {
                apply_rz(state.amplitudes, n, qubit, u[j - 1]);
            }
        }
        if (ansatz.family == CircuitFamily::HEA) {
            for (int q = 1; q < n; ++q) {
                apply_cx(state.amplitudes, n, q, q + 1);
            }
        }
    }

    const double norm_err = std::abs(state.amplitudes.squaredNorm() - 1.0);
    if (norm_err > 1e-12) {
        throw NumericalError("build_state: norm drifted by " +
                             textio::format_double(norm_err));
    }
    return state;
}

double kernel_value(const AnsatzSpec& ansatz, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v) {
    check_input_dim(ansatz, u, "kernel_value");
    check_input_dim(ansatz, v, "kernel_value");
    const StateVector a = build_state(ansatz, u);
    const StateVector b = build_state(ansatz, v);
    return std::norm(a.amplitudes.dot(b.amplitudes));
}

Eigen::MatrixXcd encode_states(const AnsatzSpec& ansatz,
                               const Eigen::MatrixXd& inputs) {
    ansatz.validate();
    if (inputs.cols() != ansatz.input_dim) {
        throw InputError("encode_states: inputs have " +
                         std::to_string(inputs.cols()) +
                         " columns, ansatz expects " +
                         std::to_string(ansatz.input_dim));
    }
    Eigen::MatrixXcd states(inputs.rows(), ansatz.state_dim());
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        states.row(i) = build_state(ansatz, inputs.row(i)).amplitudes;
    }
    return states;
}

Eigen::MatrixXd gram_from_states(const Eigen::MatrixXcd& states) {
    const Eigen::Index n = states.rows();
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double k = std::norm(states.row(i).dot(states.row(j)));
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }
    return gram;
}

Eigen::MatrixXd cross_from_states(const Eigen::MatrixXcd& test_states,
                                  const Eigen::MatrixXcd& train_states) {
    if (test_states.cols() != train_states.cols() && test_states.rows() > 0 &&
        train_states.rows() > 0) {
        throw InputError("cross_from_states: state dimensions differ");
    }
    Eigen::MatrixXd cross(test_states.rows(), train_states.rows());
    for (Eigen::Index i = 0; i < test_states.rows(); ++i) {
        for (Eigen::Index j = 0; j < train_states.rows(); ++j) {
            cross(i, j) =
                std::norm(test_states.row(i).dot(train_states.row(j)));
        }
    }
    return cross;
}

Eigen::MatrixXd kernel_matrix(const AnsatzSpec& ansatz,
                              const Eigen::MatrixXd& inputs) {
    if (inputs.rows() < 1) {
        throw InputError("kernel_matrix: need at least one input row");
    }
    return gram_from_states(encode_states(ansatz, inputs));
}

Eigen::MatrixXd cross_kernel(const AnsatzSpec& ansatz,
                             const Eigen::MatrixXd& train,
                             const Eigen::MatrixXd& test) {
    const Eigen::MatrixXcd train_states = encode_states(ansatz, train);
    if (test.rows() == 0) {
        return Eigen::MatrixXd(0, train.rows());
    }
    return cross_from_states(encode_states(ansatz, test), train_states);
}

PauliVector pauli_vector(const AnsatzSpec& ansatz, const Eigen::VectorXd& u) {
    ansatz.validate();
    check_pauli_guard(ansatz);
    check_input_dim(ansatz, u, "pauli_vector");

    const StateVector state = build_state(ansatz, u);
    const int n = ansatz.n_qubits;
    const std::int64_t dim = ansatz.state_dim();
    const std::int64_t n_pauli = ansatz.ambient_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    // i^k for the Y factors.
    const complex iphase[4] = {complex(1, 0), complex(0, 1), complex(-1, 0),
                               complex(0, -1)};

    PauliVector out;
    out.n_qubits = n;
    out.coefficients.resize(n_pauli);

    for (std::int64_t index = 0; index < n_pauli; ++index) {
        // Decode base-4 digits, qubit 1 first: 0=I, 1=X, 2=Y, 3=Z.
        std::uint64_t flip_mask = 0;  // X and Y factors flip the bit
        std::uint64_t sign_mask = 0;  // Y and Z factors flip the sign
        int n_y = 0;
        std::int64_t rest = index;
        for (int qubit = n; qubit >= 1; --qubit) {
            const int digit = static_cast<int>(rest & 3);
            rest >>= 2;
            const std::uint64_t bit = std::uint64_t{1} << bit_of(n, qubit);
            if (digit == 1) {
                flip_mask |= bit;
            } else if (digit == 2) {
                flip_mask |= bit;
                sign_mask |= bit;
                ++n_y;
            } else if (digit == 3) {
                sign_mask |= bit;
            }
        }
        // <psi| P |psi> with P|b> = i^{n_y} (-1)^{popcount(b & sign_mask)}
        // |b ^ flip_mask>.
        complex acc(0.0, 0.0);
        for (std::int64_t b = 0; b < dim; ++b) {
            const std::uint64_t ub = static_cast<std::uint64_t>(b);
            const double sign =
                (std::popcount(ub & sign_mask) & 1) != 0 ? -1.0 : 1.0;
            acc += std::conj(state.amplitudes[static_cast<std::int64_t>(
                       ub ^ flip_mask)]) *
                   sign * state.amplitudes[b];
        }
        out.coefficients[index] = (iphase[n_y & 3] * acc).real() * scale;
    }
    return out;
}

int effective_rank_probe(const AnsatzSpec& ansatz, int sample_count,
                         std::uint64_t seed, double rel_tol) {
    ansatz.validate();
    check_pauli_guard(ansatz);
    const std::int64_t n_pauli = ansatz.ambient_dim();
    if (sample_count < n_pauli) {
        throw InputError("effective_rank_probe: sample_count must be >= 4^n");
    }

    rng::Stream stream(seed);
    Eigen::MatrixXd second_moment =
        Eigen::MatrixXd::Zero(n_pauli, n_pauli);
    Eigen::VectorXd u(ansatz.input_dim);
    for (int s = 0; s < sample_count; ++s) {
        for (int j = 0; j < ansatz.input_dim; ++j) {
            u[j] = stream.gaussian();
        }
        const PauliVector r = pauli_vector(ansatz, u);
        second_moment.selfadjointView<Eigen::Lower>().rankUpdate(
            r.coefficients, 1.0);
    }
    second_moment = second_moment.selfadjointView<Eigen::Lower>();
    second_moment /= static_cast<double>(sample_count);

    const auto [eigenvalues, eigenvectors] =
        estimate::symmetric_eigendecomposition(second_moment);
    const double largest = eigenvalues[0];
    if (largest <= 0.0) {
        return 0;
    }
    int count = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues[i] > rel_tol * largest) {
            ++count;
        }
    }
    return count;
}

void dump_pauli_csv(const PauliVector& pauli, std::ostream& out) {
    static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};
    out << "# normalized Pauli basis (Tr[PiPj]=delta_ij); index order: "
           "lexicographic over {I,X,Y,Z} per qubit, qubit 1 most "
           "significant\n";
    out << "index,pauli_string,coefficient\n";
    const int n = pauli.n_qubits;
    for (Eigen::Index index = 0; index < pauli.coefficients.size(); ++index) {
        std::string label(static_cast<std::size_t>(n), 'I');
        std::int64_t rest = index;
        for (int qubit = n; qubit >= 1; --qubit) {
            label[static_cast<std::size_t>(qubit - 1)] =
                kLetters[rest & 3];
            rest >>= 2;
        }
        out << index << ',' << label << ','
            << textio::format_double(pauli.coefficients[index]) << '\n';
    }
}

}  // namespace qkrr::qsim
