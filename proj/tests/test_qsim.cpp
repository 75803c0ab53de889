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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "qkrr/estimate.hpp"
#include "qkrr/qsim.hpp"
#include "qkrr/rng.hpp"

using qkrr::qsim::AnsatzSpec;
using qkrr::qsim::CircuitFamily;

namespace {

Eigen::VectorXd random_input(qkrr::rng::Stream& stream, int d,
                             double scale = 1.0) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) {
        u[i] = scale * stream.gaussian();
    }
    return u;
}

// Per-qubit accumulated rotation angle of a TPA circuit: depth copies of
// every input entry assigned to the qubit.
Eigen::VectorXd tpa_effective_angles(const AnsatzSpec& ansatz,
                                     const Eigen::VectorXd& u) {
    Eigen::VectorXd angles = Eigen::VectorXd::Zero(ansatz.n_qubits);
    for (int j = 1; j <= ansatz.input_dim; ++j) {
        angles[(j - 1) % ansatz.n_qubits] += u[j - 1];
    }
    return angles * static_cast<double>(ansatz.depth);
}

}  // namespace

TEST_CASE("build_state: single-qubit rotations match the closed form") {
    const auto tpa1 = AnsatzSpec::make(CircuitFamily::TPA, 1, 1, 1);

    SUBCASE("zero angle is the computational ground state") {
        const auto state =
            qkrr::qsim::build_state(tpa1, Eigen::VectorXd::Zero(1));
        CHECK(std::abs(state.amplitudes[0] - 1.0) < 1e-15);
        CHECK(std::abs(state.amplitudes[1]) < 1e-15);
    }

    SUBCASE("R_X(theta)|0> = (cos(theta/2), -i sin(theta/2))") {
        for (const double theta : {0.3, 1.0, -2.2, 3.9}) {
            Eigen::VectorXd u(1);
            u[0] = theta;
            const auto state = qkrr::qsim::build_state(tpa1, u);
            const std::complex<double> a0(std::cos(0.5 * theta), 0.0);
            const std::complex<double> a1(0.0, -std::sin(0.5 * theta));
            CHECK(std::abs(state.amplitudes[0] - a0) < 1e-14);
            CHECK(std::abs(state.amplitudes[1] - a1) < 1e-14);
        }
    }
}

TEST_CASE("build_state: unitarity over random circuits") {
    qkrr::rng::Stream stream(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(stream.uniform01() * 3.0);
        const auto family = stream.uniform01() < 0.5 ? CircuitFamily::HEA
                                                     : CircuitFamily::TPA;
        const auto ansatz = AnsatzSpec::make(family, n);
        const auto state = qkrr::qsim::build_state(
            ansatz, random_input(stream, ansatz.input_dim));
        CHECK(std::abs(state.amplitudes.squaredNorm() - 1.0) < 1e-12);
    }
}

TEST_CASE("build_state: input shape is validated") {
    const auto hea = AnsatzSpec::make(CircuitFamily::HEA, 2);  // d = 4
    CHECK_THROWS_AS(qkrr::qsim::build_state(hea, Eigen::VectorXd::Zero(3)),
                    qkrr::InputError);
    CHECK_THROWS_AS(qkrr::qsim::kernel_value(hea, Eigen::VectorXd::Zero(4),
                                             Eigen::VectorXd::Zero(5)),
                    qkrr::InputError);
}

TEST_CASE("kernel_value: self-fidelity, orthogonal states, closed forms") {
    qkrr::rng::Stream stream(23);

    SUBCASE("k(u, u) = 1") {
        for (const auto family : {CircuitFamily::HEA, CircuitFamily::TPA}) {
            const auto ansatz = AnsatzSpec::make(family, 2);
            const auto u = random_input(stream, ansatz.input_dim);
            CHECK(std::abs(qkrr::qsim::kernel_value(ansatz, u, u) - 1.0) <
                  1e-12);
        }
    }

    SUBCASE("antipodal single-qubit states are orthogonal") {
        const auto tpa1 = AnsatzSpec::make(CircuitFamily::TPA, 1, 1, 1);
        Eigen::VectorXd u(1), v(1);
        u[0] = 0.0;
        v[0] = std::numbers::pi;
        CHECK(std::abs(qkrr::qsim::kernel_value(tpa1, u, v)) < 1e-12);
    }

    SUBCASE("single-qubit kernel is cos^2((a-b)/2)") {
        const auto tpa1 = AnsatzSpec::make(CircuitFamily::TPA, 1, 1, 1);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd u(1), v(1);
            u[0] = stream.uniform(-6.0, 6.0);
            v[0] = stream.uniform(-6.0, 6.0);
            const double expected =
                std::pow(std::cos(0.5 * (u[0] - v[0])), 2);
            CHECK(std::abs(qkrr::qsim::kernel_value(tpa1, u, v) - expected) <
                  1e-12);
        }
    }

    SUBCASE("two-qubit TPA kernel factorizes per qubit") {
        const auto tpa2 = AnsatzSpec::make(CircuitFamily::TPA, 2, 1, 2);
        for (int trial = 0; trial < 20; ++trial) {
            const auto u = random_input(stream, 2, 2.0);
            const auto v = random_input(stream, 2, 2.0);
            const double expected =
                std::pow(std::cos(0.5 * (u[0] - v[0])), 2) *
                std::pow(std::cos(0.5 * (u[1] - v[1])), 2);
            CHECK(std::abs(qkrr::qsim::kernel_value(tpa2, u, v) - expected) <
                  1e-12);
        }
    }

    SUBCASE("symmetry and range") {
        for (const auto family : {CircuitFamily::HEA, CircuitFamily::TPA}) {
            const auto ansatz = AnsatzSpec::make(family, 3);
            for (int trial = 0; trial < 25; ++trial) {
                const auto u = random_input(stream, ansatz.input_dim);
                const auto v = random_input(stream, ansatz.input_dim);
                const double kuv = qkrr::qsim::kernel_value(ansatz, u, v);
                const double kvu = qkrr::qsim::kernel_value(ansatz, v, u);
                CHECK(std::abs(kuv - kvu) < 1e-14);
                CHECK(kuv >= 0.0);
                CHECK(kuv <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("TPA kernels factorize into single-qubit kernels of summed angles") {
    qkrr::rng::Stream stream(31);
    const auto single = AnsatzSpec::make(CircuitFamily::TPA, 1, 1, 1);
    for (int n = 1; n <= 3; ++n) {
        const int depth = 1 + static_cast<int>(stream.uniform01() * 3.0);
        const int d = n + static_cast<int>(stream.uniform01() * (2 * n));
        const auto ansatz = AnsatzSpec::make(CircuitFamily::TPA, n, depth, d);
        for (int trial = 0; trial < 10; ++trial) {
            const auto u = random_input(stream, d);
            const auto v = random_input(stream, d);
            const auto au = tpa_effective_angles(ansatz, u);
            const auto av = tpa_effective_angles(ansatz, v);
            double expected = 1.0;
            for (int q = 0; q < n; ++q) {
                expected *= qkrr::qsim::kernel_value(single, au.segment(q, 1),
                                                     av.segment(q, 1));
            }
            CHECK(std::abs(qkrr::qsim::kernel_value(ansatz, u, v) -
                           expected) < 1e-10);
        }
    }
}

TEST_CASE("kernel_matrix: degenerate shapes, symmetry, PSD") {
    qkrr::rng::Stream stream(47);
    const auto hea2 = AnsatzSpec::make(CircuitFamily::HEA, 2);

    SUBCASE("N = 1 gives [[1]]") {
        const Eigen::MatrixXd inputs = random_input(stream, 4).transpose();
        const auto k = qkrr::qsim::kernel_matrix(hea2, inputs);
        REQUIRE(k.rows() == 1);
        CHECK(k(0, 0) == 1.0);
    }

    SUBCASE("identical inputs give the all-ones matrix") {
        Eigen::MatrixXd inputs(2, 4);
        inputs.row(0) = random_input(stream, 4);
        inputs.row(1) = inputs.row(0);
        const auto k = qkrr::qsim::kernel_matrix(hea2, inputs);
        CHECK((k - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff() <
              1e-12);
    }

    SUBCASE("exact symmetry and unit diagonal") {
        Eigen::MatrixXd inputs(7, 4);
        for (int i = 0; i < 7; ++i) {
            inputs.row(i) = random_input(stream, 4);
        }
        const auto k = qkrr::qsim::kernel_matrix(hea2, inputs);
        CHECK(k == k.transpose());
        for (int i = 0; i < 7; ++i) {
            CHECK(k(i, i) == 1.0);
        }
    }

    SUBCASE("Gram matrices are PSD up to N = 200") {
        for (const int n_inputs : {3, 200}) {
            Eigen::MatrixXd inputs(n_inputs, 4);
            for (int i = 0; i < n_inputs; ++i) {
                inputs.row(i) = random_input(stream, 4);
            }
            const auto k = qkrr::qsim::kernel_matrix(hea2, inputs);
            const auto [evals, evecs] =
                qkrr::estimate::symmetric_eigendecomposition(k);
            CHECK(evals.minCoeff() >= -1e-8);
        }
    }
}

TEST_CASE("cross_kernel: consistency with kernel_matrix") {
    qkrr::rng::Stream stream(59);
    const auto tpa2 = AnsatzSpec::make(CircuitFamily::TPA, 2);
    Eigen::MatrixXd train(5, 4);
    for (int i = 0; i < 5; ++i) {
        train.row(i) = random_input(stream, 4);
    }

    SUBCASE("test == train reproduces the Gram matrix") {
        const auto cross = qkrr::qsim::cross_kernel(tpa2, train, train);
        const auto gram = qkrr::qsim::kernel_matrix(tpa2, train);
        CHECK((cross - gram).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("empty test block") {
        const Eigen::MatrixXd empty(0, 4);
        const auto cross = qkrr::qsim::cross_kernel(tpa2, train, empty);
        CHECK(cross.rows() == 0);
        CHECK(cross.cols() == 5);
    }

    SUBCASE("a test point equal to a training point reproduces its row") {
        const Eigen::MatrixXd test = train.row(2);
        const auto cross = qkrr::qsim::cross_kernel(tpa2, train, test);
        const auto gram = qkrr::qsim::kernel_matrix(tpa2, train);
        CHECK((cross.row(0) - gram.row(2)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pauli_vector: single-qubit TPA states in the normalized basis") {
    const auto tpa1 = AnsatzSpec::make(CircuitFamily::TPA, 1, 1, 1);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    SUBCASE("theta = 0: (1, 0, 0, 1)/sqrt(2) in (I, X, Y, Z) order") {
        const auto r =
            qkrr::qsim::pauli_vector(tpa1, Eigen::VectorXd::Zero(1));
        REQUIRE(r.coefficients.size() == 4);
        CHECK(std::abs(r.coefficients[0] - inv_sqrt2) < 1e-14);
        CHECK(std::abs(r.coefficients[1]) < 1e-14);
        CHECK(std::abs(r.coefficients[2]) < 1e-14);
        CHECK(std::abs(r.coefficients[3] - inv_sqrt2) < 1e-14);
    }

    SUBCASE("theta = pi/2: (1, 0, -1, 0)/sqrt(2)") {
        Eigen::VectorXd u(1);
        u[0] = 0.5 * std::numbers::pi;
        const auto r = qkrr::qsim::pauli_vector(tpa1, u);
        CHECK(std::abs(r.coefficients[0] - inv_sqrt2) < 1e-14);
        CHECK(std::abs(r.coefficients[1]) < 1e-14);
        CHECK(std::abs(r.coefficients[2] + inv_sqrt2) < 1e-14);
        CHECK(std::abs(r.coefficients[3]) < 1e-14);
    }

    SUBCASE("general theta: (1, 0, -sin, cos)/sqrt(2)") {
        for (const double theta : {0.7, -1.3, 2.9}) {
            Eigen::VectorXd u(1);
            u[0] = theta;
            const auto r = qkrr::qsim::pauli_vector(tpa1, u);
            CHECK(std::abs(r.coefficients[0] - inv_sqrt2) < 1e-13);
            CHECK(std::abs(r.coefficients[1]) < 1e-13);
            CHECK(std::abs(r.coefficients[2] + std::sin(theta) * inv_sqrt2) <
                  1e-13);
            CHECK(std::abs(r.coefficients[3] - std::cos(theta) * inv_sqrt2) <
                  1e-13);
        }
    }
}

TEST_CASE("pauli_vector: two-qubit TPA product structure") {
    // One layer, one input per qubit, so the effective angles are the raw
    // inputs.
    const auto tpa2 = AnsatzSpec::make(CircuitFamily::TPA, 2, 1, 2);
    Eigen::VectorXd u(2);
    u << 0.8, -1.7;
    const double s1 = std::sin(u[0]), c1 = std::cos(u[0]);
    const double s2 = std::sin(u[1]), c2 = std::cos(u[1]);
    const auto r = qkrr::qsim::pauli_vector(tpa2, u);
    REQUIRE(r.coefficients.size() == 16);

    // Index = 4 * digit(qubit 1) + digit(qubit 2) with I=0, X=1, Y=2, Z=3;
    // each normalized coefficient is the per-qubit (1, -sin, cos) product
    // over 2.
    const auto idx = [](int q1, int q2) { return 4 * q1 + q2; };
    const double half = 0.5;
    CHECK(std::abs(r.coefficients[idx(0, 0)] - half) < 1e-13);            // II
    CHECK(std::abs(r.coefficients[idx(0, 2)] + half * s2) < 1e-13);       // IY
    CHECK(std::abs(r.coefficients[idx(0, 3)] - half * c2) < 1e-13);       // IZ
    CHECK(std::abs(r.coefficients[idx(2, 0)] + half * s1) < 1e-13);       // YI
    CHECK(std::abs(r.coefficients[idx(2, 2)] - half * s1 * s2) < 1e-13);  // YY
    CHECK(std::abs(r.coefficients[idx(2, 3)] + half * s1 * c2) < 1e-13);  // YZ
    CHECK(std::abs(r.coefficients[idx(3, 0)] - half * c1) < 1e-13);       // ZI
    CHECK(std::abs(r.coefficients[idx(3, 2)] + half * c1 * s2) < 1e-13);  // ZY
    CHECK(std::abs(r.coefficients[idx(3, 3)] - half * c1 * c2) < 1e-13);  // ZZ
    // Every string containing X vanishes for R_X-only circuits.
    for (const int i : {1, 4, 5, 6, 7, 9, 13}) {
        CHECK(std::abs(r.coefficients[i]) < 1e-13);
    }
}

TEST_CASE("pauli_vector: inner products reproduce the kernel") {
    qkrr::rng::Stream stream(71);
    for (const auto family : {CircuitFamily::HEA, CircuitFamily::TPA}) {
        for (int n = 1; n <= 3; ++n) {
            const auto ansatz = AnsatzSpec::make(family, n);
            for (int trial = 0; trial < 9; ++trial) {
                const auto u = random_input(stream, ansatz.input_dim);
                const auto v = random_input(stream, ansatz.input_dim);
                const auto ru = qkrr::qsim::pauli_vector(ansatz, u);
                const auto rv = qkrr::qsim::pauli_vector(ansatz, v);
                const double dot = ru.coefficients.dot(rv.coefficients);
                CHECK(std::abs(dot -
                               qkrr::qsim::kernel_value(ansatz, u, v)) <
                      1e-10);
                // Unit norm and unit-trace coefficient for pure states.
                CHECK(std::abs(ru.coefficients.norm() - 1.0) < 1e-10);
                CHECK(std::abs(ru.coefficients[0] -
                               1.0 / std::sqrt(std::pow(2.0, n))) < 1e-12);
            }
        }
    }
}

TEST_CASE("pauli_vector: qubit guard") {
    const auto big = AnsatzSpec::make(CircuitFamily::TPA, 7);
    CHECK_THROWS_AS(
        qkrr::qsim::pauli_vector(big, Eigen::VectorXd::Zero(big.input_dim)),
        qkrr::ResourceLimitError);
}

TEST_CASE("effective_rank_probe: TPA sees 3^n modes, HEA sees 4^n") {
    CHECK(qkrr::qsim::effective_rank_probe(
              AnsatzSpec::make(CircuitFamily::TPA, 1), 200, 5) == 3);
    CHECK(qkrr::qsim::effective_rank_probe(
              AnsatzSpec::make(CircuitFamily::TPA, 2), 500, 5) == 9);
    CHECK(qkrr::qsim::effective_rank_probe(
              AnsatzSpec::make(CircuitFamily::HEA, 2), 500, 5) == 16);
}

TEST_CASE("effective_rank_probe: sample-count precondition") {
    CHECK_THROWS_AS(qkrr::qsim::effective_rank_probe(
                        AnsatzSpec::make(CircuitFamily::TPA, 2), 15, 5),
                    qkrr::InputError);
}

TEST_CASE("dump_pauli_csv documents the index order") {
    const auto tpa2 = AnsatzSpec::make(CircuitFamily::TPA, 2, 1, 2);
    Eigen::VectorXd u(2);
    u << 0.3, 0.4;
    const auto r = qkrr::qsim::pauli_vector(tpa2, u);
    std::ostringstream out;
    qkrr::qsim::dump_pauli_csv(r, out);
    const std::string text = out.str();
    CHECK(text.find("qubit 1 most significant") != std::string::npos);
    CHECK(text.find("index,pauli_string,coefficient") != std::string::npos);
    CHECK(text.find("11,YZ,") != std::string::npos);
}
