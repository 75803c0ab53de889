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

#include "qkrr/estimate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "qkrr/textio.hpp"

namespace qkrr::estimate {

namespace {

void check_symmetric(const Eigen::MatrixXd& A, const char* where) {
    if (A.rows() != A.cols()) {
        throw InputError(std::string(where) + ": matrix is not square");
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw InputError(std::string(where) +
                         ": matrix is not symmetric (max asymmetry " +
                         textio::format_double(asym) + ")");
    }
    if (!A.allFinite()) {
        throw InputError(std::string(where) + ": matrix has NaN/Inf entries");
    }
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eigendecomposition(
    const Eigen::MatrixXd& A) {
    check_symmetric(A, "symmetric_eigendecomposition");

    // Symmetrize to kill roundoff asymmetry before factorizing.
    const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericalError(
            "symmetric_eigendecomposition: iteration did not converge");
    }

    const Eigen::Index n = A.rows();
    // Reorder to descending; the stable sort keeps the solver's order
    // within degenerate eigenvalue blocks.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                         return solver.eigenvalues()[a] >
                                solver.eigenvalues()[b];
                     });
    Eigen::VectorXd values(n);
    Eigen::MatrixXd vectors(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        values[i] = solver.eigenvalues()[order[static_cast<std::size_t>(i)]];
        vectors.col(i) =
            solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    }
    // Deterministic sign: largest-magnitude entry of each column positive.
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        vectors.col(i).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, i) < 0.0) {
            vectors.col(i) = -vectors.col(i);
        }
    }
    return {std::move(values), std::move(vectors)};
}

SpectralEstimate estimate_population(const Eigen::MatrixXd& K_est,
                                     const Eigen::VectorXd& y_est) {
    if (K_est.rows() < 2) {
        throw InputError("estimate_population: need N_est >= 2");
    }
    if (y_est.size() != K_est.rows()) {
        throw InputError("estimate_population: label length " +
                         std::to_string(y_est.size()) +
                         " does not match Gram size " +
                         std::to_string(K_est.rows()));
    }
    if (!y_est.allFinite()) {
        throw InputError("estimate_population: labels have NaN/Inf entries");
    }

    const int n_est = static_cast<int>(K_est.rows());
    const Eigen::MatrixXd scaled = K_est / static_cast<double>(n_est);
    auto [values, vectors] = symmetric_eigendecomposition(scaled);

    const double largest = std::max(values[0], 0.0);
    const double psd_tol = 1e-8 * std::max(1.0, largest);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < -psd_tol) {
            throw InputError(
                "estimate_population: Gram matrix is not PSD (eigenvalue " +
                textio::format_double(values[i]) + ")");
        }
        if (values[i] < 0.0) {
            values[i] = 0.0;
        }
    }

    SpectralEstimate out;
    out.beta_est = vectors.transpose() * y_est /
                   std::sqrt(static_cast<double>(n_est));
    out.eigenvalues = std::move(values);
    out.eigenvectors = std::move(vectors);
    out.n_est = n_est;
    return out;
}

std::pair<rmt::Spectrum, Eigen::VectorXd> truncated_spectrum(
    const SpectralEstimate& estimate, double rel_cut) {
    if (estimate.eigenvalues.size() == 0 || estimate.eigenvalues[0] <= 0.0) {
        throw InputError("truncated_spectrum: estimate has no positive "
                         "eigenvalues");
    }
    const double cut = rel_cut * estimate.eigenvalues[0];
    Eigen::Index keep = 0;
    while (keep < estimate.eigenvalues.size() &&
           estimate.eigenvalues[keep] >= cut) {
        ++keep;
    }
    return {rmt::Spectrum(estimate.eigenvalues.head(keep)),
            estimate.beta_est.head(keep)};
}

std::pair<rmt::Spectrum, Eigen::VectorXd> theory_spectrum(
    const SpectralEstimate& estimate, double rel_cut) {
    if (estimate.eigenvalues.size() == 0 || estimate.eigenvalues[0] <= 0.0) {
        throw InputError("theory_spectrum: estimate has no positive "
                         "eigenvalues");
    }
    const double cut = rel_cut * estimate.eigenvalues[0];
    Eigen::VectorXd values = estimate.eigenvalues;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < cut) {
            values[i] = 0.0;
        }
    }
    return {rmt::Spectrum(std::move(values)), estimate.beta_est};
}

void dump_estimate_csv(const SpectralEstimate& estimate, std::ostream& out) {
    out << "index,eigenvalue,beta_est\n";
    for (Eigen::Index i = 0; i < estimate.eigenvalues.size(); ++i) {
        out << i << ',' << textio::format_double(estimate.eigenvalues[i])
            << ',' << textio::format_double(estimate.beta_est[i]) << '\n';
    }
}

}  // namespace qkrr::estimate
