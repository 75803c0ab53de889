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
#include <iosfwd>
#include <utility>

#include "qkrr/errors.hpp"
#include "qkrr/rmt.hpp"

namespace qkrr::estimate {

/**
 * @brief Population statistics estimated from a kernel matrix.
 *
 * Decomposing K_est / N_est = H diag(eigenvalues) H^T gives the spectrum
 * estimate; the eigenvectors are the Nystrom eigenfunction values up to the
 * sqrt(N_est) scaling, and beta_est = H^T y / sqrt(N_est) estimates the
 * target vector projected onto the kernel eigenbasis.
 */
struct SpectralEstimate {
    Eigen::VectorXd eigenvalues;   // descending, tiny negatives clipped to 0
    Eigen::MatrixXd eigenvectors;  // columns h_k, orthonormal
    Eigen::VectorXd beta_est;
    int n_est = 0;
};

/// Eigendecomposition of a symmetric matrix: values sorted descending,
/// eigenvector columns orthonormal with a deterministic sign convention
/// (the largest-magnitude entry of each column is made positive; ties go
/// to the first such entry).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eigendecomposition(
    const Eigen::MatrixXd& A);

/// Estimates the population spectrum and projected target vector from a
/// Gram matrix and its labels. Negative eigenvalues within numerical
/// roundoff are clipped to zero; larger ones reject the input as non-PSD.
SpectralEstimate estimate_population(const Eigen::MatrixXd& K_est,
                                     const Eigen::VectorXd& y_est);

/// Truncated view: drops eigenvalues below rel_cut * largest together with
/// their beta entries, leaving only the resolved spectral modes.
std::pair<rmt::Spectrum, Eigen::VectorXd> truncated_spectrum(
    const SpectralEstimate& estimate, double rel_cut = 1e-12);

/// Risk-formula view: keeps every mode but clamps eigenvalues below
/// rel_cut * largest to exact zero. Target mass sitting on the zero modes
/// (model misspecification plus label noise) then enters the bias term as
/// beta_i^2, which is what makes the predicted curves comparable to
/// empirical test errors on targets that are not fully representable.
std::pair<rmt::Spectrum, Eigen::VectorXd> theory_spectrum(
    const SpectralEstimate& estimate, double rel_cut = 1e-12);

/// CSV dump: "index,eigenvalue,beta_est" rows (inspection aid).
void dump_estimate_csv(const SpectralEstimate& estimate, std::ostream& out);

}  // namespace qkrr::estimate
