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
#include <utility>

#include "qkrr/errors.hpp"

namespace qkrr::krr {

enum class SolverKind { Cholesky, EigenPinv };

/// Fitted dual coefficients: (K + N lambda I) alpha = y.
struct DualWeights {
    Eigen::VectorXd alpha;
    double lambda = 0.0;
    int n_train = 0;
};

/// Fit diagnostics. `residual` is ||(K + N lambda I) alpha - y||_2; fits
/// with residual above 1e-8 ||y||_2 are singular-regime least-squares
/// solutions (possible only in the ridgeless, rank-deficient case) and
/// should be treated accordingly by the caller.
struct FitReport {
    double train_mse = 0.0;
    SolverKind solver = SolverKind::Cholesky;
    double jitter_used = 0.0;
    double residual = 0.0;
};

/**
 * @brief Solves the dual ridge system (K + N lambda I) alpha = y.
 *
 * Primary path: Cholesky after adding the N lambda ridge. If the
 * factorization fails or the solution misses the residual contract
 * (lambda near 0 with singular K), falls back to an eigendecomposition
 * pseudo-inverse with relative cutoff 1e-12, which realizes the
 * minimum-norm solution. lambda = 0 is honored through that fallback.
 */
std::pair<DualWeights, FitReport> fit_dual(const Eigen::MatrixXd& K,
                                           const Eigen::VectorXd& y,
                                           double lambda);

/// Kernel prediction: k_cross * alpha, with k_cross(i, j) = k(u_j, t_i)
/// for training points u and prediction points t.
Eigen::VectorXd predict(const DualWeights& weights,
                        const Eigen::MatrixXd& k_cross);

/// Mean squared error between two equal-length vectors.
double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

}  // namespace qkrr::krr
