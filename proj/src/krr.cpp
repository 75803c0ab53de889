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

#include "qkrr/krr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace qkrr::krr {

namespace {

constexpr double kResidualRelTol = 1e-8;
constexpr double kPinvRelCutoff = 1e-12;

double residual_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& y) {
    return (A * alpha - y).norm();
}

}  // namespace

std::pair<DualWeights, FitReport> fit_dual(const Eigen::MatrixXd& K,
                                           const Eigen::VectorXd& y,
                                           double lambda) {
    if (K.rows() != K.cols()) {
        throw InputError("fit_dual: kernel matrix is not square");
    }
    const Eigen::Index n = K.rows();
    if (n < 1) {
        throw InputError("fit_dual: empty system");
    }
    if (y.size() != n) {
        throw InputError("fit_dual: label length does not match kernel size");
    }
    if (!K.allFinite() || !y.allFinite()) {
        throw InputError("fit_dual: inputs contain NaN/Inf");
    }
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw InputError("fit_dual: lambda must be finite and >= 0");
    }
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InputError("fit_dual: kernel matrix is not symmetric");
    }

    const double ridge = static_cast<double>(n) * lambda;
    const Eigen::MatrixXd A =
        K + ridge * Eigen::MatrixXd::Identity(n, n);
    const double y_norm = y.norm();
    const double residual_tol = kResidualRelTol * y_norm;

    DualWeights weights;
    weights.lambda = lambda;
    weights.n_train = static_cast<int>(n);
    FitReport report;

    bool solved = false;
    {
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            weights.alpha = llt.solve(y);
            report.residual = residual_norm(A, weights.alpha, y);
            if (report.residual <= residual_tol) {
                report.solver = SolverKind::Cholesky;
                solved = true;
            }
        }
    }

    if (!solved && lambda > 0.0) {
        // With a positive ridge the system is PD in exact arithmetic, so a
        // factorization failure is pure conditioning; one jittered retry
        // keeps the fast path. The residual is still checked against the
        // unjittered contract. Ridgeless singular systems skip this and
        // take the minimum-norm pseudo-inverse below.
        const double jitter = 1e-12 * A.diagonal().maxCoeff();
        Eigen::LLT<Eigen::MatrixXd> llt(
            A + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd alpha = llt.solve(y);
            const double res = residual_norm(A, alpha, y);
            if (res <= residual_tol) {
                weights.alpha = std::move(alpha);
                report.residual = res;
                report.solver = SolverKind::Cholesky;
                report.jitter_used = jitter;
                solved = true;
            }
        }
    }

    if (!solved) {
        // Minimum-norm solution through the spectral pseudo-inverse.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("fit_dual: eigendecomposition fallback did "
                                 "not converge");
        }
        const Eigen::VectorXd& evals = eig.eigenvalues();
        const double cutoff = kPinvRelCutoff * evals.cwiseAbs().maxCoeff();
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (evals[i] > cutoff) {
                inv[i] = 1.0 / evals[i];
            }
        }
        weights.alpha = eig.eigenvectors() *
                        (inv.asDiagonal() *
                         (eig.eigenvectors().transpose() * y));
        report.residual = residual_norm(A, weights.alpha, y);
        report.solver = SolverKind::EigenPinv;
        report.jitter_used = 0.0;
    }

    report.train_mse =
        (K * weights.alpha - y).squaredNorm() / static_cast<double>(n);
    return {std::move(weights), report};
}

Eigen::VectorXd predict(const DualWeights& weights,
                        const Eigen::MatrixXd& k_cross) {
    if (k_cross.cols() != weights.alpha.size() ||
        weights.alpha.size() != weights.n_train) {
        throw InputError("predict: cross-kernel has " +
                         std::to_string(k_cross.cols()) +
                         " columns, expected " +
                         std::to_string(weights.n_train));
    }
    return k_cross * weights.alpha;
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size()) {
        throw InputError("mse: length mismatch");
    }
    if (pred.size() == 0) {
        throw InputError("mse: empty vectors");
    }
    return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace qkrr::krr
