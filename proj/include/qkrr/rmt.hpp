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

#include "qkrr/errors.hpp"

namespace qkrr::rmt {

/// Eigenvalues of the population covariance, sorted non-increasing, all
/// >= 0, with at least one strictly positive entry. Exact zeros (padded
/// ambient dimensions) are permitted; they contribute nothing to any of
/// the spectral sums.
struct Spectrum {
    Eigen::VectorXd eigenvalues;

    Spectrum() = default;
    explicit Spectrum(Eigen::VectorXd values);

    static Spectrum isotropic(Eigen::Index p, double value = 1.0);

    Eigen::Index size() const { return eigenvalues.size(); }
};

/// Parameters of the deterministic-equivalent risk evaluation. beta_star
/// is the target vector projected onto the kernel eigenbasis and must
/// match the paired Spectrum in length.
struct TheoryParams {
    int n_train = 1;
    double lambda = 0.0;
    double sigma = 0.0;
    Eigen::VectorXd beta_star;
};

/// Deterministic-equivalent risk split. de_total is always the sum
/// de_bias + de_variance + noise_floor.
struct RiskBreakdown {
    double kappa = 0.0;
    double eta = 0.0;
    double de_bias = 0.0;
    double de_variance = 0.0;
    double noise_floor = 0.0;
    double de_total = 0.0;
};

/**
 * @brief Solves the self-consistent equation for the effective
 * regularization kappa.
 *
 * kappa is the unique positive root of
 *   (1/N) sum_i xi_i / (xi_i + kappa) + lambda / kappa = 1,
 * equivalently kappa = lambda + (1/N) Tr[Sigma (I + Sigma/kappa)^{-1}],
 * which certifies the bracket [lambda, lambda + (1/N) sum_i xi_i]. The
 * left side is strictly decreasing in kappa, so plain bisection converges
 * unconditionally; it stops at relative width 1e-14 (or 300 iterations)
 * and the returned root satisfies the equation to 1e-13.
 */
double solve_kappa(const Spectrum& spectrum, int n_train, double lambda);

/// Closed form for the isotropic spectrum (all eigenvalues 1) at aspect
/// ratio gamma = p / N:
///   kappa = (gamma - 1 + lambda + sqrt((gamma - 1 + lambda)^2 + 4 lambda)) / 2.
/// Serves as the independent oracle for solve_kappa.
double kappa_isotropic_closed_form(double gamma, double lambda);

/// Effective degrees of freedom df_s(t) = sum_i (xi_i / (xi_i + t))^s,
/// s in {1, 2}.
double effective_dof(const Spectrum& spectrum, double t, int s);

/// Normalized effective degrees of freedom eta = df_2(kappa) / N, in [0, 1]
/// whenever kappa solves the self-consistent equation.
double eta(const Spectrum& spectrum, int n_train, double kappa);

/// d kappa / d lambda = 1 / (1 - eta); used as a gradient-check oracle.
/// Throws SingularityError when eta -> 1.
double kappa_prime(const Spectrum& spectrum, int n_train, double kappa);

/**
 * @brief Deterministic equivalent of the test risk.
 *
 *   de_bias     = kappa^2 / (1 - eta) * sum_i beta_i^2 / (xi_i + kappa)^2
 *   de_variance = sigma^2 * eta / (1 - eta)
 *   noise_floor = sigma^2
 *
 * Throws SingularityError when eta >= 1 - 1e-12 (the interpolation-peak
 * divergence); callers report such cells as censored values.
 */
RiskBreakdown de_risk(const Spectrum& spectrum, const TheoryParams& params);

}  // namespace qkrr::rmt
