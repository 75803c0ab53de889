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

#include "qkrr/rmt.hpp"

#include <cmath>
#include <string>

#include "qkrr/textio.hpp"

namespace qkrr::rmt {

namespace {

constexpr double kEtaSingular = 1.0 - 1e-12;
constexpr double kFixedPointTol = 1e-13;
constexpr double kRelWidthTol = 1e-14;
constexpr int kMaxBisectionIters = 300;

// Left side of the self-consistent equation minus one; strictly
// decreasing in kappa. Accumulated in long double so that long spectra do
// not eat into the 1e-13 fixed-point budget.
double fixed_point_gap(const Eigen::VectorXd& xi, int n_train, double lambda,
                       double kappa) {
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const long double x = xi[i];
        if (x > 0.0L) {
            sum += x / (x + static_cast<long double>(kappa));
        }
    }
    sum /= static_cast<long double>(n_train);
    sum += static_cast<long double>(lambda) / static_cast<long double>(kappa);
    return static_cast<double>(sum - 1.0L);
}

// d/d kappa of the gap; strictly negative for kappa > 0.
double fixed_point_gap_derivative(const Eigen::VectorXd& xi, int n_train,
                                  double lambda, double kappa) {
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const long double x = xi[i];
        if (x > 0.0L) {
            const long double denom = x + static_cast<long double>(kappa);
            sum += x / (denom * denom);
        }
    }
    sum /= static_cast<long double>(n_train);
    sum += static_cast<long double>(lambda) /
           (static_cast<long double>(kappa) * static_cast<long double>(kappa));
    return -static_cast<double>(sum);
}

void check_n_train(int n_train) {
    if (n_train < 1) {
        throw InputError("rmt: n_train must be >= 1");
    }
}

}  // namespace

Spectrum::Spectrum(Eigen::VectorXd values) : eigenvalues(std::move(values)) {
    if (eigenvalues.size() == 0) {
        throw InputError("Spectrum: must contain at least one eigenvalue");
    }
    bool any_positive = false;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (!std::isfinite(eigenvalues[i]) || eigenvalues[i] < 0.0) {
            throw InputError("Spectrum: eigenvalues must be finite and >= 0");
        }
        if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) {
            throw InputError("Spectrum: eigenvalues must be non-increasing");
        }
        any_positive = any_positive || eigenvalues[i] > 0.0;
    }
    if (!any_positive) {
        throw InputError("Spectrum: needs at least one positive eigenvalue");
    }
}

Spectrum Spectrum::isotropic(Eigen::Index p, double value) {
    return Spectrum(Eigen::VectorXd::Constant(p, value));
}

double solve_kappa(const Spectrum& spectrum, int n_train, double lambda) {
    check_n_train(n_train);
    if (!(lambda > 0.0)) {
        throw InputError("solve_kappa: lambda must be > 0 (use >= 1e-12 as "
                         "the ridgeless proxy)");
    }

    const Eigen::VectorXd& xi = spectrum.eigenvalues;
    const double trace_over_n = xi.sum() / static_cast<double>(n_train);
    double lo = lambda;
    // The root lies in [lambda, lambda + tr/N]. When the ridge dominates,
    // the root sits within one ulp of the upper endpoint, so widen it
    // slightly to keep the computed bracket valid after rounding.
    double hi = (lambda + trace_over_n) * (1.0 + 1e-9);

    // gap(lo) >= 0 >= gap(hi) by construction of the fixed-point form.
    if (fixed_point_gap(xi, n_train, lambda, lo) < 0.0 ||
        fixed_point_gap(xi, n_train, lambda, hi) > 0.0) {
        throw NumericalError("solve_kappa: certified bracket failed; this "
                             "should be impossible for a valid spectrum");
    }

    for (int iter = 0; iter < kMaxBisectionIters; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;  // interval collapsed to adjacent doubles
        }
        const double gap = fixed_point_gap(xi, n_train, lambda, mid);
        if (gap > 0.0) {
            lo = mid;
        } else if (gap < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
        if (hi - lo <= kRelWidthTol * mid) {
            break;
        }
    }

    double kappa = 0.5 * (lo + hi);
    // Two Newton polish steps sharpen the bisection root to a few ulps;
    // the derivative identity check differentiates solve_kappa numerically
    // and needs that extra accuracy.
    for (int it = 0; it < 2; ++it) {
        const double gap = fixed_point_gap(xi, n_train, lambda, kappa);
        const double slope =
            fixed_point_gap_derivative(xi, n_train, lambda, kappa);
        const double next = kappa - gap / slope;
        if (!(next > lo && next < hi) || next == kappa) {
            break;
        }
        kappa = next;
    }

    const double residual =
        std::abs(fixed_point_gap(xi, n_train, lambda, kappa));
    if (residual >= kFixedPointTol) {
        throw NumericalError("solve_kappa: fixed-point residual " +
                             textio::format_double(residual) +
                             " exceeds 1e-13");
    }
    return kappa;
}

double kappa_isotropic_closed_form(double gamma, double lambda) {
    if (!(gamma > 0.0)) {
        throw InputError("kappa_isotropic_closed_form: gamma must be > 0");
    }
    if (lambda < 0.0) {
        throw InputError("kappa_isotropic_closed_form: lambda must be >= 0");
    }
    const double a = gamma - 1.0 + lambda;
    const double root = std::sqrt(a * a + 4.0 * lambda);
    // Conjugate form when a < 0 avoids cancellation for small lambda.
    if (a >= 0.0) {
        return 0.5 * (a + root);
    }
    return 2.0 * lambda / (root - a);
}

double effective_dof(const Spectrum& spectrum, double t, int s) {
    if (!(t > 0.0)) {
        throw InputError("effective_dof: t must be > 0");
    }
    if (s != 1 && s != 2) {
        throw InputError("effective_dof: s must be 1 or 2");
    }
    const Eigen::VectorXd& xi = spectrum.eigenvalues;
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const long double x = xi[i];
        if (x <= 0.0L) {
            continue;
        }
        const long double ratio = x / (x + static_cast<long double>(t));
        sum += (s == 1) ? ratio : ratio * ratio;
    }
    return static_cast<double>(sum);
}

double eta(const Spectrum& spectrum, int n_train, double kappa) {
    check_n_train(n_train);
    return effective_dof(spectrum, kappa, 2) / static_cast<double>(n_train);
}

double kappa_prime(const Spectrum& spectrum, int n_train, double kappa) {
    const double e = eta(spectrum, n_train, kappa);
    if (e >= kEtaSingular) {
        throw SingularityError(kappa, e,
                               "kappa_prime: eta -> 1, derivative diverges");
    }
    return 1.0 / (1.0 - e);
}

RiskBreakdown de_risk(const Spectrum& spectrum, const TheoryParams& params) {
    check_n_train(params.n_train);
    if (!(params.lambda > 0.0)) {
        throw InputError("de_risk: lambda must be > 0");
    }
    if (params.sigma < 0.0) {
        throw InputError("de_risk: sigma must be >= 0");
    }
    if (params.beta_star.size() != spectrum.size()) {
        throw InputError("de_risk: beta_star length " +
                         std::to_string(params.beta_star.size()) +
                         " does not match spectrum length " +
                         std::to_string(spectrum.size()));
    }

    RiskBreakdown out;
    out.kappa = solve_kappa(spectrum, params.n_train, params.lambda);
    out.eta = eta(spectrum, params.n_train, out.kappa);
    if (out.eta >= kEtaSingular) {
        throw SingularityError(out.kappa, out.eta,
                               "de_risk: interpolation peak (eta -> 1) at "
                               "n_train = " +
                                   std::to_string(params.n_train) +
                                   ", lambda = " +
                                   textio::format_double(params.lambda));
    }

    long double bias_sum = 0.0L;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        const long double denom =
            spectrum.eigenvalues[i] + static_cast<long double>(out.kappa);
        const long double b = params.beta_star[i];
        bias_sum += (b * b) / (denom * denom);
    }
    out.de_bias = out.kappa * out.kappa / (1.0 - out.eta) *
                  static_cast<double>(bias_sum);
    out.de_variance =
        params.sigma * params.sigma * out.eta / (1.0 - out.eta);
    out.noise_floor = params.sigma * params.sigma;
    out.de_total = out.de_bias + out.de_variance + out.noise_floor;
    return out;
}

}  // namespace qkrr::rmt
