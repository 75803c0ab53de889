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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qkrr/estimate.hpp"
#include "qkrr/harness.hpp"
#include "qkrr/qsim.hpp"
#include "qkrr/rmt.hpp"
#include "qkrr/textio.hpp"

namespace {

using qkrr::textio::format_double;

// Reads an estimate CSV ("index,eigenvalue,beta_est") back into a
// SpectralEstimate with just the spectral fields populated.
qkrr::estimate::SpectralEstimate read_estimate_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw qkrr::InputError("cannot open estimate file " + path);
    }
    std::string line;
    if (!std::getline(in, line) ||
        qkrr::textio::trim(line) != "index,eigenvalue,beta_est") {
        throw qkrr::InputError("estimate file " + path +
                               ": missing 'index,eigenvalue,beta_est' header");
    }
    std::vector<double> eigenvalues;
    std::vector<double> betas;
    while (std::getline(in, line)) {
        if (qkrr::textio::trim(line).empty()) {
            continue;
        }
        const auto fields = qkrr::textio::split(line, ',');
        if (fields.size() != 3) {
            throw qkrr::InputError("estimate file " + path +
                                   ": expected 3 fields per row");
        }
        eigenvalues.push_back(qkrr::textio::parse_double(fields[1]));
        betas.push_back(qkrr::textio::parse_double(fields[2]));
    }
    if (eigenvalues.empty()) {
        throw qkrr::InputError("estimate file " + path + ": no rows");
    }
    qkrr::estimate::SpectralEstimate est;
    est.n_est = static_cast<int>(eigenvalues.size());
    est.eigenvalues = Eigen::Map<Eigen::VectorXd>(
        eigenvalues.data(), static_cast<Eigen::Index>(eigenvalues.size()));
    est.beta_est = Eigen::Map<Eigen::VectorXd>(
        betas.data(), static_cast<Eigen::Index>(betas.size()));
    return est;
}

int cmd_run(const std::string& config_path, const std::string& output_dir,
            bool seed_set, std::uint64_t seed,
            const std::vector<std::string>& overrides) {
    qkrr::harness::ExperimentConfig config =
        qkrr::harness::load_config(config_path);
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw qkrr::InputError("--set expects key=value, got '" + kv +
                                   "'");
        }
        qkrr::harness::apply_override(config, kv.substr(0, eq),
                                      kv.substr(eq + 1));
    }
    if (!output_dir.empty()) {
        config.output_dir = output_dir;
    }
    if (seed_set) {
        config.base_seed = seed;
    }
    if (config.output_dir.empty()) {
        throw qkrr::InputError("an output directory is required (config "
                               "output_dir or --output-dir)");
    }

    const auto result = qkrr::harness::run_experiment(config);
    std::cout << "wrote " << result.rows.size() << " sweep rows to "
              << config.output_dir << " (sigma_theory = "
              << format_double(result.sigma_theory) << ")\n";
    return 0;
}

int cmd_rank_probe(const std::string& family, int qubits, int depth,
                   int input_dim, int samples, std::uint64_t seed,
                   double rel_tol) {
    const auto ansatz = qkrr::qsim::AnsatzSpec::make(
        qkrr::qsim::family_from_name(family), qubits, depth, input_dim);
    if (samples <= 0) {
        samples = static_cast<int>(4 * ansatz.ambient_dim());
    }
    const int rank =
        qkrr::qsim::effective_rank_probe(ansatz, samples, seed, rel_tol);
    std::cout << "ansatz=" << qkrr::qsim::family_name(ansatz.family)
              << " n_qubits=" << ansatz.n_qubits << " samples=" << samples
              << " rel_tol=" << format_double(rel_tol)
              << " effective_rank=" << rank << '\n';
    return 0;
}

int cmd_theory(const std::string& spectrum_path, double lambda, int n_train,
               double sigma) {
    const auto est = read_estimate_csv(spectrum_path);
    const auto [spectrum, beta] = qkrr::estimate::theory_spectrum(est);
    qkrr::rmt::TheoryParams params;
    params.n_train = n_train;
    params.lambda = lambda;
    params.sigma = sigma;
    params.beta_star = beta;
    try {
        const auto risk = qkrr::rmt::de_risk(spectrum, params);
        std::cout << "kappa=" << format_double(risk.kappa)
                  << " eta=" << format_double(risk.eta)
                  << " de_bias=" << format_double(risk.de_bias)
                  << " de_variance=" << format_double(risk.de_variance)
                  << " noise_floor=" << format_double(risk.noise_floor)
                  << " de_total=" << format_double(risk.de_total)
                  << " singular=false\n";
    } catch (const qkrr::SingularityError& e) {
        std::cout << "kappa=" << format_double(e.kappa())
                  << " eta=" << format_double(e.eta())
                  << " de_bias=inf de_variance=inf noise_floor="
                  << format_double(sigma * sigma)
                  << " de_total=inf singular=true\n";
    }
    return 0;
}

int cmd_calibrate(const std::string& estimate_path,
                  const std::string& sweep_path, double reference_lambda) {
    const auto est = read_estimate_csv(estimate_path);
    const auto rows = qkrr::harness::parse_sweep_csv_file(sweep_path);
    std::vector<qkrr::harness::SweepRow> at_reference;
    for (const auto& row : rows) {
        if (row.lambda == reference_lambda) {
            at_reference.push_back(row);
        }
    }
    const double sigma =
        qkrr::harness::calibrate_sigma(est, at_reference, reference_lambda);
    std::cout << "sigma=" << format_double(sigma)
              << " reference_lambda=" << format_double(reference_lambda)
              << " cells=" << at_reference.size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum kernel ridge regression laboratory"};
    app.require_subcommand(1);

    // run
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "run a sweep from a config file");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--output-dir", output_dir, "output directory");
    auto* seed_opt = run->add_option("--seed", seed, "base seed override");
    run->add_option("--set", overrides,
                    "extra key=value overrides (repeatable)");

    // rank-probe
    std::string family = "tpa";
    int qubits = 2;
    int depth = 0;
    int input_dim = 0;
    int samples = 0;
    std::uint64_t probe_seed = 7;
    double rel_tol = 1e-10;
    auto* probe = app.add_subcommand(
        "rank-probe", "effective feature dimension of an ansatz");
    probe->add_option("--ansatz", family, "hea or tpa")->required();
    probe->add_option("--qubits", qubits, "qubit count")->required();
    probe->add_option("--depth", depth, "layers (default: qubits)");
    probe->add_option("--input-dim", input_dim,
                      "input dimension (default: 2*qubits)");
    probe->add_option("--samples", samples, "sample count (default: 4*4^n)");
    probe->add_option("--seed", probe_seed, "probe seed");
    probe->add_option("--rel-tol", rel_tol, "relative eigenvalue threshold");

    // theory
    std::string spectrum_path;
    double lambda = 1e-2;
    int n_train = 1;
    double sigma = 0.0;
    auto* theory = app.add_subcommand(
        "theory", "deterministic-equivalent risk from an estimate CSV");
    theory->add_option("--spectrum", spectrum_path, "estimate CSV")
        ->required();
    theory->add_option("--lambda", lambda, "ridge parameter")->required();
    theory->add_option("--ntrain", n_train, "training set size")->required();
    theory->add_option("--sigma", sigma, "noise level (default 0)");

    // calibrate
    std::string estimate_path;
    std::string sweep_path;
    double reference_lambda = 1e-2;
    auto* calibrate = app.add_subcommand(
        "calibrate", "fit sigma to empirical rows at a reference lambda");
    calibrate->add_option("--estimate", estimate_path, "estimate CSV")
        ->required();
    calibrate->add_option("--sweep", sweep_path, "sweep CSV")->required();
    calibrate->add_option("--reference-lambda", reference_lambda,
                          "reference lambda (default 1e-2)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, output_dir, seed_opt->count() > 0,
                           seed, overrides);
        }
        if (probe->parsed()) {
            return cmd_rank_probe(family, qubits, depth, input_dim, samples,
                                  probe_seed, rel_tol);
        }
        if (theory->parsed()) {
            return cmd_theory(spectrum_path, lambda, n_train, sigma);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(estimate_path, sweep_path, reference_lambda);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
