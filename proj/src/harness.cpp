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

#include "qkrr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "qkrr/krr.hpp"
#include "qkrr/rng.hpp"
#include "qkrr/textio.hpp"

namespace qkrr::harness {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Fixed tags for deriving independent seed streams from the base seed.
constexpr std::uint64_t kSeedTheta = 1;
constexpr std::uint64_t kSeedEstimation = 2;
constexpr std::uint64_t kSeedTest = 3;
constexpr std::uint64_t kSeedPool = 4;
constexpr std::uint64_t kSeedSplit = 5;
constexpr std::uint64_t kSeedRep = 6;

constexpr const char* kCsvHeader =
    "ansatz,n_qubits,p_effective,n_train,gamma,lambda,n_reps,emp_mean,"
    "emp_std,de_bias,de_variance,de_total,kappa,eta,singular";

std::uint64_t rep_seed(std::uint64_t base_seed, int n_train,
                       std::size_t lambda_index, int rep) {
    return base_seed ^
           rng::hash_combine(kSeedRep, static_cast<std::uint64_t>(n_train),
                             static_cast<std::uint64_t>(lambda_index),
                             static_cast<std::uint64_t>(rep));
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

data::Dataset slice_dataset(const data::Dataset& ds, Eigen::Index start,
                            Eigen::Index count) {
    data::Dataset out;
    out.inputs = ds.inputs.middleRows(start, count);
    out.labels = ds.labels.segment(start, count);
    out.meta = ds.meta;
    return out;
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    for (const auto& tok : textio::split(value, ',')) {
        out.push_back(static_cast<int>(textio::parse_int(tok)));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& value) {
    std::vector<double> out;
    for (const auto& tok : textio::split(value, ',')) {
        out.push_back(textio::parse_double(tok));
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(values[i]);
    }
    return out;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += textio::format_double(values[i]);
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    // Resolves depth/input_dim defaults as a side check.
    qsim::AnsatzSpec::make(ansatz.family, ansatz.n_qubits, ansatz.depth,
                           ansatz.input_dim);
    if (n_train_grid.empty()) {
        throw InputError("config: n_train_grid must be non-empty");
    }
    for (const int n : n_train_grid) {
        if (n < 1) {
            throw InputError("config: n_train entries must be >= 1");
        }
    }
    if (lambda_grid.empty()) {
        throw InputError("config: lambda_grid must be non-empty");
    }
    for (const double l : lambda_grid) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw InputError("config: lambda entries must be finite and > 0");
        }
    }
    if (n_test < 1) {
        throw InputError("config: n_test must be >= 1");
    }
    if (n_reps < 1) {
        throw InputError("config: n_reps must be >= 1");
    }
    if (n_est < 2) {
        throw InputError("config: n_est must be >= 2");
    }
    if (data_sigma < 0.0 || !std::isfinite(data_sigma)) {
        throw InputError("config: data_sigma must be finite and >= 0");
    }
    if (!calibrate_sigma_flag &&
        (sigma < 0.0 || !std::isfinite(sigma))) {
        throw InputError("config: sigma must be finite and >= 0, or "
                         "'calibrate'");
    }
    if (calibrate_sigma_flag &&
        std::find(lambda_grid.begin(), lambda_grid.end(), reference_lambda) ==
            lambda_grid.end()) {
        throw InputError("config: reference_lambda must be one of the "
                         "lambda_grid values when sigma = calibrate");
    }
    if (dataset == data::DataSource::FashionMnist &&
        (fashion_images.empty() || fashion_labels.empty())) {
        throw InputError("config: fashion_images and fashion_labels are "
                         "required for the fashion_mnist dataset");
    }
    if (pool_factor < 1) {
        throw InputError("config: pool_factor must be >= 1");
    }
    if (threads < 0) {
        throw InputError("config: threads must be >= 0");
    }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo()
    const {
    const qsim::AnsatzSpec resolved = qsim::AnsatzSpec::make(
        ansatz.family, ansatz.n_qubits, ansatz.depth, ansatz.input_dim);
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("ansatz", qsim::family_name(resolved.family));
    out.emplace_back("n_qubits", std::to_string(resolved.n_qubits));
    out.emplace_back("depth", std::to_string(resolved.depth));
    out.emplace_back("input_dim", std::to_string(resolved.input_dim));
    out.emplace_back("dataset",
                     dataset == data::DataSource::Synthetic ? "synthetic"
                                                            : "fashion_mnist");
    out.emplace_back("data_sigma", textio::format_double(data_sigma));
    if (dataset == data::DataSource::FashionMnist) {
        out.emplace_back("fashion_images", fashion_images);
        out.emplace_back("fashion_labels", fashion_labels);
    }
    out.emplace_back("n_train_grid", join_ints(n_train_grid));
    out.emplace_back("lambda_grid", join_doubles(lambda_grid));
    out.emplace_back("n_test", std::to_string(n_test));
    out.emplace_back("n_reps", std::to_string(n_reps));
    out.emplace_back("n_est", std::to_string(n_est));
    out.emplace_back("sigma", calibrate_sigma_flag
                                  ? std::string("calibrate")
                                  : textio::format_double(sigma));
    out.emplace_back("reference_lambda",
                     textio::format_double(reference_lambda));
    out.emplace_back("base_seed", std::to_string(base_seed));
    out.emplace_back("output_dir", output_dir);
    out.emplace_back("sampling",
                     sampling == SamplingMode::Pool ? "pool" : "independent");
    out.emplace_back("pool_factor", std::to_string(pool_factor));
    out.emplace_back("threads", std::to_string(threads));
    return out;
}

void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
    if (key == "ansatz") {
        config.ansatz.family = qsim::family_from_name(value);
    } else if (key == "n_qubits") {
        config.ansatz.n_qubits = static_cast<int>(textio::parse_int(value));
    } else if (key == "depth") {
        config.ansatz.depth = static_cast<int>(textio::parse_int(value));
    } else if (key == "input_dim") {
        config.ansatz.input_dim = static_cast<int>(textio::parse_int(value));
    } else if (key == "dataset") {
        if (value == "synthetic") {
            config.dataset = data::DataSource::Synthetic;
        } else if (value == "fashion_mnist") {
            config.dataset = data::DataSource::FashionMnist;
        } else {
            throw InputError("config: unknown dataset '" + value + "'");
        }
    } else if (key == "data_sigma") {
        config.data_sigma = textio::parse_double(value);
    } else if (key == "fashion_images") {
        config.fashion_images = value;
    } else if (key == "fashion_labels") {
        config.fashion_labels = value;
    } else if (key == "n_train_grid") {
        config.n_train_grid = parse_int_list(value);
    } else if (key == "lambda_grid") {
        config.lambda_grid = parse_double_list(value);
    } else if (key == "n_test") {
        config.n_test = static_cast<int>(textio::parse_int(value));
    } else if (key == "n_reps") {
        config.n_reps = static_cast<int>(textio::parse_int(value));
    } else if (key == "n_est") {
        config.n_est = static_cast<int>(textio::parse_int(value));
    } else if (key == "sigma") {
        if (value == "calibrate") {
            config.calibrate_sigma_flag = true;
            config.sigma = 0.0;
        } else {
            config.calibrate_sigma_flag = false;
            config.sigma = textio::parse_double(value);
        }
    } else if (key == "reference_lambda") {
        config.reference_lambda = textio::parse_double(value);
    } else if (key == "base_seed") {
        config.base_seed = textio::parse_uint(value);
    } else if (key == "output_dir") {
        config.output_dir = value;
    } else if (key == "sampling") {
        if (value == "pool") {
            config.sampling = SamplingMode::Pool;
        } else if (value == "independent") {
            config.sampling = SamplingMode::Independent;
        } else {
            throw InputError("config: unknown sampling mode '" + value + "'");
        }
    } else if (key == "pool_factor") {
        config.pool_factor = static_cast<int>(textio::parse_int(value));
    } else if (key == "threads") {
        config.threads = static_cast<int>(textio::parse_int(value));
    } else {
        throw InputError("config: unknown key '" + key + "'");
    }
}

std::vector<int> default_n_train_grid(std::int64_t p_effective) {
    if (p_effective < 1) {
        throw InputError("default_n_train_grid: p_effective must be >= 1");
    }
    std::vector<double> gammas;
    for (int i = 0; i < 13; ++i) {
        gammas.push_back(0.25 * std::pow(32.0, i / 12.0));
    }
    gammas.insert(gammas.end(), {0.85, 1.0, 1.15});
    std::set<int> grid;
    for (const double gamma : gammas) {
        grid.insert(std::max(
            1, static_cast<int>(std::lround(
                   static_cast<double>(p_effective) / gamma))));
    }
    return {grid.begin(), grid.end()};
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config file " + path);
    }
    ExperimentConfig config;
    config.ansatz.n_qubits = 0;  // must be provided
    config.ansatz.depth = 0;
    config.ansatz.input_dim = 0;

    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string_view trimmed = textio::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string_view::npos) {
            throw InputError("config " + path + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        const std::string key(textio::trim(trimmed.substr(0, eq)));
        const std::string value(textio::trim(trimmed.substr(eq + 1)));
        apply_override(config, key, value);
        seen.insert(key);
    }

    if (seen.count("lambda_grid") == 0) {
        config.lambda_grid = {1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
    }
    if (seen.count("n_train_grid") == 0 && config.ansatz.n_qubits >= 1) {
        const auto resolved = qsim::AnsatzSpec::make(
            config.ansatz.family, config.ansatz.n_qubits, config.ansatz.depth,
            config.ansatz.input_dim);
        config.n_train_grid = default_n_train_grid(resolved.effective_dim());
    }
    return config;
}

double calibrate_sigma(const estimate::SpectralEstimate& spectral_estimate,
                       const std::vector<SweepRow>& rows_at_reference_lambda,
                       double reference_lambda) {
    // Calibration works on the resolved (truncated) modes only: whatever
    // the resolved spectrum cannot explain about the empirical error --
    // label noise plus unrepresented target mass -- is absorbed into the
    // returned sigma. On a fully representable target this recovers the
    // generative noise level.
    const auto [spectrum, beta] = truncated_spectrum(spectral_estimate);

    struct Cell {
        double bias;
        double variance_factor;  // eta/(1-eta) + 1, multiplies sigma^2
        double emp;
    };
    std::vector<Cell> cells;
    for (const SweepRow& row : rows_at_reference_lambda) {
        if (row.lambda != reference_lambda) {
            continue;
        }
        try {
            rmt::TheoryParams params;
            params.n_train = row.n_train;
            params.lambda = reference_lambda;
            params.sigma = 0.0;
            params.beta_star = beta;
            const rmt::RiskBreakdown rb = rmt::de_risk(spectrum, params);
            cells.push_back(
                {rb.de_bias, rb.eta / (1.0 - rb.eta) + 1.0, row.emp_mean});
        } catch (const SingularityError&) {
            // censored cell; cannot constrain sigma
        }
    }
    if (cells.empty()) {
        throw InputError("calibrate_sigma: no usable empirical rows at the "
                         "reference lambda");
    }

    // rms of the estimation labels bounds any plausible noise level
    const double hi = spectral_estimate.beta_est.norm();
    if (hi <= 0.0) {
        return 0.0;
    }
    const auto loss = [&cells](double s) {
        const double t = s * s;
        double acc = 0.0;
        for (const Cell& c : cells) {
            const double diff = c.bias + t * c.variance_factor - c.emp;
            acc += diff * diff;
        }
        return acc / static_cast<double>(cells.size());
    };

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0;
    double b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = loss(c);
    double fd = loss(d);
    while (b - a > 1e-6) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = loss(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = loss(d);
        }
    }
    return 0.5 * (a + b);
}

ExperimentResult run_experiment(const ExperimentConfig& raw_config) {
    ExperimentConfig cfg = raw_config;
    cfg.validate();
    cfg.ansatz = qsim::AnsatzSpec::make(cfg.ansatz.family, cfg.ansatz.n_qubits,
                                        cfg.ansatz.depth,
                                        cfg.ansatz.input_dim);

    ExperimentResult result;
    RunManifest& manifest = result.manifest;
    manifest.config_echo = cfg.echo();

    const qsim::AnsatzSpec& ansatz = cfg.ansatz;
    const int d = ansatz.input_dim;
    const std::int64_t p_eff = ansatz.effective_dim();
    const int max_n_train =
        *std::max_element(cfg.n_train_grid.begin(), cfg.n_train_grid.end());

    // ---- data -----------------------------------------------------------
    auto t0 = Clock::now();
    Eigen::VectorXd theta;
    data::Dataset est_data;
    data::Dataset test_data;
    data::Dataset pool_data;
    SamplingMode mode = cfg.sampling;

    if (cfg.dataset == data::DataSource::Synthetic) {
        const std::uint64_t theta_seed =
            rng::hash_combine(cfg.base_seed, kSeedTheta);
        const std::uint64_t est_seed =
            rng::hash_combine(cfg.base_seed, kSeedEstimation);
        const std::uint64_t test_seed =
            rng::hash_combine(cfg.base_seed, kSeedTest);
        manifest.seeds.emplace_back("theta", theta_seed);
        manifest.seeds.emplace_back("estimation", est_seed);
        manifest.seeds.emplace_back("test", test_seed);

        theta = data::sample_theta_star(d, theta_seed);
        est_data =
            data::gen_synthetic(d, cfg.n_est, cfg.data_sigma, theta, est_seed);
        test_data = data::gen_synthetic(d, cfg.n_test, cfg.data_sigma, theta,
                                        test_seed);
        if (mode == SamplingMode::Pool) {
            const std::uint64_t pool_seed =
                rng::hash_combine(cfg.base_seed, kSeedPool);
            manifest.seeds.emplace_back("pool", pool_seed);
            pool_data = data::gen_synthetic(
                d, cfg.pool_factor * max_n_train, cfg.data_sigma, theta,
                pool_seed);
        }
    } else {
        const std::uint64_t split_seed =
            rng::hash_combine(cfg.base_seed, kSeedSplit);
        manifest.seeds.emplace_back("split", split_seed);
        const auto [images, labels] =
            data::load_idx(cfg.fashion_images, cfg.fashion_labels);
        const data::FashionSplit split =
            data::make_fashion_binary(images, labels, 0, 1, d, split_seed);

        if (split.test_pool.size() < cfg.n_test) {
            throw InputError("run_experiment: test pool has only " +
                             std::to_string(split.test_pool.size()) +
                             " samples, n_test = " +
                             std::to_string(cfg.n_test));
        }
        const Eigen::Index available = split.train_pool.size() - cfg.n_est;
        const Eigen::Index pool_n =
            std::min<Eigen::Index>(available, static_cast<Eigen::Index>(
                                                  cfg.pool_factor) *
                                                  max_n_train);
        if (cfg.n_est > split.train_pool.size() || pool_n < max_n_train) {
            throw InputError("run_experiment: training pool too small for "
                             "n_est + the n_train grid");
        }
        est_data = slice_dataset(split.train_pool, 0, cfg.n_est);
        pool_data = slice_dataset(split.train_pool, cfg.n_est, pool_n);
        test_data = slice_dataset(split.test_pool, 0, cfg.n_test);
        // Real data has a finite pool; training subsets are always drawn
        // from it without replacement.
        mode = SamplingMode::Pool;
    }
    manifest.sampling_mode =
        mode == SamplingMode::Pool ? "pool" : "independent";
    manifest.phase_seconds.emplace_back("data", seconds_since(t0));

    // ---- spectral estimate ----------------------------------------------
    t0 = Clock::now();
    const Eigen::MatrixXd k_est = qsim::kernel_matrix(ansatz, est_data.inputs);
    result.spectral_estimate =
        estimate::estimate_population(k_est, est_data.labels);
    manifest.spectrum_modes_kept =
        estimate::truncated_spectrum(result.spectral_estimate).first.size();
    manifest.phase_seconds.emplace_back("estimate", seconds_since(t0));

    // ---- empirical sweep --------------------------------------------------
    t0 = Clock::now();
    const Eigen::MatrixXcd test_states =
        qsim::encode_states(ansatz, test_data.inputs);
    Eigen::MatrixXcd pool_states;
    Eigen::MatrixXd pool_gram;
    Eigen::MatrixXd pool_cross;
    if (mode == SamplingMode::Pool) {
        pool_states = qsim::encode_states(ansatz, pool_data.inputs);
        pool_gram = qsim::gram_from_states(pool_states);
        pool_cross = qsim::cross_from_states(test_states, pool_states);
    }

    struct Cell {
        std::size_t n_index;
        std::size_t lambda_index;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < cfg.n_train_grid.size(); ++i) {
        for (std::size_t j = 0; j < cfg.lambda_grid.size(); ++j) {
            cells.push_back({i, j});
        }
    }

    struct CellResult {
        double emp_mean = 0.0;
        double emp_std = 0.0;
        std::vector<std::uint64_t> seeds;
    };
    std::vector<CellResult> cell_results(cells.size());

    const auto run_cell = [&](const Cell& cell, CellResult& out) {
        const int n_tr = cfg.n_train_grid[cell.n_index];
        const double lambda = cfg.lambda_grid[cell.lambda_index];
        std::vector<double> errors(static_cast<std::size_t>(cfg.n_reps));
        for (int rep = 0; rep < cfg.n_reps; ++rep) {
            const std::uint64_t seed =
                rep_seed(cfg.base_seed, n_tr, cell.lambda_index, rep);
            out.seeds.push_back(seed);

            Eigen::MatrixXd k_train;
            Eigen::MatrixXd k_cross;
            Eigen::VectorXd y_train;
            if (mode == SamplingMode::Pool) {
                rng::Stream stream(seed);
                const std::vector<int> idx = stream.sample_without_replacement(
                    static_cast<int>(pool_data.size()), n_tr);
                k_train = pool_gram(idx, idx);
                k_cross = pool_cross(Eigen::all, idx);
                y_train = pool_data.labels(idx);
            } else {
                const data::Dataset train = data::gen_synthetic(
                    d, n_tr, cfg.data_sigma, theta, seed);
                const Eigen::MatrixXcd train_states =
                    qsim::encode_states(ansatz, train.inputs);
                k_train = qsim::gram_from_states(train_states);
                k_cross = qsim::cross_from_states(test_states, train_states);
                y_train = train.labels;
            }

            const auto [weights, report] =
                krr::fit_dual(k_train, y_train, lambda);
            errors[static_cast<std::size_t>(rep)] =
                krr::mse(krr::predict(weights, k_cross), test_data.labels);
        }

        double mean = 0.0;
        for (const double e : errors) {
            mean += e;
        }
        mean /= static_cast<double>(errors.size());
        double var = 0.0;
        if (errors.size() > 1) {
            for (const double e : errors) {
                var += (e - mean) * (e - mean);
            }
            var /= static_cast<double>(errors.size() - 1);
        }
        out.emp_mean = mean;
        out.emp_std = std::sqrt(var);
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min<std::size_t>(
        cells.size(),
        cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);

    std::atomic<std::size_t> next_cell{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const auto worker = [&]() {
        while (true) {
            const std::size_t c = next_cell.fetch_add(1);
            if (c >= cells.size()) {
                break;
            }
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) {
                    break;
                }
            }
            try {
                run_cell(cells[c], cell_results[c]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    const Cell& cell = cells[c];
                    first_error = std::make_exception_ptr(std::runtime_error(
                        "cell n_train=" +
                        std::to_string(cfg.n_train_grid[cell.n_index]) +
                        " lambda=" +
                        textio::format_double(
                            cfg.lambda_grid[cell.lambda_index]) +
                        ": " + e.what()));
                }
                break;
            }
        }
    };

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            threads.emplace_back(worker);
        }
        for (std::thread& t : threads) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    std::unordered_set<std::uint64_t> seen_seeds;
    for (const CellResult& cr : cell_results) {
        for (const std::uint64_t s : cr.seeds) {
            seen_seeds.insert(s);
        }
    }
    manifest.rep_seed_count = cells.size() * static_cast<std::size_t>(cfg.n_reps);
    manifest.rep_seeds_distinct = seen_seeds.size() == manifest.rep_seed_count;
    if (!manifest.rep_seeds_distinct) {
        throw std::runtime_error(
            "run_experiment: internal error, per-rep seeds collided");
    }
    manifest.phase_seconds.emplace_back("empirical", seconds_since(t0));

    // ---- theory -----------------------------------------------------------
    t0 = Clock::now();
    result.rows.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        SweepRow& row = result.rows[c];
        row.ansatz_name = qsim::family_name(ansatz.family);
        row.n_qubits = ansatz.n_qubits;
        row.p_effective = p_eff;
        row.n_train = cfg.n_train_grid[cells[c].n_index];
        row.gamma = static_cast<double>(p_eff) / row.n_train;
        row.lambda = cfg.lambda_grid[cells[c].lambda_index];
        row.n_reps = cfg.n_reps;
        row.emp_mean = cell_results[c].emp_mean;
        row.emp_std = cell_results[c].emp_std;
    }

    double sigma_theory = cfg.sigma;
    if (cfg.calibrate_sigma_flag) {
        std::vector<SweepRow> reference_rows;
        for (const SweepRow& row : result.rows) {
            if (row.lambda == cfg.reference_lambda) {
                reference_rows.push_back(row);
            }
        }
        sigma_theory = calibrate_sigma(result.spectral_estimate,
                                       reference_rows, cfg.reference_lambda);
    }
    result.sigma_theory = sigma_theory;
    manifest.sigma_theory = sigma_theory;
    manifest.sigma_calibrated = cfg.calibrate_sigma_flag;

    // The spectral view matches the sigma source. With a fixed sigma the
    // full view is used: target mass on the zero modes enters the bias and
    // accounts for anything the resolved spectrum cannot represent. A
    // calibrated sigma already absorbs that mass, so calibrated runs use
    // the truncated view to avoid counting it twice.
    const auto [spectrum, beta] =
        cfg.calibrate_sigma_flag
            ? estimate::truncated_spectrum(result.spectral_estimate)
            : estimate::theory_spectrum(result.spectral_estimate);

    for (SweepRow& row : result.rows) {
        try {
            rmt::TheoryParams params;
            params.n_train = row.n_train;
            params.lambda = row.lambda;
            params.sigma = sigma_theory;
            params.beta_star = beta;
            const rmt::RiskBreakdown rb = rmt::de_risk(spectrum, params);
            row.de_bias = rb.de_bias;
            row.de_variance = rb.de_variance;
            row.de_total = rb.de_total;
            row.kappa = rb.kappa;
            row.eta = rb.eta;
            row.singular = false;
        } catch (const SingularityError& e) {
            constexpr double inf = std::numeric_limits<double>::infinity();
            row.de_bias = inf;
            row.de_variance = inf;
            row.de_total = inf;
            row.kappa = e.kappa();
            row.eta = e.eta();
            row.singular = true;
        }
    }
    manifest.phase_seconds.emplace_back("theory", seconds_since(t0));

    // ---- output -----------------------------------------------------------
    t0 = Clock::now();
    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        emit_csv(result.rows, (fs::path(cfg.output_dir) / "sweep.csv").string());
        {
            std::ofstream out(fs::path(cfg.output_dir) / "estimate.csv");
            estimate::dump_estimate_csv(result.spectral_estimate, out);
        }
        manifest.phase_seconds.emplace_back("io", seconds_since(t0));
        std::ofstream out(fs::path(cfg.output_dir) / "manifest.txt");
        write_manifest(manifest, out);
    } else {
        manifest.phase_seconds.emplace_back("io", seconds_since(t0));
    }
    return result;
}

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const SweepRow& row : rows) {
        out << row.ansatz_name << ',' << row.n_qubits << ','
            << row.p_effective << ',' << row.n_train << ','
            << textio::format_double(row.gamma) << ','
            << textio::format_double(row.lambda) << ',' << row.n_reps << ','
            << textio::format_double(row.emp_mean) << ','
            << textio::format_double(row.emp_std) << ','
            << textio::format_double(row.de_bias) << ','
            << textio::format_double(row.de_variance) << ','
            << textio::format_double(row.de_total) << ','
            << textio::format_double(row.kappa) << ','
            << textio::format_double(row.eta) << ','
            << (row.singular ? "true" : "false") << '\n';
    }
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("emit_csv: cannot open " + path + " for writing");
    }
    emit_csv(rows, out);
    if (!out.good()) {
        throw InputError("emit_csv: write to " + path + " failed");
    }
}

std::vector<SweepRow> parse_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || textio::trim(line) != kCsvHeader) {
        throw InputError("parse_sweep_csv: missing or unexpected header");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (textio::trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> f = textio::split(line, ',');
        if (f.size() != 15) {
            throw InputError("parse_sweep_csv: expected 15 fields, got " +
                             std::to_string(f.size()));
        }
        SweepRow row;
        row.ansatz_name = f[0];
        row.n_qubits = static_cast<int>(textio::parse_int(f[1]));
        row.p_effective = textio::parse_int(f[2]);
        row.n_train = static_cast<int>(textio::parse_int(f[3]));
        row.gamma = textio::parse_double(f[4]);
        row.lambda = textio::parse_double(f[5]);
        row.n_reps = static_cast<int>(textio::parse_int(f[6]));
        row.emp_mean = textio::parse_double(f[7]);
        row.emp_std = textio::parse_double(f[8]);
        row.de_bias = textio::parse_double(f[9]);
        row.de_variance = textio::parse_double(f[10]);
        row.de_total = textio::parse_double(f[11]);
        row.kappa = textio::parse_double(f[12]);
        row.eta = textio::parse_double(f[13]);
        const std::string_view flag = textio::trim(f[14]);
        if (flag == "true") {
            row.singular = true;
        } else if (flag == "false") {
            row.singular = false;
        } else {
            throw InputError("parse_sweep_csv: bad singular flag '" +
                             std::string(flag) + "'");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SweepRow> parse_sweep_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("parse_sweep_csv: cannot open " + path);
    }
    return parse_sweep_csv(in);
}

void write_manifest(const RunManifest& manifest, std::ostream& out) {
    out << "# qkrr run manifest\n";
    out << "code_version = " << manifest.code_version << '\n';
    for (const auto& [key, value] : manifest.config_echo) {
        out << "config." << key << " = " << value << '\n';
    }
    out << "sampling_mode = " << manifest.sampling_mode << '\n';
    out << "sigma_theory = " << textio::format_double(manifest.sigma_theory)
        << '\n';
    out << "sigma_calibrated = "
        << (manifest.sigma_calibrated ? "true" : "false") << '\n';
    out << "spectrum_modes_kept = " << manifest.spectrum_modes_kept << '\n';
    for (const auto& [name, secs] : manifest.phase_seconds) {
        out << "phase_seconds." << name << " = "
            << textio::format_double(secs) << '\n';
    }
    for (const auto& [name, seed] : manifest.seeds) {
        out << "seed." << name << " = " << seed << '\n';
    }
    out << "rep_seeds.count = " << manifest.rep_seed_count << '\n';
    out << "rep_seeds.distinct = "
        << (manifest.rep_seeds_distinct ? "true" : "false") << '\n';
}

}  // namespace qkrr::harness
