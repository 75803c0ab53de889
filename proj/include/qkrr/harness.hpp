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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qkrr/data.hpp"
#include "qkrr/errors.hpp"
#include "qkrr/estimate.hpp"
#include "qkrr/qsim.hpp"
#include "qkrr/rmt.hpp"

namespace qkrr::harness {

inline constexpr const char* kCodeVersion = "qkrr 0.1.0";

enum class SamplingMode { Pool, Independent };

/**
 * @brief Sweep configuration.
 *
 * `sigma` is the noise level used by the theory curves; set
 * `calibrate_sigma_flag` (config value "calibrate") to fit it against the
 * empirical means at `reference_lambda` instead. For synthetic data,
 * `data_sigma` is the generative label noise. The default sampling mode
 * draws training subsets from one precomputed pool Gram matrix of
 * pool_factor * max(n_train_grid) points; independent mode regenerates
 * every training set from scratch.
 */
struct ExperimentConfig {
    qsim::AnsatzSpec ansatz;
    data::DataSource dataset = data::DataSource::Synthetic;
    double data_sigma = 0.3;
    std::string fashion_images;
    std::string fashion_labels;
    std::vector<int> n_train_grid;
    std::vector<double> lambda_grid;
    int n_test = 1000;
    int n_reps = 0;
    int n_est = 0;
    double sigma = 0.0;
    bool calibrate_sigma_flag = false;
    double reference_lambda = 1e-2;
    std::uint64_t base_seed = 1;
    std::string output_dir;
    SamplingMode sampling = SamplingMode::Pool;
    int pool_factor = 4;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;

    /// Effective settings as key/value pairs (manifest echo).
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Default training-size grid: ~15 geometric points spanning
/// gamma = p/n_train in [0.25, 8], densified near the interpolation
/// threshold gamma = 1. Returned ascending in n_train.
std::vector<int> default_n_train_grid(std::int64_t p_effective);

/// Parses a flat "key = value" config file ('#' starts a comment). Grids
/// left unset default to default_n_train_grid(p) and the standard lambda
/// grid {1e-10, 1e-8, 1e-6, 1e-4, 1e-2}.
ExperimentConfig load_config(const std::string& path);

/// Applies one "key=value" override on top of a parsed config.
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

/// One (n_train, lambda) cell: empirical statistics paired with the
/// deterministic-equivalent predictions. Censored (singular) cells carry
/// +inf in the de_* fields.
struct SweepRow {
    std::string ansatz_name;
    int n_qubits = 0;
    std::int64_t p_effective = 0;
    int n_train = 0;
    double gamma = 0.0;
    double lambda = 0.0;
    int n_reps = 0;
    double emp_mean = 0.0;
    double emp_std = 0.0;
    double de_bias = 0.0;
    double de_variance = 0.0;
    double de_total = 0.0;
    double kappa = 0.0;
    double eta = 0.0;
    bool singular = false;
};

struct RunManifest {
    std::string code_version = kCodeVersion;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::string sampling_mode;
    double sigma_theory = 0.0;
    bool sigma_calibrated = false;
    Eigen::Index spectrum_modes_kept = 0;
    std::vector<std::pair<std::string, double>> phase_seconds;
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    std::size_t rep_seed_count = 0;
    bool rep_seeds_distinct = false;
};

struct ExperimentResult {
    std::vector<SweepRow> rows;
    RunManifest manifest;
    estimate::SpectralEstimate spectral_estimate;
    double sigma_theory = 0.0;
};

/**
 * @brief Runs the full sweep.
 *
 * Builds the estimation dataset and the spectral estimate, evaluates the
 * empirical test error of every (n_train, lambda, rep) cell against one
 * fixed held-out test set, computes the theory columns from the truncated
 * estimate, and (when output_dir is set) writes sweep.csv, estimate.csv
 * and manifest.txt. Cells run on a worker pool; results are bitwise
 * independent of the thread count.
 */
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Fits the theory noise level: returns the sigma >= 0 minimizing the mean
/// squared deviation between de_total(sigma) and emp_mean across the given
/// rows (all at reference_lambda), by golden-section search with tolerance
/// 1e-6 on [0, rms(labels)].
double calibrate_sigma(const estimate::SpectralEstimate& spectral_estimate,
                       const std::vector<SweepRow>& rows_at_reference_lambda,
                       double reference_lambda);

/// Writes rows with the fixed header; floats use the shortest decimal that
/// round-trips, singular cells print "inf" in the de_* columns.
void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

std::vector<SweepRow> parse_sweep_csv(std::istream& in);
std::vector<SweepRow> parse_sweep_csv_file(const std::string& path);

void write_manifest(const RunManifest& manifest, std::ostream& out);

}  // namespace qkrr::harness
