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
#include <cstdint>
#include <string>
#include <utility>

#include "qkrr/errors.hpp"

namespace qkrr::data {

enum class DataSource { Synthetic, FashionMnist };

struct DatasetMeta {
    DataSource source = DataSource::Synthetic;
    double sigma = 0.0;  // NaN when the noise level is unknown (real data)
    std::uint64_t seed = 0;
};

struct Dataset {
    Eigen::MatrixXd inputs;  // N x d
    Eigen::VectorXd labels;  // N
    DatasetMeta meta;

    Eigen::Index size() const { return inputs.rows(); }
};

/// Noiseless synthetic targets y_i = sum_j sin(u_ij) * theta_j.
Eigen::VectorXd synthetic_labels(const Eigen::MatrixXd& inputs,
                                 const Eigen::VectorXd& theta_star);

/// Synthetic regression set: inputs i.i.d. N(0, I_d), labels
/// sin(u)^T theta_star + N(0, sigma^2) noise. Fully determined by the
/// seed; inputs are drawn row by row first, then the label noise, so a
/// sigma = 0 dataset shares inputs with its noisy counterpart.
Dataset gen_synthetic(int d, int n_samples, double sigma,
                      const Eigen::VectorXd& theta_star, std::uint64_t seed);

/// Target vector with i.i.d. uniform entries in [0, 2*pi].
Eigen::VectorXd sample_theta_star(int d, std::uint64_t seed);

using PixelMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic,
                  Eigen::RowMajor>;

/// Parses a big-endian IDX image/label file pair (images magic 0x00000803
/// with dims N x 28 x 28, labels magic 0x00000801 with dim N). Images are
/// flattened row-major to N x 784.
std::pair<PixelMatrix, Eigen::VectorXi> load_idx(
    const std::string& images_path, const std::string& labels_path);

/// Per-pixel standardization followed by projection onto the top principal
/// directions; both fitted on the training pool only.
struct PcaModel {
    Eigen::VectorXd mean;        // d_raw
    Eigen::VectorXd scale;       // d_raw, floored at 1e-8
    Eigen::MatrixXd components;  // d x d_raw, orthonormal rows

    /// Standardize + project raw pixel rows (N x d_raw) to N x d.
    Eigen::MatrixXd transform(const Eigen::MatrixXd& raw) const;
};

struct FashionSplit {
    Dataset train_pool;
    Dataset test_pool;
    PcaModel pca;
};

/**
 * @brief Binary-classification-as-regression pipeline.
 *
 * Filters the two requested classes, maps labels to {0.0, 1.0}, shuffles
 * with split_seed and holds out `test_fraction` of the samples as the test
 * pool. Standardization statistics (std floor 1e-8 for constant pixels)
 * and the d-component PCA are fitted on the training pool only and applied
 * to both pools.
 */
FashionSplit make_fashion_binary(const PixelMatrix& images,
                                 const Eigen::VectorXi& labels, int class_a,
                                 int class_b, int d, std::uint64_t split_seed,
                                 double test_fraction = 1.0 / 6.0);

}  // namespace qkrr::data
