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

#include "qkrr/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <vector>

#include "qkrr/estimate.hpp"
#include "qkrr/rng.hpp"

namespace qkrr::data {

namespace {

constexpr double kStdFloor = 1e-8;
constexpr int kImageSide = 28;

std::uint32_t read_be_u32(const std::string& bytes, std::size_t offset,
                          const std::string& path) {
    if (offset + 4 > bytes.size()) {
        throw InputError("load_idx: truncated file " + path);
    }
    const auto b = [&](std::size_t i) {
        return static_cast<std::uint32_t>(
            static_cast<unsigned char>(bytes[offset + i]));
    };
    return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("load_idx: cannot open " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return bytes;
}

std::string hex_magic(std::uint32_t magic) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", magic);
    return buf;
}

}  // namespace

Eigen::VectorXd synthetic_labels(const Eigen::MatrixXd& inputs,
                                 const Eigen::VectorXd& theta_star) {
    if (inputs.cols() != theta_star.size()) {
        throw InputError("synthetic_labels: theta_star length does not "
                         "match input dimension");
    }
    return inputs.array().sin().matrix() * theta_star;
}

Dataset gen_synthetic(int d, int n_samples, double sigma,
                      const Eigen::VectorXd& theta_star, std::uint64_t seed) {
    if (d < 1) {
        throw InputError("gen_synthetic: d must be >= 1");
    }
    if (n_samples < 1) {
        throw InputError("gen_synthetic: n_samples must be >= 1");
    }
    if (sigma < 0.0 || !std::isfinite(sigma)) {
        throw InputError("gen_synthetic: sigma must be finite and >= 0");
    }
    if (theta_star.size() != d) {
        throw InputError("gen_synthetic: theta_star must have length d");
    }

    rng::Stream stream(seed);
    Dataset out;
    out.inputs.resize(n_samples, d);
    for (int i = 0; i < n_samples; ++i) {
        for (int j = 0; j < d; ++j) {
            out.inputs(i, j) = stream.gaussian();
        }
    }
    out.labels = synthetic_labels(out.inputs, theta_star);
    if (sigma > 0.0) {
        for (int i = 0; i < n_samples; ++i) {
            out.labels[i] += sigma * stream.gaussian();
        }
    }
    out.meta = {DataSource::Synthetic, sigma, seed};
    return out;
}

Eigen::VectorXd sample_theta_star(int d, std::uint64_t seed) {
    if (d < 0) {
        throw InputError("sample_theta_star: d must be >= 0");
    }
    rng::Stream stream(seed);
    Eigen::VectorXd theta(d);
    for (int j = 0; j < d; ++j) {
        theta[j] = stream.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return theta;
}

std::pair<PixelMatrix, Eigen::VectorXi> load_idx(
    const std::string& images_path, const std::string& labels_path) {
    const std::string ibytes = read_file(images_path);
    const std::uint32_t imagic = read_be_u32(ibytes, 0, images_path);
    if (imagic != 0x00000803u) {
        throw InputError("load_idx: bad magic " + hex_magic(imagic) + " in " +
                         images_path + " (expected 0x00000803)");
    }
    const std::uint32_t n_images = read_be_u32(ibytes, 4, images_path);
    const std::uint32_t rows = read_be_u32(ibytes, 8, images_path);
    const std::uint32_t cols = read_be_u32(ibytes, 12, images_path);
    if (rows != kImageSide || cols != kImageSide) {
        throw InputError("load_idx: expected 28x28 images in " + images_path);
    }
    const std::size_t expected_image_bytes =
        16 + static_cast<std::size_t>(n_images) * rows * cols;
    if (ibytes.size() < expected_image_bytes) {
        throw InputError("load_idx: truncated file " + images_path);
    }

    const std::string lbytes = read_file(labels_path);
    const std::uint32_t lmagic = read_be_u32(lbytes, 0, labels_path);
    if (lmagic != 0x00000801u) {
        throw InputError("load_idx: bad magic " + hex_magic(lmagic) + " in " +
                         labels_path + " (expected 0x00000801)");
    }
    const std::uint32_t n_labels = read_be_u32(lbytes, 4, labels_path);
    if (lbytes.size() < 8 + static_cast<std::size_t>(n_labels)) {
        throw InputError("load_idx: truncated file " + labels_path);
    }
    if (n_labels != n_images) {
        throw InputError("load_idx: image count " + std::to_string(n_images) +
                         " does not match label count " +
                         std::to_string(n_labels));
    }

    PixelMatrix images(n_images, rows * cols);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        const std::size_t base =
            16 + static_cast<std::size_t>(i) * rows * cols;
        for (std::uint32_t p = 0; p < rows * cols; ++p) {
            images(i, p) =
                static_cast<std::uint8_t>(ibytes[base + p]);
        }
    }
    Eigen::VectorXi labels(n_labels);
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        labels[i] = static_cast<unsigned char>(lbytes[8 + i]);
    }
    return {std::move(images), std::move(labels)};
}

Eigen::MatrixXd PcaModel::transform(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != mean.size()) {
        throw InputError("PcaModel::transform: raw dimension mismatch");
    }
    Eigen::MatrixXd standardized =
        (raw.rowwise() - mean.transpose()).array().rowwise() /
        scale.transpose().array();
    return standardized * components.transpose();
}

FashionSplit make_fashion_binary(const PixelMatrix& images,
                                 const Eigen::VectorXi& labels, int class_a,
                                 int class_b, int d, std::uint64_t split_seed,
                                 double test_fraction) {
    if (images.rows() != labels.size()) {
        throw InputError("make_fashion_binary: image/label count mismatch");
    }
    if (d < 1 || d > images.cols()) {
        throw InputError("make_fashion_binary: d out of range");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InputError("make_fashion_binary: test_fraction must be in "
                         "(0, 1)");
    }

    std::vector<int> keep;
    int count_a = 0;
    int count_b = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] == class_a) {
            ++count_a;
            keep.push_back(static_cast<int>(i));
        } else if (labels[i] == class_b) {
            ++count_b;
            keep.push_back(static_cast<int>(i));
        }
    }
    if (count_a == 0) {
        throw InputError("make_fashion_binary: class " +
                         std::to_string(class_a) + " absent from data");
    }
    if (count_b == 0) {
        throw InputError("make_fashion_binary: class " +
                         std::to_string(class_b) + " absent from data");
    }

    // Deterministic shuffle, then hold out the leading fraction as the
    // test pool.
    rng::Stream stream(split_seed);
    const int n = static_cast<int>(keep.size());
    const std::vector<int> order = stream.sample_without_replacement(n, n);
    const int n_test =
        std::max(1, static_cast<int>(std::lround(test_fraction * n)));
    const int n_train = n - n_test;
    if (n_train < 2) {
        throw InputError("make_fashion_binary: training pool too small");
    }

    const Eigen::Index d_raw = images.cols();
    Eigen::MatrixXd raw_train(n_train, d_raw);
    Eigen::VectorXd y_train(n_train);
    Eigen::MatrixXd raw_test(n_test, d_raw);
    Eigen::VectorXd y_test(n_test);
    for (int i = 0; i < n; ++i) {
        const int src = keep[static_cast<std::size_t>(order[i])];
        const double y = labels[src] == class_a ? 0.0 : 1.0;
        if (i < n_test) {
            raw_test.row(i) = images.row(src).cast<double>();
            y_test[i] = y;
        } else {
            raw_train.row(i - n_test) = images.row(src).cast<double>();
            y_train[i - n_test] = y;
        }
    }

    PcaModel pca;
    pca.mean = raw_train.colwise().mean();
    Eigen::MatrixXd centered = raw_train.rowwise() - pca.mean.transpose();
    pca.scale = (centered.array().square().colwise().sum() /
                 static_cast<double>(n_train))
                    .sqrt()
                    .matrix();
    for (Eigen::Index j = 0; j < d_raw; ++j) {
        pca.scale[j] = std::max(pca.scale[j], kStdFloor);
    }
    Eigen::MatrixXd standardized =
        centered.array().rowwise() / pca.scale.transpose().array();

    // Standardized pool has zero mean, so the covariance is the plain
    // second moment.
    const Eigen::MatrixXd cov = standardized.transpose() * standardized /
                                static_cast<double>(n_train);
    const auto [evals, evecs] = estimate::symmetric_eigendecomposition(cov);
    if (evals[d - 1] <= 1e-12 * std::max(evals[0], 0.0)) {
        throw InputError("make_fashion_binary: d = " + std::to_string(d) +
                         " exceeds the available feature rank");
    }
    pca.components = evecs.leftCols(d).transpose();

    FashionSplit split;
    split.pca = std::move(pca);
    split.train_pool.inputs = standardized * split.pca.components.transpose();
    split.train_pool.labels = std::move(y_train);
    split.train_pool.meta = {DataSource::FashionMnist,
                             std::numeric_limits<double>::quiet_NaN(),
                             split_seed};
    split.test_pool.inputs = split.pca.transform(raw_test);
    split.test_pool.labels = std::move(y_test);
    split.test_pool.meta = split.train_pool.meta;
    return split;
}

}  // namespace qkrr::data
