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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "qkrr/data.hpp"
#include "qkrr/rng.hpp"

namespace fs = std::filesystem;
using qkrr::data::gen_synthetic;
using qkrr::data::load_idx;
using qkrr::data::make_fashion_binary;
using qkrr::data::PixelMatrix;

namespace {

void put_be_u32(std::string& bytes, std::uint32_t v) {
    bytes.push_back(static_cast<char>((v >> 24) & 0xff));
    bytes.push_back(static_cast<char>((v >> 16) & 0xff));
    bytes.push_back(static_cast<char>((v >> 8) & 0xff));
    bytes.push_back(static_cast<char>(v & 0xff));
}

std::string write_temp(const std::string& name, const std::string& bytes) {
    const fs::path dir = fs::temp_directory_path() / "qkrr_idx_fixtures";
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return path.string();
}

std::string idx_images(const std::vector<std::string>& pixel_blocks,
                       std::uint32_t magic = 0x00000803u) {
    std::string bytes;
    put_be_u32(bytes, magic);
    put_be_u32(bytes, static_cast<std::uint32_t>(pixel_blocks.size()));
    put_be_u32(bytes, 28);
    put_be_u32(bytes, 28);
    for (const auto& block : pixel_blocks) {
        bytes += block;
    }
    return bytes;
}

std::string idx_labels(const std::vector<std::uint8_t>& labels,
                       std::uint32_t magic = 0x00000801u) {
    std::string bytes;
    put_be_u32(bytes, magic);
    put_be_u32(bytes, static_cast<std::uint32_t>(labels.size()));
    for (const auto l : labels) {
        bytes.push_back(static_cast<char>(l));
    }
    return bytes;
}

// Two-class image fixture: class 0 lights the top rows, class 1 the bottom
// rows, plus deterministic pixel noise for rank.
std::pair<PixelMatrix, Eigen::VectorXi> two_class_images(int per_class,
                                                         std::uint64_t seed) {
    qkrr::rng::Stream stream(seed);
    const int n = 2 * per_class;
    PixelMatrix images(n, 784);
    Eigen::VectorXi labels(n);
    for (int i = 0; i < n; ++i) {
        const int cls = i % 2;
        labels[i] = cls;
        for (int p = 0; p < 784; ++p) {
            const bool top = p < 392;
            const double base =
                (cls == 0) == top ? 180.0 : 30.0;
            const double noisy = base + 40.0 * stream.gaussian();
            images(i, p) = static_cast<std::uint8_t>(
                std::clamp(noisy, 0.0, 255.0));
        }
    }
    return {images, labels};
}

}  // namespace

TEST_CASE("synthetic_labels: exact sine response") {
    Eigen::MatrixXd inputs(1, 1);
    inputs(0, 0) = 0.5 * std::numbers::pi;
    Eigen::VectorXd theta(1);
    theta << 2.0;
    const auto labels = qkrr::data::synthetic_labels(inputs, theta);
    CHECK(std::abs(labels[0] - 2.0) < 1e-14);
}

TEST_CASE("gen_synthetic: determinism and noiseless recomputation") {
    Eigen::VectorXd theta = qkrr::data::sample_theta_star(4, 99);

    SUBCASE("same seed gives bitwise-identical datasets") {
        const auto a = gen_synthetic(4, 50, 0.3, theta, 1234);
        const auto b = gen_synthetic(4, 50, 0.3, theta, 1234);
        CHECK(a.inputs == b.inputs);
        CHECK(a.labels == b.labels);
    }

    SUBCASE("sigma = 0 labels equal the sine response exactly") {
        const auto ds = gen_synthetic(4, 50, 0.0, theta, 77);
        const auto expected = qkrr::data::synthetic_labels(ds.inputs, theta);
        CHECK(ds.labels == expected);
    }

    SUBCASE("zero target gives zero labels") {
        const auto ds =
            gen_synthetic(3, 20, 0.0, Eigen::VectorXd::Zero(3), 5);
        CHECK(ds.labels.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("argument validation") {
        CHECK_THROWS_AS(gen_synthetic(0, 5, 0.1, theta, 1),
                        qkrr::InputError);
        CHECK_THROWS_AS(gen_synthetic(4, 0, 0.1, theta, 1),
                        qkrr::InputError);
        CHECK_THROWS_AS(gen_synthetic(4, 5, -0.1, theta, 1),
                        qkrr::InputError);
        CHECK_THROWS_AS(gen_synthetic(5, 5, 0.1, theta, 1),
                        qkrr::InputError);
    }
}

TEST_CASE("sample_theta_star: range, degenerate size, seed sensitivity") {
    const auto theta = qkrr::data::sample_theta_star(64, 3);
    CHECK(theta.minCoeff() >= 0.0);
    CHECK(theta.maxCoeff() <= 2.0 * std::numbers::pi);

    CHECK(qkrr::data::sample_theta_star(0, 3).size() == 0);

    const auto other = qkrr::data::sample_theta_star(64, 4);
    CHECK((theta - other).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("load_idx: hand-crafted fixtures") {
    const std::string blank(784, '\0');

    SUBCASE("labels bytes round-trip") {
        const auto images_path = write_temp(
            "ok_images.idx", idx_images({blank, blank, blank}));
        const auto labels_path =
            write_temp("ok_labels.idx", idx_labels({0, 1, 9}));
        const auto [images, labels] = load_idx(images_path, labels_path);
        REQUIRE(labels.size() == 3);
        CHECK(labels[0] == 0);
        CHECK(labels[1] == 1);
        CHECK(labels[2] == 9);
        CHECK(images.rows() == 3);
        CHECK(images.cols() == 784);
    }

    SUBCASE("blank images parse to zero rows") {
        const auto images_path =
            write_temp("blank_images.idx", idx_images({blank, blank}));
        const auto labels_path =
            write_temp("blank_labels.idx", idx_labels({0, 1}));
        const auto [images, labels] = load_idx(images_path, labels_path);
        REQUIRE(images.rows() == 2);
        CHECK(images.cast<int>().maxCoeff() == 0);
    }

    SUBCASE("wrong image magic is reported with its value") {
        const auto images_path = write_temp(
            "bad_magic.idx", idx_images({blank}, 0x00000804u));
        const auto labels_path =
            write_temp("bad_magic_labels.idx", idx_labels({0}));
        try {
            load_idx(images_path, labels_path);
            FAIL("expected InputError");
        } catch (const qkrr::InputError& e) {
            CHECK(std::string(e.what()).find("0x00000804") !=
                  std::string::npos);
        }
    }

    SUBCASE("truncated image payload is rejected") {
        std::string bytes = idx_images({blank});
        bytes.resize(bytes.size() - 10);
        const auto images_path = write_temp("truncated.idx", bytes);
        const auto labels_path =
            write_temp("truncated_labels.idx", idx_labels({0}));
        CHECK_THROWS_AS(load_idx(images_path, labels_path),
                        qkrr::InputError);
    }

    SUBCASE("image/label count mismatch is rejected") {
        const auto images_path =
            write_temp("mismatch_images.idx", idx_images({blank, blank}));
        const auto labels_path =
            write_temp("mismatch_labels.idx", idx_labels({0, 1, 1}));
        CHECK_THROWS_AS(load_idx(images_path, labels_path),
                        qkrr::InputError);
    }
}

TEST_CASE("make_fashion_binary: pipeline properties on a fixture") {
    const auto [images, labels] = two_class_images(60, 7);
    const int d = 4;
    const auto split = make_fashion_binary(images, labels, 0, 1, d, 11);

    SUBCASE("PCA components are orthonormal") {
        const Eigen::MatrixXd gram =
            split.pca.components * split.pca.components.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <
              1e-8);
    }

    SUBCASE("transformed training pool is centered per component") {
        const Eigen::VectorXd mean =
            split.train_pool.inputs.colwise().mean();
        CHECK(mean.cwiseAbs().maxCoeff() < 1e-8);
    }

    SUBCASE("projection is idempotent through the rank-d projector") {
        const Eigen::VectorXd z = split.test_pool.inputs.row(0);
        const Eigen::VectorXd z2 =
            split.pca.components *
            (split.pca.components.transpose() * z);
        CHECK((z - z2).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("labels become {0, 1} reals and pools stay disjoint in size") {
        for (const auto* pool : {&split.train_pool, &split.test_pool}) {
            for (Eigen::Index i = 0; i < pool->labels.size(); ++i) {
                const double y = pool->labels[i];
                CHECK((y == 0.0 || y == 1.0));
            }
        }
        CHECK(split.train_pool.size() + split.test_pool.size() == 120);
        CHECK(split.test_pool.size() == 20);  // 1/6 holdout
    }

    SUBCASE("split is deterministic in the seed") {
        const auto again = make_fashion_binary(images, labels, 0, 1, d, 11);
        CHECK(again.train_pool.inputs == split.train_pool.inputs);
        const auto moved = make_fashion_binary(images, labels, 0, 1, d, 12);
        CHECK((moved.train_pool.labels != split.train_pool.labels));
    }
}

TEST_CASE("make_fashion_binary: error paths") {
    const auto [images, labels] = two_class_images(30, 13);

    SUBCASE("absent class") {
        Eigen::VectorXi shifted = labels;
        for (Eigen::Index i = 0; i < shifted.size(); ++i) {
            shifted[i] += 5;  // classes are now 5 and 6
        }
        try {
            make_fashion_binary(images, shifted, 0, 1, 4, 3);
            FAIL("expected InputError");
        } catch (const qkrr::InputError& e) {
            CHECK(std::string(e.what()).find("class 0") !=
                  std::string::npos);
        }
    }

    SUBCASE("d exceeding the available feature rank") {
        // All pixels constant except two -> standardized rank 2.
        PixelMatrix flat(40, 784);
        flat.setConstant(100);
        Eigen::VectorXi two_class(40);
        qkrr::rng::Stream stream(17);
        for (int i = 0; i < 40; ++i) {
            two_class[i] = i % 2;
            flat(i, 0) = static_cast<std::uint8_t>(
                100 + 50 * (i % 2) + 10 * stream.uniform01());
            flat(i, 1) =
                static_cast<std::uint8_t>(100 + 30 * stream.uniform01());
        }
        CHECK_THROWS_AS(make_fashion_binary(flat, two_class, 0, 1, 4, 3),
                        qkrr::InputError);
    }

    SUBCASE("constant pixels hit the std floor without blowing up") {
        // Top half constant; PCA restricted to what varies.
        const auto [imgs, labs] = two_class_images(30, 19);
        PixelMatrix half = imgs;
        for (int i = 0; i < half.rows(); ++i) {
            for (int p = 0; p < 100; ++p) {
                half(i, p) = 7;
            }
        }
        const auto split = make_fashion_binary(half, labs, 0, 1, 3, 5);
        CHECK(split.train_pool.inputs.allFinite());
        CHECK(split.pca.scale.minCoeff() >= 1e-8);
    }
}
