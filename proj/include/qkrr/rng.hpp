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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace qkrr::rng {

/// SplitMix64 finalizer. Stateless; used to derive well-separated stream
/// seeds from a base seed plus integer tags.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

template <typename... Rest>
constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v,
                                     Rest... rest) noexcept {
    return hash_combine(hash_combine(h, v), rest...);
}

/**
 * @brief Deterministic random stream.
 *
 * Uniform bits come from std::mt19937_64, whose output sequence is fixed by
 * the standard, so streams are reproducible across platforms for a given
 * seed. Gaussians are produced by an explicit Box-Muller transform instead
 * of std::normal_distribution, whose draw sequence is implementation
 * defined.
 */
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal draw (Box-Muller); the second element of each
    /// generated pair is cached and returned on the next call.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // in (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// k distinct indices drawn from [0, n) by a partial Fisher-Yates pass.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            idx[static_cast<std::size_t>(i)] = i;
        }
        for (int i = 0; i < k; ++i) {
            const int j =
                i + static_cast<int>(uniform01() * static_cast<double>(n - i));
            std::swap(idx[static_cast<std::size_t>(i)],
                      idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(k));
        return idx;
    }

    std::uint64_t next_u64() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qkrr::rng
