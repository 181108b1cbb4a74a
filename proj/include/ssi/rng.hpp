// Copyright 2026 The ssi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>

namespace ssi {

/// One splitmix64 scrambling round; used to derive independent substream
/// seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

/// PCG32 (XSH-RR variant, 64-bit state / 32-bit output). All randomized
/// behavior in the library flows through this generator so results are
/// reproducible across runs and platforms.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xDA3E39CB94B95BDBULL)
        : state_(0), inc_((stream << 1u) | 1u) {
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        std::uint64_t lo = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_double() {
        std::uint64_t hi = next_u32();
        std::uint64_t lo = next_u32();
        std::uint64_t bits = (hi << 21) | (lo >> 11);
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound > 0. Rejection sampling keeps it
    /// unbiased and deterministic.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        while (true) {
            std::uint64_t r = next_u64();
            if (r < limit) return r % bound;
        }
    }

    /// Standard normal via the Box-Muller transform; the paired value is
    /// cached, so draws come in deterministic pairs.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - next_double();  // (0,1]: keeps the log finite
        double u2 = next_double();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ssi
