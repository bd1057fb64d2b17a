#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "dualprobe/errors.hpp"

namespace dualprobe {

// splitmix64; used to fan one root seed out into per-subtask seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic child seed for a named subtask. FNV-1a over the tag keeps
// distinct pipeline stages on distinct streams.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = root ^ h;
    std::uint64_t s = splitmix64(state);
    state = s + index * 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
}

// Seeded generator with portable derived draws. std::mt19937_64 output is
// pinned by the standard; the distribution helpers here avoid
// std::uniform_int_distribution and friends, whose mappings are
// implementation-defined, so identical seeds give identical streams on any
// platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound) by rejection sampling (no modulo bias).
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) raise(errc::validation, "next_below bound must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % bound;
    }

    // Standard normal via Box-Muller (explicit, so the stream is portable).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // k distinct values from [0, population), ascending order.
    std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t k) {
        if (k > population) raise(errc::validation, "sample larger than population");
        // Partial Fisher-Yates over an index vector; fine at desk scale.
        std::vector<std::size_t> indices(population);
        for (std::size_t i = 0; i < population; ++i) indices[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(next_below(population - i));
            std::swap(indices[i], indices[j]);
        }
        indices.resize(k);
        std::sort(indices.begin(), indices.end());
        return indices;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace dualprobe
