#pragma once

// Portable random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions below are written out
// by hand because the std:: distributions are implementation-defined.
//
// Stream splitting: Rng::derive(seed, stream) hashes (seed, stream) through
// SplitMix64, so independent consumers (factor A, factor B, sparse support,
// sparse values, seed sampling attempt k, ...) never share a sequence.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <unordered_map>
#include <vector>

namespace rpca {

class Rng {
 public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    /// Seed of an independent child stream.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), rejection sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - n + 1) % n;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= limit) return x % n;
        }
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// k distinct values from [0, n) in sampling order. Partial Fisher-Yates
    /// over a virtual identity permutation; memory is O(k), not O(n).
    template <typename Int = std::int64_t>
    std::vector<Int> sample_without_replacement(Int n, Int k) {
        std::unordered_map<Int, Int> swapped;
        swapped.reserve(static_cast<std::size_t>(2 * k));
        auto slot = [&](Int i) {
            const auto it = swapped.find(i);
            return it == swapped.end() ? i : it->second;
        };
        std::vector<Int> out(static_cast<std::size_t>(k));
        for (Int i = 0; i < k; ++i) {
            const auto j = i + static_cast<Int>(below(static_cast<std::uint64_t>(n - i)));
            const Int vi = slot(i);
            const Int vj = slot(j);
            out[static_cast<std::size_t>(i)] = vj;
            swapped[j] = vi;
        }
        return out;
    }

 private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rpca
