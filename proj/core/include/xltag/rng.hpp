#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace xltag {

/// Seeded generator with platform-independent mappings to doubles and
/// bounded integers. std::uniform_*_distribution and std::shuffle are
/// implementation-defined, which would break cross-platform byte identity of
/// models and curves.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform in [0, n). Rejection sampling keeps it unbiased.
    std::size_t below(std::size_t n);

    /// Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Derive an independent stream, e.g. one per seed or per component.
    Rng fork(std::uint64_t salt) { return Rng(engine_() ^ (salt * 0x9E3779B97F4A7C15ULL)); }

private:
    std::mt19937_64 engine_;
};

}  // namespace xltag
