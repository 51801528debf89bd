#pragma once

// Counter-style stream derivation: every random stream in the project is a
// std::mt19937_64 keyed by hashing (seed, stream ids...) with SplitMix64, so a
// stream's values depend only on its key and never on evaluation order.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sheetlab {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Key of the substream identified by `ids` under `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t id : ids) key = splitmix64(key ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
    return key;
}

/// Standard normal variates from one substream.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t key) : engine_(key) {}
    double operator()() { return dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

/// Uniform [lo, hi) variates from one substream.
class UniformStream {
public:
    UniformStream(std::uint64_t key, double lo, double hi) : engine_(key), dist_(lo, hi) {}
    double operator()() { return dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> dist_;
};

}  // namespace sheetlab
