#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aerocap {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// A named, independently seeded random stream. Every noise source in a
/// scenario owns one, so disabling a source never shifts another's draws.
class RngStream {
public:
    RngStream() : RngStream(0, "default") {}
    RngStream(std::uint64_t global_seed, std::string_view name)
        : engine_(detail::splitmix64(global_seed ^ detail::splitmix64(detail::fnv1a(name)))) {}

    double normal(double mean = 0.0, double sigma = 1.0) {
        if (sigma == 0.0) {
            // Keep the stream position independent of whether sigma is zero.
            (void)unit_normal_(engine_);
            return mean;
        }
        return mean + sigma * unit_normal_(engine_);
    }

    double uniform() { return unit_uniform_(engine_); }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> unit_normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_uniform_{0.0, 1.0};
};

}  // namespace aerocap
