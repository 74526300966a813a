#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "tries/errors.hpp"

namespace tries {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the independent stream number `index` under `master`. Streams are
/// addressed by counter, so trial i sees the same bits whichever thread runs it.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t domain = 0) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(domain)) + index);
}

inline Engine make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t domain = 0) {
    return Engine(stream_seed(master, index, domain));
}

/// Uniform on [0,1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Counter-based uniform: a pure function of (key, counter). Used where random
/// access into a stream matters more than speed of sequential draws.
constexpr double counter_uniform01(std::uint64_t key, std::uint64_t counter) noexcept {
    return static_cast<double>(splitmix64(key + splitmix64(counter)) >> 11) * 0x1.0p-53;
}

/// Binomial(m, p) draws for a fixed p. Inversion against precomputed CDF
/// tables below 64 trials (rows built up to `max_trials`), the standard
/// library's rejection sampler from 64 up.
class BinomialSampler {
public:
    static constexpr std::int64_t kInversionLimit = 64;

    explicit BinomialSampler(double p, std::int64_t max_trials = kInversionLimit - 1) : p_(p) {
        require_probability(p);
        flip_ = p > 0.5;
        const double s = flip_ ? 1.0 - p : p;
        const double ratio = s / (1.0 - s);
        rows_ = static_cast<int>(std::clamp<std::int64_t>(max_trials, 0, kInversionLimit - 1));
        cdf_.resize(static_cast<std::size_t>((rows_ + 1) * (rows_ + 2) / 2));
        double base = 1.0;
        for (int m = 0; m <= rows_; ++m) {
            double pmf = base, cdf = base;
            double* row = cdf_.data() + m * (m + 1) / 2;
            row[0] = cdf;
            for (int k = 0; k < m; ++k) {
                pmf *= ratio * static_cast<double>(m - k) / static_cast<double>(k + 1);
                cdf += pmf;
                row[k + 1] = cdf;
            }
            row[m] = 1.0;
            base *= 1.0 - s;
        }
    }

    [[nodiscard]] double p() const noexcept { return p_; }

    std::int64_t operator()(std::int64_t trials, Engine& eng) const {
        if (trials <= 0) return 0;
        if (trials >= kInversionLimit || trials > rows_) {
            std::binomial_distribution<std::int64_t> dist(trials, p_);
            return dist(eng);
        }
        const double* row = cdf_.data() + trials * (trials + 1) / 2;
        const double u = uniform01(eng);
        std::int64_t k = 0;
        while (u >= row[k]) ++k;  // row[trials] == 1 > u stops the scan
        return flip_ ? trials - k : k;
    }

private:
    double p_;
    bool flip_ = false;
    int rows_ = 0;
    std::vector<double> cdf_;  // row m holds P(B <= k), k = 0..m
};

inline std::int64_t sample_binomial(std::int64_t trials, double p, Engine& eng) {
    return BinomialSampler(p)(trials, eng);
}

} // namespace tries
