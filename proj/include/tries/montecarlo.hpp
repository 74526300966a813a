#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tries/asymptotics.hpp"
#include "tries/errors.hpp"
#include "tries/exact_moments.hpp"
#include "tries/random.hpp"
#include "tries/sym_matrix2.hpp"
#include "tries/trie.hpp"

namespace tries {

/// One-pass moments of a D-dimensional sample: means, co-moment sums and the
/// third/fourth central moment sums per coordinate. Merging uses the pairwise
/// update formulas of Chan et al. and Pebay.
template <std::size_t D>
class MomentAccumulator {
public:
    void add(const std::array<double, D>& x) {
        MomentAccumulator one;
        one.count_ = 1;
        one.mean_ = x;
        merge(one);
    }

    void merge(const MomentAccumulator& o) {
        if (o.count_ == 0) return;
        if (count_ == 0) {
            *this = o;
            return;
        }
        const double na = count_, nb = o.count_, n = na + nb;
        std::array<double, D> delta{};
        for (std::size_t i = 0; i < D; ++i) delta[i] = o.mean_[i] - mean_[i];
        for (std::size_t i = 0; i < D; ++i) {
            const double d = delta[i];
            const double m2a = co_[i][i], m2b = o.co_[i][i];
            m4_[i] += o.m4_[i] + d * d * d * d * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d * d * (na * na * m2b + nb * nb * m2a) / (n * n) +
                      4.0 * d * (na * o.m3_[i] - nb * m3_[i]) / n;
            m3_[i] += o.m3_[i] + d * d * d * na * nb * (na - nb) / (n * n) +
                      3.0 * d * (na * m2b - nb * m2a) / n;
        }
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = 0; j < D; ++j) co_[i][j] += o.co_[i][j] + delta[i] * delta[j] * na * nb / n;
        for (std::size_t i = 0; i < D; ++i) mean_[i] += delta[i] * nb / n;
        count_ += o.count_;
    }

    [[nodiscard]] std::int64_t count() const noexcept { return count_; }
    [[nodiscard]] double mean(std::size_t i) const { return mean_[i]; }
    /// Unbiased covariance (divides by count - 1).
    [[nodiscard]] double cov(std::size_t i, std::size_t j) const { return co_[i][j] / (count_ - 1.0); }
    [[nodiscard]] double skewness(std::size_t i) const {
        const double m2 = co_[i][i];
        return m2 > 0.0 ? std::sqrt(static_cast<double>(count_)) * m3_[i] / std::pow(m2, 1.5) : 0.0;
    }
    [[nodiscard]] double excess_kurtosis(std::size_t i) const {
        const double m2 = co_[i][i];
        return m2 > 0.0 ? static_cast<double>(count_) * m4_[i] / (m2 * m2) - 3.0 : 0.0;
    }

private:
    std::int64_t count_ = 0;
    std::array<double, D> mean_{};
    std::array<std::array<double, D>, D> co_{};
    std::array<double, D> m3_{};
    std::array<double, D> m4_{};
};

inline constexpr std::int64_t kTrialsPerChunk = 64;
inline constexpr std::uint64_t kTrialDomain = 0x747269616c;  // "trial"

/// Runs fn(chunk, first, last) for every chunk of kTrialsPerChunk trials on up
/// to `parallelism` threads. Chunk boundaries do not depend on the thread
/// count; the first failing chunk (by index) is rethrown.
template <class Fn>
void for_each_chunk(std::int64_t trials, int parallelism, Fn&& fn) {
    const std::int64_t chunks = (trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
    int workers = parallelism > 0 ? parallelism : static_cast<int>(std::thread::hardware_concurrency());
    workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(chunks, 1)));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(chunks));
    std::atomic<std::int64_t> next{0};
    auto work = [&] {
        for (std::int64_t c = next++; c < chunks; c = next++) {
            try {
                fn(c, c * kTrialsPerChunk, std::min(trials, (c + 1) * kTrialsPerChunk));
            } catch (...) {
                failures[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

inline ShapeStats simulate_trial(std::int64_t n, double p, std::uint64_t seed, std::int64_t trial) {
    Engine eng = make_stream(seed, static_cast<std::uint64_t>(trial), kTrialDomain);
    try {
        return sample_shape(n, p, eng);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " (trial " + std::to_string(trial) + ")");
    }
}

/// All trials' observables in trial order.
inline std::vector<ShapeStats> simulate_all(std::int64_t n, double p, std::int64_t trials,
                                            std::uint64_t seed, int parallelism = 1) {
    std::vector<ShapeStats> out(static_cast<std::size_t>(trials));
    for_each_chunk(trials, parallelism, [&](std::int64_t, std::int64_t first, std::int64_t last) {
        for (std::int64_t t = first; t < last; ++t)
            out[static_cast<std::size_t>(t)] = simulate_trial(n, p, seed, t);
    });
    return out;
}

enum Coord : std::size_t { kS = 0, kK = 1, kN = 2 };

struct SampleSummary {
    std::int64_t n = 0;
    double p = 0.5;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::array<double, 3> mean{};
    std::array<std::array<double, 3>, 3> cov{};
    std::array<double, 3> skewness{};
    std::array<double, 3> excess_kurtosis{};
    std::array<double, 3> stderr_mean{};

    [[nodiscard]] double rho(std::size_t i, std::size_t j) const {
        return cov[i][j] / std::sqrt(cov[i][i] * cov[j][j]);
    }
};

struct RunOptions {
    int parallelism = 1;
    std::vector<ShapeStats>* raw = nullptr;  // filled in trial order when set
};

/// Streaming Monte-Carlo estimate of the joint moments of (S_n, K_n, N_n).
/// Bitwise deterministic in (n, p, trials, seed) for any parallelism.
inline SampleSummary run(std::int64_t n, double p, std::int64_t trials, std::uint64_t seed,
                         const RunOptions& options = {}) {
    require_probability(p);
    require(n >= 2, "n must be at least 2");
    require(trials >= 100, "trials must be at least 100");
    const auto chunks = static_cast<std::size_t>((trials + kTrialsPerChunk - 1) / kTrialsPerChunk);
    std::vector<MomentAccumulator<3>> partial(chunks);
    if (options.raw) options.raw->assign(static_cast<std::size_t>(trials), ShapeStats{});
    for_each_chunk(trials, options.parallelism, [&](std::int64_t c, std::int64_t first, std::int64_t last) {
        auto& acc = partial[static_cast<std::size_t>(c)];
        for (std::int64_t t = first; t < last; ++t) {
            const ShapeStats s = simulate_trial(n, p, seed, t);
            acc.add({double(s.size), double(s.kpl), double(s.npl)});
            if (options.raw) (*options.raw)[static_cast<std::size_t>(t)] = s;
        }
    });
    // pairwise tree merge in index order
    for (std::size_t stride = 1; stride < partial.size(); stride *= 2)
        for (std::size_t i = 0; i + stride < partial.size(); i += 2 * stride) partial[i].merge(partial[i + stride]);
    const auto& acc = partial.front();

    SampleSummary s;
    s.n = n;
    s.p = p;
    s.trials = trials;
    s.seed = seed;
    for (std::size_t i = 0; i < 3; ++i) {
        s.mean[i] = acc.mean(i);
        for (std::size_t j = 0; j < 3; ++j) s.cov[i][j] = acc.cov(i, j);
        s.skewness[i] = acc.skewness(i);
        s.excess_kurtosis[i] = acc.excess_kurtosis(i);
        s.stderr_mean[i] = std::sqrt(s.cov[i][i] / static_cast<double>(trials));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Marginal diagnostics
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Kolmogorov-Smirnov distance between the empirical law of `values` and the
/// standard normal.
inline double ks_distance_to_normal(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const double count = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = normal_cdf(values[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / count - f, f - static_cast<double>(i) / count});
    }
    return d;
}

struct MarginalDiagnostics {
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_distance = 0.0;  // of the standardized sample to N(0,1)
};

inline MarginalDiagnostics marginal_diagnostics(std::span<const double> values) {
    require(values.size() >= 2, "need at least two values");
    MomentAccumulator<1> acc;
    for (double v : values) acc.add({v});
    MarginalDiagnostics d;
    d.mean = acc.mean(0);
    const double var = acc.cov(0, 0);
    if (!(var > 0.0)) throw Error(ErrorKind::ZeroVariance, "marginal has zero variance");
    d.sd = std::sqrt(var);
    d.skewness = acc.skewness(0);
    d.excess_kurtosis = acc.excess_kurtosis(0);
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - d.mean) / d.sd;
    d.ks_distance = ks_distance_to_normal(std::move(z));
    return d;
}

struct NormalityReport {
    std::int64_t n = 0;
    double p = 0.5;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    MarginalDiagnostics size;
    MarginalDiagnostics kpl;
};

inline NormalityReport normality_report(std::int64_t n, double p, std::int64_t trials, std::uint64_t seed,
                                        int parallelism = 1) {
    require(n >= 2, "n must be at least 2");
    require(trials >= 1000, "normality report needs at least 1000 trials");
    const auto raw = simulate_all(n, p, trials, seed, parallelism);
    std::vector<double> s(raw.size()), k(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        s[i] = static_cast<double>(raw[i].size);
        k[i] = static_cast<double>(raw[i].kpl);
    }
    NormalityReport r{n, p, trials, seed, marginal_diagnostics(s), marginal_diagnostics(k)};
    return r;
}

// ---------------------------------------------------------------------------
// Whitening
// ---------------------------------------------------------------------------

enum class MatrixSource { Exact, Sample, Asymptotic };

constexpr std::string_view to_string(MatrixSource s) noexcept {
    switch (s) {
    case MatrixSource::Exact: return "exact";
    case MatrixSource::Sample: return "sample";
    case MatrixSource::Asymptotic: return "asymptotic";
    }
    return "?";
}

struct WhitenReport {
    std::int64_t n = 0;
    double p = 0.5;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    MatrixSource source = MatrixSource::Exact;
    MatrixSource centering = MatrixSource::Exact;  // where the means came from
    double mean_S = 0.0, mean_K = 0.0;
    SymMatrix2 sigma;            // matrix whose inverse square root was applied
    SymMatrix2 whitened_cov;     // empirical covariance after whitening
    std::array<double, 2> whitened_mean{};
    std::array<double, 2> skewness{};
    std::array<double, 2> excess_kurtosis{};
    std::array<double, 2> ks_distance{};
    double max_offdiag = 0.0;
    /// Largest |entry - identity| of the whitened covariance.
    [[nodiscard]] double max_identity_deviation() const {
        return std::max({std::abs(whitened_cov.a - 1.0), std::abs(whitened_cov.b), std::abs(whitened_cov.c - 1.0)});
    }
};

/// Multiplies centred (S_n, K_n) by Sigma^{-1/2} for the chosen Sigma and
/// reports how close the result is to N_2(0, I).
inline WhitenReport whiten(std::int64_t n, double p, std::int64_t trials, std::uint64_t seed,
                           MatrixSource source, int parallelism = 1) {
    require_probability(p);
    require(n >= 2, "n must be at least 2");
    require(trials >= 100, "trials must be at least 100");
    WhitenReport r;
    r.n = n;
    r.p = p;
    r.trials = trials;
    r.seed = seed;
    r.source = source;

    const auto raw = simulate_all(n, p, trials, seed, parallelism);
    auto sample_moments = [&] {
        MomentAccumulator<2> acc;
        for (const auto& s : raw) acc.add({double(s.size), double(s.kpl)});
        return acc;
    };

    std::optional<MomentTable> table;
    if (source == MatrixSource::Exact) {
        require(n <= kMaxExactN, "exact source needs n <= " + std::to_string(kMaxExactN));
        table = compute(p, static_cast<int>(n));
        r.sigma = {table->var_S(int(n)), table->cov_SK(int(n)), table->var_K(int(n))};
    } else if (source == MatrixSource::Sample) {
        const auto acc = sample_moments();
        r.sigma = {acc.cov(0, 0), acc.cov(0, 1), acc.cov(1, 1)};
        r.centering = MatrixSource::Sample;
        r.mean_S = acc.mean(0);
        r.mean_K = acc.mean(1);
    } else {
        r.sigma = sigma_matrix(params(p), static_cast<double>(n), SigmaVariant::Unified);
        if (n <= kMaxExactN) table = compute(p, static_cast<int>(n));
    }
    if (table) {
        r.centering = MatrixSource::Exact;
        r.mean_S = table->mean_S(int(n));
        r.mean_K = table->mean_K(int(n));
    } else if (source == MatrixSource::Asymptotic) {
        const auto acc = sample_moments();
        r.centering = MatrixSource::Sample;
        r.mean_S = acc.mean(0);
        r.mean_K = acc.mean(1);
    }

    const SymMatrix2 w = invsqrt2(r.sigma);
    std::vector<double> x(raw.size()), y(raw.size());
    MomentAccumulator<2> acc;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto z = w.apply(double(raw[i].size) - r.mean_S, double(raw[i].kpl) - r.mean_K);
        x[i] = z[0];
        y[i] = z[1];
        acc.add(z);
    }
    // second moments about zero: whitening targets mean 0, covariance I
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double count = static_cast<double>(raw.size());
    r.whitened_cov = {sxx / count, sxy / count, syy / count};
    r.whitened_mean = {acc.mean(0), acc.mean(1)};
    r.skewness = {acc.skewness(0), acc.skewness(1)};
    r.excess_kurtosis = {acc.excess_kurtosis(0), acc.excess_kurtosis(1)};
    r.ks_distance = {ks_distance_to_normal(x), ks_distance_to_normal(y)};
    r.max_offdiag = std::abs(r.whitened_cov.b);
    return r;
}

// ---------------------------------------------------------------------------
// Joint histogram
// ---------------------------------------------------------------------------

struct HistogramGrid {
    std::int64_t n = 0;
    double p = 0.5;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    int bins = 0;
    double range = 4.0;  // standardized axes cover [-range, range]; outliers go to edge bins
    double mean_S = 0.0, sd_S = 0.0, mean_K = 0.0, sd_K = 0.0;
    double rho = 0.0;                  // sample correlation of (S, K)
    std::vector<std::int64_t> counts;  // row-major, row = S bin, column = K bin

    [[nodiscard]] std::int64_t at(int row, int col) const {
        return counts[static_cast<std::size_t>(row * bins + col)];
    }
};

inline HistogramGrid joint_histogram(std::int64_t n, double p, std::int64_t trials, std::uint64_t seed,
                                     int bins, int parallelism = 1, double range = 4.0) {
    require(bins >= 10, "need at least 10 bins per axis");
    require(n >= 2, "n must be at least 2");
    require(trials >= 2, "need at least two trials");
    require(range > 0.0, "range must be positive");
    const auto raw = simulate_all(n, p, trials, seed, parallelism);
    MomentAccumulator<2> acc;
    for (const auto& s : raw) acc.add({double(s.size), double(s.kpl)});

    HistogramGrid g;
    g.n = n;
    g.p = p;
    g.trials = trials;
    g.seed = seed;
    g.bins = bins;
    g.range = range;
    g.mean_S = acc.mean(0);
    g.mean_K = acc.mean(1);
    g.sd_S = std::sqrt(acc.cov(0, 0));
    g.sd_K = std::sqrt(acc.cov(1, 1));
    g.rho = (g.sd_S > 0 && g.sd_K > 0) ? acc.cov(0, 1) / (g.sd_S * g.sd_K) : 0.0;
    g.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
    auto bin_of = [&](double v, double mean, double sd) {
        const double z = sd > 0 ? (v - mean) / sd : 0.0;
        const auto b = static_cast<int>(std::floor((z + range) / (2.0 * range) * bins));
        return std::clamp(b, 0, bins - 1);
    };
    for (const auto& s : raw) {
        const int row = bin_of(double(s.size), g.mean_S, g.sd_S);
        const int col = bin_of(double(s.kpl), g.mean_K, g.sd_K);
        ++g.counts[static_cast<std::size_t>(row * bins + col)];
    }
    return g;
}

} // namespace tries
