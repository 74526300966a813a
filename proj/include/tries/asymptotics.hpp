#pragma once

#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tries/bernoulli.hpp"
#include "tries/errors.hpp"
#include "tries/special_functions.hpp"
#include "tries/sym_matrix2.hpp"

namespace tries {

/// log p / log q = r / l in lowest terms, or irrational.
struct RatioSpec {
    bool rational = false;
    int r = 0;
    int l = 0;

    static RatioSpec make_rational(int r, int l) { return {true, r, l}; }
    static RatioSpec irrational() { return {}; }

    friend bool operator==(const RatioSpec&, const RatioSpec&) = default;
};

struct ModelParams {
    double p = 0.5;
    double q = 0.5;
    double h = std::numbers::ln2;  // entropy in nats
    double lambda = 0.0;           // pq log^2(p/q) / h^3
    double lambda_alt = 0.0;       // ((p log^2 p + q log^2 q) - h^2) / h^3
    RatioSpec ratio;
    bool ratio_detected = false;   // true when the ratio came from the heuristic

    [[nodiscard]] bool symmetric() const { return p == q; }
};

inline constexpr double kRatioTolerance = 1e-12;
inline constexpr int kMaxRatioDenominator = 64;

inline bool ratio_matches(double p, double q, int r, int l) {
    const double lp = std::log(p), lq = std::log(q);
    return std::abs(r * lq - l * lp) < kRatioTolerance * std::abs(lp);
}

/// Continued-fraction guess at log p / log q. A convergent with denominator
/// <= 64 that satisfies the ratio test is reported as rational; this is a
/// heuristic since rationality is not decidable in floating point.
inline RatioSpec detect_ratio(double p, double q) {
    const double x = std::log(p) / std::log(q);
    double rest = x;
    std::int64_t h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
    for (int step = 0; step < 40; ++step) {
        const double a = std::floor(rest);
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t h = ai * h_prev + h_prev2;
        const std::int64_t k = ai * k_prev + k_prev2;
        if (k > kMaxRatioDenominator) break;
        if (ratio_matches(p, q, static_cast<int>(h), static_cast<int>(k)))
            return RatioSpec::make_rational(static_cast<int>(h), static_cast<int>(k));
        const double frac = rest - a;
        if (frac < 1e-15) break;
        rest = 1.0 / frac;
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
    }
    return RatioSpec::irrational();
}

inline ModelParams params(Bernoulli bits, std::optional<RatioSpec> ratio = std::nullopt) {
    ModelParams m;
    m.p = bits.p;
    m.q = bits.q;
    const double lp = std::log(m.p), lq = std::log(m.q);
    m.h = -m.p * lp - m.q * lq;
    const double lpq = std::log(m.p / m.q);
    m.lambda = m.p * m.q * lpq * lpq / (m.h * m.h * m.h);
    m.lambda_alt = ((m.p * lp * lp + m.q * lq * lq) - m.h * m.h) / (m.h * m.h * m.h);
    if (ratio) {
        if (ratio->rational) {
            require(ratio->r > 0 && ratio->l > 0, "ratio r/l needs positive integers");
            if (std::gcd(ratio->r, ratio->l) != 1)
                throw Error(ErrorKind::RatioSpecMismatch, "ratio r/l must be in lowest terms");
            if (!ratio_matches(m.p, m.q, ratio->r, ratio->l))
                throw Error(ErrorKind::RatioSpecMismatch,
                            "log p / log q differs from " + std::to_string(ratio->r) + "/" +
                                std::to_string(ratio->l));
        }
        m.ratio = *ratio;
    } else {
        m.ratio = detect_ratio(m.p, m.q);
        m.ratio_detected = true;
    }
    return m;
}

inline ModelParams params(double p, std::optional<RatioSpec> ratio = std::nullopt) {
    return params(Bernoulli::from_p(p), ratio);
}

/// chi_k = 2 r k pi i / log(1/p): the imaginary parts of the poles of
/// 1/(1 - p^{-s} - q^{-s}) on Re s = -1. At p = 1/2 this is 2 k pi i / log 2.
inline cplx chi(const ModelParams& m, int k) {
    if (k == 0) return 0.0;
    require(m.ratio.rational, "chi_k for k != 0 exists only in the rational case");
    return {0.0, 2.0 * std::numbers::pi * m.ratio.r * k / -std::log(m.p)};
}

struct Truncation {
    int l_max = 80;
    int j_max = 40;
    int k_max = 5;
    double tolerance = 1e-18;
};

/// Default truncation, with the l-series cutoff raised so that
/// max(p,q)^l falls below the tolerance.
inline Truncation default_truncation(const ModelParams& m) {
    Truncation t;
    const double base = std::max(m.p, m.q);
    const int needed = static_cast<int>(std::ceil(std::log(t.tolerance) / std::log(base))) + 40;
    t.l_max = std::max(t.l_max, needed);
    return t;
}

/// Fourier coefficient g^(2)_k of the covariance fluctuation Cov(S_n,K_n)/n,
/// valid for every p. The j-convolution appears only in the rational case.
inline cplx g2_general(const ModelParams& m, int k, const Truncation& trunc) {
    if (!m.ratio.rational)
        require(k == 0, "only g_0 exists when log p / log q is irrational");
    const double h = m.h;
    const cplx x = chi(m, k);

    // Gamma(x)(1 - (x+2)/2^{x+1}) -> ln2 - 1/2 as x -> 0
    cplx first = k == 0 ? cplx(std::numbers::ln2 - 0.5)
                        : cgamma(x) * (1.0 - (x + 2.0) / std::pow(2.0, x + 1.0));
    first /= h;

    cplx convolution = 0.0;
    if (m.ratio.rational) {
        double edge = 0.0;
        for (int j = -trunc.j_max; j <= trunc.j_max; ++j) {
            if (j == 0) continue;
            const cplx xj = chi(m, j);
            const cplx term = cgamma(chi(m, k - j) + 1.0) * (xj - 1.0) * cgamma(xj);
            convolution += term;
            if (std::abs(j) == trunc.j_max) edge = std::max(edge, std::abs(term));
        }
        if (edge > trunc.tolerance)
            throw Error(ErrorKind::TruncationNotConverged,
                        "j-convolution edge term " + std::to_string(edge) + " above tolerance");
        convolution /= -(h * h);
    }

    const double lp = std::log(m.p), lq = std::log(m.q);
    const cplx third = -cgamma(x + 1.0) / (h * h) *
                       (kEulerGamma + 1.0 + cdigamma(x + 1.0) -
                        (m.p * lp * lp + m.q * lq * lq) / (2.0 * h));

    // ratio = Gamma(x + l - 1) / l!
    cplx ratio = cgamma(x + 1.0) / 2.0;
    cplx series = 0.0;
    double last = 0.0;
    for (int l = 2; l <= trunc.l_max; ++l) {
        const double ld = l;
        const double pl = std::pow(m.p, ld) + std::pow(m.q, ld);
        const cplx term = (l % 2 == 0 ? 1.0 : -1.0) * pl / (1.0 - pl) * ratio *
                          (2.0 * ld * ld - 2.0 * ld + 1.0 + x * (2.0 * ld - 1.0));
        series += term;
        last = std::abs(term);
        ratio *= (x + ld - 1.0) / (ld + 1.0);
    }
    if (last > trunc.tolerance)
        throw Error(ErrorKind::TruncationNotConverged,
                    "l-series term " + std::to_string(last) + " above tolerance at l=" +
                        std::to_string(trunc.l_max));
    series /= h;

    return first + convolution + third + series;
}

enum class Family { G1, G2, G3 };

constexpr std::string_view to_string(Family f) noexcept {
    switch (f) {
    case Family::G1: return "g1";
    case Family::G2: return "g2";
    case Family::G3: return "g3";
    }
    return "?";
}

namespace detail {

inline void check_series(double last, const Truncation& trunc, std::string_view name) {
    if (last > trunc.tolerance) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " l-series last term %.3g above tolerance %.3g at l_max=%d", last,
                      trunc.tolerance, trunc.l_max);
        throw Error(ErrorKind::TruncationNotConverged, std::string(name) + buf);
    }
}

inline cplx chi_symmetric(int k) { return {0.0, 2.0 * std::numbers::pi * k / std::numbers::ln2}; }

} // namespace detail

// Symmetric-case (p = 1/2) series. At k = 0 the leading Gamma(chi) times a
// vanishing factor is replaced by its first-order limit:
//   g1: -Gamma(x-1) x (x+1)^2 / 4 -> 1/4
//   g2: Gamma(x)(1 - (x^2+x+4)/2^{x+2}) -> ln2 - 1/4
//   g3: Gamma(x)(1 - (x^2-x+4)/2^{x+2}) -> ln2 + 1/4

/// Fourier coefficient of Var(S_n)/n at p = 1/2.
inline cplx g1_sym(int k, const Truncation& trunc = {}) {
    constexpr double ln2 = std::numbers::ln2;
    const cplx x = detail::chi_symmetric(k);
    const cplx lead = k == 0 ? cplx(0.25) : -cgamma(x - 1.0) * x * (x + 1.0) * (x + 1.0) / 4.0;
    cplx ratio = cgamma(x + 1.0) / 2.0;  // Gamma(x + l) / (l + 1)!
    cplx series = 0.0;
    double last = 0.0;
    for (int l = 1; l <= trunc.l_max; ++l) {
        const double ld = l;
        const cplx term = (l % 2 == 0 ? 1.0 : -1.0) * ratio * ld * (ld * (x + ld) - 1.0) /
                          (std::ldexp(1.0, l) - 1.0);
        series += term;
        last = std::abs(term);
        ratio *= (x + ld) / (ld + 2.0);
    }
    detail::check_series(last, trunc, "g1");
    return lead / ln2 + 2.0 * series / ln2;
}

/// Fourier coefficient of Cov(S_n,K_n)/n at p = 1/2, without the
/// convolution of the general formula.
inline cplx g2_sym(int k, const Truncation& trunc = {}) {
    constexpr double ln2 = std::numbers::ln2;
    const cplx x = detail::chi_symmetric(k);
    const cplx lead = k == 0 ? cplx(ln2 - 0.25)
                             : cgamma(x) * (1.0 - (x * x + x + 4.0) / std::pow(2.0, x + 2.0));
    cplx ratio = cgamma(x + 1.0) / 2.0;  // Gamma(x + l) / (l + 1)!
    cplx series = 0.0;
    double last = 0.0;
    for (int l = 1; l <= trunc.l_max; ++l) {
        const double ld = l;
        const cplx term = (l % 2 == 0 ? 1.0 : -1.0) * ratio *
                          (ld * (2.0 * ld + 1.0) * (x + ld) - (ld + 1.0) * (ld + 1.0)) /
                          (std::ldexp(1.0, l) - 1.0);
        series += term;
        last = std::abs(term);
        ratio *= (x + ld) / (ld + 2.0);
    }
    detail::check_series(last, trunc, "g2");
    return lead / ln2 + series / ln2;
}

/// Fourier coefficient of Var(K_n)/n at p = 1/2.
inline cplx g3_sym(int k, const Truncation& trunc = {}) {
    constexpr double ln2 = std::numbers::ln2;
    const cplx x = detail::chi_symmetric(k);
    const cplx lead = k == 0 ? cplx(ln2 + 0.25)
                             : cgamma(x) * (1.0 - (x * x - x + 4.0) / std::pow(2.0, x + 2.0));
    cplx ratio = cgamma(x + 1.0);  // Gamma(x + l) / l!
    cplx series = 0.0;
    double last = 0.0;
    for (int l = 1; l <= trunc.l_max; ++l) {
        const double ld = l;
        const cplx term = (l % 2 == 0 ? 1.0 : -1.0) * ratio * (ld * (x + ld - 1.0) - 1.0) /
                          (std::ldexp(1.0, l) - 1.0);
        series += term;
        last = std::abs(term);
        ratio *= (x + ld) / (ld + 1.0);
    }
    detail::check_series(last, trunc, "g3");
    return lead / ln2 + 2.0 * series / ln2;
}

/// Coefficients g_k for k = -k_max..k_max of one fluctuation family.
struct FourierCoeffs {
    Family family = Family::G2;
    int k_max = 0;
    std::vector<cplx> values;  // values[k + k_max]
    std::vector<cplx> chis;    // chi_k, same indexing
    Truncation trunc;

    [[nodiscard]] cplx at(int k) const {
        require(std::abs(k) <= k_max, "coefficient index outside k_max");
        return values[static_cast<std::size_t>(k + k_max)];
    }
    [[nodiscard]] cplx chi_at(int k) const { return chis[static_cast<std::size_t>(k + k_max)]; }
};

/// g1/g2/g3 at p = 1/2 from the symmetric series.
inline FourierCoeffs symmetric_coeffs(Family family, const Truncation& trunc = {}) {
    FourierCoeffs c;
    c.family = family;
    c.k_max = trunc.k_max;
    c.trunc = trunc;
    for (int k = -trunc.k_max; k <= trunc.k_max; ++k) {
        c.chis.push_back(detail::chi_symmetric(k));
        switch (family) {
        case Family::G1: c.values.push_back(g1_sym(k, trunc)); break;
        case Family::G2: c.values.push_back(g2_sym(k, trunc)); break;
        case Family::G3: c.values.push_back(g3_sym(k, trunc)); break;
        }
    }
    return c;
}

/// g2 for arbitrary p; collapses to g_0 alone in the irrational case.
inline FourierCoeffs general_g2_coeffs(const ModelParams& m, const Truncation& trunc) {
    FourierCoeffs c;
    c.family = Family::G2;
    c.k_max = m.ratio.rational ? trunc.k_max : 0;
    c.trunc = trunc;
    for (int k = -c.k_max; k <= c.k_max; ++k) {
        c.chis.push_back(chi(m, k));
        c.values.push_back(g2_general(m, k, trunc));
    }
    return c;
}

/// F[g](n) = g_0 + 2 Re sum_{k>=1} g_k n^{-chi_k}.
inline double fluct_eval(const FourierCoeffs& c, double n) {
    require(n > 1.0, "fluctuation evaluated at n <= 1");
    const double ln_n = std::log(n);
    double total = c.at(0).real();
    for (int k = 1; k <= c.k_max; ++k) total += 2.0 * (c.at(k) * std::exp(-c.chi_at(k) * ln_n)).real();
    return total;
}

/// The three p = 1/2 fluctuations and the limiting correlation F(n).
class SymmetricFluctuations {
public:
    explicit SymmetricFluctuations(const Truncation& trunc = {})
        : g1_(symmetric_coeffs(Family::G1, trunc)), g2_(symmetric_coeffs(Family::G2, trunc)),
          g3_(symmetric_coeffs(Family::G3, trunc)) {}

    const FourierCoeffs& g1() const noexcept { return g1_; }
    const FourierCoeffs& g2() const noexcept { return g2_; }
    const FourierCoeffs& g3() const noexcept { return g3_; }

    double F(double n) const {
        return fluct_eval(g2_, n) / std::sqrt(fluct_eval(g1_, n) * fluct_eval(g3_, n));
    }

    /// g2_0 / sqrt(g1_0 g3_0), the mean level of F.
    double mean_level() const {
        return g2_.at(0).real() / std::sqrt(g1_.at(0).real() * g3_.at(0).real());
    }

private:
    FourierCoeffs g1_, g2_, g3_;
};

inline const SymmetricFluctuations& default_symmetric_fluctuations() {
    static const SymmetricFluctuations instance;
    return instance;
}

/// Asymptotic rho(S_n, K_n) at p = 1/2.
inline double F_of_n(double n) { return default_symmetric_fluctuations().F(n); }

enum class SigmaVariant { Symmetric, Unified };

/// Asymptotic covariance matrix of (S_n, K_n). Only p = 1/2 has all three
/// coefficient families; elsewhere g1/g3 are not available.
inline SymMatrix2 sigma_matrix(const ModelParams& m, double n, SigmaVariant variant,
                               const SymmetricFluctuations& fl = default_symmetric_fluctuations()) {
    require(n >= 2.0, "sigma_matrix needs n >= 2");
    if (!m.symmetric()) {
        if (variant == SigmaVariant::Symmetric)
            throw Error(ErrorKind::Precondition, "symmetric Sigma_n requires p = 1/2");
        throw Error(ErrorKind::VariantUnavailable,
                    "unified Sigma_n needs g1/g3 for general p, which are not implemented");
    }
    const double lambda_term = variant == SigmaVariant::Unified ? m.lambda * std::log(n) : 0.0;
    return {n * fluct_eval(fl.g1(), n), n * fluct_eval(fl.g2(), n),
            n * (lambda_term + fluct_eval(fl.g3(), n))};
}

} // namespace tries
