#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tries/bernoulli.hpp"
#include "tries/double_double.hpp"
#include "tries/errors.hpp"
#include "tries/summation.hpp"

namespace tries {

enum class Precision { Standard, Extended };

constexpr std::string_view to_string(Precision p) noexcept {
    return p == Precision::Standard ? "standard" : "extended";
}

inline constexpr int kMaxExactN = 30000;

/// Exact first, second and mixed moments of (S_n, K_n, N_n) for n <= n_max.
///
/// Variances and covariances are formed in the working precision before
/// rounding to double, so the extended mode keeps them accurate even where the
/// raw second moments are ~1e5 times larger than the variance.
class MomentTable {
public:
    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double q() const noexcept { return q_; }
    [[nodiscard]] int n_max() const noexcept { return n_max_; }
    [[nodiscard]] Precision precision() const noexcept { return precision_; }

    [[nodiscard]] std::span<const double> ES() const noexcept { return es_; }
    [[nodiscard]] std::span<const double> EK() const noexcept { return ek_; }
    [[nodiscard]] std::span<const double> EN() const noexcept { return en_; }
    [[nodiscard]] std::span<const double> ES2() const noexcept { return es2_; }
    [[nodiscard]] std::span<const double> EK2() const noexcept { return ek2_; }
    [[nodiscard]] std::span<const double> EN2() const noexcept { return en2_; }
    [[nodiscard]] std::span<const double> ESK() const noexcept { return esk_; }
    [[nodiscard]] std::span<const double> ESN() const noexcept { return esn_; }

    double mean_S(int n) const { return es_[check(n)]; }
    double mean_K(int n) const { return ek_[check(n)]; }
    double mean_N(int n) const { return en_[check(n)]; }
    double var_S(int n) const { return var_s_[check(n)]; }
    double var_K(int n) const { return var_k_[check(n)]; }
    double var_N(int n) const { return var_n_[check(n)]; }
    double cov_SK(int n) const { return cov_sk_[check(n)]; }
    double cov_SN(int n) const { return cov_sn_[check(n)]; }

    /// Mean depth of a uniformly chosen key, E K_n / n.
    double mean_depth(int n) const {
        check(n);
        require(n >= 1, "mean depth needs at least one key");
        return ek_[n] / n;
    }

    double rho_SK(int n) const { return correlation(cov_SK(n), var_S(n), var_K(n), n); }
    double rho_SN(int n) const { return correlation(cov_SN(n), var_S(n), var_N(n), n); }

private:
    template <class Real>
    friend MomentTable compute_moments(Bernoulli, int);

    std::size_t check(int n) const {
        if (n < 0 || n > n_max_)
            throw Error(ErrorKind::IndexOutOfRange,
                        "n=" + std::to_string(n) + " outside table [0," + std::to_string(n_max_) + "]");
        return static_cast<std::size_t>(n);
    }

    static double correlation(double cov, double va, double vb, int n) {
        if (!(va > 0.0 && vb > 0.0))
            throw Error(ErrorKind::DegenerateVariance,
                        "correlation undefined at n=" + std::to_string(n) + " (zero variance)");
        return cov / std::sqrt(va * vb);
    }

    double p_ = 0.5, q_ = 0.5;
    int n_max_ = 0;
    Precision precision_ = Precision::Standard;
    std::vector<double> es_, ek_, en_, es2_, ek2_, en2_, esk_, esn_;
    std::vector<double> var_s_, var_k_, var_n_, cov_sk_, cov_sn_;
};

namespace detail {

inline constexpr double kWeightCutoff = 1e-40;

/// Binomial(n, prob) weights normalised to sum 1, generated by the ratio
/// recurrence outward from the mode and cut where they drop below 1e-40 of
/// the mode weight. Weights are stored for k in [lo, hi].
template <class Real>
struct BinomialWeights {
    int lo = 0, hi = 0;
    std::vector<Real> w;  // w[k - lo]

    void fill(int n, const Real& prob, const Real& comp, int mode) {
        const Real up = prob / comp;
        const Real down = comp / prob;
        std::vector<Real> right{Real(1.0)};
        for (int k = mode; k < n; ++k) {
            Real next = right.back() * (Real(double(n - k)) / Real(double(k + 1))) * up;
            if (to_double(next) < kWeightCutoff) break;
            right.push_back(next);
        }
        std::vector<Real> left;
        Real cur(1.0);
        for (int k = mode; k > 0; --k) {
            cur = cur * (Real(double(k)) / Real(double(n - k + 1))) * down;
            if (to_double(cur) < kWeightCutoff) break;
            left.push_back(cur);
        }
        lo = mode - static_cast<int>(left.size());
        hi = mode + static_cast<int>(right.size()) - 1;
        w.assign(left.rbegin(), left.rend());
        w.insert(w.end(), right.begin(), right.end());
        Accumulator<Real> total;
        for (const auto& x : w) total += x;
        const Real norm = total.value();
        for (auto& x : w) x = x / norm;
    }

    Real at(int k) const { return (k < lo || k > hi) ? Real(0.0) : w[k - lo]; }
};

} // namespace detail

/// Solves the distributional recurrences for every n in [2, n_max]. Subtree
/// sizes follow Binomial(n, p); by the p<->q symmetry of the law the weights
/// always use the smaller probability, so (p,q) and (q,p) give identical
/// tables.
template <class Real>
MomentTable compute_moments(Bernoulli bits, int n_max) {
    require(n_max >= 2, "n_max must be at least 2");
    require(n_max <= kMaxExactN, "n_max must not exceed " + std::to_string(kMaxExactN));

    const auto size = static_cast<std::size_t>(n_max) + 1;
    std::vector<Real> es(size), ek(size), en(size), es2(size), ek2(size), en2(size), esk(size),
        esn(size);

    const Real prob(bits.smaller());
    const Real comp(bits.larger());
    detail::BinomialWeights<Real> weights;

    for (int n = 2; n <= n_max; ++n) {
        int mode = static_cast<int>(std::floor((n + 1) * bits.smaller()));
        mode = std::min(std::max(mode, 0), n);
        weights.fill(n, prob, comp, mode);

        const Real self = weights.at(0) + weights.at(n);
        const int k_lo = std::max(weights.lo, 1);
        const int k_hi = std::min(weights.hi, n - 1);
        const Real nn(static_cast<double>(n));

        Accumulator<Real> denom, sum_s, sum_k, sum_n;
        for (int k = k_lo; k <= k_hi; ++k) {
            const int j = n - k;
            const Real w = weights.w[k - weights.lo];
            denom += w;
            sum_s += w * (es[k] + es[j]);
            sum_k += w * (ek[k] + ek[j]);
            sum_n += w * ((en[k] + es[k]) + (en[j] + es[j]));
        }
        const Real d = denom.value();
        es[n] = (sum_s.value() + Real(1.0)) / d;
        ek[n] = (sum_k.value() + nn) / d;
        en[n] = (sum_n.value() + self * es[n]) / d;

        Accumulator<Real> ss, kk, sk, sn, uu;
        for (int k = k_lo; k <= k_hi; ++k) {
            const int j = n - k;
            const Real w = weights.w[k - weights.lo];
            const Real s_k = es[k], s_j = es[j];
            const Real t_k = ek[k], t_j = ek[j];
            // N-contribution of a subtree hung one level deeper: N + S
            const Real u_k = en[k] + es[k], u_j = en[j] + es[j];
            const Real su_k = esn[k] + es2[k], su_j = esn[j] + es2[j];
            const Real uu_k = en2[k] + Real(2.0) * esn[k] + es2[k];
            const Real uu_j = en2[j] + Real(2.0) * esn[j] + es2[j];

            ss += w * (es2[k] + es2[j] + Real(2.0) * s_k * s_j + Real(2.0) * (s_k + s_j) + Real(1.0));
            kk += w * (ek2[k] + ek2[j] + Real(2.0) * t_k * t_j + Real(2.0) * nn * (t_k + t_j) + nn * nn);
            sk += w * (esk[k] + esk[j] + s_k * t_j + s_j * t_k + nn * (s_k + s_j) + (t_k + t_j) + nn);
            sn += w * (su_k + su_j + s_k * u_j + s_j * u_k + u_k + u_j);
            uu += w * (uu_k + uu_j + Real(2.0) * u_k * u_j);
        }
        es2[n] = (ss.value() + self * (Real(2.0) * es[n] + Real(1.0))) / d;
        ek2[n] = (kk.value() + self * (Real(2.0) * nn * ek[n] + nn * nn)) / d;
        esk[n] = (sk.value() + self * (nn * es[n] + ek[n] + nn)) / d;
        esn[n] = (sn.value() + self * (es2[n] + en[n] + es[n])) / d;
        en2[n] = (uu.value() + self * (Real(2.0) * esn[n] + es2[n])) / d;
    }

    MomentTable t;
    t.p_ = bits.p;
    t.q_ = bits.q;
    t.n_max_ = n_max;
    t.precision_ = std::is_same_v<Real, double> ? Precision::Standard : Precision::Extended;
    auto narrow = [&](const std::vector<Real>& v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
        return out;
    };
    t.es_ = narrow(es);
    t.ek_ = narrow(ek);
    t.en_ = narrow(en);
    t.es2_ = narrow(es2);
    t.ek2_ = narrow(ek2);
    t.en2_ = narrow(en2);
    t.esk_ = narrow(esk);
    t.esn_ = narrow(esn);
    t.var_s_.resize(size);
    t.var_k_.resize(size);
    t.var_n_.resize(size);
    t.cov_sk_.resize(size);
    t.cov_sn_.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        t.var_s_[i] = to_double(es2[i] - es[i] * es[i]);
        t.var_k_[i] = to_double(ek2[i] - ek[i] * ek[i]);
        t.var_n_[i] = to_double(en2[i] - en[i] * en[i]);
        t.cov_sk_[i] = to_double(esk[i] - es[i] * ek[i]);
        t.cov_sn_[i] = to_double(esn[i] - es[i] * en[i]);
    }
    return t;
}

inline MomentTable compute(Bernoulli bits, int n_max, Precision precision = Precision::Standard) {
    return precision == Precision::Standard ? compute_moments<double>(bits, n_max)
                                            : compute_moments<DoubleDouble>(bits, n_max);
}

inline MomentTable compute(double p, int n_max, Precision precision = Precision::Standard) {
    return compute(Bernoulli::from_p(p), n_max, precision);
}

// ---------------------------------------------------------------------------
// Poisson model
// ---------------------------------------------------------------------------

/// Poisson transform e^{-z} sum_n m_n z^n / n! of a moment sequence, truncated
/// at N(z) = ceil(|z| + 12 sqrt|z| + 50).
class PoissonSeries {
public:
    PoissonSeries() = default;
    explicit PoissonSeries(std::span<const double> moments)
        : m_(moments.begin(), moments.end()) {
        // the derivative reads m_{N+1}, so the usable truncation is size-2
        const double avail = static_cast<double>(m_.size()) - 2.0;
        const double slack = avail - 50.0;
        guard_ = slack <= 0.0 ? 0.0 : std::pow(-6.0 + std::sqrt(36.0 + slack), 2);
    }

    [[nodiscard]] std::span<const double> coefficients() const noexcept { return m_; }
    /// Largest |z| whose truncation fits inside the coefficient array.
    [[nodiscard]] double guard() const noexcept { return guard_; }

    static std::size_t truncation_for(double modulus) {
        return static_cast<std::size_t>(std::ceil(modulus + 12.0 * std::sqrt(modulus) + 50.0));
    }

    [[nodiscard]] std::complex<double> eval(std::complex<double> z, int derivative = 0) const {
        require(derivative == 0 || derivative == 1, "derivative order must be 0 or 1");
        const double r = std::abs(z);
        if (r > guard_)
            throw Error(ErrorKind::GuardExceeded,
                        "|z|=" + std::to_string(r) + " beyond Poisson series guard " +
                            std::to_string(guard_));
        auto coeff = [&](std::size_t n) {
            return derivative == 0 ? m_[n] : m_[n + 1] - m_[n];
        };
        if (r == 0.0) return coeff(0);
        const std::size_t last = truncation_for(r);
        const std::complex<double> log_z = std::log(z);
        std::complex<double> sum = 0.0;
        double biggest = 0.0;
        for (std::size_t n = 0; n <= last; ++n) {
            const double nd = static_cast<double>(n);
            sum += coeff(n) * std::exp(nd * log_z - std::lgamma(nd + 1.0) - z);
            biggest = std::max(biggest, std::abs(coeff(n)));
        }
        // Poisson masses past `last` shrink at least geometrically with ratio
        // r/(last+1); coefficients grow polynomially, covered by a factor last.
        const double ld = static_cast<double>(last);
        const double mass = std::exp(ld * std::log(r) - std::lgamma(ld + 1.0) - z.real());
        const double ratio = r / (ld + 1.0);
        const double tail = mass * biggest * ld * ratio / (1.0 - ratio);
        if (tail > 1e-12 * std::max(1.0, std::abs(sum)))
            throw Error(ErrorKind::GuardExceeded, "Poisson tail bound not met at |z|=" + std::to_string(r));
        return sum;
    }

    [[nodiscard]] double eval(double z, int derivative = 0) const {
        return eval(std::complex<double>(z, 0.0), derivative).real();
    }

private:
    std::vector<double> m_;
    double guard_ = 0.0;
};

inline std::complex<double> poisson_eval(const PoissonSeries& series, std::complex<double> z,
                                         int derivative = 0) {
    return series.eval(z, derivative);
}

/// Poisson generating functions of the first, second and mixed moments of
/// (S, K) together with the Poissonized variances, covariance and the two
/// toll functions of the covariance equation.
class PoissonModel {
public:
    explicit PoissonModel(const MomentTable& table)
        : p_(table.p()), q_(table.q()), f10_(table.ES()), f01_(table.EK()), f20_(table.ES2()),
          f02_(table.EK2()), f11_(table.ESK()) {}

    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double q() const noexcept { return q_; }
    [[nodiscard]] double guard() const noexcept { return f10_.guard(); }

    const PoissonSeries& f10() const noexcept { return f10_; }
    const PoissonSeries& f01() const noexcept { return f01_; }
    const PoissonSeries& f20() const noexcept { return f20_; }
    const PoissonSeries& f02() const noexcept { return f02_; }
    const PoissonSeries& f11() const noexcept { return f11_; }

    double var_S(double z) const {
        const double d = f10_.eval(z, 1);
        const double m = f10_.eval(z);
        return f20_.eval(z) - m * m - z * d * d;
    }

    double var_K(double z) const {
        const double d = f01_.eval(z, 1);
        const double m = f01_.eval(z);
        return f02_.eval(z) - m * m - z * d * d;
    }

    double cov(double z) const {
        return f11_.eval(z) - f10_.eval(z) * f01_.eval(z) - z * f10_.eval(z, 1) * f01_.eval(z, 1);
    }

    double h1(double z) const {
        const double a = f10_.eval(p_ * z, 1) - f10_.eval(q_ * z, 1);
        const double b = f01_.eval(p_ * z, 1) - f01_.eval(q_ * z, 1);
        return p_ * q_ * z * a * b;
    }

    double h2(double z) const {
        const double pz = p_ * z, qz = q_ * z;
        const double ez = std::exp(-z);
        const double first = z * ez *
                             (f10_.eval(pz) + f10_.eval(qz) + p_ * (1.0 - z) * f10_.eval(pz, 1) +
                              q_ * (1.0 - z) * f10_.eval(qz, 1));
        const double second = ez * ((1.0 + z) * f01_.eval(pz) + (1.0 + z) * f01_.eval(qz) -
                                    p_ * z * z * f01_.eval(pz, 1) - q_ * z * z * f01_.eval(qz, 1));
        const double third = z * ez * (1.0 - (1.0 + z * z) * ez);
        return first + second + third;
    }

private:
    double p_, q_;
    PoissonSeries f10_, f01_, f20_, f02_, f11_;
};

} // namespace tries
