#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tries/asymptotics.hpp"
#include "tries/exact_moments.hpp"

using namespace tries;

namespace {

// Reference values from a 40-digit evaluation of the same series.
constexpr double kG1_0 = 0.84585862307600128550;
constexpr double kG2_0 = 1.7792274862482200682;
constexpr double kG3_0 = 4.3529066989454006037;
constexpr double kRatio = 0.92724160350452883;
const cplx kG1_1(5.078853029613e-7, -6.746652948865e-7);
const cplx kG2_1(-7.420560370534e-6, 4.027080377101e-6);
const cplx kG3_1(-1.696344008634e-5, 7.073488299220e-6);
const cplx kG2_2(1.5044594107e-11, 5.4990695745e-11);

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

const MomentTable& half_table() {
    static const MomentTable t = compute(0.5, 4096, Precision::Extended);
    return t;
}

} // namespace

TEST(Params, SymmetricCase) {
    const ModelParams m = params(0.5);
    EXPECT_DOUBLE_EQ(m.h, std::numbers::ln2);
    EXPECT_EQ(m.lambda, 0.0);
    EXPECT_NEAR(m.lambda_alt, 0.0, 1e-15);
    EXPECT_TRUE(m.symmetric());
    EXPECT_EQ(m.ratio, RatioSpec::make_rational(1, 1));
    EXPECT_TRUE(m.ratio_detected);
}

TEST(Params, LambdaFormsAgree) {
    for (double p = 0.01; p < 0.995; p += 0.0137) {
        const ModelParams m = params(p);
        EXPECT_GT(m.h, 0.0);
        EXPECT_GE(m.lambda, 0.0);
        // the second form cancels h^2 against a term of the same size
        const double lp = std::log(p), lq = std::log(1 - p);
        const double scale = (p * lp * lp + (1 - p) * lq * lq) / (m.h * m.h * m.h);
        EXPECT_NEAR(m.lambda_alt, m.lambda, 1e-13 * scale) << p;
    }
    EXPECT_NEAR(params(0.2).lambda, 2.45399, 1e-5);
    for (double p : {0.2, 0.3}) EXPECT_NEAR(params(p).lambda_alt / params(p).lambda, 1.0, 1e-13);
}

TEST(Params, RatioDetection) {
    // q = p^2 for p = golden section, so log p / log q = 1/2
    EXPECT_EQ(params(kGolden).ratio, RatioSpec::make_rational(1, 2));
    EXPECT_EQ(params(1 - kGolden).ratio, RatioSpec::make_rational(2, 1));
    EXPECT_FALSE(params(0.3).ratio.rational);
    EXPECT_FALSE(params(0.2).ratio.rational);
}

TEST(Params, ExplicitRatioIsChecked) {
    const ModelParams m = params(1 - kGolden, RatioSpec::make_rational(2, 1));
    EXPECT_FALSE(m.ratio_detected);
    auto kind_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind_of([] { params(0.3, RatioSpec::make_rational(1, 2)); }), ErrorKind::RatioSpecMismatch);
    EXPECT_EQ(kind_of([] { params(0.5, RatioSpec::make_rational(2, 2)); }), ErrorKind::RatioSpecMismatch);
    EXPECT_FALSE(params(0.5, RatioSpec::irrational()).ratio.rational);
    EXPECT_THROW(params(1.5), Error);
}

TEST(Chi, SymmetricSpacing) {
    const ModelParams m = params(0.5);
    for (int k = -3; k <= 3; ++k) {
        EXPECT_EQ(chi(m, k).real(), 0.0);
        EXPECT_NEAR(chi(m, k).imag(), 2 * std::numbers::pi * k / std::numbers::ln2, 1e-12);
    }
    EXPECT_THROW((void)chi(params(0.3), 1), Error);
}

// ---------------------------------------------------------------------------

TEST(SymmetricSeries, LeadingCoefficients) {
    EXPECT_NEAR(g1_sym(0).real(), kG1_0, 1e-13);
    EXPECT_NEAR(g2_sym(0).real(), kG2_0, 1e-13);
    EXPECT_NEAR(g3_sym(0).real(), kG3_0, 1e-13);
    for (int f = 0; f < 3; ++f) {
        const cplx g = f == 0 ? g1_sym(0) : f == 1 ? g2_sym(0) : g3_sym(0);
        EXPECT_LT(std::abs(g.imag()), 1e-12);
        EXPECT_GT(g.real(), 0.0);
    }
}

TEST(SymmetricSeries, MeanCorrelation) {
    const double r = g2_sym(0).real() / std::sqrt(g1_sym(0).real() * g3_sym(0).real());
    EXPECT_NEAR(r, 0.9272416035, 1e-8);
    EXPECT_NEAR(r, kRatio, 1e-12);
    EXPECT_NEAR(default_symmetric_fluctuations().mean_level(), r, 0.0);
}

TEST(SymmetricSeries, HarmonicsMatchReference) {
    EXPECT_LT(std::abs(g1_sym(1) - kG1_1), 1e-15);
    EXPECT_LT(std::abs(g2_sym(1) - kG2_1), 1e-15);
    EXPECT_LT(std::abs(g3_sym(1) - kG3_1), 1e-15);
    EXPECT_LT(std::abs(g2_sym(2) - kG2_2), 1e-19);
}

TEST(SymmetricSeries, ConjugateSymmetryAndDecay) {
    for (Family fam : {Family::G1, Family::G2, Family::G3}) {
        const FourierCoeffs c = symmetric_coeffs(fam);
        const double g0 = std::abs(c.at(0));
        for (int k = 1; k <= c.k_max; ++k) {
            EXPECT_LT(std::abs(c.at(-k) - std::conj(c.at(k))), 1e-15 + 1e-13 * std::abs(c.at(k)));
            EXPECT_LT(std::abs(c.at(k)), g0);
            if (k > 1) EXPECT_LT(std::abs(c.at(k)), std::abs(c.at(k - 1)));
        }
    }
}

TEST(SymmetricSeries, TruncationFailureIsReported) {
    Truncation t;
    t.l_max = 5;
    try {
        (void)g2_sym(0, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TruncationNotConverged);
    }
}

// ---------------------------------------------------------------------------

TEST(GeneralG2, AgreesWithSymmetricSeries) {
    const ModelParams m = params(0.5);
    const Truncation t = default_truncation(m);
    for (int k : {0, 1, 2, -1}) EXPECT_LT(std::abs(g2_general(m, k, t) - g2_sym(k)), 1e-9) << k;
    EXPECT_LT(std::abs(g2_general(m, 1, t) - g2_sym(1)), 1e-6 * std::abs(g2_sym(1)));
    EXPECT_LT(std::abs(g2_general(m, 1, t)), 1e-4 * std::abs(g2_general(m, 0, t)));
}

TEST(GeneralG2, IrrationalCaseIsRealConstant) {
    const ModelParams m = params(0.3);
    const FourierCoeffs c = general_g2_coeffs(m, default_truncation(m));
    EXPECT_EQ(c.k_max, 0);
    EXPECT_LT(std::abs(c.at(0).imag()), 1e-12);
    EXPECT_THROW((void)g2_general(m, 1, default_truncation(m)), Error);
    EXPECT_DOUBLE_EQ(fluct_eval(c, 100.0), c.at(0).real());
    EXPECT_DOUBLE_EQ(fluct_eval(c, 12345.0), c.at(0).real());
}

TEST(GeneralG2, MatchesExactCovariance) {
    // irrational p: Cov/n converges to g_0
    for (double p : {0.3, 0.2}) {
        const ModelParams m = params(p);
        const FourierCoeffs c = general_g2_coeffs(m, default_truncation(m));
        const MomentTable t = compute(p, 1 << 14);
        for (int n : {1024, 4096, 16384})
            EXPECT_LT(std::abs(t.cov_SK(n) / n - fluct_eval(c, n)), 1e-2 * c.at(0).real()) << p << " " << n;
    }
    // rational p != 1/2: a genuine fluctuation with its own period
    const ModelParams m = params(1 - kGolden);
    const FourierCoeffs c = general_g2_coeffs(m, default_truncation(m));
    EXPECT_EQ(c.k_max, 5);
    EXPECT_GT(std::abs(c.at(1)), 0.0);
    const MomentTable t = compute(1 - kGolden, 4096);
    for (int n : {1024, 2048, 3000, 4096}) EXPECT_LT(std::abs(t.cov_SK(n) / n - fluct_eval(c, n)), 1e-7) << n;
    const double period = std::log(1 / m.q);
    EXPECT_NEAR(fluct_eval(c, 500.0), fluct_eval(c, 500.0 * std::exp(period)), 1e-12);
}

TEST(GeneralG2, ShortSeriesFails) {
    const ModelParams m = params(0.2);
    Truncation t;  // l_max = 80 is too short when max(p,q) = 0.8
    EXPECT_THROW((void)g2_general(m, 0, t), Error);
    EXPECT_GE(default_truncation(m).l_max, 80);
    EXPECT_GE(default_truncation(params(0.5)).l_max, 80);
}

// ---------------------------------------------------------------------------

TEST(Fluctuations, ConstantSeries) {
    FourierCoeffs c;
    c.values = {cplx(2.5, 0.0)};
    c.chis = {0.0};
    for (double n : {2.0, 17.0, 1e6}) EXPECT_EQ(fluct_eval(c, n), 2.5);
    EXPECT_THROW((void)fluct_eval(c, 1.0), Error);
}

TEST(Fluctuations, PeriodicInLog2) {
    const auto& fl = default_symmetric_fluctuations();
    for (double n : {3.0, 100.0, 777.7, 1e5}) {
        EXPECT_NEAR(fluct_eval(fl.g2(), n), fluct_eval(fl.g2(), 2 * n), 1e-12);
        EXPECT_NEAR(fl.F(n), fl.F(2 * n), 1e-12);
        EXPECT_NEAR(F_of_n(n), fl.F(n), 0.0);
    }
}

TEST(Fluctuations, CorrelationOverOnePeriod) {
    const int points = 4096;
    double sum = 0, lo = 1e9, hi = -1e9;
    for (int i = 0; i < points; ++i) {
        const double f = F_of_n(std::exp2(10.0 + double(i) / points));
        sum += f;
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double mean = sum / points;
    EXPECT_NEAR(mean, 0.9272416035, 1e-6);
    EXPECT_LE(std::max(hi - mean, mean - lo), 1.5e-5);
    EXPECT_LE(hi - lo, 3e-5);
    EXPECT_GT(hi - lo, 1e-6);
}

TEST(Fluctuations, AgreeWithExactMoments) {
    const auto& fl = default_symmetric_fluctuations();
    const MomentTable& t = half_table();
    const double tol = 1e-2;
    for (int n : {256, 1024, 4096}) {
        EXPECT_LT(std::abs(t.cov_SK(n) / n - fluct_eval(fl.g2(), n)), tol * kG2_0) << n;
        EXPECT_LT(std::abs(t.var_S(n) / n - fluct_eval(fl.g1(), n)), tol * kG1_0) << n;
        EXPECT_LT(std::abs(t.var_K(n) / n - fluct_eval(fl.g3(), n)), tol * kG3_0) << n;
    }
    EXPECT_LT(std::abs(fluct_eval(fl.g1(), 1024) / (t.var_S(1024) / 1024) - 1), 1e-2);
}

// ---------------------------------------------------------------------------

TEST(SigmaMatrix, SymmetricCase) {
    const ModelParams m = params(0.5);
    const SymMatrix2 s = sigma_matrix(m, 1e6, SigmaVariant::Symmetric);
    EXPECT_TRUE(s.positive_definite());
    EXPECT_EQ(s, sigma_matrix(m, 1e6, SigmaVariant::Unified));
    const SymMatrix2 d = sigma_matrix(m, 2e6, SigmaVariant::Symmetric);
    EXPECT_NEAR(d.a, 2 * s.a, 1e-12 * d.a);
    EXPECT_NEAR(d.b, 2 * s.b, 1e-12 * d.b);
    EXPECT_NEAR(d.c, 2 * s.c, 1e-12 * d.c);
    EXPECT_THROW(sigma_matrix(m, 1.0, SigmaVariant::Symmetric), Error);
}

TEST(SigmaMatrix, GeneralPUnavailable) {
    const ModelParams m = params(0.3);
    auto kind = [&](SigmaVariant v) {
        try {
            (void)sigma_matrix(m, 1e4, v);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind(SigmaVariant::Unified), ErrorKind::VariantUnavailable);
    EXPECT_EQ(kind(SigmaVariant::Symmetric), ErrorKind::Precondition);
}
