#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tries/special_functions.hpp"
#include "tries/sym_matrix2.hpp"

using namespace tries;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// 100 points of the strip |Re z| <= 40, |Im z| <= 40, kept away from poles.
std::vector<cplx> strip_grid() {
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    std::vector<cplx> pts;
    while (pts.size() < 100) {
        const cplx z(u(eng), u(eng));
        if (std::abs(z.imag()) < 0.5 && std::abs(z.real() - std::round(z.real())) < 0.05) continue;
        pts.push_back(z);
    }
    return pts;
}

} // namespace

TEST(Gamma, ClassicalValues) {
    EXPECT_NEAR(cgamma(0.5).real(), std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(cgamma(0.5).real(), 1.772453850905516, 1e-14);
    double fact = 1.0;
    for (int n = 1; n <= 20; ++n) {
        EXPECT_LT(rel(cgamma(double(n)), fact), 1e-14) << n;
        fact *= n;
    }
    EXPECT_LT(rel(cgamma(-0.5), -2.0 * std::sqrt(std::numbers::pi)), 1e-14);
}

TEST(Gamma, MatchesRealGammaOnTheLine) {
    for (double x = -9.75; x < 30.0; x += 0.37) {
        if (std::abs(x - std::round(x)) < 1e-9) continue;
        EXPECT_LT(rel(cgamma(x), std::tgamma(x)), 1e-13) << x;
    }
}

TEST(Gamma, ModulusOnTheImaginaryAxis) {
    // |Gamma(1 + it)|^2 = pi t / sinh(pi t)
    for (double t : {2 * std::numbers::pi / std::numbers::ln2, 0.3, 1.0, 4.5, 20.0}) {
        const double lhs = std::norm(cgamma(cplx(1.0, t)));
        const double rhs = std::numbers::pi * t / std::sinh(std::numbers::pi * t);
        EXPECT_LT(std::abs(lhs / rhs - 1.0), 1e-12) << t;
    }
    for (int k = 1; k <= 5; ++k) {
        const double t = 2 * std::numbers::pi * k / std::numbers::ln2;
        const double lhs = std::norm(cgamma(cplx(1.0, t)));
        EXPECT_LT(std::abs(lhs / (std::numbers::pi * t / std::sinh(std::numbers::pi * t)) - 1.0), 1e-12) << k;
    }
}

TEST(Gamma, RecurrenceOnStrip) {
    for (const cplx z : strip_grid()) {
        const cplx lhs = cgamma(z + 1.0);
        const cplx rhs = z * cgamma(z);
        EXPECT_LT(rel(lhs, rhs), 1e-12) << z;
    }
}

TEST(Gamma, ReflectionAndConjugation) {
    for (const cplx z : strip_grid()) {
        if (std::abs(z.imag()) > 30) continue;  // sin(pi z) overflows the product test
        const cplx prod = cgamma(z) * cgamma(1.0 - z);
        EXPECT_LT(rel(prod, std::numbers::pi / std::sin(std::numbers::pi * z)), 1e-11) << z;
        EXPECT_LT(rel(cgamma(std::conj(z)), std::conj(cgamma(z))), 1e-14) << z;
    }
}

TEST(Gamma, PolesThrow) {
    for (double x : {0.0, -1.0, -7.0, -30.0}) {
        try {
            (void)cgamma(x);
            FAIL() << x;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::PoleError);
        }
        EXPECT_THROW((void)cdigamma(x), Error);
    }
    EXPECT_NO_THROW((void)cgamma(cplx(-3.0, 1e-3)));
}

TEST(Digamma, ClassicalValues) {
    EXPECT_NEAR(cdigamma(1.0).real(), -0.5772156649015329, 1e-15);
    EXPECT_NEAR(cdigamma(1.0).real(), -kEulerGamma, 1e-15);
    EXPECT_NEAR(cdigamma(0.5).real(), -kEulerGamma - 2 * std::numbers::ln2, 1e-14);
    EXPECT_NEAR(cdigamma(2.0).real(), 1 - kEulerGamma, 1e-15);
    // Im psi(1 + it) = -1/(2t) + (pi/2) coth(pi t)
    for (double t : {0.5, 3.0, 9.06}) {
        const double expect = -1 / (2 * t) + std::numbers::pi / 2 / std::tanh(std::numbers::pi * t);
        EXPECT_NEAR(cdigamma(cplx(1.0, t)).imag(), expect, 1e-13 * expect);
    }
}

TEST(Digamma, RecurrenceAndReflectionOnStrip) {
    for (const cplx z : strip_grid()) {
        const cplx lhs = cdigamma(z + 1.0);
        const cplx rhs = cdigamma(z) + 1.0 / z;
        EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(rhs))) << z;
        if (std::abs(z.imag()) < 30) {
            const cplx refl = cdigamma(1.0 - z) - cdigamma(z);
            const cplx expect = std::numbers::pi / std::tan(std::numbers::pi * z);
            EXPECT_LT(std::abs(refl - expect), 1e-11 * std::max(1.0, std::abs(expect))) << z;
        }
    }
}

TEST(Digamma, DerivativeOfLogGamma) {
    for (double x : {0.7, 2.5, 11.0, 35.0}) {
        const double h = 1e-5;
        const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
        EXPECT_NEAR(cdigamma(x).real(), fd, 1e-8);
    }
}

// ---------------------------------------------------------------------------

namespace {

SymMatrix2 product(const SymMatrix2& x, const SymMatrix2& y) {
    // only valid when x and y commute (true for a matrix and its roots)
    return {x.a * y.a + x.b * y.b, x.a * y.b + x.b * y.c, x.b * y.b + x.c * y.c};
}

double max_abs_diff(const SymMatrix2& x, const SymMatrix2& y) {
    return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c)});
}

} // namespace

TEST(SymMatrix2, IdentityAndDiagonal) {
    EXPECT_EQ(sqrt2(SymMatrix2::identity()), SymMatrix2::identity());
    EXPECT_EQ(invsqrt2(SymMatrix2::identity()), SymMatrix2::identity());
    const SymMatrix2 d = sqrt2({4.0, 0.0, 9.0});
    EXPECT_NEAR(d.a, 2.0, 1e-15);
    EXPECT_EQ(d.b, 0.0);
    EXPECT_NEAR(d.c, 3.0, 1e-15);
    const SymMatrix2 inv = invsqrt2({4.0, 0.0, 9.0});
    EXPECT_NEAR(inv.a, 0.5, 1e-15);
    EXPECT_NEAR(inv.c, 1.0 / 3.0, 1e-15);
}

TEST(SymMatrix2, RandomRoundTrips) {
    std::mt19937_64 eng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::lognormal_distribution<double> scale(0.0, 3.0);
    for (int seed = 0; seed < 100; ++seed) {
        // M = R diag(l1, l2) R^T with a random rotation and spread eigenvalues
        const double th = u(eng) * std::numbers::pi;
        const double l1 = scale(eng), l2 = l1 * std::exp(4 * u(eng));
        const double cs = std::cos(th), sn = std::sin(th);
        const SymMatrix2 m{l1 * cs * cs + l2 * sn * sn, (l1 - l2) * cs * sn, l1 * sn * sn + l2 * cs * cs};
        ASSERT_TRUE(m.positive_definite());
        const double norm = std::max(l1, l2);
        const SymMatrix2 r = sqrt2(m);
        EXPECT_LT(max_abs_diff(square(r), m) / norm, 1e-12) << seed;
        EXPECT_TRUE(r.positive_definite());
        const SymMatrix2 w = invsqrt2(m);
        EXPECT_LT(max_abs_diff(sandwich(w, m), SymMatrix2::identity()), 1e-10) << seed;
        EXPECT_LT(max_abs_diff(product(w, r), SymMatrix2::identity()), 1e-10) << seed;
    }
}

TEST(SymMatrix2, RejectsIndefinite) {
    for (const SymMatrix2 m : {SymMatrix2{2, 4, 8}, SymMatrix2{-1, 0, 1}, SymMatrix2{1, 2, 1}, SymMatrix2{}}) {
        try {
            (void)invsqrt2(m);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
        }
        EXPECT_THROW((void)sqrt2(m), Error);
    }
}
