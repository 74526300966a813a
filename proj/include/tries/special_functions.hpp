#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "tries/errors.hpp"

namespace tries {

using cplx = std::complex<double>;

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

namespace detail {

// B_{2j} for j = 1..10
inline constexpr std::array<double, 10> kBernoulliEven = {
    1.0 / 6.0,        -1.0 / 30.0,    1.0 / 42.0,       -1.0 / 30.0,     5.0 / 66.0,
    -691.0 / 2730.0,  7.0 / 6.0,      -3617.0 / 510.0,  43867.0 / 798.0, -174611.0 / 330.0,
};

// Shifting until |z| >= 12 leaves the tenth Stirling term below 1e-20.
inline constexpr double kStirlingRadius = 12.0;
// Reflection is used left of Re z = 1/2 while sin(pi z) stays finite.
inline constexpr double kReflectionImagLimit = 100.0;

inline bool is_pole(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::nearbyint(z.real());
}

/// sin(pi z) with the real part reduced exactly into [-1, 1] first.
inline cplx sin_pi(cplx z) {
    const double x = z.real() - 2.0 * std::nearbyint(z.real() / 2.0);
    const double y = std::numbers::pi * z.imag();
    const double px = std::numbers::pi * x;
    return {std::sin(px) * std::cosh(y), std::cos(px) * std::sinh(y)};
}

inline cplx cos_pi(cplx z) {
    const double x = z.real() - 2.0 * std::nearbyint(z.real() / 2.0);
    const double y = std::numbers::pi * z.imag();
    const double px = std::numbers::pi * x;
    return {std::cos(px) * std::cosh(y), -std::sin(px) * std::sinh(y)};
}

/// Stirling series for log Gamma, valid for |z| >= kStirlingRadius off the
/// negative axis.
inline cplx log_gamma_stirling(cplx z) {
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx power = inv;
    cplx series = 0.0;
    for (std::size_t j = 0; j < kBernoulliEven.size(); ++j) {
        const double m = 2.0 * static_cast<double>(j + 1);
        series += kBernoulliEven[j] / (m * (m - 1.0)) * power;
        power *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

inline cplx digamma_asymptotic(cplx z) {
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx power = inv2;
    cplx series = 0.0;
    for (std::size_t j = 0; j < kBernoulliEven.size(); ++j) {
        const double m = 2.0 * static_cast<double>(j + 1);
        series += kBernoulliEven[j] / m * power;
        power *= inv2;
    }
    return std::log(z) - 0.5 * inv - series;
}

} // namespace detail

/// Complex Gamma function. Reflection left of Re z = 1/2, upward shift to
/// |z| >= 12, then the Stirling series. Returns 0 where the true value
/// underflows (far up the imaginary axis).
inline cplx cgamma(cplx z) {
    if (detail::is_pole(z))
        throw Error(ErrorKind::PoleError, "Gamma has a pole at " + std::to_string(z.real()));
    if (z.real() < 0.5 && std::abs(z.imag()) < detail::kReflectionImagLimit)
        return std::numbers::pi / (detail::sin_pi(z) * cgamma(1.0 - z));
    cplx product = 1.0;
    while (std::abs(z) < detail::kStirlingRadius) {
        product *= z;
        z += 1.0;
    }
    return std::exp(detail::log_gamma_stirling(z)) / product;
}

/// Digamma psi = Gamma'/Gamma, same regime split as cgamma.
inline cplx cdigamma(cplx z) {
    if (detail::is_pole(z))
        throw Error(ErrorKind::PoleError, "digamma has a pole at " + std::to_string(z.real()));
    if (z.real() < 0.5 && std::abs(z.imag()) < detail::kReflectionImagLimit)
        return cdigamma(1.0 - z) - std::numbers::pi * detail::cos_pi(z) / detail::sin_pi(z);
    cplx shift = 0.0;
    while (std::abs(z) < detail::kStirlingRadius) {
        shift += 1.0 / z;
        z += 1.0;
    }
    return detail::digamma_asymptotic(z) - shift;
}

} // namespace tries
