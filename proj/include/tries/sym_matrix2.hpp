#pragma once

#include <array>
#include <cmath>

#include "tries/errors.hpp"

namespace tries {

/// Symmetric 2x2 matrix [[a, b], [b, c]].
struct SymMatrix2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    static constexpr SymMatrix2 identity() { return {1.0, 0.0, 1.0}; }

    [[nodiscard]] constexpr double det() const { return a * c - b * b; }
    [[nodiscard]] constexpr double trace() const { return a + c; }

    /// Numerically positive-definite: diagonal positive and determinant not
    /// lost to rounding relative to a*c.
    [[nodiscard]] bool positive_definite() const {
        return a > 0.0 && c > 0.0 && det() > 1e-12 * a * c;
    }

    [[nodiscard]] std::array<double, 2> apply(double x, double y) const {
        return {a * x + b * y, b * x + c * y};
    }

    friend bool operator==(const SymMatrix2&, const SymMatrix2&) = default;
};

inline void require_positive_definite(const SymMatrix2& m) {
    if (!m.positive_definite())
        throw Error(ErrorKind::NotPositiveDefinite,
                    "matrix [[" + std::to_string(m.a) + ", " + std::to_string(m.b) + "], [" +
                        std::to_string(m.b) + ", " + std::to_string(m.c) +
                        "]] is not positive-definite");
}

/// The unique positive-definite square root.
inline SymMatrix2 sqrt2(const SymMatrix2& m) {
    require_positive_definite(m);
    const double s = std::sqrt(m.det());
    const double t = std::sqrt(m.a + m.c + 2.0 * s);
    return {(m.a + s) / t, m.b / t, (m.c + s) / t};
}

/// Inverse of sqrt2(m).
inline SymMatrix2 invsqrt2(const SymMatrix2& m) {
    require_positive_definite(m);
    const double d = m.det();
    const double s = std::sqrt(d);
    const double t = std::sqrt(d * (m.a + m.c + 2.0 * s));
    return {(m.c + s) / t, -m.b / t, (m.a + s) / t};
}

inline SymMatrix2 square(const SymMatrix2& s) {
    return {s.a * s.a + s.b * s.b, s.b * (s.a + s.c), s.b * s.b + s.c * s.c};
}

/// w * m * w, symmetric whenever w and m are.
inline SymMatrix2 sandwich(const SymMatrix2& w, const SymMatrix2& m) {
    // rows of w*m
    const double r11 = w.a * m.a + w.b * m.b;
    const double r12 = w.a * m.b + w.b * m.c;
    const double r21 = w.b * m.a + w.c * m.b;
    const double r22 = w.b * m.b + w.c * m.c;
    return {r11 * w.a + r12 * w.b, r11 * w.b + r12 * w.c, r21 * w.b + r22 * w.c};
}

} // namespace tries
