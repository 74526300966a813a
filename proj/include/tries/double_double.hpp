#pragma once

#include <cmath>
#include <ostream>

namespace tries {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2; about 32 significant digits.
// Error-free transforms after Dekker and Knuth, product via fma.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double x) : hi(x), lo(0.0) {}  // NOLINT: implicit by intent
    constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }

    static DoubleDouble two_sum(double a, double b) {
        double s = a + b;
        double bb = s - a;
        double err = (a - (s - bb)) + (b - bb);
        return {s, err};
    }

    static DoubleDouble quick_two_sum(double a, double b) {
        double s = a + b;
        return {s, b - (s - a)};
    }

    static DoubleDouble two_prod(double a, double b) {
        double p = a * b;
        return {p, std::fma(a, b, -p)};
    }

    DoubleDouble& operator+=(const DoubleDouble& y) {
        DoubleDouble s = two_sum(hi, y.hi);
        DoubleDouble t = two_sum(lo, y.lo);
        s.lo += t.hi;
        s = quick_two_sum(s.hi, s.lo);
        s.lo += t.lo;
        *this = quick_two_sum(s.hi, s.lo);
        return *this;
    }

    DoubleDouble& operator-=(const DoubleDouble& y) { return *this += -y; }

    DoubleDouble& operator*=(const DoubleDouble& y) {
        DoubleDouble p = two_prod(hi, y.hi);
        p.lo += hi * y.lo + lo * y.hi;
        *this = quick_two_sum(p.hi, p.lo);
        return *this;
    }

    DoubleDouble& operator/=(const DoubleDouble& y) {
        double q1 = hi / y.hi;
        DoubleDouble r = *this - y * DoubleDouble(q1);
        double q2 = r.hi / y.hi;
        r -= y * DoubleDouble(q2);
        double q3 = r.hi / y.hi;
        *this = quick_two_sum(q1, q2);
        *this += DoubleDouble(q3);
        return *this;
    }

    DoubleDouble operator-() const { return {-hi, -lo}; }

    friend DoubleDouble operator+(DoubleDouble a, const DoubleDouble& b) { return a += b; }
    friend DoubleDouble operator-(DoubleDouble a, const DoubleDouble& b) { return a -= b; }
    friend DoubleDouble operator*(DoubleDouble a, const DoubleDouble& b) { return a *= b; }
    friend DoubleDouble operator/(DoubleDouble a, const DoubleDouble& b) { return a /= b; }

    friend bool operator<(const DoubleDouble& a, const DoubleDouble& b) {
        return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
    }
    friend bool operator>(const DoubleDouble& a, const DoubleDouble& b) { return b < a; }
    friend bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
        return a.hi == b.hi && a.lo == b.lo;
    }

    friend std::ostream& operator<<(std::ostream& os, const DoubleDouble& x) {
        return os << x.hi << (x.lo < 0 ? " - " : " + ") << std::abs(x.lo);
    }
};

inline DoubleDouble sqrt(const DoubleDouble& x) {
    if (x.hi <= 0.0) return DoubleDouble(std::sqrt(x.hi));
    double s = std::sqrt(x.hi);
    DoubleDouble sq = DoubleDouble::two_prod(s, s);
    double corr = ((x.hi - sq.hi) - sq.lo + x.lo) / (2.0 * s);
    return DoubleDouble::quick_two_sum(s, corr);
}

inline DoubleDouble abs(const DoubleDouble& x) { return x.hi < 0 ? -x : x; }

inline double to_double(double x) { return x; }
inline double to_double(const DoubleDouble& x) { return static_cast<double>(x); }

} // namespace tries
