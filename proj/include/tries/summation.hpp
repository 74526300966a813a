#pragma once

#include <cmath>

#include "tries/double_double.hpp"

namespace tries {

// Neumaier's variant of Kahan summation: also compensates when the addend is
// larger than the running sum.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double initial) : sum_(initial) {}

    CompensatedSum& operator+=(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }

    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Accumulator matched to a working scalar: compensated for double, plain
/// addition for DoubleDouble (whose own error is already below 1e-30).
template <class Real>
class Accumulator;

template <>
class Accumulator<double> {
public:
    Accumulator& operator+=(double x) {
        sum_ += x;
        return *this;
    }
    [[nodiscard]] double value() const { return sum_.value(); }

private:
    CompensatedSum sum_;
};

template <>
class Accumulator<DoubleDouble> {
public:
    Accumulator& operator+=(const DoubleDouble& x) {
        sum_ += x;
        return *this;
    }
    [[nodiscard]] DoubleDouble value() const { return sum_; }

private:
    DoubleDouble sum_;
};

} // namespace tries
