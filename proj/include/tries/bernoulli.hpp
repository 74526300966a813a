#pragma once

#include <algorithm>

#include "tries/errors.hpp"

namespace tries {

/// Bit source parameters. q is stored rather than derived so a caller holding
/// p as a decimal string can pass its exact decimal complement; that makes
/// results at p and 1-p bitwise identical.
struct Bernoulli {
    double p = 0.5;
    double q = 0.5;

    static Bernoulli from_p(double p) {
        require_probability(p);
        return {p, 1.0 - p};
    }

    static Bernoulli from_pair(double p, double q) {
        require_probability(p);
        require_probability(q);
        require(std::abs(p + q - 1.0) < 1e-12, "p and q must sum to 1");
        return {p, q};
    }

    [[nodiscard]] double smaller() const { return std::min(p, q); }
    [[nodiscard]] double larger() const { return std::max(p, q); }
    [[nodiscard]] bool symmetric() const { return p == q; }
};

} // namespace tries
