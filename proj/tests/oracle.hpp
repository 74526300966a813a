#pragma once

// Reference moments for the tests. Solves the recurrences for central
// moments directly (law of total covariance) with lgamma-based binomial
// weights in long double, so it shares no code path with compute().

#include <cmath>
#include <vector>

namespace oracle {

struct Central {
    std::vector<long double> mS, mK, mN, vS, vK, vN, cSK, cSN;
};

inline std::vector<long double> binomial_weights(int n, long double p) {
    std::vector<long double> w(n + 1);
    const long double q = 1.0L - p;
    for (int k = 0; k <= n; ++k)
        w[k] = std::exp(std::lgamma((long double)n + 1) - std::lgamma((long double)k + 1) -
                        std::lgamma((long double)(n - k) + 1) + k * std::log(p) + (n - k) * std::log(q));
    return w;
}

inline Central central_moments(double p, int n_max) {
    Central c;
    for (auto* v : {&c.mS, &c.mK, &c.mN, &c.vS, &c.vK, &c.vN, &c.cSK, &c.cSN}) v->assign(n_max + 1, 0.0L);
    for (int n = 2; n <= n_max; ++n) {
        const auto w = binomial_weights(n, p);
        const long double a = w[0] + w[n], d = 1.0L - a, nn = n;
        long double s = 0, k_ = 0, u = 0;
        for (int k = 1; k < n; ++k) {
            const int j = n - k;
            s += w[k] * (c.mS[k] + c.mS[j]);
            k_ += w[k] * (c.mK[k] + c.mK[j]);
            u += w[k] * (c.mN[k] + c.mS[k] + c.mN[j] + c.mS[j]);
        }
        c.mS[n] = (s + 1) / d;
        c.mK[n] = (k_ + nn) / d;
        c.mN[n] = (u + a * c.mS[n]) / d;
        long double vs = 0, vk = 0, sk = 0, sn = 0, vn = 0;
        for (int k = 1; k < n; ++k) {
            const int j = n - k;
            const long double dS = c.mS[k] + c.mS[j] + 1 - c.mS[n];
            const long double dK = c.mK[k] + c.mK[j] + nn - c.mK[n];
            const long double dN = c.mN[k] + c.mS[k] + c.mN[j] + c.mS[j] - c.mN[n];
            vs += w[k] * (c.vS[k] + c.vS[j] + dS * dS);
            vk += w[k] * (c.vK[k] + c.vK[j] + dK * dK);
            sk += w[k] * (c.cSK[k] + c.cSK[j] + dS * dK);
            sn += w[k] * (c.cSN[k] + c.vS[k] + c.cSN[j] + c.vS[j] + dS * dN);
            vn += w[k] * (c.vN[k] + 2 * c.cSN[k] + c.vS[k] + c.vN[j] + 2 * c.cSN[j] + c.vS[j] + dN * dN);
        }
        c.vS[n] = (vs + a) / d;
        c.vK[n] = (vk + a * nn * nn) / d;
        c.cSK[n] = (sk + a * nn) / d;
        c.cSN[n] = (sn + a * (c.vS[n] + c.mS[n])) / d;
        c.vN[n] = (vn + a * (2 * c.cSN[n] + c.vS[n] + c.mS[n] * c.mS[n])) / d;
    }
    return c;
}

} // namespace oracle
