// Small tour of the library: the exact correlation of (S_n, K_n) next to its
// periodic limit F(n) at p = 1/2, then the decay at p = 0.2 and a short
// Monte-Carlo cross-check.

#include <cmath>
#include <cstdio>

#include "tries/tries.hpp"

int main() {
    using namespace tries;

    const MomentTable half = compute(0.5, 4096);
    const SymmetricFluctuations fl;
    std::printf("p = 1/2, mean level of F: %.10f\n", fl.mean_level());
    std::printf("%6s %12s %12s %12s\n", "n", "rho exact", "F(n)", "difference");
    for (int n = 256; n <= 4096; n *= 2)
        std::printf("%6d %12.8f %12.8f %12.2e\n", n, half.rho_SK(n), fl.F(n), half.rho_SK(n) - fl.F(n));

    const MomentTable biased = compute(0.2, 16384);
    std::printf("\np = 0.2, correlation decays slowly:\n");
    for (int n = 256; n <= 16384; n *= 4) std::printf("%6d %12.8f\n", n, biased.rho_SK(n));

    const SampleSummary s = run(4096, 0.5, 2000, 42);
    std::printf("\nMonte-Carlo at n = 4096, p = 1/2, %lld trials: rho = %.4f (exact %.4f)\n",
                static_cast<long long>(s.trials), s.rho(kS, kK), half.rho_SK(4096));
    return 0;
}
