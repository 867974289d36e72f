#include "crn/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace crn::stats {

Interval wilson(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) return {0.0, 1.0};
    if (successes < 0 || successes > trials) throw std::invalid_argument("bad success count");

    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double binomial_tail_above(double n, double p, double threshold) {
    if (n <= 0.0) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return n > threshold ? 1.0 : 0.0;
    const double mu = n * p;
    const double var = n * p * (1.0 - p);
    if (var < 1e-12) return mu > threshold ? 1.0 : 0.0;
    const double zscore = (threshold + 0.5 - mu) / std::sqrt(var);
    return 0.5 * std::erfc(zscore / std::sqrt(2.0));
}

double sign_test_p(int wins, int n) {
    if (n <= 0 || wins < 0 || wins > n) throw std::invalid_argument("bad sign test inputs");
    // P[X >= wins], X ~ Binomial(n, 1/2)
    double p = 0.0;
    double log_half_n = n * std::log(0.5);
    for (int k = wins; k <= n; ++k) {
        double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        p += std::exp(log_c + log_half_n);
    }
    return std::min(1.0, p);
}

} // namespace crn::stats
