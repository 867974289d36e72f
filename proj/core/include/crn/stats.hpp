#ifndef CRN_STATS_HPP
#define CRN_STATS_HPP

#include <cstdint>
#include <utility>

namespace crn::stats {

/// Wilson score interval for a binomial proportion.
struct Interval {
    double low = 0.0;
    double high = 0.0;
};

Interval wilson(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

/// P[Binomial(n, p) > threshold], normal approximation with continuity
/// correction; exact at the degenerate edges.
double binomial_tail_above(double n, double p, double threshold);

/// One-sided sign-test p-value: probability of >= wins successes in n fair
/// coin flips (exact binomial sum).
double sign_test_p(int wins, int n);

} // namespace crn::stats

#endif
