#ifndef CRN_TRANSFORM_HPP
#define CRN_TRANSFORM_HPP

#include <complex>
#include <span>
#include <vector>

#include "crn/counters.hpp"

namespace crn {

using cxd = std::complex<double>;

namespace dft {

enum class Direction {
    forward, // twiddle base exp(-j*2*pi/n)
    inverse  // twiddle base exp(+j*2*pi/n), no 1/n scaling
};

/// Full n-point transform of `input` (input.size() == n).
/// Radix-2 decimation in time with direct evaluation at odd factors.
std::vector<cxd> full(std::span<const cxd> input, Direction dir, MultCounter& cost);

/// All n bins of a transform whose input is `head` zero-padded to length n
/// (head.size() <= n). Subtrees that decimate onto the zero tail are skipped,
/// so the counter reflects the pruned multiply count. Results are identical
/// to running `full` on the zero-padded vector.
std::vector<cxd> from_leading_taps(std::span<const cxd> head, int n, Direction dir,
                                   MultCounter& cost);

/// First `count` bins of the n-point transform of `input`
/// (n == input.size(), count <= n). Decimation in frequency; branches whose
/// bins are not requested are never evaluated.
std::vector<cxd> leading_bins(std::span<const cxd> input, int count, Direction dir,
                              MultCounter& cost);

} // namespace dft
} // namespace crn

#endif
