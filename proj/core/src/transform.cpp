#include "crn/transform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crn::dft {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double angle_sign(Direction dir) { return dir == Direction::forward ? -1.0 : 1.0; }

cxd twiddle(int n, long index, Direction dir) {
    return std::polar(1.0, angle_sign(dir) * kTwoPi * static_cast<double>(index) /
                               static_cast<double>(n));
}

// Strided view into the caller's input; decimation recursions double the
// stride instead of copying.
struct StridedIn {
    const cxd* base;
    int stride;
    const cxd& operator[](int i) const { return base[static_cast<long>(i) * stride]; }
};

// DFT of x (length n, first `nonzero` entries possibly nonzero, the rest
// exactly zero) into out[0..n). Decimation in time: even/odd input split
// preserves the leading-nonzero-block structure.
void dit_recurse(StridedIn x, int n, int nonzero, Direction dir, cxd* out, MultCounter& cost) {
    if (nonzero <= 0) {
        for (int k = 0; k < n; ++k) out[k] = cxd(0.0, 0.0);
        return;
    }
    if (n == 1) {
        out[0] = x[0];
        return;
    }
    if (nonzero == 1) {
        // only x[0] contributes and its twiddle powers are all 1
        for (int k = 0; k < n; ++k) out[k] = x[0];
        return;
    }
    if (n % 2 != 0) {
        // odd factor: direct evaluation over the nonzero block
        for (int k = 0; k < n; ++k) {
            cxd acc = x[0];
            for (int l = 1; l < nonzero; ++l) {
                long e = static_cast<long>(k) * l % n;
                if (e == 0) {
                    acc += x[l];
                } else {
                    acc += twiddle(n, e, dir) * x[l];
                    ++cost.complex_mults;
                }
                ++cost.complex_adds;
            }
            out[k] = acc;
        }
        return;
    }

    const int half = n / 2;
    const int even_nz = (nonzero + 1) / 2;
    const int odd_nz = nonzero / 2;

    std::vector<cxd> even(static_cast<std::size_t>(half));
    dit_recurse({x.base, x.stride * 2}, half, even_nz, dir, even.data(), cost);

    if (odd_nz == 0) {
        // odd branch is all zero: out[k] = even[k mod half]
        for (int k = 0; k < half; ++k) {
            out[k] = even[k];
            out[k + half] = even[k];
        }
        return;
    }

    std::vector<cxd> odd(static_cast<std::size_t>(half));
    dit_recurse({x.base + x.stride, x.stride * 2}, half, odd_nz, dir, odd.data(), cost);

    for (int k = 0; k < half; ++k) {
        cxd t;
        if (k == 0) {
            t = odd[0];
        } else {
            t = twiddle(n, k, dir) * odd[k];
            ++cost.complex_mults;
        }
        out[k] = even[k] + t;
        out[k + half] = even[k] - t;
        cost.complex_adds += 2;
    }
}

// First `want` bins of the n-point DFT of x. Decimation in frequency:
// even bins come from the fold sum, odd bins from the twiddled fold
// difference; branches with no requested bins are skipped.
void dif_recurse(StridedIn x, int n, int want, Direction dir, cxd* out, MultCounter& cost) {
    if (want <= 0) return;
    if (n == 1) {
        out[0] = x[0];
        return;
    }
    if (want == 1) {
        cxd acc = x[0];
        for (int m = 1; m < n; ++m) {
            acc += x[m];
            ++cost.complex_adds;
        }
        out[0] = acc;
        return;
    }
    if (n % 2 != 0) {
        for (int k = 0; k < want; ++k) {
            cxd acc = x[0];
            for (int m = 1; m < n; ++m) {
                long e = static_cast<long>(k) * m % n;
                if (e == 0) {
                    acc += x[m];
                } else {
                    acc += twiddle(n, e, dir) * x[m];
                    ++cost.complex_mults;
                }
                ++cost.complex_adds;
            }
            out[k] = acc;
        }
        return;
    }

    const int half = n / 2;
    const int even_want = (want + 1) / 2;
    const int odd_want = want / 2;

    std::vector<cxd> fold(static_cast<std::size_t>(half));
    for (int m = 0; m < half; ++m) {
        fold[m] = x[m] + x[m + half];
        ++cost.complex_adds;
    }
    std::vector<cxd> even_out(static_cast<std::size_t>(even_want));
    dif_recurse({fold.data(), 1}, half, even_want, dir, even_out.data(), cost);

    std::vector<cxd> odd_out;
    if (odd_want > 0) {
        std::vector<cxd> diff(static_cast<std::size_t>(half));
        for (int m = 0; m < half; ++m) {
            cxd d = x[m] - x[m + half];
            ++cost.complex_adds;
            if (m == 0) {
                diff[m] = d;
            } else {
                diff[m] = twiddle(n, m, dir) * d;
                ++cost.complex_mults;
            }
        }
        odd_out.resize(static_cast<std::size_t>(odd_want));
        dif_recurse({diff.data(), 1}, half, odd_want, dir, odd_out.data(), cost);
    }

    for (int r = 0; r < even_want; ++r) out[2 * r] = even_out[static_cast<std::size_t>(r)];
    for (int r = 0; r < odd_want; ++r) out[2 * r + 1] = odd_out[static_cast<std::size_t>(r)];
}

} // namespace

std::vector<cxd> from_leading_taps(std::span<const cxd> head, int n, Direction dir,
                                   MultCounter& cost) {
    if (n < 1) throw std::invalid_argument("transform size must be positive");
    if (static_cast<int>(head.size()) > n)
        throw std::invalid_argument("leading block longer than transform size");
    std::vector<cxd> out(static_cast<std::size_t>(n));
    dit_recurse({head.data(), 1}, n, static_cast<int>(head.size()), dir, out.data(), cost);
    return out;
}

std::vector<cxd> full(std::span<const cxd> input, Direction dir, MultCounter& cost) {
    return from_leading_taps(input, static_cast<int>(input.size()), dir, cost);
}

std::vector<cxd> leading_bins(std::span<const cxd> input, int count, Direction dir,
                              MultCounter& cost) {
    const int n = static_cast<int>(input.size());
    if (n < 1) throw std::invalid_argument("transform size must be positive");
    if (count < 0 || count > n) throw std::invalid_argument("bin count out of range");
    std::vector<cxd> out(static_cast<std::size_t>(count));
    dif_recurse({input.data(), 1}, n, count, dir, out.data(), cost);
    return out;
}

} // namespace crn::dft
