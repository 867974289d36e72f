#ifndef CRN_BASEBAND_HPP
#define CRN_BASEBAND_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "crn/counters.hpp"
#include "crn/transform.hpp"

namespace crn::bb {

using crn::cxd;
using Rng = std::mt19937_64;

/// Sample-spaced channel impulse response: taps h[l] plus the per-tap
/// variance profile they were drawn from (or are assumed to follow).
struct Cir {
    std::vector<cxd> taps;
    std::vector<double> profile;

    int length() const { return static_cast<int>(taps.size()); }
};

/// Frequency-domain channel transfer function, one coefficient per subcarrier.
struct Ctf {
    std::vector<cxd> coeffs;

    int size() const { return static_cast<int>(coeffs.size()); }
};

enum class Modulation { bpsk, qam4, qam16, qam64 };

int bits_per_symbol(Modulation scheme);

/// One OFDM symbol's worth of subcarrier values, transmitted or received.
struct SymbolGrid {
    std::vector<cxd> symbols;
    Modulation scheme = Modulation::bpsk;

    int size() const { return static_cast<int>(symbols.size()); }
};

struct NoiseParams {
    double sigma_w_sq = 0.0; // per-subcarrier complex noise variance
};

/// Exponentially decaying tap-power profile sigma_l^2 = c*2^-l, normalized
/// to unit total power.
std::vector<double> exponential_profile(int taps);

/// Draw a CIR with independent circular complex Gaussian taps of the given
/// per-tap variances.
Cir generate_cir(const std::vector<double>& profile, Rng& rng);

enum class TransformPath { zero_padded, pruned };

/// CTF from a CIR: coeffs[k] = sum_l exp(-j*2*pi*k*l/K) * taps[l].
/// The pruned path skips all arithmetic on the K - K0 zero taps; both paths
/// produce identical values and differ only in counted cost.
Ctf cir_to_ctf(const Cir& cir, int K, MultCounter& cost,
               TransformPath path = TransformPath::pruned);

/// y[k] = H[k]*x[k] + w[k] with circular complex Gaussian noise.
SymbolGrid apply_channel(const SymbolGrid& x, const Ctf& ctf, const NoiseParams& noise,
                         Rng& rng);

/// Map bits onto BPSK (0 -> +1) or unit-average-energy square M-QAM
/// (Gray-coded per axis). bits.size() must divide by bits_per_symbol.
SymbolGrid modulate(std::span<const std::uint8_t> bits, Modulation scheme);

struct HardDecision {
    std::vector<std::uint8_t> bits;
    SymbolGrid symbols; // nearest constellation points
};

HardDecision demodulate_hard(const SymbolGrid& soft, Modulation scheme);

/// Hard decision for a single subcarrier value.
cxd nearest_point(cxd value, Modulation scheme);

/// One-tap zero-forcing equalizer: soft[k] = y[k] / H[k]. Coefficients with
/// |H[k]| < floor are clamped to floor * H[k]/|H[k]|; exactly-zero
/// coefficients give soft[k] = 0.
SymbolGrid equalize(const SymbolGrid& y, const Ctf& ctf_estimate, double floor = 1e-9);

} // namespace crn::bb

#endif
