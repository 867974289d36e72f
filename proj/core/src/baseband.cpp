#include "crn/baseband.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crn::bb {
namespace {

// Per-axis PAM levels for square M-QAM, unit average symbol energy.
// m = sqrt(M): levels {-(m-1), ..., -1, +1, ..., +(m-1)} / sqrt(2*(M-1)/3).
std::vector<double> pam_levels(int m) {
    const double norm = std::sqrt(2.0 * (static_cast<double>(m) * m - 1.0) / 3.0);
    std::vector<double> levels(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        levels[static_cast<std::size_t>(i)] = (2.0 * i - (m - 1)) / norm;
    return levels;
}

int side(Modulation scheme) {
    switch (scheme) {
    case Modulation::qam4: return 2;
    case Modulation::qam16: return 4;
    case Modulation::qam64: return 8;
    default: throw std::invalid_argument("not a QAM scheme");
    }
}

// Gray code of width `bits` applied to PAM level index.
unsigned to_gray(unsigned v) { return v ^ (v >> 1); }

unsigned from_gray(unsigned g) {
    unsigned v = 0;
    for (; g; g >>= 1) v ^= g;
    return v;
}

double pam_map(unsigned bits_value, int m, const std::vector<double>& levels) {
    return levels[from_gray(bits_value) % static_cast<unsigned>(m)];
}

unsigned pam_slice(double v, int m, const std::vector<double>& levels, int* index_out) {
    int best = 0;
    double best_d = std::abs(v - levels[0]);
    for (int i = 1; i < m; ++i) {
        double d = std::abs(v - levels[static_cast<std::size_t>(i)]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (index_out) *index_out = best;
    return to_gray(static_cast<unsigned>(best));
}

} // namespace

int bits_per_symbol(Modulation scheme) {
    switch (scheme) {
    case Modulation::bpsk: return 1;
    case Modulation::qam4: return 2;
    case Modulation::qam16: return 4;
    case Modulation::qam64: return 6;
    }
    throw std::invalid_argument("unsupported modulation scheme");
}

std::vector<double> exponential_profile(int taps) {
    if (taps < 1) throw std::invalid_argument("profile needs at least one tap");
    std::vector<double> p(static_cast<std::size_t>(taps));
    double sum = 0.0;
    for (int l = 0; l < taps; ++l) {
        p[static_cast<std::size_t>(l)] = std::pow(2.0, -l);
        sum += p[static_cast<std::size_t>(l)];
    }
    for (double& v : p) v /= sum;
    return p;
}

Cir generate_cir(const std::vector<double>& profile, Rng& rng) {
    if (profile.empty()) throw std::invalid_argument("empty tap profile");
    for (double v : profile)
        if (v < 0.0) throw std::invalid_argument("negative tap variance");

    std::normal_distribution<double> unit(0.0, 1.0);
    Cir cir;
    cir.profile = profile;
    cir.taps.resize(profile.size());
    for (std::size_t l = 0; l < profile.size(); ++l) {
        // variance split evenly between real and imaginary parts
        const double s = std::sqrt(profile[l] / 2.0);
        const double re = unit(rng);
        const double im = unit(rng);
        cir.taps[l] = cxd(s * re, s * im);
    }
    return cir;
}

Ctf cir_to_ctf(const Cir& cir, int K, MultCounter& cost, TransformPath path) {
    const int k0 = cir.length();
    if (k0 < 1) throw std::invalid_argument("empty CIR");
    if (K < k0) throw std::invalid_argument("subcarrier count smaller than CIR length");

    Ctf ctf;
    if (path == TransformPath::pruned) {
        ctf.coeffs = dft::from_leading_taps(cir.taps, K, dft::Direction::forward, cost);
    } else {
        std::vector<cxd> padded(static_cast<std::size_t>(K), cxd(0.0, 0.0));
        std::copy(cir.taps.begin(), cir.taps.end(), padded.begin());
        ctf.coeffs = dft::full(padded, dft::Direction::forward, cost);
    }
    return ctf;
}

SymbolGrid apply_channel(const SymbolGrid& x, const Ctf& ctf, const NoiseParams& noise,
                         Rng& rng) {
    if (x.size() != ctf.size())
        throw std::invalid_argument("symbol grid and CTF length mismatch");
    if (noise.sigma_w_sq < 0.0) throw std::invalid_argument("negative noise variance");

    std::normal_distribution<double> unit(0.0, 1.0);
    const double s = std::sqrt(noise.sigma_w_sq / 2.0);

    SymbolGrid y;
    y.scheme = x.scheme;
    y.symbols.resize(x.symbols.size());
    for (std::size_t k = 0; k < x.symbols.size(); ++k) {
        cxd w(0.0, 0.0);
        if (noise.sigma_w_sq > 0.0) w = cxd(s * unit(rng), s * unit(rng));
        y.symbols[k] = ctf.coeffs[k] * x.symbols[k] + w;
    }
    return y;
}

SymbolGrid modulate(std::span<const std::uint8_t> bits, Modulation scheme) {
    const int bps = bits_per_symbol(scheme);
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw std::invalid_argument("bit count not divisible by bits per symbol");

    SymbolGrid grid;
    grid.scheme = scheme;
    grid.symbols.reserve(bits.size() / static_cast<std::size_t>(bps));

    if (scheme == Modulation::bpsk) {
        for (std::uint8_t b : bits) grid.symbols.emplace_back(b ? -1.0 : 1.0, 0.0);
        return grid;
    }

    const int m = side(scheme);
    const int axis_bits = bps / 2;
    const auto levels = pam_levels(m);
    for (std::size_t i = 0; i < bits.size(); i += static_cast<std::size_t>(bps)) {
        unsigned re_bits = 0;
        unsigned im_bits = 0;
        for (int b = 0; b < axis_bits; ++b) re_bits = (re_bits << 1) | bits[i + static_cast<std::size_t>(b)];
        for (int b = 0; b < axis_bits; ++b)
            im_bits = (im_bits << 1) | bits[i + static_cast<std::size_t>(axis_bits + b)];
        grid.symbols.emplace_back(pam_map(re_bits, m, levels), pam_map(im_bits, m, levels));
    }
    return grid;
}

cxd nearest_point(cxd value, Modulation scheme) {
    if (scheme == Modulation::bpsk) return value.real() >= 0.0 ? cxd(1.0, 0.0) : cxd(-1.0, 0.0);
    const int m = side(scheme);
    const auto levels = pam_levels(m);
    int ir = 0;
    int ii = 0;
    pam_slice(value.real(), m, levels, &ir);
    pam_slice(value.imag(), m, levels, &ii);
    return {levels[static_cast<std::size_t>(ir)], levels[static_cast<std::size_t>(ii)]};
}

HardDecision demodulate_hard(const SymbolGrid& soft, Modulation scheme) {
    const int bps = bits_per_symbol(scheme);
    HardDecision out;
    out.symbols.scheme = scheme;
    out.symbols.symbols.reserve(soft.symbols.size());
    out.bits.reserve(soft.symbols.size() * static_cast<std::size_t>(bps));

    if (scheme == Modulation::bpsk) {
        for (cxd v : soft.symbols) {
            const bool one = v.real() < 0.0;
            out.bits.push_back(one ? 1 : 0);
            out.symbols.symbols.emplace_back(one ? -1.0 : 1.0, 0.0);
        }
        return out;
    }

    const int m = side(scheme);
    const int axis_bits = bps / 2;
    const auto levels = pam_levels(m);
    for (cxd v : soft.symbols) {
        int ir = 0;
        int ii = 0;
        const unsigned gr = pam_slice(v.real(), m, levels, &ir);
        const unsigned gi = pam_slice(v.imag(), m, levels, &ii);
        for (int b = axis_bits - 1; b >= 0; --b) out.bits.push_back((gr >> b) & 1u);
        for (int b = axis_bits - 1; b >= 0; --b) out.bits.push_back((gi >> b) & 1u);
        out.symbols.symbols.emplace_back(levels[static_cast<std::size_t>(ir)],
                                         levels[static_cast<std::size_t>(ii)]);
    }
    return out;
}

SymbolGrid equalize(const SymbolGrid& y, const Ctf& ctf_estimate, double floor) {
    if (y.size() != ctf_estimate.size())
        throw std::invalid_argument("symbol grid and CTF length mismatch");

    SymbolGrid soft;
    soft.scheme = y.scheme;
    soft.symbols.resize(y.symbols.size());
    for (std::size_t k = 0; k < y.symbols.size(); ++k) {
        cxd h = ctf_estimate.coeffs[k];
        const double mag = std::abs(h);
        if (mag == 0.0) {
            soft.symbols[k] = cxd(0.0, 0.0);
            continue;
        }
        if (mag < floor) h *= floor / mag;
        soft.symbols[k] = y.symbols[k] / h;
    }
    return soft;
}

} // namespace crn::bb
