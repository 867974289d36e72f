#include "crn/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "crn/transform.hpp"

namespace crn::est {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

thread_local std::uint64_t g_solve_count = 0;

cxd unit_phase(double turns) { return std::polar(1.0, turns); }

void check_params(const EstimatorParams& params) {
    if (params.sigma_w_sq < 0.0) throw std::invalid_argument("negative noise variance");
    if (params.sigma_v_sq < 0.0) throw std::invalid_argument("negative sigma_v^2");
    if (params.tap_profile.empty()) throw std::invalid_argument("empty tap profile");
    const double sum =
        std::accumulate(params.tap_profile.begin(), params.tap_profile.end(), 0.0);
    if (std::abs(sum - params.sigma_h_sq) > 1e-12 * std::max(1.0, std::abs(sum)))
        throw std::invalid_argument("sigma_H^2 does not match the tap profile sum");
}

} // namespace

const char* estimator_name(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::ls: return "ls";
    case EstimatorKind::mmse_scalar: return "mmse-scalar";
    case EstimatorKind::mmse_direct: return "mmse-direct";
    case EstimatorKind::cr_mmse: return "cr-mmse";
    case EstimatorKind::ml_cls: return "ml";
    case EstimatorKind::cr_ml: return "cr-ml";
    case EstimatorKind::lmmse_ref: return "lmmse-ref";
    }
    return "unknown";
}

std::optional<EstimatorKind> estimator_from_name(std::string_view name) {
    for (EstimatorKind kind :
         {EstimatorKind::ls, EstimatorKind::mmse_scalar, EstimatorKind::mmse_direct,
          EstimatorKind::cr_mmse, EstimatorKind::ml_cls, EstimatorKind::cr_ml,
          EstimatorKind::lmmse_ref}) {
        if (name == estimator_name(kind)) return kind;
    }
    return std::nullopt;
}

PilotPattern PilotPattern::comb(int spacing, int offset) {
    if (spacing < 1) throw std::invalid_argument("comb spacing must be positive");
    if (offset < 0 || offset >= spacing) throw std::invalid_argument("comb offset out of range");
    PilotPattern p;
    p.kind = Kind::regular_comb;
    p.spacing = spacing;
    p.offset = offset;
    return p;
}

int PilotPattern::pilot_count(int K) const {
    if (kind == Kind::all_carriers) return K;
    if (K % spacing != 0) throw std::invalid_argument("comb spacing does not divide K");
    return K / spacing;
}

std::vector<int> PilotPattern::indices(int K) const {
    std::vector<int> out;
    if (kind == Kind::all_carriers) {
        out.resize(static_cast<std::size_t>(K));
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    if (K % spacing != 0) throw std::invalid_argument("comb spacing does not divide K");
    for (int k = offset; k < K; k += spacing) out.push_back(k);
    return out;
}

double default_sigma_v_sq(double sigma_w_sq, double sigma_h_sq) {
    if (sigma_h_sq <= 0.0) throw std::invalid_argument("sigma_H^2 must be positive");
    const double shrink = 1.0 + sigma_w_sq / sigma_h_sq;
    return sigma_w_sq / (shrink * shrink);
}

EstimatorParams make_params(double sigma_w_sq, std::vector<double> tap_profile, int n_h,
                            double sigma_v_sq, int lmmse_rank) {
    if (n_h < 1) throw std::invalid_argument("N_h must be positive");
    EstimatorParams params;
    params.sigma_w_sq = sigma_w_sq;
    params.tap_profile = std::move(tap_profile);
    params.sigma_h_sq =
        std::accumulate(params.tap_profile.begin(), params.tap_profile.end(), 0.0);
    params.sigma_v_sq = sigma_v_sq >= 0.0
                            ? sigma_v_sq
                            : default_sigma_v_sq(sigma_w_sq, params.sigma_h_sq);
    params.n_h = n_h;
    params.lmmse_rank = lmmse_rank > 0 ? lmmse_rank : 2 * n_h;
    return params;
}

Ctf ls_ctf(const SymbolGrid& y, const SymbolGrid& x_ref, MultCounter& cost) {
    if (y.size() != x_ref.size()) throw std::invalid_argument("grid length mismatch");
    Ctf out;
    out.coeffs.resize(y.symbols.size());
    for (std::size_t k = 0; k < y.symbols.size(); ++k) {
        const cxd x = x_ref.symbols[k];
        const double e = std::norm(x);
        if (e == 0.0) throw std::invalid_argument("zero reference symbol");
        out.coeffs[k] = y.symbols[k] * (std::conj(x) / e);
        ++cost.complex_mults;
    }
    return out;
}

Ctf scalar_mmse_ctf(const SymbolGrid& y, const SymbolGrid& x_ref, const EstimatorParams& params,
                    MultCounter& cost) {
    if (y.size() != x_ref.size()) throw std::invalid_argument("grid length mismatch");
    if (params.sigma_h_sq <= 0.0) throw std::invalid_argument("sigma_H^2 must be positive");
    const double ratio = params.sigma_w_sq / params.sigma_h_sq;

    Ctf out;
    out.coeffs.resize(y.symbols.size());
    for (std::size_t k = 0; k < y.symbols.size(); ++k) {
        const cxd x = x_ref.symbols[k];
        out.coeffs[k] = std::conj(x) * y.symbols[k] / (std::norm(x) + ratio);
        ++cost.complex_mults;
    }
    return out;
}

namespace detail {

void solve_hermitian(std::vector<cxd>& a, int n, std::vector<cxd>& b, MultCounter& cost) {
    ++g_solve_count;
    auto at = [&](int r, int c) -> cxd& { return a[static_cast<std::size_t>(c) * n + r]; };

    // in-place LL^H factorization (lower triangle)
    for (int j = 0; j < n; ++j) {
        double d = at(j, j).real();
        for (int k = 0; k < j; ++k) {
            d -= std::norm(at(j, k));
            ++cost.complex_mults;
        }
        if (!(d > 0.0) || !std::isfinite(d)) throw NumericalFailure("matrix not positive definite");
        const double ljj = std::sqrt(d);
        at(j, j) = cxd(ljj, 0.0);
        for (int i = j + 1; i < n; ++i) {
            cxd s = at(i, j);
            for (int k = 0; k < j; ++k) {
                s -= at(i, k) * std::conj(at(j, k));
                ++cost.complex_mults;
                ++cost.complex_adds;
            }
            at(i, j) = s / ljj;
        }
    }
    // forward then backward substitution
    for (int i = 0; i < n; ++i) {
        cxd s = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) {
            s -= at(i, k) * b[static_cast<std::size_t>(k)];
            ++cost.complex_mults;
            ++cost.complex_adds;
        }
        b[static_cast<std::size_t>(i)] = s / at(i, i).real();
    }
    for (int i = n - 1; i >= 0; --i) {
        cxd s = b[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) {
            s -= std::conj(at(k, i)) * b[static_cast<std::size_t>(k)];
            ++cost.complex_mults;
            ++cost.complex_adds;
        }
        b[static_cast<std::size_t>(i)] = s / at(i, i).real();
    }
}

} // namespace detail

Cir mmse_cir_direct(const SymbolGrid& y, const SymbolGrid& x_ref, const EstimatorParams& params,
                    MultCounter& cost) {
    check_params(params);
    if (y.size() != x_ref.size()) throw std::invalid_argument("grid length mismatch");
    const int K = y.size();
    const int k0 = static_cast<int>(params.tap_profile.size());
    if (K < k0) throw std::invalid_argument("fewer carriers than modeled taps");

    // taps with zero prior variance are exactly zero in the estimate
    std::vector<int> active;
    for (int l = 0; l < k0; ++l)
        if (params.tap_profile[static_cast<std::size_t>(l)] > 0.0) active.push_back(l);

    Cir cir;
    cir.profile = params.tap_profile;
    cir.taps.assign(static_cast<std::size_t>(k0), cxd(0.0, 0.0));
    if (active.empty()) {
        if (params.sigma_w_sq == 0.0)
            throw NumericalFailure("all tap variances and the noise variance are zero");
        return cir;
    }

    const int na = static_cast<int>(active.size());

    // z[k] = conj(x[k]) * y[k]
    std::vector<cxd> z(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        z[static_cast<std::size_t>(k)] =
            std::conj(x_ref.symbols[static_cast<std::size_t>(k)]) *
            y.symbols[static_cast<std::size_t>(k)];
        ++cost.complex_mults;
    }

    // rhs[a] = sum_k conj(W^{k l_a}) z[k]
    std::vector<cxd> rhs(static_cast<std::size_t>(na), cxd(0.0, 0.0));
    for (int a = 0; a < na; ++a) {
        const int l = active[static_cast<std::size_t>(a)];
        cxd acc(0.0, 0.0);
        for (int k = 0; k < K; ++k) {
            const long e = static_cast<long>(k) * l % K;
            if (e == 0) {
                acc += z[static_cast<std::size_t>(k)];
            } else {
                acc += unit_phase(kTwoPi * static_cast<double>(e) / K) *
                       z[static_cast<std::size_t>(k)];
                ++cost.complex_mults;
            }
            ++cost.complex_adds;
        }
        rhs[static_cast<std::size_t>(a)] = acc;
    }

    // A = sigma_w^2 diag(1/sigma_l^2) + W^H diag(|x|^2) W on the active taps
    std::vector<double> energy(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        energy[static_cast<std::size_t>(k)] = std::norm(x_ref.symbols[static_cast<std::size_t>(k)]);

    std::vector<cxd> mat(static_cast<std::size_t>(na) * na, cxd(0.0, 0.0));
    for (int a = 0; a < na; ++a) {
        for (int b = a; b < na; ++b) {
            const int dl = active[static_cast<std::size_t>(b)] - active[static_cast<std::size_t>(a)];
            cxd acc(0.0, 0.0);
            for (int k = 0; k < K; ++k) {
                const long e = static_cast<long>(k) * dl % K;
                if (e == 0) {
                    acc += energy[static_cast<std::size_t>(k)];
                } else {
                    acc += energy[static_cast<std::size_t>(k)] *
                           unit_phase(-kTwoPi * static_cast<double>(e) / K);
                    ++cost.complex_mults;
                }
                ++cost.complex_adds;
            }
            mat[static_cast<std::size_t>(b) * na + a] = acc;
            mat[static_cast<std::size_t>(a) * na + b] = std::conj(acc);
        }
        mat[static_cast<std::size_t>(a) * na + a] +=
            params.sigma_w_sq / params.tap_profile[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])];
    }

    detail::solve_hermitian(mat, na, rhs, cost);
    for (int a = 0; a < na; ++a)
        cir.taps[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])] =
            rhs[static_cast<std::size_t>(a)];
    return cir;
}

Cir cr_mmse_cir(const Ctf& h_mmse_ctf, const EstimatorParams& params, int K, MultCounter& cost) {
    check_params(params);
    if (h_mmse_ctf.size() != K)
        throw std::invalid_argument("CR-MMSE requires the scalar-MMSE CTF on all K carriers");
    const int k0 = static_cast<int>(params.tap_profile.size());
    if (K < k0) throw std::invalid_argument("fewer carriers than modeled taps");

    auto z = dft::leading_bins(h_mmse_ctf.coeffs, k0, dft::Direction::inverse, cost);

    Cir cir;
    cir.profile = params.tap_profile;
    cir.taps.assign(static_cast<std::size_t>(k0), cxd(0.0, 0.0));
    for (int l = 0; l < k0; ++l) {
        const double sl = params.tap_profile[static_cast<std::size_t>(l)];
        if (sl == 0.0) continue; // zero prior variance kills the tap
        const double scale = sl / (params.sigma_v_sq + K * sl);
        cir.taps[static_cast<std::size_t>(l)] = scale * z[static_cast<std::size_t>(l)];
        ++cost.complex_mults;
    }
    return cir;
}

Cir ml_cir_cls(std::span<const cxd> h_ls_on_pilots, const PilotPattern& pattern, int n_h,
               MultCounter& cost) {
    const int nu = static_cast<int>(h_ls_on_pilots.size());
    if (n_h < 1) throw std::invalid_argument("N_h must be positive");
    if (nu < n_h) throw std::invalid_argument("fewer pilots than unknown taps");

    const int K = pattern.kind == PilotPattern::Kind::all_carriers ? nu : nu * pattern.spacing;
    const auto pilots = pattern.indices(K);
    if (static_cast<int>(pilots.size()) != nu)
        throw std::invalid_argument("pilot vector does not match the pattern");

    // normal equations: G h = rhs with G[a,b] = sum_j W^{k_j (b-a)} twiddle sums
    std::vector<cxd> g(static_cast<std::size_t>(n_h) * n_h, cxd(0.0, 0.0));
    for (int a = 0; a < n_h; ++a) {
        for (int b = a; b < n_h; ++b) {
            cxd acc(0.0, 0.0);
            for (int k : pilots) {
                const long e = static_cast<long>(k) * (b - a) % K;
                acc += unit_phase(-kTwoPi * static_cast<double>(e) / K);
                ++cost.complex_adds;
            }
            g[static_cast<std::size_t>(b) * n_h + a] = acc;
            g[static_cast<std::size_t>(a) * n_h + b] = std::conj(acc);
        }
    }

    std::vector<cxd> rhs(static_cast<std::size_t>(n_h), cxd(0.0, 0.0));
    for (int a = 0; a < n_h; ++a) {
        cxd acc(0.0, 0.0);
        for (int j = 0; j < nu; ++j) {
            const long e = static_cast<long>(pilots[static_cast<std::size_t>(j)]) * a % K;
            if (e == 0) {
                acc += h_ls_on_pilots[static_cast<std::size_t>(j)];
            } else {
                acc += unit_phase(kTwoPi * static_cast<double>(e) / K) *
                       h_ls_on_pilots[static_cast<std::size_t>(j)];
                ++cost.complex_mults;
            }
            ++cost.complex_adds;
        }
        rhs[static_cast<std::size_t>(a)] = acc;
    }

    detail::solve_hermitian(g, n_h, rhs, cost);

    Cir cir;
    cir.taps = std::move(rhs);
    cir.profile.assign(static_cast<std::size_t>(n_h), 1.0);
    return cir;
}

Cir cr_ml_cir(std::span<const cxd> h_ls_on_pilots, const PilotPattern& pattern, int n_h,
              MultCounter& cost) {
    const int nu = static_cast<int>(h_ls_on_pilots.size());
    if (n_h < 1) throw std::invalid_argument("N_h must be positive");
    if (nu < n_h) throw std::invalid_argument("fewer pilots than unknown taps");

    int spacing = 1;
    int offset = 0;
    if (pattern.kind == PilotPattern::Kind::regular_comb) {
        spacing = pattern.spacing;
        offset = pattern.offset;
    }
    const int K = nu * spacing;
    if (offset < 0 || offset >= spacing)
        throw std::invalid_argument("comb offset out of range");

    // On the comb k_j = offset + j*spacing the weighting matrix is N_u * I, so
    // the fit is an N_u-point inverse transform pruned to the first N_h bins,
    // de-rotated by the comb offset.
    auto z = dft::leading_bins(h_ls_on_pilots, n_h, dft::Direction::inverse, cost);

    Cir cir;
    cir.taps.resize(static_cast<std::size_t>(n_h));
    cir.profile.assign(static_cast<std::size_t>(n_h), 1.0);
    for (int l = 0; l < n_h; ++l) {
        cxd factor(1.0 / nu, 0.0);
        if (offset != 0) {
            const long e = static_cast<long>(offset) * l % K;
            factor *= unit_phase(kTwoPi * static_cast<double>(e) / K);
        }
        cir.taps[static_cast<std::size_t>(l)] = factor * z[static_cast<std::size_t>(l)];
        ++cost.complex_mults;
    }
    return cir;
}

Ctf ctf_from_short_cir(const Cir& cir, int K, MultCounter& cost) {
    if (cir.length() < 1) throw std::invalid_argument("empty CIR");
    if (K < cir.length()) throw std::invalid_argument("fewer carriers than taps");
    Ctf ctf;
    ctf.coeffs = dft::from_leading_taps(cir.taps, K, dft::Direction::forward, cost);
    return ctf;
}

LmmseRef::LmmseRef(const std::vector<double>& design_profile, int K, int rank,
                   double sigma_ls_sq) {
    if (design_profile.empty()) throw std::invalid_argument("empty design profile");
    if (K < static_cast<int>(design_profile.size()))
        throw std::invalid_argument("fewer carriers than design taps");
    if (rank < 1) throw std::invalid_argument("rank must be positive");
    if (sigma_ls_sq < 0.0) throw std::invalid_argument("negative noise variance");

    K_ = K;

    // eigenvectors of the design-time frequency correlation are the transform
    // columns; eigenvalue of tap l is K * sigma_l^2
    std::vector<int> order(design_profile.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return design_profile[static_cast<std::size_t>(a)] >
               design_profile[static_cast<std::size_t>(b)];
    });

    const int keep = std::min<int>(rank, static_cast<int>(design_profile.size()));
    span_ = 0;
    for (int i = 0; i < keep; ++i) {
        const int l = order[static_cast<std::size_t>(i)];
        const double lambda = K * design_profile[static_cast<std::size_t>(l)];
        if (lambda <= 0.0) continue;
        retained_.push_back(l);
        const double shrink = sigma_ls_sq > 0.0 ? lambda / (lambda + sigma_ls_sq) : 1.0;
        gain_.push_back(shrink / K);
        span_ = std::max(span_, l + 1);
    }
    if (retained_.empty()) throw std::invalid_argument("design profile has no positive taps");
}

Ctf LmmseRef::apply(const Ctf& h_ls, MultCounter& cost) const {
    if (h_ls.size() != K_) throw std::invalid_argument("CTF length mismatch");

    auto z = dft::leading_bins(h_ls.coeffs, span_, dft::Direction::inverse, cost);
    std::vector<cxd> taps(static_cast<std::size_t>(span_), cxd(0.0, 0.0));
    for (std::size_t i = 0; i < retained_.size(); ++i) {
        const int l = retained_[i];
        taps[static_cast<std::size_t>(l)] = gain_[i] * z[static_cast<std::size_t>(l)];
        ++cost.complex_mults;
    }
    Ctf out;
    out.coeffs = dft::from_leading_taps(taps, K_, dft::Direction::forward, cost);
    return out;
}

Ctf lmmse_reference_ctf(const Ctf& h_ls, const EstimatorParams& params, MultCounter& cost) {
    const int rank = params.lmmse_rank > 0 ? params.lmmse_rank : 2 * std::max(params.n_h, 1);
    LmmseRef ref(params.tap_profile, h_ls.size(), rank, params.sigma_w_sq);
    return ref.apply(h_ls, cost);
}

std::uint64_t solve_count() { return g_solve_count; }

} // namespace crn::est
