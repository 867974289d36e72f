#ifndef CRN_ESTIMATORS_HPP
#define CRN_ESTIMATORS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "crn/baseband.hpp"
#include "crn/counters.hpp"

namespace crn::est {

using bb::Cir;
using bb::Ctf;
using bb::SymbolGrid;
using crn::cxd;

/// Thrown when a linear system cannot be solved (singular or indefinite).
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EstimatorKind {
    ls,
    mmse_scalar,
    mmse_direct,
    cr_mmse,
    ml_cls,
    cr_ml,
    lmmse_ref,
};

const char* estimator_name(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_name(std::string_view name);

/// Pilot placement on the subcarrier grid. A regular comb with spacing 1 is
/// the all-carriers pattern.
struct PilotPattern {
    enum class Kind { all_carriers, regular_comb };

    Kind kind = Kind::all_carriers;
    int spacing = 1;
    int offset = 0;

    static PilotPattern all_carriers() { return {}; }
    static PilotPattern comb(int spacing, int offset = 0);

    int pilot_count(int K) const;
    std::vector<int> indices(int K) const;
};

struct EstimatorParams {
    double sigma_w_sq = 0.0;         // channel noise variance
    std::vector<double> tap_profile; // assumed per-tap variances sigma_l^2
    double sigma_h_sq = 0.0;         // CTF prior variance, == sum(tap_profile)
    double sigma_v_sq = 0.0;         // residual variance of the scalar-MMSE CTF
    int n_h = 0;                     // assumed CIR length for the ML family
    int lmmse_rank = 0;              // retained rank of the LMMSE reference
};

/// Residual noise variance of the scalar-MMSE CTF estimator under correct
/// decisions on a unit-modulus constellation.
double default_sigma_v_sq(double sigma_w_sq, double sigma_h_sq);

/// Populate derived fields; sigma_v_sq < 0 selects the default formula.
EstimatorParams make_params(double sigma_w_sq, std::vector<double> tap_profile, int n_h,
                            double sigma_v_sq = -1.0, int lmmse_rank = 0);

/// Per-subcarrier least squares: H[k] = y[k] / x_ref[k].
Ctf ls_ctf(const SymbolGrid& y, const SymbolGrid& x_ref, MultCounter& cost);

/// Per-subcarrier Wiener-shrunk estimate:
/// H[k] = conj(x[k]) y[k] / (|x[k]|^2 + sigma_w^2/sigma_H^2).
Ctf scalar_mmse_ctf(const SymbolGrid& y, const SymbolGrid& x_ref, const EstimatorParams& params,
                    MultCounter& cost);

/// Full MMSE SS-CIR estimate with an explicit K0 x K0 solve; the matrix
/// inversion baseline the reduced-complexity path is measured against.
Cir mmse_cir_direct(const SymbolGrid& y, const SymbolGrid& x_ref, const EstimatorParams& params,
                    MultCounter& cost);

/// Reduced-complexity MMSE SS-CIR: one output-pruned inverse transform of the
/// all-carrier scalar-MMSE CTF plus one scaling per tap. Never solves a
/// linear system.
Cir cr_mmse_cir(const Ctf& h_mmse_ctf, const EstimatorParams& params, int K, MultCounter& cost);

/// Constrained-least-squares CIR fit of LS CTF samples on the pilot set,
/// solved through N_h x N_h normal equations.
Cir ml_cir_cls(std::span<const cxd> h_ls_on_pilots, const PilotPattern& pattern, int n_h,
               MultCounter& cost);

/// Reduced-complexity ML: on a regular comb the normal-equation matrix is
/// N_u * I, so the fit collapses to an output-pruned inverse transform over
/// the comb teeth. Never solves a linear system.
Cir cr_ml_cir(std::span<const cxd> h_ls_on_pilots, const PilotPattern& pattern, int n_h,
              MultCounter& cost);

/// Full-band CTF from a short CIR (zero-padded pruned transform).
Ctf ctf_from_short_cir(const Cir& cir, int K, MultCounter& cost);

/// Fixed low-rank frequency-correlation smoother used as the floored
/// comparison curve. Rank and tap profile are design-time inputs, so a rank
/// below the true channel length leaves a residual floor.
class LmmseRef {
  public:
    LmmseRef(const std::vector<double>& design_profile, int K, int rank, double sigma_ls_sq);

    Ctf apply(const Ctf& h_ls, MultCounter& cost) const;

    int rank() const { return static_cast<int>(retained_.size()); }

  private:
    int K_;
    int span_; // taps 0..span_-1 carry the retained components
    std::vector<int> retained_;
    std::vector<double> gain_; // per retained tap: eigenvalue shrinkage / K
};

Ctf lmmse_reference_ctf(const Ctf& h_ls, const EstimatorParams& params, MultCounter& cost);

/// Structural counter incremented by every linear solve executed in this
/// module (thread local). The reduced-complexity paths must never move it.
std::uint64_t solve_count();

namespace detail {
/// In-place Hermitian positive definite solve (Cholesky), counting executed
/// complex products and bumping the structural solve counter.
void solve_hermitian(std::vector<cxd>& a, int n, std::vector<cxd>& b, MultCounter& cost);
} // namespace detail

} // namespace crn::est

#endif
