#ifndef CRN_SWEEP_HPP
#define CRN_SWEEP_HPP

#include <cstdint>
#include <vector>

#include "crn/counters.hpp"
#include "crn/ddce.hpp"
#include "crn/estimators.hpp"

namespace crn::sweep {

struct SweepConfig {
    std::vector<double> snr_db;
    std::vector<est::EstimatorKind> estimators{
        est::EstimatorKind::ls,          est::EstimatorKind::mmse_scalar,
        est::EstimatorKind::mmse_direct, est::EstimatorKind::cr_mmse,
        est::EstimatorKind::ml_cls,      est::EstimatorKind::cr_ml,
        est::EstimatorKind::lmmse_ref};
    int frames_per_point = 32;
    int n_data_symbols = 99;
    int K = 64;
    int taps = 4;
    bb::Modulation scheme = bb::Modulation::bpsk;
    int comb_spacing = 4; // data-symbol pilot comb for the ML family
    int lmmse_rank = 0;   // 0 = the parameter default
    std::uint64_t seed = 1;
    int workers = 0; // 0 = hardware concurrency
};

struct SweepPoint {
    double snr_db = 0.0;
    est::EstimatorKind kind = est::EstimatorKind::ls;
    std::int64_t symbol_errors = 0;
    std::int64_t symbols = 0;
    double ser = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mults_per_symbol = 0.0;
};

/// Decision-directed SER sweep. Frame seeds depend on (seed, SNR, frame)
/// only, so estimator rows at the same SNR see identical channels, payloads
/// and noise. Rows are ordered SNR-major, estimator-minor.
std::vector<SweepPoint> run_ser_sweep(const SweepConfig& config);

struct EquivConfig {
    int trials = 100;
    int K = 64;
    int taps = 4;
    int n_h = 4;
    double sigma_w_sq = 0.1;
    std::vector<int> comb_spacings{1, 2, 4, 8};
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
    /// test hook: perturb sigma_v^2 on the oracle side only, which must make
    /// the check fail
    bool inject_fault = false;
};

struct EquivReport {
    double max_cr_mmse_dev = 0.0;
    double max_cr_ml_dev = 0.0;
    double tolerance = 1e-9;
    bool pass = false;
};

/// Reduced-complexity vs dense-solver equivalence over seeded random
/// instances; deviations are inf-norm relative to the oracle inf-norm.
EquivReport run_equiv_check(const EquivConfig& config);

struct ComplexityRow {
    est::EstimatorKind kind = est::EstimatorKind::ls;
    MultCounter cost;
    std::uint64_t solves = 0;
};

/// Counter readings for one estimation call per estimator on a common
/// seeded instance.
std::vector<ComplexityRow> run_complexity_report(int K, int taps, int n_h, std::uint64_t seed);

} // namespace crn::sweep

#endif
