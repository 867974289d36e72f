#ifndef CRN_DDCE_HPP
#define CRN_DDCE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "crn/baseband.hpp"
#include "crn/counters.hpp"
#include "crn/estimators.hpp"

namespace crn::ddce {

using bb::Cir;
using bb::Ctf;
using bb::Modulation;
using bb::SymbolGrid;
using est::EstimatorKind;
using est::PilotPattern;

/// Per-tap linear predictor over the last P a-posteriori estimates,
/// newest first. Coefficients always sum to 1 (renormalized over the
/// available history while it is still filling).
struct PredictorConfig {
    std::vector<double> coeffs{1.0, 0.0, 0.0, 0.0};

    static PredictorConfig hold(int depth = 4);
    static PredictorConfig ewma(double lambda, int depth = 4);
};

struct DdceConfig {
    int K = 64;
    Modulation scheme = Modulation::bpsk;
    EstimatorKind kind = EstimatorKind::cr_mmse;
    est::EstimatorParams params;
    /// pilot comb kept on data symbols (ML family); empty = no data pilots
    std::optional<PilotPattern> data_comb;
    PredictorConfig predictor;
    double eq_floor = 1e-9;
    std::uint64_t pilot_seed = 0x70696c6f74ull;
};

/// Deterministic pilot value for (symbol, carrier), known at both ends.
cxd pilot_value(std::uint64_t pilot_seed, int symbol, int carrier, Modulation scheme);

/// One estimator pass: equalizer-ready estimate in its natural domain.
struct Estimate {
    std::vector<cxd> rep; // CIR taps (time_domain) or CTF coefficients
    bool time_domain = false;
};

Estimate run_estimator(EstimatorKind kind, const SymbolGrid& y, const SymbolGrid& x_ref,
                       const est::EstimatorParams& params, int K, MultCounter& cost);

struct StepResult {
    std::vector<std::uint8_t> decisions; // data-carrier bits, carrier order
    SymbolGrid x_hat;                    // decisions with pilots overwritten
};

/// A-posteriori estimator + a-priori predictor loop state for one link.
class DdceState {
  public:
    DdceState() = default;

    bool bootstrapped() const { return bootstrapped_; }
    int symbol_index() const { return symbol_index_; }

    /// Predicted estimate for the next symbol, as a CTF (what detection uses).
    Ctf apriori_ctf(MultCounter& cost) const;

    /// Predicted estimate as a CIR (time-domain kinds return it directly;
    /// CTF kinds return the full-length inverse transform).
    Cir apriori_cir() const;

    /// Run one data symbol through detect -> re-estimate -> predict. If
    /// genie_x is set, the estimator is fed the true symbols instead of the
    /// decisions (the emitted decisions still come from detection).
    StepResult step(const SymbolGrid& y_n, MultCounter& cost,
                    const SymbolGrid* genie_x = nullptr);

    friend DdceState bootstrap(const DdceConfig& config, const SymbolGrid& x_train,
                               const SymbolGrid& y_train, MultCounter& cost);

  private:
    void push_estimate(Estimate est);
    void predict();

    DdceConfig config_;
    bool bootstrapped_ = false;
    int symbol_index_ = 0; // next symbol to process
    bool time_domain_ = false;
    std::deque<std::vector<cxd>> history_; // newest first
    std::vector<cxd> apriori_;
};

/// Initialize the loop from one all-pilot training symbol.
DdceState bootstrap(const DdceConfig& config, const SymbolGrid& x_train,
                    const SymbolGrid& y_train, MultCounter& cost);

enum class FeedbackMode {
    decision,       // detected symbols feed the estimator
    genie_feedback, // true symbols feed the estimator
    genie_csi,      // perfect CSI detection, no estimation loop
};

struct TrialConfig {
    DdceConfig ddce;
    int n_data_symbols = 99;
    FeedbackMode feedback = FeedbackMode::decision;
    /// true channel profile; empty = the assumed params.tap_profile
    std::vector<double> channel_profile;
    bool collect_mse = false;
};

struct TrialResult {
    std::int64_t bit_errors = 0;
    std::int64_t symbol_errors = 0;
    std::int64_t symbols_counted = 0;
    MultCounter cost; // estimation-path arithmetic, summed over the frame
    std::vector<double> apriori_mse; // per data symbol, when collect_mse
};

/// Simulate one block-fading frame end to end. Errors are counted on data
/// carriers only, excluding the bootstrap symbol. Deterministic per seed.
TrialResult run_ser_trial(const TrialConfig& config, std::uint64_t seed);

} // namespace crn::ddce

#endif
