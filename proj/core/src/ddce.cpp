#include "crn/ddce.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crn/hash.hpp"
#include "crn/transform.hpp"

namespace crn::ddce {
namespace {

std::vector<double> normalized(std::vector<double> coeffs) {
    double sum = 0.0;
    for (double c : coeffs) sum += c;
    if (sum == 0.0) throw std::invalid_argument("predictor coefficients sum to zero");
    for (double& c : coeffs) c /= sum;
    return coeffs;
}

bool is_pilot_carrier(const std::optional<PilotPattern>& comb, int carrier) {
    if (!comb) return false;
    if (comb->kind == PilotPattern::Kind::all_carriers) return true;
    return carrier % comb->spacing == comb->offset;
}

} // namespace

PredictorConfig PredictorConfig::hold(int depth) {
    if (depth < 1) throw std::invalid_argument("predictor depth must be positive");
    PredictorConfig p;
    p.coeffs.assign(static_cast<std::size_t>(depth), 0.0);
    p.coeffs[0] = 1.0;
    return p;
}

PredictorConfig PredictorConfig::ewma(double lambda, int depth) {
    if (depth < 1) throw std::invalid_argument("predictor depth must be positive");
    if (lambda <= 0.0 || lambda > 1.0) throw std::invalid_argument("lambda out of (0,1]");
    PredictorConfig p;
    p.coeffs.resize(static_cast<std::size_t>(depth));
    for (int i = 0; i < depth; ++i)
        p.coeffs[static_cast<std::size_t>(i)] = lambda * std::pow(1.0 - lambda, i);
    p.coeffs = normalized(std::move(p.coeffs));
    return p;
}

cxd pilot_value(std::uint64_t pilot_seed, int symbol, int carrier, Modulation scheme) {
    std::uint64_t s = pilot_seed ^ derive_seed(0x9d1lu + static_cast<std::uint64_t>(symbol),
                                               static_cast<std::uint64_t>(carrier));
    const std::uint64_t r = splitmix64(s);
    const int bps = bb::bits_per_symbol(scheme);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(bps));
    for (int b = 0; b < bps; ++b) bits[static_cast<std::size_t>(b)] = (r >> b) & 1u;
    return bb::modulate(bits, scheme).symbols[0];
}

Estimate run_estimator(EstimatorKind kind, const SymbolGrid& y, const SymbolGrid& x_ref,
                       const est::EstimatorParams& params, int K, MultCounter& cost) {
    switch (kind) {
    case EstimatorKind::ls:
        return {est::ls_ctf(y, x_ref, cost).coeffs, false};
    case EstimatorKind::mmse_scalar:
        return {est::scalar_mmse_ctf(y, x_ref, params, cost).coeffs, false};
    case EstimatorKind::mmse_direct:
        return {est::mmse_cir_direct(y, x_ref, params, cost).taps, true};
    case EstimatorKind::cr_mmse: {
        const Ctf shrunk = est::scalar_mmse_ctf(y, x_ref, params, cost);
        return {est::cr_mmse_cir(shrunk, params, K, cost).taps, true};
    }
    case EstimatorKind::ml_cls: {
        const Ctf ls = est::ls_ctf(y, x_ref, cost);
        return {est::ml_cir_cls(ls.coeffs, PilotPattern::all_carriers(), params.n_h, cost).taps,
                true};
    }
    case EstimatorKind::cr_ml: {
        const Ctf ls = est::ls_ctf(y, x_ref, cost);
        return {est::cr_ml_cir(ls.coeffs, PilotPattern::comb(1), params.n_h, cost).taps, true};
    }
    case EstimatorKind::lmmse_ref: {
        const Ctf ls = est::ls_ctf(y, x_ref, cost);
        return {est::lmmse_reference_ctf(ls, params, cost).coeffs, false};
    }
    }
    throw std::invalid_argument("unknown estimator kind");
}

Ctf DdceState::apriori_ctf(MultCounter& cost) const {
    if (!bootstrapped_) throw std::logic_error("DDCE state not bootstrapped");
    if (!time_domain_) return Ctf{apriori_};
    Ctf ctf;
    ctf.coeffs = dft::from_leading_taps(apriori_, config_.K, dft::Direction::forward, cost);
    return ctf;
}

Cir DdceState::apriori_cir() const {
    if (!bootstrapped_) throw std::logic_error("DDCE state not bootstrapped");
    Cir cir;
    if (time_domain_) {
        cir.taps = apriori_;
        cir.profile.assign(apriori_.size(), 1.0);
        return cir;
    }
    MultCounter scratch;
    auto taps = dft::leading_bins(apriori_, config_.K, dft::Direction::inverse, scratch);
    for (cxd& t : taps) t /= static_cast<double>(config_.K);
    cir.taps = std::move(taps);
    cir.profile.assign(cir.taps.size(), 1.0);
    return cir;
}

void DdceState::push_estimate(Estimate est) {
    history_.push_front(std::move(est.rep));
    const std::size_t depth = config_.predictor.coeffs.size();
    while (history_.size() > depth) history_.pop_back();
}

void DdceState::predict() {
    const auto& coeffs = config_.predictor.coeffs;
    const std::size_t used = std::min(history_.size(), coeffs.size());
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < used; ++i) weight_sum += coeffs[i];
    if (weight_sum == 0.0) weight_sum = 1.0;

    apriori_.assign(history_.front().size(), cxd(0.0, 0.0));
    for (std::size_t i = 0; i < used; ++i) {
        const double w = coeffs[i] / weight_sum;
        if (w == 0.0) continue;
        const auto& h = history_[i];
        for (std::size_t t = 0; t < apriori_.size(); ++t) apriori_[t] += w * h[t];
    }
}

DdceState bootstrap(const DdceConfig& config, const SymbolGrid& x_train,
                    const SymbolGrid& y_train, MultCounter& cost) {
    if (x_train.size() != config.K || y_train.size() != config.K)
        throw std::invalid_argument("training symbol length mismatch");

    DdceState state;
    state.config_ = config;
    state.config_.predictor.coeffs = normalized(state.config_.predictor.coeffs);

    Estimate est = run_estimator(config.kind, y_train, x_train, config.params, config.K, cost);
    state.time_domain_ = est.time_domain;
    state.push_estimate(std::move(est));
    state.predict();
    state.bootstrapped_ = true;
    state.symbol_index_ = 1;
    return state;
}

StepResult DdceState::step(const SymbolGrid& y_n, MultCounter& cost, const SymbolGrid* genie_x) {
    if (!bootstrapped_) throw std::logic_error("DDCE state not bootstrapped");
    if (y_n.size() != config_.K) throw std::invalid_argument("received symbol length mismatch");

    const Ctf apriori = apriori_ctf(cost);
    const SymbolGrid soft = bb::equalize(y_n, apriori, config_.eq_floor);
    const bb::HardDecision hard = bb::demodulate_hard(soft, config_.scheme);

    const int bps = bb::bits_per_symbol(config_.scheme);
    StepResult result;
    result.x_hat = hard.symbols;
    result.x_hat.scheme = config_.scheme;
    for (int k = 0; k < config_.K; ++k) {
        if (is_pilot_carrier(config_.data_comb, k)) {
            result.x_hat.symbols[static_cast<std::size_t>(k)] =
                pilot_value(config_.pilot_seed, symbol_index_, k, config_.scheme);
        } else {
            for (int b = 0; b < bps; ++b)
                result.decisions.push_back(hard.bits[static_cast<std::size_t>(k * bps + b)]);
        }
    }

    const SymbolGrid& feedback = genie_x ? *genie_x : result.x_hat;
    Estimate est = run_estimator(config_.kind, y_n, feedback, config_.params, config_.K, cost);
    push_estimate(std::move(est));
    predict();
    ++symbol_index_;
    return result;
}

TrialResult run_ser_trial(const TrialConfig& config, std::uint64_t seed) {
    const DdceConfig& d = config.ddce;
    const int K = d.K;
    const int bps = bb::bits_per_symbol(d.scheme);
    const std::vector<double>& channel_profile =
        config.channel_profile.empty() ? d.params.tap_profile : config.channel_profile;

    bb::Rng rng(seed);
    MultCounter cost;

    const Cir cir = bb::generate_cir(channel_profile, rng);
    MultCounter channel_cost;
    const Ctf ctf_true = bb::cir_to_ctf(cir, K, channel_cost);
    const bb::NoiseParams noise{d.params.sigma_w_sq};

    // all-pilot bootstrap symbol
    SymbolGrid x_train;
    x_train.scheme = d.scheme;
    x_train.symbols.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        x_train.symbols[static_cast<std::size_t>(k)] = pilot_value(d.pilot_seed, 0, k, d.scheme);
    const SymbolGrid y_train = bb::apply_channel(x_train, ctf_true, noise, rng);

    DdceState state;
    if (config.feedback != FeedbackMode::genie_csi) state = bootstrap(d, x_train, y_train, cost);

    TrialResult result;
    std::uniform_int_distribution<int> bit(0, 1);

    for (int n = 1; n <= config.n_data_symbols; ++n) {
        // draw a full K-carrier payload regardless of the comb so paired
        // seeds stay aligned across estimator kinds
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(K) * bps);
        for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));

        SymbolGrid x = bb::modulate(bits, d.scheme);
        for (int k = 0; k < K; ++k)
            if (is_pilot_carrier(d.data_comb, k))
                x.symbols[static_cast<std::size_t>(k)] = pilot_value(d.pilot_seed, n, k, d.scheme);

        const SymbolGrid y = bb::apply_channel(x, ctf_true, noise, rng);

        std::vector<std::uint8_t> decisions;
        if (config.feedback == FeedbackMode::genie_csi) {
            const SymbolGrid soft = bb::equalize(y, ctf_true, d.eq_floor);
            const bb::HardDecision hard = bb::demodulate_hard(soft, d.scheme);
            for (int k = 0; k < K; ++k) {
                if (is_pilot_carrier(d.data_comb, k)) continue;
                for (int b = 0; b < bps; ++b)
                    decisions.push_back(hard.bits[static_cast<std::size_t>(k * bps + b)]);
            }
        } else {
            const SymbolGrid* genie =
                config.feedback == FeedbackMode::genie_feedback ? &x : nullptr;
            StepResult sr = state.step(y, cost, genie);
            decisions = std::move(sr.decisions);

            if (config.collect_mse) {
                const Cir apriori = state.apriori_cir();
                double mse = 0.0;
                const std::size_t span = std::min(apriori.taps.size(), cir.taps.size());
                for (std::size_t t = 0; t < span; ++t)
                    mse += std::norm(apriori.taps[t] - cir.taps[t]);
                for (std::size_t t = span; t < cir.taps.size(); ++t)
                    mse += std::norm(cir.taps[t]);
                for (std::size_t t = span; t < apriori.taps.size(); ++t)
                    mse += std::norm(apriori.taps[t]);
                result.apriori_mse.push_back(mse / static_cast<double>(cir.taps.size()));
            }
        }

        // score decisions against the transmitted payload, data carriers only
        std::size_t di = 0;
        for (int k = 0; k < K; ++k) {
            if (is_pilot_carrier(d.data_comb, k)) continue;
            bool symbol_error = false;
            for (int b = 0; b < bps; ++b) {
                if (decisions[di + static_cast<std::size_t>(b)] !=
                    bits[static_cast<std::size_t>(k * bps + b)]) {
                    ++result.bit_errors;
                    symbol_error = true;
                }
            }
            if (symbol_error) ++result.symbol_errors;
            ++result.symbols_counted;
            di += static_cast<std::size_t>(bps);
        }
    }

    result.cost = cost;
    return result;
}

} // namespace crn::ddce
