#include "crn/sweep.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "crn/hash.hpp"
#include "crn/stats.hpp"
#include "crn/transform.hpp"

namespace crn::sweep {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool ml_family(est::EstimatorKind kind) {
    return kind == est::EstimatorKind::ml_cls || kind == est::EstimatorKind::cr_ml;
}

ddce::TrialConfig trial_for(const SweepConfig& config, double snr_db, est::EstimatorKind kind) {
    ddce::TrialConfig trial;
    trial.ddce.K = config.K;
    trial.ddce.scheme = config.scheme;
    trial.ddce.kind = kind;
    const double sigma_w_sq = std::pow(10.0, -snr_db / 10.0);
    trial.ddce.params = est::make_params(sigma_w_sq, bb::exponential_profile(config.taps),
                                         config.taps, -1.0, config.lmmse_rank);
    if (ml_family(kind) && config.comb_spacing > 1)
        trial.ddce.data_comb = est::PilotPattern::comb(config.comb_spacing);
    trial.n_data_symbols = config.n_data_symbols;
    return trial;
}

} // namespace

std::vector<SweepPoint> run_ser_sweep(const SweepConfig& config) {
    if (config.snr_db.empty()) throw std::invalid_argument("empty SNR grid");
    for (std::size_t i = 1; i < config.snr_db.size(); ++i)
        if (config.snr_db[i] <= config.snr_db[i - 1])
            throw std::invalid_argument("SNR grid must be strictly increasing");
    if (config.estimators.empty()) throw std::invalid_argument("no estimators selected");
    if (config.frames_per_point < 1) throw std::invalid_argument("need at least one frame");

    struct Task {
        std::size_t snr_index;
        std::size_t est_index;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < config.snr_db.size(); ++s)
        for (std::size_t e = 0; e < config.estimators.size(); ++e) tasks.push_back({s, e});

    std::vector<SweepPoint> points(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            const double snr = config.snr_db[task.snr_index];
            const est::EstimatorKind kind = config.estimators[task.est_index];
            const ddce::TrialConfig trial = trial_for(config, snr, kind);

            SweepPoint point;
            point.snr_db = snr;
            point.kind = kind;
            MultCounter cost;
            for (int f = 0; f < config.frames_per_point; ++f) {
                // frame seed is estimator-independent: estimator rows at one
                // SNR are paired
                const std::uint64_t seed =
                    derive_seed(config.seed, task.snr_index * 1000003ull +
                                                 static_cast<std::uint64_t>(f));
                const ddce::TrialResult r = ddce::run_ser_trial(trial, seed);
                point.symbol_errors += r.symbol_errors;
                point.symbols += r.symbols_counted;
                cost += r.cost;
            }
            point.ser = point.symbols > 0
                            ? static_cast<double>(point.symbol_errors) /
                                  static_cast<double>(point.symbols)
                            : 0.0;
            const auto ci = stats::wilson(point.symbol_errors, point.symbols);
            point.ci_low = ci.low;
            point.ci_high = ci.high;
            const double n_symbols = static_cast<double>(config.frames_per_point) *
                                     (config.n_data_symbols + 1);
            point.mults_per_symbol = static_cast<double>(cost.complex_mults) / n_symbols;
            points[i] = point;
        }
    };

    int n_workers = config.workers > 0 ? config.workers
                                       : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    return points;
}

namespace {

double inf_norm(std::span<const cxd> v) {
    double m = 0.0;
    for (cxd x : v) m = std::max(m, std::abs(x));
    return m;
}

double relative_deviation(std::span<const cxd> value, std::span<const cxd> oracle) {
    const double scale = inf_norm(oracle);
    if (scale == 0.0) return inf_norm(value);
    double dev = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i)
        dev = std::max(dev, std::abs(value[i] - oracle[i]));
    return dev / scale;
}

/// Dense solve of the surrogate model: (C_h^{-1} + W^H W / sigma_v^2) h =
/// W^H H_mmse / sigma_v^2, assembled numerically tap by tap.
std::vector<cxd> dense_cir_oracle(const bb::Ctf& h_mmse, const est::EstimatorParams& params,
                                  double sigma_v_sq) {
    const int K = h_mmse.size();
    const int k0 = static_cast<int>(params.tap_profile.size());

    std::vector<int> active;
    for (int l = 0; l < k0; ++l)
        if (params.tap_profile[static_cast<std::size_t>(l)] > 0.0) active.push_back(l);
    std::vector<cxd> taps(static_cast<std::size_t>(k0), cxd(0.0, 0.0));
    if (active.empty()) return taps;
    const int na = static_cast<int>(active.size());

    MultCounter scratch;
    std::vector<cxd> mat(static_cast<std::size_t>(na) * na, cxd(0.0, 0.0));
    std::vector<cxd> rhs(static_cast<std::size_t>(na), cxd(0.0, 0.0));
    for (int a = 0; a < na; ++a) {
        const int la = active[static_cast<std::size_t>(a)];
        for (int b = 0; b < na; ++b) {
            const int lb = active[static_cast<std::size_t>(b)];
            cxd acc(0.0, 0.0);
            for (int k = 0; k < K; ++k)
                acc += std::polar(1.0, -kTwoPi * static_cast<double>(k) * (lb - la) / K);
            mat[static_cast<std::size_t>(b) * na + a] = acc / sigma_v_sq;
        }
        mat[static_cast<std::size_t>(a) * na + a] +=
            1.0 / params.tap_profile[static_cast<std::size_t>(la)];

        cxd acc(0.0, 0.0);
        for (int k = 0; k < K; ++k)
            acc += std::polar(1.0, kTwoPi * static_cast<double>(k) * la / K) *
                   h_mmse.coeffs[static_cast<std::size_t>(k)];
        rhs[static_cast<std::size_t>(a)] = acc / sigma_v_sq;
    }
    est::detail::solve_hermitian(mat, na, rhs, scratch);
    for (int a = 0; a < na; ++a)
        taps[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])] =
            rhs[static_cast<std::size_t>(a)];
    return taps;
}

} // namespace

EquivReport run_equiv_check(const EquivConfig& config) {
    EquivReport report;
    report.tolerance = config.tolerance;

    const auto profile = bb::exponential_profile(config.taps);

    // CR-MMSE against the dense surrogate-model solve
    for (int t = 0; t < config.trials; ++t) {
        bb::Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
        const bb::Cir cir = bb::generate_cir(profile, rng);
        MultCounter cost;
        const bb::Ctf ctf = bb::cir_to_ctf(cir, config.K, cost);

        std::vector<std::uint8_t> bits(static_cast<std::size_t>(config.K));
        std::uniform_int_distribution<int> bit(0, 1);
        for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
        const bb::SymbolGrid x = bb::modulate(bits, bb::Modulation::bpsk);
        const bb::SymbolGrid y = bb::apply_channel(x, ctf, {config.sigma_w_sq}, rng);

        const auto params = est::make_params(config.sigma_w_sq, profile, config.taps);
        const bb::Ctf shrunk = est::scalar_mmse_ctf(y, x, params, cost);
        const bb::Cir reduced = est::cr_mmse_cir(shrunk, params, config.K, cost);

        const double oracle_sigma_v =
            config.inject_fault ? params.sigma_v_sq * 1.01 : params.sigma_v_sq;
        const auto oracle = dense_cir_oracle(shrunk, params, oracle_sigma_v);
        report.max_cr_mmse_dev =
            std::max(report.max_cr_mmse_dev, relative_deviation(reduced.taps, oracle));
    }

    // CR-ML against the normal-equation solve on every comb spacing
    for (int spacing : config.comb_spacings) {
        if (config.K % spacing != 0) throw std::invalid_argument("spacing must divide K");
        const int nu = config.K / spacing;
        for (int t = 0; t < config.trials; ++t) {
            bb::Rng rng(derive_seed(config.seed, 0x100000 + static_cast<std::uint64_t>(spacing) * 10000 +
                                                     static_cast<std::uint64_t>(t)));
            std::normal_distribution<double> unit(0.0, 1.0);
            std::vector<cxd> h_ls(static_cast<std::size_t>(nu));
            for (auto& v : h_ls) v = cxd(unit(rng), unit(rng));

            const auto pattern =
                spacing == 1 ? est::PilotPattern::comb(1) : est::PilotPattern::comb(spacing);
            MultCounter cost;
            const bb::Cir fast = est::cr_ml_cir(h_ls, pattern, config.n_h, cost);
            const bb::Cir cls = est::ml_cir_cls(h_ls, pattern, config.n_h, cost);
            report.max_cr_ml_dev =
                std::max(report.max_cr_ml_dev, relative_deviation(fast.taps, cls.taps));
        }
    }

    report.pass = report.max_cr_mmse_dev < config.tolerance &&
                  report.max_cr_ml_dev < config.tolerance;
    return report;
}

std::vector<ComplexityRow> run_complexity_report(int K, int taps, int n_h, std::uint64_t seed) {
    const auto profile = bb::exponential_profile(taps);
    const double sigma_w_sq = 0.1;
    const auto params = est::make_params(sigma_w_sq, profile, n_h);

    bb::Rng rng(seed);
    const bb::Cir cir = bb::generate_cir(profile, rng);
    MultCounter scratch;
    const bb::Ctf ctf = bb::cir_to_ctf(cir, K, scratch);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(K));
    std::uniform_int_distribution<int> bit(0, 1);
    for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
    const bb::SymbolGrid x = bb::modulate(bits, bb::Modulation::bpsk);
    const bb::SymbolGrid y = bb::apply_channel(x, ctf, {sigma_w_sq}, rng);

    std::vector<ComplexityRow> rows;
    for (est::EstimatorKind kind :
         {est::EstimatorKind::ls, est::EstimatorKind::mmse_scalar, est::EstimatorKind::mmse_direct,
          est::EstimatorKind::cr_mmse, est::EstimatorKind::ml_cls, est::EstimatorKind::cr_ml,
          est::EstimatorKind::lmmse_ref}) {
        ComplexityRow row;
        row.kind = kind;
        const std::uint64_t solves_before = est::solve_count();
        ddce::run_estimator(kind, y, x, params, K, row.cost);
        row.solves = est::solve_count() - solves_before;
        rows.push_back(row);
    }
    return rows;
}

} // namespace crn::sweep
