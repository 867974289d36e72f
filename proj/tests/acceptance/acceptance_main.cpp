// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "crn/ddce.hpp"
#include "crn/mac.hpp"
#include "crn/report.hpp"
#include "crn/simcore.hpp"
#include "crn/stats.hpp"
#include "crn/sweep.hpp"

using namespace crn;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report_line(int index, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << index << ". " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const sweep::SweepPoint& point_for(const std::vector<sweep::SweepPoint>& points, double snr,
                                   est::EstimatorKind kind) {
    for (const auto& p : points)
        if (p.kind == kind && std::abs(p.snr_db - snr) < 1e-9) return p;
    throw std::logic_error("missing sweep point");
}

sim::Scenario scaled_scenario(std::uint64_t seed) {
    sim::Scenario s;
    s.n_channels = 10;
    s.n_pu = 6;
    s.n_su_pairs = 5; // four active pairs plus one unauthenticated pair
    s.pu_mean_on_s = {0.4};
    s.pu_mean_off_s = {0.8};
    s.su_arrival_rate_hz = 3.0;
    s.duration_s = 10.0;
    s.seed = seed;
    s.rates_bps = {1e6, 2e6, 3e6, 4e6, 5e6, 6e6, 1e6, 2e6, 3e6, 6e6};
    s.link_snr_db = {14, 16, 18, 20, 18};
    s.cetp.lc = 2000.0;
    s.unauthenticated_nodes = {8};
    return s;
}

void criterion_1_cr_mmse_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    sweep::EquivConfig config;
    config.trials = 100;
    config.K = 64;
    config.taps = 4;
    config.comb_spacings = {}; // CR-ML has its own criterion
    const auto report = sweep::run_equiv_check(config);
    const double elapsed = seconds_since(start);

    std::ostringstream detail;
    detail << "max dev " << report.max_cr_mmse_dev << ", " << elapsed << " s";
    report_line(1, "CR-MMSE equals the dense MMSE solve (100 instances, K=64, K0=4)",
                report.max_cr_mmse_dev < 1e-9 && elapsed < 5.0, detail.str());
}

void criterion_2_cr_ml_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    sweep::EquivConfig config;
    config.trials = 100;
    config.K = 64;
    config.n_h = 4;
    config.comb_spacings = {1, 2, 4, 8};
    const auto report = sweep::run_equiv_check(config);
    const double elapsed = seconds_since(start);

    std::ostringstream detail;
    detail << "max dev " << report.max_cr_ml_dev << ", " << elapsed << " s";
    report_line(2, "CR-ML equals CLS-ML on regular combs (D in {1,2,4,8}, 100 each)",
                report.max_cr_ml_dev < 1e-9 && elapsed < 5.0, detail.str());
}

void criterion_3_complexity_counters() {
    const auto rows = sweep::run_complexity_report(64, 4, 4, 1);
    std::uint64_t ls = 0;
    std::uint64_t cr_mmse = 0;
    std::uint64_t direct = 0;
    std::uint64_t ml = 0;
    std::uint64_t cr_ml = 0;
    for (const auto& row : rows) {
        switch (row.kind) {
        case est::EstimatorKind::ls: ls = row.cost.complex_mults; break;
        case est::EstimatorKind::cr_mmse: cr_mmse = row.cost.complex_mults; break;
        case est::EstimatorKind::mmse_direct: direct = row.cost.complex_mults; break;
        case est::EstimatorKind::ml_cls: ml = row.cost.complex_mults; break;
        case est::EstimatorKind::cr_ml: cr_ml = row.cost.complex_mults; break;
        default: break;
        }
    }
    const bool pass = cr_mmse <= 3 * ls && 2 * cr_mmse < direct && cr_ml < ml;
    std::ostringstream detail;
    detail << "ls=" << ls << " cr-mmse=" << cr_mmse << " direct=" << direct << " ml=" << ml
           << " cr-ml=" << cr_ml;
    report_line(3, "measured multiplication counters (CR-MMSE <= 3 LS, < direct/2; CR-ML < ML)",
                pass, detail.str());
}

void criterion_4_ser_ordering() {
    const auto start = std::chrono::steady_clock::now();
    sweep::SweepConfig config;
    config.snr_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    config.estimators = {est::EstimatorKind::ls, est::EstimatorKind::cr_mmse,
                         est::EstimatorKind::mmse_direct};
    config.frames_per_point = 32; // 32 * 99 * 64 > 2e5 data symbols per point
    config.seed = 2024;
    const auto points = sweep::run_ser_sweep(config);
    const double elapsed = seconds_since(start);

    bool ordered = true;
    bool separated = true;
    bool indistinct = true;
    std::int64_t min_symbols = std::numeric_limits<std::int64_t>::max();
    for (double snr : config.snr_db) {
        const auto& ls = point_for(points, snr, est::EstimatorKind::ls);
        const auto& cr = point_for(points, snr, est::EstimatorKind::cr_mmse);
        const auto& direct = point_for(points, snr, est::EstimatorKind::mmse_direct);
        min_symbols = std::min(min_symbols, ls.symbols);
        if (snr >= 8.0 && cr.ser > ls.ser) ordered = false;
        if (snr >= 12.0 && !(cr.ci_high < ls.ci_low)) separated = false;
        const bool overlap = cr.ci_low <= direct.ci_high && direct.ci_low <= cr.ci_high;
        if (!overlap) indistinct = false;
    }

    std::ostringstream detail;
    detail << "symbols/point >= " << min_symbols << ", " << elapsed << " s";
    report_line(4,
                "SER ordering: CR-MMSE <= LS above 8 dB, CIs split above 12 dB, CR-MMSE ~ direct",
                ordered && separated && indistinct && min_symbols >= 200000 && elapsed < 600.0,
                detail.str());
}

void criterion_5_lmmse_threshold() {
    sweep::SweepConfig config;
    config.snr_db = {14, 16, 18, 20};
    config.estimators = {est::EstimatorKind::ml_cls, est::EstimatorKind::lmmse_ref};
    config.frames_per_point = 32;
    config.lmmse_rank = 2; // below the true 4-tap channel: rank deficient
    config.seed = 515;
    const auto points = sweep::run_ser_sweep(config);

    const double lmmse_14 = point_for(points, 14, est::EstimatorKind::lmmse_ref).ser;
    const double lmmse_20 = point_for(points, 20, est::EstimatorKind::lmmse_ref).ser;
    const double ml_14 = point_for(points, 14, est::EstimatorKind::ml_cls).ser;
    const double ml_20 = point_for(points, 20, est::EstimatorKind::ml_cls).ser;

    const bool flattened = lmmse_20 > 0.8 * lmmse_14;
    const bool ml_improves = ml_14 >= 2.0 * ml_20 && ml_20 > 0.0;
    std::ostringstream detail;
    detail << "lmmse 14->20 dB: " << lmmse_14 << " -> " << lmmse_20 << "; ml: " << ml_14
           << " -> " << ml_20;
    report_line(5, "rank-deficient LMMSE flattens at high SNR while the ML family keeps falling",
                flattened && ml_improves, detail.str());
}

void criterion_6_slot_count() {
    bool pass = mac::slot_count(0.0, 0.3, 25) == 25 && mac::slot_count(1.0, 0.3, 25) == 0 &&
                mac::slot_count(0.1, 0.3, 10) == 3;
    mac::Rng rng(606);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform(rng);
        double threshold = uniform(rng);
        if (threshold <= 0.0 || threshold >= 1.0) continue;
        const int cap = 1 + static_cast<int>(uniform(rng) * 40);
        int brute = 0;
        while (brute < cap && 1.0 - std::pow(1.0 - u, brute + 1) < threshold) ++brute;
        if (mac::slot_count(u, threshold, cap) != brute) pass = false;
        ++checked;
    }
    std::ostringstream detail;
    detail << checked << " random pairs plus boundaries";
    report_line(6, "slot count closed form equals brute-force search exactly", pass,
                detail.str());
}

void criterion_7_mac_safety() {
    bool pass = true;
    std::int64_t grants = 0;
    std::int64_t rejections = 0;
    std::string why;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const sim::Scenario scenario = scaled_scenario(seed);
        const sim::Metrics m = sim::run(scenario);
        grants += m.grants;
        rejections += m.auth_rejections;
        if (m.monitor_violation) {
            pass = false;
            why = m.violations.front();
        }
        for (int c = 0; c < scenario.n_channels; ++c)
            if (m.rx_packets[static_cast<std::size_t>(c)] >
                m.tx_packets[static_cast<std::size_t>(c)])
                pass = false;
        for (const auto& row : m.trace)
            if (row.variant == "CTS" && row.pkt_num < 1) pass = false;
        if (m.link_throughput_bps[4] != 0.0) pass = false; // unauthenticated pair
    }
    if (grants == 0 || rejections == 0) pass = false;
    std::ostringstream detail;
    detail << "20 seeds, " << grants << " grants, " << rejections << " auth rejections";
    if (!why.empty()) detail << ", first violation: " << why;
    report_line(7, "MAC safety: no PU-channel grants, no unauthenticated grants, rx <= tx, CTS >= 1",
                pass, detail.str());
}

void criterion_8_cetp_benefit() {
    int wins = 0;
    const int seeds = 20;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        sim::Scenario cetp = scaled_scenario(seed);
        sim::Scenario uniform = cetp;
        uniform.selection = sim::SelectionPolicy::uniform_random;
        const double t_cetp = sim::run(cetp).aggregate_throughput_bps;
        const double t_uniform = sim::run(uniform).aggregate_throughput_bps;
        if (t_cetp >= t_uniform) ++wins;
    }
    const double p = stats::sign_test_p(wins, seeds);
    std::ostringstream detail;
    detail << wins << "/" << seeds << " paired seeds, sign test p = " << p;
    report_line(8, "CETP selection beats uniform-random selection", wins >= 16 && p < 0.05,
                detail.str());
}

void criterion_9_csv_determinism() {
#ifdef CRNSIM_PATH
    const fs::path dir = fs::temp_directory_path() / "crnsim_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto shell = [](const std::string& cmd) {
        return WEXITSTATUS(std::system((cmd + " >/dev/null 2>&1").c_str()));
    };

    {
        std::ofstream out(dir / "scenario.json");
        out << R"({"version":1,"n_channels":10,"n_pu":6,"n_su_pairs":4,
                   "su_arrival_rate_hz":3.0,"duration_s":5.0,"seed":11,
                   "rates_bps":[1e6,2e6,3e6,4e6,5e6,6e6,1e6,2e6,3e6,6e6],
                   "link_snr_db":[14,16,18,20],"lc_bits":2000})";
    }

    const std::string bin = CRNSIM_PATH;
    bool pass = true;
    pass &= shell(bin + " ser-sweep --snr 0:10:20 --trials 2 --seed 5 --out " +
                  (dir / "s1").string()) == 0;
    pass &= shell(bin + " ser-sweep --snr 0:10:20 --trials 2 --seed 5 --out " +
                  (dir / "s2").string()) == 0;
    pass &= shell(bin + " mac-sim --config " + (dir / "scenario.json").string() + " --out " +
                  (dir / "m1").string()) == 0;
    pass &= shell(bin + " mac-sim --config " + (dir / "scenario.json").string() + " --out " +
                  (dir / "m2").string()) == 0;
    pass &= slurp(dir / "s1" / "ser_sweep.csv") == slurp(dir / "s2" / "ser_sweep.csv");
    pass &= slurp(dir / "m1" / "metrics.csv") == slurp(dir / "m2" / "metrics.csv");
    pass &= slurp(dir / "m1" / "trace.csv") == slurp(dir / "m2" / "trace.csv");
    report_line(9, "repeated subcommand runs produce byte-identical CSV bodies", pass, "");
#else
    report_line(9, "repeated subcommand runs produce byte-identical CSV bodies", false,
                "binary path not configured");
#endif
}

void criterion_10_ddce_sanity() {
    bool genie_equal = true;
    for (est::EstimatorKind kind : {est::EstimatorKind::ls, est::EstimatorKind::cr_mmse,
                                    est::EstimatorKind::ml_cls}) {
        ddce::DdceConfig config;
        config.K = 64;
        config.kind = kind;
        config.params = est::make_params(0.1, bb::exponential_profile(4), 4);

        bb::Rng rng(10101);
        const bb::Cir cir = bb::generate_cir(config.params.tap_profile, rng);
        MultCounter mc;
        const bb::Ctf ctf = bb::cir_to_ctf(cir, 64, mc);

        bb::SymbolGrid x0;
        x0.symbols.resize(64);
        for (int k = 0; k < 64; ++k)
            x0.symbols[static_cast<std::size_t>(k)] =
                ddce::pilot_value(config.pilot_seed, 0, k, config.scheme);
        const bb::SymbolGrid y0 = bb::apply_channel(x0, ctf, {0.1}, rng);
        auto state = ddce::bootstrap(config, x0, y0, mc);

        std::uniform_int_distribution<int> bit(0, 1);
        for (int n = 1; n <= 8; ++n) {
            std::vector<std::uint8_t> bits(64);
            for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
            const bb::SymbolGrid xn = bb::modulate(bits, bb::Modulation::bpsk);
            const bb::SymbolGrid yn = bb::apply_channel(xn, ctf, {0.1}, rng);
            state.step(yn, mc, &xn);

            MultCounter scratch;
            const auto oneshot = ddce::run_estimator(kind, yn, xn, config.params, 64, scratch);
            const auto loop = oneshot.time_domain ? state.apriori_cir().taps
                                                  : state.apriori_ctf(scratch).coeffs;
            if (loop != oneshot.rep) genie_equal = false;
        }
    }

    bool noiseless_clean = true;
    std::int64_t symbols = 0;
    for (est::EstimatorKind kind : {est::EstimatorKind::ls, est::EstimatorKind::cr_mmse,
                                    est::EstimatorKind::cr_ml}) {
        ddce::TrialConfig trial;
        trial.ddce.K = 64;
        trial.ddce.kind = kind;
        trial.ddce.params = est::make_params(0.0, bb::exponential_profile(4), 4);
        trial.n_data_symbols = 100;
        const auto result = ddce::run_ser_trial(trial, 99);
        symbols += result.symbols_counted;
        if (result.symbol_errors != 0) noiseless_clean = false;
    }

    std::ostringstream detail;
    detail << "genie feedback bit-exact over 3 estimators; " << symbols
           << " noiseless symbols error-free";
    report_line(10, "DDCE loop sanity: genie feedback equals one-shot, noiseless runs are clean",
                genie_equal && noiseless_clean, detail.str());
}

} // namespace

int main() {
    std::cout << "crnsim acceptance suite\n=======================\n";
    criterion_1_cr_mmse_equivalence();
    criterion_2_cr_ml_equivalence();
    criterion_3_complexity_counters();
    criterion_4_ser_ordering();
    criterion_5_lmmse_threshold();
    criterion_6_slot_count();
    criterion_7_mac_safety();
    criterion_8_cetp_benefit();
    criterion_9_csv_determinism();
    criterion_10_ddce_sanity();

    std::cout << "=======================\n";
    if (g_failures == 0) {
        std::cout << "all criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criteria FAILED\n";
    return 1;
}
