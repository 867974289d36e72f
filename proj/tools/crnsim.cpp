// crnsim: cross-layer cognitive-radio simulator front end.
//
//   ser-sweep          decision-directed SER curves over an SNR grid
//   mac-sim            discrete-event MAC scenario -> metrics + control trace
//   equiv-check        reduced-complexity vs dense-solver equivalence
//   complexity-report  per-estimator multiplication counters
//
// Exit codes: 0 success, 1 usage, 2 invariant violation, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crn/report.hpp"
#include "crn/simcore.hpp"
#include "crn/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitNumerical = 3;

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Usage("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_snr_grid(const std::string& spec) {
    // "start:step:stop", inclusive
    double start = 0.0;
    double step = 0.0;
    double stop = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':' || !ss.eof())
        throw Usage("bad --snr spec, expected start:step:stop");
    if (step <= 0.0) throw Usage("--snr step must be positive");
    std::vector<double> grid;
    for (double v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
    if (grid.empty()) throw Usage("empty SNR grid");
    return grid;
}

std::vector<crn::est::EstimatorKind> parse_estimators(const std::string& list) {
    std::vector<crn::est::EstimatorKind> kinds;
    std::istringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        const auto kind = crn::est::estimator_from_name(name);
        if (!kind) throw Usage("unknown estimator: " + name);
        kinds.push_back(*kind);
    }
    if (kinds.empty()) throw Usage("empty estimator list");
    return kinds;
}

void write_or_die(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Usage("cannot write " + path.string());
    out << body;
}

struct SweepOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::string snr_spec;
    std::string estimator_list;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
};

int run_ser_sweep_cmd(const SweepOptions& opt) {
    crn::sweep::SweepConfig config;
    config.snr_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};

    std::string config_text = "{}";
    if (!opt.config_path.empty()) {
        config_text = read_file(opt.config_path);
        nlohmann::json j = nlohmann::json::parse(config_text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Usage("malformed sweep config");
        if (j.contains("K")) config.K = j.at("K").get<int>();
        if (j.contains("taps")) config.taps = j.at("taps").get<int>();
        if (j.contains("frames_per_point"))
            config.frames_per_point = j.at("frames_per_point").get<int>();
        if (j.contains("data_symbols")) config.n_data_symbols = j.at("data_symbols").get<int>();
        if (j.contains("comb_spacing")) config.comb_spacing = j.at("comb_spacing").get<int>();
        if (j.contains("lmmse_rank")) config.lmmse_rank = j.at("lmmse_rank").get<int>();
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) config.workers = j.at("workers").get<int>();
        if (j.contains("snr_db")) {
            config.snr_db.clear();
            for (const auto& v : j.at("snr_db")) config.snr_db.push_back(v.get<double>());
        }
        if (j.contains("estimators")) {
            config.estimators.clear();
            for (const auto& v : j.at("estimators")) {
                const auto kind = crn::est::estimator_from_name(v.get<std::string>());
                if (!kind) throw Usage("unknown estimator in config");
                config.estimators.push_back(*kind);
            }
        }
    }
    if (!opt.snr_spec.empty()) config.snr_db = parse_snr_grid(opt.snr_spec);
    if (!opt.estimator_list.empty()) config.estimators = parse_estimators(opt.estimator_list);
    if (opt.seed_set) config.seed = opt.seed;
    if (opt.trials > 0) config.frames_per_point = opt.trials;
    if (config.snr_db.empty()) throw Usage("empty SNR grid");

    const auto points = crn::sweep::run_ser_sweep(config);

    std::ostringstream csv;
    crn::report::write_ser_sweep_csv(csv, config, points,
                                     crn::report::config_fingerprint(config_text));
    std::filesystem::create_directories(opt.out_dir);
    write_or_die(std::filesystem::path(opt.out_dir) / "ser_sweep.csv", csv.str());
    std::cout << "ser-sweep: " << points.size() << " rows -> " << opt.out_dir
              << "/ser_sweep.csv\n";
    return kExitOk;
}

int run_mac_sim_cmd(const std::string& config_path, const std::string& out_dir,
                    std::uint64_t seed, bool seed_set, const std::string& scheme,
                    int power_flag) {
    if (config_path.empty()) throw Usage("mac-sim requires --config");
    const std::string config_text = read_file(config_path);

    crn::sim::Scenario scenario;
    try {
        scenario = crn::sim::scenario_from_json(config_text);
    } catch (const std::invalid_argument& e) {
        throw Usage(e.what());
    }
    if (seed_set) scenario.seed = seed;
    if (!scheme.empty()) {
        if (scheme == "canonical") scenario.cetp.scheme = crn::mac::PktNumScheme::canonical;
        else if (scheme == "literal") scenario.cetp.scheme = crn::mac::PktNumScheme::literal;
        else throw Usage("--scheme must be canonical or literal");
    }
    if (power_flag >= 0) scenario.power.enabled = power_flag != 0;

    const crn::sim::Metrics metrics = crn::sim::run(scenario);
    const std::string hash = crn::report::config_fingerprint(config_text);

    std::ostringstream metrics_csv;
    crn::report::write_metrics_csv(metrics_csv, scenario, metrics, hash);
    std::ostringstream trace_csv;
    crn::report::write_trace_csv(trace_csv, metrics, hash, scenario.seed);

    std::filesystem::create_directories(out_dir);
    write_or_die(std::filesystem::path(out_dir) / "metrics.csv", metrics_csv.str());
    write_or_die(std::filesystem::path(out_dir) / "trace.csv", trace_csv.str());

    std::cout << "mac-sim: grants=" << metrics.grants
              << " throughput_bps=" << metrics.aggregate_throughput_bps << " -> " << out_dir
              << "\n";
    if (metrics.monitor_violation) {
        for (const auto& v : metrics.violations) std::cerr << "monitor: " << v << "\n";
        return kExitInvariant;
    }
    return kExitOk;
}

int run_equiv_check_cmd(const std::string& config_path, std::uint64_t seed, bool seed_set,
                        int trials) {
    crn::sweep::EquivConfig config;
    if (!config_path.empty()) {
        nlohmann::json j = nlohmann::json::parse(read_file(config_path), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Usage("malformed equiv config");
        if (j.contains("trials")) config.trials = j.at("trials").get<int>();
        if (j.contains("K")) config.K = j.at("K").get<int>();
        if (j.contains("taps")) config.taps = j.at("taps").get<int>();
        if (j.contains("n_h")) config.n_h = j.at("n_h").get<int>();
        if (j.contains("sigma_w_sq")) config.sigma_w_sq = j.at("sigma_w_sq").get<double>();
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("inject_fault")) config.inject_fault = j.at("inject_fault").get<bool>();
        if (j.contains("comb_spacings")) {
            config.comb_spacings.clear();
            for (const auto& v : j.at("comb_spacings")) config.comb_spacings.push_back(v.get<int>());
        }
    }
    if (seed_set) config.seed = seed;
    if (trials > 0) config.trials = trials;

    const auto report = crn::sweep::run_equiv_check(config);
    std::cout << "cr-mmse vs dense solve: max relative deviation = " << report.max_cr_mmse_dev
              << (report.max_cr_mmse_dev < report.tolerance ? "  [ok]" : "  [FAIL]") << "\n";
    std::cout << "cr-ml   vs cls solve:   max relative deviation = " << report.max_cr_ml_dev
              << (report.max_cr_ml_dev < report.tolerance ? "  [ok]" : "  [FAIL]") << "\n";
    std::cout << "tolerance " << report.tolerance << ", " << config.trials
              << " trials per route\n";
    return report.pass ? kExitOk : kExitInvariant;
}

int run_complexity_cmd(const std::string& out_dir, int K, int taps, int n_h,
                       std::uint64_t seed) {
    const auto rows = crn::sweep::run_complexity_report(K, taps, n_h, seed);
    std::ostringstream csv;
    crn::report::write_complexity_csv(csv, rows, K, taps, n_h, seed);
    if (out_dir.empty()) {
        std::cout << csv.str();
    } else {
        std::filesystem::create_directories(out_dir);
        write_or_die(std::filesystem::path(out_dir) / "complexity.csv", csv.str());
        std::cout << "complexity-report -> " << out_dir << "/complexity.csv\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-layer cognitive radio network simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // parent options may follow the subcommand name

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "configuration file (JSON)");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed override");

    auto* sweep_cmd = app.add_subcommand("ser-sweep", "SER vs SNR sweep over estimators");
    std::string snr_spec;
    std::string estimator_list;
    int trials = 0;
    sweep_cmd->add_option("--snr", snr_spec, "SNR grid start:step:stop in dB");
    sweep_cmd->add_option("--estimators", estimator_list, "comma-separated estimator names");
    sweep_cmd->add_option("--trials", trials, "frames per SNR point");

    auto* mac_cmd = app.add_subcommand("mac-sim", "discrete-event MAC scenario");
    std::string pkt_scheme;
    int power_flag = -1;
    mac_cmd->add_option("--scheme", pkt_scheme, "pkt_num mode: canonical or literal");
    mac_cmd->add_flag("--power-control,!--no-power-control",
                      [&power_flag](std::int64_t v) { power_flag = v > 0 ? 1 : 0; },
                      "force power-controlled links on/off");

    auto* equiv_cmd = app.add_subcommand("equiv-check", "reduced-complexity equivalence oracle");
    equiv_cmd->add_option("--trials", trials, "instances per route");

    auto* cx_cmd = app.add_subcommand("complexity-report", "per-estimator counters");
    int cx_k = 64;
    int cx_taps = 4;
    int cx_nh = 4;
    cx_cmd->add_option("--K", cx_k, "subcarrier count");
    cx_cmd->add_option("--taps", cx_taps, "CIR taps");
    cx_cmd->add_option("--n-h", cx_nh, "assumed CIR length for the ML family");

    try {
        app.parse(argc, argv);
        seed_set = seed_opt->count() > 0;

        if (sweep_cmd->parsed()) {
            SweepOptions opt;
            opt.config_path = config_path;
            opt.out_dir = out_dir;
            opt.snr_spec = snr_spec;
            opt.estimator_list = estimator_list;
            opt.seed = seed;
            opt.seed_set = seed_set;
            opt.trials = trials;
            return run_ser_sweep_cmd(opt);
        }
        if (mac_cmd->parsed())
            return run_mac_sim_cmd(config_path, out_dir, seed, seed_set, pkt_scheme, power_flag);
        if (equiv_cmd->parsed()) return run_equiv_check_cmd(config_path, seed, seed_set, trials);
        if (cx_cmd->parsed())
            return run_complexity_cmd(out_dir == "." ? "" : out_dir, cx_k, cx_taps, cx_nh,
                                      seed_set ? seed : 1);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const Usage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const crn::est::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
