#include <json.hpp>

#include <stdexcept>

#include "crn/simcore.hpp"

namespace crn::sim {
namespace {

using nlohmann::json;

std::vector<double> number_or_array(const json& value, const char* key) {
    if (value.is_number()) return {value.get<double>()};
    if (value.is_array()) {
        std::vector<double> out;
        for (const auto& v : value) {
            if (!v.is_number()) throw std::invalid_argument(std::string(key) + ": non-numeric entry");
            out.push_back(v.get<double>());
        }
        return out;
    }
    throw std::invalid_argument(std::string(key) + ": expected number or array");
}

std::vector<double> broadcast(std::vector<double> values, int n, const char* key) {
    if (static_cast<int>(values.size()) == n) return values;
    if (values.size() == 1) return std::vector<double>(static_cast<std::size_t>(n), values[0]);
    throw std::invalid_argument(std::string(key) + ": expected 1 or " + std::to_string(n) +
                                " entries");
}

} // namespace

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");

    Scenario s;
    if (j.contains("version")) s.version = j.at("version").get<int>();
    if (s.version != 1) throw std::invalid_argument("unsupported scenario version");

    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };

    get("n_channels", s.n_channels);
    get("channel_bw_hz", s.channel_bw_hz);
    get("band_hz", s.band_hz);
    get("n_pu", s.n_pu);
    get("n_su_pairs", s.n_su_pairs);
    if (j.contains("pu_mean_on_s"))
        s.pu_mean_on_s = number_or_array(j.at("pu_mean_on_s"), "pu_mean_on_s");
    if (j.contains("pu_mean_off_s"))
        s.pu_mean_off_s = number_or_array(j.at("pu_mean_off_s"), "pu_mean_off_s");
    get("su_arrival_rate_hz", s.su_arrival_rate_hz);
    get("duration_s", s.duration_s);
    get("seed", s.seed);
    get("pkt_size_bits", s.pkt_size_bits);
    get("threshold", s.threshold);
    get("max_ser", s.max_ser);
    get("fec_fraction", s.fec_fraction);
    get("ser_table_frames", s.ser_table_frames);
    get("ser_table_symbols", s.ser_table_symbols);
    get("ctrl_latency_s", s.ctrl_latency_s);
    get("max_rts_attempts", s.max_rts_attempts);
    get("backoff_base_s", s.backoff_base_s);
    get("t_auth_s", s.t_auth_s);
    get("credential_lifetime_s", s.credential_lifetime_s);
    get("K", s.K);
    get("cir_taps", s.cir_taps);
    get("n_subframes", s.n_subframes);

    if (j.contains("rates_bps")) s.rates_bps = number_or_array(j.at("rates_bps"), "rates_bps");
    if (s.rates_bps.empty()) s.rates_bps = {6e6};
    if (j.contains("link_snr_db"))
        s.link_snr_db = number_or_array(j.at("link_snr_db"), "link_snr_db");
    if (s.link_snr_db.empty()) s.link_snr_db = {15.0};

    if (j.contains("alpha")) s.cetp.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) s.cetp.beta = j.at("beta").get<double>();
    if (j.contains("lc_bits")) s.cetp.lc = j.at("lc_bits").get<double>();
    if (j.contains("slot_duration_s")) s.cetp.slot_duration = j.at("slot_duration_s").get<double>();
    if (j.contains("max_slots")) s.cetp.max_slots = j.at("max_slots").get<int>();
    if (j.contains("pkt_num_scheme")) {
        const std::string scheme = j.at("pkt_num_scheme").get<std::string>();
        if (scheme == "canonical") s.cetp.scheme = mac::PktNumScheme::canonical;
        else if (scheme == "literal") s.cetp.scheme = mac::PktNumScheme::literal;
        else throw std::invalid_argument("pkt_num_scheme must be canonical or literal");
    }

    if (j.contains("selection")) {
        const std::string sel = j.at("selection").get<std::string>();
        if (sel == "cetp") s.selection = SelectionPolicy::cetp;
        else if (sel == "random") s.selection = SelectionPolicy::uniform_random;
        else throw std::invalid_argument("selection must be cetp or random");
    }

    if (j.contains("power")) {
        const json& p = j.at("power");
        if (p.contains("enabled")) s.power.enabled = p.at("enabled").get<bool>();
        if (p.contains("max_power")) s.power.max_power = p.at("max_power").get<double>();
        if (p.contains("mask")) s.power.mask = p.at("mask").get<double>();
        if (p.contains("leak_per_channel"))
            s.power.leak_per_channel = p.at("leak_per_channel").get<double>();
        if (p.contains("leak_radius")) s.power.leak_radius = p.at("leak_radius").get<int>();
    }

    if (j.contains("estimator")) {
        const auto kind = est::estimator_from_name(j.at("estimator").get<std::string>());
        if (!kind) throw std::invalid_argument("unknown estimator name");
        s.estimator = *kind;
    }
    if (j.contains("modulation")) {
        const std::string m = j.at("modulation").get<std::string>();
        if (m == "bpsk") s.scheme = bb::Modulation::bpsk;
        else if (m == "4qam") s.scheme = bb::Modulation::qam4;
        else if (m == "16qam") s.scheme = bb::Modulation::qam16;
        else if (m == "64qam") s.scheme = bb::Modulation::qam64;
        else throw std::invalid_argument("unknown modulation");
    }

    if (j.contains("unauthenticated_nodes")) {
        for (const auto& v : j.at("unauthenticated_nodes"))
            s.unauthenticated_nodes.push_back(v.get<int>());
    }
    if (j.contains("class_deadlines")) {
        s.class_deadlines.clear();
        for (const auto& v : j.at("class_deadlines")) s.class_deadlines.push_back(v.get<int>());
    }
    if (j.contains("pair_delay_class")) {
        s.pair_delay_class.clear();
        for (const auto& v : j.at("pair_delay_class")) s.pair_delay_class.push_back(v.get<int>());
    }

    // validation before any event runs
    if (s.n_channels < 1) throw std::invalid_argument("n_channels must be positive");
    if (s.n_channels * s.channel_bw_hz > s.band_hz + 1e-9)
        throw std::invalid_argument("channel plan exceeds the licensed band");
    if (s.n_pu < 0 || s.n_pu > s.n_channels)
        throw std::invalid_argument("n_pu must lie in [0, n_channels]");
    if (s.n_su_pairs < 0) throw std::invalid_argument("n_su_pairs must be non-negative");
    if (s.duration_s <= 0.0) throw std::invalid_argument("duration must be positive");
    if (s.pkt_size_bits <= 0.0) throw std::invalid_argument("pkt_size must be positive");
    if (s.threshold <= 0.0 || s.threshold >= 1.0)
        throw std::invalid_argument("threshold must lie in (0,1)");
    for (const auto* means : {&s.pu_mean_on_s, &s.pu_mean_off_s}) {
        if (means->empty() ||
            (means->size() != 1 && static_cast<int>(means->size()) != s.n_channels))
            throw std::invalid_argument("PU activity must be scalar or per-channel");
        for (double v : *means)
            if (v <= 0.0) throw std::invalid_argument("PU holding times must be positive");
    }
    if (s.cir_taps < 1 || s.cir_taps > s.K)
        throw std::invalid_argument("cir_taps must lie in [1, K]");
    if (s.n_subframes < 1) throw std::invalid_argument("n_subframes must be positive");
    if (s.class_deadlines.empty()) throw std::invalid_argument("need at least one delay class");

    s.rates_bps = broadcast(std::move(s.rates_bps), s.n_channels, "rates_bps");
    for (double r : s.rates_bps)
        if (r <= 0.0) throw std::invalid_argument("rates must be positive");
    s.link_snr_db =
        broadcast(std::move(s.link_snr_db), std::max(1, s.n_su_pairs), "link_snr_db");

    if (s.pair_delay_class.empty())
        s.pair_delay_class.assign(static_cast<std::size_t>(std::max(1, s.n_su_pairs)), 0);
    if (static_cast<int>(s.pair_delay_class.size()) != std::max(1, s.n_su_pairs))
        throw std::invalid_argument("pair_delay_class must cover every pair");
    for (int c : s.pair_delay_class)
        if (c < 0 || c >= static_cast<int>(s.class_deadlines.size()))
            throw std::invalid_argument("pair delay class out of range");

    return s;
}

} // namespace crn::sim
