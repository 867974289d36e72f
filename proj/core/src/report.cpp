#include "crn/report.hpp"

#include <iomanip>

#include "crn/hash.hpp"

namespace crn::report {
namespace {

const char* scheme_name(bb::Modulation m) {
    switch (m) {
    case bb::Modulation::bpsk: return "bpsk";
    case bb::Modulation::qam4: return "4qam";
    case bb::Modulation::qam16: return "16qam";
    case bb::Modulation::qam64: return "64qam";
    }
    return "?";
}

void csv_double(std::ostream& out, double v) {
    out << std::setprecision(12) << v;
}

void csv_opt(std::ostream& out, int v) {
    if (v >= 0) out << v;
}

} // namespace

std::string config_fingerprint(std::string_view config_text) {
    return hex64(fnv1a64(config_text));
}

void write_ser_sweep_csv(std::ostream& out, const sweep::SweepConfig& config,
                         std::span<const sweep::SweepPoint> points,
                         std::string_view config_hash) {
    out << "# crnsim ser-sweep v1\n";
    out << "# config=" << config_hash << " seed=" << config.seed << "\n";
    out << "# nDSC=" << config.K << " taps=" << config.taps << " modulation="
        << scheme_name(config.scheme) << " frames_per_point=" << config.frames_per_point
        << " data_symbols=" << config.n_data_symbols << " comb_spacing=" << config.comb_spacing
        << "\n";
    out << "snr_db,estimator,ser,ci_low,ci_high,mults_per_symbol\n";
    for (const auto& p : points) {
        csv_double(out, p.snr_db);
        out << "," << est::estimator_name(p.kind) << ",";
        csv_double(out, p.ser);
        out << ",";
        csv_double(out, p.ci_low);
        out << ",";
        csv_double(out, p.ci_high);
        out << ",";
        csv_double(out, p.mults_per_symbol);
        out << "\n";
    }
}

void write_metrics_csv(std::ostream& out, const sim::Scenario& scenario,
                       const sim::Metrics& metrics, std::string_view config_hash) {
    out << "# crnsim mac-sim metrics v1\n";
    out << "# config=" << config_hash << " seed=" << scenario.seed << "\n";
    out << "# grants=" << metrics.grants << " auth_rejections=" << metrics.auth_rejections
        << " forced_terminations=" << metrics.forced_terminations
        << " backup_switches=" << metrics.backup_switches
        << " pu_preemptions=" << metrics.pu_preemptions << " no_channel=" << metrics.no_channel
        << " quality_denials=" << metrics.quality_denials
        << " infeasible_deadline=" << metrics.infeasible_deadline
        << " handshake_failures=" << metrics.handshake_failures << "\n";
    out << "# aggregate_throughput_bps=";
    csv_double(out, metrics.aggregate_throughput_bps);
    out << "\n";
    out << "# phy_complex_mults=" << metrics.phy_cost.complex_mults
        << " phy_complex_adds=" << metrics.phy_cost.complex_adds << "\n";
    out << "# ser_table";
    for (std::size_t i = 0; i < metrics.ser_table_snr_db.size(); ++i) {
        out << " " << metrics.ser_table_snr_db[i] << "dB:";
        csv_double(out, metrics.ser_table[i]);
    }
    out << "\n";
    out << "scope,id,tx_packets,rx_packets,ratio,throughput_bps,mean_snr_db\n";
    for (int c = 0; c < scenario.n_channels; ++c) {
        const auto tx = metrics.tx_packets[static_cast<std::size_t>(c)];
        const auto rx = metrics.rx_packets[static_cast<std::size_t>(c)];
        out << "channel," << c << "," << tx << "," << rx << ",";
        csv_double(out, metrics.ratio(c));
        out << ",";
        csv_double(out, static_cast<double>(rx) * scenario.pkt_size_bits / scenario.duration_s);
        out << ",\n";
    }
    for (std::size_t p = 0; p < metrics.link_throughput_bps.size(); ++p) {
        out << "link," << p << ",,,,";
        csv_double(out, metrics.link_throughput_bps[p]);
        out << ",";
        csv_double(out, metrics.link_mean_snr_db[p]);
        out << "\n";
    }
    out << "total,,,,,";
    csv_double(out, metrics.aggregate_throughput_bps);
    out << ",\n";
}

void write_trace_csv(std::ostream& out, const sim::Metrics& metrics,
                     std::string_view config_hash, std::uint64_t seed) {
    out << "# crnsim control trace v1\n";
    out << "# config=" << config_hash << " seed=" << seed << "\n";
    out << "time,variant,sender,receiver,channel,pkt_num,backup\n";
    for (const auto& row : metrics.trace) {
        csv_double(out, row.time);
        out << "," << row.variant << "," << row.sender << "," << row.receiver << ",";
        csv_opt(out, row.channel);
        out << ",";
        csv_opt(out, row.pkt_num);
        out << ",";
        csv_opt(out, row.backup);
        out << "\n";
    }
}

void write_complexity_csv(std::ostream& out, std::span<const sweep::ComplexityRow> rows, int K,
                          int taps, int n_h, std::uint64_t seed) {
    out << "# crnsim complexity report v1\n";
    out << "# K=" << K << " taps=" << taps << " n_h=" << n_h << " seed=" << seed << "\n";
    out << "estimator,complex_mults,complex_adds,solves\n";
    for (const auto& row : rows) {
        out << est::estimator_name(row.kind) << "," << row.cost.complex_mults << ","
            << row.cost.complex_adds << "," << row.solves << "\n";
    }
}

} // namespace crn::report
