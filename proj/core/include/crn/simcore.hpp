#ifndef CRN_SIMCORE_HPP
#define CRN_SIMCORE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crn/baseband.hpp"
#include "crn/counters.hpp"
#include "crn/estimators.hpp"
#include "crn/mac.hpp"

namespace crn::sim {

enum class SelectionPolicy {
    cetp,          // max-min packet scoring (the endorsement policy)
    uniform_random // uniform pick among usable common channels
};

struct PowerParams {
    bool enabled = true;
    double max_power = 1.0;       // linear transmit cap, SNR reference = 1.0
    double mask = 1e-4;           // max leaked power tolerated at a PU channel
    double leak_per_channel = 1e-2; // attenuation per channel of separation
    int leak_radius = 2;          // separations beyond this leak nothing
};

struct Scenario {
    int version = 1;

    // spectrum
    int n_channels = 100;
    double channel_bw_hz = 6e6;
    double band_hz = 600e6;

    // population
    int n_pu = 100;      // primary user i toggles channel i
    int n_su_pairs = 4;  // pair p = nodes (2p, 2p+1)

    // activity; on/off means broadcast from a scalar when size 1
    std::vector<double> pu_mean_on_s{0.5};
    std::vector<double> pu_mean_off_s{0.5};
    double su_arrival_rate_hz = 1.0; // per pair
    double duration_s = 10.0;
    std::uint64_t seed = 1;

    // per-channel data plane
    std::vector<double> rates_bps; // broadcast from a scalar when size 1
    double pkt_size_bits = 8000.0;
    double threshold = 0.3;

    // per-pair link quality at unit transmit power
    std::vector<double> link_snr_db; // broadcast from a scalar when size 1

    mac::CetpParams cetp;
    SelectionPolicy selection = SelectionPolicy::cetp;
    PowerParams power;

    // PHY coupling
    est::EstimatorKind estimator = est::EstimatorKind::cr_mmse;
    int K = 64;
    int cir_taps = 4;
    bb::Modulation scheme = bb::Modulation::bpsk;
    double max_ser = 0.2;        // admission gate on the estimated SER
    double fec_fraction = 0.02;  // correctable symbol fraction per packet
    int ser_table_frames = 6;    // trials per SNR grid point
    int ser_table_symbols = 30;  // data symbols per trial

    // control channel
    double ctrl_latency_s = 1e-4;
    int max_rts_attempts = 3;
    double backoff_base_s = 1e-3;

    // security
    double t_auth_s = 5.0;
    double credential_lifetime_s = 1e9;
    std::vector<int> unauthenticated_nodes;

    // power-aware scheduling
    int n_subframes = 4;
    std::vector<int> class_deadlines{4}; // sub-frames available to each class
    std::vector<int> pair_delay_class;   // per pair, default class 0
};

/// Parse and validate the key-value scenario text (JSON, versioned).
/// Unknown keys and malformed values are rejected before any event runs.
Scenario scenario_from_json(const std::string& text);

struct TraceRow {
    double time = 0.0;
    std::string variant; // RTS / CTS / CRTS
    int sender = -1;
    int receiver = -1;
    int channel = -1;   // -1 = not applicable
    int pkt_num = -1;   // -1 = not applicable
    int backup = -1;    // -1 = none
};

struct Metrics {
    std::vector<std::int64_t> tx_packets; // per channel
    std::vector<std::int64_t> rx_packets; // per channel
    std::vector<double> link_throughput_bps; // per pair
    std::vector<double> link_mean_snr_db;    // per pair, mean over grants
    double aggregate_throughput_bps = 0.0;

    std::int64_t grants = 0;
    std::int64_t auth_rejections = 0;
    std::int64_t forced_terminations = 0;
    std::int64_t backup_switches = 0;
    std::int64_t pu_preemptions = 0; // PU arrivals hitting an active link
    std::int64_t no_channel = 0;
    std::int64_t quality_denials = 0;
    std::int64_t infeasible_deadline = 0;
    std::int64_t busy_skips = 0;
    std::int64_t handshake_failures = 0;

    std::vector<TraceRow> trace;

    // PHY coupling diagnostics: the SER-vs-SNR table the grants were judged
    // against and the arithmetic spent building it
    std::vector<double> ser_table_snr_db;
    std::vector<double> ser_table;
    MultCounter phy_cost;

    bool monitor_violation = false;
    std::vector<std::string> violations;

    double ratio(int channel) const {
        const auto tx = tx_packets[static_cast<std::size_t>(channel)];
        if (tx == 0) return 0.0;
        return static_cast<double>(rx_packets[static_cast<std::size_t>(channel)]) /
               static_cast<double>(tx);
    }
};

/// Transmit power cap keeping the modeled leakage at every PU-occupied
/// channel within `leak_radius` below the mask. 0 marks the channel unusable.
double power_limit(int channel, std::span<const int> pu_channels, const PowerParams& params);

/// Residual packet error probability after the abstract-FEC threshold:
/// a packet survives when at most fec_fraction of its symbols err.
double packet_error_rate(double ser, double symbols_per_packet, double fec_fraction);

/// Deterministic SER-vs-SNR lookup built from seeded decision-directed
/// trials of the configured estimator; linear interpolation between grid
/// points, clamped at the grid edges.
class SerModel {
  public:
    SerModel() = default;
    SerModel(const Scenario& scenario, std::uint64_t seed);

    double ser_at(double snr_db) const;
    const std::vector<double>& grid_db() const { return grid_db_; }
    const std::vector<double>& table() const { return ser_; }
    const MultCounter& build_cost() const { return build_cost_; }

  private:
    std::vector<double> grid_db_;
    std::vector<double> ser_;
    MultCounter build_cost_;
};

struct ScheduleRequest {
    int link = 0;
    int deadline_subframes = 0; // sub-frames the class tolerates
};

struct SubframeAssignment {
    std::vector<int> owner; // per sub-frame link id, -1 = idle
    std::vector<int> denied; // infeasible requests (deadline < 1)
};

/// Earliest-deadline-first sub-frame ownership with per-frame round robin
/// inside equal-deadline groups. A link never owns a sub-frame at or past
/// its deadline.
SubframeAssignment subframe_schedule(std::span<const ScheduleRequest> requests, int n_subframes,
                                     int frame_index);

/// Execute the scenario's event loop; identical seeds yield identical
/// Metrics and control traces.
Metrics run(const Scenario& scenario);

} // namespace crn::sim

#endif
