#ifndef CRN_REPORT_HPP
#define CRN_REPORT_HPP

#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "crn/simcore.hpp"
#include "crn/sweep.hpp"

namespace crn::report {

/// Stable fingerprint of a config file's raw bytes, for CSV header comments.
std::string config_fingerprint(std::string_view config_text);

/// columns: snr_db,estimator,ser,ci_low,ci_high,mults_per_symbol
void write_ser_sweep_csv(std::ostream& out, const sweep::SweepConfig& config,
                         std::span<const sweep::SweepPoint> points, std::string_view config_hash);

/// columns: scope,id,tx_packets,rx_packets,ratio,throughput_bps
void write_metrics_csv(std::ostream& out, const sim::Scenario& scenario,
                       const sim::Metrics& metrics, std::string_view config_hash);

/// columns: time,variant,sender,receiver,channel,pkt_num,backup
void write_trace_csv(std::ostream& out, const sim::Metrics& metrics,
                     std::string_view config_hash, std::uint64_t seed);

/// columns: estimator,complex_mults,complex_adds,solves
void write_complexity_csv(std::ostream& out, std::span<const sweep::ComplexityRow> rows,
                          int K, int taps, int n_h, std::uint64_t seed);

} // namespace crn::report

#endif
