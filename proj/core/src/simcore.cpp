#include "crn/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "crn/ddce.hpp"
#include "crn/hash.hpp"
#include "crn/stats.hpp"

namespace crn::sim {

double power_limit(int channel, std::span<const int> pu_channels, const PowerParams& params) {
    double cap = params.max_power;
    for (int p : pu_channels) {
        const int d = std::abs(channel - p);
        if (d == 0) return 0.0; // PU on the channel itself
        if (d > params.leak_radius) continue;
        const double allowed = params.mask / std::pow(params.leak_per_channel, d);
        cap = std::min(cap, allowed);
    }
    return std::max(0.0, cap);
}

double packet_error_rate(double ser, double symbols_per_packet, double fec_fraction) {
    if (ser < 0.0 || ser > 1.0) throw std::invalid_argument("SER out of [0,1]");
    if (symbols_per_packet <= 0.0) return 0.0;
    const double correctable = std::floor(fec_fraction * symbols_per_packet);
    return stats::binomial_tail_above(symbols_per_packet, ser, correctable);
}

SerModel::SerModel(const Scenario& scenario, std::uint64_t seed) {
    for (double snr = -10.0; snr <= 40.0 + 1e-9; snr += 5.0) grid_db_.push_back(snr);

    ddce::TrialConfig trial;
    trial.ddce.K = scenario.K;
    trial.ddce.scheme = scenario.scheme;
    trial.ddce.kind = scenario.estimator;
    trial.n_data_symbols = scenario.ser_table_symbols;
    // the ML family keeps its pilot comb on data symbols
    if ((scenario.estimator == est::EstimatorKind::ml_cls ||
         scenario.estimator == est::EstimatorKind::cr_ml) &&
        scenario.K % 4 == 0 && scenario.K / 4 >= scenario.cir_taps)
        trial.ddce.data_comb = est::PilotPattern::comb(4);

    const auto profile = bb::exponential_profile(scenario.cir_taps);
    for (std::size_t i = 0; i < grid_db_.size(); ++i) {
        const double snr_lin = std::pow(10.0, grid_db_[i] / 10.0);
        const double sigma_w_sq = 1.0 / snr_lin;
        trial.ddce.params = est::make_params(sigma_w_sq, profile, scenario.cir_taps);

        std::int64_t errors = 0;
        std::int64_t symbols = 0;
        for (int f = 0; f < scenario.ser_table_frames; ++f) {
            const auto result =
                ddce::run_ser_trial(trial, derive_seed(seed, i * 1024 + static_cast<std::size_t>(f)));
            errors += result.symbol_errors;
            symbols += result.symbols_counted;
            build_cost_ += result.cost;
        }
        ser_.push_back(symbols > 0 ? static_cast<double>(errors) / static_cast<double>(symbols)
                                   : 0.0);
    }
}

double SerModel::ser_at(double snr_db) const {
    if (grid_db_.empty()) return 0.0;
    if (snr_db <= grid_db_.front()) return ser_.front();
    if (snr_db >= grid_db_.back()) return ser_.back();
    std::size_t i = 1;
    while (i < grid_db_.size() && grid_db_[i] < snr_db) ++i;
    const double t = (snr_db - grid_db_[i - 1]) / (grid_db_[i] - grid_db_[i - 1]);
    return ser_[i - 1] + t * (ser_[i] - ser_[i - 1]);
}

SubframeAssignment subframe_schedule(std::span<const ScheduleRequest> requests, int n_subframes,
                                     int frame_index) {
    if (n_subframes < 1) throw std::invalid_argument("need at least one sub-frame");

    SubframeAssignment out;
    out.owner.assign(static_cast<std::size_t>(n_subframes), -1);

    std::vector<ScheduleRequest> eligible;
    for (const ScheduleRequest& r : requests) {
        if (r.deadline_subframes < 1)
            out.denied.push_back(r.link);
        else
            eligible.push_back(r);
    }
    if (eligible.empty()) return out;

    // earliest deadline first, stable on link id
    std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
        if (a.deadline_subframes != b.deadline_subframes)
            return a.deadline_subframes < b.deadline_subframes;
        return a.link < b.link;
    });

    // per-frame round robin inside equal-deadline groups
    std::size_t start = 0;
    while (start < eligible.size()) {
        std::size_t end = start;
        while (end < eligible.size() &&
               eligible[end].deadline_subframes == eligible[start].deadline_subframes)
            ++end;
        const std::size_t len = end - start;
        if (len > 1)
            std::rotate(eligible.begin() + static_cast<std::ptrdiff_t>(start),
                        eligible.begin() + static_cast<std::ptrdiff_t>(
                                               start + (static_cast<std::size_t>(frame_index) % len)),
                        eligible.begin() + static_cast<std::ptrdiff_t>(end));
        start = end;
    }

    const std::size_t n = eligible.size();
    for (int s = 0; s < n_subframes; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cand = eligible[(static_cast<std::size_t>(s) + i) % n];
            if (s < cand.deadline_subframes) {
                out.owner[static_cast<std::size_t>(s)] = cand.link;
                break;
            }
        }
    }
    return out;
}

namespace {

struct Event {
    enum class Kind {
        pu_toggle,   // a: channel, b: 1=on 0=off
        su_arrival,  // a: pair
        msg_delivery,// msg set; b: destination node (-1 = broadcast handled per node)
        cts_timeout, // a: pair, b: token
        retry,       // a: pair
        packet_done, // a: pair, b: epoch
        reauth       // a: node
    };

    double time = 0.0;
    std::int64_t seq = 0;
    Kind kind = Kind::pu_toggle;
    int a = -1;
    int b = -1;
    std::optional<mac::ControlMessage> msg;
};

struct EventAfter {
    bool operator()(const Event& lhs, const Event& rhs) const {
        if (lhs.time != rhs.time) return lhs.time > rhs.time;
        return lhs.seq > rhs.seq;
    }
};

struct LinkState {
    bool active = false;
    int channel = -1;
    std::optional<int> backup;
    int remaining = 0;
    int epoch = 0;
    double snr_db = 0.0;
};

void validate(const Scenario& s) {
    if (s.n_channels < 1) throw std::invalid_argument("n_channels must be positive");
    if (s.n_channels * s.channel_bw_hz > s.band_hz + 1e-9)
        throw std::invalid_argument("channel plan exceeds the licensed band");
    if (s.n_pu < 0 || s.n_pu > s.n_channels)
        throw std::invalid_argument("n_pu must lie in [0, n_channels]");
    if (s.n_su_pairs < 0) throw std::invalid_argument("n_su_pairs must be non-negative");
    if (s.duration_s <= 0.0) throw std::invalid_argument("duration must be positive");
    if (static_cast<int>(s.rates_bps.size()) != s.n_channels && s.rates_bps.size() != 1)
        throw std::invalid_argument("rates_bps must cover every channel");
    if (static_cast<int>(s.link_snr_db.size()) != std::max(1, s.n_su_pairs) &&
        s.link_snr_db.size() != 1)
        throw std::invalid_argument("link_snr_db must cover every pair");
    if (static_cast<int>(s.pair_delay_class.size()) != std::max(1, s.n_su_pairs) &&
        !s.pair_delay_class.empty())
        throw std::invalid_argument("pair_delay_class must cover every pair");
    if (s.pkt_size_bits <= 0.0) throw std::invalid_argument("pkt_size must be positive");
    if (s.threshold <= 0.0 || s.threshold >= 1.0)
        throw std::invalid_argument("threshold must lie in (0,1)");
    if (s.class_deadlines.empty()) throw std::invalid_argument("need at least one delay class");
    for (const auto* means : {&s.pu_mean_on_s, &s.pu_mean_off_s}) {
        if (means->empty() ||
            (means->size() != 1 && static_cast<int>(means->size()) != s.n_channels))
            throw std::invalid_argument("PU activity must be scalar or per-channel");
        for (double v : *means)
            if (v <= 0.0) throw std::invalid_argument("PU holding times must be positive");
    }
}

class Engine {
  public:
    explicit Engine(const Scenario& s)
        : s_(s),
          rate_(s.rates_bps.size() == 1
                    ? std::vector<double>(static_cast<std::size_t>(s.n_channels), s.rates_bps[0])
                    : s.rates_bps),
          snr_(s.link_snr_db.size() == 1
                   ? std::vector<double>(static_cast<std::size_t>(std::max(1, s.n_su_pairs)),
                                         s.link_snr_db[0])
                   : s.link_snr_db),
          registry_(derive_seed(s.seed, 6)),
          env_rng_(derive_seed(s.seed, 1)),
          mac_rng_(derive_seed(s.seed, 2)),
          phy_rng_(derive_seed(s.seed, 3)),
          ser_model_(s, derive_seed(s.seed, 4)) {}

    Metrics run();

  private:
    using Variant = mac::ControlMessage::Variant;

    void push(double time, Event::Kind kind, int a, int b,
              std::optional<mac::ControlMessage> msg = std::nullopt) {
        queue_.push(Event{time, seq_++, kind, a, b, std::move(msg)});
    }

    bool busy(int ch) const {
        return pu_on_[static_cast<std::size_t>(ch)] || su_link_[static_cast<std::size_t>(ch)] >= 0;
    }

    void touch(int ch, double now) {
        if (busy(ch)) busy_integral_[static_cast<std::size_t>(ch)] += now - last_change_[static_cast<std::size_t>(ch)];
        last_change_[static_cast<std::size_t>(ch)] = now;
    }

    double busy_integral_at(int ch, double now) const {
        double v = busy_integral_[static_cast<std::size_t>(ch)];
        if (busy(ch)) v += now - last_change_[static_cast<std::size_t>(ch)];
        return v;
    }

    std::vector<mac::Occupancy> snapshot() const {
        std::vector<mac::Occupancy> occ(static_cast<std::size_t>(s_.n_channels));
        for (int c = 0; c < s_.n_channels; ++c) {
            if (pu_on_[static_cast<std::size_t>(c)]) occ[static_cast<std::size_t>(c)] = mac::Occupancy::pu_busy;
            else if (su_link_[static_cast<std::size_t>(c)] >= 0) occ[static_cast<std::size_t>(c)] = mac::Occupancy::su_busy;
            else occ[static_cast<std::size_t>(c)] = mac::Occupancy::free;
        }
        return occ;
    }

    void node_senses(int node, double now) {
        const auto occ = snapshot();
        nodes_[static_cast<std::size_t>(node)].sense(occ, now);

        std::vector<double> u_hat(static_cast<std::size_t>(s_.n_channels), 0.0);
        const double last = sense_time_[static_cast<std::size_t>(node)];
        const double dt = now - last;
        if (dt > 0.0) {
            for (int c = 0; c < s_.n_channels; ++c) {
                const double seen = busy_integral_at(c, now) -
                                    sense_mark_[static_cast<std::size_t>(node)][static_cast<std::size_t>(c)];
                u_hat[static_cast<std::size_t>(c)] = std::clamp(seen / dt, 0.0, 1.0);
            }
        }
        nodes_[static_cast<std::size_t>(node)].observe_utilization(u_hat, now);
        for (int c = 0; c < s_.n_channels; ++c)
            sense_mark_[static_cast<std::size_t>(node)][static_cast<std::size_t>(c)] = busy_integral_at(c, now);
        sense_time_[static_cast<std::size_t>(node)] = now;
    }

    bool authenticated(int node, double now) const {
        return registry_.authenticate(credentials_[static_cast<std::size_t>(node)], now);
    }

    void record(const mac::ControlMessage& msg, double now) {
        TraceRow row;
        row.time = now;
        switch (msg.variant) {
        case Variant::rts: row.variant = "RTS"; break;
        case Variant::cts: row.variant = "CTS"; break;
        case Variant::crts: row.variant = "CRTS"; break;
        }
        row.sender = msg.sender;
        row.receiver = msg.receiver;
        if (msg.variant != Variant::rts) {
            row.channel = msg.selected;
            row.pkt_num = msg.max_pkt_num;
            if (msg.backup) row.backup = *msg.backup;
        }
        m_.trace.push_back(std::move(row));
    }

    void violation(const std::string& what) {
        m_.monitor_violation = true;
        m_.violations.push_back(what);
    }

    double pkt_time(int ch) const { return s_.pkt_size_bits / rate_[static_cast<std::size_t>(ch)]; }

    static double at_or_first(const std::vector<double>& v, int i) {
        return v.size() == 1 ? v[0] : v[static_cast<std::size_t>(i)];
    }

    int pair_class(int pair) const {
        if (s_.pair_delay_class.empty()) return 0;
        return s_.pair_delay_class[static_cast<std::size_t>(pair)];
    }

    double symbols_per_packet() const {
        return s_.pkt_size_bits / bb::bits_per_symbol(s_.scheme);
    }

    void handle_arrival(int pair, double now, bool fresh);
    void handle_rts(const mac::ControlMessage& rts, double now);
    void handle_cts(const mac::ControlMessage& cts, double now);
    void handle_packet(int pair, int epoch, double now);
    void handle_pu_toggle(int ch, bool on, double now);
    void finish_link(int pair, double now);
    void refresh_schedule(int frame_index);

    const Scenario& s_;
    std::vector<double> rate_;
    std::vector<double> snr_;

    mac::CredentialRegistry registry_;
    std::vector<mac::Credential> credentials_;
    std::vector<mac::Node> nodes_;

    bb::Rng env_rng_;
    bb::Rng mac_rng_;
    bb::Rng phy_rng_;
    SerModel ser_model_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::int64_t seq_ = 0;

    std::vector<bool> pu_on_;
    std::vector<int> su_link_; // owning pair per channel, -1 = none
    std::vector<double> busy_integral_;
    std::vector<double> last_change_;

    std::vector<double> sense_time_;
    std::vector<std::vector<double>> sense_mark_;

    std::vector<LinkState> links_;
    std::vector<int> await_token_;
    std::vector<int> request_count_;
    std::vector<std::vector<double>> pending_channel_snr_; // per pair, per channel
    std::vector<double> delivered_bits_;
    std::vector<double> snr_sum_;
    std::vector<std::int64_t> snr_grants_;

    SubframeAssignment schedule_;
    int grants_seen_ = 0;

    Metrics m_;
};

void Engine::handle_arrival(int pair, double now, bool fresh) {
    mac::Node& a = nodes_[static_cast<std::size_t>(2 * pair)];
    if (a.state() != mac::NodeState::idle || links_[static_cast<std::size_t>(pair)].active) {
        if (fresh) ++m_.busy_skips;
        return;
    }
    if (!authenticated(a.id(), now)) {
        ++m_.auth_rejections;
        return;
    }
    const int cls = pair_class(pair);
    if (s_.class_deadlines[static_cast<std::size_t>(cls)] < 1) {
        ++m_.infeasible_deadline;
        return;
    }

    node_senses(a.id(), now);
    const std::vector<int> free = a.free_channels(now);
    if (free.empty()) {
        ++m_.no_channel;
        return;
    }

    // power caps, then link quality at the capped SNR
    std::vector<int> pu_channels;
    for (int c = 0; c < s_.n_channels; ++c)
        if (pu_on_[static_cast<std::size_t>(c)]) pu_channels.push_back(c);

    std::vector<int> usable;
    auto& channel_snr = pending_channel_snr_[static_cast<std::size_t>(pair)];
    channel_snr.assign(static_cast<std::size_t>(s_.n_channels), -1e9);
    bool quality_pruned = false;
    for (int ch : free) {
        double cap = s_.power.max_power;
        if (s_.power.enabled) cap = power_limit(ch, pu_channels, s_.power);
        if (cap <= 0.0) continue;
        const double snr = snr_[static_cast<std::size_t>(pair)] + 10.0 * std::log10(cap);
        if (ser_model_.ser_at(snr) > s_.max_ser) {
            quality_pruned = true;
            continue;
        }
        channel_snr[static_cast<std::size_t>(ch)] = snr;
        usable.push_back(ch);
    }
    if (usable.empty()) {
        if (quality_pruned) ++m_.quality_denials;
        else ++m_.no_channel;
        return;
    }

    // switching pattern over the usable set, derivable at both ends
    const std::uint64_t pattern_seed =
        derive_seed(s_.seed, 100 + static_cast<std::uint64_t>(pair));
    const auto pattern = mac::derive_switch_pattern(
        pattern_seed, static_cast<int>(usable.size()),
        static_cast<std::uint64_t>(request_count_[static_cast<std::size_t>(pair)]++));
    std::vector<int> ordered;
    for (int idx : pattern) ordered.push_back(usable[static_cast<std::size_t>(idx)]);

    auto rts = a.on_link_request(2 * pair + 1, now, ordered);
    if (!rts) {
        ++m_.handshake_failures;
        return;
    }
    record(*rts, now);
    push(now + s_.ctrl_latency_s, Event::Kind::msg_delivery, pair, -1, std::move(*rts));

    const int token = ++await_token_[static_cast<std::size_t>(pair)];
    push(now + 4.0 * s_.ctrl_latency_s + 1e-6, Event::Kind::cts_timeout, pair, token);
}

void Engine::handle_rts(const mac::ControlMessage& rts, double now) {
    mac::Node& b = nodes_[static_cast<std::size_t>(rts.receiver)];
    if (!authenticated(rts.sender, now)) {
        ++m_.auth_rejections; // rejected nodes get no RTS processing
        return;
    }
    node_senses(b.id(), now);
    auto cts = b.on_rts(rts, now, mac_rng_, s_.selection == SelectionPolicy::cetp);
    if (!cts) return; // silence; the initiator's CTS timer expires
    if (cts->max_pkt_num < 1) {
        violation("CTS with zero max_pkt_num");
        return;
    }
    record(*cts, now);
    push(now + s_.ctrl_latency_s, Event::Kind::msg_delivery, rts.sender / 2, -1, std::move(*cts));
}

void Engine::handle_cts(const mac::ControlMessage& cts, double now) {
    const int pair = cts.receiver / 2;
    mac::Node& a = nodes_[static_cast<std::size_t>(cts.receiver)];
    mac::Node& b = nodes_[static_cast<std::size_t>(cts.sender)];

    // continuous sensing: refresh the initiator's view before confirming
    node_senses(a.id(), now);
    auto crts = a.on_cts(cts, now);
    if (!crts) return; // declined; the CTS timer drives the backoff retry

    // monitor: grant safety at the instant of confirmation
    const int ch = cts.selected;
    if (pu_on_[static_cast<std::size_t>(ch)])
        violation("grant on a PU-occupied channel " + std::to_string(ch));
    if (!a.table()[static_cast<std::size_t>(ch)].is_free(now) ||
        !b.table()[static_cast<std::size_t>(ch)].is_free(now))
        violation("grant on a channel not free in both tables");
    if (!authenticated(a.id(), now) || !authenticated(b.id(), now))
        violation("grant involving an unauthenticated node");

    record(*crts, now);
    ++await_token_[static_cast<std::size_t>(pair)]; // cancels the pending timeout

    // the initiator hears its own broadcast immediately; everyone else after
    // the control latency
    a.on_crts(*crts, now);
    for (const mac::Node& n : nodes_) {
        if (n.id() == a.id()) continue;
        push(now + s_.ctrl_latency_s, Event::Kind::msg_delivery, pair, n.id(), *crts);
    }

    LinkState& link = links_[static_cast<std::size_t>(pair)];
    link.active = true;
    link.channel = ch;
    link.backup = crts->backup;
    link.remaining = crts->max_pkt_num;
    link.epoch++;
    link.snr_db = pending_channel_snr_[static_cast<std::size_t>(pair)][static_cast<std::size_t>(ch)];

    touch(ch, now);
    su_link_[static_cast<std::size_t>(ch)] = pair;
    ++m_.grants;
    snr_sum_[static_cast<std::size_t>(pair)] += link.snr_db;
    ++snr_grants_[static_cast<std::size_t>(pair)];
    refresh_schedule(++grants_seen_);

    push(now + pkt_time(ch), Event::Kind::packet_done, pair, link.epoch);
}

void Engine::handle_packet(int pair, int epoch, double now) {
    LinkState& link = links_[static_cast<std::size_t>(pair)];
    if (!link.active || link.epoch != epoch) return;

    const int ch = link.channel;
    ++m_.tx_packets[static_cast<std::size_t>(ch)];

    const double ser = ser_model_.ser_at(link.snr_db);
    const double per = packet_error_rate(ser, symbols_per_packet(), s_.fec_fraction);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(phy_rng_) >= per) {
        if (pu_on_[static_cast<std::size_t>(ch)])
            violation("packet delivered on a PU-occupied channel");
        ++m_.rx_packets[static_cast<std::size_t>(ch)];
        delivered_bits_[static_cast<std::size_t>(pair)] += s_.pkt_size_bits;
    }

    if (--link.remaining > 0) {
        push(now + pkt_time(ch), Event::Kind::packet_done, pair, epoch);
    } else {
        finish_link(pair, now);
    }
}

void Engine::finish_link(int pair, double now) {
    LinkState& link = links_[static_cast<std::size_t>(pair)];
    if (!link.active) return;
    touch(link.channel, now);
    su_link_[static_cast<std::size_t>(link.channel)] = -1;
    link.active = false;
    link.epoch++;
    nodes_[static_cast<std::size_t>(2 * pair)].end_link(now);
    nodes_[static_cast<std::size_t>(2 * pair + 1)].end_link(now);
    refresh_schedule(++grants_seen_);
}

void Engine::handle_pu_toggle(int ch, bool on, double now) {
    touch(ch, now);
    pu_on_[static_cast<std::size_t>(ch)] = on;
    if (!on) return;

    const int pair = su_link_[static_cast<std::size_t>(ch)];
    if (pair < 0) return;

    ++m_.pu_preemptions;
    LinkState& link = links_[static_cast<std::size_t>(pair)];
    const bool backup_usable = link.backup && !pu_on_[static_cast<std::size_t>(*link.backup)] &&
                               su_link_[static_cast<std::size_t>(*link.backup)] < 0;
    if (backup_usable) {
        ++m_.backup_switches;
        const int next = *link.backup;
        su_link_[static_cast<std::size_t>(ch)] = -1;
        touch(next, now);
        su_link_[static_cast<std::size_t>(next)] = pair;
        link.channel = next;
        link.backup.reset();
        link.epoch++; // the in-flight packet is aborted, neither sent nor lost
        link.snr_db = pending_channel_snr_[static_cast<std::size_t>(pair)][static_cast<std::size_t>(next)];
        nodes_[static_cast<std::size_t>(2 * pair)].switch_to_backup(now);
        nodes_[static_cast<std::size_t>(2 * pair + 1)].switch_to_backup(now);
        push(now + pkt_time(next), Event::Kind::packet_done, pair, link.epoch);
    } else {
        ++m_.forced_terminations;
        su_link_[static_cast<std::size_t>(ch)] = -1;
        link.active = false;
        link.epoch++;
        nodes_[static_cast<std::size_t>(2 * pair)].end_link(now);
        nodes_[static_cast<std::size_t>(2 * pair + 1)].end_link(now);
        refresh_schedule(++grants_seen_);
    }
}

void Engine::refresh_schedule(int frame_index) {
    std::vector<ScheduleRequest> requests;
    for (int p = 0; p < s_.n_su_pairs; ++p) {
        if (!links_[static_cast<std::size_t>(p)].active) continue;
        const int cls = pair_class(p);
        requests.push_back({p, s_.class_deadlines[static_cast<std::size_t>(cls)]});
    }
    schedule_ = subframe_schedule(requests, s_.n_subframes, frame_index);
}

Metrics Engine::run() {
    const int n_nodes = 2 * s_.n_su_pairs;

    pu_on_.assign(static_cast<std::size_t>(s_.n_channels), false);
    su_link_.assign(static_cast<std::size_t>(s_.n_channels), -1);
    busy_integral_.assign(static_cast<std::size_t>(s_.n_channels), 0.0);
    last_change_.assign(static_cast<std::size_t>(s_.n_channels), 0.0);
    sense_time_.assign(static_cast<std::size_t>(n_nodes), 0.0);
    sense_mark_.assign(static_cast<std::size_t>(n_nodes),
                       std::vector<double>(static_cast<std::size_t>(s_.n_channels), 0.0));
    links_.assign(static_cast<std::size_t>(std::max(1, s_.n_su_pairs)), LinkState{});
    await_token_.assign(links_.size(), 0);
    request_count_.assign(links_.size(), 0);
    pending_channel_snr_.assign(links_.size(), {});
    delivered_bits_.assign(links_.size(), 0.0);
    snr_sum_.assign(links_.size(), 0.0);
    snr_grants_.assign(links_.size(), 0);

    m_.tx_packets.assign(static_cast<std::size_t>(s_.n_channels), 0);
    m_.rx_packets.assign(static_cast<std::size_t>(s_.n_channels), 0);
    m_.link_throughput_bps.assign(links_.size(), 0.0);
    m_.link_mean_snr_db.assign(links_.size(), 0.0);

    // nodes and credentials
    std::vector<mac::ChannelRecord> base_table(static_cast<std::size_t>(s_.n_channels));
    for (int c = 0; c < s_.n_channels; ++c) {
        mac::ChannelRecord& rec = base_table[static_cast<std::size_t>(c)];
        rec.channel_id = c;
        rec.rate = rate_[static_cast<std::size_t>(c)];
        rec.pkt_size = s_.pkt_size_bits;
        rec.threshold = s_.threshold;
    }
    for (int n = 0; n < n_nodes; ++n) {
        nodes_.emplace_back(n, base_table, s_.cetp);
        const bool unauth = std::find(s_.unauthenticated_nodes.begin(),
                                      s_.unauthenticated_nodes.end(),
                                      n) != s_.unauthenticated_nodes.end();
        if (!unauth) registry_.enroll(n);
        credentials_.push_back(registry_.issue(n, s_.credential_lifetime_s));
    }

    // pre-generated environment: PU on/off processes, then SU arrivals
    for (int p = 0; p < s_.n_pu; ++p) {
        std::exponential_distribution<double> off(1.0 / at_or_first(s_.pu_mean_off_s, p));
        std::exponential_distribution<double> on(1.0 / at_or_first(s_.pu_mean_on_s, p));
        double t = off(env_rng_);
        while (t < s_.duration_s) {
            push(t, Event::Kind::pu_toggle, p, 1);
            const double hold = on(env_rng_);
            if (t + hold < s_.duration_s) push(t + hold, Event::Kind::pu_toggle, p, 0);
            t += hold + off(env_rng_);
        }
    }
    if (s_.su_arrival_rate_hz > 0.0) {
        for (int p = 0; p < s_.n_su_pairs; ++p) {
            std::exponential_distribution<double> gap(s_.su_arrival_rate_hz);
            double t = gap(env_rng_);
            while (t < s_.duration_s) {
                push(t, Event::Kind::su_arrival, p, 0);
                t += gap(env_rng_);
            }
        }
    }
    if (s_.t_auth_s > 0.0) {
        for (int n = 0; n < n_nodes; ++n)
            for (double t = s_.t_auth_s; t < s_.duration_s; t += s_.t_auth_s)
                push(t, Event::Kind::reauth, n, 0);
    }

    double now = 0.0;
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        if (ev.time > s_.duration_s) break;
        if (ev.time < now) {
            violation("event executed before its creation time");
            continue;
        }
        now = ev.time;

        switch (ev.kind) {
        case Event::Kind::pu_toggle:
            handle_pu_toggle(ev.a, ev.b == 1, now);
            break;
        case Event::Kind::su_arrival:
            handle_arrival(ev.a, now, true);
            break;
        case Event::Kind::retry:
            handle_arrival(ev.a, now, false);
            break;
        case Event::Kind::msg_delivery: {
            const mac::ControlMessage& msg = *ev.msg;
            switch (msg.variant) {
            case Variant::rts:
                handle_rts(msg, now);
                break;
            case Variant::cts:
                handle_cts(msg, now);
                break;
            case Variant::crts:
                if (ev.b >= 0) nodes_[static_cast<std::size_t>(ev.b)].on_crts(msg, now);
                break;
            }
            break;
        }
        case Event::Kind::cts_timeout: {
            if (ev.b != await_token_[static_cast<std::size_t>(ev.a)]) break; // stale
            mac::Node& a = nodes_[static_cast<std::size_t>(2 * ev.a)];
            if (a.state() != mac::NodeState::awaiting_cts) break;
            ++m_.handshake_failures;
            const bool retry = a.on_cts_timeout(now, s_.max_rts_attempts);
            if (retry) {
                std::uniform_real_distribution<double> jitter(0.0, 1.0);
                const double delay = s_.backoff_base_s *
                                     std::pow(2.0, a.cts_attempts() - 1) *
                                     (1.0 + jitter(mac_rng_));
                push(now + delay, Event::Kind::retry, ev.a, 0);
            }
            break;
        }
        case Event::Kind::packet_done:
            handle_packet(ev.a, ev.b, now);
            break;
        case Event::Kind::reauth: {
            // periodic credential refresh for enrolled nodes
            const int node = ev.a;
            if (authenticated(node, now))
                credentials_[static_cast<std::size_t>(node)] =
                    registry_.issue(node, now + s_.credential_lifetime_s);
            break;
        }
        }
    }

    for (std::size_t p = 0; p < links_.size(); ++p) {
        m_.link_throughput_bps[p] = delivered_bits_[p] / s_.duration_s;
        if (snr_grants_[p] > 0)
            m_.link_mean_snr_db[p] = snr_sum_[p] / static_cast<double>(snr_grants_[p]);
    }
    m_.ser_table_snr_db = ser_model_.grid_db();
    m_.ser_table = ser_model_.table();
    m_.phy_cost = ser_model_.build_cost();
    m_.aggregate_throughput_bps =
        std::accumulate(m_.link_throughput_bps.begin(), m_.link_throughput_bps.end(), 0.0);

    for (int c = 0; c < s_.n_channels; ++c) {
        if (m_.rx_packets[static_cast<std::size_t>(c)] > m_.tx_packets[static_cast<std::size_t>(c)])
            violation("rx exceeds tx on channel " + std::to_string(c));
    }
    return m_;
}

} // namespace

Metrics run(const Scenario& scenario) {
    validate(scenario);
    Engine engine(scenario);
    return engine.run();
}

} // namespace crn::sim
