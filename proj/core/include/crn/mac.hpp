#ifndef CRN_MAC_HPP
#define CRN_MAC_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

namespace crn::mac {

using Rng = std::mt19937_64;

enum class ChannelStatus { free, busy };

/// One row of a node's channel state table.
struct ChannelRecord {
    int channel_id = 0;
    ChannelStatus status = ChannelStatus::free;
    bool pu_occupied = false; // busy with no timer; PUs send no control messages
    bool has_timer = false;
    bool reserved = false;   // timer came from a CRTS duration ID; sensing a
                             // momentarily silent channel does not clear it
    double busy_until = 0.0; // absolute release time when has_timer
    double u_t = 0.0;        // EWMA utilization
    double rate = 0.0;       // bits/s
    double pkt_size = 0.0;   // bits
    double threshold = 0.3;

    /// remaining timer at `now`; 0 when free or PU-occupied
    double release_timer(double now) const;
    bool is_free(double now) const;
};

enum class Occupancy { free, su_busy, pu_busy };

enum class PktNumScheme {
    canonical, // time budget converted to bits through the channel rate
    literal    // the printed slot-minus-overhead expression
};

struct CetpParams {
    double alpha = 0.5;          // utilization smoothing
    double beta = 1.0;           // packet-count weighting
    double lc = 0.0;             // control overhead (bits in canonical mode)
    double slot_duration = 1e-3; // seconds
    int max_slots = 10;
    PktNumScheme scheme = PktNumScheme::canonical;
};

/// Sensing refresh of a channel state table. Free channels that turned SU
/// busy get the one-packet timer; PU occupancy is timer-less; channels
/// re-sensed busy keep their timer.
void update_cst(std::vector<ChannelRecord>& table, std::span<const Occupancy> snapshot,
                double now);

/// u_t = alpha * u_prev + (1 - alpha) * u_hat
double ewma_utilization(double u_prev, double u_hat, double alpha);

/// Largest s >= 0 with 1 - (1 - u_t)^s < threshold, capped at max_slots.
int slot_count(double u_t, double threshold, int max_slots);

/// Packets that fit into `slots` on this channel, floor-rounded, clamped at 0.
int pkt_num(const ChannelRecord& channel, int slots, const CetpParams& params);

struct ChannelScore {
    int channel = 0;
    int pkt_num_tran = 0;
    int pkt_num_recv = 0;
    double rate = 0.0;
};

struct Selection {
    int channel = 0;
    int max_pkt_num = 0;
};

/// argmax over channels of min(pkt_num_tran, pkt_num_recv); ties broken by
/// higher rate, then by seeded uniform choice. Empty when the best value is 0.
std::optional<Selection> select_channel(std::span<const ChannelScore> overlap, Rng& rng);

/// Runner-up under the same score, excluding the already selected channel.
std::optional<int> reserve_backup(std::span<const ChannelScore> overlap, int selected, Rng& rng);

struct RtsEntry {
    int channel = 0;
    int pkt_num = 0; // transmitter-side packet budget
};

struct ControlMessage {
    enum class Variant { rts, cts, crts };

    Variant variant = Variant::rts;
    int sender = -1;
    int receiver = -1;
    std::vector<RtsEntry> free_list;  // RTS
    int selected = -1;                // CTS / CRTS
    int max_pkt_num = 0;              // CTS / CRTS, never 0 on the wire
    std::optional<int> backup;        // CTS proposal echoed into CRTS
    double release_time = 0.0;        // CRTS duration identification
};

struct Credential {
    int node_id = -1;
    std::uint64_t token = 0;
    double valid_until = 0.0;
};

/// Keyed-token registry standing in for the digital-signature step. Expired
/// or unknown credentials never authenticate.
class CredentialRegistry {
  public:
    explicit CredentialRegistry(std::uint64_t secret) : secret_(secret) {}

    void enroll(int node_id) { enrolled_.insert(node_id); }
    Credential issue(int node_id, double valid_until) const;
    bool authenticate(const Credential& credential, double now) const;

  private:
    std::uint64_t token_for(int node_id, double valid_until) const;

    std::uint64_t secret_;
    std::set<int> enrolled_;
};

/// Deterministic pseudorandom permutation of the free-band index set,
/// identical at both ends of a link sharing the secret.
std::vector<int> derive_switch_pattern(std::uint64_t shared_secret, int free_band_count,
                                       std::uint64_t seed);

enum class NodeState { idle, awaiting_cts, transmitting };

struct ActiveLink {
    int peer = -1;
    int channel = -1;
    std::optional<int> backup;
    int max_pkt_num = 0;
    double release_time = 0.0;
    bool initiator = false;
};

/// Protocol state machine for one CR node: CST upkeep plus the
/// RTS -> CTS -> CRTS exchange. Out-of-order messages are ignored and
/// counted, never acted on.
class Node {
  public:
    Node(int id, std::vector<ChannelRecord> table, CetpParams cetp);

    int id() const { return id_; }
    NodeState state() const { return state_; }
    const std::vector<ChannelRecord>& table() const { return table_; }
    std::vector<ChannelRecord>& table() { return table_; }
    const std::optional<ActiveLink>& link() const { return link_; }
    int ignored_messages() const { return ignored_; }
    int cts_attempts() const { return attempts_; }

    void sense(std::span<const Occupancy> snapshot, double now);
    void observe_utilization(std::span<const double> u_hat, double now);

    /// Channels currently free in the table, optionally ordered by a
    /// switching pattern over that set.
    std::vector<int> free_channels(double now) const;

    /// A side: build the RTS (free channels with their packet budgets). A
    /// non-empty candidate list narrows the set and fixes its order. Empty
    /// result when no usable channel remains.
    std::optional<ControlMessage> on_link_request(int receiver, double now,
                                                  std::span<const int> candidates = {});

    /// B side: score the overlap and answer with a CTS, or stay silent.
    /// use_cetp=false replaces the max-min scoring by a uniform pick among
    /// the usable common channels (the comparison baseline).
    std::optional<ControlMessage> on_rts(const ControlMessage& rts, double now, Rng& rng,
                                         bool use_cetp = true);

    /// A side: confirm the grant; returns the CRTS for broadcast.
    std::optional<ControlMessage> on_cts(const ControlMessage& cts, double now);

    /// Every hearer (including B): mark the granted and reserved channels
    /// busy until the advertised release time.
    void on_crts(const ControlMessage& crts, double now);

    /// A side: CTS never arrived. Returns true when another attempt is due.
    bool on_cts_timeout(double now, int max_attempts);

    /// Forced switch to the reserved backup; false when impossible.
    bool switch_to_backup(double now);

    void end_link(double now);

  private:
    int score_pkt_num(const ChannelRecord& record) const;

    int id_;
    std::vector<ChannelRecord> table_;
    CetpParams cetp_;
    NodeState state_ = NodeState::idle;
    std::optional<ActiveLink> link_;
    int pending_receiver_ = -1;
    int attempts_ = 0;
    int ignored_ = 0;
};

} // namespace crn::mac

#endif
