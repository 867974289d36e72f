#include "crn/mac.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "crn/hash.hpp"

namespace crn::mac {

double ChannelRecord::release_timer(double now) const {
    if (status != ChannelStatus::busy || !has_timer) return 0.0;
    return std::max(0.0, busy_until - now);
}

bool ChannelRecord::is_free(double now) const {
    if (status == ChannelStatus::free) return true;
    if (pu_occupied) return false;
    return has_timer && busy_until <= now;
}

void update_cst(std::vector<ChannelRecord>& table, std::span<const Occupancy> snapshot,
                double now) {
    if (snapshot.size() != table.size())
        throw std::invalid_argument("sensing snapshot does not cover all channels");

    for (std::size_t i = 0; i < table.size(); ++i) {
        ChannelRecord& rec = table[i];
        // expired timers release the channel before the new reading applies
        if (rec.status == ChannelStatus::busy && rec.has_timer && rec.busy_until <= now) {
            rec.status = ChannelStatus::free;
            rec.has_timer = false;
            rec.reserved = false;
            rec.busy_until = 0.0;
        }

        switch (snapshot[i]) {
        case Occupancy::free:
            // an unexpired CRTS reservation outlives a momentarily silent
            // reading; plain sensing timers are cleared
            if (rec.reserved && rec.has_timer && rec.busy_until > now) {
                rec.pu_occupied = false;
                break;
            }
            rec.status = ChannelStatus::free;
            rec.pu_occupied = false;
            rec.has_timer = false;
            rec.reserved = false;
            rec.busy_until = 0.0;
            break;
        case Occupancy::su_busy:
            if (rec.status == ChannelStatus::busy && !rec.pu_occupied) break; // no re-trigger
            rec.status = ChannelStatus::busy;
            rec.pu_occupied = false;
            rec.has_timer = true;
            rec.reserved = false;
            rec.busy_until = now + rec.pkt_size / rec.rate;
            break;
        case Occupancy::pu_busy:
            rec.status = ChannelStatus::busy;
            rec.pu_occupied = true;
            rec.has_timer = false;
            rec.reserved = false;
            rec.busy_until = 0.0;
            break;
        }
    }
}

double ewma_utilization(double u_prev, double u_hat, double alpha) {
    if (u_prev < 0.0 || u_prev > 1.0 || u_hat < 0.0 || u_hat > 1.0 || alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("utilization inputs must lie in [0,1]");
    return alpha * u_prev + (1.0 - alpha) * u_hat;
}

int slot_count(double u_t, double threshold, int max_slots) {
    if (u_t < 0.0 || u_t > 1.0) throw std::invalid_argument("utilization out of [0,1]");
    if (threshold <= 0.0 || threshold >= 1.0) throw std::invalid_argument("threshold out of (0,1)");
    if (max_slots < 0) throw std::invalid_argument("negative slot cap");

    const auto holds = [&](int s) { return 1.0 - std::pow(1.0 - u_t, s) < threshold; };

    if (u_t == 0.0) return max_slots; // inequality holds for every s

    int s = static_cast<int>(std::floor(std::log1p(-threshold) / std::log1p(-u_t)));
    s = std::clamp(s, 0, max_slots);
    // settle floating-point boundary cases against the defining inequality
    while (s > 0 && !holds(s)) --s;
    while (s < max_slots && holds(s + 1)) ++s;
    return s;
}

int pkt_num(const ChannelRecord& channel, int slots, const CetpParams& params) {
    if (slots < 0) throw std::invalid_argument("negative slot count");
    if (channel.rate <= 0.0 || channel.pkt_size <= 0.0)
        throw std::invalid_argument("channel rate and packet size must be positive");

    double value = 0.0;
    if (params.scheme == PktNumScheme::canonical) {
        value = params.beta * (slots * params.slot_duration * channel.rate - params.lc) /
                channel.pkt_size;
    } else {
        value = params.beta * (slots - params.lc / channel.pkt_size);
    }
    const double floored = std::floor(value);
    return floored < 0.0 ? 0 : static_cast<int>(floored);
}

std::optional<Selection> select_channel(std::span<const ChannelScore> overlap, Rng& rng) {
    int best = 0;
    for (const ChannelScore& s : overlap)
        best = std::max(best, std::min(s.pkt_num_tran, s.pkt_num_recv));
    if (best == 0) return std::nullopt;

    std::vector<const ChannelScore*> candidates;
    for (const ChannelScore& s : overlap)
        if (std::min(s.pkt_num_tran, s.pkt_num_recv) == best) candidates.push_back(&s);

    double top_rate = 0.0;
    for (const ChannelScore* s : candidates) top_rate = std::max(top_rate, s->rate);
    std::erase_if(candidates, [&](const ChannelScore* s) { return s->rate < top_rate; });

    const ChannelScore* pick = candidates.front();
    if (candidates.size() > 1) {
        std::uniform_int_distribution<std::size_t> uni(0, candidates.size() - 1);
        pick = candidates[uni(rng)];
    }
    return Selection{pick->channel, best};
}

std::optional<int> reserve_backup(std::span<const ChannelScore> overlap, int selected, Rng& rng) {
    std::vector<ChannelScore> rest;
    for (const ChannelScore& s : overlap)
        if (s.channel != selected) rest.push_back(s);
    const auto pick = select_channel(rest, rng);
    if (!pick) return std::nullopt;
    return pick->channel;
}

Credential CredentialRegistry::issue(int node_id, double valid_until) const {
    return Credential{node_id, token_for(node_id, valid_until), valid_until};
}

bool CredentialRegistry::authenticate(const Credential& credential, double now) const {
    if (!enrolled_.contains(credential.node_id)) return false;
    if (now > credential.valid_until) return false;
    return credential.token == token_for(credential.node_id, credential.valid_until);
}

std::uint64_t CredentialRegistry::token_for(int node_id, double valid_until) const {
    char buf[sizeof(int) + sizeof(double)];
    std::memcpy(buf, &node_id, sizeof(int));
    std::memcpy(buf + sizeof(int), &valid_until, sizeof(double));
    return fnv1a64(std::string_view(buf, sizeof(buf)), secret_);
}

std::vector<int> derive_switch_pattern(std::uint64_t shared_secret, int free_band_count,
                                       std::uint64_t seed) {
    if (free_band_count < 0) throw std::invalid_argument("negative band count");
    std::vector<int> pattern(static_cast<std::size_t>(free_band_count));
    std::iota(pattern.begin(), pattern.end(), 0);

    std::uint64_t state = shared_secret ^ (0xd6e8feb86659fd93ull * (seed + 1));
    for (int i = free_band_count - 1; i > 0; --i) {
        const std::uint64_t r = splitmix64(state);
        std::swap(pattern[static_cast<std::size_t>(i)],
                  pattern[static_cast<std::size_t>(r % static_cast<std::uint64_t>(i + 1))]);
    }
    return pattern;
}

Node::Node(int id, std::vector<ChannelRecord> table, CetpParams cetp)
    : id_(id), table_(std::move(table)), cetp_(cetp) {}

void Node::sense(std::span<const Occupancy> snapshot, double now) {
    update_cst(table_, snapshot, now);
}

void Node::observe_utilization(std::span<const double> u_hat, double now) {
    (void)now;
    if (u_hat.size() != table_.size())
        throw std::invalid_argument("utilization vector does not cover all channels");
    for (std::size_t i = 0; i < table_.size(); ++i)
        table_[i].u_t = ewma_utilization(table_[i].u_t, u_hat[i], cetp_.alpha);
}

std::vector<int> Node::free_channels(double now) const {
    std::vector<int> out;
    for (const ChannelRecord& rec : table_)
        if (rec.is_free(now)) out.push_back(rec.channel_id);
    return out;
}

int Node::score_pkt_num(const ChannelRecord& record) const {
    const int slots = slot_count(record.u_t, record.threshold, cetp_.max_slots);
    return pkt_num(record, slots, cetp_);
}

std::optional<ControlMessage> Node::on_link_request(int receiver, double now,
                                                    std::span<const int> candidates) {
    if (state_ != NodeState::idle) return std::nullopt;

    std::vector<int> free = free_channels(now);
    if (!candidates.empty()) {
        // candidate list narrows the set and fixes the advertised order
        std::vector<int> ordered;
        for (int ch : candidates)
            if (std::find(free.begin(), free.end(), ch) != free.end()) ordered.push_back(ch);
        free = std::move(ordered);
    }
    if (free.empty()) return std::nullopt;

    ControlMessage rts;
    rts.variant = ControlMessage::Variant::rts;
    rts.sender = id_;
    rts.receiver = receiver;
    for (int ch : free)
        rts.free_list.push_back({ch, score_pkt_num(table_[static_cast<std::size_t>(ch)])});

    state_ = NodeState::awaiting_cts;
    pending_receiver_ = receiver;
    return rts;
}

std::optional<ControlMessage> Node::on_rts(const ControlMessage& rts, double now, Rng& rng,
                                           bool use_cetp) {
    if (rts.variant != ControlMessage::Variant::rts || rts.receiver != id_) {
        ++ignored_;
        return std::nullopt;
    }
    if (state_ != NodeState::idle) {
        ++ignored_;
        return std::nullopt;
    }

    std::vector<ChannelScore> overlap;
    for (const RtsEntry& entry : rts.free_list) {
        const ChannelRecord& rec = table_[static_cast<std::size_t>(entry.channel)];
        if (!rec.is_free(now)) continue;
        overlap.push_back({entry.channel, entry.pkt_num, score_pkt_num(rec), rec.rate});
    }

    std::optional<Selection> selection;
    if (use_cetp) {
        selection = select_channel(overlap, rng);
    } else {
        std::vector<const ChannelScore*> usable;
        for (const ChannelScore& s : overlap)
            if (std::min(s.pkt_num_tran, s.pkt_num_recv) > 0) usable.push_back(&s);
        if (!usable.empty()) {
            std::uniform_int_distribution<std::size_t> uni(0, usable.size() - 1);
            const ChannelScore* pick = usable[uni(rng)];
            selection = Selection{pick->channel,
                                  std::min(pick->pkt_num_tran, pick->pkt_num_recv)};
        }
    }
    if (!selection) return std::nullopt; // B stays silent; A's CTS timer will expire

    ControlMessage cts;
    cts.variant = ControlMessage::Variant::cts;
    cts.sender = id_;
    cts.receiver = rts.sender;
    cts.selected = selection->channel;
    cts.max_pkt_num = selection->max_pkt_num;
    cts.backup = reserve_backup(overlap, selection->channel, rng);
    // commitment happens on the confirming CRTS, not here
    return cts;
}

std::optional<ControlMessage> Node::on_cts(const ControlMessage& cts, double now) {
    if (cts.variant != ControlMessage::Variant::cts || cts.receiver != id_ ||
        state_ != NodeState::awaiting_cts || cts.sender != pending_receiver_) {
        ++ignored_;
        return std::nullopt;
    }
    // the channel may have been taken since the RTS went out; decline and let
    // the CTS timer drive a backoff retry
    if (!table_[static_cast<std::size_t>(cts.selected)].is_free(now)) {
        ++ignored_;
        return std::nullopt;
    }

    const ChannelRecord& rec = table_[static_cast<std::size_t>(cts.selected)];
    const double duration = cts.max_pkt_num * rec.pkt_size / rec.rate;

    ControlMessage crts;
    crts.variant = ControlMessage::Variant::crts;
    crts.sender = id_;
    crts.receiver = cts.sender;
    crts.selected = cts.selected;
    crts.max_pkt_num = cts.max_pkt_num;
    crts.backup = cts.backup;
    crts.release_time = now + duration;

    link_ = ActiveLink{cts.sender, cts.selected, cts.backup, cts.max_pkt_num, crts.release_time,
                       true};
    state_ = NodeState::transmitting;
    attempts_ = 0;
    pending_receiver_ = -1;
    return crts;
}

void Node::on_crts(const ControlMessage& crts, double now) {
    if (crts.variant != ControlMessage::Variant::crts) {
        ++ignored_;
        return;
    }
    (void)now;
    auto mark_busy = [&](int channel) {
        ChannelRecord& rec = table_[static_cast<std::size_t>(channel)];
        if (rec.pu_occupied) return;
        rec.status = ChannelStatus::busy;
        rec.has_timer = true;
        rec.reserved = true;
        rec.busy_until = crts.release_time;
    };
    mark_busy(crts.selected);
    if (crts.backup) mark_busy(*crts.backup);

    // the addressee commits to the link here
    if (crts.receiver == id_ && state_ == NodeState::idle) {
        link_ = ActiveLink{crts.sender, crts.selected, crts.backup, crts.max_pkt_num,
                           crts.release_time, false};
        state_ = NodeState::transmitting;
    }
}

bool Node::on_cts_timeout(double now, int max_attempts) {
    (void)now;
    if (state_ != NodeState::awaiting_cts) return false;
    state_ = NodeState::idle;
    pending_receiver_ = -1;
    ++attempts_;
    if (attempts_ >= max_attempts) {
        attempts_ = 0;
        return false;
    }
    return true;
}

bool Node::switch_to_backup(double now) {
    (void)now;
    if (!link_ || !link_->backup) return false;
    link_->channel = *link_->backup;
    link_->backup.reset();
    return true;
}

void Node::end_link(double now) {
    if (link_) {
        ChannelRecord& rec = table_[static_cast<std::size_t>(link_->channel)];
        if (!rec.pu_occupied && rec.has_timer && rec.busy_until <= now) {
            rec.status = ChannelStatus::free;
            rec.has_timer = false;
            rec.reserved = false;
        }
    }
    link_.reset();
    state_ = NodeState::idle;
    pending_receiver_ = -1;
}

} // namespace crn::mac
