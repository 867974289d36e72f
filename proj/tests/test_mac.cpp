#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crn/mac.hpp"

using namespace crn::mac;

namespace {

std::vector<ChannelRecord> make_table(int n, double rate = 6e6, double pkt_size = 8000.0,
                                      double threshold = 0.3) {
    std::vector<ChannelRecord> table(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        table[static_cast<std::size_t>(c)].channel_id = c;
        table[static_cast<std::size_t>(c)].rate = rate;
        table[static_cast<std::size_t>(c)].pkt_size = pkt_size;
        table[static_cast<std::size_t>(c)].threshold = threshold;
    }
    return table;
}

// literal brute-force search over the defining inequality
int slot_count_brute(double u_t, double threshold, int max_slots) {
    int s = 0;
    while (s < max_slots && 1.0 - std::pow(1.0 - u_t, s + 1) < threshold) ++s;
    return s;
}

} // namespace

TEST_CASE("sensing timer follows pkt_size / rate") {
    auto table = make_table(1, 6e6, 9600.0);
    std::vector<Occupancy> snap{Occupancy::su_busy};
    update_cst(table, snap, 1.0);
    CHECK(table[0].status == ChannelStatus::busy);
    CHECK(table[0].release_timer(1.0) == doctest::Approx(9600.0 / 6e6));
}

TEST_CASE("re-sensed busy channel keeps its timer") {
    auto table = make_table(1);
    std::vector<Occupancy> snap{Occupancy::su_busy};
    update_cst(table, snap, 0.0);
    const double until = table[0].busy_until;
    update_cst(table, snap, 0.0005);
    CHECK(table[0].busy_until == until);
}

TEST_CASE("PU occupancy has no timer") {
    auto table = make_table(1);
    std::vector<Occupancy> snap{Occupancy::pu_busy};
    update_cst(table, snap, 2.0);
    CHECK(table[0].status == ChannelStatus::busy);
    CHECK(table[0].pu_occupied);
    CHECK(!table[0].has_timer);
    CHECK(table[0].release_timer(2.0) == 0.0);
    CHECK(!table[0].is_free(100.0));
}

TEST_CASE("busy channel returns to free exactly at timer expiry") {
    auto table = make_table(1);
    std::vector<Occupancy> snap{Occupancy::su_busy};
    update_cst(table, snap, 0.0);
    const double release = table[0].busy_until;
    CHECK(!table[0].is_free(release - 1e-9));
    CHECK(table[0].is_free(release));
}

TEST_CASE("EWMA utilization") {
    CHECK(ewma_utilization(0.4, 0.2, 0.5) == doctest::Approx(0.3));
    CHECK(ewma_utilization(0.4, 0.2, 1.0) == doctest::Approx(0.4));
    CHECK(ewma_utilization(0.4, 0.2, 0.0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(ewma_utilization(1.5, 0.2, 0.5), std::invalid_argument);
}

TEST_CASE("slot count examples") {
    CHECK(slot_count(0.1, 0.3, 10) == 3);  // 1-0.9^3=0.271<0.3, 1-0.9^4=0.3439
    CHECK(slot_count(0.0, 0.3, 10) == 10); // inequality holds for every s
    CHECK(slot_count(1.0, 0.3, 10) == 0);  // fully utilized channel
}

TEST_CASE("slot count closed form equals brute force on 1000 random pairs") {
    Rng rng(99);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform(rng);
        double threshold = uniform(rng);
        if (threshold <= 0.0 || threshold >= 1.0) threshold = 0.5;
        const int max_slots = 1 + static_cast<int>(uniform(rng) * 30);
        CHECK(slot_count(u, threshold, max_slots) == slot_count_brute(u, threshold, max_slots));
    }
}

TEST_CASE("pkt_num in canonical and literal modes") {
    ChannelRecord ch;
    ch.rate = 6e6;
    ch.pkt_size = 8000.0;

    CetpParams canonical;
    canonical.beta = 1.0;
    canonical.lc = 2000.0;
    canonical.slot_duration = 1e-3;
    CHECK(pkt_num(ch, 3, canonical) == 2); // (18000 - 2000) / 8000
    CHECK(pkt_num(ch, 0, canonical) == 0); // clamped

    CetpParams literal = canonical;
    literal.scheme = PktNumScheme::literal;
    literal.lc = 1200.0;
    ChannelRecord small = ch;
    small.pkt_size = 600.0;
    CHECK(pkt_num(small, 10, literal) == 8); // floor(10 - 2)
}

TEST_CASE("channel selection is max-min with rate then random tie-breaks") {
    Rng rng(1);

    SUBCASE("max-min wins") {
        std::vector<ChannelScore> overlap{{1, 5, 3, 1e6}, {2, 4, 4, 1e6}};
        const auto sel = select_channel(overlap, rng);
        REQUIRE(sel);
        CHECK(sel->channel == 2);
        CHECK(sel->max_pkt_num == 4);
    }
    SUBCASE("rate breaks ties") {
        std::vector<ChannelScore> overlap{{1, 3, 3, 1e6}, {2, 3, 3, 2e6}};
        const auto sel = select_channel(overlap, rng);
        REQUIRE(sel);
        CHECK(sel->channel == 2);
    }
    SUBCASE("zero best value means silence") {
        std::vector<ChannelScore> overlap{{1, 0, 5, 1e6}};
        CHECK(!select_channel(overlap, rng));
        CHECK(!select_channel({}, rng));
    }
    SUBCASE("scale invariance of the max-min score") {
        std::vector<ChannelScore> overlap{{1, 6, 2, 1e6}, {2, 3, 3, 2e6}, {3, 1, 9, 3e6}};
        Rng rng_a(7);
        Rng rng_b(7);
        const auto base = select_channel(overlap, rng_a);
        for (auto& s : overlap) {
            s.pkt_num_tran *= 5;
            s.pkt_num_recv *= 5;
        }
        const auto scaled = select_channel(overlap, rng_b);
        REQUIRE(base);
        REQUIRE(scaled);
        CHECK(base->channel == scaled->channel);
    }
}

TEST_CASE("backup reservation picks the runner-up") {
    Rng rng(2);
    std::vector<ChannelScore> overlap{{1, 5, 5, 1e6}, {2, 3, 3, 1e6}, {3, 1, 1, 1e6}};
    const auto sel = select_channel(overlap, rng);
    REQUIRE(sel);
    CHECK(sel->channel == 1);
    const auto backup = reserve_backup(overlap, sel->channel, rng);
    REQUIRE(backup);
    CHECK(*backup == 2);

    SUBCASE("no runner-up means no backup") {
        std::vector<ChannelScore> only{{1, 5, 5, 1e6}};
        CHECK(!reserve_backup(only, 1, rng));
    }
}

TEST_CASE("three-way handshake happy path") {
    const CetpParams cetp{.alpha = 0.5,
                          .beta = 1.0,
                          .lc = 2000.0,
                          .slot_duration = 1e-3,
                          .max_slots = 10,
                          .scheme = PktNumScheme::canonical};
    Node a(0, make_table(3), cetp);
    Node b(1, make_table(3), cetp);
    Node neighbor(2, make_table(3), cetp);
    Rng rng(3);

    const double t0 = 1.0;
    auto rts = a.on_link_request(1, t0);
    REQUIRE(rts);
    CHECK(rts->variant == ControlMessage::Variant::rts);
    CHECK(rts->free_list.size() == 3);
    CHECK(a.state() == NodeState::awaiting_cts);

    auto cts = b.on_rts(*rts, t0 + 1e-4, rng);
    REQUIRE(cts);
    CHECK(cts->max_pkt_num >= 1);

    auto crts = a.on_cts(*cts, t0 + 2e-4);
    REQUIRE(crts);
    CHECK(a.state() == NodeState::transmitting);
    CHECK(crts->selected == cts->selected);
    CHECK(crts->release_time ==
          doctest::Approx(t0 + 2e-4 + cts->max_pkt_num * 8000.0 / 6e6));

    b.on_crts(*crts, t0 + 3e-4);
    CHECK(b.state() == NodeState::transmitting);
    REQUIRE(a.link());
    REQUIRE(b.link());
    CHECK(a.link()->channel == b.link()->channel);

    // every neighbor hears the CRTS and marks the grant busy
    neighbor.on_crts(*crts, t0 + 3e-4);
    const auto& rec = neighbor.table()[static_cast<std::size_t>(crts->selected)];
    CHECK(rec.status == ChannelStatus::busy);
    CHECK(rec.release_timer(t0 + 3e-4) ==
          doctest::Approx(crts->release_time - (t0 + 3e-4)));
}

TEST_CASE("neighbor timer follows the multi-packet grant") {
    const CetpParams cetp;
    Node neighbor(5, make_table(2), cetp);
    ControlMessage crts;
    crts.variant = ControlMessage::Variant::crts;
    crts.sender = 0;
    crts.receiver = 1;
    crts.selected = 1;
    crts.max_pkt_num = 2;
    crts.release_time = 10.0 + 2.0 * 8000.0 / 6e6;
    neighbor.on_crts(crts, 10.0);
    CHECK(neighbor.table()[1].release_timer(10.0) == doctest::Approx(2.0 * 8000.0 / 6e6));
}

TEST_CASE("no overlap leaves B silent and A times out to idle") {
    const CetpParams cetp;
    Node a(0, make_table(2), cetp);
    auto b_table = make_table(2);
    Node b(1, b_table, cetp);
    Rng rng(4);

    auto rts = a.on_link_request(1, 0.0);
    REQUIRE(rts);

    // everything busy at B
    std::vector<Occupancy> snap{Occupancy::pu_busy, Occupancy::su_busy};
    b.sense(snap, 1e-4);
    auto cts = b.on_rts(*rts, 1e-4, rng);
    CHECK(!cts);

    CHECK(a.on_cts_timeout(1e-3, 3)); // first failure of max 3: retry allowed
    CHECK(a.state() == NodeState::idle);
    CHECK(!a.on_cts_timeout(1e-3, 3)); // not awaiting any more: no retry
}

TEST_CASE("out-of-order messages are ignored") {
    const CetpParams cetp;
    Node a(0, make_table(2), cetp);
    ControlMessage cts;
    cts.variant = ControlMessage::Variant::cts;
    cts.sender = 1;
    cts.receiver = 0;
    cts.selected = 1;
    cts.max_pkt_num = 3;
    CHECK(!a.on_cts(cts, 0.0)); // idle node never confirms
    CHECK(a.state() == NodeState::idle);
    CHECK(a.ignored_messages() == 1);
}

TEST_CASE("declines a grant for a channel that became busy meanwhile") {
    const CetpParams cetp;
    Node a(0, make_table(2), cetp);
    auto rts = a.on_link_request(1, 0.0);
    REQUIRE(rts);

    std::vector<Occupancy> snap{Occupancy::free, Occupancy::pu_busy};
    a.sense(snap, 1e-4);

    ControlMessage cts;
    cts.variant = ControlMessage::Variant::cts;
    cts.sender = 1;
    cts.receiver = 0;
    cts.selected = 1;
    cts.max_pkt_num = 3;
    CHECK(!a.on_cts(cts, 2e-4));
    CHECK(a.state() == NodeState::awaiting_cts); // timeout will drive the retry
}

TEST_CASE("credential registry") {
    CredentialRegistry registry(0xfeedu);
    registry.enroll(3);

    SUBCASE("valid token authenticates") {
        const Credential cred = registry.issue(3, 100.0);
        CHECK(registry.authenticate(cred, 50.0));
    }
    SUBCASE("expired token is rejected") {
        const Credential cred = registry.issue(3, 100.0);
        CHECK(!registry.authenticate(cred, 100.5));
    }
    SUBCASE("unknown node is rejected") {
        const Credential cred = registry.issue(4, 100.0);
        CHECK(!registry.authenticate(cred, 50.0));
    }
    SUBCASE("tampered token is rejected") {
        Credential cred = registry.issue(3, 100.0);
        cred.token ^= 1;
        CHECK(!registry.authenticate(cred, 50.0));
    }
}

TEST_CASE("switching pattern is deterministic and a permutation") {
    const auto a = derive_switch_pattern(0xabcdu, 16, 5);
    const auto b = derive_switch_pattern(0xabcdu, 16, 5);
    CHECK(a == b);

    std::vector<bool> seen(16, false);
    for (int v : a) {
        REQUIRE(v >= 0);
        REQUIRE(v < 16);
        seen[static_cast<std::size_t>(v)] = true;
    }
    for (bool s : seen) CHECK(s);

    const auto c = derive_switch_pattern(0xabcdu, 16, 6);
    CHECK(a != c); // a new request index reshuffles
}

TEST_CASE("candidate list narrows and orders the RTS") {
    const CetpParams cetp;
    Node a(0, make_table(4), cetp);
    const std::vector<int> candidates{2, 0};
    auto rts = a.on_link_request(1, 0.0, candidates);
    REQUIRE(rts);
    REQUIRE(rts->free_list.size() == 2);
    CHECK(rts->free_list[0].channel == 2);
    CHECK(rts->free_list[1].channel == 0);
}
