#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "bandcodes/errors.hpp"
#include "bandcodes/packet.hpp"
#include "bandcodes/sim.hpp"

using namespace bandcodes;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Parameter;
}

SimConfig small_config() {
    SimConfig cfg;
    cfg.peer_count = 4;
    cfg.n = 16;
    cfg.w = 16;
    cfg.symbol_size = 8;
    cfg.generation_duration_us = 50'000;
    cfg.buffering_us = 250'000;
    cfg.session_generations = 8;
    cfg.source_bandwidth_bps = 400'000.0;
    cfg.peer_bandwidth_bps = 400'000.0;
    return cfg;
}

void check_conservation(const SimMetrics& m) {
    std::uint64_t recv_total = 0;
    for (std::uint32_t i = 0; i < m.node_count; ++i) {
        for (std::uint32_t j = 0; j < m.node_count; ++j) {
            const auto& l = m.link(i, j);
            CHECK(l.sent == l.received + l.lost + l.dropped_stale);
            recv_total += l.received;
        }
    }
    std::uint64_t node_recv = 0;
    for (const auto& nm : m.nodes) node_recv += nm.received_data;
    CHECK(recv_total == node_recv);
    CHECK(m.stops_sent == m.stops_lost + m.stops_received);
    const auto hist_total =
        std::accumulate(m.degree_hist.begin(), m.degree_hist.end(), std::uint64_t{0});
    CHECK(hist_total == node_recv);
}

} // namespace

TEST_CASE("decoding map: flag accessors") {
    DecodingMap map;
    map.base = 10;
    map.width = 6;
    map.set(10);
    map.set(15);
    map.set(9);  // below the window, ignored
    map.set(16); // above the window, ignored
    CHECK(map.decoded(10));
    CHECK(map.decoded(15));
    CHECK(!map.decoded(11));
    CHECK(!map.decoded(9));
    CHECK(!map.decoded(16));
    CHECK(map.bits == 0b100001);
}

TEST_CASE("decoding map: wire roundtrip") {
    DecodingMap map;
    map.base = 0x01020304;
    map.width = 12;
    map.bits = 0b101000000001;

    const auto bytes = serialize_map(map);
    CHECK(bytes.size() == serialized_map_size(12));
    CHECK(bytes.size() == 4 + 1 + 2);
    CHECK(bytes[0] == 0x04);
    CHECK(bytes[3] == 0x01);
    CHECK(bytes[4] == 12);

    const auto back = deserialize_map(bytes.data(), bytes.size());
    CHECK(back == map);

    DecodingMap wide;
    wide.width = 64;
    wide.bits = ~std::uint64_t{0};
    const auto wb = serialize_map(wide);
    CHECK(wb.size() == 4 + 1 + 8);
    CHECK(deserialize_map(wb.data(), wb.size()) == wide);

    DecodingMap empty;
    const auto eb = serialize_map(empty);
    CHECK(eb.size() == 5);
    CHECK(deserialize_map(eb.data(), eb.size()) == empty);
}

TEST_CASE("decoding map: malformed inputs are rejected") {
    DecodingMap map;
    map.width = 8;
    map.bits = 0xff;
    auto bytes = serialize_map(map);

    CHECK(kind_of([&] { deserialize_map(bytes.data(), 4); }) == ErrorKind::Malformed);
    CHECK(kind_of([&] { deserialize_map(bytes.data(), bytes.size() - 1); }) ==
          ErrorKind::Malformed);

    auto extra = bytes;
    extra.push_back(0);
    CHECK(kind_of([&] { deserialize_map(extra.data(), extra.size()); }) ==
          ErrorKind::Malformed);

    auto bad_width = bytes;
    bad_width[4] = 65;
    bad_width.resize(serialized_map_size(65 > 64 ? 64 : 65));
    CHECK(kind_of([&] { deserialize_map(bad_width.data(), bad_width.size()); }) ==
          ErrorKind::Malformed);

    // A set flag beyond the declared width.
    DecodingMap narrow;
    narrow.width = 3;
    auto nb = serialize_map(narrow);
    nb[5] = 0b1000;
    CHECK(kind_of([&] { deserialize_map(nb.data(), nb.size()); }) == ErrorKind::Malformed);

    DecodingMap overfull;
    overfull.width = 3;
    overfull.bits = 0b1000;
    CHECK(kind_of([&] { serialize_map(overfull); }) == ErrorKind::Parameter);
}

TEST_CASE("config: text parsing covers every key") {
    const std::string text =
        "# swarm shape\n"
        "peer_count = 12\n"
        "full_mesh = false\n"
        "er_expected_degree = 6.5\n"
        "seed = 99\n"
        "arm = reference # dense coding\n"
        "ref_source = rsd\n"
        "n = 64\n"
        "w = 32\n"
        "symbol_size = 256\n"
        "generation_duration_us = 200000\n"
        "buffering_us = 1000000\n"
        "session_generations = 40\n"
        "source_bandwidth_bps = 123456\n"
        "peer_bandwidth_bps = auto\n"
        "loss = 0.25\n"
        "p_gen = 0.75\n"
        "latency_us = 1500\n";
    const auto cfg = parse_config_text(text);
    CHECK(cfg.peer_count == 12);
    CHECK(!cfg.full_mesh);
    CHECK(cfg.er_expected_degree == doctest::Approx(6.5));
    CHECK(cfg.seed == 99);
    CHECK(cfg.arm == Arm::ReferenceNC);
    CHECK(cfg.ref_source == RefSource::RobustSoliton);
    CHECK(cfg.n == 64);
    CHECK(cfg.w == 32);
    CHECK(cfg.symbol_size == 256);
    CHECK(cfg.generation_duration_us == 200'000);
    CHECK(cfg.buffering_us == 1'000'000);
    CHECK(cfg.session_generations == 40);
    REQUIRE(cfg.source_bandwidth_bps.has_value());
    CHECK(*cfg.source_bandwidth_bps == doctest::Approx(123456.0));
    CHECK(!cfg.peer_bandwidth_bps.has_value());
    CHECK(cfg.loss == doctest::Approx(0.25));
    CHECK(cfg.p_gen == doctest::Approx(0.75));
    CHECK(cfg.latency_us == 1500);

    CHECK(parse_config_text("").peer_count == SimConfig{}.peer_count);
    CHECK(parse_config_text("arm = band").arm == Arm::BandCodes);
    CHECK(parse_config_text("ref_source = coins").ref_source == RefSource::FairCoin);
}

TEST_CASE("config: parse errors carry Parameter kind") {
    CHECK(kind_of([] { parse_config_text("mystery = 1"); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { parse_config_text("peer_count 4"); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { parse_config_text("peer_count = four"); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { parse_config_text("full_mesh = maybe"); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { parse_config_text("loss = 0.1x"); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { parse_config_text("arm = dense"); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { parse_config_file("/nonexistent/sim.cfg"); }) == ErrorKind::Io);
}

TEST_CASE("config: validation rejects out-of-range fields") {
    auto bad = [](auto mutate) {
        SimConfig cfg;
        mutate(cfg);
        return kind_of([&] { validate_config(cfg); });
    };
    CHECK(bad([](SimConfig& c) { c.peer_count = 0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.n = 0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.w = 0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.w = c.n + 1; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.symbol_size = 0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.buffering_us = 1'500'000; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.buffering_us = 65'000'000; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.session_generations = 0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.loss = 1.0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.loss = -0.1; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.p_gen = 0.0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.p_gen = 1.5; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) { c.source_bandwidth_bps = -1.0; }) == ErrorKind::Parameter);
    CHECK(bad([](SimConfig& c) {
              c.full_mesh = false;
              c.er_expected_degree = 0.2;
          }) == ErrorKind::Parameter);

    SimConfig ok;
    ok.source_bandwidth_bps = 0.0; // explicit silence is legal
    ok.peer_bandwidth_bps = 0.0;
    validate_config(ok);
}

TEST_CASE("bandwidth defaults follow the stream rate") {
    SimConfig cfg;
    cfg.n = 100;
    cfg.symbol_size = 1250;
    cfg.generation_duration_us = 1'000'000;
    cfg.peer_count = 100;
    const double stream = stream_rate_bps(cfg);
    CHECK(stream == doctest::Approx(1e6));
    CHECK(resolved_peer_bandwidth(cfg) == doctest::Approx(1.5e6));
    CHECK(resolved_source_bandwidth(cfg) == doctest::Approx(100.0 / 6.0 * 1e6));
    cfg.source_bandwidth_bps = 5.0;
    cfg.peer_bandwidth_bps = 7.0;
    CHECK(resolved_source_bandwidth(cfg) == doctest::Approx(5.0));
    CHECK(resolved_peer_bandwidth(cfg) == doctest::Approx(7.0));
}

TEST_CASE("playback position and playout deadlines") {
    SimConfig cfg;
    cfg.generation_duration_us = 1'000'000;
    cfg.buffering_us = 5'000'000;
    CHECK(playback_position(cfg, 0) == -1);
    CHECK(playback_position(cfg, 4'999'999) == -1);
    CHECK(playback_position(cfg, 5'000'000) == 0);
    CHECK(playback_position(cfg, 5'999'999) == 0);
    CHECK(playback_position(cfg, 6'000'000) == 1);
    CHECK(playout_deadline_us(cfg, 0) == 5'000'000);
    CHECK(playout_deadline_us(cfg, 3) == 8'000'000);
}

TEST_CASE("pick_geometric: truncated weights favor the nearest deadline") {
    Rng rng = Rng::derive(11, 0);
    std::array<int, 3> hits{};
    const int draws = 30'000;
    for (int i = 0; i < draws; ++i) hits[pick_geometric(3, 0.5, rng)] += 1;
    // Normalized weights 1 : 1/2 : 1/4 give 4/7, 2/7, 1/7.
    CHECK(hits[0] / double(draws) == doctest::Approx(4.0 / 7).epsilon(0.05));
    CHECK(hits[1] / double(draws) == doctest::Approx(2.0 / 7).epsilon(0.08));
    CHECK(hits[2] / double(draws) == doctest::Approx(1.0 / 7).epsilon(0.12));

    for (int i = 0; i < 100; ++i) CHECK(pick_geometric(1, 0.5, rng) == 0);
    for (int i = 0; i < 100; ++i) CHECK(pick_geometric(5, 1.0, rng) == 0);
    CHECK(kind_of([&] { pick_geometric(0, 0.5, rng); }) == ErrorKind::Parameter);
}

TEST_CASE("overlay: full mesh enumerates every pair") {
    SimConfig cfg;
    cfg.peer_count = 3;
    Rng rng = Rng::derive(1, 0);
    const auto ov = build_overlay(cfg, rng);
    REQUIRE(ov.edges.size() == 3);
    CHECK(ov.edges[0] == std::pair<std::uint32_t, std::uint32_t>{1, 2});
    CHECK(ov.edges[1] == std::pair<std::uint32_t, std::uint32_t>{1, 3});
    CHECK(ov.edges[2] == std::pair<std::uint32_t, std::uint32_t>{2, 3});
    CHECK(ov.neighbors[1] == std::vector<std::uint32_t>{2, 3});
    CHECK(ov.neighbors[2] == std::vector<std::uint32_t>{1, 3});

    cfg.peer_count = 100;
    const auto big = build_overlay(cfg, rng);
    CHECK(big.edges.size() == 100 * 99 / 2);
    CHECK(big.neighbors[57].size() == 99);

    cfg.peer_count = 1;
    const auto lone = build_overlay(cfg, rng);
    CHECK(lone.edges.empty());
    CHECK(lone.neighbors.size() == 2);
}

TEST_CASE("overlay: sparse random graph is connected with the target degree") {
    SimConfig cfg;
    cfg.peer_count = 60;
    cfg.full_mesh = false;
    cfg.er_expected_degree = 8.0;
    Rng rng = Rng::derive(5, 0);
    const auto ov = build_overlay(cfg, rng);

    const double mean_degree = 2.0 * ov.edges.size() / cfg.peer_count;
    CHECK(mean_degree > 5.0);
    CHECK(mean_degree < 11.0);
    for (const auto& [a, b] : ov.edges) {
        CHECK(a < b);
        CHECK(a >= 1);
        CHECK(b <= cfg.peer_count);
    }

    // Reachability over the sampled edges.
    std::vector<char> seen(cfg.peer_count + 1, 0);
    std::vector<std::uint32_t> stack{1};
    seen[1] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (const auto u : ov.neighbors[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    CHECK(reached == cfg.peer_count);

    Rng again = Rng::derive(5, 0);
    const auto repeat = build_overlay(cfg, again);
    CHECK(repeat.edges == ov.edges);
}

TEST_CASE("session: identical seeds give identical metrics") {
    auto cfg = small_config();
    cfg.loss = 0.1;
    cfg.latency_us = 2'000;
    const auto a = run_session(cfg);
    const auto b = run_session(cfg);
    CHECK(a == b);

    cfg.seed = 2;
    const auto c = run_session(cfg);
    CHECK(!(a == c));
}

TEST_CASE("session: per-link packet conservation under loss and latency") {
    auto cfg = small_config();
    cfg.peer_count = 6;
    cfg.loss = 0.15;
    cfg.latency_us = 2'000;
    const auto m = run_session(cfg);
    check_conservation(m);

    std::uint64_t sent_total = 0, lost_total = 0;
    for (const auto& l : m.links) {
        sent_total += l.sent;
        lost_total += l.lost;
    }
    CHECK(sent_total > 0);
    CHECK(lost_total > 0);
    CHECK(m.stops_lost > 0);
    // Loss rate across all links lands near the configured probability.
    CHECK(lost_total / double(sent_total) == doctest::Approx(0.15).epsilon(0.25));
}

TEST_CASE("session: a silent source streams nothing") {
    auto cfg = small_config();
    cfg.source_bandwidth_bps = 0.0;
    const auto m = run_session(cfg);
    CHECK(m.mean_continuity_index == 0.0);
    for (const auto& l : m.links) CHECK(l == LinkStats{});
    CHECK(m.stops_sent == 0);
    for (const auto& nm : m.nodes) {
        CHECK(nm.decoded == 0);
        CHECK(nm.received_data == 0);
    }
}

TEST_CASE("session: lone well-fed peer reaches full continuity") {
    auto cfg = small_config();
    cfg.peer_count = 1;
    cfg.w = 8; // narrow window still decodes a lossless feed
    const auto m = run_session(cfg);
    CHECK(m.mean_continuity_index == doctest::Approx(1.0));
    CHECK(m.nodes[1].decoded == cfg.session_generations);
    CHECK(m.nodes[1].decoded_on_time == cfg.session_generations);
    CHECK(m.nodes[1].received_from_source == m.nodes[1].received_data);
    CHECK(m.source_fraction == doctest::Approx(1.0));
    CHECK(m.mean_overhead >= 0.0);
    CHECK(m.mean_overhead < 0.5);
    for (std::size_t g = 0; g < cfg.session_generations; ++g) {
        CHECK(m.decode_latency_us[g] >= 0.0);
    }
    check_conservation(m);
}

TEST_CASE("session: reference arm decodes too") {
    auto cfg = small_config();
    cfg.arm = Arm::ReferenceNC;
    cfg.loss = 0.05;
    const auto m = run_session(cfg);
    CHECK(m.mean_continuity_index > 0.9);
    check_conservation(m);

    cfg.ref_source = RefSource::RobustSoliton;
    const auto rsd = run_session(cfg);
    CHECK(rsd.mean_continuity_index > 0.9);
}

TEST_CASE("session: late deliveries are dropped as stale") {
    auto cfg = small_config();
    cfg.peer_count = 3;
    cfg.latency_us = 130'000; // more than two playback periods in flight
    const auto m = run_session(cfg);
    std::uint64_t stale = 0;
    for (const auto& l : m.links) stale += l.dropped_stale;
    CHECK(stale > 0);
    check_conservation(m);
}

TEST_CASE("session: windowed relaying sustains continuity in a lossy mesh") {
    auto cfg = small_config();
    cfg.peer_count = 5;
    cfg.n = 24;
    cfg.w = 12;
    cfg.loss = 0.05;
    cfg.latency_us = 1'000;
    const auto m = run_session(cfg);
    CHECK(m.mean_continuity_index > 0.8);
    check_conservation(m);

    std::uint64_t peer_to_peer = 0;
    for (std::uint32_t i = 1; i < m.node_count; ++i) {
        for (std::uint32_t j = 1; j < m.node_count; ++j) peer_to_peer += m.link(i, j).received;
    }
    CHECK(peer_to_peer > 0); // relays actually carry traffic
}

TEST_CASE("session: stops suppress further service immediately") {
    auto cfg = small_config();
    cfg.peer_count = 2;

    std::vector<TraceEvent> events;
    SimHooks hooks;
    hooks.trace = [&](const TraceEvent& ev) { events.push_back(ev); };
    const auto m = run_session(cfg, hooks);
    CHECK(m.mean_continuity_index == doctest::Approx(1.0));
    CHECK(m.stops_received == m.stops_sent);

    // decode time per (node, generation)
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> decoded_at;
    for (const auto& ev : events) {
        if (ev.kind == TraceEvent::Kind::Decoded) {
            decoded_at[{ev.from, ev.generation}] = ev.t_us;
        }
    }
    CHECK(!decoded_at.empty());
    // With zero loss and zero latency a stop lands the instant it is sent, so
    // no data packet for a decoded generation leaves for that node afterwards.
    for (const auto& ev : events) {
        if (ev.kind != TraceEvent::Kind::DataSent) continue;
        const auto it = decoded_at.find({ev.to, ev.generation});
        if (it != decoded_at.end() && ev.t_us > it->second) {
            FAIL("packet for a stopped generation sent at ", ev.t_us, " after ",
                 it->second);
        }
    }
}

TEST_CASE("session: piggybacked maps repair lost stops within one exchange") {
    auto cfg = small_config();
    cfg.peer_count = 2;

    std::vector<TraceEvent> events;
    SimHooks hooks;
    hooks.trace = [&](const TraceEvent& ev) { events.push_back(ev); };
    hooks.drop_stop = [](std::uint32_t, std::uint32_t, std::uint32_t) { return true; };
    const auto m = run_session(cfg, hooks);

    CHECK(m.stops_received == 0);
    CHECK(m.stops_lost == m.stops_sent);
    CHECK(m.stops_sent > 0);
    // The swarm still finishes: decoded flags travel on data packets.
    CHECK(m.mean_continuity_index == doctest::Approx(1.0));

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> decoded_at;
    for (const auto& ev : events) {
        if (ev.kind == TraceEvent::Kind::Decoded) {
            decoded_at[{ev.from, ev.generation}] = ev.t_us;
        }
    }
    // After a node decodes g, the first data packet it emits advertises g, so
    // the recipient may send g at most until that packet arrives.
    for (const auto& ev : events) {
        if (ev.kind != TraceEvent::Kind::DataSent) continue;
        const auto it = decoded_at.find({ev.to, ev.generation});
        if (it == decoded_at.end()) continue;
        // Strictly after the decode: a packet leaving within the decode's own
        // microsecond may predate it in event order and carry the stale map.
        std::uint64_t informed_at = UINT64_MAX;
        for (const auto& tx : events) {
            if (tx.kind == TraceEvent::Kind::DataReceived && tx.from == ev.to &&
                tx.to == ev.from && tx.t_us > it->second) {
                informed_at = tx.t_us;
                break;
            }
        }
        if (ev.t_us > informed_at) {
            FAIL("packet for generation ", ev.generation, " sent at ", ev.t_us,
                 " after the sender was informed at ", informed_at);
        }
    }
}

TEST_CASE("session: source supplies a minority of a saturated mesh") {
    SimConfig cfg;
    cfg.peer_count = 10;
    cfg.n = 16;
    cfg.w = 16;
    // Payload large enough that per-packet framing stays a small fraction of
    // the auto-sized bandwidth; the source must inject more than n packets
    // per generation window for the swarm to complete at all.
    cfg.symbol_size = 128;
    cfg.generation_duration_us = 50'000;
    cfg.buffering_us = 250'000;
    cfg.session_generations = 20;
    // auto bandwidths: source = P/6 stream rates, each peer 1.5
    const auto m = run_session(cfg);
    CHECK(m.mean_continuity_index > 0.9);
    CHECK(m.source_fraction > 0.03);
    CHECK(m.source_fraction < 0.25);
    check_conservation(m);
}
