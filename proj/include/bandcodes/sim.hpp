#pragma once

// Deterministic discrete-event simulator of a random-push streaming swarm.
//
// One source node (id 0) splits a stream into fixed-duration generations and
// pushes coded packets for the current generation only. Peer nodes (ids 1..P)
// form a static overlay, relay recombined packets to their neighbors, and play
// the stream back after a fixed buffering delay. Feedback is carried by
// per-generation stop messages plus a decoding map piggybacked on every data
// packet, so a lost stop is repaired by the next packet exchange.
//
// All randomness is drawn from per-node streams derived from the config seed;
// identical (config, seed) pairs produce bit-identical metrics.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bandcodes/rng.hpp"

namespace bandcodes {

enum class Arm {
    BandCodes,   // windowed encoding, triangular-state recombination
    ReferenceNC, // dense fair-coin encoding, buffered-packet recombination
};

// Coefficient distribution used by the source in the ReferenceNC arm.
enum class RefSource {
    FairCoin,
    RobustSoliton,
};

struct SimConfig {
    std::size_t peer_count = 100;
    bool full_mesh = true;
    // Expected peer degree when full_mesh is false; the graph is resampled
    // until connected.
    double er_expected_degree = 8.0;
    std::uint64_t seed = 1;

    Arm arm = Arm::BandCodes;
    RefSource ref_source = RefSource::FairCoin;
    std::size_t n = 100;
    std::size_t w = 100; // ignored by the ReferenceNC arm (uses w = n)
    std::size_t symbol_size = 1250;

    std::uint64_t generation_duration_us = 1'000'000; // playback time per generation
    std::uint64_t buffering_us = 5'000'000;           // playback delay; multiple of the above
    std::size_t session_generations = 30;

    // nullopt selects the defaults: source = peer_count * stream_rate / 6
    // (10% of received packets source-origin when peers saturate their
    // slots), peers = 1.5 * stream_rate. Explicit 0 is allowed and silences
    // the node.
    std::optional<double> source_bandwidth_bps;
    std::optional<double> peer_bandwidth_bps;

    double loss = 0.0;  // per-packet Bernoulli, applied per link to data and stops
    double p_gen = 0.5; // geometric parameter for generation choice
    std::uint64_t latency_us = 0;
};

// Validates every field; raises Parameter errors with the offending key.
void validate_config(const SimConfig& cfg);

// Key/value config file: one `key = value` pair per line, '#' comments.
// Accepts the SimConfig field names plus arm = band|reference,
// ref_source = coins|rsd, and "auto" for the bandwidth fields.
SimConfig parse_config_text(const std::string& text);
SimConfig parse_config_file(const std::string& path);

double stream_rate_bps(const SimConfig& cfg);
double resolved_source_bandwidth(const SimConfig& cfg);
double resolved_peer_bandwidth(const SimConfig& cfg);

// Decoded-or-not flags for the `width` generations starting at `base`.
// Wire form: u32 base LE, u8 width, ceil(width/8) flag bytes LSB-first.
struct DecodingMap {
    std::uint32_t base = 0;
    std::uint8_t width = 0;
    std::uint64_t bits = 0;

    bool decoded(std::uint32_t gen) const {
        return gen >= base && gen < base + width &&
               ((bits >> (gen - base)) & 1u) != 0;
    }
    void set(std::uint32_t gen) {
        if (gen >= base && gen < base + width) bits |= std::uint64_t{1} << (gen - base);
    }
    friend bool operator==(const DecodingMap&, const DecodingMap&) = default;
};

std::vector<std::uint8_t> serialize_map(const DecodingMap& map);
DecodingMap deserialize_map(const std::uint8_t* data, std::size_t size);
std::size_t serialized_map_size(std::uint8_t width);

// Peer-only overlay; node ids 1..peer_count. The source is implicitly linked
// to every peer and does not appear in the edge set.
struct Overlay {
    std::size_t peer_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // a < b
    std::vector<std::vector<std::uint32_t>> neighbors;          // indexed by node id
};

Overlay build_overlay(const SimConfig& cfg, Rng& rng);

struct LinkStats {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t lost = 0;
    std::uint64_t dropped_stale = 0;
    friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

struct NodeMetrics {
    double continuity_index = 0.0;
    std::uint64_t decoded = 0;
    std::uint64_t decoded_on_time = 0;
    std::uint64_t xor_triangularization = 0;
    std::uint64_t xor_diagonalization = 0;
    std::uint64_t received_data = 0;
    std::uint64_t received_from_source = 0;
    double overhead_sum = 0.0; // summed per-generation overhead at decode time
    friend bool operator==(const NodeMetrics&, const NodeMetrics&) = default;
};

struct SimMetrics {
    std::size_t node_count = 0; // peers + 1; index 0 is the source
    std::vector<NodeMetrics> nodes;
    std::vector<std::uint64_t> degree_hist; // received data packets at peers, by degree
    std::vector<LinkStats> links;           // flat node_count x node_count, data packets
    std::vector<double> decode_latency_us;  // per generation, mean over decoders; -1 if none
    double mean_continuity_index = 0.0;
    double mean_overhead = 0.0;  // mean over decoded (peer, generation) pairs
    double source_fraction = 0.0;
    std::uint64_t stops_sent = 0;
    std::uint64_t stops_lost = 0;
    std::uint64_t stops_received = 0;

    const LinkStats& link(std::uint32_t from, std::uint32_t to) const {
        return links[from * node_count + to];
    }
    friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

struct TraceEvent {
    enum class Kind {
        DataSent,
        DataLost,
        DataReceived,
        DataStale,
        StopSent,
        StopLost,
        StopReceived,
        Decoded,
    };
    Kind kind;
    std::uint64_t t_us;
    std::uint32_t from;
    std::uint32_t to; // == from for Decoded
    std::uint32_t generation;
};

// Test seams. `trace` observes every protocol event; `drop_stop` force-drops
// matching stop messages regardless of the loss draw.
struct SimHooks {
    std::function<void(const TraceEvent&)> trace;
    std::function<bool(std::uint32_t from, std::uint32_t to, std::uint32_t gen)> drop_stop;
};

SimMetrics run_session(const SimConfig& cfg);
SimMetrics run_session(const SimConfig& cfg, const SimHooks& hooks);

// Index into `count` deadline-ordered candidates with truncated geometric
// weights (1-p)^k, nearest deadline first.
std::size_t pick_geometric(std::size_t count, double p_gen, Rng& rng);

// Generation currently played back at time t, or -1 before playback starts.
std::int64_t playback_position(const SimConfig& cfg, std::uint64_t t_us);

// Time by which generation g must be decoded to count for continuity.
std::uint64_t playout_deadline_us(const SimConfig& cfg, std::uint32_t gen);

} // namespace bandcodes
