#include "bandcodes/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <queue>
#include <sstream>

#include "bandcodes/codec.hpp"
#include "bandcodes/degree_model.hpp"
#include "bandcodes/errors.hpp"
#include "bandcodes/packet.hpp"

namespace bandcodes {

namespace {

std::size_t map_width(const SimConfig& cfg) {
    return static_cast<std::size_t>(cfg.buffering_us / cfg.generation_duration_us);
}

} // namespace

void validate_config(const SimConfig& cfg) {
    if (cfg.peer_count < 1) raise(ErrorKind::Parameter, "peer_count must be >= 1");
    if (cfg.n < 1 || cfg.n > 0xffff) raise(ErrorKind::Parameter, "n out of range");
    if (cfg.w < 1 || cfg.w > cfg.n) raise(ErrorKind::Parameter, "w out of range");
    if (cfg.symbol_size < 1) raise(ErrorKind::Parameter, "symbol_size must be >= 1");
    if (cfg.generation_duration_us < 1) {
        raise(ErrorKind::Parameter, "generation_duration_us must be >= 1");
    }
    if (cfg.buffering_us < cfg.generation_duration_us ||
        cfg.buffering_us % cfg.generation_duration_us != 0) {
        raise(ErrorKind::Parameter,
              "buffering_us must be a positive multiple of generation_duration_us");
    }
    if (map_width(cfg) > 64) {
        raise(ErrorKind::Parameter, "decoding map wider than 64 generations");
    }
    if (cfg.session_generations < 1 || cfg.session_generations > 0xffffffffull) {
        raise(ErrorKind::Parameter, "session_generations out of range");
    }
    for (const auto& bw : {cfg.source_bandwidth_bps, cfg.peer_bandwidth_bps}) {
        if (bw && (!std::isfinite(*bw) || *bw < 0)) {
            raise(ErrorKind::Parameter, "bandwidth must be finite and >= 0");
        }
    }
    if (!(cfg.loss >= 0.0 && cfg.loss < 1.0)) {
        raise(ErrorKind::Parameter, "loss must lie in [0, 1)");
    }
    if (!(cfg.p_gen > 0.0 && cfg.p_gen <= 1.0)) {
        raise(ErrorKind::Parameter, "p_gen must lie in (0, 1]");
    }
    if (!cfg.full_mesh && cfg.peer_count >= 2) {
        if (!(cfg.er_expected_degree >= 1.0) ||
            cfg.er_expected_degree > static_cast<double>(cfg.peer_count - 1)) {
            raise(ErrorKind::Parameter, "er_expected_degree unsatisfiable for peer_count");
        }
    }
}

double stream_rate_bps(const SimConfig& cfg) {
    return static_cast<double>(cfg.n) * static_cast<double>(cfg.symbol_size) * 8.0 *
           1e6 / static_cast<double>(cfg.generation_duration_us);
}

double resolved_source_bandwidth(const SimConfig& cfg) {
    if (cfg.source_bandwidth_bps) return *cfg.source_bandwidth_bps;
    return static_cast<double>(cfg.peer_count) * stream_rate_bps(cfg) / 6.0;
}

double resolved_peer_bandwidth(const SimConfig& cfg) {
    if (cfg.peer_bandwidth_bps) return *cfg.peer_bandwidth_bps;
    return 1.5 * stream_rate_bps(cfg);
}

std::size_t serialized_map_size(std::uint8_t width) {
    return 4 + 1 + (static_cast<std::size_t>(width) + 7) / 8;
}

std::vector<std::uint8_t> serialize_map(const DecodingMap& map) {
    if (map.width > 64) raise(ErrorKind::Parameter, "map width exceeds 64");
    if (map.width < 64 && (map.bits >> map.width) != 0) {
        raise(ErrorKind::Parameter, "map bits set beyond width");
    }
    std::vector<std::uint8_t> out(serialized_map_size(map.width));
    out[0] = static_cast<std::uint8_t>(map.base);
    out[1] = static_cast<std::uint8_t>(map.base >> 8);
    out[2] = static_cast<std::uint8_t>(map.base >> 16);
    out[3] = static_cast<std::uint8_t>(map.base >> 24);
    out[4] = map.width;
    for (std::size_t i = 0; i < out.size() - 5; ++i) {
        out[5 + i] = static_cast<std::uint8_t>(map.bits >> (8 * i));
    }
    return out;
}

DecodingMap deserialize_map(const std::uint8_t* data, std::size_t size) {
    if (size < 5) raise(ErrorKind::Malformed, "map prefix truncated");
    DecodingMap map;
    map.base = static_cast<std::uint32_t>(data[0]) |
               (static_cast<std::uint32_t>(data[1]) << 8) |
               (static_cast<std::uint32_t>(data[2]) << 16) |
               (static_cast<std::uint32_t>(data[3]) << 24);
    map.width = data[4];
    if (map.width > 64) raise(ErrorKind::Malformed, "map width exceeds 64");
    if (size != serialized_map_size(map.width)) {
        raise(ErrorKind::Malformed, "map prefix size mismatch");
    }
    for (std::size_t i = 0; i < size - 5; ++i) {
        map.bits |= static_cast<std::uint64_t>(data[5 + i]) << (8 * i);
    }
    if (map.width < 64 && (map.bits >> map.width) != 0) {
        raise(ErrorKind::Malformed, "map bits set beyond width");
    }
    return map;
}

namespace {

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    raise(ErrorKind::Parameter, "config: bad boolean '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        raise(ErrorKind::Parameter, "config: bad integer '" + v + "'");
    }
    if (pos != v.size()) raise(ErrorKind::Parameter, "config: bad integer '" + v + "'");
    return x;
}

double parse_f64(const std::string& v) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        raise(ErrorKind::Parameter, "config: bad number '" + v + "'");
    }
    if (pos != v.size()) raise(ErrorKind::Parameter, "config: bad number '" + v + "'");
    return x;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

SimConfig parse_config_text(const std::string& text) {
    SimConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            raise(ErrorKind::Parameter, "config: expected key = value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "peer_count") {
            cfg.peer_count = parse_u64(val);
        } else if (key == "full_mesh") {
            cfg.full_mesh = parse_bool(val);
        } else if (key == "er_expected_degree") {
            cfg.er_expected_degree = parse_f64(val);
        } else if (key == "seed") {
            cfg.seed = parse_u64(val);
        } else if (key == "arm") {
            if (val == "band" || val == "bandcodes") {
                cfg.arm = Arm::BandCodes;
            } else if (val == "reference" || val == "ref") {
                cfg.arm = Arm::ReferenceNC;
            } else {
                raise(ErrorKind::Parameter, "config: unknown arm '" + val + "'");
            }
        } else if (key == "ref_source") {
            if (val == "coins" || val == "fair") {
                cfg.ref_source = RefSource::FairCoin;
            } else if (val == "rsd" || val == "soliton") {
                cfg.ref_source = RefSource::RobustSoliton;
            } else {
                raise(ErrorKind::Parameter, "config: unknown ref_source '" + val + "'");
            }
        } else if (key == "n") {
            cfg.n = parse_u64(val);
        } else if (key == "w") {
            cfg.w = parse_u64(val);
        } else if (key == "symbol_size") {
            cfg.symbol_size = parse_u64(val);
        } else if (key == "generation_duration_us") {
            cfg.generation_duration_us = parse_u64(val);
        } else if (key == "buffering_us") {
            cfg.buffering_us = parse_u64(val);
        } else if (key == "session_generations") {
            cfg.session_generations = parse_u64(val);
        } else if (key == "source_bandwidth_bps") {
            cfg.source_bandwidth_bps =
                val == "auto" ? std::nullopt : std::optional<double>(parse_f64(val));
        } else if (key == "peer_bandwidth_bps") {
            cfg.peer_bandwidth_bps =
                val == "auto" ? std::nullopt : std::optional<double>(parse_f64(val));
        } else if (key == "loss") {
            cfg.loss = parse_f64(val);
        } else if (key == "p_gen") {
            cfg.p_gen = parse_f64(val);
        } else if (key == "latency_us") {
            cfg.latency_us = parse_u64(val);
        } else {
            raise(ErrorKind::Parameter, "config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

Overlay build_overlay(const SimConfig& cfg, Rng& rng) {
    validate_config(cfg);
    const std::size_t p = cfg.peer_count;
    Overlay ov;
    ov.peer_count = p;
    ov.neighbors.assign(p + 1, {});
    if (p == 1) return ov;

    if (cfg.full_mesh) {
        for (std::uint32_t a = 1; a <= p; ++a) {
            for (std::uint32_t b = a + 1; b <= p; ++b) ov.edges.emplace_back(a, b);
        }
    } else {
        const double q = cfg.er_expected_degree / static_cast<double>(p - 1);
        for (int attempt = 0; attempt < 10000; ++attempt) {
            std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
            std::vector<std::vector<std::uint32_t>> adj(p + 1);
            for (std::uint32_t a = 1; a <= p; ++a) {
                for (std::uint32_t b = a + 1; b <= p; ++b) {
                    if (rng.next_double() < q) {
                        edges.emplace_back(a, b);
                        adj[a].push_back(b);
                        adj[b].push_back(a);
                    }
                }
            }
            // Connectivity check over the peer-only graph.
            std::vector<char> seen(p + 1, 0);
            std::vector<std::uint32_t> stack{1};
            seen[1] = 1;
            std::size_t reached = 1;
            while (!stack.empty()) {
                const auto v = stack.back();
                stack.pop_back();
                for (const auto u : adj[v]) {
                    if (!seen[u]) {
                        seen[u] = 1;
                        ++reached;
                        stack.push_back(u);
                    }
                }
            }
            if (reached == p) {
                ov.edges = std::move(edges);
                break;
            }
        }
        if (ov.edges.empty()) {
            raise(ErrorKind::RetryExhausted, "could not sample a connected overlay");
        }
    }
    for (const auto& [a, b] : ov.edges) {
        ov.neighbors[a].push_back(b);
        ov.neighbors[b].push_back(a);
    }
    for (auto& v : ov.neighbors) std::sort(v.begin(), v.end());
    return ov;
}

std::size_t pick_geometric(std::size_t count, double p_gen, Rng& rng) {
    if (count == 0) raise(ErrorKind::Parameter, "pick_geometric: empty candidate set");
    double total = 0;
    double wk = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
        total += wk;
        wk *= 1.0 - p_gen;
    }
    const double u = rng.next_double() * total;
    double cum = 0;
    wk = 1.0;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        cum += wk;
        if (u < cum) return k;
        wk *= 1.0 - p_gen;
    }
    return count - 1;
}

std::int64_t playback_position(const SimConfig& cfg, std::uint64_t t_us) {
    if (t_us < cfg.buffering_us) return -1;
    return static_cast<std::int64_t>((t_us - cfg.buffering_us) / cfg.generation_duration_us);
}

std::uint64_t playout_deadline_us(const SimConfig& cfg, std::uint32_t gen) {
    return cfg.buffering_us + static_cast<std::uint64_t>(gen) * cfg.generation_duration_us;
}

namespace {

struct PeerGenState {
    std::optional<SgeState> state;
    std::vector<BandPacket> buffer; // ReferenceNC arm only, freed at decode
    bool decoded = false;
};

struct Event {
    enum class Kind { Tx, Data, Stop };
    std::uint64_t t = 0;
    std::uint64_t seq = 0;
    Kind kind = Kind::Tx;
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    std::uint32_t gen = 0;
    DecodingMap map;
    std::shared_ptr<const BandPacket> pkt;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, const SimHooks& hooks) : cfg_(cfg), hooks_(hooks) {
        validate_config(cfg);
        node_count_ = cfg.peer_count + 1;
        gen_count_ = cfg.session_generations;
        m_ = map_width(cfg);
        decode_w_ = cfg.arm == Arm::BandCodes ? cfg.w : cfg.n;
        t_end_ = cfg.buffering_us +
                 static_cast<std::uint64_t>(gen_count_) * cfg.generation_duration_us;

        Rng overlay_rng = Rng::derive(cfg.seed, 7);
        overlay_ = build_overlay(cfg, overlay_rng);
        out_peers_.assign(node_count_, {});
        for (std::uint32_t p = 1; p < node_count_; ++p) {
            out_peers_[0].push_back(p);
            out_peers_[p] = overlay_.neighbors[p];
        }

        node_rng_.reserve(node_count_);
        for (std::size_t i = 0; i < node_count_; ++i) {
            node_rng_.push_back(Rng::derive(cfg.seed, 100 + i));
        }
        if (cfg.arm == Arm::ReferenceNC && cfg.ref_source == RefSource::RobustSoliton) {
            rsd_.emplace(DegreeDistribution::robust_soliton(cfg.n));
        }

        gens_.resize(gen_count_);
        know_.assign(node_count_ * node_count_, std::vector<bool>(gen_count_, false));
        own_decoded_.assign(node_count_, std::vector<bool>(gen_count_, false));
        pstates_.resize(node_count_);
        rr_cursor_.assign(node_count_, 0);

        metrics_.node_count = node_count_;
        metrics_.nodes.assign(node_count_, {});
        metrics_.degree_hist.assign(cfg.n + 1, 0);
        metrics_.links.assign(node_count_ * node_count_, {});
        metrics_.decode_latency_us.assign(gen_count_, -1.0);
        lat_sum_.assign(gen_count_, 0.0);
        lat_cnt_.assign(gen_count_, 0);

        const double wire_bits =
            8.0 * static_cast<double>(serialized_packet_size(decode_w_, cfg.symbol_size) +
                                      serialized_map_size(static_cast<std::uint8_t>(m_)));
        period_source_ = period_from(resolved_source_bandwidth(cfg), wire_bits);
        period_peer_ = period_from(resolved_peer_bandwidth(cfg), wire_bits);
    }

    SimMetrics run() {
        if (period_source_ > 0 && !out_peers_[0].empty()) {
            push_tx(0, 0);
        }
        if (period_peer_ > 0) {
            for (std::uint32_t p = 1; p < node_count_; ++p) {
                if (!out_peers_[p].empty()) {
                    push_tx(p, period_peer_ * (p - 1) / cfg_.peer_count);
                }
            }
        }

        while (!queue_.empty()) {
            const Event ev = queue_.top();
            queue_.pop();
            sweep_stale(playback_position(cfg_, ev.t));
            switch (ev.kind) {
            case Event::Kind::Tx:
                if (ev.t < t_end_) handle_tx(ev);
                break;
            case Event::Kind::Data:
                handle_data(ev);
                break;
            case Event::Kind::Stop:
                handle_stop(ev);
                break;
            }
        }

        for (std::uint32_t p = 1; p < node_count_; ++p) {
            for (auto& [gen, ps] : pstates_[p]) harvest_counters(p, ps);
            pstates_[p].clear();
        }
        finalize();
        return std::move(metrics_);
    }

private:
    static std::uint64_t period_from(double bandwidth_bps, double wire_bits) {
        if (!(bandwidth_bps > 0)) return 0;
        const double us = wire_bits * 1e6 / bandwidth_bps;
        return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(us)));
    }

    const Generation& gen_data(std::uint32_t g) {
        if (!gens_[g]) {
            Rng grng = Rng::derive(cfg_.seed, 0x9e000000ull + g);
            gens_[g] = Generation::random(g, cfg_.n, cfg_.symbol_size, grng);
        }
        return *gens_[g];
    }

    void trace(TraceEvent::Kind kind, std::uint64_t t, std::uint32_t from, std::uint32_t to,
               std::uint32_t gen) {
        if (hooks_.trace) hooks_.trace(TraceEvent{kind, t, from, to, gen});
    }

    void push_tx(std::uint32_t node, std::uint64_t t) {
        Event ev;
        ev.t = t;
        ev.seq = seq_++;
        ev.kind = Event::Kind::Tx;
        ev.from = node;
        queue_.push(std::move(ev));
    }

    LinkStats& link(std::uint32_t from, std::uint32_t to) {
        return metrics_.links[from * node_count_ + to];
    }

    void sweep_stale(std::int64_t pp) {
        if (pp <= swept_pp_) return;
        swept_pp_ = pp;
        for (std::uint32_t p = 1; p < node_count_; ++p) {
            auto& states = pstates_[p];
            for (auto it = states.begin(); it != states.end();) {
                if (static_cast<std::int64_t>(it->first) <= pp) {
                    harvest_counters(p, it->second);
                    it = states.erase(it);
                } else {
                    ++it;
                }
            }
        }
    }

    void harvest_counters(std::uint32_t node, PeerGenState& ps) {
        if (!ps.state) return;
        auto& nm = metrics_.nodes[node];
        nm.xor_triangularization += ps.state->counters().triangularization;
        nm.xor_diagonalization += ps.state->counters().diagonalization;
        ps.state.reset();
    }

    DecodingMap own_map(std::uint32_t node, std::int64_t lo) const {
        DecodingMap map;
        map.base = static_cast<std::uint32_t>(lo);
        map.width = static_cast<std::uint8_t>(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            const std::uint64_t g = static_cast<std::uint64_t>(lo) + k;
            if (g >= gen_count_) break;
            if (node == 0 || own_decoded_[node][g]) map.bits |= std::uint64_t{1} << k;
        }
        return map;
    }

    bool can_serve(std::uint32_t node, std::uint32_t gen) {
        if (node == 0) return true;
        const auto it = pstates_[node].find(gen);
        if (it == pstates_[node].end()) return false;
        const auto& ps = it->second;
        if (ps.decoded) return true;
        if (cfg_.arm == Arm::BandCodes) return ps.state && ps.state->rank() >= 1;
        return !ps.buffer.empty();
    }

    BandPacket make_packet(std::uint32_t node, std::uint32_t gen) {
        Rng& rng = node_rng_[node];
        if (node == 0) {
            const auto& data = gen_data(gen);
            if (cfg_.arm == Arm::BandCodes) return encode_source_packet(data, cfg_.w, rng);
            if (rsd_) return reference_nc_encode(data, *rsd_, rng);
            return reference_nc_encode(data, rng);
        }
        auto& ps = pstates_[node].at(gen);
        if (cfg_.arm == Arm::BandCodes) return recombine(*ps.state, cfg_.w, rng);
        if (ps.decoded) return reference_nc_recombine(*ps.state, rng);
        return reference_nc_recombine(ps.buffer, rng);
    }

    void handle_tx(const Event& ev) {
        const std::uint32_t node = ev.from;
        const std::uint64_t t = ev.t;
        push_tx(node, t + (node == 0 ? period_source_ : period_peer_));

        const std::int64_t pp = playback_position(cfg_, t);
        const std::uint64_t sp = t / cfg_.generation_duration_us;
        const std::int64_t lo = pp + 1;
        const std::int64_t hi =
            std::min<std::int64_t>(static_cast<std::int64_t>(sp),
                                   static_cast<std::int64_t>(gen_count_) - 1);
        if (hi < lo) return;

        const auto& outs = out_peers_[node];
        std::vector<std::uint32_t> candidates;
        for (std::size_t attempt = 0; attempt < outs.size(); ++attempt) {
            const std::uint32_t r = outs[rr_cursor_[node] % outs.size()];
            ++rr_cursor_[node];
            candidates.clear();
            if (node == 0) {
                if (static_cast<std::int64_t>(sp) <= hi &&
                    !know_[0 * node_count_ + r][sp]) {
                    candidates.push_back(static_cast<std::uint32_t>(sp));
                }
            } else {
                for (std::int64_t g = lo; g <= hi; ++g) {
                    const auto gen = static_cast<std::uint32_t>(g);
                    if (know_[node * node_count_ + r][gen]) continue;
                    if (!can_serve(node, gen)) continue;
                    candidates.push_back(gen);
                }
            }
            if (candidates.empty()) continue;

            const std::size_t idx =
                pick_geometric(candidates.size(), cfg_.p_gen, node_rng_[node]);
            const std::uint32_t gen = candidates[idx];

            Event data;
            data.t = t + cfg_.latency_us;
            data.seq = seq_++;
            data.kind = Event::Kind::Data;
            data.from = node;
            data.to = r;
            data.gen = gen;
            data.map = own_map(node, lo);
            data.pkt = std::make_shared<const BandPacket>(make_packet(node, gen));

            link(node, r).sent += 1;
            trace(TraceEvent::Kind::DataSent, t, node, r, gen);
            if (node_rng_[node].next_double() < cfg_.loss) {
                link(node, r).lost += 1;
                trace(TraceEvent::Kind::DataLost, t, node, r, gen);
            } else {
                queue_.push(std::move(data));
            }
            return;
        }
    }

    void apply_map(std::uint32_t owner, std::uint32_t about, const DecodingMap& map) {
        auto& view = know_[owner * node_count_ + about];
        for (std::size_t k = 0; k < map.width; ++k) {
            const std::uint64_t g = static_cast<std::uint64_t>(map.base) + k;
            if (g >= gen_count_) break;
            if ((map.bits >> k) & 1u) view[g] = true;
        }
    }

    void handle_data(const Event& ev) {
        const std::uint32_t node = ev.to;
        apply_map(node, ev.from, ev.map);

        const std::int64_t pp = playback_position(cfg_, ev.t);
        if (static_cast<std::int64_t>(ev.gen) <= pp) {
            link(ev.from, node).dropped_stale += 1;
            trace(TraceEvent::Kind::DataStale, ev.t, ev.from, node, ev.gen);
            return;
        }

        link(ev.from, node).received += 1;
        auto& nm = metrics_.nodes[node];
        nm.received_data += 1;
        if (ev.from == 0) nm.received_from_source += 1;
        metrics_.degree_hist[ev.pkt->coeffs.degree()] += 1;
        trace(TraceEvent::Kind::DataReceived, ev.t, ev.from, node, ev.gen);

        auto& ps = pstates_[node][ev.gen];
        if (ps.decoded) return;
        if (!ps.state) {
            ps.state.emplace(ev.gen, cfg_.n, decode_w_, cfg_.symbol_size);
        }
        if (cfg_.arm == Arm::ReferenceNC) ps.buffer.push_back(*ev.pkt);
        ps.state->receive(*ev.pkt);

        if (ps.state->complete() && !ps.state->diagonalized()) {
            const auto symbols = ps.state->diagonalize();
            const auto& truth = gen_data(ev.gen);
            if (symbols != truth.symbols) {
                raise(ErrorKind::Consistency, "decoded symbols disagree with the source");
            }
            ps.decoded = true;
            ps.buffer.clear();
            ps.buffer.shrink_to_fit();
            own_decoded_[node][ev.gen] = true;

            nm.decoded += 1;
            if (ev.t <= playout_deadline_us(cfg_, ev.gen)) nm.decoded_on_time += 1;
            nm.overhead_sum += *ps.state->report().overhead;
            lat_sum_[ev.gen] += static_cast<double>(
                ev.t - static_cast<std::uint64_t>(ev.gen) * cfg_.generation_duration_us);
            lat_cnt_[ev.gen] += 1;
            trace(TraceEvent::Kind::Decoded, ev.t, node, node, ev.gen);
            broadcast_stop(node, ev.gen, ev.t);
        }
    }

    void broadcast_stop(std::uint32_t node, std::uint32_t gen, std::uint64_t t) {
        auto dests = out_peers_[node];
        dests.push_back(0); // the source tracks decodes too
        for (const auto dest : dests) {
            metrics_.stops_sent += 1;
            trace(TraceEvent::Kind::StopSent, t, node, dest, gen);
            const bool forced =
                hooks_.drop_stop && hooks_.drop_stop(node, dest, gen);
            if (forced || node_rng_[node].next_double() < cfg_.loss) {
                metrics_.stops_lost += 1;
                trace(TraceEvent::Kind::StopLost, t, node, dest, gen);
                continue;
            }
            Event ev;
            ev.t = t + cfg_.latency_us;
            ev.seq = seq_++;
            ev.kind = Event::Kind::Stop;
            ev.from = node;
            ev.to = dest;
            ev.gen = gen;
            queue_.push(std::move(ev));
        }
    }

    void handle_stop(const Event& ev) {
        know_[ev.to * node_count_ + ev.from][ev.gen] = true;
        metrics_.stops_received += 1;
        trace(TraceEvent::Kind::StopReceived, ev.t, ev.from, ev.to, ev.gen);
    }

    void finalize() {
        double ci_sum = 0;
        std::uint64_t decoded = 0, recv = 0, recv_src = 0;
        double overhead_sum = 0;
        for (std::uint32_t p = 1; p < node_count_; ++p) {
            auto& nm = metrics_.nodes[p];
            nm.continuity_index =
                static_cast<double>(nm.decoded_on_time) / static_cast<double>(gen_count_);
            ci_sum += nm.continuity_index;
            decoded += nm.decoded;
            overhead_sum += nm.overhead_sum;
            recv += nm.received_data;
            recv_src += nm.received_from_source;
        }
        metrics_.mean_continuity_index = ci_sum / static_cast<double>(cfg_.peer_count);
        metrics_.mean_overhead =
            decoded ? overhead_sum / static_cast<double>(decoded) : 0.0;
        metrics_.source_fraction =
            recv ? static_cast<double>(recv_src) / static_cast<double>(recv) : 0.0;
        for (std::size_t g = 0; g < gen_count_; ++g) {
            if (lat_cnt_[g]) {
                metrics_.decode_latency_us[g] = lat_sum_[g] / static_cast<double>(lat_cnt_[g]);
            }
        }
    }

    SimConfig cfg_;
    SimHooks hooks_;
    std::size_t node_count_ = 0;
    std::size_t gen_count_ = 0;
    std::size_t m_ = 0;
    std::size_t decode_w_ = 0;
    std::uint64_t t_end_ = 0;
    std::uint64_t period_source_ = 0;
    std::uint64_t period_peer_ = 0;
    std::uint64_t seq_ = 0;
    std::int64_t swept_pp_ = -1;

    Overlay overlay_;
    std::vector<std::vector<std::uint32_t>> out_peers_;
    std::vector<Rng> node_rng_;
    std::optional<DegreeDistribution> rsd_;
    std::vector<std::optional<Generation>> gens_;
    std::vector<std::vector<bool>> know_;
    std::vector<std::vector<bool>> own_decoded_;
    std::vector<std::map<std::uint32_t, PeerGenState>> pstates_;
    std::vector<std::size_t> rr_cursor_;
    std::vector<double> lat_sum_;
    std::vector<std::uint64_t> lat_cnt_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    SimMetrics metrics_;
};

} // namespace

SimMetrics run_session(const SimConfig& cfg) { return run_session(cfg, SimHooks{}); }

SimMetrics run_session(const SimConfig& cfg, const SimHooks& hooks) {
    Simulation sim(cfg, hooks);
    return sim.run();
}

} // namespace bandcodes
