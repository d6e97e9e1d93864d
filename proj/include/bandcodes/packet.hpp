#pragma once

#include <cstdint>
#include <vector>

#include "bandcodes/bitvec.hpp"
#include "bandcodes/errors.hpp"
#include "bandcodes/rng.hpp"
#include "bandcodes/window.hpp"

namespace bandcodes {

// Opaque payload bytes; every symbol of a generation has the same size.
using Payload = std::vector<std::uint8_t>;

inline void xor_payload(Payload& dst, const Payload& src) {
    if (dst.size() != src.size()) {
        raise(ErrorKind::Dimension, "payload size mismatch");
    }
    kernels::xor_bytes(dst.data(), src.data(), dst.size());
}

// One generation: N source symbols of symbol_size bytes each.
struct Generation {
    std::uint32_t id = 0;
    std::vector<Payload> symbols;

    std::size_t n() const { return symbols.size(); }
    std::size_t symbol_size() const { return symbols.empty() ? 0 : symbols[0].size(); }

    static Generation random(std::uint32_t id, std::size_t n, std::size_t symbol_size, Rng& rng) {
        if (n == 0 || symbol_size == 0) {
            raise(ErrorKind::Parameter, "generation needs n >= 1 and symbol_size >= 1");
        }
        Generation g;
        g.id = id;
        g.symbols.resize(n);
        for (auto& s : g.symbols) {
            s.resize(symbol_size);
            for (std::size_t i = 0; i < symbol_size; ++i) {
                s[i] = static_cast<std::uint8_t>(rng.next_u64());
            }
        }
        return g;
    }
};

// Coded packet: full-length coefficient vector over the generation plus the
// declared window it was drawn in. The support of `coeffs` always lies
// inside `window`; receivers re-derive tighter bounds from the actual
// leading/trailing ones.
struct BandPacket {
    std::uint32_t generation_id = 0;
    Window window;
    BitVector coeffs; // length N
    Payload payload;

    bool support_in_window() const {
        auto lead = coeffs.leading_one();
        if (!lead) return true;
        return *lead >= window.first && *coeffs.trailing_one() <= window.last();
    }
};

// Wire framing, little-endian throughout:
//   magic "BC01"
//   u32 generation_id
//   u16 N, u16 W, u16 f
//   ceil(W/8) coefficient bytes, bit j (LSB first) = coefficient f + j
//   u32 payload length, payload bytes
std::vector<std::uint8_t> serialize_packet(const BandPacket& pkt);
BandPacket deserialize_packet(const std::uint8_t* data, std::size_t size);

inline BandPacket deserialize_packet(const std::vector<std::uint8_t>& buf) {
    return deserialize_packet(buf.data(), buf.size());
}

std::size_t serialized_packet_size(std::size_t coeff_width, std::size_t payload_size);

} // namespace bandcodes
